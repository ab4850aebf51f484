use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gains::{build_q_vector, PotentialSpec};
use crate::spectral::{mode_weight, Parity, SpectralFunction};

/// Relative norm below which a Gram-Schmidt remainder counts as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Extreme squared singular values `(C_1, C_2)` of the family in the `H^s` weighting.
pub fn riesz_frame_bounds(vectors: &[SpectralFunction], s: f64) -> Result<(f64, f64)> {
    if vectors.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    let n_max = vectors.iter().map(SpectralFunction::n_max).max().unwrap_or(0);
    let rows = 2 * n_max + 1;
    let weights: Vec<f64> = Parity::BOTH
        .iter()
        .flat_map(|&p| p.modes(n_max).map(move |n| mode_weight(n, s).sqrt()))
        .collect();
    let mut a = DMatrix::zeros(rows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        for (i, c) in v.resized(n_max).to_flat().into_iter().enumerate() {
            a[(i, j)] = weights[i] * c;
        }
    }
    check_rank(&a)?;
    let sv = a.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((min * min, max * max))
}

/// Modified Gram-Schmidt; reports the first column that adds no new direction.
fn check_rank(a: &DMatrix<f64>) -> Result<()> {
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    for (j, col) in a.column_iter().enumerate() {
        let mut v = col.clone_owned();
        let norm0 = v.norm();
        for b in &basis {
            let c = b.dot(&v);
            v.axpy(-c, b, 1.0);
        }
        let norm = v.norm();
        if norm0 == 0.0 || norm <= RANK_TOLERANCE * norm0 || j >= a.nrows() {
            return Err(Error::RankDeficient { index: j });
        }
        basis.push(v / norm);
    }
    Ok(())
}

/// `{n^{-s} q_n}` for one parity, the family whose Riesz bounds are tested in `H^{m+s}`.
pub fn q_family(lambda: f64, potentials: &PotentialSpec, s: f64, parity: Parity) -> Result<Vec<SpectralFunction>> {
    parity
        .modes(potentials.n_max())
        .map(|n| Ok(build_q_vector(n, lambda, potentials, parity)?.scaled(mode_weight(n, -s / 2.0))))
        .collect()
}
