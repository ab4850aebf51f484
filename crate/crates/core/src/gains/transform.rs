use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::potential::PotentialSpec;
use super::synthesis::{build_q_vector, GainProfile};
use crate::error::{Error, Result};
use crate::linalg::{identity_defect, singular_value_extremes, DenseLu, ILL_CONDITIONED};
use crate::spectral::{Parity, SpectralFunction};

/// Largest accepted `||T T^{-1} - I||`, relative.
pub const INVERSE_TOLERANCE: f64 = 1e-10;

/// Dense truncated transform of one parity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FredholmTransform {
    pub parity: Parity,
    pub n_max: usize,
    pub lambda: f64,
    #[serde(with = "row_major")]
    pub matrix: DMatrix<f64>,
    #[serde(with = "row_major")]
    pub inverse: DMatrix<f64>,
    pub cond_l2: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
}

/// Column `n` of `T` holds `-K_n q_n`.
pub fn assemble_transform(gains: &GainProfile, potentials: &PotentialSpec, parity: Parity) -> Result<FredholmTransform> {
    let n_max = gains.n_max;
    if potentials.n_max() != n_max {
        return Err(Error::ShapeMismatch {
            expected: format!("potentials with truncation order {n_max}"),
            found: format!("{}", potentials.n_max()),
        });
    }
    let k = gains.gains(parity);
    let dim = parity.len(n_max);
    let mut matrix = DMatrix::zeros(dim, dim);
    for (j, n) in parity.modes(n_max).enumerate() {
        let q = build_q_vector(n, gains.lambda, potentials, parity)?;
        for (i, c) in q.coeffs(parity).iter().enumerate() {
            matrix[(i, j)] = -k[j] * c;
        }
    }
    let lu = DenseLu::new(&matrix)?;
    let cond1 = lu.cond1_estimate();
    let singular = |cond| Error::IllConditioned {
        what: "Fredholm transform",
        cond,
        threshold: ILL_CONDITIONED,
    };
    if !(cond1 <= ILL_CONDITIONED) {
        return Err(singular(cond1));
    }
    let inverse = lu.inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let defect = identity_defect(&matrix, &inverse);
    if defect > INVERSE_TOLERANCE {
        return Err(Error::IllConditioned {
            what: "Fredholm transform inverse",
            cond: cond1,
            threshold: ILL_CONDITIONED,
        });
    }
    let (sigma_max, sigma_min) = singular_value_extremes(&matrix);
    Ok(FredholmTransform {
        parity,
        n_max,
        lambda: gains.lambda,
        matrix,
        inverse,
        cond_l2: sigma_max / sigma_min,
        sigma_max,
        sigma_min,
    })
}

impl FredholmTransform {
    fn check(&self, f: &SpectralFunction) -> Result<()> {
        if f.n_max() != self.n_max {
            return Err(Error::ShapeMismatch {
                expected: format!("truncation order {}", self.n_max),
                found: format!("{}", f.n_max()),
            });
        }
        Ok(())
    }

    fn multiply(&self, m: &DMatrix<f64>, f: &SpectralFunction) -> Result<SpectralFunction> {
        self.check(f)?;
        let v = m * DVector::from_column_slice(f.coeffs(self.parity));
        let mut out = SpectralFunction::zeros(self.n_max);
        out.coeffs_mut(self.parity).copy_from_slice(v.as_slice());
        Ok(out)
    }

    /// Coefficients of `T f_n`.
    pub fn column(&self, n: usize) -> Option<SpectralFunction> {
        let j = self.parity.slot(n).filter(|_| n <= self.n_max)?;
        let mut out = SpectralFunction::zeros(self.n_max);
        out.coeffs_mut(self.parity)
            .copy_from_slice(self.matrix.column(j).as_slice());
        Some(out)
    }
}

/// `T_k f`; the opposite parity of `f` is annihilated.
pub fn apply_transform(t: &FredholmTransform, f: &SpectralFunction) -> Result<SpectralFunction> {
    t.multiply(&t.matrix, f)
}

/// `T_k^{-1} f` on this parity; the opposite parity is annihilated.
pub fn apply_inverse(t: &FredholmTransform, f: &SpectralFunction) -> Result<SpectralFunction> {
    t.multiply(&t.inverse, f)
}

/// `T_12 = T_1 + T_2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformPair {
    pub odd: FredholmTransform,
    pub even: FredholmTransform,
}

impl TransformPair {
    pub fn assemble(gains: &GainProfile, potentials: &PotentialSpec) -> Result<Self> {
        Ok(TransformPair {
            odd: assemble_transform(gains, potentials, Parity::Odd)?,
            even: assemble_transform(gains, potentials, Parity::Even)?,
        })
    }

    pub fn get(&self, parity: Parity) -> &FredholmTransform {
        match parity {
            Parity::Odd => &self.odd,
            Parity::Even => &self.even,
        }
    }

    pub fn apply(&self, f: &SpectralFunction) -> Result<SpectralFunction> {
        Ok(apply_transform(&self.odd, f)?.add(&apply_transform(&self.even, f)?))
    }

    pub fn apply_inverse(&self, f: &SpectralFunction) -> Result<SpectralFunction> {
        Ok(apply_inverse(&self.odd, f)?.add(&apply_inverse(&self.even, f)?))
    }

    /// Condition number of the block-diagonal `T_12` in the coefficient l2 norm.
    pub fn cond_l2(&self) -> f64 {
        self.odd.sigma_max.max(self.even.sigma_max) / self.odd.sigma_min.min(self.even.sigma_min)
    }
}

mod row_major {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Dense {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let data = m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect();
        Dense {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DMatrix<f64>, D::Error> {
        let dense = Dense::deserialize(d)?;
        if dense.data.len() != dense.rows * dense.cols {
            return Err(serde::de::Error::custom(format!(
                "matrix data has {} entries, expected {}x{}",
                dense.data.len(),
                dense.rows,
                dense.cols
            )));
        }
        Ok(DMatrix::from_row_slice(dense.rows, dense.cols, &dense.data))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gains::PotentialProfile;

    #[test]
    fn one_mode_transform_is_identity() {
        let pot = PotentialSpec::new(0.0, vec![1.0], vec![1.0, 1.0], PotentialProfile::Explicit).unwrap();
        let gains = GainProfile::synthesize(6.0, &pot).unwrap();
        let t = assemble_transform(&gains, &pot, Parity::Odd).unwrap();
        assert!((t.matrix[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((t.inverse[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn columns_and_parity() {
        let pot = PotentialSpec::constant(8, 1.0).unwrap();
        let gains = GainProfile::synthesize(6.0, &pot).unwrap();
        let t = assemble_transform(&gains, &pot, Parity::Odd).unwrap();
        let f3 = SpectralFunction::basis(8, Parity::Odd, 3).unwrap();
        let got = apply_transform(&t, &f3).unwrap();
        let q3 = build_q_vector(3, 6.0, &pot, Parity::Odd).unwrap().scaled(-gains.odd_gains[2]);
        assert!(got.sub(&q3).iter().all(|(_, _, c)| c.abs() < 1e-12));
        assert_eq!(t.column(3).unwrap(), got);

        let even = SpectralFunction::basis(8, Parity::Even, 0).unwrap();
        assert!(apply_transform(&t, &even).unwrap().is_zero());
        assert!(apply_transform(&t, &SpectralFunction::zeros(7)).is_err());
    }

    #[test]
    fn json_is_row_major() {
        let pot = PotentialSpec::constant(2, 1.0).unwrap();
        let gains = GainProfile::synthesize(6.0, &pot).unwrap();
        let t = assemble_transform(&gains, &pot, Parity::Odd).unwrap();
        let v: serde_json::Value = serde_json::to_value(&t).unwrap();
        assert_eq!(v["matrix"]["rows"], 2);
        let data = v["matrix"]["data"].as_array().unwrap();
        assert_eq!(data[1].as_f64().unwrap(), t.matrix[(0, 1)]);
        let back: FredholmTransform = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }
}
