use super::SimTrajectory;
use crate::error::{Error, Result};
use crate::gains::TransformPair;
use crate::spectral::{sobolev_norm, Parity, SobolevIndex, SpectralFunction};

const WINDOW_SLACK: f64 = 1e-9;

/// Least-squares slope of `-log norm` against time on `[t_start, t_end]`.
pub fn fit_log_slope(times: &[f64], norms: &[f64], t_start: f64, t_end: f64) -> Result<f64> {
    let mut pts = Vec::new();
    for (&t, &v) in times.iter().zip(norms) {
        if t < t_start - WINDOW_SLACK || t > t_end + WINDOW_SLACK {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NormUnderflow { time: t, norm: v });
        }
        pts.push((t, v.ln()));
    }
    if pts.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "fit window [{t_start}, {t_end}] contains {} snapshot(s); need at least 2",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in &pts {
        sxy += (t - tm) * (l - lm);
        sxx += (t - tm) * (t - tm);
    }
    Ok(-sxy / sxx)
}

/// Decay rate of `||y(t)||_{H^{norm_index}}` on a window inside the trajectory.
pub fn fit_decay_rate(traj: &SimTrajectory, t_start: f64, t_end: f64, norm_index: f64) -> Result<f64> {
    let first = traj.times.first().copied().unwrap_or(0.0);
    let last = traj.times.last().copied().unwrap_or(0.0);
    if !(t_start < t_end) || t_start < first - WINDOW_SLACK || t_end > last + WINDOW_SLACK {
        return Err(Error::InvalidInput(format!(
            "fit window [{t_start}, {t_end}] is not inside the trajectory [{first}, {last}]"
        )));
    }
    let s = SobolevIndex::new(norm_index)?;
    let norms: Vec<f64> = traj.states.iter().map(|y| sobolev_norm(y, s)).collect();
    fit_log_slope(&traj.times, &norms, t_start, t_end)
}

/// Smallest `C` with `||y(t)||_{L^2} <= C e^{-lambda t} ||y_0||_{L^2}` on the snapshots.
pub fn decay_constant(traj: &SimTrajectory, lambda: f64) -> f64 {
    let norms: Vec<f64> = traj.states.iter().map(|y| sobolev_norm(y, SobolevIndex::L2)).collect();
    let y0 = norms[0];
    if y0 == 0.0 {
        return 0.0;
    }
    traj.times
        .iter()
        .zip(&norms)
        .map(|(t, v)| v * (lambda * t).exp() / y0)
        .fold(0.0, f64::max)
}

/// `sqrt(2 pi) a_0(t)` per snapshot.
pub fn mass_probe(traj: &SimTrajectory) -> Vec<f64> {
    traj.states.iter().map(SpectralFunction::mass).collect()
}

/// `max_t |u_n^odd phi_n^even - u_n^even phi_n^odd|`.
pub fn noncontrollability_invariant(traj: &SimTrajectory, phi: &SpectralFunction, n: usize) -> Result<f64> {
    let n_max = traj.states.first().map_or(0, SpectralFunction::n_max);
    if n == 0 || n > n_max {
        return Err(Error::InvalidInput(format!("mode {n} is outside 1..={n_max}")));
    }
    let (po, pe) = (phi.get(Parity::Odd, n), phi.get(Parity::Even, n));
    Ok(traj
        .states
        .iter()
        .map(|u| (u.get(Parity::Odd, n) * pe - u.get(Parity::Even, n) * po).abs())
        .fold(0.0, f64::max))
}

/// `||z(t_{i+1}) - e^{(Delta - lambda)(t_{i+1} - t_i)} z(t_i)||_{L^2}` for `z = T_12 y`.
pub fn target_residuals(traj: &SimTrajectory, transform: &TransformPair, lambda: f64) -> Result<Vec<f64>> {
    let z: Vec<SpectralFunction> = traj.states.iter().map(|y| transform.apply(y)).collect::<Result<_>>()?;
    Ok(z.windows(2)
        .zip(traj.times.windows(2))
        .map(|(zs, ts)| {
            let h = ts[1] - ts[0];
            let predicted = zs[0].heat_propagated(h).scaled((-lambda * h).exp());
            sobolev_norm(&zs[1].sub(&predicted), SobolevIndex::L2)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_slope() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let norms: Vec<f64> = times.iter().map(|t| 2.0 * (-3.0 * t).exp()).collect();
        let rate = fit_log_slope(&times, &norms, 1.0, 4.9).unwrap();
        assert!((rate - 3.0).abs() < 1e-10);
    }

    #[test]
    fn underflow_is_reported() {
        let times = [0.0, 1.0, 2.0];
        let norms = [1.0, 0.0, 0.0];
        assert!(matches!(
            fit_log_slope(&times, &norms, 0.0, 2.0),
            Err(Error::NormUnderflow { .. })
        ));
    }
}
