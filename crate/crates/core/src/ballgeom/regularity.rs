use rand::Rng;
use serde::{Deserialize, Serialize};

use super::volume::{bounding_box, par_chunks, phi, volume_exact, VolumeMethod};
use crate::distances::{DistanceSpec, Family};
use crate::error::{Error, Result};

/// Dyadic radius grid `t_max · 2^{-j}`, `j = 0..levels`.
pub fn dyadic_grid(t_max: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|j| t_max * 0.5f64.powi(j as i32)).collect()
}

/// `δ_t(x, y) = Φ(x, t) / Φ(y, t)`.
///
/// Both volumes use the same method; for Monte Carlo they also share the
/// seed, so the ratio benefits from common random numbers.
pub fn delta_t(spec: &DistanceSpec, x: &[f64], y: &[f64], t: f64, method: VolumeMethod) -> Result<f64> {
    let py = phi(spec, y, t, method)?;
    if py <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(phi(spec, x, t, method)? / py)
}

/// Analytic small-ball limit `δ(x, y)` of the volume ratio, if one exists.
pub fn delta_limit(spec: &DistanceSpec, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    spec.check_point(x)?;
    spec.check_point(y)?;
    let k = spec.dim as i32;
    let v = match spec.family {
        Family::Canberra => {
            if y.contains(&0.0) {
                return Err(Error::DomainViolation("δ(x, y) needs y off the coordinate axes".into()));
            }
            Some(x.iter().zip(y).map(|(a, b)| (a / b).abs()).product())
        }
        // the Bray-Curtis ball is a cross-polytope of l1 radius ∝ Σxᵢ
        Family::BrayCurtis => Some((x.iter().sum::<f64>() / y.iter().sum::<f64>()).powi(k)),
        Family::Entropic => Some(x.iter().zip(y).map(|(a, b)| (a / b).sqrt()).product()),
        Family::OscillatoryTest { .. } => None,
        Family::Lp { .. } | Family::LpPowP { .. } | Family::MonotoneTransform { .. } | Family::SphereGeodesic { .. } => {
            Some(1.0)
        }
    };
    Ok(v)
}

/// Verdict thresholds. The defaults are pragmatic, not canonical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityConfig {
    /// Accepted band for `δ_t / δ`.
    pub sandwich: (f64, f64),
    /// Monotone drift of `δ_t` across the grid beyond this factor is a violation.
    pub divergence_factor: f64,
    /// `Φ(x, t_last) < shrink · Φ(x, t_first)` is required for consistency.
    pub shrink: f64,
}

impl Default for RegularityConfig {
    fn default() -> Self {
        RegularityConfig { sandwich: (1.0 / 3.0, 3.0), divergence_factor: 10.0, shrink: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    VolumeRegularConsistent,
    Inconclusive,
    ViolationDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub t_grid: Vec<f64>,
    pub phi_x: Vec<f64>,
    pub phi_y: Vec<f64>,
    pub delta_t_values: Vec<f64>,
    pub delta_limit: Option<f64>,
    /// `(ĉ, Ĉ)`: extreme values of `δ_t / δ`, or of `δ_t` when `δ` is absent.
    pub sandwich: (f64, f64),
    pub verdict: Verdict,
    pub method: VolumeMethod,
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 5 {
        return Err(Error::InvalidParameter(format!("radius grid needs >= 5 points, got {}", t_grid.len())));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidParameter("radius grid must be positive and finite".into()));
    }
    Ok(())
}

/// Pick exact volumes when every grid point has a closed form at both centers.
fn choose_method(spec: &DistanceSpec, centers: &[&[f64]], t_grid: &[f64], mc_n: usize, seed: u64) -> Result<VolumeMethod> {
    for c in centers {
        for &t in t_grid {
            if volume_exact(spec, c, t)?.is_none() {
                return Ok(VolumeMethod::MonteCarlo { n: mc_n, seed });
            }
        }
    }
    Ok(VolumeMethod::Exact)
}

/// [`check_volume_regularity_with`] under the default thresholds.
pub fn check_volume_regularity(
    spec: &DistanceSpec,
    x: &[f64],
    y: &[f64],
    t_grid: &[f64],
    mc_n: usize,
    seed: u64,
) -> Result<RegularityReport> {
    check_volume_regularity_with(spec, x, y, t_grid, mc_n, seed, &RegularityConfig::default())
}

/// Tabulate `Φ(x, t)`, `Φ(y, t)` and `δ_t` over a strictly decreasing grid
/// and classify the behavior.
pub fn check_volume_regularity_with(
    spec: &DistanceSpec,
    x: &[f64],
    y: &[f64],
    t_grid: &[f64],
    mc_n: usize,
    seed: u64,
    cfg: &RegularityConfig,
) -> Result<RegularityReport> {
    check_grid(t_grid)?;
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("radius grid must be strictly decreasing".into()));
    }
    let method = choose_method(spec, &[x, y], t_grid, mc_n, seed)?;
    let mut phi_x = Vec::with_capacity(t_grid.len());
    let mut phi_y = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        phi_x.push(phi(spec, x, t, method)?);
        phi_y.push(phi(spec, y, t, method)?);
    }
    if phi_y.iter().any(|&v| v <= 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    let deltas: Vec<f64> = phi_x.iter().zip(&phi_y).map(|(a, b)| a / b).collect();
    let limit = delta_limit(spec, x, y)?;
    let scaled: Vec<f64> = deltas.iter().map(|d| d / limit.unwrap_or(1.0)).collect();
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let shrinking = phi_x.windows(2).all(|w| w[1] < w[0]) && phi_x[phi_x.len() - 1] < cfg.shrink * phi_x[0];
    let finite = deltas.iter().all(|d| d.is_finite() && *d > 0.0);
    let banded = limit.is_none() || scaled.iter().all(|r| *r >= cfg.sandwich.0 && *r <= cfg.sandwich.1);
    let monotone = deltas.windows(2).all(|w| w[1] >= w[0]) || deltas.windows(2).all(|w| w[1] <= w[0]);
    let (first, last) = (deltas[0], deltas[deltas.len() - 1]);
    let drift = if first > 0.0 && last > 0.0 { (last / first).max(first / last) } else { f64::INFINITY };

    let verdict = if deltas.contains(&0.0) || (monotone && drift > cfg.divergence_factor) {
        Verdict::ViolationDetected
    } else if shrinking && finite && banded {
        Verdict::VolumeRegularConsistent
    } else {
        Verdict::Inconclusive
    };
    Ok(RegularityReport {
        t_grid: t_grid.to_vec(),
        phi_x,
        phi_y,
        delta_t_values: deltas,
        delta_limit: limit,
        sandwich: (lo, hi),
        verdict,
        method,
    })
}

/// Log-log least-squares fit of `Φ(x, t)` against `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhlforsFit {
    pub alpha_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub t_grid: Vec<f64>,
    pub phi: Vec<f64>,
    pub method: VolumeMethod,
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, r²)`.
pub(crate) fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (b, my - b * mx, r2)
}

/// Estimate the growth exponent `α` in `Φ(x, t) ≈ C t^α`.
///
/// Monte Carlo volumes at different radii reuse one seed, which smooths the
/// log-log curve.
pub fn estimate_ahlfors_alpha(spec: &DistanceSpec, x: &[f64], t_grid: &[f64], mc_n: usize, seed: u64) -> Result<AhlforsFit> {
    check_grid(t_grid)?;
    let method = choose_method(spec, &[x], t_grid, mc_n, seed)?;
    let phis = t_grid.iter().map(|&t| phi(spec, x, t, method)).collect::<Result<Vec<_>>>()?;
    if let Some(j) = phis.iter().position(|&v| v <= 0.0) {
        return Err(Error::PreconditionViolation(format!("zero volume at t = {}", t_grid[j])));
    }
    let lx: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = phis.iter().map(|v| v.ln()).collect();
    let (alpha_hat, intercept, r_squared) = ols(&lx, &ly);
    Ok(AhlforsFit { alpha_hat, intercept, r_squared, t_grid: t_grid.to_vec(), phi: phis, method })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationEntry {
    pub t: f64,
    pub mean_abs_dev: f64,
    pub stderr: f64,
    pub accepted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationEstimate {
    pub value: f64,
    pub per_t: Vec<OscillationEntry>,
}

/// Ball averages of `|f(y) − f(x)|` by rejection sampling in the bounding box,
/// one entry per radius.
pub fn centered_oscillation<F>(
    f: &F,
    spec: &DistanceSpec,
    x: &[f64],
    t_grid: &[f64],
    mc_n: usize,
    seed: u64,
) -> Result<OscillationEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    const MIN_ACCEPTED: usize = 100;
    let fx = f(x);
    let k = spec.dim;
    let mut per_t = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let bx = bounding_box(spec, x, t)?;
        let parts: Vec<(usize, f64, f64)> = par_chunks(mc_n, seed, |rng, len| {
            let mut u = vec![0.0; k];
            let mut y = vec![0.0; k];
            let (mut n, mut s, mut s2) = (0usize, 0.0, 0.0);
            for _ in 0..len {
                u.iter_mut().for_each(|v| *v = rng.random::<f64>());
                bx.map_into(&u, &mut y);
                if spec.ball_contains(x, &y, t) {
                    let d = (f(&y) - fx).abs();
                    n += 1;
                    s += d;
                    s2 += d * d;
                }
            }
            (n, s, s2)
        });
        let (n, s, s2) = parts.iter().fold((0, 0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1, a.2 + p.2));
        if n < MIN_ACCEPTED {
            return Err(Error::InsufficientAcceptance { accepted: n, required: MIN_ACCEPTED, t });
        }
        let mean = s / n as f64;
        let var = (s2 / n as f64 - mean * mean).max(0.0);
        per_t.push(OscillationEntry { t, mean_abs_dev: mean, stderr: (var / n as f64).sqrt(), accepted: n });
    }
    let value = per_t.iter().map(|e| e.mean_abs_dev).fold(0.0, f64::max);
    Ok(OscillationEstimate { value, per_t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballgeom::volume_bounds;

    #[test]
    fn delta_t_examples() {
        let c1 = DistanceSpec::canberra(1);
        for &t in &[0.01, 0.3, 0.9] {
            assert!((delta_t(&c1, &[4.0], &[2.0], t, VolumeMethod::Exact).unwrap() - 2.0).abs() < 1e-12);
        }
        let l2 = DistanceSpec::lp(2.0, 2).unwrap();
        assert_eq!(delta_t(&l2, &[0.0, 5.0], &[3.0, 1.0], 0.2, VolumeMethod::Exact).unwrap(), 1.0);
        assert_eq!(
            delta_t(&c1, &[4.0], &[0.0], 0.2, VolumeMethod::Exact),
            Err(Error::DegenerateDenominator)
        );
        let c2 = DistanceSpec::canberra(2);
        let mc = VolumeMethod::MonteCarlo { n: 1000, seed: 1 };
        assert_eq!(delta_t(&c2, &[1.0, 1.0], &[0.0, 1.0], 0.2, mc), Err(Error::DegenerateDenominator));
    }

    #[test]
    fn entropic_delta_t_inside_bounds_ratio() {
        let e1 = DistanceSpec::entropic(1);
        let (x, y) = ([4.0], [1.0]);
        for &t in &[1e-2, 1e-3, 1e-4] {
            let d = delta_t(&e1, &x, &y, t, VolumeMethod::MonteCarlo { n: 200_000, seed: 7 }).unwrap();
            let bx = volume_bounds(&e1, &x, t).unwrap();
            let by = volume_bounds(&e1, &y, t).unwrap();
            assert!(d >= bx.lower / by.upper && d <= bx.upper / by.lower, "t={t}: {d}");
        }
    }

    #[test]
    fn delta_limit_examples() {
        let c2 = DistanceSpec::canberra(2);
        assert!((delta_limit(&c2, &[4.0, 9.0], &[2.0, 3.0]).unwrap().unwrap() - 6.0).abs() < 1e-15);
        let e2 = DistanceSpec::entropic(2);
        assert!((delta_limit(&e2, &[4.0, 9.0], &[1.0, 1.0]).unwrap().unwrap() - 6.0).abs() < 1e-15);
        let l1 = DistanceSpec::lp(1.0, 3).unwrap();
        assert_eq!(delta_limit(&l1, &[1.0, 2.0, 3.0], &[-4.0, 0.0, 8.0]).unwrap(), Some(1.0));
        let osc = DistanceSpec::oscillatory(0.2, 0.5, 1).unwrap();
        assert_eq!(delta_limit(&osc, &[0.0], &[1.0]).unwrap(), None);
        assert!(matches!(delta_limit(&c2, &[1.0, 1.0], &[0.0, 1.0]), Err(Error::DomainViolation(_))));
        assert!(delta_limit(&e2, &[1.0, 1.0], &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn regularity_canberra_mc() {
        let c2 = DistanceSpec::canberra(2);
        let grid = [0.2, 0.1, 0.05, 0.02, 0.01];
        let rep = check_volume_regularity(&c2, &[1.0, 1.0], &[2.0, 3.0], &grid, 100_000, 11).unwrap();
        assert_eq!(rep.verdict, Verdict::VolumeRegularConsistent, "{rep:?}");
        assert!((rep.delta_limit.unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(rep.sandwich.0 >= 1.0 / 3.0 && rep.sandwich.1 <= 3.0);
        assert!(matches!(rep.method, VolumeMethod::MonteCarlo { .. }));
    }

    #[test]
    fn regularity_l2_exact() {
        let l2 = DistanceSpec::lp(2.0, 3).unwrap();
        let rep = check_volume_regularity(&l2, &[0.0; 3], &[1.0, -2.0, 5.0], &dyadic_grid(0.5, 8), 1000, 0).unwrap();
        assert_eq!(rep.verdict, Verdict::VolumeRegularConsistent);
        assert_eq!(rep.method, VolumeMethod::Exact);
        assert!(rep.delta_t_values.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn regularity_oscillatory_band() {
        let osc = DistanceSpec::oscillatory(0.4, 0.9, 1).unwrap();
        let (x, y) = ([2.0], [-2.0]);
        let grid: Vec<f64> = (0..12).map(|j| 0.1 * 0.4f64.powi(j)).collect();
        let rep = check_volume_regularity(&osc, &x, &y, &grid, 1000, 0).unwrap();
        assert_eq!(rep.verdict, Verdict::VolumeRegularConsistent, "{rep:?}");
        assert_eq!(rep.delta_limit, None);
        let d = &rep.delta_t_values;
        let ups = d.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(ups > 0 && ups < d.len() - 1, "expected oscillation: {d:?}");
        let band = (1.0 + 0.4) / (1.0 - 0.4);
        assert!(rep.sandwich.0 >= 1.0 / band && rep.sandwich.1 <= band);
    }

    #[test]
    fn regularity_rejects_bad_grids() {
        let l2 = DistanceSpec::lp(2.0, 1).unwrap();
        assert!(check_volume_regularity(&l2, &[0.0], &[1.0], &[0.1, 0.05], 1000, 0).is_err());
        assert!(check_volume_regularity(&l2, &[0.0], &[1.0], &[0.1, 0.2, 0.05, 0.01, 0.001], 1000, 0).is_err());
    }

    #[test]
    fn ahlfors_slopes() {
        let grid: Vec<f64> = (3..=8).map(|j| 0.5f64.powi(j)).collect();
        let l2 = DistanceSpec::lp(2.0, 3).unwrap();
        let fit = estimate_ahlfors_alpha(&l2, &[0.0; 3], &grid, 1000, 0).unwrap();
        assert!((fit.alpha_hat - 3.0).abs() < 1e-9);
        let pp = DistanceSpec::lp_pow_p(3.0, 2).unwrap();
        let fit = estimate_ahlfors_alpha(&pp, &[0.0; 2], &grid, 1000, 0).unwrap();
        assert!((fit.alpha_hat - 2.0 / 3.0).abs() < 1e-9);

        let c2 = DistanceSpec::canberra(2);
        let fit = estimate_ahlfors_alpha(&c2, &[1.0, 1.0], &dyadic_grid(0.2, 6), 200_000, 3).unwrap();
        assert!(fit.alpha_hat >= 1.8 && fit.alpha_hat <= 2.2, "{fit:?}");
    }

    #[test]
    fn oscillation_examples() {
        let gauss = |y: &[f64]| (-0.5 * y[0] * y[0]).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let c1 = DistanceSpec::canberra(1);
        let est = centered_oscillation(&gauss, &c1, &[2.0], &[0.1, 0.05, 0.01], 100_000, 5).unwrap();
        let v: Vec<f64> = est.per_t.iter().map(|e| e.mean_abs_dev).collect();
        assert!(v.iter().all(|&a| a > 0.0) && v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
        assert_eq!(est.value, v[0]);
        // mean value bound: |f'| ≤ φ(1) and the ball is the interval (x(1-t)/(1+t), x(1+t)/(1-t))
        for e in &est.per_t {
            let diam = 2.0 * (1.0 + e.t) / (1.0 - e.t) - 2.0 * (1.0 - e.t) / (1.0 + e.t);
            assert!(e.mean_abs_dev <= 0.241_970_724_519_143_37 * diam);
        }

        let constant = |_: &[f64]| 0.25;
        let est = centered_oscillation(&constant, &c1, &[3.0], &[0.1, 0.01], 10_000, 1).unwrap();
        assert!(est.per_t.iter().all(|e| e.mean_abs_dev == 0.0));
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn oscillation_reports_low_acceptance() {
        // the Bray-Curtis box is far larger than the ball in high dimension
        let bc = DistanceSpec::bray_curtis(6);
        let r = centered_oscillation(&|_: &[f64]| 1.0, &bc, &[1.0; 6], &[0.01], 1000, 0);
        assert!(matches!(r, Err(Error::InsufficientAcceptance { .. })), "{r:?}");
    }
}
