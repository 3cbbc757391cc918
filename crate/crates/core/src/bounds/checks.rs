use serde::{Deserialize, Serialize};

use super::population::{population_delta_k, PopulationMethod};
use super::quadrature::{l2_distance_sq, l2_norm_sq};
use super::remainder::remainder_r;
use crate::ballgeom::{ols, phi, volume_exact, AxisBox, VolumeMethod};
use crate::density::DensitySpec;
use crate::distances::{DistanceSpec, Domain};
use crate::error::{Error, Result};

/// Numerical settings shared by the bound checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundOptions {
    /// Quadrature panels per axis.
    pub panels: usize,
    /// Integration box for `L²` norms; a covering box by default.
    pub integration_box: Option<AxisBox>,
    /// Outer Monte Carlo points for the remainder.
    pub remainder_n: usize,
    /// Hit-or-miss draws for `Φ(ξ, t)` when no closed form exists.
    pub volume_n: usize,
    pub population: PopulationMethod,
    pub seed: u64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            panels: 64,
            integration_box: None,
            remainder_n: 20_000,
            volume_n: 1_000_000,
            population: PopulationMethod::default(),
            seed: 0,
        }
    }
}

/// Reference center: ones on the positive orthant, the north pole on the
/// sphere and the origin otherwise.
pub fn default_xi(spec: &DistanceSpec) -> Vec<f64> {
    match spec.domain() {
        Domain::PositiveOrthant => vec![1.0; spec.dim],
        Domain::UnitSphere => {
            let mut v = vec![0.0; spec.dim];
            v[spec.dim - 1] = 1.0;
            v
        }
        Domain::Euclidean => vec![0.0; spec.dim],
    }
}

fn volume_method(spec: &DistanceSpec, xi: &[f64], t: f64, opts: &BoundOptions) -> Result<VolumeMethod> {
    Ok(match volume_exact(spec, xi, t)? {
        Some(_) => VolumeMethod::Exact,
        None => VolumeMethod::MonteCarlo { n: opts.volume_n, seed: opts.seed },
    })
}

/// Ingredients of a bound evaluation, echoed for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub t: f64,
    pub xi: Vec<f64>,
    /// `c` for the `L²` inequality, `C` for the `Δ_K` inequality.
    pub constant: f64,
    /// `δ_*` or `δ^*`.
    pub delta_bound: f64,
    pub phi_xi: f64,
    pub delta_k: f64,
    pub delta_k_stderr: f64,
    pub l2_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remainder: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remainder_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_g: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
    pub tolerance: f64,
    pub inputs: BoundInputs,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64, tolerance: f64, inputs: BoundInputs) -> Self {
        BoundCheck { lhs, rhs, holds: lhs <= rhs + tolerance, slack: rhs - lhs, tolerance, inputs }
    }
}

fn check_constants(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter("bound constants must be positive and finite".into()))
    }
}

/// `‖f − g‖² ≤ (c δ_*)⁻¹ [Δ_K(t) / Φ(ξ, t) + r(ξ, t)]`.
#[allow(clippy::too_many_arguments)]
pub fn check_ineq_l2(
    spec: &DistanceSpec,
    f: &DensitySpec,
    g: &DensitySpec,
    xi: &[f64],
    t: f64,
    (c, delta_star): (f64, f64),
    opts: &BoundOptions,
) -> Result<BoundCheck> {
    check_constants(c, delta_star)?;
    let l2 = l2_distance_sq(f, g, opts.integration_box.as_ref(), opts.panels)?;
    let dk = population_delta_k(spec, f, g, t, opts.population)?;
    let vm = volume_method(spec, xi, t, opts)?;
    let phi_xi = phi(spec, xi, t, vm)?;
    if phi_xi <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let r = remainder_r(spec, f, g, xi, t, opts.remainder_n, opts.seed, vm)?;
    let scale = 1.0 / (c * delta_star);
    let rhs = scale * (dk.value / phi_xi + r.value);
    let tolerance =
        1e-9 + 3.0 * scale * (dk.stderr / phi_xi + r.stderr) + l2.quadrature_error + l2.truncation_tail;
    Ok(BoundCheck::new(
        l2.value,
        rhs,
        tolerance,
        BoundInputs {
            t,
            xi: xi.to_vec(),
            constant: c,
            delta_bound: delta_star,
            phi_xi,
            delta_k: dk.value,
            delta_k_stderr: dk.stderr,
            l2_sq: l2.value,
            remainder: Some(r.value),
            remainder_stderr: Some(r.stderr),
            norm_f: None,
            norm_g: None,
        },
    ))
}

/// `Δ_K(t) ≤ C δ^* Φ(ξ, t) (‖f‖ + ‖g‖) ‖f − g‖`.
#[allow(clippy::too_many_arguments)]
pub fn check_ineq_delta_k(
    spec: &DistanceSpec,
    f: &DensitySpec,
    g: &DensitySpec,
    xi: &[f64],
    t: f64,
    (big_c, delta_sup): (f64, f64),
    opts: &BoundOptions,
) -> Result<BoundCheck> {
    check_constants(big_c, delta_sup)?;
    let bx = opts.integration_box.as_ref();
    let l2 = l2_distance_sq(f, g, bx, opts.panels)?;
    let nf = l2_norm_sq(f, bx, opts.panels)?;
    let ng = l2_norm_sq(g, bx, opts.panels)?;
    let dk = population_delta_k(spec, f, g, t, opts.population)?;
    let phi_xi = phi(spec, xi, t, volume_method(spec, xi, t, opts)?)?;
    let (norm_f, norm_g, dist) = (nf.value.sqrt(), ng.value.sqrt(), l2.value.sqrt());
    let factor = big_c * delta_sup * phi_xi;
    let rhs = factor * (norm_f + norm_g) * dist;
    // |√a − √b| ≤ √|a − b| turns squared-norm errors into norm errors
    let err = |r: &super::L2Report| (r.quadrature_error + r.truncation_tail).sqrt();
    let rhs_err = factor * ((err(&nf) + err(&ng)) * dist + (norm_f + norm_g) * err(&l2));
    let tolerance = 1e-9 + 3.0 * dk.stderr + rhs_err;
    Ok(BoundCheck::new(
        dk.value,
        rhs,
        tolerance,
        BoundInputs {
            t,
            xi: xi.to_vec(),
            constant: big_c,
            delta_bound: delta_sup,
            phi_xi,
            delta_k: dk.value,
            delta_k_stderr: dk.stderr,
            l2_sq: l2.value,
            remainder: None,
            remainder_stderr: None,
            norm_f: Some(norm_f),
            norm_g: Some(norm_g),
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// `(ln Δ_K(∞), ln ‖f − g‖²)` per ladder value.
    pub points: Vec<(f64, f64)>,
    pub theoretical_exponent: f64,
    /// Smallest `Ĉ` with `‖f − g‖² ≤ Ĉ Δ_K^{β/(α+β)}` at every point.
    pub c_hat: f64,
    pub ladder: Vec<f64>,
    pub bound_holds: bool,
}

/// Shift `base` along the first axis by each ladder value and relate
/// `‖f − g‖²` to `Δ_K(∞)`.
pub fn rate_experiment(
    spec: &DistanceSpec,
    base: &DensitySpec,
    ladder: &[f64],
    alpha: f64,
    beta: f64,
    opts: &BoundOptions,
) -> Result<RateFit> {
    if ladder.len() < 4 {
        return Err(Error::InvalidParameter(format!("ladder needs >= 4 values, got {}", ladder.len())));
    }
    if ladder.iter().any(|m| !(m.is_finite() && *m >= 0.0)) || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("ladder must be strictly decreasing and nonnegative".into()));
    }
    check_constants(alpha, beta)?;
    let exponent = beta / (alpha + beta);
    let mut points = Vec::with_capacity(ladder.len());
    for (j, &mu) in ladder.iter().enumerate() {
        let g = base.shifted(mu)?;
        let dk = population_delta_k(spec, base, &g, f64::INFINITY, opts.population)?;
        if dk.value <= 0.0 {
            return Err(Error::DegenerateLadder(j));
        }
        let l2 = l2_distance_sq(base, &g, opts.integration_box.as_ref(), opts.panels)?;
        points.push((dk.value.ln(), l2.value.ln()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (slope, intercept, _) = ols(&xs, &ys);
    let ln_c = points.iter().map(|(x, y)| y - exponent * x).fold(f64::NEG_INFINITY, f64::max);
    let bound_holds = points.iter().all(|(x, y)| *y <= ln_c + exponent * x + 1e-12);
    Ok(RateFit {
        slope,
        intercept,
        points,
        theoretical_exponent: exponent,
        c_hat: ln_c.exp(),
        ladder: ladder.to_vec(),
        bound_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(shift: f64) -> DensitySpec {
        DensitySpec::standard_gaussian_shifted(1, shift)
    }

    #[test]
    fn identical_densities() {
        let l2 = DistanceSpec::lp(2.0, 1).unwrap();
        let opts = BoundOptions::default();
        let a = check_ineq_l2(&l2, &gauss(0.0), &gauss(0.0), &[0.0], 0.1, (1.0, 1.0), &opts).unwrap();
        assert!(a.holds && a.lhs.abs() < 1e-12 && a.rhs == 0.0 && a.slack.abs() < 1e-12);
        let b = check_ineq_delta_k(&l2, &gauss(0.0), &gauss(0.0), &[0.0], 0.1, (1.0, 1.0), &opts).unwrap();
        assert!(b.holds && b.lhs == 0.0);
    }

    #[test]
    fn gaussian_shift_checks_hold() {
        let l2 = DistanceSpec::lp(2.0, 1).unwrap();
        let opts = BoundOptions::default();
        let a = check_ineq_l2(&l2, &gauss(0.0), &gauss(1.0), &[0.0], 0.1, (1.0, 1.0), &opts).unwrap();
        assert!(a.holds && a.slack > 0.0, "{a:?}");
        let b = check_ineq_delta_k(&l2, &gauss(0.0), &gauss(0.5), &[0.0], 0.1, (1.0, 1.0), &opts).unwrap();
        assert!(b.holds, "{b:?}");
        assert!((b.inputs.norm_f.unwrap().powi(2) - 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn delta_k_rhs_is_linear_in_phi() {
        let l2 = DistanceSpec::lp(2.0, 1).unwrap();
        let opts = BoundOptions::default();
        let a = check_ineq_delta_k(&l2, &gauss(0.0), &gauss(0.5), &[0.0], 0.05, (1.0, 1.0), &opts).unwrap();
        let b = check_ineq_delta_k(&l2, &gauss(0.0), &gauss(0.5), &[0.0], 0.1, (1.0, 1.0), &opts).unwrap();
        assert!((b.rhs / a.rhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rate_ladders() {
        let l2 = DistanceSpec::lp(2.0, 1).unwrap();
        let opts = BoundOptions::default();
        let fit = rate_experiment(&l2, &gauss(0.0), &[0.4, 0.2, 0.1, 0.05], 1.0, 1.0, &opts).unwrap();
        assert!(fit.bound_holds && fit.slope >= 0.5 - 0.05, "{fit:?}");
        assert_eq!(fit.theoretical_exponent, 0.5);

        let l2_2 = DistanceSpec::lp(2.0, 2).unwrap();
        let base = DensitySpec::standard_gaussian_shifted(2, 0.0);
        let fit = rate_experiment(&l2_2, &base, &[0.4, 0.2, 0.1, 0.05], 2.0, 1.0, &opts).unwrap();
        assert!(fit.bound_holds && fit.slope >= 1.0 / 3.0 - 0.05, "{fit:?}");

        assert_eq!(
            rate_experiment(&l2, &gauss(0.0), &[0.4, 0.2, 0.1, 0.0], 1.0, 1.0, &opts),
            Err(Error::DegenerateLadder(3))
        );
        assert!(rate_experiment(&l2, &gauss(0.0), &[0.4, 0.2, 0.1], 1.0, 1.0, &opts).is_err());
    }

    #[test]
    fn default_centers() {
        assert_eq!(default_xi(&DistanceSpec::canberra(2)), vec![0.0, 0.0]);
        assert_eq!(default_xi(&DistanceSpec::entropic(2)), vec![1.0, 1.0]);
        assert_eq!(default_xi(&DistanceSpec::sphere(3).unwrap()), vec![0.0, 0.0, 1.0]);
    }
}
