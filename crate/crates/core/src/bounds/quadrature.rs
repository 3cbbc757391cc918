use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ballgeom::AxisBox;
use crate::density::DensitySpec;
use crate::error::{Error, Result};

/// Gauss–Legendre nodes per panel.
const ORDER: usize = 8;
/// Required probability mass inside the integration box.
pub const MIN_COVERAGE: f64 = 1.0 - 1e-6;
/// Refuse tensor grids beyond this many nodes.
const MAX_NODES: f64 = 4e8;

/// Squared `L²` distance with its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Report {
    pub value: f64,
    /// `|I(n) − I(n/2)|` between full and half panel counts.
    pub quadrature_error: f64,
    /// Bound on `∫ (f − g)²` outside the box.
    pub truncation_tail: f64,
    /// Smallest mass of `f` or `g` inside the box.
    pub coverage: f64,
    pub panels: usize,
}

/// Composite rule on `[a, b]` with `panels` panels.
fn composite(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(ORDER).expect("nonzero order"));
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + p as f64 * h;
            rule.as_node_weight_pairs()
                .iter()
                .map(move |&(x, w)| (lo + 0.5 * h * (x + 1.0), 0.5 * h * w))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Tensor-product integral of `f` over `bx`.
fn tensor_integral<F: Fn(&[f64]) -> f64 + Sync>(f: &F, bx: &AxisBox, panels: usize) -> Result<f64> {
    let k = bx.lower.len();
    let axes: Vec<Vec<(f64, f64)>> = (0..k).map(|i| composite(bx.lower[i], bx.upper[i], panels)).collect();
    let total: f64 = axes.iter().map(|a| a.len() as f64).product();
    if total > MAX_NODES {
        return Err(Error::InvalidParameter(format!("quadrature grid of {total:.0} nodes is too large")));
    }
    Ok(axes[0]
        .par_iter()
        .map(|&(x0, w0)| {
            let mut idx = vec![0usize; k];
            let mut p = vec![0.0; k];
            p[0] = x0;
            let mut acc = 0.0;
            loop {
                let mut w = w0;
                for d in 1..k {
                    let (x, wd) = axes[d][idx[d]];
                    p[d] = x;
                    w *= wd;
                }
                acc += w * f(&p);
                // odometer over axes 1..k
                let mut d = 1;
                while d < k {
                    idx[d] += 1;
                    if idx[d] < axes[d].len() {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d >= k {
                    break;
                }
            }
            acc
        })
        .sum())
}

/// Integral over S² in `(z, φ)` coordinates, where the area element is `dz dφ`.
fn sphere_integral<F: Fn(&[f64]) -> f64 + Sync>(f: &F, panels: usize) -> f64 {
    let zs = composite(-1.0, 1.0, panels);
    let n_phi = 2 * zs.len();
    let h = 2.0 * std::f64::consts::PI / n_phi as f64;
    zs.par_iter()
        .map(|&(z, w)| {
            let r = (1.0 - z * z).max(0.0).sqrt();
            let ring: f64 = (0..n_phi)
                .map(|j| {
                    let phi = j as f64 * h;
                    f(&[r * phi.cos(), r * phi.sin(), z])
                })
                .sum();
            w * h * ring
        })
        .sum()
}

/// Box holding all but a negligible part of the mass of each density.
pub fn default_box(densities: &[&DensitySpec]) -> Option<AxisBox> {
    let k = densities[0].dim();
    let mut lower = vec![f64::INFINITY; k];
    let mut upper = vec![f64::NEG_INFINITY; k];
    for d in densities {
        for i in 0..k {
            let (lo, hi) = match d {
                DensitySpec::DiagGaussian { mean, var } => (mean[i] - 8.0 * var[i].sqrt(), mean[i] + 8.0 * var[i].sqrt()),
                DensitySpec::ProductExponential { rates } => (0.0, 30.0 / rates[i]),
                DensitySpec::ProductLognormal { mu, sigma } => (0.0, (mu[i] + 8.0 * sigma[i]).exp()),
                DensitySpec::FisherS2 { .. } => return None,
            };
            lower[i] = lower[i].min(lo);
            upper[i] = upper[i].max(hi);
        }
    }
    Some(AxisBox { lower, upper })
}

fn mass_inside(d: &DensitySpec, bx: &AxisBox) -> f64 {
    (0..d.dim())
        .map(|i| {
            let hi = d.marginal_cdf(i, bx.upper[i]).expect("product family");
            let lo = d.marginal_cdf(i, bx.lower[i]).expect("product family");
            hi - lo
        })
        .product()
}

fn check_pair(f: &DensitySpec, g: &DensitySpec) -> Result<()> {
    f.validate()?;
    g.validate()?;
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), found: g.dim() });
    }
    if f.domain() != g.domain() {
        return Err(Error::InvalidParameter("densities live on different domains".into()));
    }
    Ok(())
}

/// `∫ integrand` over the box (or the sphere) at `panels` and `panels / 2`.
fn integrate_with_error<F: Fn(&[f64]) -> f64 + Sync>(
    integrand: &F,
    bx: Option<&AxisBox>,
    panels: usize,
) -> Result<(f64, f64)> {
    if panels < 32 {
        return Err(Error::InvalidParameter(format!("need at least 32 panels per axis, got {panels}")));
    }
    let (full, half) = match bx {
        Some(b) => (tensor_integral(integrand, b, panels)?, tensor_integral(integrand, b, panels / 2)?),
        None => (sphere_integral(integrand, panels), sphere_integral(integrand, panels / 2)),
    };
    Ok((full, (full - half).abs()))
}

/// `‖f − g‖²_{L²}` by tensor Gauss–Legendre quadrature over `bx` (default:
/// a box covering both densities; the whole sphere for Fisher densities).
pub fn l2_distance_sq(f: &DensitySpec, g: &DensitySpec, bx: Option<&AxisBox>, panels: usize) -> Result<L2Report> {
    check_pair(f, g)?;
    let integrand = |x: &[f64]| {
        let d = f.pdf(x) - g.pdf(x);
        d * d
    };
    integrate_report(&integrand, &[f, g], bx, panels)
}

/// `‖f‖²_{L²}`, i.e. [`l2_distance_sq`] against the zero function.
pub fn l2_norm_sq(f: &DensitySpec, bx: Option<&AxisBox>, panels: usize) -> Result<L2Report> {
    f.validate()?;
    let integrand = |x: &[f64]| f.pdf(x).powi(2);
    integrate_report(&integrand, &[f], bx, panels)
}

fn integrate_report<F: Fn(&[f64]) -> f64 + Sync>(
    integrand: &F,
    densities: &[&DensitySpec],
    bx: Option<&AxisBox>,
    panels: usize,
) -> Result<L2Report> {
    if matches!(densities[0], DensitySpec::FisherS2 { .. }) {
        let (value, quadrature_error) = integrate_with_error(integrand, None, panels)?;
        return Ok(L2Report { value: value.max(0.0), quadrature_error, truncation_tail: 0.0, coverage: 1.0, panels });
    }
    let bx = match bx {
        Some(b) => {
            if b.lower.len() != densities[0].dim() || b.upper.len() != densities[0].dim() {
                return Err(Error::DimensionMismatch { expected: densities[0].dim(), found: b.lower.len() });
            }
            b.clone()
        }
        None => default_box(densities).expect("product families have a default box"),
    };
    let masses: Vec<f64> = densities.iter().map(|d| mass_inside(d, &bx)).collect();
    let coverage = masses.iter().cloned().fold(1.0, f64::min);
    if coverage < MIN_COVERAGE {
        return Err(Error::InsufficientCoverage { coverage });
    }
    let truncation_tail = densities.iter().zip(&masses).map(|(d, m)| d.sup_pdf() * (1.0 - m).max(0.0)).sum();
    let (value, quadrature_error) = integrate_with_error(integrand, Some(&bx), panels)?;
    Ok(L2Report { value: value.max(0.0), quadrature_error, truncation_tail, coverage, panels })
}
