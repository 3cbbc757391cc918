//! Analytic density families used both as samplers and as integrands.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::distances::{norm2, Domain, SPHERE_TOL};
use crate::error::{Error, Result};
use crate::special::normal_cdf;

/// A product or spherical density with closed-form normalizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensitySpec {
    /// Independent normal coordinates.
    DiagGaussian { mean: Vec<f64>, var: Vec<f64> },
    /// Independent exponential coordinates on the positive orthant.
    ProductExponential { rates: Vec<f64> },
    /// Independent lognormal coordinates, `ln xᵢ ~ N(muᵢ, sigmaᵢ²)`.
    ProductLognormal { mu: Vec<f64>, sigma: Vec<f64> },
    /// Fisher density `∝ exp(κ ⟨x, μ⟩)` on S² w.r.t. surface area; `κ = 0` is uniform.
    FisherS2 { kappa: f64, mu: [f64; 3] },
}

impl DensitySpec {
    pub fn gaussian(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        let d = DensitySpec::DiagGaussian { mean, var };
        d.validate()?;
        Ok(d)
    }

    /// Isotropic standard normal in `k` dimensions, shifted by `shift` along the first axis.
    pub fn standard_gaussian_shifted(k: usize, shift: f64) -> Self {
        let mut mean = vec![0.0; k];
        mean[0] = shift;
        DensitySpec::DiagGaussian { mean, var: vec![1.0; k] }
    }

    pub fn uniform_sphere() -> Self {
        DensitySpec::FisherS2 { kappa: 0.0, mu: [0.0, 0.0, 1.0] }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        let positive = |v: &[f64]| v.iter().all(|s| s.is_finite() && *s > 0.0);
        let finite = |v: &[f64]| v.iter().all(|s| s.is_finite());
        match self {
            DensitySpec::DiagGaussian { mean, var } => {
                if mean.is_empty() || mean.len() != var.len() {
                    return bad("gaussian mean and var must be nonempty and of equal length");
                }
                if !finite(mean) || !positive(var) {
                    return bad("gaussian needs finite means and positive variances");
                }
            }
            DensitySpec::ProductExponential { rates } => {
                if rates.is_empty() || !positive(rates) {
                    return bad("exponential rates must be nonempty and positive");
                }
            }
            DensitySpec::ProductLognormal { mu, sigma } => {
                if mu.is_empty() || mu.len() != sigma.len() {
                    return bad("lognormal mu and sigma must be nonempty and of equal length");
                }
                if !finite(mu) || !positive(sigma) {
                    return bad("lognormal needs finite mu and positive sigma");
                }
            }
            DensitySpec::FisherS2 { kappa, mu } => {
                if !(kappa.is_finite() && *kappa >= 0.0) {
                    return bad("fisher kappa must be finite and >= 0");
                }
                if (norm2(mu) - 1.0).abs() > SPHERE_TOL {
                    return bad("fisher mean direction must be a unit vector");
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            DensitySpec::DiagGaussian { mean, .. } => mean.len(),
            DensitySpec::ProductExponential { rates } => rates.len(),
            DensitySpec::ProductLognormal { mu, .. } => mu.len(),
            DensitySpec::FisherS2 { .. } => 3,
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            DensitySpec::DiagGaussian { .. } => Domain::Euclidean,
            DensitySpec::ProductExponential { .. } | DensitySpec::ProductLognormal { .. } => Domain::PositiveOrthant,
            DensitySpec::FisherS2 { .. } => Domain::UnitSphere,
        }
    }

    /// Density at `x`; zero outside the support. Sphere densities are taken
    /// with respect to surface area and evaluated at `x / |x|`.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        match self {
            DensitySpec::DiagGaussian { mean, var } => x
                .iter()
                .zip(mean.iter().zip(var))
                .map(|(v, (m, s2))| (-(v - m).powi(2) / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt())
                .product(),
            DensitySpec::ProductExponential { rates } => {
                if x.iter().any(|&v| v < 0.0) {
                    return 0.0;
                }
                x.iter().zip(rates).map(|(v, r)| r * (-r * v).exp()).product()
            }
            DensitySpec::ProductLognormal { mu, sigma } => {
                if x.iter().any(|&v| v <= 0.0) {
                    return 0.0;
                }
                x.iter()
                    .zip(mu.iter().zip(sigma))
                    .map(|(v, (m, s))| {
                        (-(v.ln() - m).powi(2) / (2.0 * s * s)).exp() / (v * s * (2.0 * PI).sqrt())
                    })
                    .product()
            }
            DensitySpec::FisherS2 { kappa, mu } => {
                if *kappa == 0.0 {
                    return 0.25 / PI;
                }
                let n = norm2(x);
                let c: f64 = x.iter().zip(mu).map(|(a, b)| a * b).sum::<f64>() / n;
                // κ / (4π sinh κ) · e^{κc}, rearranged to avoid overflow
                kappa / (2.0 * PI * (-(-2.0 * kappa).exp_m1())) * (kappa * (c - 1.0)).exp()
            }
        }
    }

    /// Marginal CDF of coordinate `i` (not available on the sphere).
    pub fn marginal_cdf(&self, i: usize, v: f64) -> Option<f64> {
        match self {
            DensitySpec::DiagGaussian { mean, var } => Some(normal_cdf((v - mean[i]) / var[i].sqrt())),
            DensitySpec::ProductExponential { rates } => Some(if v <= 0.0 { 0.0 } else { -(-rates[i] * v).exp_m1() }),
            DensitySpec::ProductLognormal { mu, sigma } => {
                Some(if v <= 0.0 { 0.0 } else { normal_cdf((v.ln() - mu[i]) / sigma[i]) })
            }
            DensitySpec::FisherS2 { .. } => None,
        }
    }

    /// Upper bound on the density over its whole support.
    pub fn sup_pdf(&self) -> f64 {
        match self {
            DensitySpec::DiagGaussian { var, .. } => var.iter().map(|s2| 1.0 / (2.0 * PI * s2).sqrt()).product(),
            DensitySpec::ProductExponential { rates } => rates.iter().product(),
            DensitySpec::ProductLognormal { mu, sigma } => mu
                .iter()
                .zip(sigma)
                // the 1-D mode sits at e^{μ − σ²}
                .map(|(m, s)| (-m + s * s / 2.0).exp() / (s * (2.0 * PI).sqrt()))
                .product(),
            DensitySpec::FisherS2 { mu, .. } => self.pdf(mu),
        }
    }

    /// Draw one point into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            DensitySpec::DiagGaussian { mean, var } => {
                for (o, (m, s2)) in out.iter_mut().zip(mean.iter().zip(var)) {
                    let z: f64 = rng.sample(StandardNormal);
                    *o = m + s2.sqrt() * z;
                }
            }
            DensitySpec::ProductExponential { rates } => {
                for (o, r) in out.iter_mut().zip(rates) {
                    *o = Exp::new(*r).expect("validated rate").sample(rng);
                }
            }
            DensitySpec::ProductLognormal { mu, sigma } => {
                for (o, (m, s)) in out.iter_mut().zip(mu.iter().zip(sigma)) {
                    let z: f64 = rng.sample(StandardNormal);
                    *o = (m + s * z).exp();
                }
            }
            DensitySpec::FisherS2 { kappa, mu } => {
                let u: f64 = rng.random();
                let w = if *kappa == 0.0 {
                    2.0 * u - 1.0
                } else {
                    (1.0 + (u + (1.0 - u) * (-2.0 * kappa).exp()).ln() / kappa).clamp(-1.0, 1.0)
                };
                let phi = 2.0 * PI * rng.random::<f64>();
                let r = (1.0 - w * w).max(0.0).sqrt();
                let (a, b) = orthonormal_complement(mu);
                for i in 0..3 {
                    out[i] = r * phi.cos() * a[i] + r * phi.sin() * b[i] + w * mu[i];
                }
                let n = norm2(out);
                out.iter_mut().for_each(|v| *v /= n);
            }
        }
    }

    /// The same family translated by `delta` along the first coordinate.
    /// Only Gaussians are translation families.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        match self {
            DensitySpec::DiagGaussian { mean, var } => {
                let mut mean = mean.clone();
                mean[0] += delta;
                Ok(DensitySpec::DiagGaussian { mean, var: var.clone() })
            }
            _ => Err(Error::UnsupportedFamily("shift ladders need a Gaussian base density")),
        }
    }
}

/// Two unit vectors completing `mu` to an orthonormal frame.
pub(crate) fn orthonormal_complement(mu: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if mu[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d: f64 = helper.iter().zip(mu).map(|(h, m)| h * m).sum();
    let mut a = [helper[0] - d * mu[0], helper[1] - d * mu[1], helper[2] - d * mu[2]];
    let n = norm2(&a);
    a.iter_mut().for_each(|v| *v /= n);
    let b = [
        mu[1] * a[2] - mu[2] * a[1],
        mu[2] * a[0] - mu[0] * a[2],
        mu[0] * a[1] - mu[1] * a[0],
    ];
    (a, b)
}
