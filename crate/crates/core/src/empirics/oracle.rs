use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::normal_cdf;

/// Which interpoint distance law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Xx,
    Yy,
    Xy,
}

/// Isotropic Gaussians `X ~ N(0, σx² I)`, `Y ~ N(shift·e₁, σy² I)` in one or
/// two dimensions under the Euclidean distance, where every interpoint
/// distance law has a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPairModel {
    pub dim: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub shift: f64,
}

impl GaussianPairModel {
    pub fn new(dim: usize, sigma_x: f64, sigma_y: f64, shift: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("closed forms exist for dim 1 or 2, got {dim}")));
        }
        if !(sigma_x > 0.0 && sigma_y > 0.0 && sigma_x.is_finite() && sigma_y.is_finite() && shift.is_finite()) {
            return Err(Error::InvalidParameter("sigmas must be positive and shift finite".into()));
        }
        Ok(GaussianPairModel { dim, sigma_x, sigma_y, shift })
    }

    /// Standard deviation per coordinate and mean offset of the pair difference.
    fn difference(&self, kind: PairKind) -> (f64, f64) {
        match kind {
            PairKind::Xx => (self.sigma_x * std::f64::consts::SQRT_2, 0.0),
            PairKind::Yy => (self.sigma_y * std::f64::consts::SQRT_2, 0.0),
            PairKind::Xy => (self.sigma_x.hypot(self.sigma_y), self.shift),
        }
    }

    /// Population `Δ_K(t)`; pass `f64::INFINITY` for `Δ_K(∞)`.
    pub fn delta_k(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let s_max = [PairKind::Xx, PairKind::Yy, PairKind::Xy]
            .iter()
            .map(|&k| self.difference(k).0)
            .fold(0.0, f64::max);
        let top = t.min(self.shift.abs() + 12.0 * s_max);
        let gap = |kind: PairKind| {
            move |u: f64| (closed_form_distance_cdf(self, kind, u) - closed_form_distance_cdf(self, PairKind::Xy, u)).abs()
        };
        sup_on(gap(PairKind::Xx), top) + sup_on(gap(PairKind::Yy), top)
    }
}

/// `sup_{0 < u ≤ top} g(u)` for a continuous `g`: dense scan, then golden
/// section around the best grid point.
fn sup_on(g: impl Fn(f64) -> f64, top: f64) -> f64 {
    const N: usize = 4000;
    let h = top / N as f64;
    let (mut best_i, mut best) = (N, g(top));
    for i in 1..N {
        let v = g(i as f64 * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = ((best_i as f64 - 1.0) * h, ((best_i + 1) as f64 * h).min(top));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    best.max(gc).max(gd)
}

/// `P(|D| < t)` for the pair difference `D` of the requested kind.
pub fn closed_form_distance_cdf(model: &GaussianPairModel, kind: PairKind, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let (s, mu) = model.difference(kind);
    if model.dim == 1 {
        return (normal_cdf((t - mu) / s) - normal_cdf((-t - mu) / s)).max(0.0);
    }
    noncentral_chi2_2_cdf((t / s).powi(2), (mu / s).powi(2))
}

/// CDF of a noncentral χ² with two degrees of freedom and noncentrality
/// `lambda`, as a Poisson(λ/2) mixture of central χ²₂ⱼ₊₂ laws.
fn noncentral_chi2_2_cdf(x: f64, lambda: f64) -> f64 {
    let (a, b) = (0.5 * lambda, 0.5 * x);
    let ln_term = |i: f64, rate: f64| {
        if rate == 0.0 {
            if i == 0.0 { 0.0 } else { f64::NEG_INFINITY }
        } else {
            -rate + i * rate.ln() - libm::lgamma(i + 1.0)
        }
    };
    // P(χ²_{2j+2} ≤ x) = 1 − P(Poisson(x/2) ≤ j)
    let mut poisson_cdf = 0.0;
    let mut total = 0.0;
    let mut weight_sum = 0.0;
    let limit = (a + 40.0 * a.sqrt() + 60.0) as usize;
    for j in 0..=limit {
        let jf = j as f64;
        poisson_cdf += ln_term(jf, b).exp();
        let w = ln_term(jf, a).exp();
        weight_sum += w;
        total += w * (1.0 - poisson_cdf).max(0.0);
        if jf > a && w < 1e-18 && 1.0 - weight_sum < 1e-16 {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}
