//! Generalized distance functions.
//!
//! A generalized distance only has to satisfy the identity of indiscernibles;
//! symmetry, the triangle inequality, homogeneity and translation invariance
//! are all optional. [`DistanceSpec`] names a family with its parameters and
//! the ambient coordinate count.

mod monotone;

pub use monotone::{MonotoneMap, MonotoneSpline};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|‖x‖ − 1|` for points on the unit sphere.
pub const SPHERE_TOL: f64 = 1e-9;

/// Scale `t₀` below which the oscillatory test distance is defined.
pub const OSCILLATORY_T0: f64 = 0.1;

/// Largest admissible oscillation strength `eps`.
pub const OSCILLATORY_EPS_MAX: f64 = 0.5;

/// Coordinate domain a point is declared to live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Euclidean,
    PositiveOrthant,
    UnitSphere,
}

impl Domain {
    pub fn contains(self, x: &[f64]) -> bool {
        match self {
            Domain::Euclidean => x.iter().all(|v| v.is_finite()),
            Domain::PositiveOrthant => x.iter().all(|&v| v.is_finite() && v > 0.0),
            Domain::UnitSphere => {
                x.iter().all(|v| v.is_finite()) && (norm2(x) - 1.0).abs() <= SPHERE_TOL
            }
        }
    }
}

impl std::str::FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "real" => Ok(Domain::Euclidean),
            "positive" | "positive_orthant" => Ok(Domain::PositiveOrthant),
            "sphere" | "unit_sphere" => Ok(Domain::UnitSphere),
            _ => Err(Error::InvalidParameter(format!("unknown domain `{s}`"))),
        }
    }
}

/// Coordinates tagged with their domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    coords: Vec<f64>,
    domain: Domain,
}

impl Point {
    pub fn new(coords: Vec<f64>, domain: Domain) -> Result<Self> {
        if !domain.contains(&coords) {
            return Err(Error::DomainViolation(format!("{coords:?} is not in {domain:?}")));
        }
        Ok(Point { coords, domain })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }
}

/// Distance families and their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    /// `‖x − y‖_p`
    Lp { p: f64 },
    /// `‖x − y‖_p^p`
    LpPowP { p: f64 },
    Canberra,
    BrayCurtis,
    Entropic,
    /// `γ(d(x, y))` for a homogeneous, translation-invariant base `d`.
    MonotoneTransform { base: Box<Family>, gamma: MonotoneMap },
    /// Great-circle distance on the unit sphere in `R^{ambient_dim}`.
    SphereGeodesic { ambient_dim: usize },
    /// `g_x(‖x − y‖₁)` where `g_x` inverts `r_x(t) = t (1 + eps A(x) sin(ln 1/t))`.
    OscillatoryTest { eps: f64, amplitude_scale: f64 },
}

/// A distance family bound to an ambient dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct DistanceSpec {
    #[serde(flatten)]
    pub family: Family,
    pub dim: usize,
}

#[derive(Deserialize)]
struct RawSpec {
    #[serde(flatten)]
    family: Family,
    dim: usize,
}

impl TryFrom<RawSpec> for DistanceSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        DistanceSpec::new(raw.family, raw.dim)
    }
}

impl DistanceSpec {
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        validate_family(&family, dim)?;
        Ok(DistanceSpec { family, dim })
    }

    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        Self::new(Family::Lp { p }, dim)
    }

    pub fn lp_pow_p(p: f64, dim: usize) -> Result<Self> {
        Self::new(Family::LpPowP { p }, dim)
    }

    pub fn canberra(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        DistanceSpec { family: Family::Canberra, dim }
    }

    pub fn bray_curtis(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        DistanceSpec { family: Family::BrayCurtis, dim }
    }

    pub fn entropic(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        DistanceSpec { family: Family::Entropic, dim }
    }

    pub fn sphere(ambient_dim: usize) -> Result<Self> {
        Self::new(Family::SphereGeodesic { ambient_dim }, ambient_dim)
    }

    pub fn transform(base_p: f64, gamma: MonotoneMap, dim: usize) -> Result<Self> {
        Self::new(Family::MonotoneTransform { base: Box::new(Family::Lp { p: base_p }), gamma }, dim)
    }

    pub fn oscillatory(eps: f64, amplitude_scale: f64, dim: usize) -> Result<Self> {
        Self::new(Family::OscillatoryTest { eps, amplitude_scale }, dim)
    }

    /// Domain the family is defined on.
    pub fn domain(&self) -> Domain {
        match self.family {
            Family::BrayCurtis | Family::Entropic => Domain::PositiveOrthant,
            Family::SphereGeodesic { .. } => Domain::UnitSphere,
            _ => Domain::Euclidean,
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let domain = self.domain();
        if !domain.contains(x) {
            return Err(Error::DomainViolation(format!(
                "{x:?} is outside the {domain:?} domain of {}",
                self.name()
            )));
        }
        Ok(())
    }

    /// Short family label for reports.
    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Lp { .. } => "lp",
            Family::LpPowP { .. } => "lp_pow_p",
            Family::Canberra => "canberra",
            Family::BrayCurtis => "bray_curtis",
            Family::Entropic => "entropic",
            Family::MonotoneTransform { .. } => "monotone_transform",
            Family::SphereGeodesic { .. } => "sphere_geodesic",
            Family::OscillatoryTest { .. } => "oscillatory_test",
        }
    }

    /// `h(x, y)` with dimension and domain checks.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        if let Family::OscillatoryTest { eps, amplitude_scale } = self.family {
            return oscillatory_eval(eps, amplitude_scale, x, y);
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// `h(x, y)` for points already known to be valid.
    ///
    /// The oscillatory family saturates at `t₀` outside its scale instead of
    /// failing.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.family {
            Family::Lp { p } => lp_norm(x, y, *p),
            Family::LpPowP { p } => lp_pow(x, y, *p),
            Family::Canberra => canberra(x, y),
            Family::BrayCurtis => bray_curtis(x, y),
            Family::Entropic => entropic(x, y),
            Family::MonotoneTransform { base, gamma } => gamma.apply(base_norm(base, x, y)),
            Family::SphereGeodesic { .. } => geodesic(x, y),
            Family::OscillatoryTest { eps, amplitude_scale } => {
                oscillatory_eval(*eps, *amplitude_scale, x, y).unwrap_or(OSCILLATORY_T0)
            }
        }
    }

    /// Whether `y` lies in the right-ball `{y : h(x, y) < t}`.
    ///
    /// Points outside the family's domain are never in a ball.
    #[inline]
    pub fn ball_contains(&self, x: &[f64], y: &[f64], t: f64) -> bool {
        match &self.family {
            Family::OscillatoryTest { eps, amplitude_scale } => {
                let a = amplitude(*amplitude_scale, x);
                l1(x, y) < oscillatory_radius(*eps, a, t.min(OSCILLATORY_T0))
            }
            Family::BrayCurtis | Family::Entropic if !y.iter().all(|&v| v > 0.0) => false,
            _ => self.eval_unchecked(x, y) < t,
        }
    }

    /// Whether `h(x, y) = h(y, x)` for all admissible pairs.
    pub fn is_symmetric(&self) -> bool {
        family_symmetric(&self.family)
    }

    /// Whether the family is a homogeneous, translation-invariant norm
    /// distance (possibly after a monotone transform), so that ball volumes
    /// do not depend on the center.
    pub fn is_translation_invariant(&self) -> bool {
        matches!(
            self.family,
            Family::Lp { .. } | Family::LpPowP { .. } | Family::MonotoneTransform { .. }
        )
    }
}

fn family_symmetric(f: &Family) -> bool {
    match f {
        Family::Entropic | Family::OscillatoryTest { .. } => false,
        Family::MonotoneTransform { base, .. } => family_symmetric(base),
        _ => true,
    }
}

fn validate_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must be a finite real >= 1, got {p}")))
    }
}

fn validate_family(family: &Family, dim: usize) -> Result<()> {
    match family {
        Family::Lp { p } | Family::LpPowP { p } => validate_p(*p),
        Family::Canberra | Family::BrayCurtis | Family::Entropic => Ok(()),
        Family::MonotoneTransform { base, gamma } => {
            match base.as_ref() {
                Family::Lp { p } => validate_p(*p)?,
                _ => {
                    return Err(Error::InvalidParameter(
                        "monotone transforms need a homogeneous, translation-invariant (lp) base".into(),
                    ))
                }
            }
            gamma.validate()
        }
        Family::SphereGeodesic { ambient_dim } => {
            if *ambient_dim < 2 {
                Err(Error::InvalidParameter("sphere ambient dimension must be >= 2".into()))
            } else if *ambient_dim != dim {
                Err(Error::InvalidParameter(format!(
                    "sphere ambient dimension {ambient_dim} differs from dim {dim}"
                )))
            } else {
                Ok(())
            }
        }
        Family::OscillatoryTest { eps, amplitude_scale } => {
            if !(0.0..=OSCILLATORY_EPS_MAX).contains(eps) {
                Err(Error::InvalidParameter(format!(
                    "oscillation eps must lie in [0, {OSCILLATORY_EPS_MAX}], got {eps}"
                )))
            } else if !(*amplitude_scale > 0.0 && *amplitude_scale < 1.0) {
                Err(Error::InvalidParameter(format!(
                    "amplitude scale must lie in (0, 1), got {amplitude_scale}"
                )))
            } else {
                Ok(())
            }
        }
    }
}

#[inline]
pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
fn l1(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum()
}

#[inline]
fn lp_pow(x: &[f64], y: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        l1(x, y)
    } else if p == 2.0 {
        x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
    } else {
        x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(p)).sum()
    }
}

#[inline]
fn lp_norm(x: &[f64], y: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        l1(x, y)
    } else if p == 2.0 {
        lp_pow(x, y, 2.0).sqrt()
    } else {
        // scale by the max coordinate gap to avoid overflow for large p
        let m = x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * x.iter().zip(y).map(|(a, b)| ((a - b).abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn base_norm(base: &Family, x: &[f64], y: &[f64]) -> f64 {
    match base {
        Family::Lp { p } => lp_norm(x, y, *p),
        _ => unreachable!("validated at construction"),
    }
}

#[inline]
fn canberra(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let den = a.abs() + b.abs();
            if den == 0.0 {
                0.0
            } else {
                (a - b).abs() / den
            }
        })
        .sum()
}

#[inline]
fn bray_curtis(x: &[f64], y: &[f64]) -> f64 {
    let (num, den) = x
        .iter()
        .zip(y)
        .fold((0.0, 0.0), |(n, d), (a, b)| (n + (a - b).abs(), d + a + b));
    num / den
}

#[inline]
fn entropic(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| (a * (a / b).ln() - a + b).abs()).sum()
}

#[inline]
fn geodesic(x: &[f64], y: &[f64]) -> f64 {
    // 2 atan2(|x − y|, |x + y|) is accurate at both small and antipodal angles
    let (mut d2, mut s2) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        d2 += (a - b) * (a - b);
        s2 += (a + b) * (a + b);
    }
    2.0 * d2.sqrt().atan2(s2.sqrt())
}

/// Amplitude `A(x) = scale (1 + tanh x₁) / 2 ∈ (0, scale)`.
#[inline]
pub fn amplitude(scale: f64, x: &[f64]) -> f64 {
    scale * (1.0 + x[0].tanh()) / 2.0
}

/// Forward radius map `r(t) = t (1 + eps a sin(ln 1/t))`.
#[inline]
pub fn oscillatory_radius(eps: f64, a: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    t * (1.0 + eps * a * (1.0 / t).ln().sin())
}

/// Inverts the oscillatory radius map at `x` for the `l1` gap to `y`.
pub fn oscillatory_eval(eps: f64, amplitude_scale: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let d = l1(x, y);
    if d == 0.0 {
        return Ok(0.0);
    }
    let a = amplitude(amplitude_scale, x);
    let limit = oscillatory_radius(eps, a, OSCILLATORY_T0);
    if d >= limit {
        return Err(Error::OutOfScale { distance: d, limit });
    }
    let ea = eps * a;
    // (1 − εA) t < r(t) < (1 + εA) t brackets the root
    let mut lo = d / (1.0 + ea);
    let mut hi = (d / (1.0 - ea)).min(OSCILLATORY_T0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-16 * hi {
            break;
        }
        if oscillatory_radius(eps, a, mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
