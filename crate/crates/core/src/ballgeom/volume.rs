use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distances::{amplitude, norm2, oscillatory_radius, DistanceSpec, Family, OSCILLATORY_T0};
use crate::error::{Error, Result};
use crate::rng;
use crate::special::{inv_factorial, lp_unit_ball_volume, sphere_area, sphere_cap_area};

/// Largest `t / xᵢ` for which `xᵢ ± √(3 xᵢ t)` circumscribes the 1-D entropic
/// ball (`u − ln(1 + u) ≥ u²/3` holds for `u ≤ 3/4`).
pub(crate) const ENTROPIC_CIRCUMSCRIBED_MAX: f64 = 3.0 / 16.0;

/// Hit-or-miss volume estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub box_volume: f64,
    pub seed: u64,
}

impl VolumeEstimate {
    fn from_hits(hits: usize, n: usize, box_volume: f64, seed: u64) -> Self {
        let p = hits as f64 / n as f64;
        VolumeEstimate {
            value: box_volume * p,
            stderr: box_volume * (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
            box_volume,
            seed,
        }
    }
}

/// Analytic lower/upper sandwich for a ball volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeBounds {
    pub lower: f64,
    pub upper: f64,
    pub source: String,
}

/// Axis-aligned box `∏ [lowerᵢ, upperᵢ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Map `u ∈ [0, 1)^k` into the box.
    #[inline]
    pub fn map_into(&self, u: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = self.lower[i] + (self.upper[i] - self.lower[i]) * u[i];
        }
    }
}

/// How `Φ` is obtained by the ratio diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum VolumeMethod {
    Exact,
    MonteCarlo { n: usize, seed: u64 },
}

fn check_radius(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRadius { t, reason: "radius must be positive and finite" })
    }
}

fn check_center(spec: &DistanceSpec, x: &[f64]) -> Result<()> {
    spec.check_point(x)
}

/// Exact `Φ(x, t)` where a closed form exists.
///
/// Closed forms: Canberra in one dimension (and zero on coordinate axes),
/// Bray–Curtis while the ball stays inside the positive orthant, `l_p`,
/// `l_p^p` and monotone transforms through `ω_{p,k}`, sphere caps, and the
/// oscillatory test distance through its forward radius map.
pub fn volume_exact(spec: &DistanceSpec, x: &[f64], t: f64) -> Result<Option<f64>> {
    check_radius(t)?;
    check_center(spec, x)?;
    let k = spec.dim;
    let v = match &spec.family {
        Family::Canberra => {
            if k == 1 && t >= 1.0 {
                return Err(Error::InvalidRadius { t, reason: "1-D Canberra closed form needs t < 1" });
            }
            if t < 1.0 && x.contains(&0.0) {
                Some(0.0)
            } else if k == 1 {
                Some(4.0 * t * x[0].abs() / (1.0 - t * t))
            } else {
                None
            }
        }
        Family::BrayCurtis => {
            let s: f64 = x.iter().sum();
            let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
            // ball is a union of 2^k simplices while it avoids the orthant walls
            if t < 1.0 && 2.0 * t * s / (1.0 + t) < min {
                Some((4.0 * t * s / (1.0 - t * t)).powi(k as i32) * inv_factorial(k))
            } else {
                None
            }
        }
        Family::Entropic => None,
        Family::Lp { p } => Some(lp_unit_ball_volume(*p, k) * t.powi(k as i32)),
        Family::LpPowP { p } => Some(lp_unit_ball_volume(*p, k) * t.powf(k as f64 / p)),
        Family::MonotoneTransform { base, gamma } => {
            let Family::Lp { p } = base.as_ref() else { unreachable!("validated at construction") };
            Some(lp_unit_ball_volume(*p, k) * gamma.inverse(t).powi(k as i32))
        }
        Family::SphereGeodesic { ambient_dim } => Some(sphere_cap_area(*ambient_dim, t)),
        Family::OscillatoryTest { eps, amplitude_scale } => {
            if t > OSCILLATORY_T0 {
                return Err(Error::InvalidRadius { t, reason: "oscillatory distance needs t <= t0" });
            }
            let r = oscillatory_radius(*eps, amplitude(*amplitude_scale, x), t);
            Some(lp_unit_ball_volume(1.0, k) * r.powi(k as i32))
        }
    };
    Ok(v)
}

/// Inscribed/circumscribed rectangle bounds for Canberra and entropic balls.
pub fn volume_bounds(spec: &DistanceSpec, x: &[f64], t: f64) -> Result<VolumeBounds> {
    check_radius(t)?;
    check_center(spec, x)?;
    let k = spec.dim as f64;
    match spec.family {
        Family::Canberra => {
            if t >= 1.0 {
                return Err(Error::InvalidRadius { t, reason: "Canberra bounds need t < 1" });
            }
            if x.contains(&0.0) {
                return Err(Error::PreconditionViolation("Canberra bounds need a center off the axes".into()));
            }
            let prod: f64 = x.iter().map(|c| c.abs()).product();
            let tk = t / k;
            Ok(VolumeBounds {
                lower: (4.0 * tk / (1.0 - tk * tk)).powf(k) * prod,
                upper: (4.0 * t / (1.0 - t * t)).powf(k) * prod,
                source: "canberra_rectangles".into(),
            })
        }
        Family::Entropic => {
            let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
            if t > ENTROPIC_CIRCUMSCRIBED_MAX * min {
                return Err(Error::PreconditionViolation(format!(
                    "entropic bounds need t <= {ENTROPIC_CIRCUMSCRIBED_MAX} * min(x) = {}",
                    ENTROPIC_CIRCUMSCRIBED_MAX * min
                )));
            }
            let lower = x.iter().map(|&c| 2.0 * (6.0 / 11.0 * c * t / k).sqrt()).product();
            let upper = x.iter().map(|&c| 2.0 * (3.0 * c * t).sqrt()).product();
            Ok(VolumeBounds { lower, upper, source: "entropic_rectangles".into() })
        }
        _ => Err(Error::UnsupportedFamily("volume_bounds")),
    }
}

/// Half-widths `(below, above)` of the exact 1-D entropic ball around `x`.
fn entropic_interval(x: f64, t: f64) -> (f64, f64) {
    let tau = t / x;
    // above: u − ln(1 + u) = τ, increasing in u
    let g_up = |u: f64| u - u.ln_1p();
    let mut hi = 1.0;
    while g_up(hi) < tau {
        hi *= 2.0;
    }
    let up = bisect(g_up, tau, 0.0, hi);
    // below: −ln(1 − u) − u = τ on (0, 1)
    let g_dn = |u: f64| -(-u).ln_1p() - u;
    let dn = bisect(g_dn, tau, 0.0, 1.0);
    (x * dn, x * up)
}

fn bisect(g: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// A box containing `B_t(x)`.
pub fn bounding_box(spec: &DistanceSpec, x: &[f64], t: f64) -> Result<AxisBox> {
    check_radius(t)?;
    check_center(spec, x)?;
    let k = spec.dim;
    let cube = |r: f64| AxisBox {
        lower: x.iter().map(|c| c - r).collect(),
        upper: x.iter().map(|c| c + r).collect(),
    };
    match &spec.family {
        Family::Canberra => {
            if t >= 1.0 {
                return Err(Error::InvalidRadius { t, reason: "Canberra balls are unbounded for t >= 1" });
            }
            if x.contains(&0.0) {
                return Err(Error::PreconditionViolation("Canberra ball of an axis center is null".into()));
            }
            let (lo, hi) = ((1.0 - t) / (1.0 + t), (1.0 + t) / (1.0 - t));
            let (lower, upper) = x
                .iter()
                .map(|&c| if c > 0.0 { (c * lo, c * hi) } else { (c * hi, c * lo) })
                .unzip();
            Ok(AxisBox { lower, upper })
        }
        Family::BrayCurtis => {
            if t >= 1.0 {
                return Err(Error::InvalidRadius { t, reason: "Bray-Curtis balls are unbounded for t >= 1" });
            }
            // Σ|dᵢ| < t (2 Σxᵢ + Σdᵢ) forces Σ|dᵢ| < 2 t Σxᵢ / (1 − t)
            let r = 2.0 * t * x.iter().sum::<f64>() / (1.0 - t);
            Ok(AxisBox {
                lower: x.iter().map(|c| (c - r).max(0.0)).collect(),
                upper: x.iter().map(|c| c + r).collect(),
            })
        }
        Family::Entropic => {
            let (lower, upper) = x
                .iter()
                .map(|&c| {
                    if t <= ENTROPIC_CIRCUMSCRIBED_MAX * c {
                        let w = (3.0 * c * t).sqrt();
                        ((c - w).max(0.0), c + w)
                    } else {
                        let (dn, up) = entropic_interval(c, t);
                        ((c - dn * (1.0 + 1e-9)).max(0.0), c + up * (1.0 + 1e-9))
                    }
                })
                .unzip();
            Ok(AxisBox { lower, upper })
        }
        Family::Lp { .. } => Ok(cube(t)),
        Family::LpPowP { p } => Ok(cube(t.powf(1.0 / p))),
        Family::MonotoneTransform { gamma, .. } => Ok(cube(gamma.inverse(t))),
        Family::OscillatoryTest { eps, amplitude_scale } => {
            if t > OSCILLATORY_T0 {
                return Err(Error::InvalidRadius { t, reason: "oscillatory distance needs t <= t0" });
            }
            Ok(cube(oscillatory_radius(*eps, amplitude(*amplitude_scale, x), t)))
        }
        Family::SphereGeodesic { .. } => {
            let _ = k;
            Err(Error::UnsupportedFamily("bounding_box (sphere caps are sampled on the sphere)"))
        }
    }
}

/// Run `per_chunk` over the counter-based chunks of `n` samples in parallel
/// and return the chunk results in chunk order.
pub(crate) fn par_chunks<T, F>(n: usize, seed: u64, per_chunk: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng, usize) -> T + Sync,
{
    rng::chunks(n)
        .into_par_iter()
        .map(|(i, len)| per_chunk(&mut rng::substream(seed, i), len))
        .collect()
}

fn uniform_on_sphere<R: Rng>(rng: &mut R, out: &mut [f64]) {
    loop {
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let n = norm2(out);
        if n > 1e-12 {
            out.iter_mut().for_each(|v| *v /= n);
            return;
        }
    }
}

/// Hit-or-miss estimate of `Φ(x, t)` from `n` uniform draws in the bounding
/// box (or on the whole sphere for geodesic caps).
pub fn volume_mc(spec: &DistanceSpec, x: &[f64], t: f64, n: usize, seed: u64) -> Result<VolumeEstimate> {
    if n < 1000 {
        return Err(Error::InvalidParameter(format!("Monte Carlo volume needs n >= 1000, got {n}")));
    }
    check_radius(t)?;
    check_center(spec, x)?;
    let k = spec.dim;
    if let Family::SphereGeodesic { ambient_dim } = spec.family {
        let hits: usize = par_chunks(n, seed, |rng, len| {
            let mut y = vec![0.0; k];
            (0..len)
                .filter(|_| {
                    uniform_on_sphere(rng, &mut y);
                    spec.ball_contains(x, &y, t)
                })
                .count()
        })
        .into_iter()
        .sum();
        return Ok(VolumeEstimate::from_hits(hits, n, sphere_area(ambient_dim - 1), seed));
    }
    let bx = bounding_box(spec, x, t)?;
    let hits: usize = par_chunks(n, seed, |rng, len| {
        let mut u = vec![0.0; k];
        let mut y = vec![0.0; k];
        (0..len)
            .filter(|_| {
                u.iter_mut().for_each(|v| *v = rng.random::<f64>());
                bx.map_into(&u, &mut y);
                spec.ball_contains(x, &y, t)
            })
            .count()
    })
    .into_iter()
    .sum();
    Ok(VolumeEstimate::from_hits(hits, n, bx.volume(), seed))
}

/// Monte Carlo volumes over a radius grid from one shared set of draws in the
/// box of the largest radius, so the hit sets are nested and the estimates
/// are nondecreasing in `t`.
pub fn volume_mc_nested(
    spec: &DistanceSpec,
    x: &[f64],
    t_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<VolumeEstimate>> {
    if n < 1000 {
        return Err(Error::InvalidParameter(format!("Monte Carlo volume needs n >= 1000, got {n}")));
    }
    let t_max = t_grid.iter().cloned().fold(f64::NAN, f64::max);
    t_grid.iter().try_for_each(|&t| check_radius(t))?;
    let bx = bounding_box(spec, x, t_max)?;
    let k = spec.dim;
    let per_chunk: Vec<Vec<usize>> = par_chunks(n, seed, |rng, len| {
        let mut counts = vec![0usize; t_grid.len()];
        let mut u = vec![0.0; k];
        let mut y = vec![0.0; k];
        for _ in 0..len {
            u.iter_mut().for_each(|v| *v = rng.random::<f64>());
            bx.map_into(&u, &mut y);
            for (c, &t) in counts.iter_mut().zip(t_grid) {
                if spec.ball_contains(x, &y, t) {
                    *c += 1;
                }
            }
        }
        counts
    });
    let bv = bx.volume();
    Ok((0..t_grid.len())
        .map(|j| VolumeEstimate::from_hits(per_chunk.iter().map(|c| c[j]).sum(), n, bv, seed))
        .collect())
}

/// `Φ(x, t)` by the requested method. Canberra centers on an axis have
/// `Φ = 0` for `t < 1` under either method.
pub fn phi(spec: &DistanceSpec, x: &[f64], t: f64, method: VolumeMethod) -> Result<f64> {
    match method {
        VolumeMethod::Exact => volume_exact(spec, x, t)?.ok_or(Error::UnsupportedFamily("exact volume")),
        VolumeMethod::MonteCarlo { n, seed } => {
            if matches!(spec.family, Family::Canberra) && t < 1.0 && x.contains(&0.0) {
                check_center(spec, x)?;
                return Ok(0.0);
            }
            Ok(volume_mc(spec, x, t, n, seed)?.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    #[test]
    fn exact_volume_examples() {
        let c1 = DistanceSpec::canberra(1);
        assert!((volume_exact(&c1, &[2.0], 0.5).unwrap().unwrap() - 16.0 / 3.0).abs() < 1e-14);
        assert_eq!(volume_exact(&c1, &[0.0], 0.5).unwrap(), Some(0.0));
        assert!(matches!(volume_exact(&c1, &[2.0], 1.0), Err(Error::InvalidRadius { .. })));
        assert!(matches!(volume_exact(&c1, &[2.0], 0.0), Err(Error::InvalidRadius { .. })));
        assert_eq!(volume_exact(&DistanceSpec::canberra(2), &[1.0, 1.0], 0.3).unwrap(), None);

        let l2 = DistanceSpec::lp(2.0, 2).unwrap();
        assert!((volume_exact(&l2, &[3.0, -1.0], 1.0).unwrap().unwrap() - PI).abs() < 1e-13);
        let s2 = DistanceSpec::sphere(3).unwrap();
        let cap = volume_exact(&s2, &[0.0, 0.0, 1.0], PI / 2.0).unwrap().unwrap();
        assert!((cap - 2.0 * PI).abs() < 1e-13);

        // l2² ball of radius t is the l2 ball of radius √t
        let pp = DistanceSpec::lp_pow_p(2.0, 2).unwrap();
        assert!((volume_exact(&pp, &[0.0, 0.0], 0.25).unwrap().unwrap() - PI * 0.25).abs() < 1e-13);
        let tr = DistanceSpec::transform(2.0, MonotoneMap::Log1p, 2).unwrap();
        let r = 0.3f64.exp_m1();
        assert!((volume_exact(&tr, &[0.0, 0.0], 0.3).unwrap().unwrap() - PI * r * r).abs() < 1e-13);
        assert_eq!(volume_exact(&DistanceSpec::entropic(1), &[1.0], 0.1).unwrap(), None);
    }

    use crate::distances::MonotoneMap;

    #[test]
    fn bray_curtis_exact_matches_one_dimensional_canberra() {
        let bc = DistanceSpec::bray_curtis(1);
        for &(x, t) in &[(2.0, 0.5), (0.3, 0.1), (7.0, 0.9)] {
            let v = volume_exact(&bc, &[x], t).unwrap().unwrap();
            assert!((v - 4.0 * t * x / (1.0 - t * t)).abs() < 1e-12);
        }
        // ball leaves the orthant: no closed form
        assert_eq!(volume_exact(&DistanceSpec::bray_curtis(2), &[0.1, 5.0], 0.3).unwrap(), None);
    }

    #[test]
    fn bounds_examples() {
        let c1 = DistanceSpec::canberra(1);
        let b = volume_bounds(&c1, &[2.0], 0.5).unwrap();
        assert!((b.lower - 16.0 / 3.0).abs() < 1e-14 && (b.upper - 16.0 / 3.0).abs() < 1e-14);

        let c2 = DistanceSpec::canberra(2);
        let b = volume_bounds(&c2, &[1.0, 1.0], 0.3).unwrap();
        assert!((b.lower - 0.376_763_626_611_547_5).abs() < 1e-12);
        assert!((b.upper - 1.738_920_420_239_101_6).abs() < 1e-12);
        assert!(matches!(volume_bounds(&c2, &[0.0, 1.0], 0.3), Err(Error::PreconditionViolation(_))));

        let e1 = DistanceSpec::entropic(1);
        let b = volume_bounds(&e1, &[1.0], 0.01).unwrap();
        assert!((b.lower - 0.147_709_789_175_199_28).abs() < 1e-12);
        assert!((b.upper - 0.346_410_161_513_775_46).abs() < 1e-12);
        assert!(volume_bounds(&e1, &[1.0], 0.4).is_err());
        assert!(matches!(
            volume_bounds(&DistanceSpec::lp(2.0, 2).unwrap(), &[0.0, 0.0], 0.1),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn bounding_box_examples() {
        let b = bounding_box(&DistanceSpec::canberra(1), &[1.0], 1.0 / 3.0).unwrap();
        assert!((b.lower[0] - 0.5).abs() < 1e-15 && (b.upper[0] - 2.0).abs() < 1e-15);
        let b = bounding_box(&DistanceSpec::canberra(1), &[-1.0], 1.0 / 3.0).unwrap();
        assert!((b.lower[0] + 2.0).abs() < 1e-15 && (b.upper[0] + 0.5).abs() < 1e-15);
        let b = bounding_box(&DistanceSpec::lp(1.0, 2).unwrap(), &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(b, AxisBox { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0] });
        let b = bounding_box(&DistanceSpec::entropic(1), &[4.0], 0.01).unwrap();
        assert!((b.lower[0] - (4.0 - 0.12f64.sqrt())).abs() < 1e-15);
        assert!((b.upper[0] - (4.0 + 0.12f64.sqrt())).abs() < 1e-15);
        assert!(bounding_box(&DistanceSpec::sphere(3).unwrap(), &[0.0, 0.0, 1.0], 0.1).is_err());
    }

    /// Draw points in a much larger box and check that every ball member lies
    /// in the claimed bounding box.
    fn assert_box_contains_ball(spec: &DistanceSpec, x: &[f64], t: f64, outer: &AxisBox, probes: usize) {
        let bx = bounding_box(spec, x, t).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut y = vec![0.0; x.len()];
        let mut inside = 0;
        for _ in 0..probes {
            let u: Vec<f64> = (0..x.len()).map(|_| rng.random::<f64>()).collect();
            outer.map_into(&u, &mut y);
            if spec.ball_contains(x, &y, t) {
                inside += 1;
                assert!(bx.contains(&y), "{}: {y:?} in ball but outside {bx:?}", spec.name());
            }
        }
        assert!(inside > 100, "{}: too few probes landed in the ball", spec.name());
    }

    #[test]
    fn bray_curtis_box_contains_ball() {
        let spec = DistanceSpec::bray_curtis(2);
        for &(x0, x1, t) in &[(1.0, 2.0, 0.1), (0.2, 5.0, 0.3), (3.0, 3.0, 0.05)] {
            let x = [x0, x1];
            let bx = bounding_box(&spec, &x, t).unwrap();
            let outer = AxisBox {
                lower: vec![1e-9, 1e-9],
                upper: bx.upper.iter().map(|u| u * 1.5).collect(),
            };
            assert_box_contains_ball(&spec, &x, t, &outer, 1_000_000);
        }
    }

    #[test]
    fn entropic_box_contains_ball_beyond_the_sqrt_regime() {
        let spec = DistanceSpec::entropic(2);
        for &(x0, x1, t) in &[(1.0, 2.0, 0.05), (1.0, 2.0, 0.8), (0.3, 4.0, 0.5)] {
            let x = [x0, x1];
            let outer = AxisBox { lower: vec![1e-9, 1e-9], upper: vec![x0 * 8.0 + 4.0, x1 * 8.0 + 4.0] };
            assert_box_contains_ball(&spec, &x, t, &outer, 1_000_000);
        }
    }

    #[test]
    fn entropic_exact_interval_solves_the_ball_equation() {
        let h = DistanceSpec::entropic(1);
        let (dn, up) = entropic_interval(2.0, 0.3);
        assert!((h.eval(&[2.0], &[2.0 - dn]).unwrap() - 0.3).abs() < 1e-12);
        assert!((h.eval(&[2.0], &[2.0 + up]).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn mc_examples() {
        let c1 = DistanceSpec::canberra(1);
        let est = volume_mc(&c1, &[2.0], 0.1, 1_000_000, 1).unwrap();
        // the 1-D box is the ball itself
        assert!((est.value - 0.808_080_808_080_808).abs() <= 4.0 * est.stderr + 1e-12);

        let l2 = DistanceSpec::lp(2.0, 2).unwrap();
        let est = volume_mc(&l2, &[0.0, 0.0], 1.0, 1_000_000, 2).unwrap();
        assert!((est.value - PI).abs() <= 4.0 * est.stderr, "{est:?}");
        assert_eq!(est.box_volume, 4.0);

        let c2 = DistanceSpec::canberra(2);
        let est = volume_mc(&c2, &[1.0, 1.0], 0.3, 1_000_000, 3).unwrap();
        assert!(est.value >= 0.3767 && est.value <= 1.7390, "{est:?}");

        let s2 = DistanceSpec::sphere(3).unwrap();
        let est = volume_mc(&s2, &[0.0, 0.0, 1.0], 1.0, 1_000_000, 4).unwrap();
        assert!((est.value - 2.0 * PI * (1.0 - 1f64.cos())).abs() <= 4.0 * est.stderr);

        assert!(matches!(volume_mc(&c1, &[2.0], 0.1, 10, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn mc_is_deterministic_and_thread_independent() {
        let spec = DistanceSpec::entropic(2);
        let a = volume_mc(&spec, &[1.0, 2.0], 0.05, 200_000, 42).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| volume_mc(&spec, &[1.0, 2.0], 0.05, 200_000, 42).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn nested_estimates_are_monotone() {
        let spec = DistanceSpec::canberra(2);
        let grid: Vec<f64> = (1..=20).map(|i| 0.02 * i as f64).collect();
        let est = volume_mc_nested(&spec, &[1.0, 2.0], &grid, 100_000, 5).unwrap();
        assert!(est.windows(2).all(|w| w[0].value <= w[1].value));
    }

    #[test]
    fn phi_handles_axis_centers() {
        let c2 = DistanceSpec::canberra(2);
        assert_eq!(phi(&c2, &[0.0, 1.0], 0.2, VolumeMethod::MonteCarlo { n: 1000, seed: 0 }).unwrap(), 0.0);
        assert!(matches!(phi(&c2, &[1.0, 1.0], 0.2, VolumeMethod::Exact), Err(Error::UnsupportedFamily(_))));
    }
}
