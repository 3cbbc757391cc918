//! Continuous, strictly increasing maps `γ: [0, ∞) → [0, ∞)` with `γ(0) = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing transform applied on top of a homogeneous,
/// translation-invariant base distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneMap {
    Identity,
    Power { q: f64 },
    Log1p,
    TableSpline(MonotoneSpline),
}

impl MonotoneMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            MonotoneMap::Power { q } if !(q.is_finite() && *q > 0.0) => {
                Err(Error::InvalidParameter(format!("power exponent must be positive, got {q}")))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, d: f64) -> f64 {
        match self {
            MonotoneMap::Identity => d,
            MonotoneMap::Power { q } => d.powf(*q),
            MonotoneMap::Log1p => d.ln_1p(),
            MonotoneMap::TableSpline(s) => s.eval(d),
        }
    }

    /// `γ⁻¹(t)`; closed form where available, bisection for splines.
    pub fn inverse(&self, t: f64) -> f64 {
        match self {
            MonotoneMap::Identity => t,
            MonotoneMap::Power { q } => t.powf(1.0 / q),
            MonotoneMap::Log1p => t.exp_m1(),
            MonotoneMap::TableSpline(s) => s.inverse(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SplineKnots {
    knots: Vec<(f64, f64)>,
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes)
/// through user knots, extended linearly past the last knot.
///
/// The first knot must be `(0, 0)` and both coordinates must be strictly
/// increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SplineKnots", into = "SplineKnots")]
pub struct MonotoneSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl From<MonotoneSpline> for SplineKnots {
    fn from(s: MonotoneSpline) -> Self {
        SplineKnots { knots: s.xs.into_iter().zip(s.ys).collect() }
    }
}

impl TryFrom<SplineKnots> for MonotoneSpline {
    type Error = Error;
    fn try_from(k: SplineKnots) -> Result<Self> {
        MonotoneSpline::new(&k.knots)
    }
}

impl MonotoneSpline {
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidParameter("spline needs at least two knots".into()));
        }
        if knots[0] != (0.0, 0.0) {
            return Err(Error::InvalidParameter("first spline knot must be (0, 0)".into()));
        }
        if knots.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite())
            || knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1))
        {
            return Err(Error::InvalidParameter(
                "spline knots must be finite and strictly increasing in both coordinates".into(),
            ));
        }
        let xs: Vec<f64> = knots.iter().map(|k| k.0).collect();
        let ys: Vec<f64> = knots.iter().map(|k| k.1).collect();
        let n = xs.len();
        let secant: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secant[0];
        slopes[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            // weighted harmonic mean keeps every interior slope positive
            let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
            let (w0, w1) = (2.0 * h1 + h0, h1 + 2.0 * h0);
            slopes[i] = (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i]);
        }
        // Fritsch–Carlson limiter: alpha^2 + beta^2 <= 9
        for i in 0..n - 1 {
            let a = slopes[i] / secant[i];
            let b = slopes[i + 1] / secant[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                slopes[i] = tau * a * secant[i];
                slopes[i + 1] = tau * b * secant[i];
            }
        }
        Ok(MonotoneSpline { xs, ys, slopes })
    }

    pub fn eval(&self, d: f64) -> f64 {
        let n = self.xs.len();
        if d >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (d - self.xs[n - 1]);
        }
        let i = self.xs.partition_point(|&x| x <= d).saturating_sub(1);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (d - self.xs[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn inverse(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.xs.len();
        if t >= self.ys[n - 1] {
            return self.xs[n - 1] + (t - self.ys[n - 1]) / self.slopes[n - 1];
        }
        let i = self.ys.partition_point(|&y| y <= t).saturating_sub(1);
        let (mut lo, mut hi) = (self.xs[i], self.xs[i + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spline() -> MonotoneSpline {
        MonotoneSpline::new(&[(0.0, 0.0), (0.5, 0.1), (1.0, 1.5), (2.0, 1.6), (5.0, 9.0)]).unwrap()
    }

    #[test]
    fn spline_interpolates_knots_and_is_increasing() {
        let s = spline();
        for (x, y) in [(0.0, 0.0), (0.5, 0.1), (1.0, 1.5), (2.0, 1.6), (5.0, 9.0)] {
            assert!((s.eval(x) - y).abs() < 1e-14);
        }
        let mut prev = -1.0;
        for i in 0..=10_000 {
            let v = s.eval(i as f64 * 1e-3);
            assert!(v > prev, "not increasing at {i}");
            prev = v;
        }
    }

    #[test]
    fn spline_rejects_bad_knots() {
        assert!(MonotoneSpline::new(&[(0.0, 0.0)]).is_err());
        assert!(MonotoneSpline::new(&[(0.1, 0.0), (1.0, 1.0)]).is_err());
        assert!(MonotoneSpline::new(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn spline_serde_roundtrip_keeps_knots() {
        let m = MonotoneMap::TableSpline(spline());
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"kind\":\"table_spline\""));
        let back: MonotoneMap = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MonotoneMap>(r#"{"kind":"table_spline","knots":[[0,1],[1,2]]}"#).is_err());
    }

    proptest! {
        #[test]
        fn inverse_roundtrip(d in 0.0f64..1e3, which in 0usize..4) {
            let map = match which {
                0 => MonotoneMap::Identity,
                1 => MonotoneMap::Power { q: 2.5 },
                2 => MonotoneMap::Log1p,
                _ => MonotoneMap::TableSpline(spline()),
            };
            let back = map.inverse(map.apply(d));
            prop_assert!((back - d).abs() <= 1e-10 * d.max(1e-300) || (back - d).abs() < 1e-14,
                "d = {d}, back = {back}");
        }
    }
}
