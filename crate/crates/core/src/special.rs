//! Special functions and closed-form volumes shared by several modules.

use std::f64::consts::{PI, SQRT_2};

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// Volume of the unit `l_p` ball in `R^k`: `(2 Γ(1/p + 1))^k / Γ(k/p + 1)`.
pub fn lp_unit_ball_volume(p: f64, k: usize) -> f64 {
    let k = k as f64;
    (k * (2.0f64.ln() + libm::lgamma(1.0 / p + 1.0)) - libm::lgamma(k / p + 1.0)).exp()
}

/// Surface area of the unit sphere `S^m` embedded in `R^{m+1}`.
pub fn sphere_area(m: usize) -> f64 {
    let h = (m as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

/// Area of a geodesic cap of radius `t` on the unit sphere `S^{d-1}` in `R^d`.
///
/// Closed form on `S^2`; other dimensions integrate `|S^{d-2}| sin^{d-2}(s)`
/// over `[0, t]` with composite Simpson on 10^4 panels.
pub fn sphere_cap_area(ambient_dim: usize, t: f64) -> f64 {
    let t = t.min(PI);
    if ambient_dim == 3 {
        return 2.0 * PI * (1.0 - t.cos());
    }
    let m = ambient_dim - 2;
    let panels = 10_000;
    let h = t / panels as f64;
    let f = |s: f64| s.sin().powi(m as i32);
    let mut acc = f(0.0) + f(t);
    for i in 1..panels {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sphere_area(m) * acc * h / 3.0
}

/// Second-order small-radius expansion of the geodesic cap area on the unit
/// two-sphere, `π t² (1 − t²/12)`.
pub fn gray_cap_area_s2(t: f64) -> f64 {
    PI * t * t * (1.0 - t * t / 12.0)
}

/// `1/k!` as a float.
pub fn inv_factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc / i as f64)
}
