//! Ball volumes `Φ(x, t) = μ(B_t(x))` and the diagnostics built on them.
//!
//! Volumes come from three sources: closed forms ([`volume_exact`]),
//! inscribed/circumscribed rectangles ([`volume_bounds`]) and hit-or-miss
//! Monte Carlo inside a circumscribed box ([`volume_mc`]). The regularity
//! diagnostics compare volume ratios `δ_t(x, y) = Φ(x, t) / Φ(y, t)` with
//! their analytic limits and fit log-log growth exponents.

mod regularity;
mod volume;

pub(crate) use regularity::ols;
pub(crate) use volume::par_chunks;

pub use regularity::{
    centered_oscillation, check_volume_regularity, check_volume_regularity_with, delta_limit, delta_t,
    dyadic_grid, estimate_ahlfors_alpha, AhlforsFit, OscillationEntry, OscillationEstimate,
    RegularityConfig, RegularityReport, Verdict,
};
pub use volume::{
    bounding_box, phi, volume_bounds, volume_exact, volume_mc, volume_mc_nested, AxisBox, VolumeBounds,
    VolumeEstimate, VolumeMethod,
};
