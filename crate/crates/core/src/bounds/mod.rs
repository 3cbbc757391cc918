//! Both sides of the `L²` stability inequalities, the normalized small-ball
//! combination, the remainder `r(ξ, t)` and the `Δ_K` rate, evaluated on
//! analytic density families.

mod checks;
mod population;
mod quadrature;
mod remainder;

pub use crate::density::DensitySpec;
pub use checks::{
    check_ineq_delta_k, check_ineq_l2, default_xi, rate_experiment, BoundCheck, BoundInputs, BoundOptions, RateFit,
};
pub use population::{
    gaussian_pair_model, population_delta_k, small_ball_normalized, Estimate, PopulationMethod, SmallBall,
};
pub use quadrature::{default_box, l2_distance_sq, l2_norm_sq, L2Report, MIN_COVERAGE};
pub use remainder::{remainder_r, Remainder};
