//! Generalized interpoint-distance toolkit.
//!
//! Equality of the three interpoint distance laws `h(X₁, X₂)`, `h(Y₁, Y₂)`
//! and `h(X₃, Y₃)` identifies the underlying densities for any
//! volume-regular generalized distance `h`. This crate provides:
//!
//! - [`distances`]: Canberra, Bray–Curtis, entropic, `l_p`, `l_p^p`,
//!   monotone transforms, sphere geodesics and an oscillatory stress test;
//! - [`ballgeom`]: exact, bounded and Monte Carlo ball volumes with
//!   volume-regularity and Ahlfors diagnostics;
//! - [`empirics`]: samplers, pairwise distances, ECDF triples, Kolmogorov
//!   discrepancies and permutation two-sample tests;
//! - [`bounds`]: the `L²` stability inequalities and the dimension-aware
//!   rate on analytic density families;
//! - [`cli`]: the `interpoint` command-line front end.

#![forbid(unsafe_code)]

pub mod ballgeom;
pub mod bounds;
pub mod cli;
pub mod density;
pub mod distances;
pub mod empirics;
pub mod error;
pub mod rng;
pub mod special;

pub use distances::{DistanceSpec, Domain, Family, MonotoneMap, Point};
pub use error::{Error, Result};
