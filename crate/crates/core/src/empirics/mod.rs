//! Samples, interpoint distance ECDFs, Kolmogorov discrepancies and a
//! permutation two-sample test built on them.

mod ecdf;
mod oracle;
mod permutation;
mod sample;

pub use ecdf::{
    ecdf_triple, ecdf_triple_from_distances, exact_delta_k, kolmogorov_discrepancy, pairwise_distances,
    DiscrepancyReport, EcdfTriple, GRID_CAP,
};
pub use oracle::{closed_form_distance_cdf, GaussianPairModel, PairKind};
pub use permutation::{permutation_test, StatisticKind, TestResult};
pub use sample::{generate, read_sample_csv, write_sample_csv, Sample};

/// Samplers share the analytic density families used by the bound checks.
pub type SamplerSpec = crate::density::DensitySpec;
