use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::args::{json_dim, parse_distance};
use super::output::{csv_bytes, emit, is_csv, report_bytes, write_atomic};
use super::{figures, CliError, CliResult, Command, ExperimentConfig};
use crate::ballgeom::{
    check_volume_regularity_with, dyadic_grid, estimate_ahlfors_alpha, volume_bounds, volume_exact, volume_mc,
    AhlforsFit, RegularityConfig, RegularityReport,
};
use crate::bounds::{
    check_ineq_delta_k, check_ineq_l2, default_xi, rate_experiment, BoundCheck, BoundOptions, DensitySpec, RateFit,
};
use crate::distances::{DistanceSpec, Domain};
use crate::empirics::{
    ecdf_triple_from_distances, exact_delta_k, kolmogorov_discrepancy, pairwise_distances, permutation_test,
    read_sample_csv, DiscrepancyReport, EcdfTriple, Sample, StatisticKind, TestResult,
};

const DEFAULT_T_MAX: f64 = 0.1;
const DEFAULT_LEVELS: usize = 8;

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Distance name (l1, l2, lp:P, lpp:P, canberra, bray-curtis, entropic, sphere, oscillatory) or inline JSON.
    #[arg(long)]
    pub distance: String,
    /// First sample, one point per CSV row.
    #[arg(long)]
    pub x: PathBuf,
    /// Optional second sample.
    #[arg(long)]
    pub y: Option<PathBuf>,
    /// Domain of the samples (euclidean, positive, sphere); defaults to the distance's domain.
    #[arg(long)]
    pub domain: Option<Domain>,
    /// Also write single-column `<out>_xx.csv`, `<out>_yy.csv`, `<out>_xy.csv`.
    #[arg(long)]
    pub split: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistConfig {
    pub distance: DistanceSpec,
    pub x: PathBuf,
    pub y: Option<PathBuf>,
    pub domain: Domain,
    #[serde(default)]
    pub split: bool,
}

#[derive(Debug, Args)]
pub struct VolumeArgs {
    #[arg(long)]
    pub distance: String,
    /// Ball center, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub center: Vec<f64>,
    /// Radii, comma separated; dyadic from `--t-max` by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_T_MAX)]
    pub t_max: f64,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: usize,
    /// Monte Carlo draws per radius.
    #[arg(long, default_value_t = 200_000)]
    pub mc_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeConfig {
    pub distance: DistanceSpec,
    pub center: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub mc_n: usize,
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RegularityArgs {
    #[arg(long)]
    pub distance: String,
    /// Dimension for shorthand distances when no center is given.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub y: Option<Vec<f64>>,
    /// Strictly decreasing radii; dyadic from `--t-max` by default.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_T_MAX)]
    pub t_max: f64,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: usize,
    #[arg(long, default_value_t = 200_000)]
    pub mc_n: usize,
    /// Lower end of the accepted `δ_t / δ` band.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub band_lo: f64,
    /// Upper end of the accepted `δ_t / δ` band.
    #[arg(long, default_value_t = 3.0)]
    pub band_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityCmdConfig {
    pub distance: DistanceSpec,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub mc_n: usize,
    pub seed: u64,
    pub thresholds: RegularityConfig,
}

#[derive(Debug, Args)]
pub struct EcdfArgs {
    #[arg(long)]
    pub distance: String,
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long)]
    pub domain: Option<Domain>,
    /// Evaluation grid, comma separated and increasing.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfConfig {
    pub distance: DistanceSpec,
    pub x: PathBuf,
    pub y: PathBuf,
    pub domain: Domain,
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Sup,
    Cvm,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub distance: String,
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long)]
    pub domain: Option<Domain>,
    #[arg(long, value_enum, default_value_t = KindArg::Sup)]
    pub kind: KindArg,
    /// Number of relabelings (at least 99).
    #[arg(long, default_value_t = 999)]
    pub permutations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub distance: DistanceSpec,
    pub x: PathBuf,
    pub y: PathBuf,
    pub domain: Domain,
    pub kind: StatisticKind,
    pub permutations: usize,
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Experiment file holding a full bounds config; other flags are ignored.
    #[arg(long)]
    pub experiment: Option<PathBuf>,
    #[arg(long, default_value = "l2")]
    pub distance: String,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Mean shift of `g = N(shift e₁, I)` against `f = N(0, I)`.
    #[arg(long, default_value_t = 1.0)]
    pub shift: f64,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_value = "0.4,0.2,0.1,0.05")]
    pub t_grid: Vec<f64>,
    /// Decreasing shift ladder for the rate experiment.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub ladder: Option<Vec<f64>>,
    /// Growth exponent of ball volumes (defaults to the dimension).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Hölder exponent of the densities.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 20_000)]
    pub remainder_n: usize,
}

/// Constants of the two inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Constants {
    pub c: f64,
    pub delta_star: f64,
    pub big_c: f64,
    pub delta_sup: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c: 1.0, delta_star: 1.0, big_c: 1.0, delta_sup: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub ladder: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsConfig {
    pub distance: DistanceSpec,
    pub f: DensitySpec,
    pub g: DensitySpec,
    #[serde(default)]
    pub xi: Option<Vec<f64>>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub constants: Constants,
    #[serde(default)]
    pub options: BoundOptions,
    #[serde(default)]
    pub rate: Option<RateConfig>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Dimension of the first row of a CSV sample.
fn csv_dim(path: &Path) -> CliResult<usize> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let s = read_sample_csv(file, Domain::Euclidean, &path.display().to_string())
        .map_err(|e| CliError::Data(e.to_string()))?;
    Ok(s.dim())
}

fn distance_for_data(text: &str, x: &Path) -> CliResult<DistanceSpec> {
    let dim = match json_dim(text) {
        Some(d) => d,
        None => csv_dim(x)?,
    };
    Ok(parse_distance(text, dim)?)
}

fn grid_or_dyadic(grid: &Option<Vec<f64>>, t_max: f64, levels: usize) -> Vec<f64> {
    grid.clone().unwrap_or_else(|| dyadic_grid(t_max, levels))
}

fn default_centers(spec: &DistanceSpec) -> (Vec<f64>, Vec<f64>) {
    let k = spec.dim;
    match spec.domain() {
        Domain::UnitSphere => {
            let s = 1.0 / (k as f64).sqrt();
            (default_xi(spec), vec![s; k])
        }
        _ => ((1..=k).map(|i| i as f64).collect(), (2..=k + 1).map(|i| i as f64).collect()),
    }
}

/// Turn parsed flags into a resolved config.
pub fn resolve(cmd: &Command, seed: u64) -> CliResult<ExperimentConfig> {
    Ok(match cmd {
        Command::Dist(a) => {
            let distance = distance_for_data(&a.distance, &a.x)?;
            ExperimentConfig::Dist(DistConfig {
                domain: a.domain.unwrap_or(distance.domain()),
                distance,
                x: a.x.clone(),
                y: a.y.clone(),
                split: a.split,
            })
        }
        Command::Volume(a) => {
            if a.center.is_empty() {
                return Err(usage("--center is required"));
            }
            ExperimentConfig::Volume(VolumeConfig {
                distance: parse_distance(&a.distance, json_dim(&a.distance).unwrap_or(a.center.len()))?,
                center: a.center.clone(),
                t_grid: grid_or_dyadic(&a.t_grid, a.t_max, a.levels),
                mc_n: a.mc_n,
                seed,
            })
        }
        Command::Regularity(a) => {
            let dim = json_dim(&a.distance).or(a.x.as_ref().map(Vec::len)).unwrap_or(a.dim);
            let distance = parse_distance(&a.distance, dim)?;
            let (dx, dy) = default_centers(&distance);
            ExperimentConfig::Regularity(RegularityCmdConfig {
                x: a.x.clone().unwrap_or(dx),
                y: a.y.clone().unwrap_or(dy),
                distance,
                t_grid: grid_or_dyadic(&a.t_grid, a.t_max, a.levels),
                mc_n: a.mc_n,
                seed,
                thresholds: RegularityConfig { sandwich: (a.band_lo, a.band_hi), ..RegularityConfig::default() },
            })
        }
        Command::Ecdf(a) => {
            let distance = distance_for_data(&a.distance, &a.x)?;
            ExperimentConfig::Ecdf(EcdfConfig {
                domain: a.domain.unwrap_or(distance.domain()),
                distance,
                x: a.x.clone(),
                y: a.y.clone(),
                grid: a.grid.clone(),
            })
        }
        Command::Test(a) => {
            if a.permutations < 99 {
                return Err(usage(format!("--permutations must be at least 99, got {}", a.permutations)));
            }
            let distance = distance_for_data(&a.distance, &a.x)?;
            ExperimentConfig::Test(TestConfig {
                domain: a.domain.unwrap_or(distance.domain()),
                distance,
                x: a.x.clone(),
                y: a.y.clone(),
                kind: match a.kind {
                    KindArg::Sup => StatisticKind::SupDeltaK,
                    KindArg::Cvm => StatisticKind::CramerVonMises,
                },
                permutations: a.permutations,
                seed,
            })
        }
        Command::Bounds(a) => {
            if let Some(path) = &a.experiment {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
                let cfg: BoundsConfig =
                    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                return Ok(ExperimentConfig::Bounds(Box::new(cfg)));
            }
            let distance = parse_distance(&a.distance, json_dim(&a.distance).unwrap_or(a.dim))?;
            let k = distance.dim;
            ExperimentConfig::Bounds(Box::new(BoundsConfig {
                xi: Some(default_xi(&distance)),
                distance,
                f: DensitySpec::standard_gaussian_shifted(k, 0.0),
                g: DensitySpec::standard_gaussian_shifted(k, a.shift),
                t_grid: a.t_grid.clone(),
                constants: Constants::default(),
                options: BoundOptions { remainder_n: a.remainder_n, seed, ..BoundOptions::default() },
                rate: a.ladder.as_ref().map(|ladder| RateConfig {
                    ladder: ladder.clone(),
                    alpha: a.alpha.unwrap_or(k as f64),
                    beta: a.beta,
                }),
            }))
        }
        Command::Figures(a) => ExperimentConfig::Figures(figures::resolve(a)?),
    })
}

fn read_sample(path: &Path, domain: Domain) -> CliResult<Sample> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    read_sample_csv(file, domain, &path.display().to_string()).map_err(|e| CliError::Data(e.to_string()))
}

/// Sample I/O and distance evaluation failures are data errors.
fn data<T>(r: crate::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        e if e.is_numerical() => CliError::Numerical(e.to_string()),
        e => CliError::Data(e.to_string()),
    })
}

pub fn run(config: &ExperimentConfig, out: Option<&Path>) -> CliResult<()> {
    match config {
        ExperimentConfig::Dist(c) => run_dist(c, out),
        ExperimentConfig::Volume(c) => run_volume(config, c, out),
        ExperimentConfig::Regularity(c) => run_regularity(config, c, out),
        ExperimentConfig::Ecdf(c) => run_ecdf(config, c, out),
        ExperimentConfig::Test(c) => run_test(config, c, out),
        ExperimentConfig::Bounds(c) => run_bounds(config, c, out),
        ExperimentConfig::Figures(c) => figures::run(config, c, out),
    }
}

fn single_column(d: &[f64]) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for v in d {
        w.serialize(v).map_err(|e| CliError::Data(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::Data(format!("csv: {e}")))
}

fn run_dist(c: &DistConfig, out: Option<&Path>) -> CliResult<()> {
    let x = read_sample(&c.x, c.domain)?;
    let y = c.y.as_ref().map(|p| read_sample(p, c.domain)).transpose()?;
    let mut sets = vec![("xx", data(pairwise_distances(&c.distance, &x, None))?)];
    if let Some(y) = &y {
        sets.push(("yy", data(pairwise_distances(&c.distance, y, None))?));
        sets.push(("xy", data(pairwise_distances(&c.distance, &x, Some(y)))?));
    }
    let rows = sets.iter().flat_map(|(name, d)| d.iter().map(move |v| (*name, *v)));
    emit(out, &csv_bytes(&["set", "distance"], rows)?)?;
    if c.split {
        let out = out.ok_or_else(|| usage("--split needs --out"))?;
        let stem = out.with_extension("");
        for (name, d) in &sets {
            let path = PathBuf::from(format!("{}_{name}.csv", stem.display()));
            write_atomic(&path, &single_column(d)?)?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct VolumeRow {
    t: f64,
    phi_exact: Option<f64>,
    phi_mc: f64,
    stderr: f64,
    lower: Option<f64>,
    upper: Option<f64>,
}

fn run_volume(config: &ExperimentConfig, c: &VolumeConfig, out: Option<&Path>) -> CliResult<()> {
    if c.t_grid.is_empty() || c.t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(usage("radii must be positive"));
    }
    let mut rows = Vec::with_capacity(c.t_grid.len());
    for &t in &c.t_grid {
        let mc = volume_mc(&c.distance, &c.center, t, c.mc_n, c.seed)?;
        // closed forms and sandwiches are reported where they apply
        let exact = volume_exact(&c.distance, &c.center, t).ok().flatten();
        let bounds = volume_bounds(&c.distance, &c.center, t).ok();
        rows.push(VolumeRow {
            t,
            phi_exact: exact,
            phi_mc: mc.value,
            stderr: mc.stderr,
            lower: bounds.as_ref().map(|b| b.lower),
            upper: bounds.as_ref().map(|b| b.upper),
        });
    }
    if is_csv(out) {
        emit(out, &csv_bytes(&["t", "phi_exact", "phi_mc", "stderr", "lower", "upper"], &rows)?)
    } else {
        emit(out, &report_bytes(config, &serde_json::json!({ "rows": rows }))?)
    }
}

#[derive(Debug, Serialize)]
struct RegularityResult {
    regularity: RegularityReport,
    ahlfors: AhlforsFit,
}

fn run_regularity(config: &ExperimentConfig, c: &RegularityCmdConfig, out: Option<&Path>) -> CliResult<()> {
    let regularity = check_volume_regularity_with(&c.distance, &c.x, &c.y, &c.t_grid, c.mc_n, c.seed, &c.thresholds)?;
    let ahlfors = estimate_ahlfors_alpha(&c.distance, &c.x, &c.t_grid, c.mc_n, c.seed)?;
    emit(out, &report_bytes(config, &RegularityResult { regularity, ahlfors })?)
}

#[derive(Debug, Serialize)]
struct EcdfResult {
    triple: EcdfTriple,
    discrepancy: DiscrepancyReport,
    /// `Δ_K(∞)` from all observed distances, independent of grid thinning.
    delta_k_inf_exact: f64,
}

fn run_ecdf(config: &ExperimentConfig, c: &EcdfConfig, out: Option<&Path>) -> CliResult<()> {
    let x = read_sample(&c.x, c.domain)?;
    let y = read_sample(&c.y, c.domain)?;
    if x.len() < 2 || y.len() < 2 {
        return Err(CliError::Data("ECDFs need samples of at least two points".into()));
    }
    let dxx = data(pairwise_distances(&c.distance, &x, None))?;
    let dyy = data(pairwise_distances(&c.distance, &y, None))?;
    let dxy = data(pairwise_distances(&c.distance, &x, Some(&y)))?;
    let triple = ecdf_triple_from_distances(&dxx, &dyy, &dxy, c.grid.as_deref())?;
    let discrepancy = kolmogorov_discrepancy(&triple);
    if is_csv(out) {
        let rows = (0..triple.grid.len()).map(|i| {
            (triple.grid[i], triple.f_xx[i], triple.f_yy[i], triple.f_xy[i], discrepancy.delta_k[i])
        });
        return emit(out, &csv_bytes(&["t", "f_xx", "f_yy", "f_xy", "delta_k"], rows)?);
    }
    let result = EcdfResult { delta_k_inf_exact: exact_delta_k(&dxx, &dyy, &dxy, f64::INFINITY), triple, discrepancy };
    emit(out, &report_bytes(config, &result)?)
}

fn run_test(config: &ExperimentConfig, c: &TestConfig, out: Option<&Path>) -> CliResult<()> {
    if c.permutations < 99 {
        return Err(usage(format!("permutations must be at least 99, got {}", c.permutations)));
    }
    let x = read_sample(&c.x, c.domain)?;
    let y = read_sample(&c.y, c.domain)?;
    let result: TestResult = data(permutation_test(&c.distance, &x, &y, c.kind, c.permutations, c.seed))?;
    emit(out, &report_bytes(config, &result)?)
}

#[derive(Debug, Serialize)]
struct BoundsAtT {
    t: f64,
    ineq_l2: BoundCheck,
    ineq_delta_k: BoundCheck,
}

#[derive(Debug, Serialize)]
struct BoundsResult {
    checks: Vec<BoundsAtT>,
    all_hold: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate: Option<RateFit>,
}

fn run_bounds(config: &ExperimentConfig, c: &BoundsConfig, out: Option<&Path>) -> CliResult<()> {
    let xi = c.xi.clone().unwrap_or_else(|| default_xi(&c.distance));
    let k = &c.constants;
    let checks = c
        .t_grid
        .iter()
        .map(|&t| {
            Ok(BoundsAtT {
                t,
                ineq_l2: check_ineq_l2(&c.distance, &c.f, &c.g, &xi, t, (k.c, k.delta_star), &c.options)?,
                ineq_delta_k: check_ineq_delta_k(&c.distance, &c.f, &c.g, &xi, t, (k.big_c, k.delta_sup), &c.options)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let rate = c
        .rate
        .as_ref()
        .map(|r| rate_experiment(&c.distance, &c.f, &r.ladder, r.alpha, r.beta, &c.options))
        .transpose()?;
    let all_hold = checks.iter().all(|b| b.ineq_l2.holds && b.ineq_delta_k.holds)
        && rate.as_ref().is_none_or(|r| r.bound_holds);
    emit(out, &report_bytes(config, &BoundsResult { checks, all_hold, rate })?)
}
