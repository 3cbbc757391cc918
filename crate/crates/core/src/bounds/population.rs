use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ballgeom::{phi, VolumeMethod};
use crate::density::DensitySpec;
use crate::distances::{DistanceSpec, Family};
use crate::empirics::{closed_form_distance_cdf, exact_delta_k, GaussianPairModel, PairKind};
use crate::error::{Error, Result};
use crate::rng;

/// Population interpoint-distance probabilities are computed in closed form
/// when the configuration allows it, else from simulated pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PopulationMethod {
    /// Closed form if available, else Monte Carlo with the given settings.
    Auto { pairs: usize, seed: u64 },
    MonteCarlo { pairs: usize, seed: u64 },
}

impl Default for PopulationMethod {
    fn default() -> Self {
        PopulationMethod::Auto { pairs: 1_000_000, seed: 0 }
    }
}

/// A population quantity with its Monte Carlo standard error (zero for
/// closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub closed_form: bool,
}

/// Isotropic Gaussians under the Euclidean distance in one or two dimensions.
pub fn gaussian_pair_model(spec: &DistanceSpec, f: &DensitySpec, g: &DensitySpec) -> Option<GaussianPairModel> {
    let euclidean = match spec.family {
        Family::Lp { p } => spec.dim == 1 || p == 2.0,
        _ => false,
    };
    if !euclidean || spec.dim > 2 {
        return None;
    }
    let iso = |d: &DensitySpec| match d {
        DensitySpec::DiagGaussian { mean, var } if mean.len() == spec.dim && var.iter().all(|v| *v == var[0]) => {
            Some((mean.clone(), var[0].sqrt()))
        }
        _ => None,
    };
    let (mf, sf) = iso(f)?;
    let (mg, sg) = iso(g)?;
    let shift = mf.iter().zip(&mg).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    GaussianPairModel::new(spec.dim, sf, sg, shift).ok()
}

/// Sorted simulated distances `h(A, B)` with `A ~ a`, `B ~ b` independent.
fn simulated_distances(spec: &DistanceSpec, a: &DensitySpec, b: &DensitySpec, pairs: usize, seed: u64) -> Vec<f64> {
    let k = spec.dim;
    let mut d: Vec<f64> = rng::chunks(pairs)
        .into_par_iter()
        .flat_map_iter(|(c, len)| {
            let mut r = rng::substream(seed, c);
            let (mut x, mut y) = (vec![0.0; k], vec![0.0; k]);
            (0..len)
                .map(|_| {
                    a.sample_into(&mut r, &mut x);
                    b.sample_into(&mut r, &mut y);
                    spec.eval_unchecked(&x, &y)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    d.par_sort_unstable_by(f64::total_cmp);
    d
}

fn check_setup(spec: &DistanceSpec, f: &DensitySpec, g: &DensitySpec) -> Result<()> {
    f.validate()?;
    g.validate()?;
    for d in [f, g] {
        if d.dim() != spec.dim {
            return Err(Error::DimensionMismatch { expected: spec.dim, found: d.dim() });
        }
        if d.domain() != spec.domain() {
            return Err(Error::InvalidParameter(format!("{} needs {:?} densities", spec.name(), spec.domain())));
        }
    }
    Ok(())
}

fn mc_settings(method: PopulationMethod) -> Result<(usize, u64)> {
    let (PopulationMethod::Auto { pairs, seed } | PopulationMethod::MonteCarlo { pairs, seed }) = method;
    if pairs < 1000 {
        return Err(Error::InvalidParameter(format!("need at least 1000 simulated pairs, got {pairs}")));
    }
    Ok((pairs, seed))
}

/// Three simulated distance sets from independent streams.
fn simulated_triple(
    spec: &DistanceSpec,
    f: &DensitySpec,
    g: &DensitySpec,
    pairs: usize,
    seed: u64,
) -> [Vec<f64>; 3] {
    [
        simulated_distances(spec, f, f, pairs, rng::derive(seed, 1)),
        simulated_distances(spec, g, g, pairs, rng::derive(seed, 2)),
        simulated_distances(spec, f, g, pairs, rng::derive(seed, 3)),
    ]
}

/// Population `Δ_K(t)` (`t = ∞` allowed).
pub fn population_delta_k(
    spec: &DistanceSpec,
    f: &DensitySpec,
    g: &DensitySpec,
    t: f64,
    method: PopulationMethod,
) -> Result<Estimate> {
    check_setup(spec, f, g)?;
    if f == g {
        return Ok(Estimate { value: 0.0, stderr: 0.0, closed_form: true });
    }
    if let (PopulationMethod::Auto { .. }, Some(model)) = (method, gaussian_pair_model(spec, f, g)) {
        return Ok(Estimate { value: model.delta_k(t), stderr: 0.0, closed_form: true });
    }
    let (pairs, seed) = mc_settings(method)?;
    let [dxx, dyy, dxy] = simulated_triple(spec, f, g, pairs, seed);
    // each supremum deviates by O(1/√pairs); report that scale as the error
    Ok(Estimate { value: exact_delta_k(&dxx, &dyy, &dxy, t), stderr: 2.0 / (pairs as f64).sqrt(), closed_form: false })
}

/// Normalized small-ball combination at radius `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallBall {
    pub value: f64,
    pub stderr: f64,
    /// `F_XX(t) + F_YY(t) − 2 F_XY(t)`.
    pub numerator: f64,
    pub phi_xi: f64,
    pub closed_form: bool,
}

/// `[F_XX(t) + F_YY(t) − 2 F_XY(t)] / Φ(ξ, t)`.
pub fn small_ball_normalized(
    spec: &DistanceSpec,
    f: &DensitySpec,
    g: &DensitySpec,
    t: f64,
    xi: &[f64],
    method: PopulationMethod,
    volume: VolumeMethod,
) -> Result<SmallBall> {
    check_setup(spec, f, g)?;
    let phi_xi = phi(spec, xi, t, volume)?;
    if phi_xi <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    if f == g {
        return Ok(SmallBall { value: 0.0, stderr: 0.0, numerator: 0.0, phi_xi, closed_form: true });
    }
    if let (PopulationMethod::Auto { .. }, Some(model)) = (method, gaussian_pair_model(spec, f, g)) {
        let cdf = |kind| closed_form_distance_cdf(&model, kind, t);
        let numerator = cdf(PairKind::Xx) + cdf(PairKind::Yy) - 2.0 * cdf(PairKind::Xy);
        return Ok(SmallBall { value: numerator / phi_xi, stderr: 0.0, numerator, phi_xi, closed_form: true });
    }
    let (pairs, seed) = mc_settings(method)?;
    let [dxx, dyy, dxy] = simulated_triple(spec, f, g, pairs, seed);
    let n = pairs as f64;
    let p = |d: &[f64]| d.partition_point(|&v| v < t) as f64 / n;
    let (pxx, pyy, pxy) = (p(&dxx), p(&dyy), p(&dxy));
    let var = |q: f64| q * (1.0 - q) / n;
    let numerator = pxx + pyy - 2.0 * pxy;
    let stderr = (var(pxx) + var(pyy) + 4.0 * var(pxy)).sqrt() / phi_xi;
    Ok(SmallBall { value: numerator / phi_xi, stderr, numerator, phi_xi, closed_form: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(shift: f64) -> DensitySpec {
        DensitySpec::standard_gaussian_shifted(1, shift)
    }

    #[test]
    fn identical_densities_vanish() {
        let l2 = DistanceSpec::lp(2.0, 1).unwrap();
        let sb = small_ball_normalized(&l2, &gauss(0.0), &gauss(0.0), 0.1, &[0.0], PopulationMethod::default(), VolumeMethod::Exact)
            .unwrap();
        assert_eq!(sb.value, 0.0);
        assert_eq!(population_delta_k(&l2, &gauss(0.0), &gauss(0.0), 1.0, PopulationMethod::default()).unwrap().value, 0.0);
    }

    #[test]
    fn small_ball_approaches_l2_distance() {
        let l2 = DistanceSpec::lp(2.0, 1).unwrap();
        let sb = small_ball_normalized(&l2, &gauss(0.0), &gauss(1.0), 0.05, &[0.0], PopulationMethod::default(), VolumeMethod::Exact)
            .unwrap();
        assert!(sb.closed_form);
        assert!((sb.phi_xi - 0.1).abs() < 1e-15);
        assert!((sb.value - 0.124_726_545_113_854).abs() < 1e-11, "{sb:?}");
        assert!((sb.value / 0.124_798_294_080_034 - 1.0).abs() < 0.1);
    }

    #[test]
    fn monte_carlo_agrees_with_closed_form() {
        let l2 = DistanceSpec::lp(2.0, 2).unwrap();
        let f = DensitySpec::standard_gaussian_shifted(2, 0.0);
        let g = DensitySpec::standard_gaussian_shifted(2, 1.0);
        let mc = PopulationMethod::MonteCarlo { pairs: 400_000, seed: 3 };
        let a = small_ball_normalized(&l2, &f, &g, 0.5, &[0.0, 0.0], PopulationMethod::default(), VolumeMethod::Exact).unwrap();
        let b = small_ball_normalized(&l2, &f, &g, 0.5, &[0.0, 0.0], mc, VolumeMethod::Exact).unwrap();
        assert!((a.value - b.value).abs() < 4.0 * b.stderr, "{a:?} {b:?}");
        let da = population_delta_k(&l2, &f, &g, f64::INFINITY, PopulationMethod::default()).unwrap();
        let db = population_delta_k(&l2, &f, &g, f64::INFINITY, mc).unwrap();
        assert!(da.closed_form && !db.closed_form);
        assert!((da.value - db.value).abs() < 2.0 * db.stderr, "{da:?} {db:?}");
    }

    #[test]
    fn model_detection() {
        let l2 = DistanceSpec::lp(2.0, 2).unwrap();
        let aniso = DensitySpec::gaussian(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        assert!(gaussian_pair_model(&l2, &aniso, &aniso).is_none());
        let l1 = DistanceSpec::lp(1.0, 2).unwrap();
        let iso = DensitySpec::standard_gaussian_shifted(2, 1.0);
        assert!(gaussian_pair_model(&l1, &iso, &iso).is_none());
        let m = gaussian_pair_model(&l2, &DensitySpec::gaussian(vec![1.0, 1.0], vec![4.0, 4.0]).unwrap(), &iso).unwrap();
        assert!((m.shift - 1.0).abs() < 1e-15 && (m.sigma_x - 2.0).abs() < 1e-15);
        assert!(check_setup(&DistanceSpec::entropic(2), &iso, &iso).is_err());
    }
}
