use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Sample;
use crate::distances::DistanceSpec;
use crate::error::{Error, Result};

/// Maximum number of points in a default ECDF grid.
pub const GRID_CAP: usize = 4096;

fn check_sample(spec: &DistanceSpec, s: &Sample) -> Result<()> {
    s.points().iter().try_for_each(|p| spec.check_point(p))
}

fn sort(mut d: Vec<f64>) -> Vec<f64> {
    d.sort_unstable_by(f64::total_cmp);
    d
}

/// Sorted interpoint distances.
///
/// Within one sample (`b = None`) every unordered pair is used for a
/// symmetric distance and every ordered pair `(i, j)`, `i ≠ j`, otherwise.
/// Between samples all `(a, b)` pairs are used in that argument order.
pub fn pairwise_distances(spec: &DistanceSpec, a: &Sample, b: Option<&Sample>) -> Result<Vec<f64>> {
    check_sample(spec, a)?;
    let pa = a.points();
    let d = match b {
        None => {
            let symmetric = spec.is_symmetric();
            pa.par_iter()
                .enumerate()
                .map(|(i, x)| {
                    let others = if symmetric { i + 1..pa.len() } else { 0..pa.len() };
                    others
                        .filter(|&j| j != i)
                        .map(|j| spec.eval(x, &pa[j]))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?
        }
        Some(b) => {
            check_sample(spec, b)?;
            let pb = b.points();
            pa.par_iter()
                .map(|x| pb.iter().map(|y| spec.eval(x, y)).collect::<Result<Vec<f64>>>())
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(sort(d.into_iter().flatten().collect()))
}

/// Empirical distance CDFs `F̂(t) = #{d < t} / #pairs` on a shared grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfTriple {
    pub grid: Vec<f64>,
    pub f_xx: Vec<f64>,
    pub f_yy: Vec<f64>,
    pub f_xy: Vec<f64>,
    pub n_xx: usize,
    pub n_yy: usize,
    pub n_xy: usize,
}

/// Strict-inequality ECDF of sorted `d` at `t`.
fn ecdf_at(d: &[f64], t: f64) -> f64 {
    d.partition_point(|&v| v < t) as f64 / d.len() as f64
}

/// Observed distances, midpoints between consecutive distinct values and one
/// point past the maximum; only positive values; thinned to [`GRID_CAP`].
fn default_grid(sets: [&[f64]; 3]) -> Vec<f64> {
    let mut all: Vec<f64> = sets.iter().flat_map(|s| s.iter().copied()).filter(|&v| v > 0.0).collect();
    all.sort_unstable_by(f64::total_cmp);
    all.dedup();
    let mut grid = Vec::with_capacity(2 * all.len() + 1);
    for (i, &v) in all.iter().enumerate() {
        if i > 0 {
            grid.push(0.5 * (all[i - 1] + v));
        }
        grid.push(v);
    }
    let top = all.last().copied().unwrap_or(0.0);
    grid.push(if top > 0.0 { top * (1.0 + 1e-9) } else { 1.0 });
    if grid.len() > GRID_CAP {
        let m = grid.len() - 1;
        grid = (0..GRID_CAP).map(|i| grid[(i * m + (GRID_CAP - 1) / 2) / (GRID_CAP - 1)]).collect();
        grid.dedup();
    }
    grid
}

/// Build the triple from already computed, sorted distance sets.
pub fn ecdf_triple_from_distances(dxx: &[f64], dyy: &[f64], dxy: &[f64], grid: Option<&[f64]>) -> Result<EcdfTriple> {
    if dxx.is_empty() || dyy.is_empty() || dxy.is_empty() {
        return Err(Error::InvalidParameter("every distance set must be nonempty".into()));
    }
    let grid = match grid {
        Some(g) => {
            if g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidParameter("ECDF grid must be strictly increasing".into()));
            }
            g.to_vec()
        }
        None => default_grid([dxx, dyy, dxy]),
    };
    let eval = |d: &[f64]| grid.iter().map(|&t| ecdf_at(d, t)).collect::<Vec<_>>();
    Ok(EcdfTriple {
        f_xx: eval(dxx),
        f_yy: eval(dyy),
        f_xy: eval(dxy),
        grid,
        n_xx: dxx.len(),
        n_yy: dyy.len(),
        n_xy: dxy.len(),
    })
}

/// `F̂_XX`, `F̂_YY`, `F̂_XY` for two samples; each needs at least two points.
pub fn ecdf_triple(spec: &DistanceSpec, x: &Sample, y: &Sample, grid: Option<&[f64]>) -> Result<EcdfTriple> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::InvalidParameter("ECDF triples need samples of size >= 2".into()));
    }
    let dxx = pairwise_distances(spec, x, None)?;
    let dyy = pairwise_distances(spec, y, None)?;
    let dxy = pairwise_distances(spec, x, Some(y))?;
    ecdf_triple_from_distances(&dxx, &dyy, &dxy, grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub t_grid: Vec<f64>,
    pub delta_k: Vec<f64>,
    pub delta_k_inf: f64,
}

/// Running suprema of `|F_XX − F_XY|` and `|F_YY − F_XY|`, summed.
pub fn kolmogorov_discrepancy(triple: &EcdfTriple) -> DiscrepancyReport {
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    let delta_k: Vec<f64> = (0..triple.grid.len())
        .map(|i| {
            sx = sx.max((triple.f_xx[i] - triple.f_xy[i]).abs());
            sy = sy.max((triple.f_yy[i] - triple.f_xy[i]).abs());
            sx + sy
        })
        .collect();
    DiscrepancyReport { t_grid: triple.grid.clone(), delta_k_inf: delta_k.last().copied().unwrap_or(0.0), delta_k }
}

/// `Δ_K(t)` from sorted distance sets without any grid (`t = ∞` allowed).
/// Both suprema are attained just above some observed distance, so a merged
/// sweep over the atoms below `t` is exact.
pub fn exact_delta_k(dxx: &[f64], dyy: &[f64], dxy: &[f64], t: f64) -> f64 {
    let (nxx, nyy, nxy) = (dxx.len() as f64, dyy.len() as f64, dxy.len() as f64);
    let (mut i, mut j, mut l) = (0, 0, 0);
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    loop {
        let next = [dxx.get(i), dyy.get(j), dxy.get(l)].into_iter().flatten().copied().fold(f64::INFINITY, f64::min);
        if next >= t {
            break;
        }
        while i < dxx.len() && dxx[i] <= next {
            i += 1;
        }
        while j < dyy.len() && dyy[j] <= next {
            j += 1;
        }
        while l < dxy.len() && dxy[l] <= next {
            l += 1;
        }
        let fxy = l as f64 / nxy;
        sx = sx.max((i as f64 / nxx - fxy).abs());
        sy = sy.max((j as f64 / nyy - fxy).abs());
    }
    sx + sy
}
