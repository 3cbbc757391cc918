use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Sample;
use crate::distances::DistanceSpec;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatisticKind {
    /// Plug-in `Δ_K(∞)`.
    SupDeltaK,
    /// `∫ [(F̂_XX − F̂_XY)² + (F̂_YY − F̂_XY)²] dĤ` over the pooled distance ECDF `Ĥ`.
    CramerVonMises,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub statistic_kind: StatisticKind,
}

/// All pooled pairs sorted by distance, with group boundaries at ties.
struct PooledPairs {
    d: Vec<f64>,
    i: Vec<u32>,
    j: Vec<u32>,
    /// `ends[g]` is one past the last pair of tie group `g`.
    ends: Vec<usize>,
    symmetric: bool,
}

impl PooledPairs {
    fn new(spec: &DistanceSpec, pts: &[&[f64]]) -> Result<Self> {
        let symmetric = spec.is_symmetric();
        let n = pts.len();
        let mut pairs: Vec<(f64, u32, u32)> = (0..n)
            .into_par_iter()
            .map(|a| {
                let others = if symmetric { a + 1..n } else { 0..n };
                others
                    .filter(|&b| b != a)
                    .map(|b| Ok((spec.eval(pts[a], pts[b])?, a as u32, b as u32)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        pairs.par_sort_unstable_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
        let mut ends = Vec::new();
        for k in 1..pairs.len() {
            if pairs[k].0 != pairs[k - 1].0 {
                ends.push(k);
            }
        }
        ends.push(pairs.len());
        Ok(PooledPairs {
            d: pairs.iter().map(|p| p.0).collect(),
            i: pairs.iter().map(|p| p.1).collect(),
            j: pairs.iter().map(|p| p.2).collect(),
            ends,
            symmetric,
        })
    }

    /// Statistic for a labeling where `in_x[p]` marks membership of X.
    fn statistic(&self, in_x: &[bool], n: usize, m: usize, kind: StatisticKind) -> f64 {
        let (nxx, nyy) = if self.symmetric {
            ((n * (n - 1) / 2) as f64, (m * (m - 1) / 2) as f64)
        } else {
            ((n * (n - 1)) as f64, (m * (m - 1)) as f64)
        };
        let nxy = (n * m) as f64;
        let total = self.d.len() as f64;
        let (mut cxx, mut cyy, mut cxy) = (0usize, 0usize, 0usize);
        let (mut sx, mut sy, mut cvm) = (0.0f64, 0.0f64, 0.0f64);
        let mut start = 0;
        for &end in &self.ends {
            if kind == StatisticKind::CramerVonMises {
                // strict ECDFs at this atom, weighted by its pooled mass
                let fxy = cxy as f64 / nxy;
                let a = cxx as f64 / nxx - fxy;
                let b = cyy as f64 / nyy - fxy;
                cvm += (end - start) as f64 / total * (a * a + b * b);
            }
            for p in start..end {
                let (xi, xj) = (in_x[self.i[p] as usize], in_x[self.j[p] as usize]);
                match (xi, xj) {
                    (true, true) => cxx += 1,
                    (false, false) => cyy += 1,
                    // asymmetric cross pairs count only in (x, y) order
                    (true, false) => cxy += 1,
                    (false, true) if self.symmetric => cxy += 1,
                    (false, true) => {}
                }
            }
            if kind == StatisticKind::SupDeltaK {
                let fxy = cxy as f64 / nxy;
                sx = sx.max((cxx as f64 / nxx - fxy).abs());
                sy = sy.max((cyy as f64 / nyy - fxy).abs());
            }
            start = end;
        }
        match kind {
            StatisticKind::SupDeltaK => sx + sy,
            StatisticKind::CramerVonMises => cvm,
        }
    }
}

/// Permutation test of equal interpoint distance laws. Points (not
/// distances) are relabeled, replicate `b` drawing from stream `(seed, b)`.
pub fn permutation_test(
    spec: &DistanceSpec,
    x: &Sample,
    y: &Sample,
    kind: StatisticKind,
    n_permutations: usize,
    seed: u64,
) -> Result<TestResult> {
    if n_permutations < 99 {
        return Err(Error::InvalidParameter(format!("need at least 99 permutations, got {n_permutations}")));
    }
    let (n, m) = (x.len(), y.len());
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter("both samples need at least two points".into()));
    }
    let pts: Vec<&[f64]> = x.points().iter().chain(y.points()).map(Vec::as_slice).collect();
    pts.iter().try_for_each(|p| spec.check_point(p))?;
    let pooled = PooledPairs::new(spec, &pts)?;
    let observed_labels: Vec<bool> = (0..n + m).map(|p| p < n).collect();
    let observed = pooled.statistic(&observed_labels, n, m, kind);
    let tol = 1e-12 * observed.abs().max(1.0);
    let exceed = (0..n_permutations as u64)
        .into_par_iter()
        .filter(|&b| {
            let mut rng = rng::substream(seed, b);
            let mut labels = observed_labels.clone();
            labels.shuffle(&mut rng);
            pooled.statistic(&labels, n, m, kind) >= observed - tol
        })
        .count();
    Ok(TestResult {
        statistic: observed,
        p_value: (1 + exceed) as f64 / (1 + n_permutations) as f64,
        n_permutations,
        statistic_kind: kind,
    })
}
