use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ballgeom::{bounding_box, phi, VolumeMethod};
use crate::density::DensitySpec;
use crate::distances::DistanceSpec;
use crate::error::{Error, Result};

/// Inner ball draws per outer point.
const INNER: usize = 64;
const MIN_ACCEPTED: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Remainder {
    pub value: f64,
    pub stderr: f64,
    /// Inner draws that landed in their ball.
    pub accepted: usize,
}

/// `r(ξ, t) = Φ(ξ, t)⁻¹ ∫ |D(x)| ∫_{B_t(x)} |D(y) − D(x)| dy dx`, `D = f − g`.
///
/// Outer points come from `(f + g) / 2`; each inner integral uses
/// [`INNER`] uniform draws in the bounding box of `B_t(x)`. The draws are a
/// function of `(seed, outer index)` only, so calls at different `t` with
/// the same seed share random numbers.
#[allow(clippy::too_many_arguments)]
pub fn remainder_r(
    spec: &DistanceSpec,
    f: &DensitySpec,
    g: &DensitySpec,
    xi: &[f64],
    t: f64,
    mc_n: usize,
    seed: u64,
    volume: VolumeMethod,
) -> Result<Remainder> {
    if mc_n < 1000 {
        return Err(Error::InvalidParameter(format!("remainder needs mc_n >= 1000, got {mc_n}")));
    }
    let phi_xi = phi(spec, xi, t, volume)?;
    if phi_xi <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    if f == g {
        return Ok(Remainder { value: 0.0, stderr: 0.0, accepted: 0 });
    }
    let k = spec.dim;
    let d = |x: &[f64]| f.pdf(x) - g.pdf(x);
    let parts: Vec<Result<(f64, f64, usize)>> = crate::ballgeom::par_chunks(mc_n, seed, |r, len| {
        let (mut x, mut u, mut y) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
        let (mut s, mut s2, mut acc) = (0.0, 0.0, 0usize);
        for _ in 0..len {
            if r.random::<bool>() {
                f.sample_into(r, &mut x);
            } else {
                g.sample_into(r, &mut x);
            }
            let dx = d(&x);
            let q = 0.5 * (f.pdf(&x) + g.pdf(&x));
            // inner draws are consumed even when the term vanishes, keeping streams aligned
            let bx = if dx != 0.0 && q > 0.0 { Some(bounding_box(spec, &x, t)?) } else { None };
            let mut inner = 0.0;
            for _ in 0..INNER {
                u.iter_mut().for_each(|v| *v = r.random::<f64>());
                if let Some(bx) = &bx {
                    bx.map_into(&u, &mut y);
                    if spec.ball_contains(&x, &y, t) {
                        acc += 1;
                        inner += (d(&y) - dx).abs();
                    }
                }
            }
            let term = match &bx {
                Some(bx) => dx.abs() / q * bx.volume() * inner / INNER as f64,
                None => 0.0,
            };
            s += term;
            s2 += term * term;
        }
        Ok((s, s2, acc))
    });
    let (mut s, mut s2, mut accepted) = (0.0, 0.0, 0);
    for p in parts {
        let (a, b, c) = p?;
        s += a;
        s2 += b;
        accepted += c;
    }
    if accepted < MIN_ACCEPTED {
        return Err(Error::InsufficientAcceptance { accepted, required: MIN_ACCEPTED, t });
    }
    let n = mc_n as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok(Remainder { value: mean / phi_xi, stderr: (var / n).sqrt() / phi_xi, accepted })
}
