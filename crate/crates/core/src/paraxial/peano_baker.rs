//! Iterated-integral (Peano-Baker) series for `g` and `h`.
//!
//! `g = Σ (−1)^k G_k` with `G_0 = 1` and `G_k(z) = ∫∫ α²·G_{k−1}`, and the same
//! recursion for `h` starting from `H_0 = z − zi`. Each double integral is
//! accumulated on a shared uniform grid, so a full series of order `m` costs
//! `O(m·n_steps)` and yields the pair at every grid node at once. The inner
//! single integral of each term gives `g′` and `h′` without differencing.

use super::FundamentalPair;
use crate::error::{Error, Result};
use crate::fields::LensStrength;
use crate::quadrature::cumulative_uniform;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeanoBakerPair {
    pub pair: FundamentalPair,
    /// Magnitude of the last included `g` term.
    pub truncation_g: f64,
    /// Magnitude of the last included `h` term (a length).
    pub truncation_h: f64,
}

fn check(order: usize, n_steps: usize) -> Result<()> {
    if order < 1 {
        return Err(Error::Domain("series order must be at least 1".into()));
    }
    if n_steps < 3 {
        return Err(Error::Domain(format!("need at least 3 grid steps, got {n_steps}")));
    }
    Ok(())
}

/// Truncated series on the uniform grid `zi + k·(z − zi)/n_steps`,
/// `k = 0..=n_steps`.
pub fn peano_baker_grid(
    ls: &LensStrength,
    zi: f64,
    z: f64,
    order: usize,
    n_steps: usize,
) -> Result<Vec<PeanoBakerPair>> {
    check(order, n_steps)?;
    ls.profile.check_interval(zi, z)?;
    let step = (z - zi) / n_steps as f64;
    let nodes: Vec<f64> = (0..=n_steps)
        .map(|k| if k == n_steps { z } else { zi + k as f64 * step })
        .collect();
    let a2: Vec<f64> = nodes
        .iter()
        .map(|&t| ls.alpha(t).map(|a| a * a))
        .collect::<Result<_>>()?;

    let n = nodes.len();
    let mut g = vec![1.0; n];
    let mut gp = vec![0.0; n];
    let mut h: Vec<f64> = nodes.iter().map(|t| t - zi).collect();
    let mut hp = vec![1.0; n];
    let mut prev_g = g.clone();
    let mut prev_h = h.clone();
    let mut inner = Vec::with_capacity(n);
    let mut outer = Vec::with_capacity(n);
    let mut work = vec![0.0; n];
    let mut sign = 1.0;
    for _ in 0..order {
        sign = -sign;
        for (prev, (val, der)) in
            [(&mut prev_g, (&mut g, &mut gp)), (&mut prev_h, (&mut h, &mut hp))]
        {
            for i in 0..n {
                work[i] = a2[i] * prev[i];
            }
            cumulative_uniform(&work, step, &mut inner);
            cumulative_uniform(&inner, step, &mut outer);
            for i in 0..n {
                val[i] += sign * outer[i];
                der[i] += sign * inner[i];
            }
            prev.copy_from_slice(&outer);
        }
    }
    Ok((0..n)
        .map(|i| PeanoBakerPair {
            pair: FundamentalPair { zi, z: nodes[i], g: g[i], g_prime: gp[i], h: h[i], h_prime: hp[i] },
            truncation_g: prev_g[i].abs(),
            truncation_h: prev_h[i].abs(),
        })
        .collect())
}

/// Truncated series from `zi` to `z`.
pub fn peano_baker_pair(
    ls: &LensStrength,
    zi: f64,
    z: f64,
    order: usize,
    n_steps: usize,
) -> Result<PeanoBakerPair> {
    Ok(*peano_baker_grid(ls, zi, z, order, n_steps)?.last().expect("non-empty grid"))
}

/// Pairs from `planes[0]` to every plane, composing the truncated series of
/// each consecutive segment. Truncation estimates add up along the path.
pub fn peano_baker_path(
    ls: &LensStrength,
    planes: &[f64],
    order: usize,
    steps_per_segment: usize,
) -> Result<Vec<PeanoBakerPair>> {
    check(order, steps_per_segment)?;
    let Some(&z0) = planes.first() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(planes.len());
    let mut acc = PeanoBakerPair {
        pair: FundamentalPair::identity(z0),
        truncation_g: 0.0,
        truncation_h: 0.0,
    };
    out.push(acc);
    for w in planes.windows(2) {
        let seg = if w[0] == w[1] {
            PeanoBakerPair { pair: FundamentalPair::identity(w[0]), truncation_g: 0.0, truncation_h: 0.0 }
        } else {
            peano_baker_pair(ls, w[0], w[1], order, steps_per_segment)?
        };
        acc = PeanoBakerPair {
            pair: seg.pair.compose(&acc.pair),
            truncation_g: acc.truncation_g + seg.truncation_g,
            truncation_h: acc.truncation_h + seg.truncation_h,
        };
        out.push(acc);
    }
    Ok(out)
}
