//! Power-law fields `α = α0·k_n·z^n`.
//!
//! With `p = n + 1`, `ν = 1/(2p)` and `c = |α0·k_n|/(2|p|)`, the basis
//!
//! ```text
//! G(z) = Σ_j (−1)^j (c·|z|^p)^{2j} / ((1−ν)_j · j!) = Γ(1−ν)·(ζ/2)^ν·J_{−ν}(ζ)
//! H(z) = z·Σ_j (−1)^j (c·|z|^p)^{2j} / ((1+ν)_j · j!) = z·Γ(1+ν)·(ζ/2)^{−ν}·J_ν(ζ)
//! ```
//!
//! with `ζ = 2c·|z|^p` solves the paraxial equation with unit Wronskian. Every
//! power of z in the series is an integer power, so both functions are real
//! on either half-line for any sign of `p`. For `n > 0`, `(G, H)` is the pair
//! launched from `z = 0`; for `n < −1`, `G → 1` and `H → z` as `|z| → ∞`, so it
//! is the pair launched from infinity.

use super::{ode_route, FundamentalPair};
use crate::error::{Error, Result};
use crate::fields::{FieldProfile, LensStrength};
use crate::specfun::SeriesControl;

fn kappa_n(ls: &LensStrength) -> Result<(f64, i32)> {
    ls.power_law_kappa()
        .ok_or(Error::ProfileType { expected: "power_law", found: ls.profile.kind() })
}

/// `(G, G′, H, H′)` at `z` by term-wise summation of the series.
pub fn powerlaw_basis(ls: &LensStrength, z: f64, ctl: SeriesControl) -> Result<[f64; 4]> {
    let (kappa, n) = kappa_n(ls)?;
    if n < 0 && z == 0.0 {
        return Err(Error::Singularity { z });
    }
    if !z.is_finite() {
        return Err(Error::Domain(format!("non-finite z = {z}")));
    }
    if kappa == 0.0 || (n > 0 && z == 0.0) {
        return Ok([1.0, 0.0, z, 1.0]);
    }
    let p = (n + 1) as f64;
    let x = -kappa * kappa * z.powi(2 * (n + 1));
    let (mut t, mut s) = (1.0f64, 1.0f64);
    let (mut g, mut zgp, mut hs, mut hp) = (1.0, 0.0, 1.0, 1.0);
    let (mut peak_g, mut peak_h) = (1.0f64, 1.0f64);
    for j in 1..ctl.max_terms {
        let m = 2.0 * j as f64 * p;
        t *= x / (m * (m - 1.0));
        s *= x / ((m + 1.0) * m);
        g += t;
        zgp += t * m;
        hs += s;
        hp += s * (m + 1.0);
        peak_g = peak_g.max((t * m).abs()).max(t.abs());
        peak_h = peak_h.max((s * (m + 1.0)).abs());
        let decreasing = x.abs() < (m * (m - 1.0)).abs();
        let small_g = (t * m).abs() <= ctl.rel_tol * peak_g;
        let small_h = (s * (m + 1.0)).abs() <= ctl.rel_tol * peak_h;
        if decreasing && small_g && small_h {
            let g_prime = zgp / z;
            return Ok([g, g_prime, z * hs, hp]);
        }
    }
    Err(Error::Convergence { terms: ctl.max_terms, last_term: t.abs().max(s.abs()) })
}

/// Pair from `zi` to `z` assembled from the series basis as `Φ(z)·Φ(zi)⁻¹`.
pub fn powerlaw_pair(ls: &LensStrength, zi: f64, z: f64) -> Result<FundamentalPair> {
    kappa_n(ls)?;
    ls.profile.check_interval(zi, z)?;
    let ctl = SeriesControl::default();
    let b = powerlaw_basis(ls, z, ctl)?;
    let bi = powerlaw_basis(ls, zi, ctl)?;
    let phi = [[b[0], b[2]], [b[1], b[3]]];
    // Φ(zi) has unit determinant.
    let inv = [[bi[3], -bi[2]], [-bi[1], bi[0]]];
    Ok(FundamentalPair::from_matrix(zi, z, super::mat2_mul(&phi, &inv)))
}

/// Pair from `zi = 0` for a positive-power field.
pub fn powerlaw_pair_pos(ls: &LensStrength, z: f64) -> Result<FundamentalPair> {
    let (_, n) = kappa_n(ls)?;
    if n <= 0 {
        return Err(Error::Domain(format!("positive-power pair needs n >= 1, got n = {n}")));
    }
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("positive-power pair is launched at 0; need z >= 0, got {z}")));
    }
    let [g, g_prime, h, h_prime] = powerlaw_basis(ls, z, SeriesControl::default())?;
    Ok(FundamentalPair { zi: 0.0, z, g, g_prime, h, h_prime })
}

/// Default finite launch plane standing in for `z = ∓∞` on the field's
/// half-line: `±1e4` characteristic lengths.
pub fn default_z_start(ls: &LensStrength) -> Result<f64> {
    match ls.profile {
        FieldProfile::PowerLaw { n, half_line, .. } if n < 0 => {
            let scale = ls.characteristic_length().unwrap_or(1.0);
            Ok(half_line.sign() * 1e4 * scale)
        }
        ref p => Err(Error::ProfileType { expected: "power_law (n < -1)", found: p.kind() }),
    }
}

/// Pair for a negative-power field launched at the far plane `z_start`,
/// obtained by integrating the paraxial equation.
pub fn powerlaw_pair_neg(ls: &LensStrength, z: f64, z_start: f64) -> Result<FundamentalPair> {
    let (_, n) = kappa_n(ls)?;
    if n >= -1 {
        return Err(Error::Domain(format!("negative-power pair needs n <= -2, got n = {n}")));
    }
    ls.profile.check_interval(z_start, z)?;
    ode_route::ode_pair(ls, z_start, z, ode_route::DEFAULT_ODE_REL_TOL)
}
