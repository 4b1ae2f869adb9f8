//! Closed-form fundamental solutions for the bell-shaped field.
//!
//! With `z = a·cot φ` (φ ∈ (0, π), decreasing in z) the paraxial equation
//! becomes a constant-coefficient equation in φ with frequency
//! `ω = sqrt(1 + α0²a²)`, and every solution is `sin(ω(φ − φ0))/sin φ` up to
//! scale.

use super::FundamentalPair;
use crate::error::{Error, Result};
use crate::fields::{FieldProfile, LensStrength};
use std::f64::consts::PI;

fn glaser_params(ls: &LensStrength) -> Result<(f64, f64)> {
    match ls.profile {
        FieldProfile::Glaser { a, .. } => Ok((a, (1.0 + (ls.alpha0 * a).powi(2)).sqrt())),
        ref p => Err(Error::ProfileType { expected: "glaser", found: p.kind() }),
    }
}

fn phi_of(z: f64, a: f64) -> f64 {
    a.atan2(z)
}

pub fn glaser_pair(ls: &LensStrength, zi: f64, z: f64) -> Result<FundamentalPair> {
    let (a, omega) = glaser_params(ls)?;
    if !(zi.is_finite() && z.is_finite()) {
        return Err(Error::Domain(format!("planes must be finite, got {zi}, {z}")));
    }
    let phi_i = phi_of(zi, a);
    let phi = phi_of(z, a);
    let (si, ci) = phi_i.sin_cos();
    let (s, c) = phi.sin_cos();
    let (sw, cw) = (omega * (phi - phi_i)).sin_cos();

    let n = omega * si * cw + ci * sw;
    let dn = -omega * omega * si * sw + omega * ci * cw;
    let g = n / (omega * s);
    let g_prime = -(dn * s - n * c) / (omega * a);
    let h = -a * sw / (omega * si * s);
    let h_prime = (omega * cw * s - sw * c) / (omega * si);
    Ok(FundamentalPair { zi, z, g, g_prime, h, h_prime })
}

/// Closed-form Larmor angle `α0·a·(atan(z/a) − atan(zi/a))`.
pub fn glaser_larmor_angle(ls: &LensStrength, zi: f64, z: f64) -> Result<f64> {
    let (a, _) = glaser_params(ls)?;
    Ok(ls.alpha0 * a * ((z / a).atan() - (zi / a).atan()))
}

/// Planes beyond `z_ob` where `h(·, z_ob)` vanishes: `φ = φ_ob − mπ/ω`,
/// `m = 1, 2, …` while `φ > 0`.
pub fn glaser_image_planes(ls: &LensStrength, z_ob: f64) -> Result<Vec<f64>> {
    let (a, omega) = glaser_params(ls)?;
    let phi_ob = phi_of(z_ob, a);
    let mut out = Vec::new();
    let mut m = 1.0;
    loop {
        let phi = phi_ob - m * PI / omega;
        if phi <= 0.0 {
            break;
        }
        out.push(a / phi.tan());
        m += 1.0;
    }
    Ok(out)
}
