//! Reference route: adaptive integration of `(g, g′, h, h′)′ = (g′, −α²g, h′, −α²h)`.

use super::FundamentalPair;
use crate::error::{Error, Result};
use crate::fields::LensStrength;
use crate::ode::{OdeOptions, Stepper};

pub const DEFAULT_ODE_REL_TOL: f64 = 1e-10;

pub(crate) fn rhs(ls: &LensStrength) -> impl FnMut(f64, &[f64; 4]) -> Result<[f64; 4]> + '_ {
    move |t, y| {
        let a = ls.alpha(t)?;
        let a2 = a * a;
        Ok([y[1], -a2 * y[0], y[3], -a2 * y[2]])
    }
}

pub(crate) fn options(rel_tol: f64, length: f64) -> Result<OdeOptions<4>> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::Domain(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let l = if length > 0.0 && length.is_finite() { length } else { 1.0 };
    let abs = 1e-13;
    Ok(OdeOptions::new(rel_tol, [abs, abs / l, abs * l, abs]))
}

/// Integrates the pair from `zi` through every target (each side of `zi`
/// handled separately) and returns them in the input order.
pub fn ode_pairs_at(
    ls: &LensStrength,
    zi: f64,
    zs: &[f64],
    rel_tol: f64,
) -> Result<Vec<FundamentalPair>> {
    if zs.is_empty() {
        return Ok(Vec::new());
    }
    let lo = zs.iter().copied().fold(zi, f64::min);
    let hi = zs.iter().copied().fold(zi, f64::max);
    ls.profile.check_interval(lo, hi)?;
    let opts = options(rel_tol, hi - lo)?;
    let mut out = vec![FundamentalPair::identity(zi); zs.len()];
    for forward in [true, false] {
        let mut idx: Vec<usize> = (0..zs.len())
            .filter(|&i| if forward { zs[i] > zi } else { zs[i] < zi })
            .collect();
        if forward {
            idx.sort_by(|&a, &b| zs[a].partial_cmp(&zs[b]).unwrap());
        } else {
            idx.sort_by(|&a, &b| zs[b].partial_cmp(&zs[a]).unwrap());
        }
        if idx.is_empty() {
            continue;
        }
        let end = zs[*idx.last().unwrap()];
        // Interpolation knots act as extra stops so no step straddles one.
        let mut knots = ls.profile.breakpoints(zi, end);
        if !forward {
            knots.reverse();
        }
        let mut f = rhs(ls);
        let mut s = Stepper::new(zi, [1.0, 0.0, 0.0, 1.0]);
        let mut k = 0;
        for &i in &idx {
            let target = zs[i];
            while k < knots.len() && (knots[k] - target) * (end - zi).signum() < 0.0 {
                s.advance(&mut f, knots[k], &opts)?;
                k += 1;
            }
            s.advance(&mut f, target, &opts)?;
            out[i] = FundamentalPair {
                zi,
                z: target,
                g: s.y[0],
                g_prime: s.y[1],
                h: s.y[2],
                h_prime: s.y[3],
            };
        }
    }
    Ok(out)
}

pub fn ode_pair(ls: &LensStrength, zi: f64, z: f64, rel_tol: f64) -> Result<FundamentalPair> {
    if zi == z {
        return Ok(FundamentalPair::identity(zi));
    }
    Ok(ode_pairs_at(ls, zi, &[z], rel_tol)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamkin::BeamKinematics;
    use crate::fields::FieldProfile;

    fn beam() -> BeamKinematics {
        BeamKinematics::electron(200_000.0).unwrap()
    }

    #[test]
    fn free_space_is_exact() {
        let ls = LensStrength::new(FieldProfile::uniform(0.0).unwrap(), beam());
        let p = ode_pair(&ls, -2.0, 3.5, 1e-10).unwrap();
        assert!((p.g - 1.0).abs() < 1e-12 && p.g_prime.abs() < 1e-12);
        assert!((p.h - 5.5).abs() < 1e-12 && (p.h_prime - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_field_cosine() {
        let b = beam();
        let ls = LensStrength::new(FieldProfile::uniform(b.field_for_strength(0.8)).unwrap(), b);
        for &dz in &[0.5, 2.0, 7.0, -3.0] {
            let p = ode_pair(&ls, 1.0, 1.0 + dz, 1e-10).unwrap();
            let w = 0.8 * dz;
            assert!((p.g - w.cos()).abs() < 1e-8);
            assert!((p.h - w.sin() / 0.8).abs() < 1e-8);
            assert!((p.wronskian() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn targets_on_both_sides_keep_order() {
        let b = beam();
        let ls = LensStrength::new(FieldProfile::glaser(b.field_for_strength(1.5), 1.0).unwrap(), b);
        let zs = [2.0, -1.0, 0.5, -3.0, 0.0];
        let all = ode_pairs_at(&ls, 0.0, &zs, 1e-11).unwrap();
        for (z, p) in zs.iter().zip(&all) {
            assert_eq!(p.z, *z);
            let single = ode_pair(&ls, 0.0, *z, 1e-11).unwrap();
            assert!((single.g - p.g).abs() < 1e-9 && (single.h - p.h).abs() < 1e-9);
            let exact = super::super::glaser_pair(&ls, 0.0, *z).unwrap();
            assert!((exact.g - p.g).abs() < 1e-9 && (exact.h - p.h).abs() < 1e-9);
        }
    }

    #[test]
    fn tabulated_field_stops_at_knots() {
        let b = beam();
        let zs: Vec<f64> = (0..81).map(|i| -4.0 + 0.1 * i as f64).collect();
        let bs: Vec<f64> = zs.iter().map(|z| b.field_for_strength(1.0) / (1.0 + z * z)).collect();
        let ls = LensStrength::new(FieldProfile::tabulated(zs, bs).unwrap(), b);
        let p = ode_pair(&ls, -4.0, 4.0, 1e-10).unwrap();
        assert!((p.wronskian() - 1.0).abs() < 1e-9);
        assert!(matches!(ode_pair(&ls, -4.0, 5.0, 1e-10), Err(Error::OutOfRange { .. })));
    }
}
