//! The quadratic-phase propagator between two axial planes.
//!
//! With `s` the input coordinate rotated into the output frame,
//!
//! ```text
//! ψ(r) = k/(2πi·h) · exp(i·k·h′·r²/(2h)) · ∫ exp(i·k·(g·s² − 2·r·s)/(2h)) · ψ_in(Rᵀ·s) d²s
//! ```
//!
//! which is evaluated as rotate → chirp → scaled DFT, leaving the output
//! chirp in the stored curvature. When `h = 0` the kernel collapses to the
//! scaled replica `ψ(r) = exp(i·k·g′·r²/(2g)) · ψ_in(Rᵀ·r/g) / g`.

use super::transform::{fft2, rotate, Direction};
use super::{WaveField, MIN_PROPAGATION_SIZE};
use crate::error::{Error, Result};
use crate::fields::LensStrength;
use crate::paraxial::{FundamentalPair, PairSolver};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    General,
    ImagePlane,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationPlan {
    pub pair: FundamentalPair,
    pub theta: f64,
    pub zi: f64,
    pub z: f64,
    pub branch: Branch,
    pub h_threshold: f64,
}

impl PropagationPlan {
    /// Branch chosen by `|h| < h_threshold`.
    pub fn new(pair: FundamentalPair, theta: f64, h_threshold: f64) -> Result<Self> {
        if !(h_threshold >= 0.0) {
            return Err(Error::Domain(format!("h threshold must be non-negative, got {h_threshold}")));
        }
        let vals = [pair.g, pair.g_prime, pair.h, pair.h_prime, theta];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("plan entries must be finite".into()));
        }
        let branch = if pair.h.abs() < h_threshold { Branch::ImagePlane } else { Branch::General };
        Ok(Self { pair, theta, zi: pair.zi, z: pair.z, branch, h_threshold })
    }

    /// Plan through a lens from `zi` to `z`, with the default threshold for
    /// the grid of `psi`.
    pub fn through_lens(ls: &LensStrength, zi: f64, z: f64, psi: &WaveField) -> Result<Self> {
        let solver = PairSolver::new(ls, zi, (zi, z))?;
        Self::new(solver.pair_at(z)?, solver.larmor_angle(z)?, default_h_threshold(psi))
    }

    pub fn free_space(zi: f64, z: f64, psi: &WaveField) -> Result<Self> {
        Self::new(FundamentalPair::drift(zi, z), 0.0, default_h_threshold(psi))
    }
}

/// `N·d²/λ`: below this the single-step chirp of a unit-magnification
/// plan can no longer be sampled over the grid.
pub fn default_h_threshold(psi: &WaveField) -> f64 {
    (psi.nx as f64 * psi.dx * psi.dx).max(psi.ny as f64 * psi.dy * psi.dy) / psi.wavelength()
}

fn check_input(psi: &WaveField, plan: &PropagationPlan) -> Result<()> {
    psi.check_shape()?;
    if psi.nx < MIN_PROPAGATION_SIZE || psi.ny < MIN_PROPAGATION_SIZE {
        return Err(Error::Grid(format!(
            "propagation needs at least {MIN_PROPAGATION_SIZE}×{MIN_PROPAGATION_SIZE} samples, got {}×{}",
            psi.nx, psi.ny
        )));
    }
    if !psi.is_centered() {
        return Err(Error::Grid("propagation needs a grid centred on the axis".into()));
    }
    let scale = 1.0f64.max(plan.zi.abs()).max((plan.z - plan.zi).abs());
    if (psi.z - plan.zi).abs() > 1e-12 * scale {
        return Err(Error::Contract(format!("field is at z = {} but the plan starts at {}", psi.z, plan.zi)));
    }
    Ok(())
}

fn rotated_values(psi: &WaveField, theta: f64) -> Result<Vec<Complex64>> {
    let mut v = psi.values.clone();
    if theta != 0.0 {
        if psi.nx != psi.ny || psi.dx != psi.dy {
            return Err(Error::Grid("Larmor rotation needs a square grid with equal pitches".into()));
        }
        rotate(&mut v, psi.nx, psi.dx, theta);
    }
    Ok(v)
}

/// `(−1)^n` as a float.
fn alt(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// General-branch propagation. The quadratic phase `k·(g/h + c_in)·s²/2`
/// must advance by less than π per cell at the grid edge.
pub fn propagate(psi: &WaveField, plan: &PropagationPlan) -> Result<WaveField> {
    check_input(psi, plan)?;
    let FundamentalPair { g, h, h_prime, .. } = plan.pair;
    if plan.branch == Branch::ImagePlane || h == 0.0 {
        return Err(Error::ImagePlaneRequired { h });
    }
    let k = psi.wavenumber();
    let q = g / h + psi.curvature;
    let edge_step = (k * q * psi.nx as f64 * psi.dx * psi.dx / 2.0)
        .abs()
        .max((k * q * psi.ny as f64 * psi.dy * psi.dy / 2.0).abs());
    if !(edge_step < PI) {
        return Err(Error::Aliasing { factor: "input chirp k·(g/h + c)·s²/2", value: edge_step });
    }

    let (nx, ny) = (psi.nx, psi.ny);
    let mut v = rotated_values(psi, plan.theta)?;
    let (x0, y0) = (psi.x0, psi.y0);
    let (dx, dy) = (psi.dx, psi.dy);
    v.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        let y = y0 + iy as f64 * dy;
        for (ix, c) in row.iter_mut().enumerate() {
            let x = x0 + ix as f64 * dx;
            *c *= Complex64::from_polar(alt(ix + iy), 0.5 * k * q * (x * x + y * y));
        }
    });
    let dir = if h > 0.0 { Direction::Forward } else { Direction::Inverse };
    fft2(&mut v, nx, ny, dir);

    let out_dx = 2.0 * PI * h.abs() / (k * nx as f64 * dx);
    let out_dy = 2.0 * PI * h.abs() / (k * ny as f64 * dy);
    // k/(2πi·h)·dx·dy and the (−1)^{N/2} from centring both grids
    let pre = Complex64::new(0.0, -k / (2.0 * PI * h) * dx * dy) * alt(nx / 2 + ny / 2);
    v.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        for (ix, c) in row.iter_mut().enumerate() {
            *c *= pre * alt(ix + iy);
        }
    });

    Ok(WaveField {
        nx,
        ny,
        dx: out_dx,
        dy: out_dy,
        x0: -((nx / 2) as f64) * out_dx,
        y0: -((ny / 2) as f64) * out_dy,
        values: v,
        z: plan.z,
        p0c: psi.p0c,
        hbar_c: psi.hbar_c,
        curvature: h_prime / h,
        global_phase: psi.global_phase + k * (plan.z - plan.zi),
    })
}

/// Image-plane propagation. The output grid has pitch `|g|·d`, so the
/// replica is an exact permutation of the rotated samples.
pub fn propagate_to_image(psi: &WaveField, plan: &PropagationPlan) -> Result<WaveField> {
    check_input(psi, plan)?;
    let FundamentalPair { g, g_prime, h, .. } = plan.pair;
    if plan.branch != Branch::ImagePlane {
        return Err(Error::Contract(format!(
            "|h| = {:e} is not below the image-plane threshold {:e}",
            h.abs(),
            plan.h_threshold
        )));
    }
    if !(g.abs() >= 1e-6) {
        return Err(Error::DegenerateMagnification { g });
    }
    let (nx, ny) = (psi.nx, psi.ny);
    let v = rotated_values(psi, plan.theta)?;
    let scale = 1.0 / g;
    let mut out = vec![Complex64::default(); nx * ny];
    out.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        // output node r sits on input node r/g; for g < 0 that is the
        // mirrored index about the centre
        let sy = if g > 0.0 { iy } else { (ny - iy) % ny };
        for (ix, c) in row.iter_mut().enumerate() {
            let sx = if g > 0.0 { ix } else { (nx - ix) % nx };
            *c = v[sy * nx + sx] * scale;
        }
    });
    let (dx, dy) = (psi.dx * g.abs(), psi.dy * g.abs());
    Ok(WaveField {
        nx,
        ny,
        dx,
        dy,
        x0: -((nx / 2) as f64) * dx,
        y0: -((ny / 2) as f64) * dy,
        values: out,
        z: plan.z,
        p0c: psi.p0c,
        hbar_c: psi.hbar_c,
        curvature: g_prime / g + psi.curvature / (g * g),
        global_phase: psi.global_phase + psi.wavenumber() * (plan.z - plan.zi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamkin::BeamKinematics;
    use crate::fields::FieldProfile;
    use crate::paraxial::{find_image_plane, rotation, transfer_map, CentroidState};
    use crate::wavefield::{make_gaussian, moments, GridSpec};

    fn beam() -> BeamKinematics {
        BeamKinematics::electron(200_000.0).unwrap()
    }

    fn source(n: usize, dx: f64, center: (f64, f64), tilt: (f64, f64)) -> WaveField {
        let g = GridSpec::square(n, dx, 0.0).unwrap();
        make_gaussian(&g, &beam(), center, 8.0 * dx, tilt).unwrap()
    }

    /// Gaussian transported by a pair: `σ² → g²σ² + h²/(4k²σ²)`.
    fn abcd_sigma2(g: f64, h: f64, sigma: f64, k: f64) -> f64 {
        g * g * sigma * sigma + h * h / (4.0 * k * k * sigma * sigma)
    }

    #[test]
    fn free_space_spreading() {
        let dx = 1e-6;
        let psi = source(256, dx, (0.0, 0.0), (0.0, 0.0));
        let k = psi.wavenumber();
        let s0 = 8.0 * dx;
        for q in [0.5, 1.0, 2.0] {
            let dz = 4.0 * PI * s0 * s0 * q / psi.wavelength();
            let plan = PropagationPlan::free_space(0.0, dz, &psi).unwrap();
            let out = propagate(&psi, &plan).unwrap();
            let m = moments(&out).unwrap();
            let expected = abcd_sigma2(1.0, dz, s0, k);
            assert!((m.covariance[0][0] / expected - 1.0).abs() < 1e-6, "q = {q}");
            assert!((out.norm() - 1.0).abs() < 1e-12);
            assert!((out.global_phase - k * dz).abs() < 1e-6 * k * dz);
        }
    }

    #[test]
    fn too_short_a_drift_aliases_or_redirects() {
        let psi = source(64, 1e-6, (0.0, 0.0), (0.0, 0.0));
        let thr = default_h_threshold(&psi);
        let plan = PropagationPlan::free_space(0.0, 0.5 * thr, &psi).unwrap();
        assert_eq!(plan.branch, Branch::ImagePlane);
        assert!(matches!(propagate(&psi, &plan), Err(Error::ImagePlaneRequired { .. })));
        let pair = FundamentalPair::drift(0.0, 2.0 * thr);
        let plan = PropagationPlan::new(pair, 0.0, 0.0).unwrap();
        let mut curved = psi.clone();
        curved.curvature = 10.0 / thr;
        assert!(matches!(propagate(&curved, &plan), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn rejects_small_and_offset_grids() {
        let g = GridSpec::square(32, 1e-6, 0.0).unwrap();
        let psi = make_gaussian(&g, &beam(), (0.0, 0.0), 4e-6, (0.0, 0.0)).unwrap();
        let plan = PropagationPlan::free_space(0.0, 1.0, &psi).unwrap();
        assert!(matches!(propagate(&psi, &plan), Err(Error::Grid(_))));
        let mut psi = source(64, 1e-6, (0.0, 0.0), (0.0, 0.0));
        psi.x0 += 1e-6;
        assert!(matches!(propagate(&psi, &plan), Err(Error::Grid(_))));
        psi.x0 -= 1e-6;
        let plan = PropagationPlan::free_space(0.5, 1.0, &psi).unwrap();
        assert!(matches!(propagate(&psi, &plan), Err(Error::Contract(_))));
    }

    #[test]
    fn identity_image_plan() {
        let psi = source(64, 1e-6, (5e-6, -2e-6), (1e-5, 0.0));
        let plan = PropagationPlan::new(FundamentalPair::identity(0.0), 0.0, 1.0).unwrap();
        let out = propagate_to_image(&psi, &plan).unwrap();
        assert_eq!(out.values, psi.values);
        assert_eq!(out.dx, psi.dx);
        let bad = PropagationPlan::new(
            FundamentalPair { zi: 0.0, z: 0.0, g: 1e-8, g_prime: 0.0, h: 0.0, h_prime: 1e8 },
            0.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(propagate_to_image(&psi, &bad), Err(Error::DegenerateMagnification { .. })));
    }

    fn glaser() -> LensStrength {
        let b = beam();
        LensStrength::new(FieldProfile::glaser(b.field_for_strength(3f64.sqrt()), 1.0).unwrap(), b)
    }

    #[test]
    fn glaser_step_follows_transfer_map() {
        let ls = glaser();
        let (zi, z) = (-5.0, 2.0);
        let solver = PairSolver::new(&ls, zi, (zi, z)).unwrap();
        let pair = solver.pair_at(z).unwrap();
        let n = 128;
        let dx = 0.5 * (ls.beam.de_broglie_wavelength() * pair.h.abs() / (pair.g.abs() * n as f64)).sqrt();
        let (c, t) = ((6.0 * dx, -3.0 * dx), (1.5e-5, 0.7e-5));
        let mut psi = source(n, dx, c, t);
        psi.z = zi;
        let plan = PropagationPlan::through_lens(&ls, zi, z, &psi).unwrap();
        let out = propagate(&psi, &plan).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10);
        let m = moments(&out).unwrap();
        let tm = transfer_map(plan.pair, plan.theta);
        let want = tm.apply(&CentroidState::new(c.0, c.1, t.0, t.1));
        assert!((m.centroid[0] - want.x).abs() < 1e-3 * out.dx);
        assert!((m.centroid[1] - want.y).abs() < 1e-3 * out.dx);
        assert!((m.momentum_centroid[0] - want.px_over_p0).abs() < 1e-9);
        assert!((m.momentum_centroid[1] - want.py_over_p0).abs() < 1e-9);
        let s2 = abcd_sigma2(pair.g, pair.h, 8.0 * dx, psi.wavenumber());
        assert!((m.covariance[0][0] / s2 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn image_plane_replica() {
        let ls = glaser();
        let zi = -5.0;
        let z = find_image_plane(&ls, zi, (zi, 5.0), 1e-13).unwrap();
        let mut psi = source(128, 2e-6, (10e-6, 4e-6), (0.0, 0.0));
        psi.z = zi;
        let plan = PropagationPlan::through_lens(&ls, zi, z, &psi).unwrap();
        assert_eq!(plan.branch, Branch::ImagePlane);
        let out = propagate_to_image(&psi, &plan).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
        // the centroid lands on M·R·c with M = −g
        let m = moments(&out).unwrap();
        let r = rotation(plan.theta);
        let g = plan.pair.g;
        let want = [g * (r[0][0] * 10e-6 + r[0][1] * 4e-6), g * (r[1][0] * 10e-6 + r[1][1] * 4e-6)];
        assert!((m.centroid[0] - want[0]).abs() < 1e-6 * out.dx);
        assert!((m.centroid[1] - want[1]).abs() < 1e-6 * out.dx);
    }
}
