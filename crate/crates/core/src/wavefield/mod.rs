//! Transverse wavefunctions on uniform grids and their exact paraxial
//! propagation.
//!
//! A [`WaveField`] stores samples `values` on a grid centred on the optic
//! axis together with a radial phase curvature `c`; the physical amplitude
//! is `values · exp(i·k·c·r²/2)`. Keeping the quadratic phase out of the
//! samples keeps them smooth after a propagation step. The global phase
//! `exp(i·k·Δz)` is tracked as a scalar.

mod io;
mod propagate;
pub(crate) mod transform;

pub use io::{read_binary, read_binary_file, write_binary, write_binary_file, write_intensity_csv};
pub use propagate::{default_h_threshold, propagate, propagate_to_image, Branch, PropagationPlan};

use crate::beamkin::BeamKinematics;
use crate::error::{Error, Result};
use num_complex::Complex64;
use transform::{fft2, frequency, Direction};

/// Smallest grid accepted by the propagators.
pub const MIN_PROPAGATION_SIZE: usize = 64;

/// A grid centred on the axis at plane `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub z: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, z: f64) -> Result<Self> {
        let g = Self { nx, ny, dx, dy, z };
        g.validate()?;
        Ok(g)
    }

    pub fn square(n: usize, d: f64, z: f64) -> Result<Self> {
        Self::new(n, n, d, d, z)
    }

    fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny)] {
            if n < 2 || !n.is_power_of_two() {
                return Err(Error::Grid(format!("{name} = {n} must be a power of two ≥ 2")));
            }
        }
        for (name, d) in [("dx", self.dx), ("dy", self.dy)] {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Grid(format!("{name} = {d} must be positive")));
            }
        }
        if !self.z.is_finite() {
            return Err(Error::Grid("z must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveField {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Coordinate of column 0.
    pub x0: f64,
    /// Coordinate of row 0.
    pub y0: f64,
    /// Row-major samples, index `iy·nx + ix`.
    pub values: Vec<Complex64>,
    pub z: f64,
    pub p0c: f64,
    pub hbar_c: f64,
    /// Radial phase curvature `c` in 1/mm.
    pub curvature: f64,
    /// Accumulated `k·Δz` in radians.
    pub global_phase: f64,
}

impl WaveField {
    /// Zero field on a centred grid.
    pub fn zeros(grid: &GridSpec, beam: &BeamKinematics) -> Result<Self> {
        grid.validate()?;
        Ok(Self {
            nx: grid.nx,
            ny: grid.ny,
            dx: grid.dx,
            dy: grid.dy,
            x0: -((grid.nx / 2) as f64) * grid.dx,
            y0: -((grid.ny / 2) as f64) * grid.dy,
            values: vec![Complex64::default(); grid.nx * grid.ny],
            z: grid.z,
            p0c: beam.p0c,
            hbar_c: beam.hbar_c,
            curvature: 0.0,
            global_phase: 0.0,
        })
    }

    /// Wavenumber `p0/ħ` in 1/mm.
    pub fn wavenumber(&self) -> f64 {
        self.p0c / (self.hbar_c * crate::beamkin::MM_PER_NM)
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavenumber()
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + ix as f64 * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y0 + iy as f64 * self.dy
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec { nx: self.nx, ny: self.ny, dx: self.dx, dy: self.dy, z: self.z }
    }

    pub fn is_centered(&self) -> bool {
        let cx = -((self.nx / 2) as f64) * self.dx;
        let cy = -((self.ny / 2) as f64) * self.dy;
        (self.x0 - cx).abs() <= 1e-12 * cx.abs() && (self.y0 - cy).abs() <= 1e-12 * cy.abs()
    }

    /// `Σ|ψ|²·dx·dy`.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx * self.dy
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Physical amplitude at a grid node, curvature included and global
    /// phase excluded.
    pub fn amplitude(&self, ix: usize, iy: usize) -> Complex64 {
        let (x, y) = (self.x(ix), self.y(iy));
        let phase = 0.5 * self.wavenumber() * self.curvature * (x * x + y * y);
        self.values[iy * self.nx + ix] * Complex64::from_polar(1.0, phase)
    }

    /// Multiplies the curvature phase into the samples.
    pub fn bake_curvature(&mut self) {
        if self.curvature == 0.0 {
            return;
        }
        let mut out = Vec::with_capacity(self.values.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(self.amplitude(ix, iy));
            }
        }
        self.values = out;
        self.curvature = 0.0;
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        if self.values.len() != self.nx * self.ny {
            return Err(Error::Grid(format!(
                "{} samples for a {}×{} grid",
                self.values.len(),
                self.nx,
                self.ny
            )));
        }
        self.grid().validate()
    }
}

/// Normalized Gaussian `∝ exp(−|r − c|²/(4σ²))·exp(i·k·t·r)`, so that `|ψ|²`
/// has standard deviation `sigma` along each axis and the momentum centroid
/// is `tilt·p0`.
pub fn make_gaussian(
    grid: &GridSpec,
    beam: &BeamKinematics,
    center: (f64, f64),
    sigma: f64,
    tilt: (f64, f64),
) -> Result<WaveField> {
    let mut psi = WaveField::zeros(grid, beam)?;
    let pitch = grid.dx.max(grid.dy);
    if !(sigma >= 4.0 * pitch) || !sigma.is_finite() {
        return Err(Error::Grid(format!("sigma = {sigma} is below 4 grid pitches ({})", 4.0 * pitch)));
    }
    if ![center.0, center.1, tilt.0, tilt.1].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("centre and tilt must be finite".into()));
    }
    let k = psi.wavenumber();
    for iy in 0..psi.ny {
        let y = psi.y(iy);
        for ix in 0..psi.nx {
            let x = psi.x(ix);
            let r2 = (x - center.0).powi(2) + (y - center.1).powi(2);
            let amp = (-r2 / (4.0 * sigma * sigma)).exp();
            psi.values[iy * psi.nx + ix] = Complex64::from_polar(amp, k * (tilt.0 * x + tilt.1 * y));
        }
    }
    let scale = psi.norm().sqrt();
    if !(scale > 0.0) {
        return Err(Error::Grid("Gaussian lies entirely outside the grid".into()));
    }
    psi.values.iter_mut().for_each(|v| *v /= scale);
    Ok(psi)
}

/// First, second and third moments of a normalized field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub centroid: [f64; 2],
    /// `⟨p⟩/p0`.
    pub momentum_centroid: [f64; 2],
    /// Central second moments of position.
    pub covariance: [[f64; 2]; 2],
    /// `⟨(x − ⟨x⟩)³⟩`.
    pub third_central_x: f64,
    /// `Σ|ψ̂|²` with the transform scaled to be unitary; equals `norm`.
    pub spectral_norm: f64,
}

/// Position moments by grid sums; the momentum centroid by spectral
/// expectation of the samples plus the stored curvature term `c·⟨r⟩`.
pub fn moments(psi: &WaveField) -> Result<Moments> {
    psi.check_shape()?;
    let norm = psi.norm();
    if !((norm - 1.0).abs() < 1e-6) {
        return Err(Error::Contract(format!("field is not normalized (norm = {norm})")));
    }
    let w = psi.dx * psi.dy;
    let (mut mx, mut my) = (0.0, 0.0);
    for iy in 0..psi.ny {
        for ix in 0..psi.nx {
            let p = psi.values[iy * psi.nx + ix].norm_sqr() * w;
            mx += p * psi.x(ix);
            my += p * psi.y(iy);
        }
    }
    mx /= norm;
    my /= norm;
    let (mut sxx, mut sxy, mut syy, mut t3) = (0.0, 0.0, 0.0, 0.0);
    for iy in 0..psi.ny {
        let dy = psi.y(iy) - my;
        for ix in 0..psi.nx {
            let p = psi.values[iy * psi.nx + ix].norm_sqr() * w;
            let dx = psi.x(ix) - mx;
            sxx += p * dx * dx;
            sxy += p * dx * dy;
            syy += p * dy * dy;
            t3 += p * dx * dx * dx;
        }
    }

    let mut spec = psi.values.clone();
    fft2(&mut spec, psi.nx, psi.ny, Direction::Forward);
    let (mut total, mut kx, mut ky) = (0.0, 0.0, 0.0);
    for iy in 0..psi.ny {
        let fy = frequency(iy, psi.ny, psi.dy);
        for ix in 0..psi.nx {
            let fx = frequency(ix, psi.nx, psi.dx);
            let p = spec[iy * psi.nx + ix].norm_sqr();
            total += p;
            kx += p * fx;
            ky += p * fy;
        }
    }
    let k = psi.wavenumber();
    Ok(Moments {
        norm,
        centroid: [mx, my],
        momentum_centroid: [kx / total / k + psi.curvature * mx, ky / total / k + psi.curvature * my],
        covariance: [[sxx / norm, sxy / norm], [sxy / norm, syy / norm]],
        third_central_x: t3 / norm,
        spectral_norm: total * w / (psi.nx * psi.ny) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beam() -> BeamKinematics {
        BeamKinematics::electron(200_000.0).unwrap()
    }

    fn grid(n: usize) -> GridSpec {
        GridSpec::square(n, 1e-6, 0.0).unwrap()
    }

    #[test]
    fn gaussian_is_normalized_and_centred() {
        let g = grid(128);
        let psi = make_gaussian(&g, &beam(), (3.3e-6, -7.1e-6), 8e-6, (0.0, 0.0)).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let m = moments(&psi).unwrap();
        assert!((m.centroid[0] - 3.3e-6).abs() < g.dx / 10.0);
        assert!((m.centroid[1] + 7.1e-6).abs() < g.dx / 10.0);
        assert!((m.covariance[0][0] / 64e-12 - 1.0).abs() < 1e-10);
        assert!(m.covariance[0][1].abs() < 1e-24);
    }

    #[test]
    fn tilted_gaussian_momentum() {
        let b = beam();
        let psi = make_gaussian(&grid(128), &b, (0.0, 0.0), 8e-6, (2e-5, -3e-5)).unwrap();
        let m = moments(&psi).unwrap();
        // The Fourier transform of a tilted Gaussian is a Gaussian centred
        // on k·tilt.
        assert!((m.momentum_centroid[0] / 2e-5 - 1.0).abs() < 1e-6);
        assert!((m.momentum_centroid[1] / -3e-5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn symmetric_gaussian_has_no_skew_and_parseval_holds() {
        let sigma: f64 = 8e-6;
        let psi = make_gaussian(&grid(128), &beam(), (0.0, 0.0), sigma, (1e-5, 0.0)).unwrap();
        let m = moments(&psi).unwrap();
        assert!(m.third_central_x.abs() < 1e-10 * sigma.powi(3));
        assert!((m.spectral_norm - m.norm).abs() < 1e-10);
    }

    #[test]
    fn curvature_enters_momentum_centroid() {
        let b = beam();
        let mut psi = make_gaussian(&grid(128), &b, (5e-6, 0.0), 8e-6, (0.0, 0.0)).unwrap();
        psi.curvature = 0.3;
        let m = moments(&psi).unwrap();
        assert!((m.momentum_centroid[0] - 0.3 * m.centroid[0]).abs() < 1e-12);
        // baking the phase into the samples leaves the observable unchanged
        let mut baked = psi.clone();
        baked.bake_curvature();
        let mb = moments(&baked).unwrap();
        assert!((mb.momentum_centroid[0] - m.momentum_centroid[0]).abs() < 1e-9 * m.momentum_centroid[0].abs());
    }

    #[test]
    fn guards() {
        let b = beam();
        assert!(matches!(GridSpec::square(100, 1.0, 0.0), Err(Error::Grid(_))));
        assert!(matches!(GridSpec::square(64, 0.0, 0.0), Err(Error::Grid(_))));
        assert!(matches!(
            make_gaussian(&grid(64), &b, (0.0, 0.0), 3e-6, (0.0, 0.0)),
            Err(Error::Grid(_))
        ));
        let mut psi = make_gaussian(&grid(64), &b, (0.0, 0.0), 4e-6, (0.0, 0.0)).unwrap();
        psi.values[0] += Complex64::new(1e3, 0.0);
        assert!(matches!(moments(&psi), Err(Error::Contract(_))));
    }
}
