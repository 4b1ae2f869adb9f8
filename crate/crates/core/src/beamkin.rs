//! Beam kinematics: design momentum and the lens-strength prefactor.
//!
//! All momenta are carried as `p0·c` in eV. The single conversion from a
//! field in tesla to a lens strength in 1/mm lives in
//! [`BeamKinematics::strength_per_tesla`].

use crate::error::{Error, Result};

/// Electron rest energy `m·c²` in eV.
pub const ELECTRON_REST_ENERGY_EV: f64 = 510_998.95;
/// `ħ·c` in eV·nm.
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Millimetres per nanometre.
pub const MM_PER_NM: f64 = 1e-6;
/// Millimetres per metre.
pub const MM_PER_M: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamKinematics {
    /// `m·c²` in eV.
    pub rest_mass_energy: f64,
    /// Sign of the particle charge in units of `e` (−1 for electrons).
    pub charge_sign: f64,
    /// Kinetic energy in eV (equal to `e·U` on the nonrelativistic branch).
    pub kinetic_energy: f64,
    /// Design momentum as `p0·c` in eV.
    pub p0c: f64,
    /// `ħ·c` in eV·nm.
    pub hbar_c: f64,
    /// False when built with `p0² = 2·m·e·U`.
    pub relativistic: bool,
}

impl BeamKinematics {
    /// Relativistic kinematics from a kinetic energy `t` (eV).
    pub fn from_kinetic_energy(t: f64, rest_mass_energy: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("kinetic energy must be positive, got {t}")));
        }
        if !(rest_mass_energy > 0.0 && rest_mass_energy.is_finite()) {
            return Err(Error::Domain(format!(
                "rest mass energy must be positive, got {rest_mass_energy}"
            )));
        }
        // (mc² + T)² − (mc²)² = T·(T + 2mc²), written without the cancellation.
        let p0c = (t * (t + 2.0 * rest_mass_energy)).sqrt();
        Ok(Self {
            rest_mass_energy,
            charge_sign: -1.0,
            kinetic_energy: t,
            p0c,
            hbar_c: HBAR_C_EV_NM,
            relativistic: true,
        })
    }

    /// Nonrelativistic kinematics for a particle accelerated through `u` volts:
    /// `p0² = 2·m·e·U`.
    pub fn from_potential_nonrelativistic(u: f64, rest_mass_energy: f64) -> Result<Self> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::Domain(format!("accelerating voltage must be positive, got {u}")));
        }
        if !(rest_mass_energy > 0.0 && rest_mass_energy.is_finite()) {
            return Err(Error::Domain(format!(
                "rest mass energy must be positive, got {rest_mass_energy}"
            )));
        }
        Ok(Self {
            rest_mass_energy,
            charge_sign: -1.0,
            kinetic_energy: u,
            p0c: (2.0 * rest_mass_energy * u).sqrt(),
            hbar_c: HBAR_C_EV_NM,
            relativistic: false,
        })
    }

    /// Relativistic electron with kinetic energy `t` (eV).
    pub fn electron(t: f64) -> Result<Self> {
        Self::from_kinetic_energy(t, ELECTRON_REST_ENERGY_EV)
    }

    pub fn with_charge_sign(mut self, charge_sign: f64) -> Self {
        self.charge_sign = charge_sign;
        self
    }

    pub fn total_energy(&self) -> f64 {
        self.rest_mass_energy + self.kinetic_energy
    }

    /// `q/(2·p0)` in 1/(mm·T); multiply by a field in tesla to get `α` in 1/mm.
    pub fn strength_per_tesla(&self) -> f64 {
        // q·B/(2p0) = sign·e·B·c/(2·e·(p0c/e)) with p0c in volts, in 1/m.
        self.charge_sign * SPEED_OF_LIGHT / (2.0 * self.p0c) / MM_PER_M
    }

    /// `α = q·B/(2·p0)` in 1/mm for a field `b` in tesla.
    pub fn lens_strength(&self, b: f64) -> f64 {
        self.strength_per_tesla() * b
    }

    /// Field in tesla that produces lens strength `alpha` (1/mm).
    pub fn field_for_strength(&self, alpha: f64) -> f64 {
        alpha / self.strength_per_tesla()
    }

    /// `p0/ħ` in 1/mm.
    pub fn wavenumber(&self) -> f64 {
        self.p0c / (self.hbar_c * MM_PER_NM)
    }

    /// `λ = 2π·ħ/p0` in mm.
    pub fn de_broglie_wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavenumber()
    }
}
