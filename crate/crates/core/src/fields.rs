//! Axial field models `B(z)` and the lens strength `α(z) = q·B(z)/(2·p0)`.

use crate::beamkin::BeamKinematics;
use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Half of the axis on which a negative-power field is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfLine {
    Negative,
    Positive,
}

impl HalfLine {
    fn contains(self, z: f64) -> bool {
        match self {
            HalfLine::Negative => z < 0.0,
            HalfLine::Positive => z > 0.0,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            HalfLine::Negative => -1.0,
            HalfLine::Positive => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldProfile {
    /// Bell-shaped `B0/(1 + (z/a)²)`.
    Glaser { b0: f64, a: f64 },
    /// `B0·k_n·z^n`. `k_n` carries units of mm^−n; `half_line` is only
    /// consulted for negative `n`.
    PowerLaw {
        b0: f64,
        k_n: f64,
        n: i32,
        half_line: HalfLine,
    },
    Uniform { b0: f64 },
    Tabulated(CubicSpline),
}

impl FieldProfile {
    pub fn glaser(b0: f64, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !b0.is_finite() {
            return Err(Error::Domain(format!("Glaser half-width must be positive, got a = {a}")));
        }
        Ok(FieldProfile::Glaser { b0, a })
    }

    pub fn power_law(b0: f64, k_n: f64, n: i32, half_line: HalfLine) -> Result<Self> {
        if n == 0 || n == -1 {
            return Err(Error::Domain(format!(
                "power-law exponent n = {n} does not focus; use n > 0 or n < -1"
            )));
        }
        if !b0.is_finite() || !k_n.is_finite() {
            return Err(Error::Domain("power-law parameters must be finite".into()));
        }
        Ok(FieldProfile::PowerLaw { b0, k_n, n, half_line })
    }

    pub fn uniform(b0: f64) -> Result<Self> {
        if !b0.is_finite() {
            return Err(Error::Domain("uniform field must be finite".into()));
        }
        Ok(FieldProfile::Uniform { b0 })
    }

    /// Tabulated `(z, B)` samples interpolated by a natural cubic spline.
    pub fn tabulated(z: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Ok(FieldProfile::Tabulated(CubicSpline::natural(z, b)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FieldProfile::Glaser { .. } => "glaser",
            FieldProfile::PowerLaw { .. } => "power_law",
            FieldProfile::Uniform { .. } => "uniform",
            FieldProfile::Tabulated(_) => "tabulated",
        }
    }

    /// Closed domain of definition (open at 0 for negative powers).
    pub fn domain(&self) -> (f64, f64) {
        match self {
            FieldProfile::PowerLaw { n, half_line, .. } if *n < 0 => match half_line {
                HalfLine::Negative => (f64::NEG_INFINITY, 0.0),
                HalfLine::Positive => (0.0, f64::INFINITY),
            },
            FieldProfile::Tabulated(s) => s.domain(),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Peak field used as the `B0` reference.
    pub fn b0(&self) -> f64 {
        match self {
            FieldProfile::Glaser { b0, .. }
            | FieldProfile::PowerLaw { b0, .. }
            | FieldProfile::Uniform { b0 } => *b0,
            FieldProfile::Tabulated(s) => s
                .values()
                .iter()
                .copied()
                .fold(0.0, |acc: f64, v| if v.abs() > acc.abs() { v } else { acc }),
        }
    }

    /// Characteristic length of the profile, used for default scales.
    pub fn length_scale(&self) -> Option<f64> {
        match self {
            FieldProfile::Glaser { a, .. } => Some(*a),
            FieldProfile::Tabulated(s) => {
                let (lo, hi) = s.domain();
                Some(hi - lo)
            }
            _ => None,
        }
    }

    /// Checks that the closed interval between `z1` and `z2` lies in the domain
    /// and does not touch a singularity.
    pub fn check_interval(&self, z1: f64, z2: f64) -> Result<()> {
        let (lo, hi) = (z1.min(z2), z1.max(z2));
        match self {
            FieldProfile::PowerLaw { n, half_line, .. } if *n < 0 => {
                if lo <= 0.0 && hi >= 0.0 {
                    return Err(Error::Singularity { z: 0.0 });
                }
                if !half_line.contains(lo) || !half_line.contains(hi) {
                    let (min, max) = self.domain();
                    let z = if half_line.contains(lo) { hi } else { lo };
                    return Err(Error::OutOfRange { z, min, max });
                }
                Ok(())
            }
            FieldProfile::Tabulated(s) => {
                let (min, max) = s.domain();
                if lo < min {
                    return Err(Error::OutOfRange { z: lo, min, max });
                }
                if hi > max {
                    return Err(Error::OutOfRange { z: hi, min, max });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Knots strictly inside `(z1, z2)` where the interpolant's higher
    /// derivatives jump; empty for analytic profiles.
    pub fn breakpoints(&self, z1: f64, z2: f64) -> Vec<f64> {
        let (lo, hi) = (z1.min(z2), z1.max(z2));
        match self {
            FieldProfile::Tabulated(s) => {
                s.knots().iter().copied().filter(|&k| k > lo && k < hi).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `B, B′, B″, B‴` at `z`.
    pub fn derivatives(&self, z: f64) -> Result<[f64; 4]> {
        if !z.is_finite() {
            return Err(Error::Domain(format!("non-finite z = {z}")));
        }
        match self {
            FieldProfile::Glaser { b0, a } => {
                let u = z / a;
                let w = 1.0 / (1.0 + u * u);
                Ok([
                    b0 * w,
                    -2.0 * b0 * u * w * w / a,
                    b0 * (6.0 * u * u - 2.0) * w * w * w / (a * a),
                    24.0 * b0 * u * (1.0 - u * u) * w * w * w * w / (a * a * a),
                ])
            }
            FieldProfile::PowerLaw { b0, k_n, n, half_line } => {
                if *n < 0 {
                    if z == 0.0 {
                        return Err(Error::Singularity { z });
                    }
                    if !half_line.contains(z) {
                        let (min, max) = self.domain();
                        return Err(Error::OutOfRange { z, min, max });
                    }
                }
                let mut out = [0.0; 4];
                let mut coeff = b0 * k_n;
                for (m, slot) in out.iter_mut().enumerate() {
                    if coeff != 0.0 {
                        *slot = coeff * z.powi(n - m as i32);
                    }
                    coeff *= (n - m as i32) as f64;
                }
                Ok(out)
            }
            FieldProfile::Uniform { b0 } => Ok([*b0, 0.0, 0.0, 0.0]),
            FieldProfile::Tabulated(s) => s.eval(z),
        }
    }
}

/// Field value and its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub b: f64,
    pub db: f64,
    pub d2b: f64,
}

pub fn field_at(profile: &FieldProfile, z: f64) -> Result<FieldSample> {
    let [b, db, d2b, _] = profile.derivatives(z)?;
    Ok(FieldSample { b, db, d2b })
}

/// Lens strength `α(z) = q·B(z)/(2·p0)` for a field profile and beam.
#[derive(Clone, Debug, PartialEq)]
pub struct LensStrength {
    pub profile: FieldProfile,
    pub beam: BeamKinematics,
    /// `q·B0/(2·p0)` in 1/mm.
    pub alpha0: f64,
}

impl LensStrength {
    pub fn new(profile: FieldProfile, beam: BeamKinematics) -> Self {
        let alpha0 = beam.lens_strength(profile.b0());
        Self { profile, beam, alpha0 }
    }

    pub fn alpha(&self, z: f64) -> Result<f64> {
        Ok(self.beam.strength_per_tesla() * self.profile.derivatives(z)?[0])
    }

    /// `α, α′, α″, α‴` at `z`.
    pub fn alpha_all(&self, z: f64) -> Result<[f64; 4]> {
        let s = self.beam.strength_per_tesla();
        let d = self.profile.derivatives(z)?;
        Ok([s * d[0], s * d[1], s * d[2], s * d[3]])
    }

    /// `α` and its derivatives up to `order` (at most 3).
    pub fn alpha_derivs(&self, z: f64, order: usize) -> Result<Vec<f64>> {
        if order > 3 {
            return Err(Error::Unsupported(format!(
                "alpha derivatives of order {order}; at most 3 are available"
            )));
        }
        Ok(self.alpha_all(z)?[..=order].to_vec())
    }

    /// `|α0·k_n|` for power-law profiles, the coefficient in `α² = κ²·z^{2n}`.
    pub fn power_law_kappa(&self) -> Option<(f64, i32)> {
        match &self.profile {
            FieldProfile::PowerLaw { k_n, n, .. } => Some(((self.alpha0 * k_n).abs(), *n)),
            _ => None,
        }
    }

    /// Natural length for default scales: `a` for Glaser, `|α0·k_n|^{−1/(n+1)}`
    /// for power laws, `1/|α0|` for uniform fields.
    pub fn characteristic_length(&self) -> Option<f64> {
        match &self.profile {
            FieldProfile::PowerLaw { .. } => {
                let (kappa, n) = self.power_law_kappa()?;
                (kappa > 0.0).then(|| kappa.powf(-1.0 / (n as f64 + 1.0)))
            }
            FieldProfile::Uniform { .. } => (self.alpha0 != 0.0).then(|| 1.0 / self.alpha0.abs()),
            p => p.length_scale(),
        }
    }
}
