//! Run configuration: JSON with unknown fields rejected, validated into
//! library types. Every rejection names the offending field path.

use crate::error::CliError;
use lenscope::beamkin::ELECTRON_REST_ENERGY_EV;
use lenscope::{BeamKinematics, FieldProfile, HalfLine, LensStrength};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub beam: BeamConfig,
    pub field: FieldConfig,
    pub task: TaskConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub kinetic_energy_ev: Option<f64>,
    /// Accelerating voltage for the nonrelativistic branch.
    pub voltage_v: Option<f64>,
    #[serde(default)]
    pub particle: Particle,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum Particle {
    #[default]
    Electron,
    Positron,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldConfig {
    Glaser {
        b0_tesla: Option<f64>,
        alpha0_per_mm: Option<f64>,
        a_mm: f64,
    },
    PowerLaw {
        b0_tesla: Option<f64>,
        alpha0_per_mm: Option<f64>,
        k_n: f64,
        n: i32,
        half_line: HalfLineConfig,
    },
    Uniform {
        b0_tesla: Option<f64>,
        alpha0_per_mm: Option<f64>,
    },
    Tabulated {
        /// Two-column CSV `z,B` with a header row, relative to the config file.
        path: PathBuf,
        #[serde(default)]
        z_unit: LengthUnit,
        #[serde(default)]
        b_unit: FieldUnit,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum HalfLineConfig {
    Negative,
    Positive,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
pub enum LengthUnit {
    #[default]
    #[serde(rename = "mm")]
    Millimetre,
    #[serde(rename = "cm")]
    Centimetre,
    #[serde(rename = "m")]
    Metre,
}

impl LengthUnit {
    pub fn to_mm(self) -> f64 {
        match self {
            LengthUnit::Millimetre => 1.0,
            LengthUnit::Centimetre => 10.0,
            LengthUnit::Metre => 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
pub enum FieldUnit {
    #[default]
    #[serde(rename = "T")]
    Tesla,
    #[serde(rename = "mT")]
    Millitesla,
    #[serde(rename = "G")]
    Gauss,
}

impl FieldUnit {
    pub fn to_tesla(self) -> f64 {
        match self {
            FieldUnit::Tesla => 1.0,
            FieldUnit::Millitesla => 1e-3,
            FieldUnit::Gauss => 1e-4,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    Trace(TraceTask),
    Cardinal(CardinalTask),
    Aberrations(AberrationsTask),
    Propagate(PropagateTask),
    Crosscheck(CrosscheckTask),
}

impl TaskConfig {
    pub fn name(&self) -> &'static str {
        match self {
            TaskConfig::Trace(_) => "trace",
            TaskConfig::Cardinal(_) => "cardinal",
            TaskConfig::Aberrations(_) => "aberrations",
            TaskConfig::Propagate(_) => "propagate",
            TaskConfig::Crosscheck(_) => "crosscheck",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    #[serde(default)]
    pub x_mm: f64,
    #[serde(default)]
    pub y_mm: f64,
    #[serde(default)]
    pub px_over_p0: f64,
    #[serde(default)]
    pub py_over_p0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceTask {
    pub z_start: f64,
    pub z_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub initial: StateConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CardinalTask {
    pub z_ob: f64,
    /// Interval searched for the first image plane.
    pub search: [f64; 2],
    #[serde(default = "default_samples")]
    pub scan_samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AberrationsTask {
    pub z_ob: f64,
    pub search: Option<[f64; 2]>,
    pub z_im: Option<f64>,
    #[serde(default = "default_samples")]
    pub integrand_samples: usize,
    /// Object-plane state for which the displacement is reported.
    pub state: Option<StateConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateTask {
    pub z_start: f64,
    pub z_end: f64,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Input pitch; chosen from the plan when omitted.
    pub dx_mm: Option<f64>,
    #[serde(default)]
    pub source: SourceConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    /// Standard deviation of |ψ|² in grid cells.
    #[serde(default = "default_sigma_cells")]
    pub sigma_cells: f64,
    /// Centre in units of sigma.
    #[serde(default)]
    pub offset_sigmas: [f64; 2],
    /// Transverse momentum over p0.
    #[serde(default)]
    pub tilt: [f64; 2],
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self { sigma_cells: default_sigma_cells(), offset_sigmas: [0.0; 2], tilt: [0.0; 2] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosscheckTask {
    pub z_start: f64,
    pub z_end: f64,
    #[serde(default = "default_planes")]
    pub planes: usize,
    /// Extra planes drawn uniformly at random with the run seed.
    #[serde(default)]
    pub random_planes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    /// Agreement tolerance for route comparisons.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_ode_rel_tol")]
    pub ode_rel_tol: f64,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    #[serde(default = "default_pb_order")]
    pub peano_baker_order: usize,
    #[serde(default = "default_pb_steps")]
    pub peano_baker_steps: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            ode_rel_tol: default_ode_rel_tol(),
            quad_tol: default_quad_tol(),
            root_tol: default_root_tol(),
            peano_baker_order: default_pb_order(),
            peano_baker_steps: default_pb_steps(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out_dir(), formats: default_formats() }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Binary,
}

fn default_samples() -> usize {
    401
}
fn default_grid_n() -> usize {
    256
}
fn default_sigma_cells() -> f64 {
    8.0
}
fn default_planes() -> usize {
    200
}
fn default_tol() -> f64 {
    1e-6
}
fn default_ode_rel_tol() -> f64 {
    1e-12
}
fn default_quad_tol() -> f64 {
    1e-10
}
fn default_root_tol() -> f64 {
    1e-13
}
fn default_pb_order() -> usize {
    6
}
fn default_pb_steps() -> usize {
    16
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("lenscope-out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Binary]
}

/// Parses config text, reporting the JSON path of the first problem.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config { path, message: e.into_inner().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn bad(path: &str, message: impl Into<String>) -> CliError {
    CliError::Config { path: path.to_string(), message: message.into() }
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(path, format!("must be positive and finite, got {v}")))
    }
}

fn finite(path: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(path, "must be finite"))
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        let n = &self.numerics;
        positive("numerics.tol", n.tol)?;
        positive("numerics.ode_rel_tol", n.ode_rel_tol)?;
        positive("numerics.quad_tol", n.quad_tol)?;
        positive("numerics.root_tol", n.root_tol)?;
        if n.peano_baker_order == 0 {
            return Err(bad("numerics.peano_baker_order", "must be at least 1"));
        }
        if n.peano_baker_steps < 3 {
            return Err(bad("numerics.peano_baker_steps", "must be at least 3"));
        }
        match (&self.beam.kinetic_energy_ev, &self.beam.voltage_v) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(bad("beam", "give exactly one of kinetic_energy_ev and voltage_v"))
            }
            _ => {}
        }
        let t = &self.task;
        match t {
            TaskConfig::Trace(c) => {
                finite("task.trace.z_start", c.z_start)?;
                finite("task.trace.z_end", c.z_end)?;
                if c.samples < 2 {
                    return Err(bad("task.trace.samples", "must be at least 2"));
                }
                let s = c.initial;
                for (p, v) in [("x_mm", s.x_mm), ("y_mm", s.y_mm), ("px_over_p0", s.px_over_p0), ("py_over_p0", s.py_over_p0)] {
                    finite(&format!("task.trace.initial.{p}"), v)?;
                }
            }
            TaskConfig::Cardinal(c) => {
                finite("task.cardinal.z_ob", c.z_ob)?;
                if !(c.search[1] > c.search[0]) {
                    return Err(bad("task.cardinal.search", "upper bound must exceed lower bound"));
                }
                if c.scan_samples < 2 {
                    return Err(bad("task.cardinal.scan_samples", "must be at least 2"));
                }
            }
            TaskConfig::Aberrations(c) => {
                finite("task.aberrations.z_ob", c.z_ob)?;
                match (&c.search, &c.z_im) {
                    (Some(_), Some(_)) | (None, None) => {
                        return Err(bad("task.aberrations", "give exactly one of search and z_im"))
                    }
                    (Some(s), None) if !(s[1] > s[0]) => {
                        return Err(bad("task.aberrations.search", "upper bound must exceed lower bound"))
                    }
                    _ => {}
                }
                if c.integrand_samples < 2 {
                    return Err(bad("task.aberrations.integrand_samples", "must be at least 2"));
                }
            }
            TaskConfig::Propagate(c) => {
                finite("task.propagate.z_start", c.z_start)?;
                finite("task.propagate.z_end", c.z_end)?;
                if c.grid_n < 64 || !c.grid_n.is_power_of_two() {
                    return Err(bad("task.propagate.grid_n", "must be a power of two ≥ 64"));
                }
                if let Some(d) = c.dx_mm {
                    positive("task.propagate.dx_mm", d)?;
                }
                if !(c.source.sigma_cells >= 4.0) {
                    return Err(bad("task.propagate.source.sigma_cells", "must be at least 4"));
                }
            }
            TaskConfig::Crosscheck(c) => {
                finite("task.crosscheck.z_start", c.z_start)?;
                finite("task.crosscheck.z_end", c.z_end)?;
                if c.planes < 1 {
                    return Err(bad("task.crosscheck.planes", "must be at least 1"));
                }
            }
        }
        Ok(())
    }

    pub fn beam(&self) -> Result<BeamKinematics, CliError> {
        let b = &self.beam;
        let built = match (b.kinetic_energy_ev, b.voltage_v) {
            (Some(t), _) => BeamKinematics::from_kinetic_energy(t, ELECTRON_REST_ENERGY_EV)
                .map_err(|e| bad("beam.kinetic_energy_ev", e.to_string()))?,
            (_, Some(u)) => BeamKinematics::from_potential_nonrelativistic(u, ELECTRON_REST_ENERGY_EV)
                .map_err(|e| bad("beam.voltage_v", e.to_string()))?,
            _ => return Err(bad("beam", "give exactly one of kinetic_energy_ev and voltage_v")),
        };
        Ok(match b.particle {
            Particle::Electron => built,
            Particle::Positron => built.with_charge_sign(1.0),
        })
    }

    /// Builds the lens; relative tabulated paths resolve against `base`.
    pub fn lens(&self, base: &Path) -> Result<LensStrength, CliError> {
        let beam = self.beam()?;
        let strength = |b0: Option<f64>, alpha0: Option<f64>| -> Result<f64, CliError> {
            match (b0, alpha0) {
                (Some(b), None) => finite("field.b0_tesla", b).map(|_| b),
                (None, Some(a)) => finite("field.alpha0_per_mm", a).map(|_| beam.field_for_strength(a)),
                _ => Err(bad("field", "give exactly one of b0_tesla and alpha0_per_mm")),
            }
        };
        let profile = match &self.field {
            FieldConfig::Glaser { b0_tesla, alpha0_per_mm, a_mm } => {
                FieldProfile::glaser(strength(*b0_tesla, *alpha0_per_mm)?, *a_mm)
                    .map_err(|e| bad("field.a_mm", e.to_string()))?
            }
            FieldConfig::PowerLaw { b0_tesla, alpha0_per_mm, k_n, n, half_line } => {
                let side = match half_line {
                    HalfLineConfig::Negative => HalfLine::Negative,
                    HalfLineConfig::Positive => HalfLine::Positive,
                };
                FieldProfile::power_law(strength(*b0_tesla, *alpha0_per_mm)?, *k_n, *n, side)
                    .map_err(|e| bad("field.n", e.to_string()))?
            }
            FieldConfig::Uniform { b0_tesla, alpha0_per_mm } => {
                FieldProfile::uniform(strength(*b0_tesla, *alpha0_per_mm)?)
                    .map_err(|e| bad("field.b0_tesla", e.to_string()))?
            }
            FieldConfig::Tabulated { path, z_unit, b_unit } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let (z, b) = read_field_csv(&full)?;
                let z = z.iter().map(|v| v * z_unit.to_mm()).collect();
                let b = b.iter().map(|v| v * b_unit.to_tesla()).collect();
                FieldProfile::tabulated(z, b).map_err(|e| bad("field.path", e.to_string()))?
            }
        };
        Ok(LensStrength::new(profile, beam))
    }
}

/// Reads a two-column `z,B` CSV with a header row.
pub fn read_field_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad("field.path", format!("{}: {e}", path.display())))?;
    let (mut z, mut b) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad("field.path", format!("{}: {e}", path.display())))?;
        if rec.len() != 2 {
            return Err(bad("field.path", format!("{} row {}: expected 2 columns", path.display(), i + 2)));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| bad("field.path", format!("{} row {}: {e}", path.display(), i + 2)))
        };
        z.push(parse(&rec[0])?);
        b.push(parse(&rec[1])?);
    }
    Ok((z, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "beam": {"kinetic_energy_ev": 200000},
        "field": {"type": "glaser", "alpha0_per_mm": 1.7320508075688772, "a_mm": 1.0},
        "task": {"cardinal": {"z_ob": -5.0, "search": [-5.0, 5.0]}}
    }"#;

    fn path_of(text: &str) -> String {
        match parse(text) {
            Err(CliError::Config { path, .. }) => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.task.name(), "cardinal");
        assert_eq!(cfg.numerics.peano_baker_order, 6);
        let ls = cfg.lens(Path::new(".")).unwrap();
        assert!((ls.alpha0 - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_field_paths() {
        let missing = MINIMAL.replace(r#""field": {"type": "glaser", "alpha0_per_mm": 1.7320508075688772, "a_mm": 1.0},"#, "");
        assert!(matches!(parse(&missing), Err(CliError::Config { .. })));
        assert_eq!(path_of(&MINIMAL.replace("\"a_mm\"", "\"a_m\"")), "field");
        assert_eq!(path_of(&MINIMAL.replace("-5.0, 5.0]", "5.0, -5.0]")), "task.cardinal.search");
        let extra = MINIMAL.replace("\"z_ob\"", "\"bogus\": 1, \"z_ob\"");
        assert_eq!(path_of(&extra), "task.cardinal.bogus");
        let typed = MINIMAL.replace("\"z_ob\": -5.0", "\"z_ob\": \"far\"");
        assert_eq!(path_of(&typed), "task.cardinal.z_ob");
    }

    #[test]
    fn beam_needs_exactly_one_energy() {
        let both = MINIMAL.replace("200000}", "200000, \"voltage_v\": 1e5}");
        assert_eq!(path_of(&both), "beam");
    }

    #[test]
    fn field_strength_needs_exactly_one_form() {
        let cfg = parse(&MINIMAL.replace("\"alpha0_per_mm\": 1.7320508075688772", "\"b0_tesla\": 1.0, \"alpha0_per_mm\": 1.0")).unwrap();
        assert!(matches!(cfg.lens(Path::new(".")), Err(CliError::Config { .. })));
    }

    #[test]
    fn tabulated_csv_with_units() {
        let dir = tempfile::tempdir().unwrap();
        let mut text = String::from("z,B\n");
        for i in 0..=40 {
            let z = -2.0 + 0.1 * i as f64;
            text.push_str(&format!("{z}, {}\n", 100.0 / (1.0 + z * z)));
        }
        std::fs::write(dir.path().join("b.csv"), text).unwrap();
        let cfg = parse(&MINIMAL.replace(
            r#"{"type": "glaser", "alpha0_per_mm": 1.7320508075688772, "a_mm": 1.0}"#,
            r#"{"type": "tabulated", "path": "b.csv", "z_unit": "cm", "b_unit": "mT"}"#,
        ))
        .unwrap();
        let ls = cfg.lens(dir.path()).unwrap();
        assert_eq!(ls.profile.domain(), (-20.0, 20.0));
        assert!((ls.profile.derivatives(0.0).unwrap()[0] - 0.1).abs() < 1e-12);
    }
}
