//! `lenscope` command-line front end.

mod config;
mod error;
mod output;
mod tasks;

use clap::{Args, Parser, Subcommand};
use config::{RunConfig, TaskConfig};
use error::CliError;
use lenscope::LensStrength;
use output::{to_json_bytes, OutputDir};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lenscope", version, about = "Paraxial optics, aberrations and wave propagation for round magnetic lenses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Centroid trajectory through the lens.
    Trace(RunArgs),
    /// Image plane, magnification, focal length and image rotation.
    Cardinal(RunArgs),
    /// Third-order aberration coefficients and their integrands.
    Aberrations(RunArgs),
    /// Propagate a Gaussian wavefield between two planes.
    Propagate(RunArgs),
    /// Compare the fundamental solutions from every available route.
    Crosscheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(value_name = "CONFIG", required_unless_present = "config_flag")]
    config: Option<PathBuf>,
    /// Same as the positional argument.
    #[arg(long = "config", value_name = "CONFIG", conflicts_with = "config")]
    config_flag: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Route-agreement tolerance; overrides `numerics.tol`.
    #[arg(long)]
    tol: Option<f64>,
    /// Random seed; overrides `numerics.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn parts(&self) -> (&'static str, &RunArgs) {
        match self {
            Command::Trace(a) => ("trace", a),
            Command::Cardinal(a) => ("cardinal", a),
            Command::Aberrations(a) => ("aberrations", a),
            Command::Propagate(a) => ("propagate", a),
            Command::Crosscheck(a) => ("crosscheck", a),
        }
    }
}

fn beam_json(ls: &LensStrength) -> Value {
    let b = &ls.beam;
    json!({
        "kinetic_energy_ev": b.kinetic_energy,
        "p0c_ev": b.p0c,
        "charge_sign": b.charge_sign,
        "relativistic": b.relativistic,
        "wavelength_mm": b.de_broglie_wavelength(),
    })
}

fn field_json(ls: &LensStrength) -> Value {
    let (lo, hi) = ls.profile.domain();
    let bound = |v: f64| if v.is_finite() { json!(v) } else { Value::Null };
    json!({
        "kind": ls.profile.kind(),
        "b0_tesla": ls.profile.b0(),
        "alpha0_per_mm": ls.alpha0,
        "characteristic_length_mm": ls.characteristic_length(),
        "domain_mm": [bound(lo), bound(hi)],
    })
}

fn run(cmd: &Command) -> Result<(Vec<u8>, Option<String>), CliError> {
    let (name, args) = cmd.parts();
    let path = args.config.as_ref().or(args.config_flag.as_ref()).expect("clap requires a config");
    let bytes = std::fs::read(path).map_err(|e| CliError::Config {
        path: String::new(),
        message: format!("{}: {e}", path.display()),
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config {
        path: String::new(),
        message: format!("{}: {e}", path.display()),
    })?;
    let mut cfg: RunConfig = config::parse(text)?;
    if cfg.task.name() != name {
        return Err(CliError::Config {
            path: "task".into(),
            message: format!("config describes a `{}` task but `{name}` was requested", cfg.task.name()),
        });
    }
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config { path: "--tol".into(), message: "must be positive and finite".into() });
        }
        cfg.numerics.tol = t;
    }
    if let Some(s) = args.seed {
        cfg.numerics.seed = s;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let ls = cfg.lens(base)?;
    let dir = args.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let out = OutputDir::create(dir, &cfg.output.formats)?;

    let num = &cfg.numerics;
    let outcome = match &cfg.task {
        TaskConfig::Trace(t) => tasks::trace(&ls, t, &out)?,
        TaskConfig::Cardinal(t) => tasks::cardinal(&ls, t, num, &out)?,
        TaskConfig::Aberrations(t) => tasks::aberrations(&ls, t, num, &out)?,
        TaskConfig::Propagate(t) => tasks::propagate_task(&ls, t, &out)?,
        TaskConfig::Crosscheck(t) => tasks::crosscheck(&ls, t, num, &out)?,
    };
    let mut files = outcome.files;
    files.sort();
    let summary = json!({
        "lenscope_version": lenscope::VERSION,
        "config_sha256": Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect::<String>(),
        "task": name,
        "seed": num.seed,
        "tolerance": num.tol,
        "status": if outcome.disagreement.is_some() { "disagreement" } else { "ok" },
        "beam": beam_json(&ls),
        "field": field_json(&ls),
        "result": outcome.result,
        "files": files,
    });
    let json = to_json_bytes(&summary);
    out.write_bytes("summary.json", &json)?;
    Ok((json, outcome.disagreement))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("LENSCOPE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A failure only means the pool was already built.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = run(&cli.command).and_then(|(json, disagreement)| {
        std::io::stdout()
            .write_all(&json)
            .map_err(|e| CliError::Output(format!("stdout: {e}")))?;
        match disagreement {
            Some(m) => Err(CliError::Disagreement(m)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lenscope: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
