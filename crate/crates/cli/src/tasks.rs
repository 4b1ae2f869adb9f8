//! Task runners. Each returns the `result` block of the summary and the
//! names of the files it wrote.

use crate::config::{
    AberrationsTask, CardinalTask, CrosscheckTask, NumericsConfig, PropagateTask, StateConfig, TraceTask,
};
use crate::error::CliError;
use crate::output::OutputDir;
use lenscope::aberration::{integrands, COEFFICIENT_NAMES};
use lenscope::paraxial::{glaser_pair, ode_pairs_at, peano_baker_path, powerlaw_pair, Route};
use lenscope::wavefield::{
    default_h_threshold, write_binary, write_intensity_csv, Branch, Moments, PropagationPlan,
};
use lenscope::{
    aberration_coefficients, aberration_displacement, cardinal_elements, find_image_plane, hawkes_c,
    make_gaussian, moments, propagate, propagate_to_image, scherzer_c, trace_centroid, transfer_map,
    CentroidState, FieldProfile, FundamentalPair, GridSpec, LensStrength, MomentModel, PairSolver,
    WaveField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub struct TaskOutcome {
    pub result: Value,
    pub files: Vec<String>,
    /// Set when a route comparison exceeded its tolerance.
    pub disagreement: Option<String>,
}

fn file_name(p: &std::path::Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
        .collect()
}

fn state(s: &StateConfig) -> CentroidState {
    CentroidState::new(s.x_mm, s.y_mm, s.px_over_p0, s.py_over_p0)
}

fn state_json(s: &CentroidState) -> Value {
    json!({"x_mm": s.x, "y_mm": s.y, "px_over_p0": s.px_over_p0, "py_over_p0": s.py_over_p0})
}

fn pair_json(p: &FundamentalPair) -> Value {
    json!({"z": p.z, "g": p.g, "g_prime": p.g_prime, "h": p.h, "h_prime": p.h_prime, "wronskian": p.wronskian()})
}

fn length_scale(ls: &LensStrength) -> f64 {
    ls.characteristic_length().filter(|l| l.is_finite() && *l > 0.0).unwrap_or(1.0)
}

pub fn trace(ls: &LensStrength, t: &TraceTask, out: &OutputDir) -> Result<TaskOutcome, CliError> {
    let zs = linspace(t.z_start, t.z_end, t.samples);
    let initial = state(&t.initial);
    let traj = trace_centroid(ls, initial, t.z_start, &zs)?;
    let solver = PairSolver::new(ls, t.z_start, (t.z_start, t.z_end))?;
    let thetas: Vec<f64> = zs.iter().map(|&z| solver.larmor_angle(z)).collect::<Result<_, _>>()?;
    let rows: Vec<Vec<f64>> = traj
        .iter()
        .zip(&thetas)
        .map(|((z, s), th)| vec![*z, s.x, s.y, s.px_over_p0, s.py_over_p0, *th])
        .collect();
    let mut files = Vec::new();
    if let Some(p) = out.csv("trajectory.csv", &["z", "x", "y", "px/p0", "py/p0", "theta"], &rows)? {
        files.push(file_name(&p));
    }
    let (z_end, last) = *traj.last().expect("at least two samples");
    let pair = solver.pair_at(z_end)?;
    Ok(TaskOutcome {
        result: json!({
            "route": solver.route().name(),
            "samples": zs.len(),
            "initial": state_json(&initial),
            "final": state_json(&last),
            "theta_end": thetas.last().copied().unwrap_or(0.0),
            "pair_end": pair_json(&pair),
        }),
        files,
        disagreement: None,
    })
}

/// Pairs from `zi` at each plane by every route that applies.
struct RouteTable {
    names: Vec<&'static str>,
    pairs: Vec<Vec<FundamentalPair>>,
    unavailable: Vec<(&'static str, String)>,
}

fn analytic_pairs(ls: &LensStrength, zi: f64, zs: &[f64]) -> Option<lenscope::Result<Vec<FundamentalPair>>> {
    match ls.profile {
        FieldProfile::Glaser { .. } => Some(zs.iter().map(|&z| glaser_pair(ls, zi, z)).collect()),
        FieldProfile::PowerLaw { .. } => Some(zs.iter().map(|&z| powerlaw_pair(ls, zi, z)).collect()),
        FieldProfile::Uniform { .. } => {
            let lo = zs.iter().copied().fold(zi, f64::min);
            let hi = zs.iter().copied().fold(zi, f64::max);
            Some(PairSolver::with_route(ls, zi, (lo, hi), Route::UniformClosedForm)
                .and_then(|s| zs.iter().map(|&z| s.pair_at(z)).collect()))
        }
        FieldProfile::Tabulated(_) => None,
    }
}

fn analytic_name(ls: &LensStrength) -> &'static str {
    match ls.profile {
        FieldProfile::Glaser { .. } => "glaser_closed_form",
        FieldProfile::PowerLaw { .. } => "power_law_series",
        _ => "uniform_closed_form",
    }
}

/// `zs` must be monotone in the direction of travel from `zi`.
fn route_table(ls: &LensStrength, zi: f64, zs: &[f64], num: &NumericsConfig) -> Result<RouteTable, CliError> {
    let mut t = RouteTable { names: Vec::new(), pairs: Vec::new(), unavailable: Vec::new() };
    match analytic_pairs(ls, zi, zs) {
        Some(Ok(p)) => {
            t.names.push(analytic_name(ls));
            t.pairs.push(p);
        }
        Some(Err(e)) => t.unavailable.push((analytic_name(ls), e.to_string())),
        None => {}
    }
    t.names.push("ode");
    t.pairs.push(ode_pairs_at(ls, zi, zs, num.ode_rel_tol)?);
    let mut planes = vec![zi];
    planes.extend_from_slice(zs);
    let path = peano_baker_path(ls, &planes, num.peano_baker_order, num.peano_baker_steps)?;
    t.names.push("peano_baker");
    t.pairs.push(path[1..].iter().map(|p| p.pair).collect());
    Ok(t)
}

impl RouteTable {
    /// Largest pairwise gaps, with `h` scaled by `1/L` and `g′` by `L`.
    fn agreement(&self, scale: f64) -> (Value, f64, f64) {
        let mut entries = serde_json::Map::new();
        let mut worst = 0.0f64;
        for i in 0..self.names.len() {
            for j in i + 1..self.names.len() {
                let (mut dg, mut dgp, mut dh, mut dhp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
                for (a, b) in self.pairs[i].iter().zip(&self.pairs[j]) {
                    dg = dg.max((a.g - b.g).abs());
                    dgp = dgp.max((a.g_prime - b.g_prime).abs() * scale);
                    dh = dh.max((a.h - b.h).abs() / scale);
                    dhp = dhp.max((a.h_prime - b.h_prime).abs());
                }
                worst = worst.max(dg).max(dgp).max(dh).max(dhp);
                entries.insert(
                    format!("{}_vs_{}", self.names[i], self.names[j]),
                    json!({"max_abs_g": dg, "max_abs_g_prime_scaled": dgp, "max_abs_h_scaled": dh, "max_abs_h_prime": dhp}),
                );
            }
        }
        let mut wr = serde_json::Map::new();
        let mut worst_w = 0.0f64;
        for (name, pairs) in self.names.iter().zip(&self.pairs) {
            let w = pairs.iter().map(|p| (p.wronskian() - 1.0).abs()).fold(0.0, f64::max);
            worst_w = worst_w.max(w);
            wr.insert(name.to_string(), json!(w));
        }
        let unavailable: serde_json::Map<String, Value> =
            self.unavailable.iter().map(|(n, e)| (n.to_string(), json!(e))).collect();
        let report = json!({
            "routes": self.names,
            "unavailable": unavailable,
            "pairwise": entries,
            "max_wronskian_deviation": wr,
            "length_scale_mm": scale,
        });
        (report, worst, worst_w)
    }

    fn rows(&self, zs: &[f64]) -> (Vec<String>, Vec<Vec<f64>>) {
        let mut header = vec!["z".to_string()];
        for n in &self.names {
            for q in ["g", "g_prime", "h", "h_prime"] {
                header.push(format!("{q}_{n}"));
            }
        }
        let rows = zs
            .iter()
            .enumerate()
            .map(|(k, &z)| {
                let mut r = vec![z];
                for p in &self.pairs {
                    r.extend([p[k].g, p[k].g_prime, p[k].h, p[k].h_prime]);
                }
                r
            })
            .collect();
        (header, rows)
    }
}

fn verdict(worst: f64, worst_w: f64, tol: f64, what: &str) -> Option<String> {
    (!(worst <= tol && worst_w <= tol)).then(|| {
        format!("{what}: largest route gap {worst:.3e}, largest Wronskian deviation {worst_w:.3e}, tolerance {tol:.3e}")
    })
}

pub fn cardinal(
    ls: &LensStrength,
    t: &CardinalTask,
    num: &NumericsConfig,
    out: &OutputDir,
) -> Result<TaskOutcome, CliError> {
    let z_im = find_image_plane(ls, t.z_ob, (t.search[0], t.search[1]), num.root_tol)?;
    let card = cardinal_elements(ls, t.z_ob, z_im)?;
    let mut files = Vec::new();

    let solver = PairSolver::new(ls, t.z_ob, (t.z_ob.min(t.search[0]), t.search[1].max(t.z_ob)))?;
    let scan = linspace(t.search[0], t.search[1], t.scan_samples);
    let rows: Vec<Vec<f64>> = scan
        .iter()
        .map(|&z| solver.pair_at(z).map(|p| vec![z, p.g, p.g_prime, p.h, p.h_prime]))
        .collect::<Result<_, _>>()?;
    if let Some(p) = out.csv("h_scan.csv", &["z", "g", "g_prime", "h", "h_prime"], &rows)? {
        files.push(file_name(&p));
    }

    // route comparison on the planes from the object to the image
    let mut planes: Vec<f64> = linspace(t.z_ob, z_im, t.scan_samples.max(3))[1..].to_vec();
    planes.dedup();
    let table = route_table(ls, t.z_ob, &planes, num)?;
    let (report, worst, worst_w) = table.agreement(length_scale(ls));
    let at_image: serde_json::Map<String, Value> = table
        .names
        .iter()
        .zip(&table.pairs)
        .map(|(n, p)| (n.to_string(), pair_json(p.last().expect("non-empty planes"))))
        .collect();
    let (header, rows) = table.rows(&planes);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    if let Some(p) = out.csv("routes.csv", &header, &rows)? {
        files.push(file_name(&p));
    }
    Ok(TaskOutcome {
        result: json!({
            "route": solver.route().name(),
            "z_ob": t.z_ob,
            "z_im": z_im,
            "magnification": card.magnification,
            "focal_length_mm": card.focal_length,
            "theta_im_rad": card.theta_im,
            "theta_im_deg": card.theta_im.to_degrees(),
            "pair_at_image": pair_json(&card.pair),
            "routes_at_image": at_image,
            "route_agreement": report,
            "tolerance": num.tol,
        }),
        files,
        disagreement: verdict(worst, worst_w, num.tol, "cardinal route table"),
    })
}

pub fn aberrations(
    ls: &LensStrength,
    t: &AberrationsTask,
    num: &NumericsConfig,
    out: &OutputDir,
) -> Result<TaskOutcome, CliError> {
    let z_im = match (t.z_im, t.search) {
        (Some(z), _) => z,
        (None, Some(s)) => find_image_plane(ls, t.z_ob, (s[0], s[1]), num.root_tol)?,
        (None, None) => unreachable!("validated config has z_im or search"),
    };
    let card = cardinal_elements(ls, t.z_ob, z_im)?;
    let ab = aberration_coefficients(ls, t.z_ob, z_im, num.quad_tol)?;
    let sch = scherzer_c(ls, t.z_ob, z_im, num.quad_tol)?;
    let haw = hawkes_c(ls, t.z_ob, z_im, num.quad_tol)?;
    let rel = |v: f64| ((ab.spherical - v) / ab.spherical).abs();

    let mut coeffs = serde_json::Map::new();
    for (name, value, unit) in ab.entries() {
        coeffs.insert(name.to_string(), json!({"value": value, "unit": unit}));
    }

    let mut files = Vec::new();
    let solver = PairSolver::new(ls, t.z_ob, (t.z_ob, z_im))?;
    let zs = linspace(t.z_ob, z_im, t.integrand_samples);
    let samples: Vec<[f64; 11]> = zs.iter().map(|&z| integrands(&solver, z)).collect::<Result<_, _>>()?;
    let roles = [
        "spherical",
        "coma_iso",
        "coma_aniso",
        "astig_iso",
        "astig_aniso",
        "field_curvature",
        "distortion_iso",
        "distortion_aniso",
        "pocus",
    ];
    for (i, role) in roles.iter().enumerate() {
        let rows: Vec<Vec<f64>> = zs.iter().zip(&samples).map(|(&z, s)| vec![z, s[i]]).collect();
        if let Some(p) = out.csv(&format!("integrand_{role}.csv"), &["z", "integrand"], &rows)? {
            files.push(file_name(&p));
        }
    }
    let rows: Vec<Vec<f64>> = zs.iter().zip(&samples).map(|(&z, s)| vec![z, s[0], s[9], s[10]]).collect();
    if let Some(p) = out.csv("spherical_forms.csv", &["z", "full", "scherzer", "h4"], &rows)? {
        files.push(file_name(&p));
    }

    let displacement = match &t.state {
        Some(s) => {
            let m = aberration_displacement(&ab, &state(s), &card, MomentModel::Classical)?;
            let d = |a: [f64; 4]| json!({"dx_mm": a[0], "dy_mm": a[1], "dpx_over_p0": a[2], "dpy_over_p0": a[3]});
            json!({"state": state_json(&state(s)), "object": d(m.object.to_array()), "image": d(m.image.to_array())})
        }
        None => Value::Null,
    };
    debug_assert_eq!(COEFFICIENT_NAMES.len(), roles.len());
    Ok(TaskOutcome {
        result: json!({
            "z_ob": t.z_ob,
            "z_im": z_im,
            "magnification": card.magnification,
            "focal_length_mm": card.focal_length,
            "theta_im_rad": card.theta_im,
            "coefficients": coeffs,
            "spherical_forms": {
                "full": ab.spherical,
                "scherzer": sch,
                "h4": haw,
                "relative_gap_scherzer": rel(sch),
                "relative_gap_h4": rel(haw),
            },
            "displacement": displacement,
        }),
        files,
        disagreement: verdict(rel(sch).max(rel(haw)), 0.0, num.tol, "spherical aberration forms"),
    })
}

fn moments_json(m: &Moments) -> Value {
    json!({
        "norm": m.norm,
        "centroid_mm": m.centroid,
        "momentum_centroid_over_p0": m.momentum_centroid,
        "covariance_mm2": m.covariance,
        "third_central_x_mm3": m.third_central_x,
    })
}

fn write_field(out: &OutputDir, stem: &str, psi: &WaveField, files: &mut Vec<String>) -> Result<(), CliError> {
    if out.csv {
        let p = out.with_file(&format!("intensity_{stem}.csv"), |w| write_intensity_csv(psi, w))?;
        files.push(file_name(&p));
    }
    if out.binary {
        let p = out.with_file(&format!("wavefield_{stem}.wfld"), |w| write_binary(psi, w))?;
        files.push(file_name(&p));
    }
    Ok(())
}

pub fn propagate_task(
    ls: &LensStrength,
    t: &PropagateTask,
    out: &OutputDir,
) -> Result<TaskOutcome, CliError> {
    let solver = PairSolver::new(ls, t.z_start, (t.z_start, t.z_end))?;
    let pair = solver.pair_at(t.z_end)?;
    let theta = solver.larmor_angle(t.z_end)?;
    let n = t.grid_n;
    let dx = match t.dx_mm {
        Some(d) => d,
        None => {
            let lambda = ls.beam.de_broglie_wavelength();
            let d = 0.5 * (lambda * pair.h.abs() / (pair.g.abs().max(1.0) * n as f64)).sqrt();
            if !(d > 0.0) {
                return Err(CliError::Config {
                    path: "task.propagate.dx_mm".into(),
                    message: "required when the end plane is an image plane".into(),
                });
            }
            d
        }
    };
    let grid = GridSpec::square(n, dx, t.z_start)?;
    let sigma = t.source.sigma_cells * dx;
    let center = (t.source.offset_sigmas[0] * sigma, t.source.offset_sigmas[1] * sigma);
    let tilt = (t.source.tilt[0], t.source.tilt[1]);
    let psi = make_gaussian(&grid, &ls.beam, center, sigma, tilt)?;
    let plan = PropagationPlan::new(pair, theta, default_h_threshold(&psi))?;
    let out_field = match plan.branch {
        Branch::General => propagate(&psi, &plan)?,
        Branch::ImagePlane => propagate_to_image(&psi, &plan)?,
    };
    let m_in = moments(&psi)?;
    let m_out = moments(&out_field)?;
    let want = transfer_map(pair, theta).apply(&CentroidState::new(center.0, center.1, tilt.0, tilt.1));
    let pos_err = (m_out.centroid[0] - want.x).abs().max((m_out.centroid[1] - want.y).abs());
    let mom_err = (m_out.momentum_centroid[0] - want.px_over_p0)
        .abs()
        .max((m_out.momentum_centroid[1] - want.py_over_p0).abs());

    let mut files = Vec::new();
    write_field(out, "in", &psi, &mut files)?;
    write_field(out, "out", &out_field, &mut files)?;
    Ok(TaskOutcome {
        result: json!({
            "branch": match plan.branch { Branch::General => "general", Branch::ImagePlane => "image_plane" },
            "pair": pair_json(&pair),
            "theta_rad": theta,
            "h_threshold_mm": plan.h_threshold,
            "grid_in": {"n": n, "dx_mm": psi.dx},
            "grid_out": {"n": n, "dx_mm": out_field.dx, "dy_mm": out_field.dy},
            "source": {"sigma_mm": sigma, "center_mm": [center.0, center.1], "tilt": [tilt.0, tilt.1]},
            "moments_in": moments_json(&m_in),
            "moments_out": moments_json(&m_out),
            "norm_drift": m_out.norm - m_in.norm,
            "curvature_out_per_mm": out_field.curvature,
            "global_phase_rad": out_field.global_phase,
            "transfer_map_prediction": state_json(&want),
            "ehrenfest": {"centroid_error_cells": pos_err / out_field.dx, "momentum_error_over_p0": mom_err},
        }),
        files,
        disagreement: None,
    })
}

pub fn crosscheck(
    ls: &LensStrength,
    t: &CrosscheckTask,
    num: &NumericsConfig,
    out: &OutputDir,
) -> Result<TaskOutcome, CliError> {
    let mut zs: Vec<f64> = (1..=t.planes)
        .map(|k| t.z_start + (t.z_end - t.z_start) * k as f64 / t.planes as f64)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(num.seed);
    let (lo, hi) = (t.z_start.min(t.z_end), t.z_start.max(t.z_end));
    for _ in 0..t.random_planes {
        zs.push(rng.gen_range(lo..=hi));
    }
    if t.z_end >= t.z_start {
        zs.sort_by(f64::total_cmp);
    } else {
        zs.sort_by(|a, b| b.total_cmp(a));
    }
    zs.dedup();
    zs.retain(|&z| z != t.z_start);

    let table = route_table(ls, t.z_start, &zs, num)?;
    let (report, worst, worst_w) = table.agreement(length_scale(ls));
    let (header, rows) = table.rows(&zs);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut files = Vec::new();
    if let Some(p) = out.csv("routes.csv", &header, &rows)? {
        files.push(file_name(&p));
    }
    let pass = worst <= num.tol && worst_w <= num.tol;
    Ok(TaskOutcome {
        result: json!({
            "planes": zs.len(),
            "peano_baker_order": num.peano_baker_order,
            "peano_baker_steps_per_segment": num.peano_baker_steps,
            "ode_rel_tol": num.ode_rel_tol,
            "tolerance": num.tol,
            "max_route_gap": worst,
            "max_wronskian_deviation": worst_w,
            "agree": pass,
            "route_agreement": report,
        }),
        files,
        disagreement: verdict(worst, worst_w, num.tol, "crosscheck"),
    })
}
