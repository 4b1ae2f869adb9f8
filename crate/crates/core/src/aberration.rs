//! Third-order geometric aberrations of a round magnetic lens.
//!
//! Coefficients are integrals over `[z_ob, z_im]` of polynomials in
//! `α, α′, α″` and the fundamental solutions from the object plane. The
//! spherical coefficient is available in three forms related by partial
//! integration, which serve as mutual checks.

use crate::error::{Error, Result};
use crate::fields::LensStrength;
use crate::paraxial::{rotation, CardinalElements, CentroidState, PairSolver};
use crate::quadrature::{integrate, QuadOptions};

/// The nine third-order coefficients for one object/image pair of planes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AberrationSet {
    /// `C` (length).
    pub spherical: f64,
    /// `K` (dimensionless).
    pub coma_iso: f64,
    /// `k` (dimensionless).
    pub coma_aniso: f64,
    /// `A` (1/length).
    pub astig_iso: f64,
    /// `a` (1/length).
    pub astig_aniso: f64,
    /// `F` (1/length).
    pub field_curvature: f64,
    /// `D` (1/length²).
    pub distortion_iso: f64,
    /// `d` (1/length²).
    pub distortion_aniso: f64,
    /// `E` (1/length³).
    pub pocus: f64,
    pub z_ob: f64,
    pub z_im: f64,
}

impl AberrationSet {
    /// `(name, value, unit)` triples in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64, &'static str); 9] {
        [
            ("C", self.spherical, "mm"),
            ("K", self.coma_iso, "1"),
            ("k", self.coma_aniso, "1"),
            ("A", self.astig_iso, "1/mm"),
            ("a", self.astig_aniso, "1/mm"),
            ("F", self.field_curvature, "1/mm"),
            ("D", self.distortion_iso, "1/mm^2"),
            ("d", self.distortion_aniso, "1/mm^2"),
            ("E", self.pocus, "1/mm^3"),
        ]
    }
}

pub const COEFFICIENT_NAMES: [&str; 9] = ["C", "K", "k", "A", "a", "F", "D", "d", "E"];

/// Integrands of the nine coefficients (in [`COEFFICIENT_NAMES`] order)
/// followed by the Scherzer and Hawkes forms of `C`.
pub fn integrands(solver: &PairSolver, z: f64) -> Result<[f64; 11]> {
    let p = solver.pair_at(z)?;
    let [al, al1, al2, _] = solver.lens().alpha_all(z)?;
    let (g, gp, h, hp) = (p.g, p.g_prime, p.h, p.h_prime);
    let a2 = al * al;
    let q = a2 * a2 - al * al2;
    let gh_prime = gp * h + g * hp;
    let c = 0.5 * (q * h.powi(4) + 2.0 * a2 * h * h * hp * hp + hp.powi(4));
    let k_iso = 0.5 * (q * g * h.powi(3) + a2 * gh_prime * h * hp + gp * hp.powi(3));
    let k_aniso = (al2 / 8.0 - 0.5 * a2 * al) * h * h - 0.5 * al * hp * hp;
    let a_iso = 0.5 * (q * g * g * h * h + 2.0 * a2 * g * gp * h * hp + gp * gp * hp * hp - a2);
    let a_aniso = (al2 / 4.0 - a2 * al) * g * h - al * gp * hp;
    let f = 0.5
        * (q * g * g * h * h + a2 * (g * g * hp * hp + gp * gp * h * h) + gp * gp * hp * hp + 2.0 * a2);
    let d_iso = 0.5 * (q * g.powi(3) * h + a2 * g * gp * gh_prime + gp.powi(3) * hp);
    let d_aniso = (al2 / 8.0 - 0.5 * a2 * al) * g * g - 0.5 * al * gp * gp;
    let e = 0.5 * (q * g.powi(4) + 2.0 * a2 * g * g * gp * gp + gp.powi(4));
    let scherzer = scherzer_integrand(al, al1, h, hp);
    let hawkes = hawkes_integrand(al, al1, al2, h);
    Ok([c, k_iso, k_aniso, a_iso, a_aniso, f, d_iso, d_aniso, e, scherzer, hawkes])
}

/// `½{2α⁴h⁴ + h²(hα′ + h′α)² + α²h²h′²}`; non-negative by construction.
pub fn scherzer_integrand(alpha: f64, alpha1: f64, h: f64, hp: f64) -> f64 {
    let a2 = alpha * alpha;
    let s = h * alpha1 + hp * alpha;
    0.5 * (2.0 * a2 * a2 * h.powi(4) + h * h * s * s + a2 * h * h * hp * hp)
}

/// `(1/12)·h⁴·(16α⁴ − αα″ + 5α′²)`.
pub fn hawkes_integrand(alpha: f64, alpha1: f64, alpha2: f64, h: f64) -> f64 {
    h.powi(4) * (16.0 * alpha.powi(4) - alpha * alpha2 + 5.0 * alpha1 * alpha1) / 12.0
}

/// The same integrand written with `b = 2α`: `(1/48)·h⁴·(4b⁴ − bb″ + 5b′²)`.
pub fn hawkes_integrand_b(b: f64, b1: f64, b2: f64, h: f64) -> f64 {
    h.powi(4) * (4.0 * b.powi(4) - b * b2 + 5.0 * b1 * b1) / 48.0
}

fn image_solver(ls: &LensStrength, z_ob: f64, z_im: f64) -> Result<PairSolver> {
    let solver = PairSolver::new(ls, z_ob, (z_ob, z_im))?;
    let h = solver.pair_at(z_im)?.h;
    let tol = 1e-8 * (z_im - z_ob).abs();
    if z_im == z_ob || !(h.abs() <= tol) {
        return Err(Error::NotImagePlane { z: z_im, h, tol });
    }
    Ok(solver)
}

fn integrate_parts(
    ls: &LensStrength,
    z_ob: f64,
    z_im: f64,
    quad_tol: f64,
) -> Result<[f64; 11]> {
    if !(quad_tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance must be positive, got {quad_tol}")));
    }
    let solver = image_solver(ls, z_ob, z_im)?;
    let breaks = ls.profile.breakpoints(z_ob, z_im);
    let opts = QuadOptions { abs_tol: quad_tol, rel_tol: 0.0, max_intervals: 4000 };
    Ok(integrate(|z| integrands(&solver, z), z_ob, z_im, &breaks, opts)?.value)
}

pub fn aberration_coefficients(
    ls: &LensStrength,
    z_ob: f64,
    z_im: f64,
    quad_tol: f64,
) -> Result<AberrationSet> {
    let v = integrate_parts(ls, z_ob, z_im, quad_tol)?;
    Ok(AberrationSet {
        spherical: v[0],
        coma_iso: v[1],
        coma_aniso: v[2],
        astig_iso: v[3],
        astig_aniso: v[4],
        field_curvature: v[5],
        distortion_iso: v[6],
        distortion_aniso: v[7],
        pocus: v[8],
        z_ob,
        z_im,
    })
}

/// Spherical aberration coefficient in Scherzer's sum-of-squares form.
pub fn scherzer_c(ls: &LensStrength, z_ob: f64, z_im: f64, quad_tol: f64) -> Result<f64> {
    let solver = image_solver(ls, z_ob, z_im)?;
    let breaks = ls.profile.breakpoints(z_ob, z_im);
    let opts = QuadOptions { abs_tol: quad_tol, rel_tol: 0.0, max_intervals: 4000 };
    let r = integrate(
        |z| {
            let p = solver.pair_at(z)?;
            let [a, a1, _, _] = ls.alpha_all(z)?;
            Ok([scherzer_integrand(a, a1, p.h, p.h_prime)])
        },
        z_ob,
        z_im,
        &breaks,
        opts,
    )?;
    Ok(r.value[0])
}

/// Spherical aberration coefficient in the `h⁴`-only form.
pub fn hawkes_c(ls: &LensStrength, z_ob: f64, z_im: f64, quad_tol: f64) -> Result<f64> {
    let solver = image_solver(ls, z_ob, z_im)?;
    let breaks = ls.profile.breakpoints(z_ob, z_im);
    let opts = QuadOptions { abs_tol: quad_tol, rel_tol: 0.0, max_intervals: 4000 };
    let r = integrate(
        |z| {
            let p = solver.pair_at(z)?;
            let [a, a1, a2, _] = ls.alpha_all(z)?;
            Ok([hawkes_integrand(a, a1, a2, p.h)])
        },
        z_ob,
        z_im,
        &breaks,
        opts,
    )?;
    Ok(r.value[0])
}

/// Change of `(x, y, px/p0, py/p0)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct AberrationDisplacement {
    pub dx: f64,
    pub dy: f64,
    pub dpx_over_p0: f64,
    pub dpy_over_p0: f64,
}

impl AberrationDisplacement {
    pub fn to_array(&self) -> [f64; 4] {
        [self.dx, self.dy, self.dpx_over_p0, self.dpy_over_p0]
    }
}

/// Object-plane displacement and its image through the ideal map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AberrationMap {
    pub object: AberrationDisplacement,
    pub image: AberrationDisplacement,
}

/// How averages of cubic products are reduced to state data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MomentModel {
    /// Every average of a product is the product of averages.
    Classical,
    /// Gaussian state: keeps the covariance terms of every cubic average.
    /// The covariance is over `(x, y, px/p0, py/p0)`.
    Gaussian { covariance: [[f64; 4]; 4] },
}

impl MomentModel {
    /// `⟨v_a v_b v_c⟩` given the means `m`.
    fn third(&self, m: &[f64; 4], a: usize, b: usize, c: usize) -> f64 {
        let base = m[a] * m[b] * m[c];
        match self {
            MomentModel::Classical => base,
            MomentModel::Gaussian { covariance: s } => {
                base + m[a] * s[b][c] + m[b] * s[a][c] + m[c] * s[a][b]
            }
        }
    }
}

const X: usize = 0;
const Y: usize = 1;
const U: usize = 2;
const V: usize = 3;

/// Third-order displacement at the object plane and its transport to the
/// image plane, for a state given in units of `p0` (so `p0` itself drops
/// out). Anticommutators reduce to twice the product and `L_z/p0` to
/// `x·v − y·u`.
pub fn aberration_displacement(
    ab: &AberrationSet,
    state_ob: &CentroidState,
    cardinal: &CardinalElements,
    model: MomentModel,
) -> Result<AberrationMap> {
    let m = state_ob.to_array();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("object-plane state must be finite".into()));
    }
    if let MomentModel::Gaussian { covariance } = &model {
        if covariance.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("covariance must be finite".into()));
        }
    }
    let t = |a, b, c| model.third(&m, a, b, c);
    // Building blocks: w·|u|², w·(r·u), w·L, w·r² for w ∈ {x, y, u, v}.
    let uu = |w| t(w, U, U) + t(w, V, V);
    let ru = |w| t(w, X, U) + t(w, Y, V);
    let lz = |w| t(w, X, V) - t(w, Y, U);
    let rr = |w| t(w, X, X) + t(w, Y, Y);

    let (c, k_iso, k_an) = (ab.spherical, ab.coma_iso, ab.coma_aniso);
    let (a_iso, a_an, f) = (ab.astig_iso, ab.astig_aniso, ab.field_curvature);
    let (d_iso, d_an, e) = (ab.distortion_iso, ab.distortion_aniso, ab.pocus);

    let dx = c * uu(U)
        + k_iso * (2.0 * ru(U) + uu(X))
        + k_an * (2.0 * lz(U) - uu(Y))
        + 2.0 * a_iso * ru(X)
        + a_an * (lz(X) - 2.0 * ru(Y))
        + f * rr(U)
        + d_iso * rr(X)
        - d_an * rr(Y);
    let dy = c * uu(V)
        + k_iso * (2.0 * ru(V) + uu(Y))
        + k_an * (2.0 * lz(V) + uu(X))
        + 2.0 * a_iso * ru(Y)
        + a_an * (lz(Y) - 2.0 * ru(X))
        + f * rr(V)
        + d_iso * rr(Y)
        + d_an * rr(X);
    let du = -k_iso * uu(U) - k_an * uu(V)
        - 2.0 * a_iso * ru(U)
        - a_an * (lz(U) + 2.0 * ru(V))
        - f * uu(X)
        - d_iso * (rr(U) + 2.0 * ru(X))
        - d_an * (2.0 * lz(X) + rr(V))
        - e * rr(X);
    let dv = -k_iso * uu(V) + k_an * uu(U)
        - 2.0 * a_iso * ru(V)
        - a_an * (lz(V) + 2.0 * ru(U))
        - f * uu(Y)
        - d_iso * (rr(V) + 2.0 * ru(Y))
        - d_an * (2.0 * lz(Y) - rr(U))
        - e * rr(Y);
    let object = AberrationDisplacement { dx, dy, dpx_over_p0: du, dpy_over_p0: dv };

    let r = rotation(cardinal.theta_im);
    let mag = cardinal.magnification;
    let f_len = cardinal.focal_length;
    let rot = |a: f64, b: f64| (r[0][0] * a + r[0][1] * b, r[1][0] * a + r[1][1] * b);
    let (rx, ry) = rot(dx, dy);
    let (ru_, rv_) = rot(du, dv);
    let image = AberrationDisplacement {
        dx: -mag * rx,
        dy: -mag * ry,
        dpx_over_p0: -rx / f_len - ru_ / mag,
        dpy_over_p0: -ry / f_len - rv_ / mag,
    };
    Ok(AberrationMap { object, image })
}

/// `⟨x³⟩ = ⟨x⟩³ + 3⟨x⟩⟨(δx)²⟩ + ⟨(δx)³⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThirdMoment {
    pub total: f64,
    pub mean_cubed: f64,
    pub mean_times_variance: f64,
    pub central: f64,
}

pub fn third_moment_decomposition(mean: f64, variance: f64, central3: f64) -> Result<ThirdMoment> {
    if !(variance >= 0.0) {
        return Err(Error::Domain(format!("variance must be non-negative, got {variance}")));
    }
    let mean_cubed = mean * mean * mean;
    let mean_times_variance = 3.0 * mean * variance;
    Ok(ThirdMoment {
        total: mean_cubed + mean_times_variance + central3,
        mean_cubed,
        mean_times_variance,
        central: central3,
    })
}
