//! Image-plane search and cardinal elements.

use super::{FundamentalPair, PairSolver};
use crate::error::{Error, Result};
use crate::fields::LensStrength;

/// Search controls for [`find_image_plane`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageSearch {
    pub lo: f64,
    pub hi: f64,
    /// Roots closer than this to the object plane are ignored.
    pub z_min_gap: f64,
    /// Number of scan intervals used to bracket the first sign change.
    pub scan_points: usize,
}

impl ImageSearch {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, z_min_gap: 1e-6 * (hi - lo).abs(), scan_points: 400 }
    }
}

/// Smallest root of `h(·, z_ob)` beyond `z_ob + z_min_gap` inside
/// `search`, refined until the bracket is narrower than `tol`.
pub fn find_image_plane(ls: &LensStrength, z_ob: f64, search: (f64, f64), tol: f64) -> Result<f64> {
    find_image_plane_with(ls, z_ob, ImageSearch::new(search.0, search.1), tol)
}

pub fn find_image_plane_with(
    ls: &LensStrength,
    z_ob: f64,
    search: ImageSearch,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("root tolerance must be positive, got {tol}")));
    }
    let start = search.lo.max(z_ob + search.z_min_gap);
    let end = search.hi;
    if !(end > start) {
        return Err(Error::NotFound { lo: search.lo, hi: search.hi });
    }
    let solver = PairSolver::new(ls, z_ob, (z_ob.min(start), end))?;
    let h = |z: f64| solver.pair_at(z).map(|p| p.h);
    let n = search.scan_points.max(2);
    let mut a = start;
    let mut fa = h(a)?;
    if fa == 0.0 {
        return Ok(a);
    }
    for k in 1..=n {
        let b = if k == n { end } else { start + (end - start) * k as f64 / n as f64 };
        let fb = h(b)?;
        if fb == 0.0 {
            return Ok(b);
        }
        if fa.signum() != fb.signum() {
            return brent(&h, a, b, fa, fb, tol);
        }
        a = b;
        fa = fb;
    }
    Err(Error::NotFound { lo: start, hi: end })
}

fn brent(f: &impl Fn(f64) -> Result<f64>, a: f64, b: f64, fa: f64, fb: f64, tol: f64) -> Result<f64> {
    // Brent's method: bisection safeguarded inverse quadratic / secant steps.
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for _ in 0..200 {
        if fb == 0.0 || (b - a).abs() <= tol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let q = (3.0 * a + b) / 4.0;
        let out_of_range = !((s > q.min(b) && s < q.max(b)) || s == b);
        let slow = if bisected {
            (s - b).abs() >= (b - c).abs() / 2.0 || (b - c).abs() < tol
        } else {
            (s - b).abs() >= (c - d).abs() / 2.0 || (c - d).abs() < tol
        };
        bisected = out_of_range || slow;
        if bisected {
            s = 0.5 * (a + b);
        }
        let fs = f(s)?;
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CardinalElements {
    pub z_ob: f64,
    pub z_im: f64,
    /// Magnification `M = −g(z_im, z_ob)`.
    pub magnification: f64,
    /// Focal length `f = −1/g′(z_im, z_ob)`.
    pub focal_length: f64,
    /// Larmor rotation of the image.
    pub theta_im: f64,
    pub pair: FundamentalPair,
}

/// Magnification, focal length and image rotation for an object/image pair
/// of planes. `z_im` must be a zero of `h(·, z_ob)` to within
/// `1e-8·|z_im − z_ob|`.
pub fn cardinal_elements(ls: &LensStrength, z_ob: f64, z_im: f64) -> Result<CardinalElements> {
    let tol = 1e-8 * (z_im - z_ob).abs();
    cardinal_elements_with_tol(ls, z_ob, z_im, tol)
}

pub fn cardinal_elements_with_tol(
    ls: &LensStrength,
    z_ob: f64,
    z_im: f64,
    h_tol: f64,
) -> Result<CardinalElements> {
    let solver = PairSolver::new(ls, z_ob, (z_ob, z_im))?;
    let pair = solver.pair_at(z_im)?;
    if !(pair.h.abs() <= h_tol) || z_im == z_ob {
        return Err(Error::NotImagePlane { z: z_im, h: pair.h, tol: h_tol });
    }
    if pair.g_prime.abs() * (z_im - z_ob).abs() < 1e-12 {
        return Err(Error::Afocal { g_prime: pair.g_prime });
    }
    Ok(CardinalElements {
        z_ob,
        z_im,
        magnification: -pair.g,
        focal_length: -1.0 / pair.g_prime,
        theta_im: solver.larmor_angle(z_im)?,
        pair,
    })
}
