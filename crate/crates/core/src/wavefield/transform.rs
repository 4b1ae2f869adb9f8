//! Row/column FFT passes and the Fourier-shear rotation of a sampled field.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    /// `Σ v_j exp(−2πi·jm/N)`
    Forward,
    /// `Σ v_j exp(+2πi·jm/N)`, unnormalized
    Inverse,
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    }
}

/// Transforms every contiguous row of length `n` in place.
fn rows(data: &mut [Complex64], n: usize, dir: Direction) {
    let fft = plan(n, dir);
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(n).for_each_init(
        || vec![Complex64::default(); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

pub(crate) fn transpose(data: &[Complex64], nx: usize, ny: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    out.par_chunks_mut(ny).enumerate().for_each(|(ix, col)| {
        for (iy, v) in col.iter_mut().enumerate() {
            *v = data[iy * nx + ix];
        }
    });
    out
}

/// 2D transform of a row-major `ny × nx` array.
pub(crate) fn fft2(data: &mut Vec<Complex64>, nx: usize, ny: usize, dir: Direction) {
    rows(data, nx, dir);
    let mut t = transpose(data, nx, ny);
    rows(&mut t, ny, dir);
    *data = transpose(&t, ny, nx);
}

/// Angular frequency of DFT bin `m` for pitch `d`; the Nyquist bin is
/// assigned to the negative side.
pub(crate) fn frequency(m: usize, n: usize, d: f64) -> f64 {
    let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
    2.0 * PI * signed / (n as f64 * d)
}

/// `out(x, y) = v(x + a·y, y)` by per-row Fourier shifts.
fn shear_x(data: &mut [Complex64], n: usize, d: f64, a: f64) {
    let fwd = plan(n, Direction::Forward);
    let inv = plan(n, Direction::Inverse);
    let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
    let scale = 1.0 / n as f64;
    data.par_chunks_mut(n).enumerate().for_each_init(
        || vec![Complex64::default(); scratch_len],
        |scratch, (iy, row)| {
            let shift = a * (iy as f64 - (n / 2) as f64) * d;
            fwd.process_with_scratch(row, scratch);
            for (m, v) in row.iter_mut().enumerate() {
                *v *= Complex64::from_polar(scale, frequency(m, n, d) * shift);
            }
            inv.process_with_scratch(row, scratch);
        },
    );
}

/// `out(x, y) = v(x, y + b·x)`.
fn shear_y(data: &mut Vec<Complex64>, n: usize, d: f64, b: f64) {
    let mut t = transpose(data, n, n);
    shear_x(&mut t, n, d, b);
    *data = transpose(&t, n, n);
}

/// `out(x, y) = v(−y, x)` on a centred square grid, with indices taken
/// modulo `n`.
fn quarter_turn(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); data.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
        let sx = (n - iy) % n;
        for (ix, v) in row.iter_mut().enumerate() {
            *v = data[ix * n + sx];
        }
    });
    out
}

/// Resamples a centred square field so that `out(s) = v(Q(φ)·s)` with `Q`
/// the counter-clockwise rotation by `φ`. Quarter turns are exact index
/// permutations; the remainder (at most π/4) is done with three shears,
/// which is exact for band-limited periodic data and preserves the norm.
pub(crate) fn rotate(data: &mut Vec<Complex64>, n: usize, d: f64, phi: f64) {
    let quarters = (phi / (0.5 * PI)).round();
    let rest = phi - quarters * 0.5 * PI;
    for _ in 0..(quarters as i64).rem_euclid(4) {
        *data = quarter_turn(data, n);
    }
    if rest != 0.0 {
        let a = -(0.5 * rest).tan();
        let b = rest.sin();
        shear_x(data, n, d, a);
        shear_y(data, n, d, b);
        shear_x(data, n, d, a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(n: usize, d: f64, cx: f64, cy: f64, s: f64) -> Vec<Complex64> {
        let mut v = vec![Complex64::default(); n * n];
        for iy in 0..n {
            for ix in 0..n {
                let x = (ix as f64 - (n / 2) as f64) * d - cx;
                let y = (iy as f64 - (n / 2) as f64) * d - cy;
                v[iy * n + ix] = Complex64::new((-(x * x + y * y) / (4.0 * s * s)).exp(), 0.0);
            }
        }
        v
    }

    #[test]
    fn fft2_round_trip() {
        let (nx, ny) = (8, 4);
        let orig: Vec<Complex64> = (0..nx * ny).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let mut v = orig.clone();
        fft2(&mut v, nx, ny, Direction::Forward);
        fft2(&mut v, nx, ny, Direction::Inverse);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a / (nx * ny) as f64 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fft2_single_mode() {
        let (nx, ny) = (8, 4);
        let v0: Vec<Complex64> = (0..nx * ny)
            .map(|i| {
                let (ix, iy) = (i % nx, i / nx);
                Complex64::from_polar(1.0, 2.0 * PI * (3.0 * ix as f64 / nx as f64 + iy as f64 / ny as f64))
            })
            .collect();
        let mut v = v0;
        fft2(&mut v, nx, ny, Direction::Forward);
        for (i, c) in v.iter().enumerate() {
            let expect = if i == nx + 3 { (nx * ny) as f64 } else { 0.0 };
            assert!((c.re - expect).abs() < 1e-10 && c.im.abs() < 1e-10);
        }
    }

    #[test]
    fn quarter_turns_compose_to_identity() {
        let n = 16;
        let v0 = gaussian(n, 1.0, 2.0, -3.0, 2.0);
        let mut v = v0.clone();
        for _ in 0..4 {
            v = quarter_turn(&v, n);
        }
        assert_eq!(v, v0);
    }

    #[test]
    fn rotation_moves_an_offset_gaussian() {
        let (n, d, s) = (128, 0.5, 2.0);
        let (cx, cy) = (4.0, 1.0);
        for &phi in &[0.3, -1.1, 2.0, PI] {
            let mut v = gaussian(n, d, cx, cy, s);
            let before: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            rotate(&mut v, n, d, phi);
            // out(s) = v(Q s), so the peak moves to Qᵀ·c
            let (c, sn) = (phi.cos(), phi.sin());
            let (ex, ey) = (c * cx + sn * cy, -sn * cx + c * cy);
            let expected = gaussian(n, d, ex, ey, s);
            let worst = v.iter().zip(&expected).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(worst < 1e-10, "phi = {phi}: {worst}");
            let after: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            assert!((after / before - 1.0).abs() < 1e-13);
        }
    }
}
