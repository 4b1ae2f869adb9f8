//! Natural cubic spline used for tabulated axial fields.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivative at each knot; zero at both ends.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Domain("spline x and y lengths differ".into()));
        }
        if n < 4 {
            return Err(Error::Domain(format!("spline needs at least 4 samples, got {n}")));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("spline samples must be finite".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("spline abscissae must be strictly increasing".into()));
        }

        // Tridiagonal system for interior second derivatives (Thomas algorithm).
        let mut m = vec![0.0; n];
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut upper = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i - 1] = 2.0 * (h0 + h1);
            upper[i - 1] = h1;
            rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for i in 1..k {
            let lower = x[i + 1] - x[i];
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
        }
        Ok(Self { x, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.partition_point(|&k| k <= t) {
            0 => 0,
            i if i >= self.x.len() => self.x.len() - 2,
            i => i - 1,
        }
    }

    /// Value and first three derivatives at `t`.
    pub fn eval(&self, t: f64) -> Result<[f64; 4]> {
        let (lo, hi) = self.domain();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { z: t, min: lo, max: hi });
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 = (y1 - y0) / h - (3.0 * a * a - 1.0) * h / 6.0 * m0 + (3.0 * b * b - 1.0) * h / 6.0 * m1;
        let d2 = a * m0 + b * m1;
        let d3 = (m1 - m0) / h;
        Ok([value, d1, d2, d3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_linear_data_exactly() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.7).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let s = CubicSpline::natural(x, y).unwrap();
        for &t in &[0.0, 0.35, 1.9, 3.5] {
            let [v, d1, d2, d3] = s.eval(t).unwrap();
            assert!((v - (2.0 * t - 1.0)).abs() < 1e-13);
            assert!((d1 - 2.0).abs() < 1e-12);
            assert!(d2.abs() < 1e-12 && d3.abs() < 1e-10);
        }
    }

    #[test]
    fn interpolates_knots_with_natural_ends() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::natural(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi).unwrap()[0] - yi).abs() < 1e-14);
        }
        assert_eq!(s.eval(x[0]).unwrap()[2], 0.0);
        assert!(s.eval(*x.last().unwrap()).unwrap()[2].abs() < 1e-14);
        // Interior accuracy on a smooth function.
        let [v, d1, _, _] = s.eval(2.05).unwrap();
        assert!((v - 2.05f64.sin()).abs() < 1e-4);
        assert!((d1 - 2.05f64.cos()).abs() < 1e-3);
    }

    #[test]
    fn first_derivative_is_continuous_across_knots() {
        let x: Vec<f64> = vec![0.0, 0.5, 1.3, 2.0, 2.2, 3.1];
        let y: Vec<f64> = vec![0.1, 0.9, -0.4, 0.3, 0.8, 0.0];
        let s = CubicSpline::natural(x.clone(), y).unwrap();
        for &k in &x[1..x.len() - 1] {
            let l = s.eval(k - 1e-9).unwrap();
            let r = s.eval(k + 1e-9).unwrap();
            assert!((l[1] - r[1]).abs() < 1e-6);
            assert!((l[2] - r[2]).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(CubicSpline::natural(vec![0.0, 1.0, 2.0], vec![0.0; 3]).is_err());
        assert!(CubicSpline::natural(vec![0.0, 1.0, 1.0, 2.0], vec![0.0; 4]).is_err());
        let s = CubicSpline::natural(vec![0.0, 1.0, 2.0, 3.0], vec![0.0; 4]).unwrap();
        assert!(matches!(s.eval(3.5), Err(Error::OutOfRange { .. })));
    }
}
