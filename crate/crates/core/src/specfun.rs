//! Gamma function, Pochhammer symbols and fractional-order Bessel functions
//! of the first kind.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Truncation control for power series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { rel_tol: 1e-14, max_terms: 200 }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || max_terms < 10 {
            return Err(Error::Domain(format!(
                "series control needs rel_tol > 0 and max_terms >= 10, got {rel_tol}, {max_terms}"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

/// Rising factorial `(a)_j = a(a+1)…(a+j−1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: f64, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (a + i as f64))
}

// Lanczos approximation, g = 7, nine coefficients (Numerical Recipes / Boost
// "lanczos_n9" family); relative error near 1e-15 for x >= 0.5.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(x: f64) -> f64 {
    // Γ(x) for x >= 1.5 via Γ(x) = Γ((x−1)+1).
    let y = x - 1.0;
    let mut sum = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        sum += c / (y + i as f64);
    }
    let t = y + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(y + 0.5) * (-t).exp() * sum
}

/// `Γ(x)` for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_fn requires a positive argument, got {x}")));
    }
    if x == x.floor() && x <= 171.0 {
        return Ok((1..x as u32).fold(1.0, |acc, k| acc * k as f64));
    }
    // Shift small arguments upward with Γ(x) = Γ(x+k)/(x(x+1)…(x+k−1)).
    let mut shift = 1.0;
    let mut t = x;
    while t < 1.5 {
        shift *= t;
        t += 1.0;
    }
    Ok(lanczos(t) / shift)
}

/// `1/Γ(x)` for any real `x`; zero at the poles.
fn recip_gamma(x: f64) -> f64 {
    if x > 0.0 {
        return 1.0 / gamma_fn(x).expect("positive argument");
    }
    if x == x.floor() {
        return 0.0;
    }
    let mut prod = 1.0;
    let mut t = x;
    while t <= 0.0 {
        prod *= t;
        t += 1.0;
    }
    prod / gamma_fn(t).expect("positive argument")
}

/// Result of a truncated series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    pub converged: bool,
}

/// Sums `Σ_j (−1)^j x^j / ((b)_j · j!)`, the hypergeometric `0F1(; b; −x)`
/// that multiplies every Bessel series.
pub fn alternating_0f1(b: f64, x: f64, ctl: SeriesControl) -> Result<SeriesValue> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..ctl.max_terms {
        let jf = j as f64;
        term *= -x / ((b + jf - 1.0) * jf);
        sum += term;
        // Only stop once terms are past their peak (j beyond the turning point).
        if term.abs() <= ctl.rel_tol * sum.abs() && jf * (b + jf - 1.0).abs() > x.abs() {
            return Ok(SeriesValue { value: sum, terms: j + 1, converged: true });
        }
        if term == 0.0 {
            return Ok(SeriesValue { value: sum, terms: j + 1, converged: true });
        }
    }
    Err(Error::Convergence { terms: ctl.max_terms, last_term: term })
}

/// `J_ν(ζ)` by its power series, for `ζ >= 0`.
pub fn bessel_j(nu: f64, zeta: f64, ctl: SeriesControl) -> Result<SeriesValue> {
    if !(zeta >= 0.0) || !zeta.is_finite() {
        return Err(Error::Domain(format!("bessel_j is defined for zeta >= 0, got {zeta}")));
    }
    if !(nu.abs() < 5.0) {
        return Err(Error::Domain(format!("bessel_j order must satisfy |nu| < 5, got {nu}")));
    }
    if nu < 0.0 && nu == nu.floor() {
        // J_{−m} = (−1)^m J_m for integer m.
        let m = -nu;
        let pos = bessel_j(m, zeta, ctl)?;
        let sign = if (m as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(SeriesValue { value: sign * pos.value, ..pos });
    }
    if zeta == 0.0 {
        let value = if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        return Ok(SeriesValue { value, terms: 1, converged: true });
    }
    let half = 0.5 * zeta;
    let series = alternating_0f1(nu + 1.0, half * half, ctl)?;
    Ok(SeriesValue {
        value: half.powf(nu) * recip_gamma(nu + 1.0) * series.value,
        ..series
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent Γ oracle: Stirling series at a large shifted argument plus
    /// downward recurrence.
    fn gamma_stirling(x: f64) -> f64 {
        let shift = 20.0;
        let y = x + shift;
        let inv = 1.0 / y;
        let inv2 = inv * inv;
        let series = inv
            * (1.0 / 12.0
                - inv2
                    * (1.0 / 360.0
                        - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
        let ln_gamma_y = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series;
        let mut value = ln_gamma_y.exp();
        for k in 0..shift as usize {
            value /= x + k as f64;
        }
        value
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert_eq!(pochhammer(1.0, 5), 120.0);
        assert_eq!(pochhammer(0.5, 3), 1.875);
    }

    #[test]
    fn gamma_special_values() {
        assert_eq!(gamma_fn(1.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(2.0).unwrap(), 1.0);
        assert_eq!(gamma_fn(6.0).unwrap(), 120.0);
        assert!((gamma_fn(0.5).unwrap() / PI.sqrt() - 1.0).abs() < 1e-14);
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_against_stirling_oracle() {
        for &x in &[0.75, 0.25, 5.0 / 6.0, 7.0 / 6.0, 3.0 / 8.0, 1.125, 2.5, 9.3, 0.01] {
            let g = gamma_fn(x).unwrap();
            let o = gamma_stirling(x);
            assert!((g / o - 1.0).abs() < 1e-13, "x = {x}: {g} vs {o}");
        }
        // Γ(3/4) reference: 1.2254167024651776451...
        assert!((gamma_fn(0.75).unwrap() / 1.225_416_702_465_177_6 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn bessel_at_zero() {
        let c = SeriesControl::default();
        assert_eq!(bessel_j(0.0, 0.0, c).unwrap().value, 1.0);
        assert_eq!(bessel_j(0.25, 0.0, c).unwrap().value, 0.0);
        assert_eq!(bessel_j(1.5, 0.0, c).unwrap().value, 0.0);
    }

    #[test]
    fn half_order_closed_forms() {
        let c = SeriesControl::default();
        for &z in &[0.5, 1.0, 2.0] {
            let s = (2.0 / (PI * z)).sqrt() * z.sin();
            let cs = (2.0 / (PI * z)).sqrt() * z.cos();
            assert!((bessel_j(0.5, z, c).unwrap().value - s).abs() < 1e-12);
            assert!((bessel_j(-0.5, z, c).unwrap().value - cs).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_orders_against_known_values() {
        let c = SeriesControl::default();
        // J0(1), J1(1), J0(5), J_{-1}(2) = −J1(2)
        assert!((bessel_j(0.0, 1.0, c).unwrap().value - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1.0, 1.0, c).unwrap().value - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j(0.0, 5.0, c).unwrap().value + 0.177_596_771_314_338_3).abs() < 1e-13);
        assert!((bessel_j(-1.0, 2.0, c).unwrap().value + 0.576_724_807_756_873_4).abs() < 1e-14);
    }

    #[test]
    fn partial_sums_bracket_the_limit() {
        let nu = 0.25;
        let c = SeriesControl::default();
        for &z in &[0.3, 0.7, 0.95] {
            let limit = bessel_j(nu, z, c).unwrap().value;
            let half: f64 = 0.5 * z;
            let pre = half.powf(nu) / gamma_fn(nu + 1.0).unwrap();
            let mut term = pre;
            let mut partial = pre;
            for j in 1..12 {
                let prev = partial;
                term *= -(half * half) / ((nu + j as f64) * j as f64);
                partial += term;
                let (lo, hi) = if prev < partial { (prev, partial) } else { (partial, prev) };
                let slack = 4.0 * f64::EPSILON * limit.abs();
                assert!(lo <= limit + slack && limit <= hi + slack);
            }
        }
    }

    #[test]
    fn term_ratio_contract() {
        let nu = 1.0 / 6.0;
        let z: f64 = 2.3;
        let half = 0.5 * z;
        let term = |j: u32| {
            let jf = (1..=j).fold(1.0, |a, k| a * k as f64);
            (-1f64).powi(j as i32) * half.powi(2 * j as i32) / (pochhammer(nu + 1.0, j) * jf)
        };
        for j in 1..=20u32 {
            let ratio = term(j) / term(j - 1);
            let expected = -(half * half) / ((nu + j as f64) * j as f64);
            assert!((ratio / expected - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn quarter_order_satisfies_bessel_ode() {
        let nu: f64 = 0.25;
        let c = SeriesControl::default();
        let j = |z: f64| bessel_j(nu, z, c).unwrap().value;
        let h = 1e-4;
        for i in 0..50 {
            let z = 0.5 + i as f64 * 0.1;
            let d1 = (j(z + h) - j(z - h)) / (2.0 * h);
            let d2 = (j(z + h) - 2.0 * j(z) + j(z - h)) / (h * h);
            let residual = z * z * d2 + z * d1 + (z * z - nu * nu) * j(z);
            assert!(residual.abs() < 1e-6 * (1.0 + z * z), "z={z}: residual {residual}");
        }
    }

    #[test]
    fn domain_and_convergence_errors() {
        let c = SeriesControl::default();
        assert!(matches!(bessel_j(0.3, -1.0, c), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(6.0, 1.0, c), Err(Error::Domain(_))));
        let tight = SeriesControl::new(1e-14, 10).unwrap();
        assert!(matches!(bessel_j(0.25, 40.0, tight), Err(Error::Convergence { .. })));
        assert!(SeriesControl::new(0.0, 50).is_err());
        assert!(SeriesControl::new(1e-10, 5).is_err());
    }
}
