//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands.

use crate::error::{Error, Result};

// 15-point Kronrod nodes on [-1, 1] (non-negative half) and weights; the odd
// entries are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    /// Absolute error target on the largest component.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

impl QuadOptions {
    pub fn absolute(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    /// Estimated absolute error, maximum over components.
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment<const N: usize> {
    lo: f64,
    hi: f64,
    value: [f64; N],
    error: f64,
}

fn kronrod<const N: usize, F>(f: &mut F, lo: f64, hi: f64) -> Result<Segment<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    for c in 0..N {
        k[c] = fc[c] * WGK[7];
        g[c] = fc[c] * WG[3];
    }
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        for c in 0..N {
            let s = f1[c] + f2[c];
            k[c] += WGK[i] * s;
            if i % 2 == 1 {
                g[c] += WG[i / 2] * s;
            }
        }
    }
    let mut value = [0.0; N];
    let mut error: f64 = 0.0;
    for c in 0..N {
        value[c] = k[c] * half;
        let diff = ((k[c] - g[c]) * half).abs();
        error = error.max(diff);
        if !value[c].is_finite() {
            return Err(Error::Domain(format!("non-finite integrand on [{lo}, {hi}]")));
        }
    }
    Ok(Segment { lo, hi, value, error })
}

/// Integrates `f` over `[a, b]`. Interior `breakpoints` (discontinuities of
/// the integrand or its derivatives) seed the initial partition.
pub fn integrate<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: [0.0; N], error: 0.0, intervals: 0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = vec![lo];
    let mut interior: Vec<f64> =
        breakpoints.iter().copied().filter(|&p| p > lo && p < hi).collect();
    interior.sort_by(|x, y| x.partial_cmp(y).unwrap());
    interior.dedup();
    cuts.extend(interior);
    cuts.push(hi);

    let mut segs = Vec::with_capacity(cuts.len() + 64);
    for w in cuts.windows(2) {
        segs.push(kronrod(&mut f, w[0], w[1])?);
    }
    let mut evaluations = 15 * segs.len();

    loop {
        let mut total = [0.0; N];
        let mut err_total = 0.0;
        for s in &segs {
            for c in 0..N {
                total[c] += s.value[c];
            }
            err_total += s.error;
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let target = opts.abs_tol.max(opts.rel_tol * scale);
        if err_total <= target {
            for v in total.iter_mut() {
                *v *= sign;
            }
            return Ok(QuadResult {
                value: total,
                error: err_total,
                intervals: segs.len(),
                evaluations,
            });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .expect("at least one segment");
        let s = segs[worst];
        let mid = 0.5 * (s.lo + s.hi);
        let too_narrow = !(mid > s.lo && mid < s.hi)
            || (s.hi - s.lo) <= 64.0 * f64::EPSILON * s.lo.abs().max(s.hi.abs()).max(1e-300);
        if segs.len() >= opts.max_intervals || too_narrow {
            return Err(Error::Quadrature { error: err_total, worst_lo: s.lo, worst_hi: s.hi });
        }
        segs[worst] = kronrod(&mut f, s.lo, mid)?;
        segs.push(kronrod(&mut f, mid, s.hi)?);
        evaluations += 30;
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: QuadOptions,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let r = integrate::<1, _>(|x| Ok([f(x)?]), a, b, breakpoints, opts)?;
    Ok((r.value[0], r.error))
}

/// Cumulative integral of samples `f` on a uniform grid of spacing `h`,
/// fourth-order accurate; `out[0] = 0`. Needs at least four samples.
pub fn cumulative_uniform(f: &[f64], h: f64, out: &mut Vec<f64>) {
    let n = f.len();
    assert!(n >= 4, "cumulative integration needs at least four samples");
    out.clear();
    out.reserve(n);
    out.push(0.0);
    let c = h / 24.0;
    let mut acc = 0.0;
    for k in 0..n - 1 {
        let cell = if k == 0 {
            9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]
        } else if k == n - 2 {
            f[n - 4] - 5.0 * f[n - 3] + 19.0 * f[n - 2] + 9.0 * f[n - 1]
        } else {
            -f[k - 1] + 13.0 * f[k] + 13.0 * f[k + 1] - f[k + 2]
        };
        acc += c * cell;
        out.push(acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let (v, e) =
            integrate_scalar(|x| Ok(x.powi(9) - 3.0 * x * x), -1.0, 2.0, &[], QuadOptions::default())
                .unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
        assert!(e < 1e-9);
    }

    #[test]
    fn lorentzian_over_long_interval() {
        let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-13, max_intervals: 2000 };
        let (v, _) =
            integrate_scalar(|x| Ok(1.0 / (1.0 + x * x)), -1000.0, 1000.0, &[], opts).unwrap();
        assert!((v - 2.0 * 1000f64.atan()).abs() < 1e-11);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let f = |x: f64| Ok(x.exp());
        let (a, _) = integrate_scalar(f, 0.0, 1.0, &[], QuadOptions::default()).unwrap();
        let (b, _) = integrate_scalar(f, 1.0, 0.0, &[], QuadOptions::default()).unwrap();
        assert!((a + b).abs() < 1e-15);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn vector_integrand() {
        let r = integrate::<2, _>(
            |x| Ok([x.sin(), x.cos()]),
            0.0,
            PI,
            &[],
            QuadOptions::absolute(1e-13),
        )
        .unwrap();
        assert!((r.value[0] - 2.0).abs() < 1e-13);
        assert!(r.value[1].abs() < 1e-13);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let (v, _) = integrate_scalar(
            |x| Ok((x - 0.3).abs()),
            0.0,
            1.0,
            &[0.3],
            QuadOptions::absolute(1e-14),
        )
        .unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn reports_failure_with_worst_interval() {
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 0.0, max_intervals: 20 };
        let r = integrate_scalar(|x| Ok(1.0 / x.sqrt()), 0.0, 1.0, &[], opts);
        match r {
            Err(Error::Quadrature { worst_lo, .. }) => assert_eq!(worst_lo, 0.0),
            other => panic!("expected quadrature error, got {other:?}"),
        }
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate_scalar(
            |x| if x > 0.5 { Err(Error::Singularity { z: x }) } else { Ok(1.0) },
            0.0,
            1.0,
            &[],
            QuadOptions::default(),
        );
        assert!(matches!(r, Err(Error::Singularity { .. })));
    }

    #[test]
    fn cumulative_rule_is_fourth_order() {
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let f: Vec<f64> = (0..n).map(|i| (i as f64 * h).exp()).collect();
            let mut out = Vec::new();
            cumulative_uniform(&f, h, &mut out);
            out.iter()
                .enumerate()
                .map(|(i, v)| (v - ((i as f64 * h).exp() - 1.0)).abs())
                .fold(0.0, f64::max)
        };
        let e1 = err(41);
        let e2 = err(81);
        assert!(e1 < 1e-6, "e1 = {e1}");
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
        // cubics integrate exactly
        let f: Vec<f64> = (0..7).map(|i| (i as f64 * 0.5).powi(3)).collect();
        let mut out = Vec::new();
        cumulative_uniform(&f, 0.5, &mut out);
        for (i, v) in out.iter().enumerate() {
            assert!((v - (i as f64 * 0.5).powi(4) / 4.0).abs() < 1e-13);
        }
    }
}
