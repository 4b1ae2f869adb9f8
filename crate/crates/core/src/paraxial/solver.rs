//! Dense evaluation of the pair from a fixed initial plane by the most
//! accurate route available for the profile.

use super::ode_route::{options, rhs, DEFAULT_ODE_REL_TOL};
use super::{glaser, powerlaw, FundamentalPair};
use crate::error::Result;
use crate::fields::{FieldProfile, LensStrength};
use crate::ode::{OdeOptions, Stepper};
use crate::quadrature::{integrate_scalar, QuadOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    GlaserClosedForm,
    UniformClosedForm,
    PowerLawSeries,
    Ode,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::GlaserClosedForm => "glaser_closed_form",
            Route::UniformClosedForm => "uniform_closed_form",
            Route::PowerLawSeries => "power_law_series",
            Route::Ode => "ode",
        }
    }
}

const CHECKPOINTS: usize = 256;

#[derive(Clone, Debug)]
pub struct PairSolver {
    ls: LensStrength,
    zi: f64,
    route: Route,
    /// Integrated states on a uniform grid over the span (ODE route only).
    checkpoints: Vec<(f64, [f64; 4])>,
    opts: Option<OdeOptions<4>>,
}

impl PairSolver {
    /// Chooses a closed form or series when one exists and converges over
    /// `span`, otherwise integrates.
    pub fn new(ls: &LensStrength, zi: f64, span: (f64, f64)) -> Result<Self> {
        let route = match ls.profile {
            FieldProfile::Glaser { .. } => Route::GlaserClosedForm,
            FieldProfile::Uniform { .. } => Route::UniformClosedForm,
            FieldProfile::PowerLaw { .. } => {
                let ok = powerlaw::powerlaw_pair(ls, zi, span.0).is_ok()
                    && powerlaw::powerlaw_pair(ls, zi, span.1).is_ok();
                if ok {
                    Route::PowerLawSeries
                } else {
                    Route::Ode
                }
            }
            FieldProfile::Tabulated(_) => Route::Ode,
        };
        Self::with_route(ls, zi, span, route)
    }

    pub fn with_route(ls: &LensStrength, zi: f64, span: (f64, f64), route: Route) -> Result<Self> {
        let lo = span.0.min(span.1).min(zi);
        let hi = span.0.max(span.1).max(zi);
        ls.profile.check_interval(lo, hi)?;
        let mut solver = Self { ls: ls.clone(), zi, route, checkpoints: Vec::new(), opts: None };
        if route == Route::Ode {
            solver.build_checkpoints(lo, hi)?;
        }
        Ok(solver)
    }

    fn build_checkpoints(&mut self, lo: f64, hi: f64) -> Result<()> {
        let opts = options(DEFAULT_ODE_REL_TOL, (hi - lo).max(f64::MIN_POSITIVE))?;
        let mut grid: Vec<f64> = (0..=CHECKPOINTS)
            .map(|k| lo + (hi - lo) * k as f64 / CHECKPOINTS as f64)
            .collect();
        grid.push(self.zi);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let pairs = super::ode_pairs_at(&self.ls, self.zi, &grid, DEFAULT_ODE_REL_TOL)?;
        self.checkpoints = grid
            .iter()
            .zip(&pairs)
            .map(|(&z, p)| (z, [p.g, p.g_prime, p.h, p.h_prime]))
            .collect();
        self.opts = Some(opts);
        Ok(())
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn zi(&self) -> f64 {
        self.zi
    }

    pub fn lens(&self) -> &LensStrength {
        &self.ls
    }

    pub fn pair_at(&self, z: f64) -> Result<FundamentalPair> {
        match self.route {
            Route::GlaserClosedForm => glaser::glaser_pair(&self.ls, self.zi, z),
            Route::UniformClosedForm => {
                let w = self.ls.alpha0.abs();
                let dz = z - self.zi;
                let (s, c) = (w * dz).sin_cos();
                let h = if w == 0.0 { dz } else { s / w };
                Ok(FundamentalPair { zi: self.zi, z, g: c, g_prime: -w * s, h, h_prime: c })
            }
            Route::PowerLawSeries => powerlaw::powerlaw_pair(&self.ls, self.zi, z),
            Route::Ode => {
                let idx = self.checkpoints.partition_point(|(t, _)| *t < z);
                let pick = match idx {
                    0 => 0,
                    i if i >= self.checkpoints.len() => self.checkpoints.len() - 1,
                    i => {
                        if (self.checkpoints[i].0 - z).abs() < (z - self.checkpoints[i - 1].0).abs() {
                            i
                        } else {
                            i - 1
                        }
                    }
                };
                let (t0, y0) = self.checkpoints[pick];
                let y = if t0 == z {
                    y0
                } else {
                    self.ls.profile.check_interval(t0, z)?;
                    let mut opts = self.opts.expect("checkpoints imply options");
                    opts.initial_step = Some((z - t0).abs());
                    let mut f = rhs(&self.ls);
                    let mut s = Stepper::new(t0, y0);
                    s.advance(&mut f, z, &opts)?;
                    s.y
                };
                Ok(FundamentalPair { zi: self.zi, z, g: y[0], g_prime: y[1], h: y[2], h_prime: y[3] })
            }
        }
    }

    /// Larmor angle from the initial plane, in closed form when available.
    pub fn larmor_angle(&self, z: f64) -> Result<f64> {
        match &self.ls.profile {
            FieldProfile::Glaser { .. } => glaser::glaser_larmor_angle(&self.ls, self.zi, z),
            FieldProfile::Uniform { .. } => Ok(self.ls.alpha0 * (z - self.zi)),
            FieldProfile::PowerLaw { k_n, n, .. } => {
                self.ls.profile.check_interval(self.zi, z)?;
                let p = *n + 1;
                Ok(self.ls.alpha0 * k_n * (z.powi(p) - self.zi.powi(p)) / p as f64)
            }
            FieldProfile::Tabulated(_) => {
                if z == self.zi {
                    return Ok(0.0);
                }
                let breaks = self.ls.profile.breakpoints(self.zi, z);
                let q = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-14, max_intervals: 4000 };
                Ok(integrate_scalar(|t| self.ls.alpha(t), self.zi, z, &breaks, q)?.0)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamkin::BeamKinematics;
    use crate::fields::HalfLine;

    fn beam() -> BeamKinematics {
        BeamKinematics::electron(200_000.0).unwrap()
    }

    #[test]
    fn route_choice() {
        let b = beam();
        let g = LensStrength::new(FieldProfile::glaser(0.1, 1.0).unwrap(), b);
        assert_eq!(PairSolver::new(&g, -5.0, (-5.0, 5.0)).unwrap().route(), Route::GlaserClosedForm);
        let p = LensStrength::new(FieldProfile::power_law(0.1, 1.0, 2, HalfLine::Positive).unwrap(), b);
        assert_eq!(PairSolver::new(&p, 0.0, (0.0, 1.0)).unwrap().route(), Route::PowerLawSeries);
        // far outside the series' working range the solver integrates instead
        assert_eq!(PairSolver::new(&p, 0.0, (0.0, 60.0)).unwrap().route(), Route::Ode);
    }

    #[test]
    fn ode_route_matches_closed_form_densely() {
        let b = beam();
        let ls = LensStrength::new(FieldProfile::glaser(b.field_for_strength(3.0), 1.0).unwrap(), b);
        let ode = PairSolver::with_route(&ls, -5.0, (-5.0, 5.0), Route::Ode).unwrap();
        let exact = PairSolver::new(&ls, -5.0, (-5.0, 5.0)).unwrap();
        for i in 0..97 {
            let z = -4.97 + 0.1031 * i as f64;
            let a = ode.pair_at(z).unwrap();
            let e = exact.pair_at(z).unwrap();
            assert!((a.g - e.g).abs() < 1e-9, "z = {z}");
            assert!((a.h - e.h).abs() < 1e-9);
            assert!((a.g_prime - e.g_prime).abs() < 1e-9);
            assert!((a.h_prime - e.h_prime).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_and_power_law_larmor_closed_forms() {
        let b = beam();
        let p = LensStrength::new(
            FieldProfile::power_law(b.field_for_strength(0.7), 1.3, 3, HalfLine::Positive).unwrap(),
            b,
        );
        let s = PairSolver::new(&p, 0.2, (0.2, 1.5)).unwrap();
        let q = super::super::larmor_angle(&p, 0.2, 1.5, 1e-14).unwrap();
        assert!((s.larmor_angle(1.5).unwrap() - q).abs() < 1e-13);
        let u = LensStrength::new(FieldProfile::uniform(0.0).unwrap(), b);
        let s = PairSolver::new(&u, 1.0, (1.0, 3.0)).unwrap();
        let pr = s.pair_at(3.0).unwrap();
        assert_eq!((pr.g, pr.h), (1.0, 2.0));
    }
}
