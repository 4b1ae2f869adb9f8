use lenscope::paraxial::{ode_pair, PairSolver};
use lenscope::wavefield::{read_binary, write_binary};
use lenscope::{
    glaser_pair, make_gaussian, moments, propagate, transfer_map, BeamKinematics, CentroidState,
    FieldProfile, GridSpec, LensStrength, PropagationPlan,
};
use proptest::prelude::*;

fn glaser(alpha0: f64, a: f64) -> LensStrength {
    let beam = BeamKinematics::electron(200e3).unwrap();
    let b0 = beam.field_for_strength(alpha0);
    LensStrength::new(FieldProfile::glaser(b0, a).unwrap(), beam)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pairs_compose_across_an_intermediate_plane(
        alpha0 in 0.2f64..3.0,
        z0 in -6.0f64..-1.0,
        z1 in -1.0f64..1.0,
        z2 in 1.0f64..6.0,
    ) {
        let ls = glaser(alpha0, 1.0);
        let direct = glaser_pair(&ls, z0, z2).unwrap();
        let split = glaser_pair(&ls, z1, z2).unwrap().compose(&glaser_pair(&ls, z0, z1).unwrap());
        for (a, b) in direct.matrix().iter().flatten().zip(split.matrix().iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn lab_transfer_map_is_symplectic(
        alpha0 in 0.2f64..3.0,
        zi in -6.0f64..0.0,
        z in 0.0f64..6.0,
    ) {
        let ls = glaser(alpha0, 1.0);
        let solver = PairSolver::new(&ls, zi, (zi, z)).unwrap();
        let m = transfer_map(solver.pair_at(z).unwrap(), solver.larmor_angle(z).unwrap());
        prop_assert!((m.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn transfer_map_is_linear(
        x in -1.0f64..1.0, y in -1.0f64..1.0,
        px in -0.01f64..0.01, py in -0.01f64..0.01,
        s in -3.0f64..3.0,
    ) {
        let ls = glaser(1.5, 1.0);
        let pair = ode_pair(&ls, -4.0, 2.0, 1e-12).unwrap();
        let m = transfer_map(pair, 0.7);
        let v = CentroidState::new(x, y, px, py);
        let lhs = m.apply(&v.scaled(s)).to_array();
        let rhs = m.apply(&v).scaled(s).to_array();
        for (a, b) in lhs.iter().zip(&rhs) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn propagation_preserves_norm_and_binary_round_trips(
        alpha0 in 0.3f64..2.0,
        z in -1.0f64..3.0,
        ox in -1.0f64..1.0,
    ) {
        let ls = glaser(alpha0, 1.0);
        let zi = -3.0;
        let solver = PairSolver::new(&ls, zi, (zi, z)).unwrap();
        let pair = solver.pair_at(z).unwrap();
        prop_assume!(pair.h.abs() > 0.05);
        let n = 64;
        let lambda = ls.beam.de_broglie_wavelength();
        let dx = 0.5 * (lambda * pair.h.abs() / (pair.g.abs().max(1.0) * n as f64)).sqrt();
        let grid = GridSpec::square(n, dx, zi).unwrap();
        let sigma = 6.0 * dx;
        let psi = make_gaussian(&grid, &ls.beam, (ox * sigma, 0.0), sigma, (0.0, 0.0)).unwrap();
        let plan = PropagationPlan::new(pair, solver.larmor_angle(z).unwrap(), 0.0).unwrap();
        let out = propagate(&psi, &plan).unwrap();
        prop_assert!((moments(&out).unwrap().norm - 1.0).abs() < 1e-10);

        let mut buf = Vec::new();
        write_binary(&out, &mut buf).unwrap();
        let back = read_binary(buf.as_slice(), &ls.beam).unwrap();
        prop_assert_eq!(back.nx, out.nx);
        for iy in (0..n).step_by(7) {
            for ix in (0..n).step_by(5) {
                let d = (back.amplitude(ix, iy) - out.amplitude(ix, iy)).norm();
                prop_assert!(d < 1e-12 * out.amplitude(n / 2, n / 2).norm().max(1.0));
            }
        }
    }
}
