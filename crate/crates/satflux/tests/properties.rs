//! Property tests for the algebraic invariants.

use proptest::prelude::*;
use satflux::bifurcation::{bifurcation_lambda, bifurcation_point_curve, classify, trivial_line_a};
use satflux::model::{
    bulk_force, bulk_primitive, first_integral, flux, interface_energy, BISTABLE_A_MAX,
};
use satflux::phase_plane::equilibria;
use satflux::time_map::g_function;
use satflux::PhasePoint;

proptest! {
    #[test]
    fn force_and_flux_are_odd(s in -50.0f64..50.0) {
        prop_assert_eq!(bulk_force(-s), -bulk_force(s));
        prop_assert_eq!(flux(-s), -flux(s));
        prop_assert_eq!(bulk_primitive(-s), bulk_primitive(s));
        prop_assert_eq!(interface_energy(-s), interface_energy(s));
    }

    #[test]
    fn flux_saturates_strictly(s in -1e6f64..1e6) {
        prop_assert!(flux(s).abs() < 1.0);
    }

    #[test]
    fn flux_monotone(a in -30.0f64..30.0, gap in 1e-6f64..10.0) {
        prop_assert!(flux(a + gap) > flux(a));
    }

    #[test]
    fn first_integral_even_in_slope(u in -2.0f64..2.0, v in -50.0f64..50.0,
                                    lambda in 0.1f64..40.0, a in -0.3f64..0.3) {
        let plus = first_integral(PhasePoint::new(u, v), lambda, a);
        let minus = first_integral(PhasePoint::new(u, -v), lambda, a);
        prop_assert_eq!(plus, minus);
    }

    #[test]
    fn equilibria_solve_the_cubic(t in -0.999f64..0.999) {
        let a = t * BISTABLE_A_MAX;
        let eq = equilibria(a).unwrap();
        prop_assert!(eq.left < eq.centre && eq.centre < eq.right);
        for u in [eq.left, eq.centre, eq.right] {
            prop_assert!((bulk_force(u) - a).abs() <= 1e-12);
        }
    }

    #[test]
    fn classification_even_in_mass(k in 1u32..4, l in 0.2f64..8.0, m in 0.0f64..0.7) {
        let plus = classify(k, l, m);
        let minus = classify(k, l, -m);
        prop_assert_eq!(plus.kind, minus.kind);
        prop_assert_eq!(plus.h_yyy, minus.h_yyy);
        prop_assert_eq!(plus.lambda_k, minus.lambda_k);
    }

    #[test]
    fn onset_curve_meets_trivial_line(l in 0.3f64..5.0, m in 0.0f64..0.57) {
        let lambda = bifurcation_lambda(1, l, m).unwrap();
        let gap = (bifurcation_point_curve(lambda, l).unwrap() - trivial_line_a(m)).abs();
        prop_assert!(gap <= 1e-12, "gap {} at (L, M) = ({}, {})", gap, l, m);
    }

    #[test]
    fn level_function_is_one_at_its_base(u_min in -1.0f64..0.57,
                                         lambda in 0.1f64..30.0, a in -0.3f64..0.3) {
        prop_assert_eq!(g_function(u_min, lambda, a, u_min), 1.0);
    }
}
