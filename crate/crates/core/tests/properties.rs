mod common;

use proptest::prelude::*;
use sads_udw::radial::{Method, SolverSettings};
use sads_udw::response::{rate_for_l, DetectorSpec, ModeSource, Trajectory, Vacuum};
use sads_udw::Geometry;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn four_velocity_is_unit(r_plus in 0.01f64..3.0, stretch in 1.01f64..20.0) {
        let g = Geometry::new(r_plus).unwrap();
        let r = 1.5 * g.r0() * stretch;
        if let Some(err) = common::four_velocity(r_plus, r.max(r_plus * 1.01)).unwrap() {
            prop_assert!(err < 1e-12, "err {err:e}");
        }
    }

    #[test]
    fn tortoise_increases(r_plus in 0.01f64..5.0, a in 1e-6f64..10.0, b in 1e-6f64..10.0) {
        let g = Geometry::new(r_plus).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi > lo * (1.0 + 1e-9));
        let t1 = g.tortoise(r_plus * (1.0 + lo)).unwrap();
        let t2 = g.tortoise(r_plus * (1.0 + hi)).unwrap();
        prop_assert!(t1 < t2 && t2 < 0.0);
    }

    #[test]
    fn taylor_shift_matches_expansion(
        c in prop::array::uniform5(-10.0f64..10.0),
        x0 in -3.0f64..3.0,
        y in -2.0f64..2.0,
    ) {
        prop_assert!(common::taylor_shift_point(c, x0, y).is_ok());
    }

    #[test]
    fn scaling_invariance(r_plus in 0.01f64..2.0, ratio in 1.5f64..20.0, e in -5.0f64..5.0,
                          sigma in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let res = common::scaling_invariance(r_plus, ratio, e, 0.37, sigma);
        prop_assert!(res.is_ok(), "{res:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recurrence_satisfies_five_term_relation(r_plus in 0.05f64..2.0, omega in 0.1f64..6.0, l in 0u32..6) {
        let res = common::recurrence_residual(r_plus, omega, l, 300);
        prop_assert!(res.is_ok(), "{res:?}");
    }

    #[test]
    fn wronskian_is_constant(r_plus in 0.05f64..2.0, omega in 0.1f64..6.0, l in 0u32..5) {
        let res = common::wronskian_constancy(r_plus, omega, l);
        prop_assert!(res.is_ok(), "{res:?}");
    }

    #[test]
    fn static_detailed_balance(r_plus in 0.05f64..1.0, ratio in 2.0f64..20.0, y in 0.05f64..30.0, l in 0u32..3) {
        let g = Geometry::new(r_plus).unwrap();
        let src = ModeSource::new(Method::Auto, SolverSettings::default());
        let spec = DetectorSpec::new(Trajectory::Static, ratio * r_plus, Vacuum::HartleHawking, l);
        let up = rate_for_l(&g, &spec, y, l, &src).unwrap();
        let down = rate_for_l(&g, &spec, -y, l, &src).unwrap();
        prop_assert!((up * y.exp() - down).abs() <= 1e-10 * down);
    }
}
