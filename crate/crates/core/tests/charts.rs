use proptest::prelude::*;
use transcrit::charts::*;
use transcrit::map::EulerMap;
use transcrit::Params;

fn params() -> Params {
    Params::from_chart(0.5, 1.0, 0.1, 0.01).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn entry_chart_step_is_conjugate(r1 in 1e-3f64..1.0, y1 in -2.0f64..2.0, e1 in 0.0f64..0.2, h1 in 1e-5f64..0.01, lambda in -1.0f64..3.0) {
        let p = Params { lambda, ..params() };
        let q = ChartPoint::K1(K1Point::new(r1, y1, e1, h1));
        let s = blow_down(&q).unwrap();
        let a = blow_down(&step_chart(&q, &p).unwrap()).unwrap();
        let b = EulerMap::new(lambda, p.rho).apply(s);
        prop_assert!(step_discrepancy(&a, &b, &s, lambda) <= 1e-12);
    }

    #[test]
    fn exit_chart_step_is_conjugate(r3 in 1e-3f64..1.0, y3 in -1.0f64..1.0, e3 in 0.0f64..0.1, h3 in 1e-5f64..0.01, lambda in -1.0f64..3.0) {
        let p = Params { lambda, ..params() };
        let q = ChartPoint::K3(K3Point::new(r3, y3, e3, h3));
        let s = blow_down(&q).unwrap();
        let a = blow_down(&step_chart(&q, &p).unwrap()).unwrap();
        let b = EulerMap::new(lambda, p.rho).apply(s);
        prop_assert!(step_discrepancy(&a, &b, &s, lambda) <= 1e-12);
    }

    #[test]
    fn entry_scaling_round_trip(r1 in 1e-3f64..1.0, y1 in -2.0f64..2.0, e1 in 1e-6f64..0.2, h1 in 1e-5f64..0.01) {
        let q = K1Point::new(r1, y1, e1, h1);
        let back = k21(&k12(&q).unwrap()).unwrap();
        for (a, b) in q.to_array().iter().zip(back.to_array()) {
            prop_assert!(ulp_distance(*a, b) <= 2);
        }
    }

    #[test]
    fn scaling_exit_round_trip(x2 in 0.1f64..5.0, y2 in -5.0f64..5.0, r2 in 0.05f64..0.3, h2 in 1e-4f64..3e-3) {
        let q = K2Point::new(x2, y2, r2, h2);
        let back = k32(&k23(&q).unwrap()).unwrap();
        for (a, b) in q.to_array().iter().zip(back.to_array()) {
            prop_assert!(ulp_distance(*a, b) <= 2);
        }
    }

    #[test]
    fn scaling_step_commutes_with_change_to_exit_chart(x2 in 0.5f64..3.0, y2 in -3.0f64..3.0, r2 in 0.05f64..0.3, h2 in 1e-4f64..3e-3, lambda in 1.1f64..3.0) {
        let q = K2Point::new(x2, y2, r2, h2);
        let via_k2 = blow_down(&ChartPoint::K3(k23(&step_k2_at(&q, lambda, 1e9, 1).unwrap()).unwrap())).unwrap();
        let via_k3 = blow_down(&ChartPoint::K3(step_k3_at(&k23(&q).unwrap(), lambda, 1).unwrap())).unwrap();
        let from = blow_down(&ChartPoint::K2(q)).unwrap();
        prop_assert!(step_discrepancy(&via_k2, &via_k3, &from, lambda) <= 1e-12);
    }
}

#[test]
fn scaling_chart_keeps_radius_and_step_bitwise() {
    let mut q = K2Point::new(-3.0, -3.0, 0.05, 5e-4);
    for k in 1..5000 {
        q = step_k2_at(&q, 0.5, 1e9, k).unwrap();
        assert_eq!(q.r2.to_bits(), 0.05f64.to_bits());
        assert_eq!(q.h2.to_bits(), 5e-4f64.to_bits());
    }
}
