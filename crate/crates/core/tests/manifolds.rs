use transcrit::manifolds::*;
use transcrit::Params;

#[test]
fn refined_entry_graphs_correct_the_first_order_graphs_at_second_order() {
    for lambda in [-0.5, 0.5, 2.0] {
        let c = (1.0 - lambda * lambda) / 8.0;
        let e = 0.01;
        let minus = (refine_l_minus(e, 0.005, lambda).unwrap() - l_minus(e, 0.005, lambda)) / (e * e);
        let plus = (refine_l_plus(e, 0.005, lambda).unwrap() - l_plus(e, 0.005, lambda)) / (e * e);
        assert!((minus + c).abs() <= 0.05 * c.abs(), "lambda {lambda}: {minus} vs {}", -c);
        assert!((plus - c).abs() <= 0.05 * c.abs(), "lambda {lambda}: {plus} vs {c}");
    }
}

#[test]
fn exit_chart_graph_is_invariant_and_vanishes_at_zero() {
    let p = Params::from_chart(2.0, 1.0, 0.1, 0.01).unwrap();
    let t = solve_l3(&[0.0, 0.01, 0.02, 0.05, 0.1], 0.01, &p).unwrap();
    assert_eq!(t.rows[0].y, 0.0);
    assert!(t.rows[1..].iter().all(|r| r.y > 0.0));
    assert!(t.max_residual() <= L3_RESIDUAL_TOL);
    assert!(t.to_csv().starts_with("eps,h,y,residual\n"));
    assert!(solve_l3(&[0.2], 0.01, &p).is_err());
    assert!(solve_l3(&[], 0.01, &p).is_err());
}

#[test]
fn truncated_graph_residual_shrinks_with_eps1_squared() {
    let p = Params::from_chart(0.5, 1.0, 0.1, 0.01).unwrap();
    let g = GraphCoeffs::minus(0.5);
    let a = invariance_residual_k1(&g, 0.004, 0.005, &p).unwrap();
    let b = invariance_residual_k1(&g, 0.002, 0.005, &p).unwrap();
    assert!((a / b - 4.0).abs() < 0.1, "{}", a / b);
}
