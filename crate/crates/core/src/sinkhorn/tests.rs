use super::*;
use crate::cost::CostRule;
use crate::measure::{product_measure, Grid1D};

fn unit(n: usize) -> Grid1D {
    Grid1D::new(0.0, 1.0, n).unwrap()
}

fn zero_cost(n1: usize, n2: usize) -> CostField {
    CostField::from_values(unit(n1), unit(n2), alloc::vec![0.0; n1 * n2]).unwrap()
}

fn bump(grid: Grid1D, center: f64, width: f64) -> GridMeasure {
    let raw: Vec<f64> = grid
        .centers()
        .map(|x| 0.05 + (-(x - center) * (x - center) / (2.0 * width * width)).exp())
        .collect();
    GridMeasure::normalized(grid, raw).unwrap()
}

#[test]
fn step_a_fixed_point() {
    let mu = GridMeasure::uniform(unit(8), 1.0).unwrap();
    let k = gibbs_kernel(&zero_cost(8, 8), 0.7).unwrap();
    let a = sinkhorn_step_a(&k, &[1.0; 8], &mu).unwrap();
    assert!(a.iter().all(|v| (*v - 1.0).abs() < 1e-15));
}

#[test]
fn step_a_respects_zero_marginal() {
    let mut d = alloc::vec![1.25; 4];
    d[2] = 0.0;
    let mu = GridMeasure::new(unit(4), d).unwrap();
    let k = gibbs_kernel(&zero_cost(4, 4), 1.0).unwrap();
    let a = sinkhorn_step_a(&k, &[1.0; 4], &mu).unwrap();
    assert_eq!(a[2], 0.0);
    assert!(a[0] > 0.0);
    let la = sinkhorn_log_step_a(&k, &[0.0; 4], &mu).unwrap();
    assert_eq!(la[2], f64::NEG_INFINITY);
}

#[test]
fn step_a_two_points_by_hand() {
    // h = 1, K = [[1, e^-1], [e^-1, 1]]
    let g = Grid1D::new(0.0, 2.0, 2).unwrap();
    let c = CostField::from_values(g, g, alloc::vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    let k = gibbs_kernel(&c, 1.0).unwrap();
    let mu = GridMeasure::new(g, alloc::vec![0.5, 0.5]).unwrap();
    let a = sinkhorn_step_a(&k, &[1.0, 1.0], &mu).unwrap();
    let expected = 0.5 / (1.0 + (-1.0f64).exp());
    assert!((expected - 0.365529).abs() < 1e-6);
    for v in a {
        assert!((v - expected).abs() < 1e-15);
    }
}

#[test]
fn step_a_enforces_first_marginal() {
    let g = unit(12);
    let mu = bump(g, 0.3, 0.1);
    let c = CostField::from_rule(CostRule::SquaredDistance, g, g).unwrap();
    let k = gibbs_kernel(&c, 0.2).unwrap();
    let b: Vec<f64> = (0..12).map(|j| 0.5 + 0.1 * j as f64).collect();
    let a = sinkhorn_step_a(&k, &b, &mu).unwrap();
    let state = DualState::from_scalings(a, b);
    let (m1, _) = assemble_plan(&state, &k, Mode::Direct).marginals();
    for (x, y) in m1.density().iter().zip(mu.density()) {
        assert!((x - y).abs() <= 1e-13 * y.max(1.0));
    }
}

#[test]
fn step_b_mirrors_step_a() {
    let g = unit(6);
    let nu = bump(g, 0.6, 0.2);
    let c = CostField::from_rule(CostRule::AbsDistance, g, g).unwrap();
    let k = gibbs_kernel(&c, 0.5).unwrap();
    let a = alloc::vec![0.8; 6];
    let b = sinkhorn_step_b(&k, &a, &nu).unwrap();
    let lb = sinkhorn_log_step_b(&k, &ln_vec(&a), &nu).unwrap();
    for (x, l) in b.iter().zip(&lb) {
        assert!((x.ln() - l).abs() < 1e-12);
    }
}

fn ln_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.ln()).collect()
}

#[test]
fn zero_denominator_is_reported() {
    let g = unit(2);
    let mu = GridMeasure::uniform(g, 1.0).unwrap();
    let k = gibbs_kernel(&zero_cost(2, 2), 1.0).unwrap();
    let err = sinkhorn_step_a(&k, &[0.0, 0.0], &mu).unwrap_err();
    assert!(matches!(err, Error::DivergedScaling { side: Side::First, .. }));
}

#[test]
fn trivial_fixed_point_both_modes() {
    let g = unit(16);
    let mu = GridMeasure::uniform(g, 1.0).unwrap();
    for mode in [Mode::Log, Mode::Direct] {
        let opts = SolveOptions { mode, ..Default::default() };
        let sol = solve(&mu, &mu, &zero_cost(16, 16), 0.3, &opts).unwrap();
        assert!(sol.report.iterations <= 2);
        assert!(sol.plan.values().iter().all(|p| (p - 1.0).abs() < 1e-14));
        assert!(sol.state.a.iter().chain(&sol.state.b).all(|v| (v - 1.0).abs() < 1e-14));
        assert!((sol.report.primal_value + 0.3).abs() < 1e-14);
        assert!((sol.report.dual_value + 0.3).abs() < 1e-14);
        assert_eq!(sol.report.gauge_constant, 0.0);
    }
}

#[test]
fn small_gamma_concentrates_near_diagonal() {
    let g = unit(40);
    let mu = bump(g, 0.5, 0.15);
    let c = CostField::from_rule(CostRule::SquaredDistance, g, g).unwrap();
    let sol = solve(&mu, &mu, &c, 0.002, &SolveOptions::default()).unwrap();
    let (_, m2) = sol.plan.marginals();
    let err: f64 = m2
        .density()
        .iter()
        .zip(mu.density())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        * g.h();
    assert!(err < 1e-9);
    let w = sol.plan.cell_weight();
    let near: f64 = (0..40)
        .flat_map(|i| (0..40).map(move |j| (i, j)))
        .filter(|(i, j)| (*i as i64 - *j as i64).abs() <= 2)
        .map(|(i, j)| sol.plan.get(i, j) * w)
        .sum();
    assert!(near > 0.95, "mass near diagonal {near}");
}

#[test]
fn rejects_non_probability_and_bad_gamma() {
    let g = unit(4);
    let half = GridMeasure::uniform(g, 0.5).unwrap();
    let one = GridMeasure::uniform(g, 1.0).unwrap();
    let c = zero_cost(4, 4);
    assert!(matches!(
        solve(&half, &one, &c, 1.0, &SolveOptions::default()),
        Err(Error::InvalidParameter(_))
    ));
    assert!(solve(&one, &one, &c, 0.0, &SolveOptions::default()).is_err());
    let c3 = zero_cost(3, 4);
    assert!(solve(&one, &one, &c3, 1.0, &SolveOptions::default()).is_err());
}

#[test]
fn non_convergence_carries_report() {
    let g = unit(20);
    let mu = bump(g, 0.2, 0.05);
    let nu = bump(g, 0.8, 0.1);
    let c = CostField::from_rule(CostRule::SquaredDistance, g, g).unwrap();
    let opts = SolveOptions {
        max_iter: 3,
        tol: 1e-14,
        ..Default::default()
    };
    match solve(&mu, &nu, &c, 0.01, &opts) {
        Err(Error::NotConverged(report)) => {
            assert_eq!(report.iterations, 3);
            assert_eq!(report.residual_history.len(), 3);
        }
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn direct_mode_fails_loudly_for_tiny_gamma() {
    // far-apart supports: every kernel entry that matters is below exp(-1100)
    let g = unit(8);
    let mu = GridMeasure::normalized(g, (0..8).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()).unwrap();
    let nu = GridMeasure::normalized(g, (0..8).map(|i| if i >= 6 { 1.0 } else { 0.0 }).collect()).unwrap();
    let c = CostField::from_rule(CostRule::SquaredDistance, g, g).unwrap();
    let opts = SolveOptions { mode: Mode::Direct, ..Default::default() };
    let err = solve(&mu, &nu, &c, 5e-4, &opts).unwrap_err();
    assert!(
        matches!(err, Error::DivergedScaling { .. } | Error::Overflow { .. }),
        "{err:?}"
    );
    let opts = SolveOptions { mode: Mode::Log, ..Default::default() };
    assert!(solve(&mu, &nu, &c, 5e-4, &opts).is_ok());
}

#[test]
fn primal_value_examples() {
    let g = unit(5);
    let one = GridMeasure::uniform(g, 1.0).unwrap();
    let plan = product_measure(&one, &one);
    assert!((primal_value(&plan, &zero_cost(5, 5), 0.4) + 0.4).abs() < 1e-15);
    let c1 = CostField::from_values(g, g, alloc::vec![1.0; 25]).unwrap();
    assert!((primal_value(&plan, &c1, 0.4) - 0.6).abs() < 1e-15);
}

#[test]
fn primal_value_matches_independent_sum() {
    let g = Grid1D::new(0.0, 2.0, 3).unwrap();
    let vals = alloc::vec![0.1, 0.0, 0.3, 0.2, 0.05, 0.0, 0.4, 0.1, 0.2];
    let plan = ProductDensity::new(g, g, vals.clone()).unwrap();
    let c = CostField::from_rule(CostRule::SquaredDistance, g, g).unwrap();
    let w = (2.0 / 3.0) * (2.0 / 3.0);
    let mut expected = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let p: f64 = vals[i * 3 + j];
            let d = g.center(i) - g.center(j);
            let ent = if p > 0.0 { p * (p.ln() - 1.0) } else { 0.0 };
            expected += (d * d * p + 0.7 * ent) * w;
        }
    }
    assert!((primal_value(&plan, &c, 0.7) - expected).abs() < 1e-12);
}

#[test]
fn dual_value_examples() {
    let g = unit(4);
    let one = GridMeasure::uniform(g, 1.0).unwrap();
    let k = gibbs_kernel(&zero_cost(4, 4), 0.25).unwrap();
    let s = DualState::from_scalings(alloc::vec![1.0; 4], alloc::vec![1.0; 4]);
    assert!((dual_value(&s, &k, &one, &one) + 0.25).abs() < 1e-15);
    let s2 = DualState::from_scalings(alloc::vec![0.5; 4], alloc::vec![2.0; 4]);
    assert!((dual_value(&s2, &k, &one, &one) - dual_value(&s, &k, &one, &one)).abs() < 1e-15);
    let bad = DualState::from_scalings(alloc::vec![0.0, 1.0, 1.0, 1.0], alloc::vec![1.0; 4]);
    assert_eq!(dual_value(&bad, &k, &one, &one), f64::NEG_INFINITY);
}

#[test]
fn gauge_normalization() {
    let g = unit(4);
    let s = DualState::from_scalings(alloc::vec![2.0; 4], alloc::vec![0.75; 4]);
    let n = normalize_gauge(&s, g.h());
    assert!(n.a.iter().all(|v| (*v - 1.0).abs() < 1e-15));
    assert!(n.b.iter().all(|v| (*v - 1.5).abs() < 1e-15));
    assert_eq!(normalize_gauge(&n, g.h()), n);

    let a: Vec<f64> = (0..7).map(|i| 0.3 + (i as f64 * 1.7).sin().abs()).collect();
    let b: Vec<f64> = (0..5).map(|j| 0.1 + (j as f64 * 0.9).cos().abs()).collect();
    let c = CostField::from_rule(CostRule::SquaredDistance, unit(7), unit(5)).unwrap();
    let k = gibbs_kernel(&c, 0.3).unwrap();
    let s = DualState::from_scalings(a, b);
    let n = normalize_gauge(&s, unit(7).h());
    assert!((n.a.iter().sum::<f64>() * unit(7).h() - 1.0).abs() < 1e-14);
    let before = assemble_plan(&s, &k, Mode::Direct);
    let after = assemble_plan(&n, &k, Mode::Direct);
    for (x, y) in before.values().iter().zip(after.values()) {
        assert!((x - y).abs() <= 1e-14 * x.max(1.0));
    }
}

#[test]
fn optimality_residual_examples() {
    let g = unit(6);
    let one = GridMeasure::uniform(g, 1.0).unwrap();
    let k = gibbs_kernel(&zero_cost(6, 6), 1.0).unwrap();
    let s = DualState::from_scalings(alloc::vec![1.0; 6], alloc::vec![1.0; 6]);
    assert_eq!(optimality_residual(&s, &k, &one, &one), (0.0, 0.0));
    let mut a = alloc::vec![1.0; 6];
    a[1] = 1.2;
    let p = DualState::from_scalings(a, alloc::vec![1.0; 6]);
    assert!(optimality_residual(&p, &k, &one, &one).0 > 0.0);
}

#[test]
fn converged_residuals_within_tol() {
    let g = unit(24);
    let mu = bump(g, 0.3, 0.1);
    let nu = bump(g, 0.65, 0.2);
    let c = CostField::from_rule(CostRule::SquaredDistance, g, g).unwrap();
    let opts = SolveOptions { tol: 1e-10, ..Default::default() };
    let sol = solve(&mu, &nu, &c, 0.05, &opts).unwrap();
    let (r1, r2) = sol.report.optimality_residual;
    assert!(r1 <= 1e-10 && r2 <= 1e-10, "{r1} {r2}");
    assert!(sol.report.gap.abs() <= 1e-6);
}

#[test]
fn potentials_examples() {
    let g = unit(4);
    let one = GridMeasure::uniform(g, 1.0).unwrap();
    let sol = solve(&one, &one, &zero_cost(4, 4), 1.0, &SolveOptions::default()).unwrap();
    assert!(sol.potentials.alpha.iter().chain(&sol.potentials.beta).all(|v| v.abs() < 1e-14));

    let s = DualState::from_scalings(alloc::vec![0.0, 2.0], alloc::vec![1.0, 1.0]);
    let p = potentials_from_state(&s, 0.5);
    assert_eq!(p.alpha[0], f64::NEG_INFINITY);
    assert!((p.alpha[1] - 0.5 * 2f64.ln()).abs() < 1e-15);
}

#[test]
fn potential_sandwich_on_converged_run() {
    let g = unit(30);
    let mu = bump(g, 0.4, 0.1);
    let nu = bump(g, 0.5, 0.3);
    let c = CostField::from_rule(CostRule::SquaredDistance, g, g).unwrap();
    let sol = solve(&mu, &nu, &c, 0.1, &SolveOptions::default()).unwrap();
    let bounds = potential_bounds(&sol.potentials, &sol.state, &sol.kernel, &mu, 0.1, 1e-12);
    assert!(bounds.holds, "{bounds:?}");
    assert!(bounds.log_c_lo <= bounds.log_c_hi);
}

#[test]
fn support_structure() {
    let g = unit(10);
    let mu = bump(g, 0.5, 0.2);
    let mut d: Vec<f64> = bump(g, 0.4, 0.2).density().to_vec();
    for v in d.iter_mut().skip(5) {
        *v = 0.0;
    }
    let nu = GridMeasure::normalized(g, d).unwrap();
    let c = CostField::from_rule(CostRule::SquaredDistance, g, g).unwrap();
    let sol = solve(&mu, &nu, &c, 0.2, &SolveOptions::default()).unwrap();
    assert!(support_check(&sol.plan, &mu, &nu, 1e-300));
    let strictly = solve(&mu, &mu, &c, 0.2, &SolveOptions::default()).unwrap();
    assert!(strictly.plan.values().iter().all(|p| *p > 0.0));
    assert!(!support_check(&strictly.plan, &mu, &nu, 1e-300));
}

#[test]
fn symmetric_problem_transposes_plan() {
    let g1 = unit(9);
    let g2 = Grid1D::new(-0.5, 1.0, 7).unwrap();
    let mu = bump(g1, 0.3, 0.2);
    let nu = bump(g2, 0.1, 0.3);
    let c = CostField::from_rule(CostRule::SquaredDistance, g1, g2).unwrap();
    let opts = SolveOptions { tol: 1e-12, ..Default::default() };
    let fwd = solve(&mu, &nu, &c, 0.1, &opts).unwrap();
    let bwd = solve(&nu, &mu, &c.transpose(), 0.1, &opts).unwrap();
    for (x, y) in fwd.plan.transpose().values().iter().zip(bwd.plan.values()) {
        assert!((x - y).abs() <= 1e-9, "{x} {y}");
    }
}
