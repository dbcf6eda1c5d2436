use monosplit::diagnostics::{
    energy_forb, energy_strong, estimate_rate, fixed_point_form_check, strong_contraction,
    RateMetric,
};
use monosplit::operators::{quadratic, ForwardOracle, SplitInclusion};
use monosplit::problems::{make_rotation, make_strongly_monotone};
use monosplit::{run_baseline, run_forb, Baseline, Error, SolverConfig, StepPlan};
use ndarray::{array, Array1};

fn dist(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    (a - b).mapv(|v| v * v).sum().sqrt()
}

#[test]
fn energy_with_zero_forward_is_monotone() {
    let a = quadratic(array![[1.0, 0.0], [0.0, 3.0]], None).unwrap();
    let p = SplitInclusion::new(a, ForwardOracle::zero(2))
        .unwrap()
        .with_reference_solution(array![0.0, 0.0])
        .unwrap();
    let cfg = SolverConfig::new(array![2.0, -1.0], StepPlan::constant(0.7))
        .with_max_iters(40)
        .with_tol(0.0);
    let run = run_forb(&p, &cfg).unwrap();
    let rep = energy_forb(&run, &p).unwrap();
    assert_eq!(rep.violations, 0);
    for (k, e) in rep.per_iteration.iter().enumerate() {
        let x = &run.iterates[k];
        let prev = if k == 0 {
            &run.x_minus1
        } else {
            &run.iterates[k - 1]
        };
        let expect = x.dot(x) + 0.5 * dist(x, prev).powi(2);
        assert!((e.phi - expect).abs() <= 1e-14 * (1.0 + expect));
    }
    for w in rep.per_iteration.windows(2) {
        assert!(w[1].phi <= w[0].phi);
    }
}

#[test]
fn energy_on_rotation() {
    let p = make_rotation(1).unwrap().inclusion;
    let cfg = SolverConfig::new(array![1.0, 0.0], StepPlan::constant(0.2))
        .with_max_iters(500)
        .with_tol(0.0);
    let rep = energy_forb(&run_forb(&p, &cfg).unwrap(), &p).unwrap();
    assert_eq!(rep.violations, 0);
    assert_eq!(rep.lower_bound_violations, 0);
    assert!((rep.epsilon_used - 0.3).abs() < 1e-15);
    assert_eq!(rep.per_iteration.len(), 501);
}

#[test]
fn energy_vanishes_at_the_solution() {
    let p = make_rotation(1).unwrap().inclusion;
    let cfg = SolverConfig::new(array![0.0, 0.0], StepPlan::constant(0.2))
        .with_max_iters(20)
        .with_tol(0.0);
    let rep = energy_forb(&run_forb(&p, &cfg).unwrap(), &p).unwrap();
    assert!(rep.per_iteration.iter().all(|e| e.phi == 0.0));
}

#[test]
fn energy_requires_solution_and_iterates() {
    let a = quadratic(array![[1.0]], None).unwrap();
    let p = SplitInclusion::new(a, ForwardOracle::zero(1)).unwrap();
    let run = run_forb(
        &p,
        &SolverConfig::new(array![1.0], StepPlan::constant(0.5)).with_max_iters(3),
    )
    .unwrap();
    assert!(matches!(
        energy_forb(&run, &p),
        Err(Error::DiagnosticUnavailable(_))
    ));

    let rot = make_rotation(1).unwrap().inclusion;
    let strided = SolverConfig::new(array![1.0, 0.0], StepPlan::constant(0.2))
        .with_max_iters(10)
        .with_iterate_stride(Some(2));
    let run = run_forb(&rot, &strided).unwrap();
    assert!(matches!(
        energy_forb(&run, &rot),
        Err(Error::DiagnosticUnavailable(_))
    ));
    let tseng = run_baseline(
        Baseline::Tseng,
        &rot,
        &SolverConfig::new(array![1.0, 0.0], StepPlan::constant(0.2)).with_max_iters(3),
    )
    .unwrap();
    assert!(matches!(
        energy_forb(&tseng, &rot),
        Err(Error::DiagnosticUnavailable(_))
    ));
}

#[test]
fn energy_strong_example() {
    let p = make_strongly_monotone(5, 3, 0.5, 2.0).unwrap().inclusion;
    let cfg = SolverConfig::new(array![5.0, -3.0, 1.0], StepPlan::constant(0.2))
        .with_max_iters(300)
        .with_tol(0.0);
    let run = run_forb(&p, &cfg).unwrap();
    let rep = energy_strong(&run, &p).unwrap();
    assert!((rep.contraction.unwrap() - 1.05).abs() < 1e-15);
    assert_eq!(rep.violations, 0);
    assert_eq!(rep.lower_bound_violations, 0);
    assert_eq!(rep.envelope_violations, 0);
    assert_eq!(
        strong_contraction(0.5, 0.2, 2.0).1,
        rep.contraction.unwrap()
    );
}

#[test]
fn tseng_rotation_rates() {
    let p = make_rotation(1).unwrap().inclusion;
    for (lam, expect) in [
        (1.0 / 2f64.sqrt(), 3f64.sqrt() / 2.0),
        (0.3, 0.9181f64.sqrt()),
    ] {
        let cfg = SolverConfig::new(array![1.0, 0.0], StepPlan::constant(lam))
            .with_max_iters(200)
            .with_tol(0.0);
        let run = run_baseline(Baseline::Tseng, &p, &cfg).unwrap();
        let est = estimate_rate(&run, RateMetric::DistToSolution, Some(10..=200)).unwrap();
        assert!((est.rho - expect).abs() < 1e-6, "{} vs {expect}", est.rho);
        assert!(est.r_squared > 0.999_999);
        let by_residual = estimate_rate(&run, RateMetric::NaturalResidual, None).unwrap();
        assert!((by_residual.rho - expect).abs() < 1e-6);
        assert_eq!(by_residual.window, (10, 200));
    }
}

#[test]
fn fixed_point_form_matches_forb() {
    let p = make_rotation(1).unwrap().inclusion;
    let chk = fixed_point_form_check(
        &p,
        0.3,
        array![1.0, 0.0].view(),
        array![0.5, 0.5].view(),
        100,
    )
    .unwrap();
    assert!(chk.max_deviation <= 1e-12);
    assert!(chk.max_aux_deviation <= 1e-12);

    let a = quadratic(array![[2.0]], None).unwrap();
    let ppa = SplitInclusion::new(a, ForwardOracle::zero(1)).unwrap();
    let chk =
        fixed_point_form_check(&ppa, 1.0, array![3.0].view(), array![3.0].view(), 30).unwrap();
    assert_eq!(chk.max_deviation, 0.0);
    assert!(matches!(
        fixed_point_form_check(&p, 0.3, array![1.0].view(), array![1.0].view(), 5),
        Err(Error::Shape(_))
    ));
}
