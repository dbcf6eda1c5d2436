use approx::assert_abs_diff_eq;
use monosplit::diagnostics::{energy_forb, fit_rate, lprime, RateMetric};
use monosplit::operators::{
    box_uniform, l1_norm, moreau_conjugate, skew_operator, ForwardOracle, PointSampler,
    SplitInclusion,
};
use monosplit::problems::{make_affine_vi, make_split_rotation};
use monosplit::splitting::OperatorClass;
use monosplit::{
    max_stepsize, run_baseline, run_forb, run_relaxed_inertial, run_stochastic_forb, Baseline,
    Constants, Method, SolverConfig, StepPlan,
};
use ndarray::{Array1, Array2};
use proptest::prelude::*;

fn vec_of(n: usize) -> impl Strategy<Value = Array1<f64>> {
    prop::collection::vec(-10.0..10.0f64, n).prop_map(Array1::from)
}

fn fixed(x0: Array1<f64>, lambda: f64, iters: usize) -> SolverConfig {
    SolverConfig::new(x0, StepPlan::constant(lambda))
        .with_max_iters(iters)
        .with_tol(0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resolvents_are_firmly_nonexpansive(x in vec_of(4), y in vec_of(4), lam in 0.01..5.0f64, w in 0.0..3.0f64) {
        for a in [l1_norm(4, w).unwrap(), box_uniform(4, -1.0, 2.0).unwrap()] {
            let (jx, jy) = (a.eval(lam, x.view()).unwrap(), a.eval(lam, y.view()).unwrap());
            let d = &jx - &jy;
            prop_assert!(d.dot(&d) <= d.dot(&(&x - &y)) + 1e-10);
        }
    }

    #[test]
    fn moreau_decomposition(x in vec_of(3), w in 0.0..3.0f64) {
        let f = l1_norm(3, w).unwrap();
        let conj = moreau_conjugate(&f);
        let sum = f.eval(1.0, x.view()).unwrap() + conj.eval(1.0, x.view()).unwrap();
        for (s, v) in sum.iter().zip(x.iter()) {
            assert_abs_diff_eq!(*s, *v, epsilon = 1e-12);
        }
    }

    #[test]
    fn skew_operator_is_skew(entries in prop::collection::vec(-3.0..3.0f64, 6), z in vec_of(5)) {
        let k = Array2::from_shape_vec((2, 3), entries).unwrap();
        let b = skew_operator(k);
        prop_assert!(z.dot(&b.eval(z.view()).unwrap()).abs() <= 1e-10 * (1.0 + z.dot(&z)));
    }

    #[test]
    fn lprime_is_continuous_at_half_l(l in 0.1..10.0f64) {
        let at = lprime(OperatorClass::Cocoercive, l, 0.5 * l);
        let below = lprime(OperatorClass::Cocoercive, l, 0.5 * l * (1.0 - 1e-12));
        prop_assert!((at - 0.5 * l).abs() <= 1e-15 * l);
        prop_assert!((below - at).abs() <= 1e-10 * l);
    }

    #[test]
    fn geometric_fit_recovers_ratio(rho in 0.05..0.99f64, c in 0.1..10.0f64) {
        let v: Vec<f64> = (0..50).map(|k| c * rho.powi(k)).collect();
        let est = fit_rate(&v, 0..=49, RateMetric::DistToSolution).unwrap();
        assert_abs_diff_eq!(est.rho, rho, epsilon = 1e-12);
        prop_assert!(est.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn relaxed_bound_reduces_to_forb(l in 0.01..100.0f64) {
        let c = Constants { l: Some(l), ..Constants::default() };
        let forb = max_stepsize(Method::Forb, &c, 0.0, 1.0, OperatorClass::Lipschitz).unwrap();
        for class in [OperatorClass::Lipschitz, OperatorClass::Cocoercive] {
            let relaxed = max_stepsize(Method::RelaxedInertial, &c, 0.0, 1.0, class).unwrap();
            prop_assert_eq!(relaxed, forb);
        }
    }

    #[test]
    fn relaxed_bound_never_negative(a in 0.0..0.999f64, b in 0.001..1.0f64, l in 0.1..10.0f64) {
        let c = Constants { l: Some(l), ..Constants::default() };
        for class in [OperatorClass::Lipschitz, OperatorClass::Cocoercive] {
            prop_assert!(max_stepsize(Method::RelaxedInertial, &c, a, b, class).unwrap() >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_has_no_violations_on_affine_problems(
        seed in 0u64..1000,
        n in 2usize..6,
        w in 0.0..1.0f64,
        frac in 0.05..0.99f64,
    ) {
        let p = make_affine_vi(seed, n, w).unwrap().inclusion;
        let lam = frac / (2.0 * p.constants().l.unwrap());
        let x0 = PointSampler::new(seed + 1).sample(n);
        let run = run_forb(&p, &fixed(x0, lam, 200)).unwrap();
        let rep = energy_forb(&run, &p).unwrap();
        prop_assert_eq!(rep.violations, 0);
        prop_assert_eq!(rep.lower_bound_violations, 0);
    }

    #[test]
    fn forb_with_zero_forward_is_proximal_point(x0 in vec_of(3), lam in 0.01..4.0f64, w in 0.0..2.0f64) {
        let p = SplitInclusion::new(l1_norm(3, w).unwrap(), ForwardOracle::zero(3)).unwrap();
        let cfg = fixed(x0, lam, 30);
        let a = run_forb(&p, &cfg).unwrap();
        let b = run_baseline(Baseline::ProximalPoint, &p, &cfg).unwrap();
        prop_assert_eq!(a.iterates, b.iterates);
    }

    #[test]
    fn relaxed_without_inertia_is_forb(seed in 0u64..1000, frac in 0.05..0.99f64) {
        let p = make_affine_vi(seed, 3, 0.7).unwrap().inclusion;
        let lam = frac / (2.0 * p.constants().l.unwrap());
        let cfg = fixed(PointSampler::new(seed).sample(3), lam, 50)
            .with_x_minus1(PointSampler::new(seed + 7).sample(3));
        prop_assert_eq!(run_forb(&p, &cfg).unwrap().iterates, run_relaxed_inertial(&p, &cfg).unwrap().iterates);
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let inst = make_split_rotation(2).unwrap();
        let cfg = fixed(PointSampler::new(seed).sample(4), 0.2, 60).with_seed(seed);
        let a = run_stochastic_forb(&inst.inclusion, &inst.parts, &cfg).unwrap();
        let b = run_stochastic_forb(&inst.inclusion, &inst.parts, &cfg).unwrap();
        prop_assert_eq!(&a.trace, &b.trace);
        prop_assert_eq!(&a.sampled_indices, &b.sampled_indices);
        prop_assert!(a.sampled_indices.iter().all(|&i| i < 2));
    }
}
