//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are checked as stated and are
//! expected to print FAIL; the process exits nonzero if any other criterion
//! fails or if one of those unexpectedly passes.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use monosplit::diagnostics::{
    energy_forb, energy_strong, estimate_rate, fixed_point_form_check, RateMetric,
};
use monosplit::operators::{box_uniform, l1_norm, ForwardOracle, PointSampler, SplitInclusion};
use monosplit::problems::{
    make_affine_vi, make_cubic, make_problem, make_rotation, make_split_rotation,
    make_strongly_monotone, make_three_operator,
};
use monosplit::splitting::{LinesearchParams, OperatorClass, RhoPolicy};
use monosplit::{
    max_stepsize, run_baseline, run_forb, run_forb3, run_forb_linesearch, run_relaxed_inertial,
    run_stochastic_forb, Baseline, Constants, Method, SolverConfig, SolverRun, Status, StepPlan,
};
use ndarray::{array, Array1};

/// 1c: the measured rate at λ = 0.499 is the spectral radius ≈ 0.7291.
/// 7b: the lipschitz bound at α = 0.2, β = 1 evaluates to 0.2/L.
const KNOWN_UNATTAINABLE: &[&str] = &["1c", "7b"];

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    let mut ok = true;
    let msgs: Vec<String> = parts
        .into_iter()
        .map(|p| match p {
            Ok(m) => m,
            Err(m) => {
                ok = false;
                format!("[x] {m}")
            }
        })
        .collect();
    check(ok, msgs.join("; "))
}

fn dist(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    (a - b).mapv(|v| v * v).sum().sqrt()
}

fn norm(a: &Array1<f64>) -> f64 {
    a.dot(a).sqrt()
}

fn max_dev(a: &[Array1<f64>], b: &[Array1<f64>]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| dist(x, y)).fold(0.0, f64::max)
}

fn fixed(x0: Array1<f64>, lambda: f64, iters: usize) -> SolverConfig {
    SolverConfig::new(x0, StepPlan::constant(lambda))
        .with_max_iters(iters)
        .with_tol(0.0)
}

fn rotation_run(lambda: f64, tseng: bool) -> SolverRun {
    let p = make_rotation(1).unwrap().inclusion;
    let cfg = fixed(array![1.0, 0.0], lambda, 200);
    if tseng {
        run_baseline(Baseline::Tseng, &p, &cfg).unwrap()
    } else {
        run_forb(&p, &cfg).unwrap()
    }
}

fn rate(run: &SolverRun) -> f64 {
    estimate_rate(run, RateMetric::DistToSolution, None)
        .unwrap()
        .rho
}

fn c1a() -> Outcome {
    let rho = rate(&rotation_run(1.0 / 2f64.sqrt(), true));
    check(
        (rho - 0.86603).abs() <= 5e-4,
        format!("tseng rho = {rho:.6}"),
    )
}

fn c1b() -> Outcome {
    let lam: f64 = 0.3;
    let rho = rate(&rotation_run(lam, true));
    let expect = (1.0 - lam * lam + lam.powi(4)).sqrt();
    check(
        (rho - expect).abs() <= 5e-4,
        format!("tseng rho = {rho:.6}, expected {expect:.6}"),
    )
}

fn c1c() -> Outcome {
    let rho = rate(&rotation_run(0.499, false));
    check(
        (0.700..=0.720).contains(&rho),
        format!("forb rho = {rho:.6}, band [0.700, 0.720]"),
    )
}

fn c1d() -> Outcome {
    let p = make_rotation(1).unwrap().inclusion;
    let cfg = SolverConfig::new(array![1.0, 0.0], StepPlan::constant(0.3)).with_max_iters(100_000);
    let run = run_baseline(Baseline::ForwardBackward, &p, &cfg).unwrap();
    let expect = 1.09f64.sqrt();
    let worst = run
        .iterates
        .windows(2)
        .map(|w| (norm(&w[1]) / norm(&w[0]) - expect).abs())
        .fold(0.0, f64::max);
    all(vec![
        check(
            run.status == Status::Diverged,
            format!("status {}", run.status),
        ),
        check(worst <= 1e-9, format!("max growth deviation {worst:.2e}")),
    ])
}

fn c1_runtime(elapsed: Duration) -> Outcome {
    check(
        elapsed < Duration::from_secs(1),
        format!("criterion 1 took {elapsed:?}"),
    )
}

fn c2() -> Outcome {
    let start = Instant::now();
    let problems = [
        make_rotation(2).unwrap(),
        make_affine_vi(13, 4, 0.5).unwrap(),
        make_problem("composite_min", &serde_json::Value::Null, 3).unwrap(),
    ];
    let mut parts = Vec::new();
    for inst in &problems {
        let p = &inst.inclusion;
        let lam = 0.9 / (2.0 * p.constants().l.unwrap());
        let x0 = PointSampler::new(2).sample(p.dim());
        let run = run_forb(p, &fixed(x0, lam, 500)).unwrap();
        let rep = energy_forb(&run, p).unwrap();
        let min_slack = rep
            .per_iteration
            .iter()
            .filter_map(|e| e.slack)
            .fold(f64::INFINITY, f64::min);
        parts.push(check(
            rep.violations == 0 && run.iterations() == 500,
            format!(
                "{}: {} violations, min slack {min_slack:.2e}",
                inst.name, rep.violations
            ),
        ));
    }
    let elapsed = start.elapsed();
    parts.push(check(
        elapsed < Duration::from_secs(5),
        format!("{elapsed:?}"),
    ));
    all(parts)
}

fn c3() -> Outcome {
    let p = make_strongly_monotone(5, 3, 0.5, 2.0).unwrap().inclusion;
    let run = run_forb(&p, &fixed(array![8.0, -6.0, 3.0], 0.2, 400)).unwrap();
    let rep = energy_strong(&run, &p).unwrap();
    let alpha = rep.contraction.unwrap();
    all(vec![
        check((alpha - 1.05).abs() < 1e-15, format!("alpha = {alpha}")),
        check(
            rep.violations == 0,
            format!("{} contraction violations", rep.violations),
        ),
        check(
            rep.envelope_violations == 0,
            format!("{} envelope violations", rep.envelope_violations),
        ),
    ])
}

fn c4() -> Outcome {
    let p = make_cubic().unwrap().inclusion;
    let (delta, sigma) = (0.9, 0.5);
    let ls = LinesearchParams::new(delta, sigma, 10.0);
    let cfg = SolverConfig::new(array![1.0], StepPlan::linesearch(ls))
        .with_max_iters(100_000)
        .with_tol(1e-12);
    let run = run_forb_linesearch(&p, &cfg).unwrap();
    let x = run.final_point[0];
    let mut worst: f64 = f64::NEG_INFINITY;
    for k in 0..run.iterations() {
        let (a, b) = (run.iterates[k][0], run.iterates[k + 1][0]);
        let lam = run.trace[k + 1].lambda;
        worst = worst.max(lam * (b.powi(3) - a.powi(3)).abs() - 0.5 * delta * (b - a).abs());
    }
    let min_lam = run.lambdas().into_iter().fold(f64::INFINITY, f64::min);
    let total: usize = run.backtracks.iter().sum();

    // Affine B = 10x from x0 = 1, λ0 = 1: enumerate the trial indices directly.
    let b10 = ForwardOracle::affine(array![[10.0]], None, "10x").unwrap();
    let affine = SplitInclusion::new(monosplit::operators::zero(1), b10).unwrap();
    let ls = LinesearchParams::new(0.5, 0.5, 1.0).with_rho_policy(RhoPolicy::NeverIncrease);
    let arun = run_forb_linesearch(
        &affine,
        &SolverConfig::new(array![1.0], StepPlan::linesearch(ls)).with_max_iters(1),
    )
    .unwrap();
    let brute = (0..64usize).find(|&i| {
        let lam = 0.5f64.powi(i as i32);
        let x1 = 1.0 - 10.0 * lam;
        lam * (10.0 * x1 - 10.0).abs() <= 0.25 * (x1 - 1.0).abs()
    });
    all(vec![
        check(
            run.status == Status::Converged && x.abs() < 1e-8,
            format!("status {}, x = {x:.2e}", run.status),
        ),
        check(worst <= 1e-12, format!("max test excess {worst:.2e}")),
        check(min_lam > 1e-4, format!("min lambda {min_lam:.3e}")),
        check(total < usize::MAX, format!("{total} backtracks")),
        check(
            brute.is_some() && arun.backtracks == vec![brute.unwrap()],
            format!(
                "affine index {:?} vs brute force {brute:?}",
                arun.backtracks
            ),
        ),
    ])
}

fn c5() -> Outcome {
    let mut parts = Vec::new();
    let sample = |seed, n| PointSampler::new(seed).sample(n);

    // FoRB with B = 0 against the proximal point method.
    let ppa = SplitInclusion::new(l1_norm(3, 0.5).unwrap(), ForwardOracle::zero(3)).unwrap();
    let cfg = fixed(sample(1, 3), 0.7, 100);
    let a = run_forb(&ppa, &cfg).unwrap();
    let b = run_baseline(Baseline::ProximalPoint, &ppa, &cfg).unwrap();
    parts.push(check(
        a.iterates == b.iterates,
        "forb(B=0) = ppa bitwise".into(),
    ));

    // Relaxed inertial at α = 0, β = 1.
    let vi = make_affine_vi(13, 4, 0.5).unwrap();
    let lam = 0.4 / vi.inclusion.constants().l.unwrap();
    let cfg = fixed(sample(2, 4), lam, 100).with_x_minus1(sample(3, 4));
    let forb = run_forb(&vi.inclusion, &cfg).unwrap();
    let relaxed = run_relaxed_inertial(&vi.inclusion, &cfg).unwrap();
    parts.push(check(
        forb.iterates == relaxed.iterates,
        "relaxed(0, 1) = forb bitwise".into(),
    ));

    // forb3 with C = 0.
    let with_zero_c = vi.inclusion.clone().with_c(ForwardOracle::zero(4)).unwrap();
    let f3 = run_forb3(&with_zero_c, &cfg).unwrap();
    parts.push(check(
        forb.iterates == f3.iterates,
        "forb3(C=0) = forb bitwise".into(),
    ));

    // Stochastic with the single part B.
    let parts1 = vec![vi.inclusion.b().clone()];
    let st = run_stochastic_forb(&vi.inclusion, &parts1, &cfg.clone().with_seed(5)).unwrap();
    parts.push(check(
        forb.iterates == st.iterates,
        "stochastic(n=1) = forb bitwise".into(),
    ));

    // forb3 with B = 0 against forward-backward on C.
    let three = make_three_operator(11, 4).unwrap();
    let c = three.inclusion.c().unwrap().clone();
    let no_b = SplitInclusion::new(box_uniform(4, -1.0, 1.0).unwrap(), ForwardOracle::zero(4))
        .unwrap()
        .with_c(c)
        .unwrap();
    let lam = 1.0 / three.inclusion.constants().l2.unwrap();
    let cfg = fixed(sample(4, 4), lam, 100);
    let f3 = run_forb3(&no_b, &cfg).unwrap();
    let fb = run_baseline(Baseline::ForwardBackward, &no_b, &cfg).unwrap();
    let dev = max_dev(&f3.iterates, &fb.iterates);
    parts.push(check(
        dev <= 1e-12,
        format!("forb3(B=0) = fb, max deviation {dev:.1e}"),
    ));

    // Popov base sequence y_k = x_k + λB(x_{k−1}) and x_{k+1} = 2y_{k+1} − y_k.
    let rot = make_rotation(2).unwrap().inclusion;
    let lam = 0.3;
    let cfg = fixed(sample(6, 4), lam, 100).with_x_minus1(sample(7, 4));
    let forb = run_forb(&rot, &cfg).unwrap();
    let popov = run_baseline(Baseline::Popov, &rot, &cfg).unwrap();
    let dx = max_dev(&forb.iterates, &popov.iterates);
    let ys = &popov.aux_iterates;
    let mut dy: f64 = if ys.len() == 101 { 0.0 } else { f64::INFINITY };
    for k in 0..ys.len().min(101) {
        let prev = if k == 0 {
            &forb.x_minus1
        } else {
            &forb.iterates[k - 1]
        };
        let y = &forb.iterates[k] + &(rot.b().eval(prev.view()).unwrap() * lam);
        dy = dy.max(dist(&y, &ys[k]));
        if k > 0 {
            dy = dy.max(dist(&(&ys[k] * 2.0 - &ys[k - 1]), &forb.iterates[k]));
        }
    }
    parts.push(check(
        dx <= 1e-12 && dy <= 1e-12,
        format!("popov <-> forb over 100 iterations, deviations {dx:.1e} / {dy:.1e}"),
    ));
    all(parts)
}

fn c6() -> Outcome {
    let l = 1.7;
    let lc = Constants {
        l: Some(l),
        ..Constants::default()
    };
    let lip = OperatorClass::Lipschitz;
    let coco = OperatorClass::Cocoercive;
    let relaxed = |a, b, class| max_stepsize(Method::RelaxedInertial, &lc, a, b, class).unwrap();
    let mut worst: f64 = 0.0;
    let mut note = |got: f64, want: f64| worst = worst.max((got - want).abs());

    note(
        max_stepsize(Method::Forb, &lc, 0.0, 1.0, lip).unwrap(),
        1.0 / (2.0 * l),
    );

    let lip_points = [(0.0, 1.0), (0.1, 0.8), (0.25, 0.5), (0.05, 0.3), (0.6, 0.9)];
    for (a, b) in lip_points {
        let want = f64::min(
            (2.0 - b - a * b - 2.0 * a) / (2.0 * l),
            (1.0 - a - a * b) / (b * l),
        )
        .max(0.0);
        note(relaxed(a, b, lip), want);
    }
    let infeasible_lip = relaxed(0.6, 0.9, lip) == 0.0;

    let coco_points = [(0.0, 1.0), (0.2, 0.6), (0.3, 0.4), (0.1, 0.9), (0.5, 1.0)];
    for (a, b) in coco_points {
        let want = if a >= (2.0 - b) / (2.0 + b) {
            0.0
        } else {
            f64::min(
                (2.0 - b - a * b + 2.0 * a) / (2.0 * l),
                (1.0 - a + a * b) / (b * l),
            )
        };
        note(relaxed(a, b, coco), want);
    }
    let infeasible_coco = relaxed(0.5, 1.0, coco) == 0.0;

    for a in [0.0, 0.1, 0.2, 0.3] {
        note(relaxed(a, 1.0, lip), (1.0 - 3.0 * a) / (2.0 * l));
        note(relaxed(a, 1.0, coco), (1.0 + a) / (2.0 * l));
    }

    let (l1, l2) = (0.8, 3.1);
    let c3 = Constants {
        l1: Some(l1),
        l2: Some(l2),
        ..Constants::default()
    };
    note(
        max_stepsize(Method::Forb3, &c3, 0.0, 1.0, lip).unwrap(),
        2.0 / (4.0 * l1 + l2),
    );

    all(vec![
        check(worst <= 1e-15, format!("max deviation {worst:.1e}")),
        check(
            infeasible_lip && infeasible_coco,
            "infeasible points give 0".into(),
        ),
    ])
}

fn c7a() -> Outcome {
    let l = 2.0;
    let c = Constants {
        l: Some(l),
        ..Constants::default()
    };
    let with = max_stepsize(
        Method::RelaxedInertial,
        &c,
        0.2,
        1.0,
        OperatorClass::Cocoercive,
    )
    .unwrap();
    let without = max_stepsize(
        Method::RelaxedInertial,
        &c,
        0.0,
        1.0,
        OperatorClass::Cocoercive,
    )
    .unwrap();
    check(
        (with - 0.6 / l).abs() <= 1e-15 && (without - 0.5 / l).abs() <= 1e-15 && with > without,
        format!("cocoercive: {:.4}/L vs {:.4}/L", with * l, without * l),
    )
}

fn c7b() -> Outcome {
    let l = 2.0;
    let c = Constants {
        l: Some(l),
        ..Constants::default()
    };
    let with = max_stepsize(
        Method::RelaxedInertial,
        &c,
        0.2,
        1.0,
        OperatorClass::Lipschitz,
    )
    .unwrap();
    let without = max_stepsize(
        Method::RelaxedInertial,
        &c,
        0.0,
        1.0,
        OperatorClass::Lipschitz,
    )
    .unwrap();
    check(
        (with - 0.3 / l).abs() <= 1e-15 && with < without,
        format!(
            "lipschitz: {:.4}/L (stated 0.3/L) vs {:.4}/L",
            with * l,
            without * l
        ),
    )
}

fn c8() -> Outcome {
    let inst = make_three_operator(11, 4).unwrap();
    let p = &inst.inclusion;
    let (l1, l2) = (p.constants().l1.unwrap(), p.constants().l2.unwrap());
    let lam = 0.9 * 2.0 / (4.0 * l1 + l2);
    let cfg = SolverConfig::new(Array1::zeros(4), StepPlan::constant(lam))
        .with_max_iters(10_000)
        .with_tol(1e-12);
    let run = run_forb3(p, &cfg).unwrap();
    let d = dist(&run.final_point, p.reference_solution().unwrap());
    all(vec![
        check(
            lam > 1.0 / (2.0 * (l1 + l2)),
            format!("lambda {lam:.4} > 1/(2(L1+L2)) with L1 = {l1}, L2 = {l2}"),
        ),
        check(
            d < 1e-7 && run.iterations() <= 10_000,
            format!("dist {d:.1e} after {} iterations", run.iterations()),
        ),
    ])
}

fn c9() -> Outcome {
    let inst = make_split_rotation(1).unwrap();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for seed in 0..20u64 {
        let cfg = SolverConfig::new(array![1.0, 0.0], StepPlan::constant(0.2))
            .with_seed(seed)
            .with_max_iters(5000)
            .with_tol(1e-6);
        let run = run_stochastic_forb(&inst.inclusion, &inst.parts, &cfg).unwrap();
        let r = run.final_residual().unwrap_or(f64::INFINITY);
        worst = worst.max(r);
        failures += usize::from(r.is_nan() || r >= 1e-6);
    }
    let cfg = fixed(array![1.0, 0.0], 0.2, 300).with_seed(42);
    let a = run_stochastic_forb(&inst.inclusion, &inst.parts, &cfg).unwrap();
    let b = run_stochastic_forb(&inst.inclusion, &inst.parts, &cfg).unwrap();
    let same =
        a.trace == b.trace && a.iterates == b.iterates && a.sampled_indices == b.sampled_indices;
    all(vec![
        check(
            failures == 0,
            format!("{failures}/20 seeds missed, worst residual {worst:.3e}"),
        ),
        check(same, "seed 42 reruns bit-identical".into()),
    ])
}

fn c10() -> Outcome {
    let p = make_rotation(1).unwrap().inclusion;
    let x0 = array![1.0, 0.0];
    let chk = fixed_point_form_check(&p, 0.3, x0.view(), x0.view(), 100).unwrap();
    check(
        chk.max_deviation <= 1e-12,
        format!("max deviation {:.1e}", chk.max_deviation),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> =
        vec![("1a", c1a()), ("1b", c1b()), ("1c", c1c()), ("1d", c1d())];
    results.push(("1-runtime", c1_runtime(start.elapsed())));
    results.extend([
        ("2", c2()),
        ("3", c3()),
        ("4", c4()),
        ("5", c5()),
        ("6", c6()),
        ("7a", c7a()),
        ("7b", c7b()),
        ("8", c8()),
        ("9", c9()),
        ("10", c10()),
    ]);

    let mut unexpected = 0;
    for (id, outcome) in &results {
        let known = KNOWN_UNATTAINABLE.contains(id);
        match outcome {
            Ok(msg) => {
                println!("PASS {id}: {msg}");
                if known {
                    println!("     {id} is listed as unattainable but passed; update the list");
                    unexpected += 1;
                }
            }
            Err(msg) => {
                let tag = if known { " (known unattainable)" } else { "" };
                println!("FAIL {id}{tag}: {msg}");
                unexpected += usize::from(!known);
            }
        }
    }
    let passed = results.iter().filter(|(_, o)| o.is_ok()).count();
    println!(
        "acceptance: {passed}/{} passed in {:?}",
        results.len(),
        start.elapsed()
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
