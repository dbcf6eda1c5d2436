use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use monosplit::diagnostics::{energy_forb, estimate_rate, RateMetric};
use monosplit::problems::{make_problem, ProblemInstance};
use monosplit::splitting::TraceRow;
use monosplit::{problem_bound, run_method, Error, Method, SolverConfig, SolverRun, Vector};

use crate::config::{ExperimentConfig, MethodSpec};

pub const CSV_HEADER: &str =
    "k,lambda,residual,dist_to_solution,energy,forward_calls,resolvent_calls";
pub const SEED_OVERRIDE_VAR: &str = "MONOSPLIT_SEED_OVERRIDE";

#[derive(Debug)]
pub enum CliError {
    /// A method failed with an internal error; reports were still written.
    Solver(usize),
    Parse(String),
    UnknownName(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) => 1,
            CliError::Parse(_) => 2,
            CliError::UnknownName(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Solver(n) => write!(f, "{n} method(s) failed; see the report"),
            CliError::Parse(m) => write!(f, "invalid config: {m}"),
            CliError::UnknownName(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub quiet: bool,
    pub seed_override: Option<String>,
}

/// Validated experiment, ready to run.
struct Plan {
    instance: ProblemInstance,
    x0: Vector,
    methods: Vec<(Method, MethodSpec)>,
    trace_paths: Vec<PathBuf>,
    report_path: PathBuf,
    iterate_stride: usize,
}

fn load(config_path: &Path, opts: &RunOptions) -> Result<Plan, CliError> {
    let text = fs::read_to_string(config_path).map_err(|e| io_err(config_path, e))?;
    let cfg: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    let seed_override = opts
        .seed_override
        .as_deref()
        .map(|s| {
            s.trim().parse::<u64>().map_err(|_| {
                CliError::Parse(format!(
                    "{SEED_OVERRIDE_VAR} must be an unsigned integer, got `{s}`"
                ))
            })
        })
        .transpose()?;

    if cfg.methods.is_empty() {
        return Err(CliError::UnknownName("config lists no methods".into()));
    }
    let mut methods = Vec::with_capacity(cfg.methods.len());
    for mut spec in cfg.methods {
        let method: Method = spec
            .alg
            .parse()
            .map_err(|e: Error| CliError::UnknownName(e.to_string()))?;
        if let Some(seed) = seed_override {
            spec.seed = seed;
        }
        methods.push((method, spec));
    }
    let seed = seed_override.unwrap_or(cfg.problem.seed);
    let instance =
        make_problem(&cfg.problem.name, &cfg.problem.params, seed).map_err(|e| match e {
            Error::Config(m) => CliError::UnknownName(m),
            other => CliError::Parse(other.to_string()),
        })?;

    let n = instance.dim();
    let x0 = match cfg.x0 {
        Some(v) if v.len() == n => Vector::from(v),
        Some(v) => {
            return Err(CliError::Parse(format!(
                "x0 has length {}, problem dimension is {n}",
                v.len()
            )))
        }
        None => {
            let mut e1 = Vector::zeros(n);
            e1[0] = 1.0;
            e1
        }
    };

    let out = &cfg.outputs;
    if out.iterate_stride == 0 {
        return Err(CliError::Parse(
            "outputs.iterate_stride must be at least 1".into(),
        ));
    }
    if methods.len() > 1 && !out.trace_path.contains("{method}") {
        return Err(CliError::Parse(
            "outputs.trace_path needs a `{method}` placeholder when several methods run".into(),
        ));
    }
    let resolve = |p: &str| match &opts.out_dir {
        Some(dir) => dir.join(p),
        None => PathBuf::from(p),
    };
    let trace_paths = methods
        .iter()
        .enumerate()
        .map(|(i, (m, _))| resolve(&out.trace_path.replace("{method}", &format!("{i}_{m}"))))
        .collect();
    Ok(Plan {
        instance,
        x0,
        methods,
        trace_paths,
        report_path: resolve(&out.report_path),
        iterate_stride: out.iterate_stride,
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            num(r.lambda),
            opt(r.residual),
            opt(r.dist_to_solution),
            opt(r.energy),
            r.forward_calls,
            r.resolvent_calls
        );
    }
    out
}

fn report_entry(method: Method, spec: &MethodSpec, plan: &Plan, run: &SolverRun) -> Value {
    let p = &plan.instance.inclusion;
    let metric = if p.reference_solution().is_some() {
        RateMetric::DistToSolution
    } else {
        RateMetric::NaturalResidual
    };
    let rate = estimate_rate(run, metric, None).ok();
    let energy = matches!(method, Method::Forb | Method::ForbLinesearch)
        .then(|| energy_forb(run, p).ok())
        .flatten()
        .map(|r| r.violations);
    let bound = problem_bound(method, p, &plan.instance.parts, spec.alpha, spec.beta).ok();
    json!({
        "method": method,
        "status": run.status,
        "iterations": run.iterations(),
        "final_residual": run.final_residual(),
        "rate_estimate": rate,
        "energy_violations": energy,
        "max_stepsize_bound": bound,
        "oracle_calls": run.oracle_calls,
        "warnings": run.warnings,
    })
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn run_experiment(config_path: &Path, opts: &RunOptions) -> Result<(), CliError> {
    let plan = load(config_path, opts)?;
    let p = &plan.instance.inclusion;
    let mut results = Vec::with_capacity(plan.methods.len());
    let mut failed = 0;
    for (i, (method, spec)) in plan.methods.iter().enumerate() {
        let cfg = SolverConfig::new(plan.x0.clone(), spec.step.plan())
            .with_max_iters(spec.max_iters)
            .with_tol(spec.tol)
            .with_inertia(spec.alpha, spec.beta)
            .with_seed(spec.seed)
            .with_energy(true)
            .with_iterate_stride(Some(plan.iterate_stride));
        match run_method(*method, p, &plan.instance.parts, &cfg) {
            Ok(run) => {
                write_atomic(&plan.trace_paths[i], &trace_csv(&run.trace))?;
                let entry = report_entry(*method, spec, &plan, &run);
                if !opts.quiet {
                    let rate = entry["rate_estimate"]["rho"]
                        .as_f64()
                        .map_or("-".into(), |r| format!("{r:.4}"));
                    println!(
                        "{i}_{method}: {} after {} iterations, residual {}, rate {rate}",
                        run.status,
                        run.iterations(),
                        run.final_residual()
                            .map_or("-".into(), |r| format!("{r:.3e}")),
                    );
                    for w in &run.warnings {
                        println!("  warning: {w}");
                    }
                }
                results.push(entry);
            }
            Err(e) => {
                failed += 1;
                eprintln!("{i}_{method}: {e}");
                results.push(json!({"method": method, "status": "error", "error": e.to_string()}));
            }
        }
    }
    let report = json!({
        "problem": {
            "name": plan.instance.name,
            "seed": plan.instance.generator_seed,
            "dim": plan.instance.dim(),
        },
        "results": results,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_atomic(&plan.report_path, &text)?;
    if failed > 0 {
        return Err(CliError::Solver(failed));
    }
    Ok(())
}
