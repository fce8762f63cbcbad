use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use rgames_core::games::{gap_bound, total_gap_bound, StochasticOracle};
use rgames_core::solvers::{
    default_reg_step, mixed_vi_schedule, run_mixed_vi, run_reg, run_rgd, theorem_schedule,
    GradientSource, ReferenceKind, RunTrace, Schedule, SolverConfig, Termination,
};
use rgames_core::verify::{
    audit_descent, audit_descent_stochastic, contraction_slope_bound, fit_contraction,
    MIN_AUDIT_SEEDS,
};

use crate::config::{ExperimentConfig, SolverKind};
use crate::error::{CliError, EXIT_AUDIT, EXIT_NUMERICAL, EXIT_OK};
use crate::scenarios::{build_instance, ConstantSource, Instance, Problem};

pub const CSV_HEADER: &str =
    "k,grad_norm,residual,dist_to_ref,step_size,batch_size,cum_queries,wall_nanos";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DEFAULT_OUTPUT_DIR: &str = "rg_output";
pub const OUTPUT_DIR_ENV: &str = "RG_OUTPUT_DIR";
pub const DEFAULT_REG_BUDGET: usize = 200;

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_seed_{seed}.csv")
}

/// Resolved iteration budget and schedules shared by every seed.
#[derive(Debug, Clone)]
pub struct Plan {
    pub solver: SolverKind,
    pub config: SolverConfig,
    pub epsilon: f64,
    pub d0: f64,
    pub distance_bound: Option<f64>,
    pub k_star: Option<usize>,
    pub query_bound: Option<f64>,
}

fn default_epsilon(sigma2: f64) -> f64 {
    if sigma2 > 0.0 {
        1e-2
    } else {
        1e-6
    }
}

/// Budget making the mixed-VI bound `66·e^{−κ²(K−1)/2}·L²·d₀²` at most ε².
pub fn mixed_budget(kappa: f64, lipschitz: f64, d0: f64, epsilon: f64) -> usize {
    let ratio = 66.0 * (lipschitz * d0 / epsilon).powi(2);
    1 + (2.0 * ratio.ln() / (kappa * kappa)).ceil().max(0.0) as usize
}

pub fn plan(config: &ExperimentConfig, instance: &Instance) -> Result<Plan, CliError> {
    let solver = config.solver();
    let (mu, lipschitz) = instance.problem.constants();
    let sigma2 = config.sigma2;
    let epsilon = config.epsilon.unwrap_or_else(|| default_epsilon(sigma2));
    let d0 = instance.initial_distance()?;
    let bound = config
        .distance_bound
        .unwrap_or(if sigma2 > 0.0 { 2.0 * d0 } else { d0 });
    let mut k_star = None;
    let mut query_bound = None;
    let mut distance_bound = None;
    let mut sc = match solver {
        SolverKind::Rgd => {
            if mu > 0.0 {
                let s = theorem_schedule(mu, lipschitz, sigma2, bound, epsilon)?;
                k_star = Some(s.k_star);
                query_bound = s.query_bound;
                distance_bound = Some(bound);
                let k = config.max_iterations.unwrap_or(s.k_star.max(1));
                let mut c = SolverConfig::constant(s.eta, k);
                if s.stochastic {
                    let mut b = s.batch_sizes.clone();
                    b.resize(k, *s.batch_sizes.last().unwrap_or(&1));
                    c.batch_sizes = Schedule::PerIteration(b);
                }
                c
            } else {
                let k = config.max_iterations.ok_or_else(|| {
                    CliError::Config(
                        "mu = 0: set max_iterations and step_size for gradient descent".into(),
                    )
                })?;
                let eta = config
                    .step_size
                    .ok_or_else(|| CliError::Config("mu = 0: step_size is required".into()))?;
                SolverConfig::constant(eta, k)
            }
        }
        SolverKind::Reg => {
            let Problem::Game(g) = &instance.problem else {
                unreachable!("validated")
            };
            SolverConfig::constant(
                default_reg_step(g),
                config.max_iterations.unwrap_or(DEFAULT_REG_BUDGET),
            )
        }
        SolverKind::Mixed => {
            if !(mu > 0.0) {
                return Err(CliError::Config("mixed schedules need mu > 0".into()));
            }
            let k = match config.max_iterations {
                Some(k) => k,
                None => mixed_budget(mu / lipschitz, lipschitz, d0, epsilon),
            };
            k_star = Some(k);
            distance_bound = Some(bound);
            mixed_vi_schedule(mu, lipschitz, sigma2, bound, k)?.config(0)
        }
    };
    if let Some(eta) = config.step_size {
        sc.step_sizes = Schedule::Constant(eta);
    }
    sc.epsilon = if config.stop_early { epsilon } else { 0.0 };
    sc.record_every = config.record_every;
    sc.record_wall_time = config.record_wall_time;
    sc.validate()?;
    Ok(Plan {
        solver,
        config: sc,
        epsilon,
        d0,
        distance_bound,
        k_star,
        query_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditViolation {
    pub seed: Option<u64>,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditSummary {
    /// `deterministic`, `stochastic` or `skipped`.
    pub mode: &'static str,
    /// `pass`, `fail` or `skipped`.
    pub status: &'static str,
    pub reason: Option<String>,
    pub violations: Vec<AuditViolation>,
    pub worst_slack: Option<f64>,
}

impl AuditSummary {
    fn skipped(reason: impl Into<String>) -> Self {
        Self {
            mode: "skipped",
            status: "skipped",
            reason: Some(reason.into()),
            violations: Vec::new(),
            worst_slack: None,
        }
    }

    pub fn failed(&self) -> bool {
        self.status == "fail"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub trace_file: String,
    pub iterations: usize,
    pub terminated_by: &'static str,
    pub terminal_grad_norm: f64,
    pub terminal_residual: f64,
    pub terminal_dist_to_ref: Option<f64>,
    pub total_queries: u64,
    pub fitted_contraction: Option<f64>,
    pub gap_bound: Option<f64>,
    pub total_gap_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: &'static str,
    pub solver: &'static str,
    pub manifold: String,
    pub mu: f64,
    pub lipschitz: f64,
    pub kappa: f64,
    pub mu_source: ConstantSource,
    pub lipschitz_source: ConstantSource,
    pub sigma2: f64,
    pub epsilon: f64,
    pub initial_step_size: f64,
    pub iteration_budget: usize,
    pub k_star: Option<usize>,
    pub query_bound: Option<f64>,
    pub distance_bound: Option<f64>,
    pub d0: f64,
    pub reference_kind: &'static str,
    pub gap_radius: f64,
    pub contraction_slope_bound: Option<f64>,
    pub runs: Vec<SeedSummary>,
    pub total_queries: u64,
    pub mean_terminal_grad_norm: f64,
    pub audit: AuditSummary,
    pub exit_code: i32,
}

/// Traces and summary of one experiment, not yet written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub traces: Vec<(u64, RunTrace)>,
    pub summary: Summary,
    pub plan: Plan,
    pub instance: Instance,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Budget => "budget",
        Termination::EpsilonReached => "epsilon_reached",
        Termination::NumericalFailure { .. } => "numerical_failure",
    }
}

fn run_seed(
    instance: &Instance,
    plan: &Plan,
    sigma2: f64,
    seed: u64,
) -> Result<RunTrace, CliError> {
    let mut sc = plan.config.clone();
    sc.seed = seed;
    let r = Some(&instance.reference);
    Ok(match (&instance.problem, plan.solver) {
        (Problem::Game(g), SolverKind::Rgd) if sigma2 > 0.0 => {
            let mut oracle = StochasticOracle::new(g.clone(), sigma2, seed)?;
            run_rgd(
                g,
                GradientSource::Oracle(&mut oracle),
                &instance.start,
                &sc,
                r,
            )?
        }
        (Problem::Game(g), SolverKind::Rgd) => {
            run_rgd(g, GradientSource::Exact, &instance.start, &sc, r)?
        }
        (Problem::Game(g), SolverKind::Reg) => run_reg(g, &instance.start, &sc, r)?,
        (Problem::Mixed(p), SolverKind::Mixed) => {
            let p = p.clone().with_sigma2(sigma2)?;
            run_mixed_vi(&p, &instance.start, &instance.start_multipliers, &sc, r)?
        }
        _ => unreachable!("solver and scenario checked by validate"),
    })
}

fn audit(
    config: &ExperimentConfig,
    plan: &Plan,
    instance: &Instance,
    traces: &[(u64, RunTrace)],
) -> Result<AuditSummary, CliError> {
    if plan.solver != SolverKind::Rgd {
        return Ok(AuditSummary::skipped(
            "the descent inequality concerns gradient descent runs",
        ));
    }
    if config.record_every != 1 {
        return Ok(AuditSummary::skipped("auditing needs record_every = 1"));
    }
    let (mu, lipschitz) = instance.problem.constants();
    if config.sigma2 == 0.0 {
        let mut violations = Vec::new();
        let mut worst = f64::NEG_INFINITY;
        for (seed, t) in traces {
            let rep = audit_descent(t, mu, lipschitz)?;
            worst = worst.max(rep.worst_slack);
            violations.extend(rep.violations.iter().map(|&k| AuditViolation {
                seed: Some(*seed),
                k,
            }));
        }
        return Ok(AuditSummary {
            mode: "deterministic",
            status: if violations.is_empty() {
                "pass"
            } else {
                "fail"
            },
            reason: None,
            violations,
            worst_slack: worst.is_finite().then_some(worst),
        });
    }
    if traces.len() < MIN_AUDIT_SEEDS {
        return Ok(AuditSummary::skipped(format!(
            "stochastic audit needs at least {MIN_AUDIT_SEEDS} seeds"
        )));
    }
    let all: Vec<RunTrace> = traces.iter().map(|(_, t)| t.clone()).collect();
    let rep = audit_descent_stochastic(&all, mu, lipschitz, config.sigma2)?;
    Ok(AuditSummary {
        mode: "stochastic",
        status: if rep.is_empty() { "pass" } else { "fail" },
        reason: None,
        violations: rep
            .violations
            .iter()
            .map(|&k| AuditViolation { seed: None, k })
            .collect(),
        worst_slack: rep.worst_slack.is_finite().then_some(rep.worst_slack),
    })
}

fn seed_summary(
    instance: &Instance,
    radius: f64,
    seed: u64,
    t: &RunTrace,
) -> Result<SeedSummary, CliError> {
    let last = t.last();
    let (gap, total_gap) = match &instance.problem {
        Problem::Game(g) if t.check().is_ok() => (
            Some(gap_bound(g, &t.terminal_point, radius)?),
            Some(total_gap_bound(g, &t.terminal_point, radius)?),
        ),
        Problem::Mixed(_) if t.check().is_ok() => {
            let r = (last.residual.powi(2) - last.grad_norm.powi(2))
                .max(0.0)
                .sqrt();
            (Some(radius * (last.grad_norm + r)), None)
        }
        _ => (None, None),
    };
    Ok(SeedSummary {
        seed,
        trace_file: trace_file_name(seed),
        iterations: t.iterations(),
        terminated_by: termination_name(t.terminated_by),
        terminal_grad_norm: last.grad_norm,
        terminal_residual: last.residual,
        terminal_dist_to_ref: last.dist_to_ref,
        total_queries: last.cumulative_queries,
        fitted_contraction: fit_contraction(t).ok(),
        gap_bound: gap,
        total_gap_bound: total_gap,
    })
}

/// Runs every seed in memory. Configuration problems surface as errors
/// before anything is written.
pub fn execute(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let instance = build_instance(config)?;
    let plan = plan(config, &instance)?;
    let mut traces = Vec::with_capacity(config.seeds.len());
    for &seed in &config.seeds {
        traces.push((seed, run_seed(&instance, &plan, config.sigma2, seed)?));
    }
    let audit = audit(config, &plan, &instance, &traces)?;
    let runs = traces
        .iter()
        .map(|(s, t)| seed_summary(&instance, config.gap_radius, *s, t))
        .collect::<Result<Vec<_>, _>>()?;
    let numerical = traces.iter().any(|(_, t)| t.check().is_err());
    let exit_code = if numerical {
        EXIT_NUMERICAL
    } else if audit.failed() {
        EXIT_AUDIT
    } else {
        EXIT_OK
    };
    let (mu, lipschitz) = instance.problem.constants();
    let exact_rgd = plan.solver == SolverKind::Rgd
        && config.sigma2 == 0.0
        && config.step_size.is_none()
        && mu > 0.0;
    let summary = Summary {
        scenario: config.scenario.as_str(),
        solver: plan.solver.as_str(),
        manifold: format!("{:?}", instance.problem.manifold()),
        mu,
        lipschitz,
        kappa: mu / lipschitz,
        mu_source: instance.mu_source,
        lipschitz_source: instance.lipschitz_source,
        sigma2: config.sigma2,
        epsilon: plan.epsilon,
        initial_step_size: plan.config.step_sizes.at(0),
        iteration_budget: plan.config.max_iterations,
        k_star: plan.k_star,
        query_bound: plan.query_bound,
        distance_bound: plan.distance_bound,
        d0: plan.d0,
        reference_kind: match instance.reference.kind {
            ReferenceKind::Analytic => "analytic",
            ReferenceKind::PreRun => "pre_run",
        },
        gap_radius: config.gap_radius,
        contraction_slope_bound: exact_rgd.then(|| contraction_slope_bound(mu / lipschitz)),
        total_queries: runs.iter().map(|r| r.total_queries).sum(),
        mean_terminal_grad_norm: runs.iter().map(|r| r.terminal_grad_norm).sum::<f64>()
            / runs.len() as f64,
        runs,
        audit,
        exit_code,
    };
    Ok(Outcome {
        traces,
        summary,
        plan,
        instance,
    })
}

fn float(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(out, "{v:.16e}");
    }
}

/// CSV text of one trace; absent values are empty cells.
pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::with_capacity(96 * (trace.records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &trace.records {
        let _ = write!(out, "{},", r.k);
        float(&mut out, Some(r.grad_norm));
        out.push(',');
        float(&mut out, Some(r.residual));
        out.push(',');
        float(&mut out, r.dist_to_ref);
        out.push(',');
        float(&mut out, r.step_size);
        out.push(',');
        if let Some(b) = r.batch_size {
            let _ = write!(out, "{b}");
        }
        let _ = writeln!(out, ",{},{}", r.cumulative_queries, r.wall_nanos);
    }
    out
}

pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for (seed, t) in &outcome.traces {
        std::fs::write(dir.join(trace_file_name(*seed)), trace_csv(t))?;
    }
    let json =
        serde_json::to_string_pretty(&outcome.summary).map_err(|e| CliError::Io(e.to_string()))?;
    std::fs::write(dir.join(SUMMARY_FILE), json + "\n")?;
    Ok(())
}

/// `env_override` (normally `RG_OUTPUT_DIR`) wins over the config's
/// `output_dir`; the fallback is `./rg_output`.
pub fn output_dir(config: &ExperimentConfig, env_override: Option<PathBuf>) -> PathBuf {
    env_override
        .filter(|p| !p.as_os_str().is_empty())
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// Loads, runs and writes one experiment; returns the process exit code.
pub fn run_experiment(
    path: &Path,
    env_override: Option<PathBuf>,
) -> Result<(i32, PathBuf), CliError> {
    let config = ExperimentConfig::load(path)?;
    let outcome = execute(&config)?;
    let dir = output_dir(&config, env_override);
    write_outputs(&outcome, &dir)?;
    Ok((outcome.exit_code(), dir))
}
