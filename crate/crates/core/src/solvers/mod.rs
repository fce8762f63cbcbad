//! First-order solvers for monotone Riemannian games: (stochastic)
//! Riemannian gradient descent with curvature-independent schedules,
//! Riemannian extragradient, and projected descent for mixed variational
//! inequalities.

mod lagrangian;
mod mixed;
mod reg;
mod rgd;
mod schedule;

pub use lagrangian::{constrained_game_to_mixed_vi, PlayerConstraint};
pub use mixed::{
    affine_mixed_vi, project, run_mixed_vi, tangent_residual, Constraint, MixedOperator,
    MixedViProblem, ACTIVE_TOLERANCE, FEASIBILITY_TOLERANCE,
};
pub use reg::{default_reg_step, run_reg};
pub use rgd::{rgd_step, run_rgd, GradientSource};
pub use schedule::{mixed_vi_schedule, theorem_schedule, MixedViSchedule, TheoremSchedule};

use std::time::Instant;

use crate::error::{Error, Result};
use crate::manifold::Point;

/// A per-iteration parameter: constant, or one value per iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule<T> {
    Constant(T),
    PerIteration(Vec<T>),
}

impl<T: Copy> Schedule<T> {
    /// Value at iteration `k`; per-iteration lists must cover `k`.
    pub fn at(&self, k: usize) -> T {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::PerIteration(v) => v[k],
        }
    }

    fn values(&self, len: usize) -> Result<Vec<T>> {
        match self {
            Schedule::Constant(v) => Ok(vec![*v; len]),
            Schedule::PerIteration(v) if v.len() >= len => Ok(v[..len].to_vec()),
            Schedule::PerIteration(v) => Err(Error::InvalidConfig(format!(
                "schedule has {} entries, need {len}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Iteration budget K.
    pub max_iterations: usize,
    pub step_sizes: Schedule<f64>,
    /// Mini-batch sizes; ignored for exact gradients.
    pub batch_sizes: Schedule<u64>,
    /// Stop once the monitored residual is at most this value (0 disables).
    pub epsilon: f64,
    pub seed: u64,
    /// Trace stride; the final iterate is always recorded.
    pub record_every: usize,
    /// Reject steps above the descent-lemma bound `2μ/L²`.
    pub enforce_step_bound: bool,
    /// Fill `wall_nanos`; off by default so traces are reproducible.
    pub record_wall_time: bool,
}

impl SolverConfig {
    pub fn constant(eta: f64, max_iterations: usize) -> Self {
        Self {
            max_iterations,
            step_sizes: Schedule::Constant(eta),
            batch_sizes: Schedule::Constant(1),
            epsilon: 0.0,
            seed: 0,
            record_every: 1,
            enforce_step_bound: true,
            record_wall_time: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig(
                "record_every must be at least 1".into(),
            ));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig(format!("epsilon = {}", self.epsilon)));
        }
        for (k, eta) in self
            .step_sizes
            .values(self.max_iterations)?
            .into_iter()
            .enumerate()
        {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(Error::InvalidConfig(format!("step size {eta} at k = {k}")));
            }
        }
        if let Some(k) = self
            .batch_sizes
            .values(self.max_iterations)?
            .iter()
            .position(|&m| m == 0)
        {
            return Err(Error::InvalidConfig(format!("zero batch size at k = {k}")));
        }
        Ok(())
    }

    pub(crate) fn check_step_bound(&self, k: usize, mu: f64, lipschitz: f64) -> Result<()> {
        if !self.enforce_step_bound {
            return Ok(());
        }
        let bound = 2.0 * mu / (lipschitz * lipschitz);
        let eta = self.step_sizes.at(k);
        if eta > bound * (1.0 + 1e-12) {
            return Err(Error::StepSizeTooLarge { k, eta, bound });
        }
        Ok(())
    }
}

/// One trace row. `step_size`/`batch_size` are those used to leave iterate
/// `k`; they are absent on the terminal row.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    /// Exact `‖F(y_k)‖` (manifold block only for mixed problems).
    pub grad_norm: f64,
    /// Monitored residual: `grad_norm`, or `sqrt(‖F_M‖² + r_tan²)` for mixed
    /// problems.
    pub residual: f64,
    pub dist_to_ref: Option<f64>,
    pub step_size: Option<f64>,
    pub batch_size: Option<u64>,
    /// Gradient queries issued before iterate `k`.
    pub cumulative_queries: u64,
    pub wall_nanos: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Budget,
    EpsilonReached,
    /// Non-finite or failed evaluation while producing iterate `k`.
    NumericalFailure {
        k: usize,
    },
}

/// Where a reference solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Analytic,
    PreRun,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub point: Point,
    /// Euclidean block for mixed problems.
    pub multipliers: Vec<f64>,
    pub kind: ReferenceKind,
}

impl Reference {
    pub fn analytic(point: Point) -> Self {
        Self {
            point,
            multipliers: Vec::new(),
            kind: ReferenceKind::Analytic,
        }
    }

    pub fn pre_run(point: Point) -> Self {
        Self {
            point,
            multipliers: Vec::new(),
            kind: ReferenceKind::PreRun,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub terminal_point: Point,
    /// Euclidean block of the terminal iterate (mixed problems only).
    pub terminal_multipliers: Vec<f64>,
    pub terminated_by: Termination,
    pub reference_kind: Option<ReferenceKind>,
    pub record_every: usize,
    /// Total queries issued over the run.
    pub total_queries: u64,
}

impl RunTrace {
    pub fn last(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("traces hold at least one record")
    }

    /// Iterations actually performed.
    pub fn iterations(&self) -> usize {
        self.last().k
    }

    /// `Err(NumericalFailure)` when the run aborted.
    pub fn check(&self) -> Result<()> {
        match self.terminated_by {
            Termination::NumericalFailure { k } => Err(Error::NumericalFailure(k)),
            _ => Ok(()),
        }
    }
}

/// Shared bookkeeping for the iteration loops.
pub(crate) struct Recorder {
    records: Vec<TraceRecord>,
    stride: usize,
    start: Option<Instant>,
    pending: Option<TraceRecord>,
}

impl Recorder {
    pub(crate) fn new(config: &SolverConfig) -> Self {
        Self {
            records: Vec::new(),
            stride: config.record_every,
            start: config.record_wall_time.then(Instant::now),
            pending: None,
        }
    }

    pub(crate) fn nanos(&self) -> u64 {
        self.start.map_or(0, |s| s.elapsed().as_nanos() as u64)
    }

    /// Stores a row; rows off the stride are kept only until the next one,
    /// so the last row seen can still be emitted as the terminal record.
    pub(crate) fn push(&mut self, mut rec: TraceRecord) {
        rec.wall_nanos = self.nanos();
        if rec.k % self.stride == 0 {
            self.records.push(rec);
            self.pending = None;
        } else {
            self.pending = Some(rec);
        }
    }

    /// Marks the most recent row terminal (no outgoing step) and returns
    /// the rows.
    pub(crate) fn finish(mut self) -> Vec<TraceRecord> {
        if let Some(p) = self.pending.take() {
            self.records.push(p);
        }
        if let Some(last) = self.records.last_mut() {
            last.step_size = None;
            last.batch_size = None;
        }
        self.records
    }

    /// Attaches the outgoing step to the latest row.
    pub(crate) fn set_step(&mut self, eta: f64, batch: Option<u64>) {
        let target = match self.pending.as_mut() {
            Some(p) => Some(p),
            None => self.records.last_mut(),
        };
        if let Some(r) = target {
            r.step_size = Some(eta);
            r.batch_size = batch;
        }
    }
}

#[cfg(test)]
mod tests;
