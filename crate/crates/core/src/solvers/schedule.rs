use super::{Schedule, SolverConfig};
use crate::error::{Error, Result};

/// Step size, batch sizes and iteration count for gradient descent on a
/// μ-strongly monotone, L-smooth game.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremSchedule {
    /// `μ/L²`
    pub eta: f64,
    /// `m_j` for `j = 0, …, K*−1`; all ones when deterministic.
    pub batch_sizes: Vec<u64>,
    pub k_star: usize,
    /// `109σ²/(κ⁶ε²)` in the stochastic case.
    pub query_bound: Option<f64>,
    pub stochastic: bool,
}

impl TheoremSchedule {
    /// Solver configuration running exactly `max(K*, 1)` iterations.
    pub fn config(&self, seed: u64) -> SolverConfig {
        let k = self.k_star.max(1);
        let mut c = SolverConfig::constant(self.eta, k);
        c.seed = seed;
        if self.stochastic {
            let mut b = self.batch_sizes.clone();
            b.resize(k, *self.batch_sizes.last().unwrap_or(&1));
            c.batch_sizes = Schedule::PerIteration(b);
        }
        c
    }

    pub fn total_batch(&self) -> u64 {
        self.batch_sizes.iter().sum()
    }
}

fn check(mu: f64, lipschitz: f64, sigma2: f64) -> Result<()> {
    if !(mu > 0.0) || !(lipschitz >= mu) || !lipschitz.is_finite() {
        return Err(Error::InvalidConstants(format!(
            "need 0 < mu <= L, got mu = {mu}, L = {lipschitz}"
        )));
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidConstants(format!("sigma^2 = {sigma2}")));
    }
    Ok(())
}

fn ceil_count(x: f64) -> u64 {
    (x.ceil() as u64).max(1)
}

/// Schedules from the curvature-independent rate theorem.
///
/// Deterministic (`σ² = 0`): `bound` is an upper bound on `d(y₀, y*)` and
/// `K* = ⌈4 log(L·bound/ε)/κ²⌉`. Stochastic: `bound` is B and
/// `K* = ⌈8 log(L·B/ε)/κ²⌉`, `m_j = ⌈16σ²/(κ⁴(LB)²)·e^{κ²j/4}⌉`.
pub fn theorem_schedule(
    mu: f64,
    lipschitz: f64,
    sigma2: f64,
    bound: f64,
    epsilon: f64,
) -> Result<TheoremSchedule> {
    check(mu, lipschitz, sigma2)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConstants(format!("epsilon = {epsilon}")));
    }
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::InvalidConstants(format!("distance bound = {bound}")));
    }
    let kappa = mu / lipschitz;
    let k2 = kappa * kappa;
    let log_ratio = (lipschitz * bound / epsilon).ln();
    let eta = mu / (lipschitz * lipschitz);
    if sigma2 == 0.0 {
        let k_star = (4.0 * log_ratio / k2).ceil().max(0.0) as usize;
        return Ok(TheoremSchedule {
            eta,
            batch_sizes: vec![1; k_star],
            k_star,
            query_bound: None,
            stochastic: false,
        });
    }
    let k_star = (8.0 * log_ratio / k2).ceil().max(0.0) as usize;
    let lb = lipschitz * bound;
    let base = 16.0 * sigma2 / (k2 * k2 * lb * lb);
    let batch_sizes = (0..k_star)
        .map(|j| ceil_count(base * (k2 * j as f64 / 4.0).exp()))
        .collect();
    Ok(TheoremSchedule {
        eta,
        batch_sizes,
        k_star,
        query_bound: Some(109.0 * sigma2 / (k2 * k2 * k2 * epsilon * epsilon)),
        stochastic: true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedViSchedule {
    pub step_sizes: Vec<f64>,
    pub batch_sizes: Vec<u64>,
    pub stochastic: bool,
}

impl MixedViSchedule {
    pub fn config(&self, seed: u64) -> SolverConfig {
        let mut c = SolverConfig::constant(1.0, self.step_sizes.len());
        c.step_sizes = Schedule::PerIteration(self.step_sizes.clone());
        c.batch_sizes = Schedule::PerIteration(self.batch_sizes.clone());
        c.seed = seed;
        c
    }
}

/// Mixed-VI schedules over `iterations` steps: `η₀ = 1/L`, `η_k = μ/L²`
/// for k ≥ 1; stochastic batches `m₀ = ⌈L²B²/σ²⌉` and
/// `m_k = ⌈12σ²/(91μ²κ²B²)·e^{κ²(k−2)/4}⌉`.
pub fn mixed_vi_schedule(
    mu: f64,
    lipschitz: f64,
    sigma2: f64,
    bound: f64,
    iterations: usize,
) -> Result<MixedViSchedule> {
    check(mu, lipschitz, sigma2)?;
    if iterations == 0 {
        return Err(Error::InvalidConfig("need at least one iteration".into()));
    }
    let kappa = mu / lipschitz;
    let k2 = kappa * kappa;
    let mut step_sizes = vec![mu / (lipschitz * lipschitz); iterations];
    step_sizes[0] = 1.0 / lipschitz;
    if sigma2 == 0.0 {
        return Ok(MixedViSchedule {
            step_sizes,
            batch_sizes: vec![1; iterations],
            stochastic: false,
        });
    }
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::InvalidConstants(format!("distance bound = {bound}")));
    }
    let b2 = bound * bound;
    let base = 12.0 * sigma2 / (91.0 * mu * mu * k2 * b2);
    let batch_sizes = (0..iterations)
        .map(|k| {
            if k == 0 {
                ceil_count(lipschitz * lipschitz * b2 / sigma2)
            } else {
                ceil_count(base * (k2 * (k as f64 - 2.0) / 4.0).exp())
            }
        })
        .collect();
    Ok(MixedViSchedule {
        step_sizes,
        batch_sizes,
        stochastic: true,
    })
}
