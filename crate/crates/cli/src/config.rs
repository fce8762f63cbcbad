use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::scenarios::ScenarioName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Rgd,
    Reg,
    Mixed,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Rgd => "rgd",
            SolverKind::Reg => "reg",
            SolverKind::Mixed => "mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    Estimate,
}

/// A constant given as a number or as the keyword `"estimate"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstantSpec {
    Value(f64),
    Keyword(Estimate),
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn default_pairs() -> usize {
    400
}

/// Flat JSON experiment description. Absent fields fall back to the
/// scenario defaults listed by `rgames scenarios`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioName,
    #[serde(default)]
    pub solver: Option<SolverKind>,
    /// Factor dimension (matrix size for SPD, spatial dimension for the
    /// hyperboloid, vector length otherwise).
    #[serde(default)]
    pub dim: Option<usize>,
    /// Players for potential games, anchors for the robust Karcher game.
    #[serde(default)]
    pub players: Option<usize>,
    #[serde(default)]
    pub anchor_seed: u64,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub mu: Option<ConstantSpec>,
    #[serde(default)]
    pub lipschitz: Option<ConstantSpec>,
    #[serde(default)]
    pub sigma2: f64,
    /// B in the schedules; defaults to `d₀` (deterministic) or `2·d₀`.
    #[serde(default)]
    pub distance_bound: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub step_size: Option<f64>,
    #[serde(default = "one")]
    pub record_every: usize,
    /// Ball radius D of the reported gap bounds.
    #[serde(default = "unit")]
    pub gap_radius: f64,
    #[serde(default = "default_pairs")]
    pub estimate_pairs: usize,
    #[serde(default)]
    pub record_wall_time: bool,
    /// Stop once the monitored residual reaches ε instead of running the
    /// full budget.
    #[serde(default)]
    pub stop_early: bool,
    /// Geodesic distance of the initial iterate from the reference.
    #[serde(default = "unit")]
    pub start_radius: f64,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioName) -> Self {
        Self {
            scenario,
            solver: None,
            dim: None,
            players: None,
            anchor_seed: 0,
            gamma: None,
            lambda: None,
            mu: None,
            lipschitz: None,
            sigma2: 0.0,
            distance_bound: None,
            epsilon: None,
            seeds: default_seeds(),
            output_dir: None,
            max_iterations: None,
            step_size: None,
            record_every: 1,
            gap_radius: 1.0,
            estimate_pairs: default_pairs(),
            record_wall_time: false,
            stop_early: false,
            start_radius: 1.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let c: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn solver(&self) -> SolverKind {
        self.solver
            .unwrap_or_else(|| self.scenario.default_solver())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.seeds.is_empty() {
            return bad("seeds must not be empty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if !(self.sigma2 >= 0.0) || !self.sigma2.is_finite() {
            return bad(format!("sigma2 = {}", self.sigma2));
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("distance_bound", self.distance_bound),
            ("step_size", self.step_size),
            ("gamma", self.gamma),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return bad(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if !(self.gap_radius > 0.0) || !self.gap_radius.is_finite() {
            return bad(format!("gap_radius = {}", self.gap_radius));
        }
        if !(self.start_radius > 0.0) || !self.start_radius.is_finite() {
            return bad(format!("start_radius = {}", self.start_radius));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if self.max_iterations == Some(0) {
            return bad("max_iterations must be at least 1".into());
        }
        if self.estimate_pairs == 0 {
            return bad("estimate_pairs must be at least 1".into());
        }
        if matches!(self.dim, Some(0)) || matches!(self.players, Some(0)) {
            return bad("dim and players must be at least 1".into());
        }
        for c in [self.mu, self.lipschitz].into_iter().flatten() {
            if let ConstantSpec::Value(v) = c {
                if !(v >= 0.0) || !v.is_finite() {
                    return bad(format!("constant {v}"));
                }
            }
        }
        let solver = self.solver();
        let mixed = self.scenario == ScenarioName::MixedViOrthant;
        if (solver == SolverKind::Mixed) != mixed {
            return bad(format!(
                "solver {} does not apply to scenario {}",
                solver.as_str(),
                self.scenario.as_str()
            ));
        }
        if solver == SolverKind::Reg && self.sigma2 > 0.0 {
            return bad("the extragradient runner uses exact gradients (sigma2 must be 0)".into());
        }
        Ok(())
    }
}
