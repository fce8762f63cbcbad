//! Independent oracles and monitors: finite differences along geodesics,
//! descent-inequality audits, contraction-rate fits and the two-point
//! Karcher mean.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::games::{joint_gradient, GameSpec};
use crate::linalg::{sandwich, sym_func, SpectralFn, SymMatrix};
use crate::manifold::{Manifold, Point, TangentVector};
use crate::solvers::RunTrace;

/// Relative tolerance of the deterministic descent audit.
pub const DESCENT_TOLERANCE: f64 = 1e-9;
/// Gradient norms are only resolved to about this fraction of `max(1, ‖F(y₀)‖)`;
/// its square is added to the audited bound.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;
/// Minimum seed count for the stochastic audit.
pub const MIN_AUDIT_SEEDS: usize = 20;
/// Records with a gradient norm at or below this are ignored by the fit.
pub const FIT_FLOOR: f64 = 1e-12;

/// Central difference `(f(exp_p(h v)) − f(exp_p(−h v)))/(2h)` for a unit
/// tangent `v`.
pub fn finite_diff_directional(
    manifold: &Manifold,
    f: impl Fn(&Point) -> Result<f64>,
    p: &Point,
    v: &TangentVector,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidConfig(format!("finite-difference step {h}")));
    }
    let norm = manifold.norm(v)?;
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidTangent(format!("direction has norm {norm}")));
    }
    let eval = |q: &Point| {
        f(q).map_err(|e| match e {
            Error::EvaluationFailure(_) => e,
            other => Error::EvaluationFailure(other.to_string()),
        })
    };
    let plus = eval(&manifold.exp(p, &v.scale(h))?)?;
    let minus = eval(&manifold.exp(p, &v.scale(-h))?)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Largest disagreement between analytic and finite-difference player
/// gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub samples: usize,
    /// `max |analytic − numeric| / max(|analytic|, 0.1)`, so that values
    /// up to 1e-3 mean agreement within `max(1e-4, 1e-3·|analytic|)`.
    pub max_error: f64,
}

/// Compares `⟨F_i(y), v_i⟩` with the central difference of `l_i` along a
/// unit direction supported on player i's block, at `samples` points drawn
/// within `radius` of the game's center. Players are visited cyclically.
pub fn check_gradients(
    game: &GameSpec,
    samples: usize,
    radius: f64,
    seed: u64,
    h: f64,
) -> Result<GradientCheck> {
    let m = &game.manifold;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0_f64;
    for s in 0..samples {
        let y = m.random_point(&game.center, radius, &mut rng)?;
        let player = s % game.players();
        let full = m.random_tangent(&y, 1.0, &mut rng)?;
        let parts = (0..game.players())
            .map(|j| {
                let c = full.component(j);
                if j == player {
                    c
                } else {
                    TangentVector::zero(&c.base)
                }
            })
            .collect();
        let v = TangentVector::from_components(&y, parts)?;
        let norm = m.norm(&v)?;
        if norm == 0.0 {
            continue;
        }
        let v = v.scale(1.0 / norm);
        let analytic = m.inner(&y, &joint_gradient(game, &y)?, &v)?;
        let numeric = finite_diff_directional(m, |q| game.loss(player, q), &y, &v, h)?;
        max_error = max_error.max((analytic - numeric).abs() / analytic.abs().max(0.1));
    }
    Ok(GradientCheck { samples, max_error })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    /// Iterations k whose step k → k+1 broke the inequality.
    pub violations: Vec<usize>,
    /// Largest `observed − bound` (negative when every step has room).
    pub worst_slack: f64,
    pub tolerance: f64,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Per-step contraction factor `1 − (2ημ − (ηL)²)/(2 − 2ημ + (ηL)²)`.
pub fn descent_factor(eta: f64, mu: f64, lipschitz: f64) -> f64 {
    let a = 2.0 * eta * mu;
    let b = (eta * lipschitz).powi(2);
    1.0 - (a - b) / (2.0 - a + b)
}

/// Slack `4σ²/(m(2ημ − η²))` of the stochastic descent inequality.
pub fn stochastic_slack(eta: f64, mu: f64, sigma2: f64, batch: u64) -> f64 {
    4.0 * sigma2 / (batch as f64 * (2.0 * eta * mu - eta * eta))
}

fn require_stride_one(trace: &RunTrace) -> Result<()> {
    if trace.record_every != 1 {
        return Err(Error::StrideTooCoarse(trace.record_every));
    }
    Ok(())
}

/// Checks `‖F(y_{k+1})‖² ≤ ρ(η_k)·‖F(y_k)‖²` on every step of an exact run,
/// with relative tolerance 1e-9 plus the roundoff floor.
pub fn audit_descent(trace: &RunTrace, mu: f64, lipschitz: f64) -> Result<ViolationReport> {
    require_stride_one(trace)?;
    let scale = trace.records.first().map_or(1.0, |r| r.grad_norm.max(1.0));
    let floor = (ROUNDOFF_FLOOR * scale).powi(2);
    let mut violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for w in trace.records.windows(2) {
        let Some(eta) = w[0].step_size else { continue };
        let a = w[0].grad_norm.powi(2);
        let b = w[1].grad_norm.powi(2);
        let bound = descent_factor(eta, mu, lipschitz) * a;
        worst = worst.max(b - bound);
        if b > bound + DESCENT_TOLERANCE * a + floor {
            violations.push(w[0].k);
        }
    }
    Ok(ViolationReport {
        violations,
        worst_slack: worst,
        tolerance: DESCENT_TOLERANCE,
    })
}

/// Multi-seed audit of the expected descent inequality
/// `E‖F(y_{k+1})‖² ≤ ρ(η_k)·‖F(y_k)‖² + 4σ²/(m_k(2η_kμ − η_k²))`.
///
/// Iteration k is flagged when the seed average of `lhs − rhs` exceeds
/// three standard errors. `worst_slack` is the largest average excess.
pub fn audit_descent_stochastic(
    traces: &[RunTrace],
    mu: f64,
    lipschitz: f64,
    sigma2: f64,
) -> Result<ViolationReport> {
    if traces.len() < MIN_AUDIT_SEEDS {
        return Err(Error::InsufficientData(format!(
            "{} seeds, need {MIN_AUDIT_SEEDS}",
            traces.len()
        )));
    }
    for t in traces {
        require_stride_one(t)?;
    }
    let steps = traces
        .iter()
        .map(|t| t.records.len())
        .min()
        .unwrap_or(0)
        .saturating_sub(1);
    let n = traces.len() as f64;
    let mut violations = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..steps {
        let mut diffs = Vec::with_capacity(traces.len());
        for t in traces {
            let (r, next) = (&t.records[k], &t.records[k + 1]);
            let Some(eta) = r.step_size else { continue };
            let batch = r.batch_size.unwrap_or(1);
            let rhs = descent_factor(eta, mu, lipschitz) * r.grad_norm.powi(2)
                + stochastic_slack(eta, mu, sigma2, batch);
            diffs.push(next.grad_norm.powi(2) - rhs);
        }
        if diffs.len() < traces.len() {
            continue;
        }
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        worst = worst.max(mean);
        if mean > 3.0 * se {
            violations.push(k);
        }
    }
    Ok(ViolationReport {
        violations,
        worst_slack: worst,
        tolerance: 3.0,
    })
}

/// Least-squares slope of `ln ‖F(y_k)‖²` against k over records with
/// `‖F‖ > 1e-12`.
pub fn fit_contraction(trace: &RunTrace) -> Result<f64> {
    let pts: Vec<(f64, f64)> = trace
        .records
        .iter()
        .filter(|r| r.grad_norm > FIT_FLOOR && r.grad_norm.is_finite())
        .map(|r| (r.k as f64, 2.0 * r.grad_norm.ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} usable records, need 10",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Upper bound on the fitted slope for exact runs with `η = μ/L²`:
/// `ln(1 − κ²/(2 − κ²)) + 0.05`.
pub fn contraction_slope_bound(kappa: f64) -> f64 {
    let k2 = kappa * kappa;
    (1.0 - k2 / (2.0 - k2)).ln() + 0.05
}

/// Two-point Karcher mean `A^{1/2}(A^{−1/2} B A^{−1/2})^{1/2} A^{1/2}`.
pub fn karcher_midpoint_oracle(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let half = sym_func(a, SpectralFn::Sqrt)?;
    let inv_half = sym_func(a, SpectralFn::InvSqrt)?;
    let inner = sym_func(&sandwich(&inv_half, b), SpectralFn::Sqrt)?;
    Ok(sandwich(&half, &inner))
}
