use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Recorder, Reference, RunTrace, SolverConfig, Termination, TraceRecord};
use crate::error::{Error, Result};
use crate::games::factories::affine_constants;
use crate::manifold::{Coords, Manifold, Point, TangentVector};

/// Coordinates within this distance of a face count as active.
pub const ACTIVE_TOLERANCE: f64 = 1e-12;
/// Points may violate the constraint set by at most this much.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Closed convex Euclidean constraint set.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    NonnegativeOrthant,
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Constraint {
    fn bounds(&self, i: usize) -> (f64, f64) {
        match self {
            Constraint::NonnegativeOrthant => (0.0, f64::INFINITY),
            Constraint::Box { lo, hi } => (lo[i], hi[i]),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Constraint::Box { lo, hi } = self {
            if lo.len() != n || hi.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: lo.len().min(hi.len()),
                });
            }
            if let Some(i) = (0..n).find(|&i| !(lo[i] <= hi[i])) {
                return Err(Error::InvalidConfig(format!("empty box in coordinate {i}")));
            }
        }
        Ok(())
    }

    fn check_feasible(&self, x: &[f64]) -> Result<()> {
        for (i, &xi) in x.iter().enumerate() {
            let (lo, hi) = self.bounds(i);
            let tol = FEASIBILITY_TOLERANCE * xi.abs().max(1.0);
            if !xi.is_finite() || xi < lo - tol || xi > hi + tol {
                return Err(Error::PointOutsideSet { index: i });
            }
        }
        Ok(())
    }
}

/// Euclidean projection onto the constraint set (componentwise clamp).
pub fn project(constraint: &Constraint, x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let (lo, hi) = constraint.bounds(i);
            v.max(lo).min(hi)
        })
        .collect()
}

/// `min_{c ∈ N_C(x)} ‖F_E + c‖`.
///
/// Per coordinate: free coordinates contribute `F_i²`, an active lower face
/// `min(F_i, 0)²`, an active upper face `max(F_i, 0)²`, and a coordinate
/// with both faces active nothing.
pub fn tangent_residual(constraint: &Constraint, x: &[f64], f: &[f64]) -> Result<f64> {
    if x.len() != f.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: f.len(),
        });
    }
    constraint.validate(x.len())?;
    constraint.check_feasible(x)?;
    let mut s = 0.0;
    for (i, (&xi, &fi)) in x.iter().zip(f).enumerate() {
        let (lo, hi) = constraint.bounds(i);
        let at_lo = xi <= lo + ACTIVE_TOLERANCE * lo.abs().max(1.0);
        let at_hi = xi >= hi - ACTIVE_TOLERANCE * hi.abs().max(1.0);
        let r = match (at_lo, at_hi) {
            (true, true) => 0.0,
            (true, false) => fi.min(0.0),
            (false, true) => fi.max(0.0),
            (false, false) => fi,
        };
        s += r * r;
    }
    Ok(s.sqrt())
}

/// Operator `F = (F_M, F_E)` of a mixed variational inequality.
pub trait MixedOperator: Send + Sync {
    fn evaluate(&self, y: &Point, x: &[f64]) -> Result<(TangentVector, Vec<f64>)>;
}

/// Find `z* = (y*, x*)` with `F_M(z*) = 0` and `−F_E(z*) ∈ N_C(x*)`.
#[derive(Clone)]
pub struct MixedViProblem {
    pub manifold: Manifold,
    pub euclidean_dim: usize,
    pub constraint: Constraint,
    pub mu: f64,
    pub lipschitz: f64,
    /// Per-query variance of the stochastic estimates of F.
    pub sigma2: f64,
    operator: Arc<dyn MixedOperator>,
}

impl fmt::Debug for MixedViProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixedViProblem")
            .field("manifold", &self.manifold)
            .field("euclidean_dim", &self.euclidean_dim)
            .field("constraint", &self.constraint)
            .field("mu", &self.mu)
            .field("lipschitz", &self.lipschitz)
            .field("sigma2", &self.sigma2)
            .finish_non_exhaustive()
    }
}

impl MixedViProblem {
    pub fn new(
        manifold: Manifold,
        euclidean_dim: usize,
        constraint: Constraint,
        operator: Arc<dyn MixedOperator>,
        mu: f64,
        lipschitz: f64,
        sigma2: f64,
    ) -> Result<Self> {
        manifold.validate()?;
        constraint.validate(euclidean_dim)?;
        if !(lipschitz > 0.0) || !(mu >= 0.0) || mu > lipschitz || !lipschitz.is_finite() {
            return Err(Error::InvalidConstants(format!(
                "mu = {mu}, L = {lipschitz}"
            )));
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidConstants(format!("sigma^2 = {sigma2}")));
        }
        Ok(Self {
            manifold,
            euclidean_dim,
            constraint,
            mu,
            lipschitz,
            sigma2,
            operator,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.mu / self.lipschitz
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidConstants(format!("sigma^2 = {sigma2}")));
        }
        self.sigma2 = sigma2;
        Ok(self)
    }

    /// Exact `(F_M(z), F_E(z))`, checked for shape and finiteness.
    pub fn evaluate(&self, y: &Point, x: &[f64]) -> Result<(TangentVector, Vec<f64>)> {
        self.manifold.check_point(y)?;
        if x.len() != self.euclidean_dim {
            return Err(Error::DimensionMismatch {
                expected: self.euclidean_dim,
                actual: x.len(),
            });
        }
        let (fm, fe) = self.operator.evaluate(y, x).map_err(|e| match e {
            Error::EvaluationFailure(_) => e,
            other => Error::EvaluationFailure(other.to_string()),
        })?;
        if fm.base != *y || fe.len() != self.euclidean_dim {
            return Err(Error::EvaluationFailure(
                "operator returned wrong shape".into(),
            ));
        }
        if !fm.is_finite() || fe.iter().any(|v| !v.is_finite()) {
            return Err(Error::EvaluationFailure("non-finite operator value".into()));
        }
        Ok((fm, fe))
    }

    /// `(‖F_M(z)‖, sqrt(‖F_M(z)‖² + r_tan(z)²))`.
    pub fn residuals(&self, y: &Point, x: &[f64]) -> Result<(f64, f64)> {
        let (fm, fe) = self.evaluate(y, x)?;
        let nm = self.manifold.norm(&fm)?;
        let r = tangent_residual(&self.constraint, x, &fe)?;
        Ok((nm, nm.hypot(r)))
    }

    fn distance(&self, y: &Point, x: &[f64], r: &Reference) -> Result<f64> {
        let dm = self.manifold.dist(y, &r.point)?;
        let de: f64 = x
            .iter()
            .zip(&r.multipliers)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((dm * dm + de).sqrt())
    }
}

/// Stochastic descent for a mixed VI: a Riemannian gradient step on the
/// manifold block and a projected gradient step on the Euclidean block,
///
/// `y_{k+1} = exp_{y_k}(−η_k g_M)`, `x_{k+1} = Π_C(x_k − η_k g_E)`.
///
/// With `sigma2 > 0` the estimates `g` average `m_k` noisy queries, the
/// noise being isotropic Gaussian over the joint tangent space with
/// `E‖ξ‖² = σ²` per query. The step bound `2μ/L²` is checked for `k ≥ 1`
/// only, since the first step uses `1/L` by design.
pub fn run_mixed_vi(
    problem: &MixedViProblem,
    y0: &Point,
    x0: &[f64],
    config: &SolverConfig,
    reference: Option<&Reference>,
) -> Result<RunTrace> {
    config.validate()?;
    for k in 1..config.max_iterations {
        config.check_step_bound(k, problem.mu, problem.lipschitz)?;
    }
    problem.constraint.check_feasible(x0)?;
    if x0.len() != problem.euclidean_dim {
        return Err(Error::DimensionMismatch {
            expected: problem.euclidean_dim,
            actual: x0.len(),
        });
    }
    if let Some(r) = reference {
        problem.manifold.check_point(&r.point)?;
        if r.multipliers.len() != problem.euclidean_dim {
            return Err(Error::DimensionMismatch {
                expected: problem.euclidean_dim,
                actual: r.multipliers.len(),
            });
        }
    }
    let stochastic = problem.sigma2 > 0.0;
    let total_dim = (problem.manifold.intrinsic_dim() + problem.euclidean_dim) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut y = y0.clone();
    let mut x = x0.to_vec();
    let (mut fm, mut fe) = problem.evaluate(&y, &x)?;
    let mut rec = Recorder::new(config);
    let mut queries = 0u64;
    let mut termination = Termination::Budget;
    for k in 0..=config.max_iterations {
        let monitored = problem.manifold.norm(&fm).and_then(|nm| {
            let r = tangent_residual(&problem.constraint, &x, &fe)?;
            let d = reference.map(|r| problem.distance(&y, &x, r)).transpose()?;
            Ok((nm, nm.hypot(r), d))
        });
        let Ok((nm, residual, dist)) = monitored else {
            termination = Termination::NumericalFailure { k };
            break;
        };
        rec.push(TraceRecord {
            k,
            grad_norm: nm,
            residual,
            dist_to_ref: dist,
            step_size: None,
            batch_size: None,
            cumulative_queries: queries,
            wall_nanos: 0,
        });
        if config.epsilon > 0.0 && residual <= config.epsilon {
            termination = Termination::EpsilonReached;
            break;
        }
        if k == config.max_iterations {
            break;
        }
        let eta = config.step_sizes.at(k);
        let batch = if stochastic {
            config.batch_sizes.at(k)
        } else {
            1
        };
        rec.set_step(eta, stochastic.then_some(batch));
        queries += batch;
        let step = (|| -> Result<(Point, Vec<f64>)> {
            let (mut gm, mut ge) = (fm.clone(), fe.clone());
            if stochastic {
                let std = (problem.sigma2 / (total_dim * batch as f64)).sqrt();
                gm = gm.add(&problem.manifold.random_tangent(&y, std, &mut rng)?)?;
                for v in ge.iter_mut() {
                    *v += std * rng.sample::<f64, _>(StandardNormal);
                }
            }
            let y_next = problem.manifold.exp(&y, &gm.scale(-eta))?;
            let x_step: Vec<f64> = x.iter().zip(&ge).map(|(a, g)| a - eta * g).collect();
            Ok((y_next, project(&problem.constraint, &x_step)))
        })()
        .and_then(|(yn, xn)| {
            let f = problem.evaluate(&yn, &xn)?;
            Ok((yn, xn, f))
        });
        match step {
            Ok((yn, xn, (a, b))) if yn.is_finite() => {
                y = yn;
                x = xn;
                fm = a;
                fe = b;
            }
            _ => {
                termination = Termination::NumericalFailure { k: k + 1 };
                break;
            }
        }
    }
    Ok(RunTrace {
        records: rec.finish(),
        terminal_point: y,
        terminal_multipliers: x,
        terminated_by: termination,
        reference_kind: reference.map(|r| r.kind),
        record_every: config.record_every,
        total_queries: queries,
    })
}

struct AffineOperator {
    manifold_dim: usize,
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl MixedOperator for AffineOperator {
    fn evaluate(&self, y: &Point, x: &[f64]) -> Result<(TangentVector, Vec<f64>)> {
        let yv = y
            .coords
            .as_vector()
            .ok_or_else(|| Error::InvalidPoint("expected a vector".into()))?;
        let z: Vec<f64> = yv.iter().chain(x).copied().collect();
        let f: Vec<f64> = (0..self.dim)
            .map(|r| {
                self.a[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(&z)
                    .map(|(p, q)| p * q)
                    .sum::<f64>()
                    + self.b[r]
            })
            .collect();
        let fm = TangentVector::new(y.clone(), Coords::Vector(f[..self.manifold_dim].to_vec()));
        Ok((fm, f[self.manifold_dim..].to_vec()))
    }
}

/// Mixed VI on `ℝ^p × C` with `F(z) = A z + b`, where `z = (y, x)` has
/// `p = manifold_dim` free coordinates followed by `n` constrained ones.
/// μ = λ_min(sym A) must be positive; L = ‖A‖₂.
pub fn affine_mixed_vi(
    manifold_dim: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    constraint: Constraint,
) -> Result<MixedViProblem> {
    let dim = manifold_dim + n;
    if a.len() != dim * dim || b.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            actual: a.len(),
        });
    }
    let (mu, lipschitz) = affine_constants(&a, dim)?;
    if !(mu > 0.0) {
        return Err(Error::NonMonotone(mu));
    }
    let op = Arc::new(AffineOperator {
        manifold_dim,
        dim,
        a,
        b,
    });
    MixedViProblem::new(
        Manifold::Euclidean(manifold_dim),
        n,
        constraint,
        op,
        mu,
        lipschitz,
        0.0,
    )
}
