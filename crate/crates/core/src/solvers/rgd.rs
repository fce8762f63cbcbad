use super::{Recorder, Reference, RunTrace, SolverConfig, Termination, TraceRecord};
use crate::error::{Error, Result};
use crate::games::{joint_gradient, GameSpec, StochasticOracle};
use crate::manifold::{Point, TangentVector};

/// Gradient information used by the descent step.
pub enum GradientSource<'a> {
    Exact,
    Oracle(&'a mut StochasticOracle),
}

/// `exp_y(−η g)`.
pub fn rgd_step(game: &GameSpec, y: &Point, eta: f64, g: &TangentVector) -> Result<Point> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidConfig(format!("step size {eta}")));
    }
    if g.base != *y {
        return Err(Error::BasePointMismatch);
    }
    game.manifold.exp(y, &g.scale(-eta))
}

/// Next iterate and its exact gradient, or `None` on numerical failure.
pub(crate) fn advance(
    game: &GameSpec,
    y: &Point,
    eta: f64,
    g: &TangentVector,
) -> Option<(Point, TangentVector)> {
    let p = rgd_step(game, y, eta, g).ok()?;
    if !p.is_finite() {
        return None;
    }
    let f = joint_gradient(game, &p).ok()?;
    Some((p, f))
}

pub(crate) fn distance(
    game: &GameSpec,
    y: &Point,
    reference: Option<&Reference>,
) -> Option<Option<f64>> {
    match reference {
        None => Some(None),
        Some(r) => game.manifold.dist(y, &r.point).ok().map(Some),
    }
}

/// Riemannian gradient descent `y_{k+1} = exp_{y_k}(−η_k g_k)`, with `g_k`
/// either `F(y_k)` or a mini-batch oracle estimate of size `m_k`.
///
/// Every record carries the exact `‖F(y_k)‖`; evaluating it for the trace
/// does not count as a query. With exact gradients each step costs one
/// query.
pub fn run_rgd(
    game: &GameSpec,
    mut source: GradientSource<'_>,
    y0: &Point,
    config: &SolverConfig,
    reference: Option<&Reference>,
) -> Result<RunTrace> {
    config.validate()?;
    for k in 0..config.max_iterations {
        config.check_step_bound(k, game.mu, game.lipschitz)?;
    }
    if let Some(r) = reference {
        game.manifold.check_point(&r.point)?;
    }
    let stochastic = matches!(source, GradientSource::Oracle(_));
    let m = &game.manifold;
    let mut y = y0.clone();
    let mut f = joint_gradient(game, &y)?;
    let mut rec = Recorder::new(config);
    let mut queries = 0u64;
    let mut termination = Termination::Budget;
    for k in 0..=config.max_iterations {
        let norm = m.norm(&f)?;
        let Some(dist) = distance(game, &y, reference) else {
            termination = Termination::NumericalFailure { k };
            break;
        };
        rec.push(TraceRecord {
            k,
            grad_norm: norm,
            residual: norm,
            dist_to_ref: dist,
            step_size: None,
            batch_size: None,
            cumulative_queries: queries,
            wall_nanos: 0,
        });
        if config.epsilon > 0.0 && norm <= config.epsilon {
            termination = Termination::EpsilonReached;
            break;
        }
        if k == config.max_iterations {
            break;
        }
        let eta = config.step_sizes.at(k);
        let (g, batch) = match &mut source {
            GradientSource::Exact => (Ok(f.clone()), 1),
            GradientSource::Oracle(o) => {
                let b = config.batch_sizes.at(k);
                (o.sample_gradient(&y, b), b)
            }
        };
        rec.set_step(eta, stochastic.then_some(batch));
        queries += batch;
        match g.ok().and_then(|g| advance(game, &y, eta, &g)) {
            Some((p, fp)) => {
                y = p;
                f = fp;
            }
            None => {
                termination = Termination::NumericalFailure { k: k + 1 };
                break;
            }
        }
    }
    Ok(RunTrace {
        records: rec.finish(),
        terminal_point: y,
        terminal_multipliers: Vec::new(),
        terminated_by: termination,
        reference_kind: reference.map(|r| r.kind),
        record_every: config.record_every,
        total_queries: queries,
    })
}
