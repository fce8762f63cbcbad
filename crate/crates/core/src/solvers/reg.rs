use super::rgd::{advance, distance};
use super::{Recorder, Reference, RunTrace, SolverConfig, Termination, TraceRecord};
use crate::error::Result;
use crate::games::{joint_gradient, GameSpec};
use crate::manifold::Point;

/// Default extragradient step `1/(2L)`.
pub fn default_reg_step(game: &GameSpec) -> f64 {
    0.5 / game.lipschitz
}

/// Riemannian extragradient with exact gradients:
/// `y_{k+½} = exp_{y_k}(−η F(y_k))`, then
/// `y_{k+1} = exp_{y_k}(−η Γ_{y_{k+½}}^{y_k} F(y_{k+½}))`.
///
/// Each step costs two queries. The step-size bound of gradient descent is
/// not enforced.
pub fn run_reg(
    game: &GameSpec,
    y0: &Point,
    config: &SolverConfig,
    reference: Option<&Reference>,
) -> Result<RunTrace> {
    config.validate()?;
    if let Some(r) = reference {
        game.manifold.check_point(&r.point)?;
    }
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
        rec.set_step(eta, None);
        queries += 2;
        let step = advance(game, &y, eta, &f).and_then(|(half, f_half)| {
            let g = m.transport(&half, &y, &f_half).ok()?;
            advance(game, &y, eta, &g)
        });
        match step {
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
