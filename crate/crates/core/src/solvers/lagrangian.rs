use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mixed::{Constraint, MixedOperator, MixedViProblem};
use crate::error::{Error, Result};
use crate::games::{joint_gradient, GameSpec, SAMPLING_RADIUS};
use crate::manifold::{Point, TangentVector};

type ValueFn = Arc<dyn Fn(&Point) -> Result<f64> + Send + Sync>;
type GradientFn = Arc<dyn Fn(&Point) -> Result<TangentVector> + Send + Sync>;

const CERTIFY_PAIRS: usize = 300;
const CERTIFY_SEED: u64 = 0x1a9;
/// Multipliers are sampled uniformly from `[0, MULTIPLIER_RANGE]`.
const MULTIPLIER_RANGE: f64 = 2.0;

/// Constraint `g(y_i) ≤ 0` on one player's strategy, with `g` geodesically
/// convex. Both closures receive the player's own point `y_i`.
#[derive(Clone)]
pub struct PlayerConstraint {
    pub player: usize,
    pub value: ValueFn,
    pub gradient: Option<GradientFn>,
}

impl PlayerConstraint {
    pub fn new(
        player: usize,
        value: impl Fn(&Point) -> Result<f64> + Send + Sync + 'static,
        gradient: impl Fn(&Point) -> Result<TangentVector> + Send + Sync + 'static,
    ) -> Self {
        Self {
            player,
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
        }
    }
}

struct LagrangianOperator {
    game: GameSpec,
    constraints: Vec<(usize, ValueFn, GradientFn)>,
}

impl MixedOperator for LagrangianOperator {
    fn evaluate(&self, y: &Point, x: &[f64]) -> Result<(TangentVector, Vec<f64>)> {
        let f = joint_gradient(&self.game, y)?;
        let mut parts: Vec<TangentVector> =
            (0..self.game.players()).map(|i| f.component(i)).collect();
        let mut fe = Vec::with_capacity(self.constraints.len());
        for ((player, value, gradient), &xj) in self.constraints.iter().zip(x) {
            let yi = y.component(*player);
            parts[*player] = parts[*player].add_scaled(xj, &gradient(&yi)?)?;
            fe.push(-value(&yi)?);
        }
        Ok((TangentVector::from_components(y, parts)?, fe))
    }
}

/// Lagrangian reformulation of a game whose players face convex
/// constraints: the operator on `M × ℝⁿ₊` is
///
/// `F̃(y, x) = (F(y) + Σⱼ xⱼ grad gⱼ(y), (−gⱼ(y))ⱼ)`.
///
/// With constraints present F̃ is monotone but generally not strongly
/// monotone in the multipliers; its constants are estimated by sampling
/// around the game's center (multipliers in `[0, 2]`) with margins
/// `μ = max(0, 0.95·min)`, `L = 1.05·max`.
pub fn constrained_game_to_mixed_vi(
    game: &GameSpec,
    constraints: Vec<PlayerConstraint>,
) -> Result<MixedViProblem> {
    let mut resolved = Vec::with_capacity(constraints.len());
    for (j, c) in constraints.into_iter().enumerate() {
        let gradient = c.gradient.ok_or(Error::GradientUnavailable(j))?;
        if c.player >= game.players() {
            return Err(Error::InvalidConfig(format!(
                "constraint {j} names player {} of {}",
                c.player,
                game.players()
            )));
        }
        resolved.push((c.player, c.value, gradient));
    }
    let n = resolved.len();
    let op = Arc::new(LagrangianOperator {
        game: game.clone(),
        constraints: resolved,
    });
    if n == 0 {
        return MixedViProblem::new(
            game.manifold.clone(),
            0,
            Constraint::NonnegativeOrthant,
            op,
            game.mu,
            game.lipschitz,
            0.0,
        );
    }
    let provisional = MixedViProblem::new(
        game.manifold.clone(),
        n,
        Constraint::NonnegativeOrthant,
        op.clone(),
        0.0,
        1.0,
        0.0,
    )?;
    let (min_ratio, max_lip) = sample_quotients(&provisional, &game.center)?;
    if min_ratio < -1e-6 {
        return Err(Error::NonMonotone(min_ratio));
    }
    let mu = (0.95 * min_ratio).max(0.0);
    let lipschitz = (1.05 * max_lip).max(mu).max(f64::MIN_POSITIVE);
    MixedViProblem::new(
        game.manifold.clone(),
        n,
        Constraint::NonnegativeOrthant,
        op,
        mu,
        lipschitz,
        0.0,
    )
}

/// Extremes of the joint monotonicity and smoothness quotients of a mixed
/// operator over sampled pairs.
fn sample_quotients(problem: &MixedViProblem, center: &Point) -> Result<(f64, f64)> {
    let m = &problem.manifold;
    let n = problem.euclidean_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(CERTIFY_SEED);
    let mut min_ratio = f64::INFINITY;
    let mut max_lip = 0.0_f64;
    for _ in 0..CERTIFY_PAIRS {
        let y = m.random_point(center, SAMPLING_RADIUS, &mut rng)?;
        let y2 = m.random_point(center, SAMPLING_RADIUS, &mut rng)?;
        let x: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..MULTIPLIER_RANGE))
            .collect();
        let x2: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..MULTIPLIER_RANGE))
            .collect();
        let dm = m.dist(&y, &y2)?;
        let dx: Vec<f64> = x2.iter().zip(&x).map(|(a, b)| a - b).collect();
        let d2 = dm * dm + dx.iter().map(|v| v * v).sum::<f64>();
        if d2 < 1e-12 {
            continue;
        }
        let (fm, fe) = problem.evaluate(&y, &x)?;
        let (fm2, fe2) = problem.evaluate(&y2, &x2)?;
        let diff_m = m.transport(&y2, &y, &fm2)?.sub(&fm)?;
        let diff_e: Vec<f64> = fe2.iter().zip(&fe).map(|(a, b)| a - b).collect();
        let inner = m.inner(&y, &diff_m, &m.log(&y, &y2)?)?
            + diff_e.iter().zip(&dx).map(|(a, b)| a * b).sum::<f64>();
        let norm2 = m.norm(&diff_m)?.powi(2) + diff_e.iter().map(|v| v * v).sum::<f64>();
        min_ratio = min_ratio.min(inner / d2);
        max_lip = max_lip.max((norm2 / d2).sqrt());
    }
    Ok((min_ratio, max_lip))
}
