//! Riemannian games: per-player losses on a product manifold, the joint
//! gradient field `F`, proximity measures, monotonicity certification and a
//! stochastic gradient oracle.

pub(crate) mod factories;
mod monotonicity;
mod oracle;

pub use factories::{
    affine_game, bilinear_saddle_game, karcher_center, min_max_distance_game,
    potential_distance_game, robust_karcher_game, SAMPLING_RADIUS,
};
pub use monotonicity::{check_monotonicity, check_monotonicity_with, MonotonicityReport};
pub use oracle::StochasticOracle;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, Point, TangentVector};

/// Loss evaluators and gradient field of a game on a product manifold
/// whose factors are the players' strategy spaces.
pub trait Game: Send + Sync {
    /// Loss of `player` at the joint profile `y`.
    fn loss(&self, player: usize, y: &Point) -> Result<f64>;

    /// Concatenated player gradients `(grad_{y_1} l_1, …, grad_{y_N} l_N)`.
    fn gradient(&self, y: &Point) -> Result<TangentVector>;
}

/// A game together with its joint manifold and claimed constants.
#[derive(Clone)]
pub struct GameSpec {
    pub name: String,
    /// Joint strategy space; always a product with one factor per player.
    pub manifold: Manifold,
    /// Claimed strong-monotonicity modulus μ ≥ 0.
    pub mu: f64,
    /// Claimed smoothness constant L > 0.
    pub lipschitz: f64,
    /// Known Nash equilibrium, when available in closed form.
    pub nash: Option<Point>,
    /// Center of the sampling ball used for certification.
    pub center: Point,
    model: Arc<dyn Game>,
}

impl fmt::Debug for GameSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameSpec")
            .field("name", &self.name)
            .field("manifold", &self.manifold)
            .field("mu", &self.mu)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl GameSpec {
    pub fn new(
        name: impl Into<String>,
        players: Vec<Manifold>,
        model: Arc<dyn Game>,
        mu: f64,
        lipschitz: f64,
        center: Point,
        nash: Option<Point>,
    ) -> Result<Self> {
        let manifold = Manifold::product(players)?;
        check_constants(mu, lipschitz)?;
        manifold.check_point(&center)?;
        if let Some(n) = &nash {
            manifold.check_point(n)?;
        }
        Ok(Self {
            name: name.into(),
            manifold,
            mu,
            lipschitz,
            nash,
            center,
            model,
        })
    }

    pub fn players(&self) -> usize {
        self.manifold.factors().len()
    }

    /// Condition number κ = μ / L.
    pub fn kappa(&self) -> f64 {
        self.mu / self.lipschitz
    }

    /// Replaces the claimed constants (e.g. with sampled estimates).
    pub fn with_constants(mut self, mu: f64, lipschitz: f64) -> Result<Self> {
        check_constants(mu, lipschitz)?;
        self.mu = mu;
        self.lipschitz = lipschitz;
        Ok(self)
    }

    pub fn with_nash(mut self, nash: Point) -> Result<Self> {
        self.manifold.check_point(&nash)?;
        self.nash = Some(nash);
        Ok(self)
    }

    pub fn loss(&self, player: usize, y: &Point) -> Result<f64> {
        if player >= self.players() {
            return Err(Error::EvaluationFailure(format!("no player {player}")));
        }
        let l = self.model.loss(player, y)?;
        if l.is_finite() {
            Ok(l)
        } else {
            Err(Error::EvaluationFailure(format!(
                "loss of player {player} is {l}"
            )))
        }
    }
}

fn check_constants(mu: f64, lipschitz: f64) -> Result<()> {
    if !(lipschitz > 0.0) || !(mu >= 0.0) || mu > lipschitz || !lipschitz.is_finite() {
        return Err(Error::InvalidConstants(format!(
            "need 0 <= mu <= L with L > 0, got mu = {mu}, L = {lipschitz}"
        )));
    }
    Ok(())
}

/// `F(y)`, checked to be a finite tangent vector based at `y`.
pub fn joint_gradient(game: &GameSpec, y: &Point) -> Result<TangentVector> {
    game.manifold.check_point(y)?;
    let g = game.model.gradient(y).map_err(|e| match e {
        Error::EvaluationFailure(_) => e,
        other => Error::EvaluationFailure(other.to_string()),
    })?;
    if g.base != *y {
        return Err(Error::EvaluationFailure("gradient not based at y".into()));
    }
    if !g.is_finite() {
        return Err(Error::EvaluationFailure("non-finite gradient".into()));
    }
    Ok(g)
}

/// `‖F(y)‖_y`.
pub fn gradient_norm(game: &GameSpec, y: &Point) -> Result<f64> {
    let g = joint_gradient(game, y)?;
    game.manifold.norm(&g)
}

/// Upper bound `D·‖F(y)‖_y` on the duality gap over the geodesic ball B(y, D).
pub fn gap_bound(game: &GameSpec, y: &Point, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::NonPositiveRadius(radius));
    }
    Ok(radius * gradient_norm(game, y)?)
}

/// Upper bound `√N·D·‖F(y)‖_y` on the total gap.
pub fn total_gap_bound(game: &GameSpec, y: &Point, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::NonPositiveRadius(radius));
    }
    gap_bound(game, y, (game.players() as f64).sqrt() * radius)
}

#[cfg(test)]
mod tests;
