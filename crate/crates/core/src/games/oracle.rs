use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{joint_gradient, GameSpec};
use crate::error::{Error, Result};
use crate::manifold::{Point, TangentVector};

/// Unbiased stochastic estimator of the joint gradient.
///
/// Each query returns `F(y) + ξ` with `ξ` Gaussian and isotropic in a
/// metric-orthonormal basis of `T_yM`, scaled so that `E‖ξ‖²_y = σ²`.
/// A batch of `m` queries is averaged; since the mean of `m` i.i.d.
/// Gaussians is itself Gaussian with variance divided by `m`, the batch mean
/// is drawn in one shot.
#[derive(Debug, Clone)]
pub struct StochasticOracle {
    game: GameSpec,
    sigma2: f64,
    seed: u64,
    rng: ChaCha8Rng,
    query_count: u64,
}

impl StochasticOracle {
    pub fn new(game: GameSpec, sigma2: f64, seed: u64) -> Result<Self> {
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidConstants(format!("sigma^2 = {sigma2}")));
        }
        Ok(Self {
            game,
            sigma2,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            query_count: 0,
        })
    }

    /// Fresh oracle on the same game with a different seed and zero count.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            game: self.game.clone(),
            sigma2: self.sigma2,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            query_count: 0,
        }
    }

    pub fn game(&self) -> &GameSpec {
        &self.game
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    /// Mini-batch estimate of `F(y)` from `m ≥ 1` queries.
    pub fn sample_gradient(&mut self, y: &Point, m: u64) -> Result<TangentVector> {
        if m == 0 {
            return Err(Error::InvalidConfig("batch size must be at least 1".into()));
        }
        let g = joint_gradient(&self.game, y)?;
        self.query_count += m;
        if self.sigma2 == 0.0 {
            return Ok(g);
        }
        let dim = self.game.manifold.intrinsic_dim() as f64;
        let std = (self.sigma2 / (dim * m as f64)).sqrt();
        let noise = self.game.manifold.random_tangent(y, std, &mut self.rng)?;
        g.add(&noise)
    }
}
