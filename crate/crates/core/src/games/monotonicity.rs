use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{joint_gradient, GameSpec, SAMPLING_RADIUS};
use crate::error::{Error, Result};

/// Pairs closer than this are resampled.
pub const MIN_PAIR_DISTANCE: f64 = 1e-6;

const MAX_RESAMPLES: usize = 100;

/// Extremes of the monotonicity and smoothness quotients over sampled pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    pub samples: usize,
    /// `min ⟨Γ_{y'}^y F(y') − F(y), log_y y'⟩ / d(y,y')²`
    pub min_ratio: f64,
    /// `max ‖F(y) − Γ_{y'}^y F(y')‖ / d(y,y')`
    pub max_lipschitz_ratio: f64,
}

impl MonotonicityReport {
    /// Whether the sample supports the claimed constants (tolerance 1e-6).
    pub fn certifies(&self, mu: f64, lipschitz: f64) -> bool {
        self.min_ratio >= mu - 1e-6 && self.max_lipschitz_ratio <= lipschitz + 1e-6
    }
}

/// Samples `n_pairs` pairs from the geodesic ball of radius 2 around the
/// game's center.
pub fn check_monotonicity(
    game: &GameSpec,
    n_pairs: usize,
    seed: u64,
) -> Result<MonotonicityReport> {
    check_monotonicity_with(game, n_pairs, seed, SAMPLING_RADIUS)
}

pub fn check_monotonicity_with(
    game: &GameSpec,
    n_pairs: usize,
    seed: u64,
    radius: f64,
) -> Result<MonotonicityReport> {
    if n_pairs == 0 {
        return Err(Error::InsufficientData("need at least one pair".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::NonPositiveRadius(radius));
    }
    let m = &game.manifold;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_ratio = f64::INFINITY;
    let mut max_lip = 0.0_f64;
    for _ in 0..n_pairs {
        let mut attempts = 0;
        let (y, y2, d) = loop {
            let y = m.random_point(&game.center, radius, &mut rng)?;
            let y2 = m.random_point(&game.center, radius, &mut rng)?;
            let d = m.dist(&y, &y2)?;
            if d >= MIN_PAIR_DISTANCE {
                break (y, y2, d);
            }
            attempts += 1;
            if attempts >= MAX_RESAMPLES {
                return Err(Error::DegenerateSample { attempts });
            }
        };
        let f = joint_gradient(game, &y)?;
        let f2 = m.transport(&y2, &y, &joint_gradient(game, &y2)?)?;
        let diff = f2.sub(&f)?;
        let log = m.log(&y, &y2)?;
        min_ratio = min_ratio.min(m.inner(&y, &diff, &log)? / (d * d));
        max_lip = max_lip.max(m.norm(&diff)? / d);
    }
    Ok(MonotonicityReport {
        samples: n_pairs,
        min_ratio,
        max_lipschitz_ratio: max_lip,
    })
}
