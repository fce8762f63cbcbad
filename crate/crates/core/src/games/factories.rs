//! Example games: distance potentials, the robust matrix Karcher mean,
//! a strongly convex-concave distance game and Euclidean affine games.

use std::sync::Arc;

use super::{check_monotonicity, Game, GameSpec};
use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, SymMatrix};
use crate::manifold::{curvature_distortion, Coords, Manifold, Point, TangentVector};

/// Radius of the geodesic ball used to sample and certify constants.
pub const SAMPLING_RADIUS: f64 = 2.0;

/// Pairs used when a factory certifies its own constants.
const CERTIFY_PAIRS: usize = 400;
const CERTIFY_SEED: u64 = 0x5eed;

fn half_sq_dist(m: &Manifold, y: &Point, a: &Point) -> Result<f64> {
    Ok(0.5 * m.dist(y, a)?.powi(2))
}

/// `Σᵢ ½ d(yᵢ, aᵢ)²` shared by every player.
struct PotentialDistance {
    factors: Vec<Manifold>,
    anchors: Vec<Point>,
}

impl Game for PotentialDistance {
    fn loss(&self, _player: usize, y: &Point) -> Result<f64> {
        let mut f = 0.0;
        for (i, m) in self.factors.iter().enumerate() {
            f += half_sq_dist(m, &y.component(i), &self.anchors[i])?;
        }
        Ok(f)
    }

    fn gradient(&self, y: &Point) -> Result<TangentVector> {
        let parts = self
            .factors
            .iter()
            .enumerate()
            .map(|(i, m)| Ok(m.log(&y.component(i), &self.anchors[i])?.neg()))
            .collect::<Result<Vec<_>>>()?;
        TangentVector::from_components(y, parts)
    }
}

/// Potential game with `f(y) = Σᵢ ½ d(yᵢ, aᵢ)²` and Nash equilibrium at the
/// anchors. Each player's loss is `f`, so `Fᵢ(y) = −log_{yᵢ}(aᵢ)`.
///
/// On Hadamard factors `½d(·, a)²` is 1-strongly geodesically convex, so
/// μ = 1. The claimed L is the Hessian bound `ξ(R, c)` on the sampling ball
/// of radius R around the anchors, with c the factor's curvature bound.
pub fn potential_distance_game(factors: Vec<Manifold>, anchors: Vec<Point>) -> Result<GameSpec> {
    if factors.len() != anchors.len() || factors.is_empty() {
        return Err(Error::InvalidAnchor(format!(
            "{} anchors for {} players",
            anchors.len(),
            factors.len()
        )));
    }
    for (m, a) in factors.iter().zip(&anchors) {
        m.validate()?;
        m.check_point(a)
            .map_err(|e| Error::InvalidAnchor(e.to_string()))?;
    }
    let mut lipschitz = 1.0_f64;
    for m in &factors {
        lipschitz = lipschitz.max(curvature_distortion(
            SAMPLING_RADIUS,
            m.curvature_lower_bound(),
        )?);
    }
    let nash = Point::product(anchors.clone());
    let model = Arc::new(PotentialDistance {
        factors: factors.clone(),
        anchors,
    });
    GameSpec::new(
        "potential_distance",
        factors,
        model,
        1.0,
        lipschitz,
        nash.clone(),
        Some(nash),
    )
}

/// Robust Karcher mean as a game: the min player X has loss
/// `u = Σᵢ d(X,Yᵢ)² − γ Σᵢ d(Yᵢ,Aᵢ)²` and each max player Yᵢ has loss `−u`.
struct RobustKarcher {
    manifold: Manifold,
    anchors: Vec<Point>,
    gamma: f64,
}

impl RobustKarcher {
    fn objective(&self, y: &Point) -> Result<f64> {
        let x = y.component(0);
        let mut u = 0.0;
        for (i, a) in self.anchors.iter().enumerate() {
            let yi = y.component(i + 1);
            u += self.manifold.dist(&x, &yi)?.powi(2);
            u -= self.gamma * self.manifold.dist(&yi, a)?.powi(2);
        }
        Ok(u)
    }
}

impl Game for RobustKarcher {
    fn loss(&self, player: usize, y: &Point) -> Result<f64> {
        let u = self.objective(y)?;
        Ok(if player == 0 { u } else { -u })
    }

    fn gradient(&self, y: &Point) -> Result<TangentVector> {
        let m = &self.manifold;
        let x = y.component(0);
        let mut gx = TangentVector::zero(&x);
        let mut parts = Vec::with_capacity(self.anchors.len() + 1);
        parts.push(TangentVector::zero(&x));
        for (i, a) in self.anchors.iter().enumerate() {
            let yi = y.component(i + 1);
            // ∂_X d(X,Yᵢ)² = −2 log_X Yᵢ
            gx = gx.add_scaled(-2.0, &m.log(&x, &yi)?)?;
            // −∂_{Yᵢ} u = 2 log_{Yᵢ} X − 2γ log_{Yᵢ} Aᵢ
            let gy = m
                .log(&yi, &x)?
                .scale(2.0)
                .add_scaled(-2.0 * self.gamma, &m.log(&yi, a)?)?;
            parts.push(gy);
        }
        parts[0] = gx;
        TangentVector::from_components(y, parts)
    }
}

/// Approximate Karcher mean of SPD anchors by fixed-point iteration
/// `X ← exp_X(mean_i log_X Aᵢ)`.
pub fn karcher_center(manifold: &Manifold, anchors: &[Point]) -> Result<Point> {
    let mut x = anchors[0].clone();
    for _ in 0..200 {
        let mut step = TangentVector::zero(&x);
        for a in anchors {
            step = step.add_scaled(1.0 / anchors.len() as f64, &manifold.log(&x, a)?)?;
        }
        if manifold.norm(&step)? < 1e-14 {
            break;
        }
        x = manifold.exp(&x, &step)?;
    }
    Ok(x)
}

/// Robust matrix Karcher mean game on SPD(n)^(1+N).
///
/// Requires γ > 1. The claimed constants are certified at construction by
/// sampling the monotonicity and smoothness quotients around the center
/// `(mean(A), A₁, …, A_N)`, with margins `μ = 0.95·min`, `L = 1.05·max`.
pub fn robust_karcher_game(anchors: Vec<Point>, gamma: f64) -> Result<GameSpec> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let n = match anchors.first().map(|a| &a.coords) {
        Some(Coords::Matrix(m)) => m.dim(),
        _ => return Err(Error::InvalidAnchor("need at least one SPD anchor".into())),
    };
    let manifold = Manifold::Spd(n);
    for a in &anchors {
        manifold
            .check_point(a)
            .map_err(|e| Error::InvalidAnchor(e.to_string()))?;
    }
    let mean = karcher_center(&manifold, &anchors)?;
    let mut center = vec![mean];
    center.extend(anchors.iter().cloned());
    let players = vec![manifold.clone(); anchors.len() + 1];
    let nash = if anchors.len() == 1 {
        Some(Point::product(vec![anchors[0].clone(), anchors[0].clone()]))
    } else {
        None
    };
    let model = Arc::new(RobustKarcher {
        manifold,
        anchors,
        gamma,
    });
    // provisional constants; replaced by the certified ones below
    let provisional = GameSpec::new(
        "robust_karcher",
        players,
        model,
        0.0,
        1.0,
        Point::product(center),
        nash,
    )?;
    let report = check_monotonicity(&provisional, CERTIFY_PAIRS, CERTIFY_SEED)?;
    if !(report.min_ratio > 0.0) {
        return Err(Error::NonMonotone(report.min_ratio));
    }
    provisional.with_constants(0.95 * report.min_ratio, 1.05 * report.max_lipschitz_ratio)
}

/// `u(y₁,y₂) = ½d(y₁,a)² − ½d(y₂,b)² + λ(y₁−a)ᵀ(y₂−b)`; player 1 minimizes
/// `u`, player 2 minimizes `−u`.
struct MinMaxDistance {
    first: Manifold,
    second: Manifold,
    a: Point,
    b: Point,
    lambda: f64,
}

impl MinMaxDistance {
    fn coupling(&self, y1: &Point, y2: &Point) -> Result<f64> {
        if self.lambda == 0.0 {
            return Ok(0.0);
        }
        let u = self.first.log(&self.a, y1)?;
        let v = self.second.log(&self.b, y2)?;
        let (u, v) = (u.coords.as_vector().unwrap(), v.coords.as_vector().unwrap());
        Ok(self.lambda * u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>())
    }
}

impl Game for MinMaxDistance {
    fn loss(&self, player: usize, y: &Point) -> Result<f64> {
        let (y1, y2) = (y.component(0), y.component(1));
        let u = half_sq_dist(&self.first, &y1, &self.a)?
            - half_sq_dist(&self.second, &y2, &self.b)?
            + self.coupling(&y1, &y2)?;
        Ok(if player == 0 { u } else { -u })
    }

    fn gradient(&self, y: &Point) -> Result<TangentVector> {
        let (y1, y2) = (y.component(0), y.component(1));
        let mut g1 = self.first.log(&y1, &self.a)?.neg();
        let mut g2 = self.second.log(&y2, &self.b)?.neg();
        if self.lambda != 0.0 {
            // Euclidean factors only: the coupling gradients are λ(y₂−b) and −λ(y₁−a).
            let d1 = Coords::Vector(
                self.first
                    .log(&self.a, &y1)?
                    .coords
                    .as_vector()
                    .unwrap()
                    .to_vec(),
            );
            let d2 = Coords::Vector(
                self.second
                    .log(&self.b, &y2)?
                    .coords
                    .as_vector()
                    .unwrap()
                    .to_vec(),
            );
            g1 = TangentVector::new(y1.clone(), g1.coords.add_scaled(self.lambda, &d2)?);
            g2 = TangentVector::new(y2.clone(), g2.coords.add_scaled(-self.lambda, &d1)?);
        }
        TangentVector::from_components(y, vec![g1, g2])
    }
}

/// Two-player geodesically strongly convex-concave distance game.
///
/// Nonzero coupling is supported on Euclidean factors of equal dimension,
/// with |λ| < 1; curved factors require λ = 0. On Euclidean factors the
/// Jacobian is `I + λK` with K skew, so μ = 1 and L = √(1+λ²).
pub fn min_max_distance_game(
    factors: (Manifold, Manifold),
    a: Point,
    b: Point,
    lambda: f64,
) -> Result<GameSpec> {
    let (first, second) = factors;
    if !(lambda.abs() < 1.0) {
        return Err(Error::CouplingTooLarge(lambda));
    }
    let euclidean_pair =
        matches!((&first, &second), (Manifold::Euclidean(p), Manifold::Euclidean(q)) if p == q);
    if lambda != 0.0 && !euclidean_pair {
        return Err(Error::CouplingTooLarge(lambda));
    }
    first
        .check_point(&a)
        .map_err(|e| Error::InvalidAnchor(e.to_string()))?;
    second
        .check_point(&b)
        .map_err(|e| Error::InvalidAnchor(e.to_string()))?;
    let lipschitz = if lambda != 0.0 {
        (1.0 + lambda * lambda).sqrt()
    } else {
        let c = first
            .curvature_lower_bound()
            .min(second.curvature_lower_bound());
        curvature_distortion(SAMPLING_RADIUS, c)?
    };
    let nash = Point::product(vec![a.clone(), b.clone()]);
    let model = Arc::new(MinMaxDistance {
        first: first.clone(),
        second: second.clone(),
        a,
        b,
        lambda,
    });
    GameSpec::new(
        "min_max_distance",
        vec![first, second],
        model,
        1.0,
        lipschitz,
        nash.clone(),
        Some(nash),
    )
}

/// Euclidean game with `F(y) = A y + b`; player i owns the block `yᵢ` and
/// has loss `½ yᵢᵀAᵢᵢyᵢ + yᵢᵀ Σ_{j≠i} Aᵢⱼ yⱼ + bᵢᵀyᵢ`.
struct AffineGame {
    blocks: Vec<usize>,
    offsets: Vec<usize>,
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl AffineGame {
    fn flatten(&self, y: &Point) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        for i in 0..self.blocks.len() {
            out.extend_from_slice(y.component(i).coords.as_vector().unwrap());
        }
        out
    }

    fn field(&self, z: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| {
                self.a[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(z)
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
                    + self.b[r]
            })
            .collect()
    }
}

impl Game for AffineGame {
    fn loss(&self, player: usize, y: &Point) -> Result<f64> {
        let z = self.flatten(y);
        let (lo, hi) = (
            self.offsets[player],
            self.offsets[player] + self.blocks[player],
        );
        let d = self.dim;
        let mut l = 0.0;
        for r in lo..hi {
            let mut row = self.b[r];
            for c in 0..d {
                let w = if (lo..hi).contains(&c) { 0.5 } else { 1.0 };
                row += w * self.a[r * d + c] * z[c];
            }
            l += z[r] * row;
        }
        Ok(l)
    }

    fn gradient(&self, y: &Point) -> Result<TangentVector> {
        let f = self.field(&self.flatten(y));
        let parts = (0..self.blocks.len())
            .map(|i| {
                let (lo, hi) = (self.offsets[i], self.offsets[i] + self.blocks[i]);
                TangentVector::new(y.component(i), Coords::Vector(f[lo..hi].to_vec()))
            })
            .collect();
        TangentVector::from_components(y, parts)
    }
}

/// Euclidean affine game `F(y) = A y + b` with player blocks of the given
/// sizes. Diagonal blocks must be symmetric and `sym(A)` positive
/// semidefinite; μ = λ_min(sym A), L = ‖A‖₂. The Nash equilibrium solves
/// `A y = −b` when A is nonsingular.
pub fn affine_game(blocks: Vec<usize>, a: Vec<f64>, b: Vec<f64>) -> Result<GameSpec> {
    let dim: usize = blocks.iter().sum();
    if blocks.is_empty() || blocks.contains(&0) || a.len() != dim * dim || b.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            actual: a.len(),
        });
    }
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut off = 0;
    for &bl in &blocks {
        offsets.push(off);
        for r in off..off + bl {
            for c in off..off + bl {
                if (a[r * dim + c] - a[c * dim + r]).abs() > 1e-12 {
                    return Err(Error::NonSymmetric {
                        asymmetry: (a[r * dim + c] - a[c * dim + r]).abs(),
                    });
                }
            }
        }
        off += bl;
    }
    let (mu, lipschitz) = affine_constants(&a, dim)?;
    if mu < -1e-12 {
        return Err(Error::NonMonotone(mu));
    }
    let mu = mu.max(0.0);
    let nash = solve_linear(&a, &b.iter().map(|x| -x).collect::<Vec<_>>(), dim);
    let split = |z: &[f64]| {
        Point::product(
            blocks
                .iter()
                .zip(&offsets)
                .map(|(&bl, &o)| Point::vector(z[o..o + bl].to_vec()))
                .collect(),
        )
    };
    let center = nash
        .as_deref()
        .map_or_else(|| split(&vec![0.0; dim]), split);
    let nash = nash.as_deref().map(split);
    let players = blocks.iter().map(|&n| Manifold::Euclidean(n)).collect();
    let model = Arc::new(AffineGame {
        blocks,
        offsets,
        dim,
        a,
        b,
    });
    GameSpec::new(
        "affine",
        players,
        model,
        mu,
        lipschitz.max(mu).max(f64::MIN_POSITIVE),
        center,
        nash,
    )
}

/// Bilinear saddle `u(x, y) = xᵀy` between two players in ℝⁿ (μ = 0, L = 1).
pub fn bilinear_saddle_game(n: usize) -> Result<GameSpec> {
    let d = 2 * n;
    let mut a = vec![0.0; d * d];
    for i in 0..n {
        a[i * d + n + i] = 1.0;
        a[(n + i) * d + i] = -1.0;
    }
    let mut g = affine_game(vec![n, n], a, vec![0.0; d])?;
    g.name = "bilinear_saddle".into();
    Ok(g)
}

/// `(λ_min(sym A), ‖A‖₂)` for a dense d×d matrix.
pub(crate) fn affine_constants(a: &[f64], d: usize) -> Result<(f64, f64)> {
    if d == 1 {
        return Ok((a[0], a[0].abs()));
    }
    let sym = SymMatrix::symmetrized(d, a.to_vec());
    let mu = sym_eigen(&sym)?.eigenvalues[0];
    let mut ata = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            ata[i * d + j] = (0..d).map(|k| a[k * d + i] * a[k * d + j]).sum();
        }
    }
    let top = *sym_eigen(&SymMatrix::symmetrized(d, ata))?
        .eigenvalues
        .last()
        .unwrap();
    Ok((mu, top.max(0.0).sqrt()))
}

/// Gaussian elimination with partial pivoting; `None` when singular.
pub(crate) fn solve_linear(a: &[f64], rhs: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut m: Vec<f64> = a.to_vec();
    let mut x = rhs.to_vec();
    let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(1.0);
    for col in 0..d {
        let piv =
            (col..d).max_by(|&i, &j| m[i * d + col].abs().total_cmp(&m[j * d + col].abs()))?;
        if m[piv * d + col].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for k in 0..d {
                m.swap(piv * d + k, col * d + k);
            }
            x.swap(piv, col);
        }
        for r in (col + 1)..d {
            let f = m[r * d + col] / m[col * d + col];
            if f != 0.0 {
                for k in col..d {
                    m[r * d + k] -= f * m[col * d + k];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for r in (0..d).rev() {
        let s: f64 = ((r + 1)..d).map(|k| m[r * d + k] * x[k]).sum();
        x[r] = (x[r] - s) / m[r * d + r];
    }
    Some(x)
}
