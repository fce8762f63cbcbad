use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use rgames_core::games::{
    bilinear_saddle_game, check_monotonicity, min_max_distance_game, potential_distance_game,
    robust_karcher_game, GameSpec, SAMPLING_RADIUS,
};
use rgames_core::linalg::SymMatrix;
use rgames_core::manifold::{hyperboloid_point, Manifold, Point};
use rgames_core::solvers::{
    affine_mixed_vi, run_mixed_vi, run_rgd, Constraint, GradientSource, MixedViProblem, Reference,
    SolverConfig,
};

use crate::config::{ConstantSpec, ExperimentConfig, SolverKind};
use crate::error::CliError;

/// Margins applied to sampled extremes: `μ = 0.95·min`, `L = 1.05·max`.
pub const MU_MARGIN: f64 = 0.95;
pub const LIPSCHITZ_MARGIN: f64 = 1.05;

const PRE_RUN_ITERATIONS: usize = 50_000;
const PRE_RUN_TOLERANCE: f64 = 1e-11;
const START_SALT: u64 = 0x57a7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    PotentialSpd,
    PotentialHyperbolic,
    KarcherRobust,
    MinmaxDistance,
    MixedViOrthant,
    RegBilinear,
}

pub const ALL_SCENARIOS: [ScenarioName; 6] = [
    ScenarioName::PotentialSpd,
    ScenarioName::PotentialHyperbolic,
    ScenarioName::KarcherRobust,
    ScenarioName::MinmaxDistance,
    ScenarioName::MixedViOrthant,
    ScenarioName::RegBilinear,
];

/// One row of `rgames scenarios`.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub solver: &'static str,
    pub geometry: &'static str,
    pub dim: usize,
    pub players: Option<usize>,
    pub parameters: &'static str,
    pub description: &'static str,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::PotentialSpd => "potential_spd",
            ScenarioName::PotentialHyperbolic => "potential_hyperbolic",
            ScenarioName::KarcherRobust => "karcher_robust",
            ScenarioName::MinmaxDistance => "minmax_distance",
            ScenarioName::MixedViOrthant => "mixed_vi_orthant",
            ScenarioName::RegBilinear => "reg_bilinear",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        ALL_SCENARIOS.into_iter().find(|s| s.as_str() == name)
    }

    pub fn default_solver(self) -> SolverKind {
        match self {
            ScenarioName::MixedViOrthant => SolverKind::Mixed,
            ScenarioName::RegBilinear => SolverKind::Reg,
            _ => SolverKind::Rgd,
        }
    }

    pub fn default_dim(self) -> usize {
        match self {
            ScenarioName::PotentialSpd => 3,
            _ => 2,
        }
    }

    pub fn default_players(self) -> Option<usize> {
        match self {
            ScenarioName::PotentialSpd | ScenarioName::PotentialHyperbolic => Some(2),
            ScenarioName::KarcherRobust => Some(3),
            _ => None,
        }
    }

    pub fn info(self) -> ScenarioInfo {
        let (geometry, parameters, description) = match self {
            ScenarioName::PotentialSpd => (
                "spd",
                "anchor_seed=0",
                "distance potential on SPD factors, Nash at the anchors",
            ),
            ScenarioName::PotentialHyperbolic => (
                "hyperboloid",
                "anchor_seed=0",
                "distance potential on hyperboloid factors, Nash at the anchors",
            ),
            ScenarioName::KarcherRobust => (
                "spd",
                "gamma=2, anchor_seed=0",
                "robust Karcher mean min-max game, reference from a converged pre-run",
            ),
            ScenarioName::MinmaxDistance => (
                "euclidean",
                "lambda=0.5, anchor_seed=0",
                "coupled strongly convex-concave distance game",
            ),
            ScenarioName::MixedViOrthant => (
                "euclidean x orthant",
                "anchor_seed=0",
                "affine strongly monotone mixed VI, reference from a converged pre-run",
            ),
            ScenarioName::RegBilinear => (
                "euclidean",
                "step_size=1/(2L), max_iterations=200",
                "bilinear saddle solved by extragradient",
            ),
        };
        ScenarioInfo {
            name: self.as_str(),
            solver: self.default_solver().as_str(),
            geometry,
            dim: self.default_dim(),
            players: self.default_players(),
            parameters,
            description,
        }
    }
}

pub fn list_scenarios() -> Vec<ScenarioInfo> {
    ALL_SCENARIOS.iter().map(|s| s.info()).collect()
}

/// Plain-text table of the scenarios.
pub fn scenarios_table() -> String {
    let rows = list_scenarios();
    let mut out = format!(
        "{:<22} {:<6} {:<20} {:>3} {:>7}  {:<38} {}\n",
        "scenario", "solver", "geometry", "dim", "players", "parameters", "description"
    );
    for r in rows {
        let players = r.players.map_or_else(|| "-".to_string(), |p| p.to_string());
        out.push_str(&format!(
            "{:<22} {:<6} {:<20} {:>3} {:>7}  {:<38} {}\n",
            r.name, r.solver, r.geometry, r.dim, players, r.parameters, r.description
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub enum Problem {
    Game(GameSpec),
    Mixed(MixedViProblem),
}

impl Problem {
    pub fn constants(&self) -> (f64, f64) {
        match self {
            Problem::Game(g) => (g.mu, g.lipschitz),
            Problem::Mixed(p) => (p.mu, p.lipschitz),
        }
    }

    pub fn manifold(&self) -> &Manifold {
        match self {
            Problem::Game(g) => &g.manifold,
            Problem::Mixed(p) => &p.manifold,
        }
    }
}

/// Where each constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    Claimed,
    Given,
    Estimated,
}

/// A fully built experiment: problem, initial iterate and reference.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: Problem,
    pub start: Point,
    pub start_multipliers: Vec<f64>,
    pub reference: Reference,
    pub mu_source: ConstantSource,
    pub lipschitz_source: ConstantSource,
}

impl Instance {
    /// `d(z₀, z*)`.
    pub fn initial_distance(&self) -> Result<f64, CliError> {
        let dm = self
            .problem
            .manifold()
            .dist(&self.start, &self.reference.point)?;
        let de: f64 = self
            .start_multipliers
            .iter()
            .zip(&self.reference.multipliers)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((dm * dm + de).sqrt())
    }
}

fn anchors_around(
    m: &Manifold,
    center: &Point,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Point>, CliError> {
    (0..count)
        .map(|_| m.random_point(center, 1.0, rng).map_err(CliError::from))
        .collect()
}

/// The scenario's game or mixed problem with the factory's claimed
/// constants.
pub fn build_problem(config: &ExperimentConfig) -> Result<Problem, CliError> {
    let s = config.scenario;
    let dim = config.dim.unwrap_or_else(|| s.default_dim());
    let players = config.players.or_else(|| s.default_players());
    let mut rng = ChaCha8Rng::seed_from_u64(config.anchor_seed);
    let euclid_only = |name: &str, v: Option<f64>| -> Result<(), CliError> {
        match v {
            Some(_) => Err(CliError::Config(format!(
                "{name} does not apply to scenario {}",
                s.as_str()
            ))),
            None => Ok(()),
        }
    };
    if s != ScenarioName::KarcherRobust {
        euclid_only("gamma", config.gamma)?;
    }
    if s != ScenarioName::MinmaxDistance {
        euclid_only("lambda", config.lambda)?;
    }
    if players.is_none() && config.players.is_some() {
        return Err(CliError::Config(format!(
            "players does not apply to scenario {}",
            s.as_str()
        )));
    }
    Ok(match s {
        ScenarioName::PotentialSpd => {
            let m = Manifold::Spd(dim);
            let anchors = anchors_around(
                &m,
                &Point::matrix(SymMatrix::identity(dim)),
                players.unwrap(),
                &mut rng,
            )?;
            Problem::Game(potential_distance_game(vec![m; anchors.len()], anchors)?)
        }
        ScenarioName::PotentialHyperbolic => {
            let m = Manifold::Hyperboloid(dim);
            let anchors = anchors_around(
                &m,
                &hyperboloid_point(&vec![0.0; dim]),
                players.unwrap(),
                &mut rng,
            )?;
            Problem::Game(potential_distance_game(vec![m; anchors.len()], anchors)?)
        }
        ScenarioName::KarcherRobust => {
            let m = Manifold::Spd(dim);
            let anchors = anchors_around(
                &m,
                &Point::matrix(SymMatrix::identity(dim)),
                players.unwrap(),
                &mut rng,
            )?;
            Problem::Game(robust_karcher_game(anchors, config.gamma.unwrap_or(2.0))?)
        }
        ScenarioName::MinmaxDistance => {
            let m = Manifold::Euclidean(dim);
            let origin = Point::vector(vec![0.0; dim]);
            let a = m.random_point(&origin, 1.0, &mut rng)?;
            let b = m.random_point(&origin, 1.0, &mut rng)?;
            Problem::Game(min_max_distance_game(
                (m.clone(), m),
                a,
                b,
                config.lambda.unwrap_or(0.5),
            )?)
        }
        ScenarioName::MixedViOrthant => {
            let (a, b) = random_affine_operator(2 * dim, &mut rng);
            Problem::Mixed(affine_mixed_vi(
                dim,
                dim,
                a,
                b,
                Constraint::NonnegativeOrthant,
            )?)
        }
        ScenarioName::RegBilinear => Problem::Game(bilinear_saddle_game(dim)?),
    })
}

/// `A = G Gᵀ/d + I/2 + (H − Hᵀ)/2` with Gaussian G, H, so that
/// `λ_min(sym A) ≥ 1/2`; b is standard Gaussian.
fn random_affine_operator(d: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let g: Vec<f64> = (0..d * d).map(|_| normal()).collect();
    let h: Vec<f64> = (0..d * d).map(|_| normal()).collect();
    let b: Vec<f64> = (0..d).map(|_| normal()).collect();
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let ggt: f64 = (0..d).map(|k| g[i * d + k] * g[j * d + k]).sum();
            a[i * d + j] = ggt / d as f64 + 0.5 * (h[i * d + j] - h[j * d + i]);
        }
        a[i * d + i] += 0.5;
    }
    (a, b)
}

/// Sampled `(μ_est, L_est) = (0.95·min, 1.05·max)` of the monotonicity and
/// smoothness quotients around the problem's center.
pub fn estimate_problem_constants(
    problem: &Problem,
    pairs: usize,
    seed: u64,
) -> Result<(f64, f64), CliError> {
    match problem {
        Problem::Game(g) => estimate_game_constants(g, pairs, seed),
        Problem::Mixed(p) => estimate_mixed_constants(p, pairs, seed),
    }
}

pub fn estimate_game_constants(
    game: &GameSpec,
    pairs: usize,
    seed: u64,
) -> Result<(f64, f64), CliError> {
    let r = check_monotonicity(game, pairs, seed)?;
    Ok((
        MU_MARGIN * r.min_ratio,
        LIPSCHITZ_MARGIN * r.max_lipschitz_ratio,
    ))
}

/// Euclidean mixed problems: y in the ball of radius 2 around the origin,
/// multipliers uniform on `[0, 2]`.
fn estimate_mixed_constants(
    problem: &MixedViProblem,
    pairs: usize,
    seed: u64,
) -> Result<(f64, f64), CliError> {
    if !problem.manifold.is_euclidean() {
        return Err(CliError::Config(
            "constant estimation needs a Euclidean manifold block".into(),
        ));
    }
    if pairs == 0 {
        return Err(CliError::Config("need at least one pair".into()));
    }
    let p = problem.manifold.intrinsic_dim();
    let n = problem.euclidean_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin = Point::vector(vec![0.0; p]);
    let sample = |rng: &mut ChaCha8Rng| -> Result<(Point, Vec<f64>), CliError> {
        let y = problem
            .manifold
            .random_point(&origin, SAMPLING_RADIUS, rng)?;
        let x = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
        Ok((y, x))
    };
    let flat = |y: &Point, x: &[f64]| -> Vec<f64> {
        let mut v = y.coords.as_vector().unwrap().to_vec();
        v.extend_from_slice(x);
        v
    };
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = 0.0_f64;
    for _ in 0..pairs {
        let (y1, x1) = sample(&mut rng)?;
        let (y2, x2) = sample(&mut rng)?;
        let (fm1, fe1) = problem.evaluate(&y1, &x1)?;
        let (fm2, fe2) = problem.evaluate(&y2, &x2)?;
        let dz: Vec<f64> = flat(&y2, &x2)
            .iter()
            .zip(flat(&y1, &x1))
            .map(|(a, b)| a - b)
            .collect();
        let df: Vec<f64> = flat(
            &Point::vector(fm2.coords.as_vector().unwrap().to_vec()),
            &fe2,
        )
        .iter()
        .zip(flat(
            &Point::vector(fm1.coords.as_vector().unwrap().to_vec()),
            &fe1,
        ))
        .map(|(a, b)| a - b)
        .collect();
        let d2: f64 = dz.iter().map(|v| v * v).sum();
        if d2 < 1e-12 {
            continue;
        }
        let inner: f64 = dz.iter().zip(&df).map(|(a, b)| a * b).sum();
        let nf: f64 = df.iter().map(|v| v * v).sum::<f64>().sqrt();
        min_ratio = min_ratio.min(inner / d2);
        max_ratio = max_ratio.max(nf / d2.sqrt());
    }
    Ok((MU_MARGIN * min_ratio, LIPSCHITZ_MARGIN * max_ratio))
}

fn resolve(spec: Option<ConstantSpec>, claimed: f64, estimated: f64) -> (f64, ConstantSource) {
    match spec {
        None => (claimed, ConstantSource::Claimed),
        Some(ConstantSpec::Value(v)) => (v, ConstantSource::Given),
        Some(ConstantSpec::Keyword(_)) => (estimated, ConstantSource::Estimated),
    }
}

fn with_constants(problem: Problem, mu: f64, lipschitz: f64) -> Result<Problem, CliError> {
    Ok(match problem {
        Problem::Game(g) => Problem::Game(g.with_constants(mu, lipschitz)?),
        Problem::Mixed(mut p) => {
            if !(lipschitz > 0.0) || !(mu >= 0.0) || mu > lipschitz || !lipschitz.is_finite() {
                return Err(CliError::Config(format!(
                    "need 0 <= mu <= L, got mu = {mu}, L = {lipschitz}"
                )));
            }
            p.mu = mu;
            p.lipschitz = lipschitz;
            Problem::Mixed(p)
        }
    })
}

/// Converged exact run from `y0`, used when no closed-form solution exists.
fn pre_run_game(game: &GameSpec) -> Result<Reference, CliError> {
    if !(game.mu > 0.0) {
        return Err(CliError::Config("a pre-run reference needs mu > 0".into()));
    }
    let mut c = SolverConfig::constant(game.mu / game.lipschitz.powi(2), PRE_RUN_ITERATIONS);
    c.epsilon = PRE_RUN_TOLERANCE;
    c.record_every = PRE_RUN_ITERATIONS;
    let t = run_rgd(game, GradientSource::Exact, &game.center, &c, None)?;
    t.check()?;
    Ok(Reference::pre_run(t.terminal_point))
}

fn pre_run_mixed(problem: &MixedViProblem) -> Result<Reference, CliError> {
    let mut c = SolverConfig::constant(problem.mu / problem.lipschitz.powi(2), PRE_RUN_ITERATIONS);
    c.epsilon = PRE_RUN_TOLERANCE;
    c.record_every = PRE_RUN_ITERATIONS;
    let y0 = Point::vector(vec![0.0; problem.manifold.intrinsic_dim()]);
    let t = run_mixed_vi(problem, &y0, &vec![0.0; problem.euclidean_dim], &c, None)?;
    t.check()?;
    let mut r = Reference::pre_run(t.terminal_point);
    r.multipliers = t.terminal_multipliers;
    Ok(r)
}

/// Builds the problem, resolves its constants, computes the reference and
/// places the initial iterate at geodesic distance `start_radius` from the
/// reference in a direction drawn from `anchor_seed`. Mixed problems start
/// with zero multipliers.
pub fn build_instance(config: &ExperimentConfig) -> Result<Instance, CliError> {
    let problem = build_problem(config)?;
    let (claimed_mu, claimed_l) = problem.constants();
    let wants_estimate = [config.mu, config.lipschitz]
        .iter()
        .any(|c| matches!(c, Some(ConstantSpec::Keyword(_))));
    let (est_mu, est_l) = if wants_estimate {
        estimate_problem_constants(&problem, config.estimate_pairs, config.anchor_seed)?
    } else {
        (claimed_mu, claimed_l)
    };
    let (mu, mu_source) = resolve(config.mu, claimed_mu, est_mu);
    let (lipschitz, lipschitz_source) = resolve(config.lipschitz, claimed_l, est_l);
    let problem = if (mu, lipschitz) == (claimed_mu, claimed_l) {
        problem
    } else {
        with_constants(problem, mu.max(0.0), lipschitz)?
    };
    let reference = match &problem {
        Problem::Game(g) => match &g.nash {
            Some(n) => Reference::analytic(n.clone()),
            None => pre_run_game(g)?,
        },
        Problem::Mixed(p) => pre_run_mixed(p)?,
    };
    let m = problem.manifold();
    let mut rng = ChaCha8Rng::seed_from_u64(config.anchor_seed ^ START_SALT);
    let dir = m.random_unit_tangent(&reference.point, &mut rng)?;
    let start = m.exp(&reference.point, &dir.scale(config.start_radius))?;
    let start_multipliers = vec![0.0; reference.multipliers.len()];
    Ok(Instance {
        problem,
        start,
        start_multipliers,
        reference,
        mu_source,
        lipschitz_source,
    })
}
