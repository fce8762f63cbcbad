use std::sync::Arc;

use super::*;
use crate::games::{
    bilinear_saddle_game, joint_gradient, potential_distance_game, Game, GameSpec, StochasticOracle,
};
use crate::linalg::SymMatrix;
use crate::manifold::{Coords, Manifold, Point, TangentVector};
use approx::assert_abs_diff_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quadratic(n: usize) -> GameSpec {
    potential_distance_game(
        vec![Manifold::Euclidean(n)],
        vec![Point::vector(vec![0.0; n])],
    )
    .unwrap()
}

fn euclid(v: &[f64]) -> Point {
    Point::product(vec![Point::vector(v.to_vec())])
}

fn spd_game() -> GameSpec {
    potential_distance_game(
        vec![Manifold::Spd(2)],
        vec![Point::matrix(SymMatrix::diagonal(&[4.0, 1.0]))],
    )
    .unwrap()
}

fn vec_of(p: &Point) -> Vec<f64> {
    p.component(0).coords.as_vector().unwrap().to_vec()
}

/// Scalar game with a caller-supplied field.
struct Field1d(fn(f64) -> f64);

impl Game for Field1d {
    fn loss(&self, _player: usize, _y: &Point) -> crate::Result<f64> {
        Ok(0.0)
    }

    fn gradient(&self, y: &Point) -> crate::Result<TangentVector> {
        let v = y.component(0).coords.as_vector().unwrap()[0];
        let part = TangentVector::new(y.component(0), Coords::Vector(vec![(self.0)(v)]));
        TangentVector::from_components(y, vec![part])
    }
}

fn field_game(f: fn(f64) -> f64, mu: f64, l: f64) -> GameSpec {
    GameSpec::new(
        "field",
        vec![Manifold::Euclidean(1)],
        Arc::new(Field1d(f)),
        mu,
        l,
        euclid(&[0.0]),
        None,
    )
    .unwrap()
}

#[test]
fn rgd_step_examples() {
    let g = quadratic(2);
    let y = euclid(&[3.0, 4.0]);
    let f = joint_gradient(&g, &y).unwrap();
    assert_eq!(vec_of(&rgd_step(&g, &y, 1.0, &f).unwrap()), vec![0.0, 0.0]);
    assert_eq!(rgd_step(&g, &y, 0.7, &TangentVector::zero(&y)).unwrap(), y);
    assert!(rgd_step(&g, &y, 0.0, &f).is_err());

    let g = spd_game();
    let y = Point::product(vec![Point::matrix(SymMatrix::identity(2))]);
    let f = joint_gradient(&g, &y).unwrap();
    let next = rgd_step(&g, &y, 1.0, &f).unwrap();
    let m = next.component(0).coords.as_matrix().unwrap().clone();
    assert_abs_diff_eq!(m.get(0, 0), 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(m.get(1, 1), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(m.get(0, 1), 0.0, epsilon = 1e-12);
}

#[test]
fn rgd_step_moves_by_eta_times_norm() {
    let g = potential_distance_game(
        vec![Manifold::Spd(3), Manifold::Hyperboloid(2)],
        vec![
            Point::matrix(SymMatrix::diagonal(&[2.0, 1.0, 0.5])),
            crate::manifold::hyperboloid_point(&[0.3, 0.2]),
        ],
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let y = g.manifold.random_point(&g.center, 2.0, &mut rng).unwrap();
        let f = joint_gradient(&g, &y).unwrap();
        let eta = rng.random_range(0.05..1.0);
        let next = rgd_step(&g, &y, eta, &f).unwrap();
        let d = g.manifold.dist(&y, &next).unwrap();
        assert!((d - eta * g.manifold.norm(&f).unwrap()).abs() <= 1e-8);
    }
}

#[test]
fn theorem_schedule_examples() {
    assert_eq!(
        theorem_schedule(1.0, 2.0, 0.0, 1.0, 1e-3).unwrap().eta,
        0.25
    );
    let s = theorem_schedule(1.0, 1.0, 0.0, 1.0, 1e-3).unwrap();
    assert_eq!(s.k_star, 28);
    assert!(!s.stochastic);
    assert!(s.batch_sizes.iter().all(|&m| m == 1));
    assert_eq!(s.query_bound, None);

    let (mu, l, sigma2, b, eps) = (0.5, 1.0, 2.0, 3.0, 0.05);
    let s = theorem_schedule(mu, l, sigma2, b, eps).unwrap();
    let kappa: f64 = mu / l;
    assert!(s.stochastic);
    assert_eq!(
        s.k_star,
        (8.0 * (l * b / eps).ln() / kappa.powi(2)).ceil() as usize
    );
    assert_eq!(s.batch_sizes.len(), s.k_star);
    for (j, &m) in s.batch_sizes.iter().enumerate() {
        let raw = 16.0 * sigma2 / (kappa.powi(4) * (l * b).powi(2))
            * (kappa.powi(2) * j as f64 / 4.0).exp();
        assert_eq!(m, (raw.ceil() as u64).max(1));
    }
    let bound = 109.0 * sigma2 / (kappa.powi(6) * eps * eps);
    assert_abs_diff_eq!(s.query_bound.unwrap(), bound, epsilon = 1e-6 * bound);
    assert!((s.total_batch() as f64) <= bound);

    assert!(matches!(
        theorem_schedule(0.0, 1.0, 0.0, 1.0, 1e-3),
        Err(Error::InvalidConstants(_))
    ));
    assert!(matches!(
        theorem_schedule(2.0, 1.0, 0.0, 1.0, 1e-3),
        Err(Error::InvalidConstants(_))
    ));
    assert!(theorem_schedule(1.0, 1.0, 0.0, 1.0, 0.0).is_err());
}

#[test]
fn mixed_vi_schedule_examples() {
    let s = mixed_vi_schedule(1.0, 2.0, 0.0, 1.0, 5).unwrap();
    assert_eq!(s.step_sizes[0], 0.5);
    assert!(s.step_sizes[1..].iter().all(|&e| e == 0.25));
    assert!(s.batch_sizes.iter().all(|&m| m == 1));
    assert!(!s.stochastic);

    let s = mixed_vi_schedule(1.0, 1.0, 0.0, 1.0, 3).unwrap();
    assert_eq!(s.step_sizes, vec![1.0, 1.0, 1.0]);

    let (mu, l, sigma2, b) = (0.5, 1.0, 0.5, 2.0);
    let s = mixed_vi_schedule(mu, l, sigma2, b, 6).unwrap();
    let k2: f64 = (mu / l).powi(2);
    assert_eq!(s.batch_sizes[0], (l * l * b * b / sigma2).ceil() as u64);
    for k in 1..6 {
        let raw =
            12.0 * sigma2 / (91.0 * mu * mu * k2 * b * b) * (k2 * (k as f64 - 2.0) / 4.0).exp();
        assert_eq!(s.batch_sizes[k], (raw.ceil() as u64).max(1));
    }
}

#[test]
fn config_validation() {
    let mut c = SolverConfig::constant(0.5, 10);
    assert!(c.validate().is_ok());
    c.record_every = 0;
    assert!(c.validate().is_err());
    let mut c = SolverConfig::constant(0.5, 0);
    assert!(c.validate().is_err());
    c.max_iterations = 3;
    c.step_sizes = Schedule::PerIteration(vec![0.1, 0.2]);
    assert!(c.validate().is_err());
    c.step_sizes = Schedule::PerIteration(vec![0.1, -0.2, 0.1]);
    assert!(c.validate().is_err());
    c.step_sizes = Schedule::Constant(0.1);
    c.batch_sizes = Schedule::PerIteration(vec![1, 0, 1]);
    assert!(c.validate().is_err());
}

#[test]
fn unit_condition_quadratic_converges_in_one_step() {
    let g = quadratic(2);
    let t = run_rgd(
        &g,
        GradientSource::Exact,
        &euclid(&[3.0, 4.0]),
        &SolverConfig::constant(1.0, 3),
        None,
    )
    .unwrap();
    assert_eq!(t.records[0].grad_norm, 5.0);
    assert_eq!(t.records[1].grad_norm, 0.0);
    assert_eq!(t.terminated_by, Termination::Budget);
    assert_eq!(t.records.len(), 4);
    assert_eq!(t.records[3].step_size, None);
    assert_eq!(t.records[0].step_size, Some(1.0));
}

#[test]
fn step_bound_is_enforced() {
    let g = quadratic(2);
    let r = run_rgd(
        &g,
        GradientSource::Exact,
        &euclid(&[1.0, 1.0]),
        &SolverConfig::constant(2.5, 3),
        None,
    );
    assert!(matches!(r, Err(Error::StepSizeTooLarge { k: 0, .. })));
    let mut c = SolverConfig::constant(2.5, 3);
    c.enforce_step_bound = false;
    assert!(run_rgd(&g, GradientSource::Exact, &euclid(&[1.0, 1.0]), &c, None).is_ok());
}

#[test]
fn spd_run_satisfies_per_step_descent_and_envelope() {
    let g = spd_game();
    let (mu, l) = (g.mu, g.lipschitz);
    let eta = mu / (l * l);
    let rho =
        1.0 - (2.0 * eta * mu - (eta * l).powi(2)) / (2.0 - 2.0 * eta * mu + (eta * l).powi(2));
    let kappa2 = (mu / l).powi(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let nash = g.nash.clone().unwrap();
    for _ in 0..5 {
        let y0 = g.manifold.random_point(&nash, 1.5, &mut rng).unwrap();
        let d0 = g.manifold.dist(&y0, &nash).unwrap();
        let t = run_rgd(
            &g,
            GradientSource::Exact,
            &y0,
            &SolverConfig::constant(eta, 60),
            Some(&Reference::analytic(nash.clone())),
        )
        .unwrap();
        let floor = (1e-12 * t.records[0].grad_norm.max(1.0)).powi(2);
        for w in t.records.windows(2) {
            let (a, b) = (w[0].grad_norm.powi(2), w[1].grad_norm.powi(2));
            assert!(
                b <= rho * a + 1e-9 * a + floor,
                "k = {}: {b} > {rho}·{a}",
                w[0].k
            );
            assert!(b <= (1.0 - kappa2 / 2.0) * a + 1e-9 * a + floor);
        }
        for r in &t.records {
            let env = (-kappa2 * r.k as f64 / 2.0).exp() * l * l * d0 * d0;
            assert!(r.grad_norm.powi(2) <= env * (1.0 + 1e-9));
        }
        assert_eq!(t.reference_kind, Some(ReferenceKind::Analytic));
        assert!(t.last().dist_to_ref.unwrap() < t.records[0].dist_to_ref.unwrap());
    }
}

#[test]
fn queries_and_strides() {
    let g = spd_game();
    let mut oracle = StochasticOracle::new(g.clone(), 0.5, 4).unwrap();
    let mut c = SolverConfig::constant(g.mu / g.lipschitz.powi(2), 10);
    c.batch_sizes = Schedule::PerIteration((1..=10).collect());
    c.record_every = 3;
    let y0 = g.center.clone();
    let t = run_rgd(&g, GradientSource::Oracle(&mut oracle), &y0, &c, None).unwrap();
    let ks: Vec<usize> = t.records.iter().map(|r| r.k).collect();
    assert_eq!(ks, vec![0, 3, 6, 9, 10]);
    for r in &t.records {
        assert_eq!(r.cumulative_queries, (1..=r.k as u64).sum::<u64>());
        if r.k < 10 {
            assert_eq!(r.batch_size, Some(r.k as u64 + 1));
        }
    }
    assert_eq!(t.total_queries, 55);
    assert_eq!(oracle.query_count(), 55);
}

#[test]
fn stochastic_runs_are_reproducible() {
    let g = spd_game();
    let mut c = SolverConfig::constant(g.mu / g.lipschitz.powi(2), 30);
    c.batch_sizes = Schedule::Constant(4);
    let y0 = Point::product(vec![Point::matrix(SymMatrix::identity(2))]);
    let run = |seed| {
        let mut o = StochasticOracle::new(g.clone(), 1.0, seed).unwrap();
        run_rgd(&g, GradientSource::Oracle(&mut o), &y0, &c, None).unwrap()
    };
    assert_eq!(run(7), run(7));
    assert_ne!(run(7).records, run(8).records);
}

#[test]
fn epsilon_stops_early() {
    let g = quadratic(1);
    let mut c = SolverConfig::constant(0.5, 100);
    c.epsilon = 1e-3;
    let t = run_rgd(&g, GradientSource::Exact, &euclid(&[1.0]), &c, None).unwrap();
    assert_eq!(t.terminated_by, Termination::EpsilonReached);
    assert_eq!(t.iterations(), 10);
    assert!(t.last().grad_norm <= 1e-3);
    assert_eq!(t.last().step_size, None);
}

#[test]
fn blow_up_is_reported_as_numerical_failure() {
    let g = field_game(|v| v * v * v, 1.0, 1.0);
    let mut c = SolverConfig::constant(1.0, 50);
    c.enforce_step_bound = false;
    let t = run_rgd(&g, GradientSource::Exact, &euclid(&[10.0]), &c, None).unwrap();
    assert!(matches!(
        t.terminated_by,
        Termination::NumericalFailure { .. }
    ));
    assert!(matches!(t.check(), Err(Error::NumericalFailure(_))));
    assert!(t.terminal_point.is_finite());
}

#[test]
fn reg_stationary_at_zero_field() {
    let g = quadratic(2);
    let t = run_reg(
        &g,
        &euclid(&[0.0, 0.0]),
        &SolverConfig::constant(0.3, 5),
        None,
    )
    .unwrap();
    assert!(t.records.iter().all(|r| r.grad_norm == 0.0));
    assert_eq!(t.terminal_point, euclid(&[0.0, 0.0]));
    assert_eq!(t.total_queries, 10);
}

#[test]
fn reg_matches_rgd_for_constant_field() {
    let g = field_game(|_| 1.5, 0.0, 1.0);
    let y0 = euclid(&[2.0]);
    let mut c = SolverConfig::constant(0.4, 1);
    c.enforce_step_bound = false;
    let a = run_reg(&g, &y0, &c, None).unwrap();
    let b = run_rgd(&g, GradientSource::Exact, &y0, &c, None).unwrap();
    assert_eq!(a.terminal_point, b.terminal_point);
}

#[test]
fn reg_contracts_on_bilinear_where_gd_expands() {
    let g = bilinear_saddle_game(1).unwrap();
    let y0 = Point::product(vec![Point::vector(vec![1.0]), Point::vector(vec![1.0])]);
    let mut c = SolverConfig::constant(0.1, 200);
    c.enforce_step_bound = false;
    let reg = run_reg(&g, &y0, &c, None).unwrap();
    let gd = run_rgd(&g, GradientSource::Exact, &y0, &c, None).unwrap();
    let f0 = reg.records[0].grad_norm;
    for w in reg.records.windows(2) {
        assert!(w[1].grad_norm < w[0].grad_norm);
    }
    assert!(gd.last().grad_norm > f0);
    // closed form: each extragradient step scales ‖F‖² by 1 − η² + η⁴
    let eta: f64 = 0.1;
    let expected = f0 * (1.0 - eta * eta + eta.powi(4)).powf(100.0);
    assert_abs_diff_eq!(reg.last().grad_norm, expected, epsilon = 1e-12);

    let c = SolverConfig::constant(default_reg_step(&g), 200);
    let reg = run_reg(&g, &y0, &c, None).unwrap();
    assert!(reg.last().grad_norm <= 0.1 * f0);
}

#[test]
fn tangent_residual_examples() {
    let o = Constraint::NonnegativeOrthant;
    assert_eq!(
        tangent_residual(&o, &[1.0, 2.0], &[0.5, -0.3]).unwrap(),
        0.5_f64.hypot(0.3)
    );
    let r = tangent_residual(&o, &[1.0, 0.0], &[0.5, -0.3]).unwrap();
    assert_abs_diff_eq!(r, (0.25_f64 + 0.09).sqrt(), epsilon = 1e-15);
    assert_eq!(tangent_residual(&o, &[0.0, 0.0], &[0.5, 0.3]).unwrap(), 0.0);
    assert_eq!(tangent_residual(&o, &[0.0, 3.0], &[2.0, 0.0]).unwrap(), 0.0);
    assert!(matches!(
        tangent_residual(&o, &[1.0, -0.1], &[0.0, 0.0]),
        Err(Error::PointOutsideSet { index: 1 })
    ));

    let bx = Constraint::Box {
        lo: vec![-1.0, 0.0, 2.0],
        hi: vec![1.0, 5.0, 2.0],
    };
    // upper face with F > 0 contributes, F < 0 cancels; a degenerate
    // interval cancels everything
    let r = tangent_residual(&bx, &[1.0, 5.0, 2.0], &[0.4, -3.0, 7.0]).unwrap();
    assert_abs_diff_eq!(r, 0.4, epsilon = 1e-15);
    let r = tangent_residual(&bx, &[-1.0, 2.0, 2.0], &[-0.5, 1.0, -7.0]).unwrap();
    assert_abs_diff_eq!(r, 0.5_f64.hypot(1.0), epsilon = 1e-15);
    assert_eq!(project(&bx, &[3.0, -1.0, 0.0]), vec![1.0, 0.0, 2.0]);
}

fn affine_instance() -> (MixedViProblem, Vec<f64>, Vec<f64>) {
    let a = vec![
        3.0, 0.5, 1.0, 0.0, //
        -0.5, 2.0, 0.0, 1.0, //
        -1.0, 0.0, 2.0, 0.3, //
        0.0, -1.0, -0.3, 2.5,
    ];
    let b = vec![-1.0, 1.0, 2.0, -1.0];
    let p = affine_mixed_vi(2, 2, a.clone(), b.clone(), Constraint::NonnegativeOrthant).unwrap();
    (p, a, b)
}

/// Projected fixed-point iteration `z ← Π(z − τ(Az + b))`.
fn projected_fixed_point(a: &[f64], b: &[f64], p: usize) -> Vec<f64> {
    let d = b.len();
    let mut z = vec![0.0; d];
    for _ in 0..200_000 {
        let f: Vec<f64> = (0..d)
            .map(|r| (0..d).map(|c| a[r * d + c] * z[c]).sum::<f64>() + b[r])
            .collect();
        for i in 0..d {
            z[i] -= 0.05 * f[i];
            if i >= p {
                z[i] = z[i].max(0.0);
            }
        }
    }
    z
}

#[test]
fn mixed_vi_deterministic_bound_holds() {
    let (prob, a, b) = affine_instance();
    let z_star = projected_fixed_point(&a, &b, 2);
    assert!(
        z_star[2] == 0.0 || z_star[3] == 0.0,
        "instance should activate a face: {z_star:?}"
    );
    let sched = mixed_vi_schedule(prob.mu, prob.lipschitz, 0.0, 1.0, 150).unwrap();
    let y0 = Point::vector(vec![2.0, -1.0]);
    let x0 = vec![1.0, 0.5];
    let reference = Reference {
        point: Point::vector(z_star[..2].to_vec()),
        multipliers: z_star[2..].to_vec(),
        kind: ReferenceKind::Analytic,
    };
    let t = run_mixed_vi(&prob, &y0, &x0, &sched.config(0), Some(&reference)).unwrap();
    let d0 = t.records[0].dist_to_ref.unwrap();
    let (k2, l) = (prob.kappa().powi(2), prob.lipschitz);
    for r in t.records.iter().filter(|r| r.k >= 1) {
        let bound = 66.0 * (-k2 * (r.k as f64 - 1.0) / 2.0).exp() * l * l * d0 * d0;
        assert!(r.residual.powi(2) <= bound, "k = {}", r.k);
    }
    assert!(t.last().residual < 1e-6);
    assert!(t.last().dist_to_ref.unwrap() < 1e-6);
}

#[test]
fn mixed_vi_rejects_infeasible_start_and_large_steps() {
    let (prob, ..) = affine_instance();
    let y0 = Point::vector(vec![0.0, 0.0]);
    let c = SolverConfig::constant(0.01, 5);
    assert!(matches!(
        run_mixed_vi(&prob, &y0, &[-1.0, 0.0], &c, None),
        Err(Error::PointOutsideSet { index: 0 })
    ));
    let c = SolverConfig::constant(10.0, 5);
    assert!(matches!(
        run_mixed_vi(&prob, &y0, &[0.0, 0.0], &c, None),
        Err(Error::StepSizeTooLarge { k: 1, .. })
    ));
}

#[test]
fn mixed_vi_without_multipliers_reproduces_rgd() {
    let g = potential_distance_game(
        vec![Manifold::Spd(2), Manifold::Euclidean(2)],
        vec![
            Point::matrix(SymMatrix::diagonal(&[3.0, 0.5])),
            Point::vector(vec![1.0, 1.0]),
        ],
    )
    .unwrap();
    let prob = constrained_game_to_mixed_vi(&g, vec![]).unwrap();
    assert_eq!(prob.euclidean_dim, 0);
    let y0 = g
        .manifold
        .random_point(&g.center, 1.0, &mut ChaCha8Rng::seed_from_u64(1))
        .unwrap();
    let (fm, fe) = prob.evaluate(&y0, &[]).unwrap();
    assert_eq!(fm, joint_gradient(&g, &y0).unwrap());
    assert!(fe.is_empty());
    let c = SolverConfig::constant(g.mu / g.lipschitz.powi(2), 25);
    let a = run_mixed_vi(&prob, &y0, &[], &c, None).unwrap();
    let b = run_rgd(&g, GradientSource::Exact, &y0, &c, None).unwrap();
    assert_eq!(a.terminal_point, b.terminal_point);
    for (ra, rb) in a.records.iter().zip(&b.records) {
        assert_eq!(ra.grad_norm, rb.grad_norm);
        assert_eq!(ra.residual, rb.residual);
    }
}

#[test]
fn large_box_matches_unconstrained_while_inactive() {
    let (prob, a, b) = affine_instance();
    let boxed = affine_mixed_vi(
        2,
        2,
        a.clone(),
        b.clone(),
        Constraint::Box {
            lo: vec![-100.0, -100.0],
            hi: vec![100.0, 100.0],
        },
    )
    .unwrap();
    let free = affine_mixed_vi(4, 0, a, b, Constraint::NonnegativeOrthant).unwrap();
    let c = SolverConfig::constant(prob.mu / prob.lipschitz.powi(2), 40);
    let y0 = Point::vector(vec![1.0, 1.0]);
    let t_box = run_mixed_vi(&boxed, &y0, &[1.0, 1.0], &c, None).unwrap();
    let t_free = run_mixed_vi(&free, &Point::vector(vec![1.0; 4]), &[], &c, None).unwrap();
    let zb: Vec<f64> = vec_of(&Point::product(vec![t_box.terminal_point.clone()]))
        .into_iter()
        .chain(t_box.terminal_multipliers.clone())
        .collect();
    assert_eq!(zb, t_free.terminal_point.coords.as_vector().unwrap());
}

#[test]
fn lagrangian_recovers_euclidean_kkt_point() {
    // min ½‖y‖² subject to 1 − y₁ ≤ 0
    let g = quadratic(2);
    let con = PlayerConstraint::new(
        0,
        |y: &Point| Ok(1.0 - y.coords.as_vector().unwrap()[0]),
        |y: &Point| {
            Ok(TangentVector::new(
                y.clone(),
                Coords::Vector(vec![-1.0, 0.0]),
            ))
        },
    );
    let prob = constrained_game_to_mixed_vi(&g, vec![con]).unwrap();
    assert_eq!(prob.euclidean_dim, 1);
    // the symmetric Jacobian part is diag(1, 1, 0), so sampling sees a modulus in [0, 1)
    assert!(prob.mu >= 0.0 && prob.mu < 1.0);
    let mut c = SolverConfig::constant(0.5, 200);
    c.enforce_step_bound = false;
    let t = run_mixed_vi(&prob, &euclid(&[-1.0, 2.0]), &[0.0], &c, None).unwrap();
    let y = vec_of(&t.terminal_point);
    assert!((y[0] - 1.0).abs() <= 1e-4 && y[1].abs() <= 1e-4, "{y:?}");
    assert!((t.terminal_multipliers[0] - 1.0).abs() <= 1e-4);
}

#[test]
fn lagrangian_spd_ball_constraint_is_feasible_at_the_end() {
    let m = Manifold::Spd(2);
    let anchor = Point::matrix(SymMatrix::diagonal(&[(3.0_f64).exp(), 1.0]));
    let g = potential_distance_game(vec![m.clone()], vec![anchor]).unwrap();
    let radius = 1.0;
    let identity = Point::matrix(SymMatrix::identity(2));
    let (mi, mg) = (m.clone(), m.clone());
    let (ii, ig) = (identity.clone(), identity.clone());
    let con = PlayerConstraint::new(
        0,
        move |x: &Point| Ok(mi.dist(x, &ii)?.powi(2) - radius * radius),
        move |x: &Point| Ok(mg.log(x, &ig)?.scale(-2.0)),
    );
    let prob = constrained_game_to_mixed_vi(&g, vec![con.clone()]).unwrap();
    let mut c = SolverConfig::constant(0.2, 3000);
    c.enforce_step_bound = false;
    let y0 = Point::product(vec![identity.clone()]);
    let t = run_mixed_vi(&prob, &y0, &[0.0], &c, None).unwrap();
    let x_end = t.terminal_point.component(0);
    assert!((con.value)(&x_end).unwrap() <= 1e-6);
    // multiplier (d(I, A) − R)/(2R) and the point on the geodesic at distance R
    assert!((t.terminal_multipliers[0] - 1.0).abs() <= 1e-4);
    assert!((m.dist(&x_end, &identity).unwrap() - radius).abs() <= 1e-6);
}

#[test]
fn lagrangian_requires_gradients() {
    let g = quadratic(1);
    let con = PlayerConstraint {
        player: 0,
        value: Arc::new(|_: &Point| Ok(0.0)),
        gradient: None,
    };
    assert!(matches!(
        constrained_game_to_mixed_vi(&g, vec![con]),
        Err(Error::GradientUnavailable(0))
    ));
}
