use super::*;
use crate::linalg::SymMatrix;
use crate::manifold::hyperboloid_point;
use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spd(diag: &[f64]) -> Point {
    Point::matrix(SymMatrix::diagonal(diag))
}

fn spd_rows(rows: &[&[f64]]) -> Point {
    Point::matrix(SymMatrix::from_rows(rows).unwrap())
}

fn one_player_quadratic(a: Vec<f64>) -> GameSpec {
    let n = a.len();
    potential_distance_game(vec![Manifold::Euclidean(n)], vec![Point::vector(a)]).unwrap()
}

fn all_factories() -> Vec<GameSpec> {
    vec![
        potential_distance_game(
            vec![Manifold::Euclidean(2), Manifold::Euclidean(3)],
            vec![
                Point::vector(vec![1.0, -1.0]),
                Point::vector(vec![0.5, 0.0, 2.0]),
            ],
        )
        .unwrap(),
        potential_distance_game(
            vec![Manifold::Spd(3), Manifold::Spd(2)],
            vec![
                spd_rows(&[&[2.0, 0.3, 0.0], &[0.3, 1.0, 0.1], &[0.0, 0.1, 0.5]]),
                spd(&[4.0, 1.0]),
            ],
        )
        .unwrap(),
        potential_distance_game(
            vec![Manifold::Hyperboloid(2), Manifold::Hyperboloid(3)],
            vec![
                hyperboloid_point(&[0.3, -0.5]),
                hyperboloid_point(&[1.0, 0.0, 0.2]),
            ],
        )
        .unwrap(),
        robust_karcher_game(
            vec![
                spd_rows(&[&[1.2, 0.1], &[0.1, 0.9]]),
                spd_rows(&[&[0.8, -0.2], &[-0.2, 1.1]]),
            ],
            4.0,
        )
        .unwrap(),
        min_max_distance_game(
            (Manifold::Euclidean(2), Manifold::Euclidean(2)),
            Point::vector(vec![1.0, 2.0]),
            Point::vector(vec![-1.0, 0.5]),
            0.5,
        )
        .unwrap(),
        min_max_distance_game(
            (Manifold::Hyperboloid(2), Manifold::Spd(2)),
            hyperboloid_point(&[0.2, 0.1]),
            spd(&[2.0, 0.5]),
            0.0,
        )
        .unwrap(),
        affine_game(
            vec![1, 2],
            vec![2.0, 1.0, -0.5, -1.0, 3.0, 0.2, 0.5, 0.2, 1.5],
            vec![1.0, 0.0, -1.0],
        )
        .unwrap(),
        bilinear_saddle_game(2).unwrap(),
    ]
}

/// Central difference of player i's loss along `exp_y(t v)` with v
/// supported on block i only.
fn player_directional(game: &GameSpec, player: usize, y: &Point, v: &TangentVector, h: f64) -> f64 {
    let m = &game.manifold;
    let plus = m.exp(y, &v.scale(h)).unwrap();
    let minus = m.exp(y, &v.scale(-h)).unwrap();
    (game.loss(player, &plus).unwrap() - game.loss(player, &minus).unwrap()) / (2.0 * h)
}

fn block_direction(
    game: &GameSpec,
    y: &Point,
    player: usize,
    rng: &mut ChaCha8Rng,
) -> TangentVector {
    let full = game.manifold.random_tangent(y, 1.0, rng).unwrap();
    let parts = (0..game.players())
        .map(|j| {
            let c = full.component(j);
            if j == player {
                c
            } else {
                TangentVector::zero(&c.base)
            }
        })
        .collect();
    TangentVector::from_components(y, parts).unwrap()
}

#[test]
fn gradients_match_finite_differences_for_every_factory() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for game in all_factories() {
        for s in 0..50 {
            let y = game
                .manifold
                .random_point(&game.center, 1.5, &mut rng)
                .unwrap();
            let f = joint_gradient(&game, &y).unwrap();
            let player = s % game.players();
            let v = block_direction(&game, &y, player, &mut rng);
            let analytic = game.manifold.inner(&y, &f, &v).unwrap();
            let numeric = player_directional(&game, player, &y, &v, 1e-5);
            let tol = 1e-4_f64.max(1e-3 * analytic.abs());
            assert!(
                (analytic - numeric).abs() <= tol,
                "{}: player {player} analytic {analytic} numeric {numeric}",
                game.name
            );
        }
    }
}

#[test]
fn gradient_vanishes_at_analytic_nash() {
    for game in all_factories() {
        if let Some(n) = &game.nash {
            assert!(gradient_norm(&game, n).unwrap() <= 1e-8, "{}", game.name);
        }
    }
}

#[test]
fn potential_game_examples() {
    let g = one_player_quadratic(vec![0.0]);
    let f = joint_gradient(&g, &Point::product(vec![Point::vector(vec![2.0])])).unwrap();
    assert_eq!(f.component(0).coords.as_vector().unwrap(), &[2.0]);

    let g = one_player_quadratic(vec![0.0, 0.0]);
    let y = Point::product(vec![Point::vector(vec![3.0, 4.0])]);
    assert_abs_diff_eq!(gradient_norm(&g, &y).unwrap(), 5.0, epsilon = 1e-14);
    assert_abs_diff_eq!(gap_bound(&g, &y, 2.0).unwrap(), 10.0, epsilon = 1e-13);
    assert_abs_diff_eq!(
        total_gap_bound(&g, &y, 2.0).unwrap(),
        gap_bound(&g, &y, 2.0).unwrap(),
        epsilon = 0.0
    );

    let a = vec![Point::vector(vec![1.0, -1.0]), Point::vector(vec![2.0])];
    let g = potential_distance_game(
        vec![Manifold::Euclidean(2), Manifold::Euclidean(1)],
        a.clone(),
    )
    .unwrap();
    assert_eq!(g.nash, Some(Point::product(a)));
    let y = Point::product(vec![
        Point::vector(vec![0.0, 0.0]),
        Point::vector(vec![5.0]),
    ]);
    let f = joint_gradient(&g, &y).unwrap();
    assert_eq!(f.component(0).coords.as_vector().unwrap(), &[-1.0, 1.0]);
    assert_eq!(f.component(1).coords.as_vector().unwrap(), &[3.0]);
    assert_eq!(g.mu, 1.0);
    assert_eq!(g.lipschitz, 1.0);
}

#[test]
fn spd_potential_examples() {
    let e = std::f64::consts::E;
    let g = potential_distance_game(vec![Manifold::Spd(2)], vec![spd(&[e, 1.0])]).unwrap();
    let y = Point::product(vec![spd(&[1.0, 1.0])]);
    let f = joint_gradient(&g, &y).unwrap();
    let m = f.component(0).coords.as_matrix().unwrap().clone();
    assert_abs_diff_eq!(m.get(0, 0), -1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(m.get(1, 1), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(m.get(0, 1), 0.0, epsilon = 1e-12);

    let g = potential_distance_game(vec![Manifold::Spd(2)], vec![spd(&[4.0, 1.0])]).unwrap();
    assert_abs_diff_eq!(
        gradient_norm(&g, &y).unwrap(),
        4.0_f64.ln(),
        epsilon = 1e-12
    );
    assert!(gradient_norm(&g, g.nash.as_ref().unwrap()).unwrap() <= 1e-10);
}

#[test]
fn potential_game_rejects_bad_anchor() {
    let bad = spd_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
    assert!(matches!(
        potential_distance_game(vec![Manifold::Spd(2)], vec![bad]),
        Err(Error::InvalidAnchor(_))
    ));
    assert!(matches!(
        potential_distance_game(vec![Manifold::Euclidean(2)], vec![]),
        Err(Error::InvalidAnchor(_))
    ));
}

#[test]
fn curved_potential_constants_are_certified() {
    for game in &all_factories()[..3] {
        let r = check_monotonicity(game, 300, 3).unwrap();
        assert!(r.certifies(game.mu, game.lipschitz), "{}: {r:?}", game.name);
    }
}

#[test]
fn monotonicity_examples() {
    let g = one_player_quadratic(vec![0.0, 0.0, 0.0]);
    let r = check_monotonicity(&g, 200, 1).unwrap();
    assert_abs_diff_eq!(r.min_ratio, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.max_lipschitz_ratio, 1.0, epsilon = 1e-12);
    assert_eq!(r.samples, 200);
    assert!(r.certifies(1.0, 1.0));

    let g = min_max_distance_game(
        (Manifold::Hyperboloid(2), Manifold::Hyperboloid(2)),
        hyperboloid_point(&[0.5, 0.0]),
        hyperboloid_point(&[-0.3, 0.4]),
        0.0,
    )
    .unwrap();
    let r = check_monotonicity(&g, 300, 2).unwrap();
    assert!(r.min_ratio >= g.mu - 1e-6, "{r:?}");
    assert!(r.max_lipschitz_ratio <= g.lipschitz + 1e-6, "{r:?}");

    assert!(check_monotonicity(&g, 0, 2).is_err());
    assert!(matches!(
        check_monotonicity_with(&g, 5, 2, 0.0),
        Err(Error::NonPositiveRadius(_))
    ));
}

#[test]
fn min_max_coupled_euclidean() {
    let lambda = 0.5;
    let a = Point::vector(vec![1.0, 2.0]);
    let b = Point::vector(vec![-1.0, 0.5]);
    let g = min_max_distance_game(
        (Manifold::Euclidean(2), Manifold::Euclidean(2)),
        a.clone(),
        b.clone(),
        lambda,
    )
    .unwrap();
    // Nash from the linear system [[I, λI], [−λI, I]] z = [a + λb, b − λa]
    let mut mat = vec![0.0; 16];
    for i in 0..2 {
        mat[i * 4 + i] = 1.0;
        mat[(i + 2) * 4 + i + 2] = 1.0;
        mat[i * 4 + i + 2] = lambda;
        mat[(i + 2) * 4 + i] = -lambda;
    }
    let (av, bv) = (a.coords.as_vector().unwrap(), b.coords.as_vector().unwrap());
    let rhs = vec![
        av[0] + lambda * bv[0],
        av[1] + lambda * bv[1],
        bv[0] - lambda * av[0],
        bv[1] - lambda * av[1],
    ];
    let z = factories::solve_linear(&mat, &rhs, 4).unwrap();
    let nash = g.nash.clone().unwrap();
    let flat: Vec<f64> = (0..2)
        .flat_map(|i| nash.component(i).coords.as_vector().unwrap().to_vec())
        .collect();
    for (x, y) in flat.iter().zip(&z) {
        assert_abs_diff_eq!(x, y, epsilon = 1e-12);
    }
    let r = check_monotonicity(&g, 300, 5).unwrap();
    assert!(r.min_ratio >= 1.0 - lambda);
    assert!(r.certifies(g.mu, g.lipschitz), "{r:?}");
}

#[test]
fn min_max_rejects_large_coupling() {
    let e = Manifold::Euclidean(1);
    let p = Point::vector(vec![0.0]);
    assert!(matches!(
        min_max_distance_game((e.clone(), e.clone()), p.clone(), p.clone(), 1.0),
        Err(Error::CouplingTooLarge(_))
    ));
    assert!(matches!(
        min_max_distance_game((Manifold::Spd(2), e), spd(&[1.0, 1.0]), p, 0.3),
        Err(Error::CouplingTooLarge(_))
    ));
}

#[test]
fn robust_karcher_examples() {
    let a = spd_rows(&[&[1.5, 0.2], &[0.2, 0.7]]);
    let g = robust_karcher_game(vec![a.clone()], 4.0).unwrap();
    let y = Point::product(vec![a.clone(), a.clone()]);
    assert!(gradient_norm(&g, &y).unwrap() <= 1e-12);

    assert!(matches!(
        robust_karcher_game(vec![a.clone()], 1.0),
        Err(Error::InvalidGamma(_))
    ));
    assert!(matches!(
        robust_karcher_game(vec![a], 0.5),
        Err(Error::InvalidGamma(_))
    ));

    let anchors = vec![
        spd_rows(&[&[1.1, 0.05], &[0.05, 0.95]]),
        spd_rows(&[&[0.9, -0.1], &[-0.1, 1.2]]),
        spd(&[1.0, 1.3]),
    ];
    let g = robust_karcher_game(anchors, 4.0).unwrap();
    assert!(g.mu > 0.0);
    let r = check_monotonicity(&g, 100, 9).unwrap();
    assert!(r.min_ratio >= g.mu - 1e-6 && r.min_ratio > 0.0, "{r:?}");
}

#[test]
fn robust_karcher_x_gradient_vanishes_at_midpoint() {
    // with fixed Y = {A, B} the X-player's gradient −2Σ log_X Yᵢ vanishes at
    // the geodesic midpoint A #½ B
    let a = spd_rows(&[&[2.0, 0.5], &[0.5, 1.0]]);
    let b = spd_rows(&[&[0.5, -0.1], &[-0.1, 3.0]]);
    let g = robust_karcher_game(vec![a.clone(), b.clone()], 2.0).unwrap();
    let m = Manifold::Spd(2);
    let mid = m.exp(&a, &m.log(&a, &b).unwrap().scale(0.5)).unwrap();
    let y = Point::product(vec![mid, a, b]);
    let f = joint_gradient(&g, &y).unwrap();
    assert!(m.norm(&f.component(0)).unwrap() <= 1e-10);
}

#[test]
fn karcher_center_of_two_is_midpoint() {
    let m = Manifold::Spd(2);
    let a = spd(&[4.0, 1.0]);
    let b = spd(&[1.0, 4.0]);
    let c = karcher_center(&m, &[a, b]).unwrap();
    let cm = c.coords.as_matrix().unwrap();
    assert_abs_diff_eq!(cm.get(0, 0), 2.0, epsilon = 1e-10);
    assert_abs_diff_eq!(cm.get(1, 1), 2.0, epsilon = 1e-10);
}

#[test]
fn affine_game_constants_and_nash() {
    let g = bilinear_saddle_game(3).unwrap();
    assert_eq!(g.mu, 0.0);
    assert_abs_diff_eq!(g.lipschitz, 1.0, epsilon = 1e-12);
    assert!(gradient_norm(&g, g.nash.as_ref().unwrap()).unwrap() == 0.0);

    let asym = affine_game(vec![2], vec![1.0, 2.0, 0.0, 1.0], vec![0.0, 0.0]);
    assert!(matches!(asym, Err(Error::NonSymmetric { .. })));
    let nonmono = affine_game(vec![1, 1], vec![-1.0, 0.0, 0.0, 1.0], vec![0.0, 0.0]);
    assert!(matches!(nonmono, Err(Error::NonMonotone(_))));

    let g = affine_game(vec![1, 1], vec![2.0, 1.0, -1.0, 2.0], vec![1.0, -3.0]).unwrap();
    assert_abs_diff_eq!(g.mu, 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(g.lipschitz, 5.0_f64.sqrt(), epsilon = 1e-12);
    assert!(gradient_norm(&g, g.nash.as_ref().unwrap()).unwrap() <= 1e-12);
}

/// Maximizes `⟨F, −(y′ − y)⟩` over the unit ball by scanning directions in
/// the plane of F and any other vector.
fn brute_force_gap_2d(f: [f64; 2], radius: f64) -> f64 {
    let n = 20000;
    (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            -radius * (f[0] * t.cos() + f[1] * t.sin())
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn gap_bound_matches_brute_force_in_the_plane() {
    let g = one_player_quadratic(vec![0.0, 0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let y = g.manifold.random_point(&g.center, 3.0, &mut rng).unwrap();
        let f = joint_gradient(&g, &y).unwrap();
        let fv = f.component(0).coords.as_vector().unwrap().to_vec();
        let brute = brute_force_gap_2d([fv[0], fv[1]], 1.0);
        let bound = gap_bound(&g, &y, 1.0).unwrap();
        assert!(brute <= bound + 1e-12);
        assert!(bound - brute <= 1e-6 * bound.max(1.0));
    }
}

#[test]
fn total_gap_bound_examples() {
    let g = potential_distance_game(
        vec![Manifold::Euclidean(1); 4],
        vec![Point::vector(vec![0.0]); 4],
    )
    .unwrap();
    let y = Point::product(vec![Point::vector(vec![1.5]); 4]);
    assert_abs_diff_eq!(gradient_norm(&g, &y).unwrap(), 3.0, epsilon = 1e-14);
    assert_abs_diff_eq!(total_gap_bound(&g, &y, 1.0).unwrap(), 6.0, epsilon = 1e-13);
    assert!(matches!(
        gap_bound(&g, &y, 0.0),
        Err(Error::NonPositiveRadius(_))
    ));
    assert!(matches!(
        total_gap_bound(&g, &y, -1.0),
        Err(Error::NonPositiveRadius(_))
    ));
}

#[test]
fn joint_gradient_rejects_off_manifold_points() {
    let g = potential_distance_game(vec![Manifold::Spd(2)], vec![spd(&[1.0, 2.0])]).unwrap();
    let bad = Point::product(vec![spd_rows(&[&[1.0, 3.0], &[3.0, 1.0]])]);
    assert!(joint_gradient(&g, &bad).is_err());
    assert!(g.loss(3, &g.center).is_err());
}

#[test]
fn oracle_exact_when_noiseless() {
    let g = all_factories().remove(1);
    let mut o = StochasticOracle::new(g.clone(), 0.0, 1).unwrap();
    let y = g.center.clone();
    let s = o.sample_gradient(&y, 7).unwrap();
    assert_eq!(s, joint_gradient(&g, &y).unwrap());
    assert_eq!(o.query_count(), 7);
    assert!(o.sample_gradient(&y, 0).is_err());
    assert!(StochasticOracle::new(g, -1.0, 1).is_err());
}

#[test]
fn oracle_unbiased_with_trace_variance_sigma2() {
    let g = potential_distance_game(
        vec![Manifold::Spd(2), Manifold::Hyperboloid(2)],
        vec![spd(&[2.0, 0.5]), hyperboloid_point(&[0.3, 0.1])],
    )
    .unwrap();
    let sigma2 = 2.0;
    let mut o = StochasticOracle::new(g.clone(), sigma2, 21).unwrap();
    let m = &g.manifold;
    let y = m
        .random_point(&g.center, 1.0, &mut ChaCha8Rng::seed_from_u64(3))
        .unwrap();
    let f = joint_gradient(&g, &y).unwrap();
    let draws = 100_000;
    let mut mean = TangentVector::zero(&y);
    let mut sq = 0.0;
    for _ in 0..draws {
        let s = o.sample_gradient(&y, 1).unwrap();
        let e = s.sub(&f).unwrap();
        sq += m.norm(&e).unwrap().powi(2);
        mean = mean.add_scaled(1.0 / draws as f64, &e).unwrap();
    }
    assert_eq!(o.query_count(), draws as u64);
    let var = sq / draws as f64;
    assert!((var - sigma2).abs() <= 0.1 * sigma2, "trace variance {var}");
    // ‖mean error‖² has expectation σ²/draws; allow a wide band
    let mean_err = m.norm(&mean).unwrap();
    assert!(
        mean_err <= 4.0 * (sigma2 / draws as f64).sqrt(),
        "mean error {mean_err}"
    );

    let mut sq = 0.0;
    let batch = 50;
    for _ in 0..2000 {
        let s = o.sample_gradient(&y, batch).unwrap();
        sq += m.norm(&s.sub(&f).unwrap()).unwrap().powi(2);
    }
    let var = sq / 2000.0;
    assert!(
        (var - sigma2 / batch as f64).abs() <= 0.15 * sigma2 / batch as f64,
        "{var}"
    );
}

#[test]
fn oracle_with_seed_restarts_stream() {
    let g = all_factories().remove(0);
    let mut o = StochasticOracle::new(g.clone(), 1.0, 5).unwrap();
    let y = g.center.clone();
    let first = o.sample_gradient(&y, 3).unwrap();
    let mut fresh = o.with_seed(5);
    assert_eq!(fresh.query_count(), 0);
    assert_eq!(fresh.sample_gradient(&y, 3).unwrap(), first);
}

#[test]
fn spec_is_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<GameSpec>();
}
