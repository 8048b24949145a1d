mod common;

use approx::assert_abs_diff_eq;
use kantian_core::game::{dominates, Dominance, Game, JointDistribution, PureProfile};
use kantian_core::greed::{greed_transform, pure_nash, GreedParams};
use kantian_core::io::{parse_game, serialize_game};
use kantian_core::kantian::{
    mixed_kantian_exact, mixed_kantian_replicator, platonia_mixed_kantian,
};
use kantian_core::lp::{solve, LinearProgram, LpStatus};
use kantian_core::pareto::pareto_optimal_profiles;
use kantian_core::protocols::run_bos_protocol;
use kantian_core::welfare::{solve_welfare, WelfareKind};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn game_strategy() -> impl Strategy<Value = Game> {
    (1usize..=3, 1usize..=3, 1usize..=3, any::<u64>()).prop_map(|(n, m1, m2, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sizes = [m1, m2, 2];
        let actions: Vec<Vec<String>> = (0..n).map(|i| names(sizes[i])).collect();
        Game::from_fn(actions, |_| {
            (0..n)
                .map(|_| rand::Rng::gen_range(&mut rng, -4..=6) as f64)
                .collect()
        })
        .unwrap()
    })
}

/// `max c.x` over `A x <= b, x >= 0` by enumerating every basic solution.
fn vertex_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    // Rows: the constraints, then x_j >= 0 written as -x_j <= 0.
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = -1.0;
        rows.push((e, 0.0));
    }
    let mut best: Option<f64> = None;
    let total = rows.len();
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let m = DMatrix::from_fn(n, n, |r, col| rows[pick[r]].0[col]);
        let rhs = DVector::from_fn(n, |r, _| rows[pick[r]].1);
        if let Some(x) = m.lu().solve(&rhs) {
            let feasible = rows.iter().all(|(row, bound)| {
                row.iter().zip(x.iter()).map(|(p, q)| p * q).sum::<f64>() <= bound + 1e-9
            });
            if feasible {
                let value: f64 = c.iter().zip(x.iter()).map(|(p, q)| p * q).sum();
                best = Some(best.map_or(value, |v: f64| v.max(value)));
            }
        }
        // Next n-subset in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < total - n + i {
                pick[i] += 1;
                for k in i + 1..n {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn lp_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> {
    (2usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(-5i32..=5, n),
            prop::collection::vec(prop::collection::vec(-4i32..=6, n), m),
            prop::collection::vec(-3i32..=10, m),
        )
            .prop_map(move |(c, a, b)| {
                let mut a: Vec<Vec<f64>> = a
                    .into_iter()
                    .map(|r| r.into_iter().map(f64::from).collect())
                    .collect();
                let mut b: Vec<f64> = b.into_iter().map(f64::from).collect();
                // A box keeps every instance bounded.
                a.push(vec![1.0; n]);
                b.push(10.0);
                (c.into_iter().map(f64::from).collect(), a, b)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dominance_is_a_preorder(u in prop::collection::vec(-3i32..3, 3),
                               v in prop::collection::vec(-3i32..3, 3),
                               w in prop::collection::vec(-3i32..3, 3)) {
        let f = |x: Vec<i32>| x.into_iter().map(f64::from).collect::<Vec<_>>();
        let (u, v, w) = (f(u), f(v), f(w));
        prop_assert_eq!(dominates(&u, &u).unwrap(), Dominance::Weak);
        let uv = dominates(&u, &v).unwrap();
        let vw = dominates(&v, &w).unwrap();
        if uv != Dominance::None && vw != Dominance::None {
            prop_assert_ne!(dominates(&u, &w).unwrap(), Dominance::None);
        }
        if uv == Dominance::Strict {
            prop_assert_eq!(dominates(&v, &u).unwrap(), Dominance::None);
        }
    }

    #[test]
    fn point_masses_are_exact(game in game_strategy(), pick in any::<prop::sample::Index>()) {
        let profile = game.profile_at(pick.index(game.num_profiles()));
        let dist = JointDistribution::point_mass(profile.clone());
        prop_assert_eq!(game.expected_utility(&dist).unwrap(), game.utility(&profile).unwrap().to_vec());
    }

    #[test]
    fn classification_implications(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (coord, _) = random_symmetric_coordination(&mut rng, 5);
        let diag = random_symmetric_diagonal(&mut rng, 5, true);
        for g in [coord, diag] {
            let r = g.classify();
            prop_assert!(!r.coordination || r.diagonal);
            prop_assert!(!r.symmetric_coordination || r.coordination);
            prop_assert!(r.symmetric_two_player && r.symmetric && r.diagonal);
        }
    }

    #[test]
    fn simplex_matches_vertex_enumeration((c, a, b) in lp_strategy()) {
        let mut lp = LinearProgram::maximize(c.clone());
        for (row, &bound) in a.iter().zip(&b) {
            lp.le(row.clone(), bound);
        }
        let solution = solve(&lp).unwrap();
        match vertex_oracle(&c, &a, &b) {
            Some(best) => {
                prop_assert_eq!(solution.status, LpStatus::Optimal);
                prop_assert!((solution.value - best).abs() <= 1e-7, "{} vs {}", solution.value, best);
                prop_assert!(lp.max_violation(&solution.x) <= 1e-8);
            }
            None => prop_assert_eq!(solution.status, LpStatus::Infeasible),
        }
    }

    #[test]
    fn simplex_ignores_row_order((c, a, b) in lp_strategy(), rotate in 0usize..5) {
        let build = |order: &[usize]| {
            let mut lp = LinearProgram::maximize(c.clone());
            for &k in order {
                lp.le(a[k].clone(), b[k]);
            }
            solve(&lp).unwrap()
        };
        let forward: Vec<usize> = (0..a.len()).collect();
        let mut rotated = forward.clone();
        rotated.rotate_left(rotate % a.len());
        let (x, y) = (build(&forward), build(&rotated));
        prop_assert_eq!(x.status, y.status);
        if x.status == LpStatus::Optimal {
            prop_assert!((x.value - y.value).abs() <= 1e-9);
        }
    }

    #[test]
    fn pareto_set_matches_definition(game in game_strategy()) {
        let set = pareto_optimal_profiles(&game);
        prop_assert_eq!(&set.profiles, &brute_pareto(&game));
        // Every excluded profile is strictly dominated by a member.
        for profile in game.profiles().filter(|p| !set.contains(p)) {
            let u = game.utility(&profile).unwrap();
            prop_assert!(set.payoffs.iter().any(|v| dominates(v, u).unwrap() == Dominance::Strict));
        }
        // Idempotent: a game whose outcomes are exactly the Pareto payoffs
        // keeps all of them.
        let mut actions = vec![names(set.len())];
        actions.extend((1..set.num_players()).map(|_| names(1)));
        let restricted = Game::new(actions, set.payoffs.clone()).unwrap();
        prop_assert_eq!(pareto_optimal_profiles(&restricted).len(), set.len());
    }

    #[test]
    fn pure_nash_matches_best_response_oracle(game in game_strategy()) {
        prop_assert_eq!(pure_nash(&game), brute_nash(&game));
    }

    #[test]
    fn replicator_never_beats_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = random_symmetric_diagonal(&mut rng, 6, false);
        let exact = mixed_kantian_exact(&game).unwrap();
        let heuristic = mixed_kantian_replicator(&game, seed, 4, 500).unwrap();
        prop_assert!(heuristic.value <= exact.value + 1e-9);
    }

    #[test]
    fn welfare_argmax_is_scale_covariant(seed in any::<u64>(), scale in 1u32..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let game = random_small_game(&mut rng);
        let scale = f64::from(scale) / 4.0;
        let scaled = game.map_utilities(|_, u| u.iter().map(|x| x * scale).collect()).unwrap();
        for kind in WelfareKind::ALL {
            let a = solve_welfare(&game, kind).unwrap();
            let b = solve_welfare(&scaled, kind).unwrap();
            let profiles = |r: &kantian_core::EquilibriumReport| {
                r.distribution.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>()
            };
            prop_assert_eq!(profiles(&a), profiles(&b), "{}", kind);
            for ((_, x), (_, y)) in a.distribution.iter().zip(b.distribution.iter()) {
                prop_assert!((x - y).abs() <= 1e-8, "{}: {} vs {}", kind, x, y);
            }
        }
    }

    #[test]
    fn games_round_trip_through_json(game in game_strategy(), jitter in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(jitter);
        let noisy = game
            .map_utilities(|_, u| {
                u.iter().map(|x| x + rand::Rng::gen_range(&mut rng, -1.0..1.0) / 3.0).collect()
            })
            .unwrap();
        let back = parse_game(&serialize_game(&noisy)).unwrap();
        prop_assert_eq!(back, noisy);
    }
}

#[test]
fn platonia_closed_form_beats_grid() {
    for n in 2..=25 {
        let (p, value) = platonia_mixed_kantian(n).unwrap();
        assert_abs_diff_eq!(p, 1.0 / n as f64, epsilon = 1e-15);
        let grid_best = (0..=10_000)
            .map(|k| {
                let q = k as f64 / 10_000.0;
                q * (1.0 - q).powi(n as i32 - 1)
            })
            .fold(0.0, f64::max);
        assert!(value >= grid_best - 1e-12, "n = {n}");
        assert!(value - grid_best <= 1e-6, "n = {n}");
    }
}

#[test]
fn prisoners_dilemma_greed_grid() {
    // Defection pays 3 against a cooperator whose Kantian payoff is 2, so an
    // agent is tempted exactly when its threshold is below 3/2.
    let game = parse_game(&std::fs::read_to_string(fixture("pd.json")).unwrap()).unwrap();
    let grid = [1.1, 1.25, 1.5, 2.0, 3.0, f64::INFINITY];
    for &l1 in &grid {
        for &l2 in &grid {
            let t = greed_transform(&game, &GreedParams::new(vec![l1, l2]).unwrap()).unwrap();
            let expected = PureProfile(vec![usize::from(l1 < 1.5), usize::from(l2 < 1.5)]);
            assert_eq!(brute_nash(&t.game), vec![expected], "lambda ({l1}, {l2})");
        }
    }
}

#[test]
fn bos_protocol_means_within_five_sigma() {
    let game = parse_game(&std::fs::read_to_string(fixture("bos.json")).unwrap()).unwrap();
    let trials = 100_000;
    let run = run_bos_protocol(&game, 5, trials).unwrap();
    assert_eq!(run.exact_expected_utilities, vec![2.5, 2.5]);
    // Each agent gets 2 or 3 with probability 1/2: standard deviation 1/2.
    let sigma = 0.5 / (trials as f64).sqrt();
    for m in &run.empirical.as_ref().unwrap().means {
        assert!((m - 2.5).abs() <= 5.0 * sigma, "mean {m}");
    }
    assert_eq!(run, run_bos_protocol(&game, 5, trials).unwrap());
}
