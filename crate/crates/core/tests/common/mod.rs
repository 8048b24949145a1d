//! Independent oracles and random game generators shared by the
//! integration tests. Nothing here calls the solver under test.

#![allow(dead_code)]

use kantian_core::game::{bimatrix, Game, PureProfile};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("a{i}")).collect()
}

/// Two-player game with `u1(i, j) = a[i][j]` and `u2(i, j) = a[j][i]`.
pub fn symmetric_from(a: &[Vec<f64>]) -> Game {
    let m = a.len();
    let n = names(m);
    let transpose: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| a[j][i]).collect()).collect();
    bimatrix(&n, &n, a, &transpose).unwrap()
}

/// Pareto set by the definition: drop every profile strictly dominated by
/// some other profile.
pub fn brute_pareto(game: &Game) -> Vec<PureProfile> {
    let all: Vec<PureProfile> = game.profiles().collect();
    all.iter()
        .filter(|a| {
            let ua = game.utility(a).unwrap();
            !all.iter().any(|b| {
                let ub = game.utility(b).unwrap();
                ub.iter().zip(ua).all(|(x, y)| x >= y) && ub.iter().zip(ua).any(|(x, y)| x > y)
            })
        })
        .cloned()
        .collect()
}

/// Pure Nash equilibria by checking every unilateral deviation.
pub fn brute_nash(game: &Game) -> Vec<PureProfile> {
    game.profiles()
        .filter(|x| {
            let u = game.utility(x).unwrap();
            (0..game.num_players()).all(|i| {
                (0..game.num_actions(i)).all(|b| {
                    let mut y = x.clone();
                    y.0[i] = b;
                    game.utility(&y).unwrap()[i] <= u[i]
                })
            })
        })
        .collect()
}

/// Clique number by recursive branching over vertices.
pub fn brute_clique(adj: &[Vec<bool>]) -> usize {
    fn grow(adj: &[Vec<bool>], clique: &mut Vec<usize>, next: usize, best: &mut usize) {
        *best = (*best).max(clique.len());
        for v in next..adj.len() {
            if clique.iter().all(|&u| adj[u][v]) {
                clique.push(v);
                grow(adj, clique, v + 1, best);
                clique.pop();
            }
        }
    }
    let mut best = 0;
    grow(adj, &mut Vec::new(), 0, &mut best);
    best
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_vertices: usize) -> Vec<Vec<bool>> {
    let n = rng.gen_range(1..=max_vertices);
    let density: f64 = rng.gen_range(0.2..0.9);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    let mut adj = vec![vec![false; n]; n];
    for (u, v) in pairs {
        let edge = rng.gen_bool(density);
        adj[u][v] = edge;
        adj[v][u] = edge;
    }
    adj
}

/// Symmetric two-player diagonal game with strictly positive payoffs.
/// Diagonal entries come from a small integer grid so several actions tie
/// for the maximum; every off-diagonal entry is at most the maximum
/// diagonal value, which makes each profile weakly dominated by a diagonal
/// one.
pub fn random_symmetric_diagonal(rng: &mut ChaCha8Rng, max_actions: usize, integer: bool) -> Game {
    let m = rng.gen_range(2..=max_actions);
    let top = rng.gen_range(3..=8) as f64;
    let ties = rng.gen_range(1..=m);
    let mut diag: Vec<f64> = (0..m)
        .map(|k| {
            if k < ties {
                top
            } else if integer {
                rng.gen_range(1..top as i64) as f64
            } else {
                rng.gen_range(0.1..top)
            }
        })
        .collect();
    // Shuffle so the Kantian actions are not always the first ones.
    for k in (1..m).rev() {
        diag.swap(k, rng.gen_range(0..=k));
    }
    let a: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    if i == j {
                        diag[i]
                    } else if integer {
                        rng.gen_range(1..=top as i64) as f64
                    } else {
                        rng.gen_range(0.05..=top)
                    }
                })
                .collect()
        })
        .collect();
    symmetric_from(&a)
}

/// Symmetric coordination game: diagonal payoffs shared by both players,
/// zero elsewhere.
pub fn random_symmetric_coordination(rng: &mut ChaCha8Rng, max_actions: usize) -> (Game, f64) {
    let m = rng.gen_range(1..=max_actions);
    let diag: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..10.0)).collect();
    let a: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
        .collect();
    let best = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (symmetric_from(&a), best)
}

/// Random game with 2 or 3 players and small action sets, payoffs drawn
/// from an integer grid so ties occur.
pub fn random_small_game(rng: &mut ChaCha8Rng) -> Game {
    let n = rng.gen_range(2..=3);
    let actions: Vec<Vec<String>> = (0..n).map(|_| names(rng.gen_range(1..=3))).collect();
    Game::from_fn(actions, |_| {
        (0..n).map(|_| rng.gen_range(-3..=9) as f64).collect()
    })
    .unwrap()
}

/// Median with the middle pair averaged for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

/// Every point of the simplex in `k` dimensions whose coordinates are
/// multiples of `1/steps`.
pub fn simplex_grid(k: usize, steps: usize) -> Vec<Vec<f64>> {
    fn fill(k: usize, left: usize, steps: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if prefix.len() + 1 == k {
            prefix.push(left);
            out.push(prefix.iter().map(|&c| c as f64 / steps as f64).collect());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            fill(k, left - c, steps, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        fill(k, steps, steps, &mut Vec::new(), &mut out);
    }
    out
}

/// Stage-1 objectives over the Pareto payoff list `pay`, evaluated on a
/// 0.005 grid. Returns (rawlsian, bentham_harsanyi, best_off, percentile,
/// aspiration); the last two are minimized.
pub fn grid_stage1(pay: &[Vec<f64>]) -> [f64; 5] {
    let k = pay.len();
    let n = pay[0].len();
    let denom = if k > 1 { (k - 1) as f64 } else { 1.0 };
    let pct: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            (0..n)
                .map(|i| {
                    100.0 * (0..k).filter(|&b| b != a && pay[b][i] > pay[a][i]).count() as f64
                        / denom
                })
                .collect()
        })
        .collect();
    let nep: Vec<f64> = (0..n)
        .map(|i| median(&pay.iter().map(|u| u[i]).collect::<Vec<_>>()))
        .collect();
    let unhappy: Vec<Vec<f64>> = pay
        .iter()
        .map(|u| {
            (0..n)
                .map(|i| if u[i] < nep[i] { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();

    let mut best = [
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::INFINITY,
    ];
    for q in simplex_grid(k, 200) {
        let mix =
            |table: &[Vec<f64>], i: usize| -> f64 { (0..k).map(|a| q[a] * table[a][i]).sum() };
        let e: Vec<f64> = (0..n).map(|i| mix(pay, i)).collect();
        let min = e.iter().copied().fold(f64::INFINITY, f64::min);
        let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let worst_pct = (0..n)
            .map(|i| mix(&pct, i))
            .fold(f64::NEG_INFINITY, f64::max);
        let worst_unhappy = (0..n)
            .map(|i| mix(&unhappy, i))
            .fold(f64::NEG_INFINITY, f64::max);
        best[0] = best[0].max(min);
        best[1] = best[1].max(e.iter().sum());
        best[2] = best[2].max(max);
        best[3] = best[3].min(worst_pct);
        best[4] = best[4].min(worst_unhappy);
    }
    best
}

/// Random game with 2 or 3 players and payoffs on the grid
/// `{0, 0.1, ..., 1}`, so a 0.005 simplex grid resolves every objective to
/// within 0.005.
pub fn random_unit_game(rng: &mut ChaCha8Rng) -> Game {
    let n = rng.gen_range(2..=3);
    let actions: Vec<Vec<String>> = (0..n).map(|_| names(rng.gen_range(1..=3))).collect();
    Game::from_fn(actions, |_| {
        (0..n)
            .map(|_| rng.gen_range(0..=10) as f64 / 10.0)
            .collect()
    })
    .unwrap()
}
