//! Common-program protocols with shared randomness, and a verifier for the
//! support and undominatedness conditions of candidate distributions.
//!
//! Each trial draws every agent's random value from one trusted sampler and
//! hands the full draw vector to all agents, which then run the same program
//! with their own 1-based ID. Draws come from `ChaCha8Rng` seeded with
//! `seed_from_u64`, so runs reproduce bit-exactly on every platform.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, JointDistribution, PureProfile};
use crate::lp::{self, LinearProgram};
use crate::pareto::pareto_optimal_profiles;

/// Improvement in the utility sum above which a candidate counts as
/// dominated.
pub const DOMINATION_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolId {
    BosXor,
    AnticoordXor,
    ChooseWinner,
}

impl ProtocolId {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolId::BosXor => "bos_xor",
            ProtocolId::AnticoordXor => "anticoord_xor",
            ProtocolId::ChooseWinner => "choose_winner",
        }
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bos" | "bos_xor" => Ok(ProtocolId::BosXor),
            "anticoord" | "anticoord_xor" => Ok(ProtocolId::AnticoordXor),
            "choose-winner" | "choose_winner" => Ok(ProtocolId::ChooseWinner),
            other => Err(Error::Domain(format!("unknown protocol '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalStats {
    pub means: Vec<f64>,
    pub std_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub protocol: ProtocolId,
    pub n_agents: usize,
    pub seed: u64,
    pub trials: usize,
    /// Action names per agent, for rendering profiles.
    pub actions: Vec<Vec<String>>,
    pub exact_distribution: JointDistribution,
    pub exact_expected_utilities: Vec<f64>,
    /// `None` when `trials == 0`.
    pub empirical: Option<EmpiricalStats>,
    /// Smallest and largest number of submitters seen in a trial
    /// (choose-winner only).
    pub submitters_per_trial: Option<(usize, usize)>,
}

/// Welford accumulator over per-agent utilities.
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(n: usize) -> Self {
        Moments {
            count: 0,
            mean: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for ((m, s), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(sample) {
            let delta = x - *m;
            *m += delta / c;
            *s += delta * (x - *m);
        }
    }

    fn finish(self) -> Option<EmpiricalStats> {
        if self.count == 0 {
            return None;
        }
        let c = self.count as f64;
        let std_errors = self
            .m2
            .iter()
            .map(|s| {
                if self.count < 2 {
                    0.0
                } else {
                    (s / (c - 1.0)).sqrt() / c.sqrt()
                }
            })
            .collect();
        Some(EmpiricalStats {
            means: self.mean,
            std_errors,
        })
    }
}

/// Index of each named action for both players, or an error naming the
/// expected action set.
fn two_player_actions(game: &Game, names: [&str; 2]) -> Result<[[usize; 2]; 2]> {
    if game.num_players() != 2 {
        return Err(Error::UnsupportedGame(format!(
            "protocol needs 2 players, game has {}",
            game.num_players()
        )));
    }
    let mut out = [[0; 2]; 2];
    for (player, slot) in out.iter_mut().enumerate() {
        let actions = game.action_names(player);
        if actions.len() != 2 || !names.iter().all(|n| actions.iter().any(|a| a == n)) {
            return Err(Error::UnsupportedGame(format!(
                "protocol needs actions {{{}, {}}} for player {player}, found {actions:?}",
                names[0], names[1]
            )));
        }
        for (k, name) in names.iter().enumerate() {
            slot[k] = game.action_index(player, name).expect("checked above");
        }
    }
    Ok(out)
}

/// Runs a two-agent XOR protocol. `program(id, my_bit, other_bit)` returns
/// 0 or 1, indexing into `names`.
fn run_xor_protocol(
    game: &Game,
    protocol: ProtocolId,
    names: [&str; 2],
    program: fn(usize, u8, u8) -> usize,
    seed: u64,
    trials: usize,
) -> Result<ProtocolRun> {
    let index = two_player_actions(game, names)?;
    let play = |bits: [u8; 2]| {
        PureProfile(vec![
            index[0][program(1, bits[0], bits[1])],
            index[1][program(2, bits[1], bits[0])],
        ])
    };

    // Exact distribution: the four bit pairs are equally likely.
    let mut mass: Vec<(PureProfile, f64)> = Vec::new();
    for b0 in 0..2u8 {
        for b1 in 0..2u8 {
            let profile = play([b0, b1]);
            match mass.iter_mut().find(|(p, _)| *p == profile) {
                Some((_, w)) => *w += 0.25,
                None => mass.push((profile, 0.25)),
            }
        }
    }
    mass.sort_by(|a, b| a.0.cmp(&b.0));
    let exact_distribution = JointDistribution::new(mass)?;
    let exact_expected_utilities = game.expected_utility(&exact_distribution)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moments = Moments::new(2);
    for _ in 0..trials {
        let bits = [rng.gen::<bool>() as u8, rng.gen::<bool>() as u8];
        moments.push(game.utility(&play(bits))?);
    }

    Ok(ProtocolRun {
        protocol,
        n_agents: 2,
        seed,
        trials,
        actions: game.actions().to_vec(),
        exact_distribution,
        exact_expected_utilities,
        empirical: moments.finish(),
        submitters_per_trial: None,
    })
}

/// Both agents play `B` when the XOR of their bits is 0, `S` otherwise.
pub fn bos_program(_id: usize, my_bit: u8, other_bit: u8) -> usize {
    if my_bit ^ other_bit == 0 {
        0
    } else {
        1
    }
}

/// Agent `id` plays `C` when the XOR of the bits matches `id` mod 2.
pub fn anticoord_program(id: usize, my_bit: u8, other_bit: u8) -> usize {
    if (my_bit ^ other_bit) as usize == id % 2 {
        0
    } else {
        1
    }
}

/// Agent `id` (1-based) submits when the sum of all draws is congruent to
/// `id` mod `n`; residue 0 belongs to agent `n`.
pub fn choose_winner_program(id: usize, draws: &[usize]) -> bool {
    let n = draws.len();
    draws.iter().fold(0, |s, &b| (s + b) % n) == id % n
}

pub fn run_bos_protocol(game: &Game, seed: u64, trials: usize) -> Result<ProtocolRun> {
    run_xor_protocol(
        game,
        ProtocolId::BosXor,
        ["B", "S"],
        bos_program,
        seed,
        trials,
    )
}

pub fn run_anticoord_protocol(game: &Game, seed: u64, trials: usize) -> Result<ProtocolRun> {
    run_xor_protocol(
        game,
        ProtocolId::AnticoordXor,
        ["C", "S"],
        anticoord_program,
        seed,
        trials,
    )
}

/// Choose-Winner in `n`-agent Platonia. Actions are `S` (index 0) and `D`.
pub fn run_choose_winner(n: usize, seed: u64, trials: usize) -> Result<ProtocolRun> {
    if n == 0 {
        return Err(Error::Domain(
            "choose-winner needs at least one agent".into(),
        ));
    }
    // The sum of n independent uniform draws on Z_n is uniform, so each
    // agent is the lone submitter with probability 1/n.
    let exact_distribution = JointDistribution::new(
        (0..n)
            .map(|winner| {
                let profile = PureProfile((0..n).map(|i| usize::from(i != winner)).collect());
                (profile, 1.0 / n as f64)
            })
            .rev()
            .collect(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut moments = Moments::new(n);
    let mut draws = vec![0usize; n];
    let mut utilities = vec![0.0; n];
    let mut submitters_range: Option<(usize, usize)> = None;
    for _ in 0..trials {
        for d in draws.iter_mut() {
            *d = rng.gen_range(0..n);
        }
        let submitted: Vec<bool> = (1..=n)
            .map(|id| choose_winner_program(id, &draws))
            .collect();
        let count = submitted.iter().filter(|&&s| s).count();
        for (u, &s) in utilities.iter_mut().zip(&submitted) {
            *u = if s && count == 1 { 1.0 } else { 0.0 };
        }
        moments.push(&utilities);
        submitters_range = Some(match submitters_range {
            None => (count, count),
            Some((lo, hi)) => (lo.min(count), hi.max(count)),
        });
    }

    Ok(ProtocolRun {
        protocol: ProtocolId::ChooseWinner,
        n_agents: n,
        seed,
        trials,
        actions: vec![vec!["S".to_string(), "D".to_string()]; n],
        exact_distribution,
        exact_expected_utilities: vec![1.0 / n as f64; n],
        empirical: moments.finish(),
        submitters_per_trial: submitters_range,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateVerdict {
    /// Every profile with positive probability is Pareto-optimal.
    pub supported_on_pareto: bool,
    /// No Pareto-supported distribution weakly dominates the candidate with a
    /// larger utility sum.
    pub undominated: bool,
    pub expected_utilities: Vec<f64>,
    /// Largest gain in the utility sum over distributions that weakly
    /// dominate the candidate.
    pub improvement: f64,
    pub witness: Option<JointDistribution>,
    pub witness_utilities: Option<Vec<f64>>,
    /// The common-program condition is only certified for the built-in
    /// protocols; it is never checked here.
    pub common_program_checked: bool,
}

/// Checks that `candidate` lives on the Pareto set and that no distribution
/// on the Pareto set weakly dominates it with a larger utility sum.
pub fn verify_candidate(game: &Game, candidate: &JointDistribution) -> Result<CandidateVerdict> {
    let pareto = pareto_optimal_profiles(game);
    let expected = game.expected_utility(candidate)?;
    let supported_on_pareto = candidate
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .all(|(a, _)| pareto.contains(a));

    let sums: Vec<f64> = pareto.payoffs.iter().map(|u| u.iter().sum()).collect();
    let mut prog = LinearProgram::maximize(sums);
    prog.equal(vec![1.0; pareto.len()], 1.0);
    for (i, e) in expected.iter().enumerate() {
        let column: Vec<f64> = pareto.payoffs.iter().map(|u| u[i]).collect();
        prog.ge(column, *e);
    }
    let solution = lp::solve(&prog)?;
    if !solution.is_optimal() {
        return Err(Error::Numeric(format!(
            "domination LP ended with status {:?}",
            solution.status
        )));
    }
    let improvement = solution.value - expected.iter().sum::<f64>();
    let undominated = improvement <= DOMINATION_THRESHOLD;

    let (witness, witness_utilities) = if undominated {
        (None, None)
    } else {
        let support: Vec<(PureProfile, f64)> = pareto
            .profiles
            .iter()
            .zip(&solution.x)
            .filter(|(_, &w)| w > 1e-12)
            .map(|(a, &w)| (a.clone(), w))
            .collect();
        let total: f64 = support.iter().map(|(_, w)| w).sum();
        let witness =
            JointDistribution::new(support.into_iter().map(|(a, w)| (a, w / total)).collect())?;
        let utilities = game.expected_utility(&witness)?;
        (Some(witness), Some(utilities))
    };

    Ok(CandidateVerdict {
        supported_on_pareto,
        undominated,
        expected_utilities: expected,
        improvement,
        witness,
        witness_utilities,
        common_program_checked: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{bimatrix, platonia_game};
    use approx::assert_abs_diff_eq;

    fn classic_bos() -> Game {
        bimatrix(
            &["B", "S"],
            &["B", "S"],
            &[vec![2.0, 0.0], vec![1.0, 3.0]],
            &[vec![3.0, 0.0], vec![1.0, 2.0]],
        )
        .unwrap()
    }

    fn anticoordination() -> Game {
        bimatrix(
            &["C", "S"],
            &["C", "S"],
            &[vec![10.0, 100.0], vec![200.0, 6.0]],
            &[vec![10.0, 200.0], vec![100.0, 6.0]],
        )
        .unwrap()
    }

    fn pd() -> Game {
        bimatrix(
            &["C", "D"],
            &["C", "D"],
            &[vec![2.0, 0.0], vec![3.0, 1.0]],
            &[vec![2.0, 3.0], vec![0.0, 1.0]],
        )
        .unwrap()
    }

    #[test]
    fn bos_protocol_coordinates() {
        let run = run_bos_protocol(&classic_bos(), 1, 0).unwrap();
        assert_eq!(run.exact_expected_utilities, vec![2.5, 2.5]);
        assert_eq!(
            run.exact_distribution.support(),
            &[
                (PureProfile(vec![0, 0]), 0.5),
                (PureProfile(vec![1, 1]), 0.5)
            ]
        );
        assert!(run.empirical.is_none());
    }

    #[test]
    fn bos_protocol_is_seed_deterministic() {
        let a = run_bos_protocol(&classic_bos(), 99, 1000).unwrap();
        let b = run_bos_protocol(&classic_bos(), 99, 1000).unwrap();
        assert_eq!(a, b);
        let c = run_bos_protocol(&classic_bos(), 100, 1000).unwrap();
        assert_ne!(a.empirical, c.empirical);
    }

    #[test]
    fn anticoord_protocol_splits_roles() {
        let run = run_anticoord_protocol(&anticoordination(), 3, 0).unwrap();
        assert_eq!(run.exact_expected_utilities, vec![150.0, 150.0]);
        assert_eq!(
            run.exact_distribution
                .probability_of(&PureProfile(vec![0, 0])),
            0.0
        );
        assert_eq!(
            run.exact_distribution
                .probability_of(&PureProfile(vec![1, 1])),
            0.0
        );
        assert_eq!(
            run.exact_distribution
                .probability_of(&PureProfile(vec![0, 1])),
            0.5
        );
    }

    #[test]
    fn protocols_reject_wrong_actions() {
        assert!(matches!(
            run_bos_protocol(&pd(), 0, 10),
            Err(Error::UnsupportedGame(_))
        ));
        assert!(run_anticoord_protocol(&classic_bos(), 0, 10).is_err());
    }

    #[test]
    fn choose_winner_single_submitter() {
        let run = run_choose_winner(5, 11, 2000).unwrap();
        assert_eq!(run.submitters_per_trial, Some((1, 1)));
        let means = &run.empirical.as_ref().unwrap().means;
        assert_abs_diff_eq!(means.iter().sum::<f64>(), 1.0, epsilon = 1e-9);

        let solo = run_choose_winner(1, 0, 10).unwrap();
        assert_eq!(solo.empirical.unwrap().means, vec![1.0]);
        assert!(run_choose_winner(0, 0, 10).is_err());
    }

    #[test]
    fn choose_winner_exact_distribution_matches_enumeration() {
        // All n^n draw vectors for small n.
        for n in 1..=4usize {
            let mut counts = vec![0usize; n];
            let total = n.pow(n as u32);
            for code in 0..total {
                let mut c = code;
                let draws: Vec<usize> = (0..n)
                    .map(|_| {
                        let d = c % n;
                        c /= n;
                        d
                    })
                    .collect();
                let who: Vec<usize> = (1..=n)
                    .filter(|&id| choose_winner_program(id, &draws))
                    .collect();
                assert_eq!(who.len(), 1);
                counts[who[0] - 1] += 1;
            }
            let run = run_choose_winner(n, 0, 0).unwrap();
            for (agent, &c) in counts.iter().enumerate() {
                let mut profile = vec![1; n];
                profile[agent] = 0;
                assert_abs_diff_eq!(
                    run.exact_distribution.probability_of(&PureProfile(profile)),
                    c as f64 / total as f64,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn verify_prisoners_dilemma_candidates() {
        let g = pd();
        let cc =
            verify_candidate(&g, &JointDistribution::point_mass(PureProfile(vec![0, 0]))).unwrap();
        assert!(cc.supported_on_pareto && cc.undominated);

        let dd =
            verify_candidate(&g, &JointDistribution::point_mass(PureProfile(vec![1, 1]))).unwrap();
        assert!(!dd.supported_on_pareto);
        assert!(!dd.undominated);

        let split = JointDistribution::new(vec![
            (PureProfile(vec![0, 1]), 0.5),
            (PureProfile(vec![1, 0]), 0.5),
        ])
        .unwrap();
        let v = verify_candidate(&g, &split).unwrap();
        assert!(v.supported_on_pareto);
        assert!(!v.undominated);
        assert_abs_diff_eq!(v.improvement, 1.0, epsilon = 1e-9);
        assert_eq!(
            v.witness.unwrap().support(),
            &[(PureProfile(vec![0, 0]), 1.0)]
        );
        assert!(!v.common_program_checked);
    }

    #[test]
    fn choose_winner_distribution_is_undominated_in_platonia() {
        for n in 1..=5 {
            let g = platonia_game(n).unwrap();
            let run = run_choose_winner(n, 0, 0).unwrap();
            let v = verify_candidate(&g, &run.exact_distribution).unwrap();
            assert!(v.supported_on_pareto && v.undominated, "n = {n}");
        }
    }
}
