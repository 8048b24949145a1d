//! Finite normal-form games, profiles, mixed strategies and correlated
//! distributions.
//!
//! Payoffs are stored as a dense row-major tensor: pure profiles are laid out
//! in lexicographic order of their action indices (player 0 most
//! significant), and each profile owns one utility per player. Every
//! downstream enumeration (Pareto sets, tie-breaking, reports) uses this
//! order.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that probabilities sum to one.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// One action index per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PureProfile(pub Vec<usize>);

impl PureProfile {
    pub fn new(choices: Vec<usize>) -> Self {
        PureProfile(choices)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when every player picks the same action index.
    pub fn is_diagonal(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for PureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A probability vector over one player's actions.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    weights: Vec<f64>,
}

impl MixedStrategy {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("mixed strategy has no actions".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain(format!(
                "mixed strategy weights must be finite and nonnegative: {weights:?}"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::Domain(format!(
                "mixed strategy weights sum to {total}, not 1"
            )));
        }
        Ok(MixedStrategy { weights })
    }

    pub fn pure(num_actions: usize, action: usize) -> Result<Self> {
        if action >= num_actions {
            return Err(Error::InvalidProfile(format!(
                "action {action} out of range for {num_actions} actions"
            )));
        }
        let mut weights = vec![0.0; num_actions];
        weights[action] = 1.0;
        Ok(MixedStrategy { weights })
    }

    pub fn uniform(num_actions: usize) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::Domain("mixed strategy has no actions".into()));
        }
        Ok(MixedStrategy {
            weights: vec![1.0 / num_actions as f64; num_actions],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// A correlated distribution over pure profiles, stored by its support.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    support: Vec<(PureProfile, f64)>,
}

impl JointDistribution {
    /// Validates nonnegativity, unit mass and distinctness of the profiles.
    pub fn new(support: Vec<(PureProfile, f64)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Domain("distribution has empty support".into()));
        }
        let mut seen = HashSet::with_capacity(support.len());
        let mut total = 0.0;
        for (profile, p) in &support {
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::Domain(format!(
                    "probability {p} for profile {profile} is not a nonnegative number"
                )));
            }
            if !seen.insert(profile.clone()) {
                return Err(Error::Domain(format!(
                    "profile {profile} appears twice in the distribution"
                )));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::Domain(format!(
                "distribution probabilities sum to {total}, not 1"
            )));
        }
        Ok(JointDistribution { support })
    }

    pub fn point_mass(profile: PureProfile) -> Self {
        JointDistribution {
            support: vec![(profile, 1.0)],
        }
    }

    pub fn support(&self) -> &[(PureProfile, f64)] {
        &self.support
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PureProfile, f64)> {
        self.support.iter().map(|(a, p)| (a, *p))
    }

    pub fn probability_of(&self, profile: &PureProfile) -> f64 {
        self.support
            .iter()
            .find(|(a, _)| a == profile)
            .map_or(0.0, |(_, p)| *p)
    }
}

/// Outcome of comparing two utility vectors componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    None,
    Weak,
    Strict,
}

/// Componentwise comparison of `u` against `v` on the stored values.
///
/// `Strict` when `u >= v` everywhere with at least one strict inequality,
/// `Weak` when the vectors are equal, `None` otherwise.
pub fn dominates(u: &[f64], v: &[f64]) -> Result<Dominance> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(dominance_unchecked(u, v))
}

pub(crate) fn dominance_unchecked(u: &[f64], v: &[f64]) -> Dominance {
    let mut strict = false;
    for (a, b) in u.iter().zip(v) {
        if a < b {
            return Dominance::None;
        }
        if a > b {
            strict = true;
        }
    }
    if strict {
        Dominance::Strict
    } else {
        Dominance::Weak
    }
}

pub(crate) fn strictly_dominates(u: &[f64], v: &[f64]) -> bool {
    dominance_unchecked(u, v) == Dominance::Strict
}

/// Structural predicates of a game. All comparisons are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub identical_actions: bool,
    /// Every pure profile is weakly dominated by some diagonal profile.
    pub diagonal: bool,
    /// Diagonal, with every off-diagonal utility equal to zero.
    pub coordination: bool,
    /// Coordination, with all players' utilities equal on each diagonal profile.
    pub symmetric_coordination: bool,
    /// Two players, identical actions and `u2(i, j) = u1(j, i)`.
    pub symmetric_two_player: bool,
    /// Invariance under every permutation of the players (any player count).
    pub symmetric: bool,
}

/// A family of variation maps `action -> action` over a common action set,
/// one map per parameter value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariationFamily {
    num_actions: usize,
    maps: Vec<VariationMap>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariationMap {
    pub label: String,
    pub table: Vec<usize>,
}

impl VariationFamily {
    pub fn new(num_actions: usize, maps: Vec<VariationMap>) -> Result<Self> {
        for map in &maps {
            if map.table.len() != num_actions {
                return Err(Error::Domain(format!(
                    "variation map '{}' is not total: {} of {} actions mapped",
                    map.label,
                    map.table.len(),
                    num_actions
                )));
            }
            if let Some(bad) = map.table.iter().find(|&&b| b >= num_actions) {
                return Err(Error::Domain(format!(
                    "variation map '{}' sends an action to index {bad}, outside the action set",
                    map.label
                )));
            }
        }
        Ok(VariationFamily { num_actions, maps })
    }

    /// The "everyone switches to `b`" family: one constant map per action.
    pub fn replace_all(actions: &[String]) -> Self {
        let m = actions.len();
        let maps = actions
            .iter()
            .enumerate()
            .map(|(b, name)| VariationMap {
                label: name.clone(),
                table: vec![b; m],
            })
            .collect();
        VariationFamily {
            num_actions: m,
            maps,
        }
    }

    pub fn identity(num_actions: usize) -> Self {
        VariationFamily {
            num_actions,
            maps: vec![VariationMap {
                label: "identity".into(),
                table: (0..num_actions).collect(),
            }],
        }
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn maps(&self) -> &[VariationMap] {
        &self.maps
    }

    /// Applies map `r` to every coordinate of `profile`.
    pub fn apply(&self, r: usize, profile: &PureProfile) -> PureProfile {
        let table = &self.maps[r].table;
        PureProfile(profile.0.iter().map(|&a| table[a]).collect())
    }
}

/// A finite normal-form game with a dense payoff tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    actions: Vec<Vec<String>>,
    strides: Vec<usize>,
    num_profiles: usize,
    payoffs: Vec<f64>,
}

impl Game {
    /// Builds a game from per-player action names and one utility vector per
    /// pure profile, given in lexicographic profile order.
    pub fn new(actions: Vec<Vec<String>>, payoffs: Vec<Vec<f64>>) -> Result<Self> {
        let (strides, num_profiles) = Self::layout(&actions)?;
        if payoffs.len() != num_profiles {
            return Err(Error::InvalidGame(format!(
                "payoff tensor has {} entries, expected {num_profiles}",
                payoffs.len()
            )));
        }
        let n = actions.len();
        let mut flat = Vec::with_capacity(num_profiles * n);
        for (index, u) in payoffs.iter().enumerate() {
            if u.len() != n {
                return Err(Error::InvalidGame(format!(
                    "profile #{index} has {} utilities, expected {n}",
                    u.len()
                )));
            }
            if let Some(bad) = u.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidGame(format!(
                    "profile #{index} has non-finite utility {bad}"
                )));
            }
            flat.extend_from_slice(u);
        }
        Ok(Game {
            actions,
            strides,
            num_profiles,
            payoffs: flat,
        })
    }

    /// Builds a game by evaluating `utility` on every pure profile.
    pub fn from_fn<F>(actions: Vec<Vec<String>>, mut utility: F) -> Result<Self>
    where
        F: FnMut(&PureProfile) -> Vec<f64>,
    {
        let (strides, num_profiles) = Self::layout(&actions)?;
        let payoffs = (0..num_profiles)
            .map(|k| utility(&decode(&actions, &strides, k)))
            .collect();
        Self::new(actions, payoffs)
    }

    fn layout(actions: &[Vec<String>]) -> Result<(Vec<usize>, usize)> {
        if actions.is_empty() {
            return Err(Error::InvalidGame(
                "a game needs at least one player".into(),
            ));
        }
        for (player, names) in actions.iter().enumerate() {
            if names.is_empty() {
                return Err(Error::InvalidGame(format!(
                    "player {player} has no actions"
                )));
            }
            let mut seen = HashSet::new();
            for name in names {
                if !seen.insert(name.as_str()) {
                    return Err(Error::InvalidGame(format!(
                        "player {player} lists action '{name}' twice"
                    )));
                }
            }
        }
        let mut strides = vec![1; actions.len()];
        let mut total: usize = 1;
        for p in (0..actions.len()).rev() {
            strides[p] = total;
            total = total
                .checked_mul(actions[p].len())
                .ok_or_else(|| Error::SizeLimit("number of pure profiles overflows".into()))?;
        }
        Ok((strides, total))
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[Vec<String>] {
        &self.actions
    }

    pub fn action_names(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    pub fn num_profiles(&self) -> usize {
        self.num_profiles
    }

    pub fn action_index(&self, player: usize, name: &str) -> Option<usize> {
        self.actions.get(player)?.iter().position(|a| a == name)
    }

    fn check_profile(&self, profile: &PureProfile) -> Result<()> {
        if profile.len() != self.num_players() {
            return Err(Error::InvalidProfile(format!(
                "profile {profile} has {} entries for {} players",
                profile.len(),
                self.num_players()
            )));
        }
        for (player, &a) in profile.0.iter().enumerate() {
            if a >= self.num_actions(player) {
                return Err(Error::InvalidProfile(format!(
                    "action index {a} out of range for player {player} in {profile}"
                )));
            }
        }
        Ok(())
    }

    /// Position of `profile` in the lexicographic enumeration.
    pub fn profile_index(&self, profile: &PureProfile) -> Result<usize> {
        self.check_profile(profile)?;
        Ok(self.index_unchecked(profile))
    }

    fn index_unchecked(&self, profile: &PureProfile) -> usize {
        profile
            .0
            .iter()
            .zip(&self.strides)
            .map(|(a, s)| a * s)
            .sum()
    }

    pub fn profile_at(&self, index: usize) -> PureProfile {
        decode(&self.actions, &self.strides, index)
    }

    pub fn profiles(&self) -> impl Iterator<Item = PureProfile> + '_ {
        (0..self.num_profiles).map(move |k| self.profile_at(k))
    }

    pub fn utility(&self, profile: &PureProfile) -> Result<&[f64]> {
        let k = self.profile_index(profile)?;
        Ok(self.utility_at(k))
    }

    pub fn utility_at(&self, index: usize) -> &[f64] {
        let n = self.num_players();
        &self.payoffs[index * n..(index + 1) * n]
    }

    /// Componentwise `sum_a p(a) u(a)`.
    pub fn expected_utility(&self, dist: &JointDistribution) -> Result<Vec<f64>> {
        let mut total = vec![0.0; self.num_players()];
        for (profile, p) in dist.iter() {
            let u = self.utility(profile)?;
            for (t, x) in total.iter_mut().zip(u) {
                *t += p * x;
            }
        }
        Ok(total)
    }

    /// Expected utility when every player mixes independently.
    pub fn expected_utility_product(&self, strategies: &[MixedStrategy]) -> Result<Vec<f64>> {
        if strategies.len() != self.num_players() {
            return Err(Error::DimensionMismatch {
                expected: self.num_players(),
                found: strategies.len(),
            });
        }
        for (player, s) in strategies.iter().enumerate() {
            if s.len() != self.num_actions(player) {
                return Err(Error::DimensionMismatch {
                    expected: self.num_actions(player),
                    found: s.len(),
                });
            }
        }
        let mut total = vec![0.0; self.num_players()];
        for k in 0..self.num_profiles {
            let profile = self.profile_at(k);
            let mut p = 1.0;
            for (s, &a) in strategies.iter().zip(&profile.0) {
                p *= s.weights[a];
                if p == 0.0 {
                    break;
                }
            }
            if p == 0.0 {
                continue;
            }
            for (t, x) in total.iter_mut().zip(self.utility_at(k)) {
                *t += p * x;
            }
        }
        Ok(total)
    }

    /// Maps a list of action names, one per player, to a profile.
    pub fn profile_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<PureProfile> {
        if names.len() != self.num_players() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} actions for {} players",
                names.len(),
                self.num_players()
            )));
        }
        names
            .iter()
            .enumerate()
            .map(|(player, name)| {
                self.action_index(player, name.as_ref()).ok_or_else(|| {
                    Error::InvalidProfile(format!(
                        "unknown action '{}' for player {player}",
                        name.as_ref()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(PureProfile)
    }

    pub fn profile_names(&self, profile: &PureProfile) -> Vec<String> {
        profile
            .0
            .iter()
            .enumerate()
            .map(|(player, &a)| self.actions[player][a].clone())
            .collect()
    }

    /// True when all players share the same ordered list of action names.
    pub fn has_identical_actions(&self) -> bool {
        self.actions.windows(2).all(|w| w[0] == w[1])
    }

    /// The common action set, if there is one.
    pub fn common_actions(&self) -> Option<&[String]> {
        self.has_identical_actions()
            .then(|| self.actions[0].as_slice())
    }

    pub fn diagonal_profile(&self, action: usize) -> PureProfile {
        PureProfile(vec![action; self.num_players()])
    }

    /// Player `player`'s payoff matrix in a two-player game, rows indexed by
    /// player 0's action.
    pub fn payoff_matrix(&self, player: usize) -> Result<Vec<Vec<f64>>> {
        if self.num_players() != 2 {
            return Err(Error::UnsupportedGame(format!(
                "payoff matrices need 2 players, game has {}",
                self.num_players()
            )));
        }
        let (rows, cols) = (self.num_actions(0), self.num_actions(1));
        Ok((0..rows)
            .map(|i| {
                (0..cols)
                    .map(|j| self.utility_at(i * cols + j)[player])
                    .collect()
            })
            .collect())
    }

    /// Returns a game with the same actions and transformed utilities.
    pub fn map_utilities<F>(&self, mut f: F) -> Result<Game>
    where
        F: FnMut(&PureProfile, &[f64]) -> Vec<f64>,
    {
        let payoffs = (0..self.num_profiles)
            .map(|k| f(&self.profile_at(k), self.utility_at(k)))
            .collect();
        Game::new(self.actions.clone(), payoffs)
    }

    pub fn classify(&self) -> StructureReport {
        let identical_actions = self.has_identical_actions();
        if !identical_actions {
            return StructureReport {
                identical_actions,
                diagonal: false,
                coordination: false,
                symmetric_coordination: false,
                symmetric_two_player: false,
                symmetric: false,
            };
        }
        let m = self.num_actions(0);
        let diagonal_utils: Vec<&[f64]> = (0..m)
            .map(|a| self.utility_at(self.index_unchecked(&self.diagonal_profile(a))))
            .collect();

        let diagonal = (0..self.num_profiles).all(|k| {
            let u = self.utility_at(k);
            diagonal_utils
                .iter()
                .any(|d| dominance_unchecked(d, u) != Dominance::None)
        });
        let off_diagonal_zero = (0..self.num_profiles).all(|k| {
            self.profile_at(k).is_diagonal() || self.utility_at(k).iter().all(|&x| x == 0.0)
        });
        let coordination = diagonal && off_diagonal_zero;
        let symmetric_coordination = coordination
            && diagonal_utils
                .iter()
                .all(|u| u.windows(2).all(|w| w[0] == w[1]));
        let symmetric = self.is_permutation_symmetric();
        let symmetric_two_player = self.num_players() == 2 && symmetric;

        StructureReport {
            identical_actions,
            diagonal,
            coordination,
            symmetric_coordination,
            symmetric_two_player,
            symmetric,
        }
    }

    /// Checks `u_{s(i)}(x) = u_i(x o s)` for the transpositions `(0 j)`,
    /// which generate the full symmetric group.
    fn is_permutation_symmetric(&self) -> bool {
        let n = self.num_players();
        for j in 1..n {
            for k in 0..self.num_profiles {
                let x = self.profile_at(k);
                let mut swapped = x.clone();
                swapped.0.swap(0, j);
                let u = self.utility_at(k);
                let v = self.utility_at(self.index_unchecked(&swapped));
                for (i, &vi) in v.iter().enumerate() {
                    let si = if i == 0 {
                        j
                    } else if i == j {
                        0
                    } else {
                        i
                    };
                    if u[si] != vi {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn decode(actions: &[Vec<String>], strides: &[usize], mut index: usize) -> PureProfile {
    let mut choices = Vec::with_capacity(actions.len());
    for (names, &s) in actions.iter().zip(strides) {
        choices.push(index / s);
        index %= s;
        debug_assert!(choices.last().copied().unwrap_or(0) < names.len());
    }
    PureProfile(choices)
}

/// Helper for building named action lists in tests and fixtures.
pub fn action_names<S: AsRef<str>>(names: &[S]) -> Vec<String> {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

/// A two-player game from row-player and column-player matrices.
pub fn bimatrix<S: AsRef<str>>(
    row_actions: &[S],
    col_actions: &[S],
    row_payoffs: &[Vec<f64>],
    col_payoffs: &[Vec<f64>],
) -> Result<Game> {
    let rows = row_actions.len();
    let cols = col_actions.len();
    let shape_ok = |m: &[Vec<f64>]| m.len() == rows && m.iter().all(|r| r.len() == cols);
    if !shape_ok(row_payoffs) || !shape_ok(col_payoffs) {
        return Err(Error::InvalidGame(format!(
            "payoff matrices must be {rows}x{cols}"
        )));
    }
    let mut payoffs = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            payoffs.push(vec![row_payoffs[i][j], col_payoffs[i][j]]);
        }
    }
    Game::new(
        vec![action_names(row_actions), action_names(col_actions)],
        payoffs,
    )
}

/// The symmetric two-player game whose row-player matrix is `matrix`
/// (`u1(i, j) = A[i][j]`, `u2(i, j) = A[j][i]`).
pub fn symmetric_game<S: AsRef<str>>(actions: &[S], matrix: &[Vec<f64>]) -> Result<Game> {
    let transposed: Vec<Vec<f64>> = (0..matrix.len())
        .map(|i| {
            matrix
                .iter()
                .map(|row| row.get(i).copied().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    bimatrix(actions, actions, matrix, &transposed)
}

/// Platonia's dilemma: `n` players choose `S`(ubmit) or `D`(on't); a player
/// earns 1 exactly when it is the only submitter.
pub fn platonia_game(n: usize) -> Result<Game> {
    if n == 0 {
        return Err(Error::Domain("Platonia needs at least one player".into()));
    }
    let actions = vec![action_names(&["S", "D"]); n];
    Game::from_fn(actions, |profile| {
        let submitters: Vec<usize> = profile
            .choices()
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == 0)
            .map(|(i, _)| i)
            .collect();
        let mut u = vec![0.0; n];
        if let [winner] = submitters.as_slice() {
            u[*winner] = 1.0;
        }
        u
    })
}
