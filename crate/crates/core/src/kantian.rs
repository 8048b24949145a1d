//! Pure and mixed Kantian equilibria, the price of miscoordination, and the
//! closed form for Platonia's dilemma.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, MixedStrategy, PureProfile, VariationFamily};
use crate::stqp::{self, QpSolution};

/// Diagonal (or arbitrary) profiles that pass the Kantian test.
#[derive(Debug, Clone, PartialEq)]
pub struct KantianResult {
    pub equilibria: Vec<PureProfile>,
    pub payoffs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixedMethod {
    SupportEnumeration,
    Replicator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedKantianResult {
    pub strategy: MixedStrategy,
    /// Common expected utility `y' A y`.
    pub value: f64,
    pub method: MixedMethod,
    /// KKT multiplier of the simplex constraint.
    pub multiplier: f64,
    /// Largest `(A y)_j - y' A y` over actions outside the support.
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MiscoordinationReport {
    /// Diagonal maximizers, as action indices.
    pub kantian_actions: Vec<usize>,
    pub kantian_payoff: f64,
    /// Smallest utility of any player over pure profiles built from Kantian
    /// actions only.
    pub worst_payoff: f64,
    /// `kantian_payoff / worst_payoff`.
    pub price: f64,
    /// `[1, r^(k-1)]` for `r` Kantian actions and `k` players.
    pub theoretical_range: (f64, f64),
    /// Expected utility when every player mixes uniformly over the Kantian
    /// actions.
    pub uniform_mixing_payoff: f64,
    /// Smallest expected utility when all players use one common mixture of
    /// Kantian actions. Computed for two-player games only.
    pub common_mixing_worst_payoff: Option<f64>,
    pub common_mixing_price: Option<f64>,
    /// Whether the game is diagonal; the range bound is only claimed then.
    pub diagonal: bool,
}

fn require_identical_actions(game: &Game) -> Result<&[String]> {
    game.common_actions().ok_or_else(|| {
        Error::UnsupportedGame("Kantian reasoning needs identical action sets".into())
    })
}

/// Checks `V_i(x) >= V_i(phi(r, x))` for every player `i` and every map `r`
/// of the family. `profile` need not be diagonal.
pub fn is_kantian_profile(
    game: &Game,
    profile: &PureProfile,
    family: &VariationFamily,
) -> Result<bool> {
    let actions = require_identical_actions(game)?;
    if family.num_actions() != actions.len() {
        return Err(Error::DimensionMismatch {
            expected: actions.len(),
            found: family.num_actions(),
        });
    }
    let base = game.utility(profile)?;
    for r in 0..family.maps().len() {
        let varied = family.apply(r, profile);
        let u = game.utility(&varied)?;
        if base.iter().zip(u).any(|(b, v)| b < v) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All diagonal profiles `(a, ..., a)` that pass [`is_kantian_profile`].
pub fn pure_kantian(game: &Game, family: &VariationFamily) -> Result<KantianResult> {
    let m = require_identical_actions(game)?.len();
    let mut equilibria = Vec::new();
    let mut payoffs = Vec::new();
    for a in 0..m {
        let profile = game.diagonal_profile(a);
        if is_kantian_profile(game, &profile, family)? {
            payoffs.push(game.utility(&profile)?.to_vec());
            equilibria.push(profile);
        }
    }
    Ok(KantianResult {
        equilibria,
        payoffs,
    })
}

fn symmetric_matrix(game: &Game) -> Result<Vec<Vec<f64>>> {
    if !game.classify().symmetric_two_player {
        return Err(Error::UnsupportedGame(
            "mixed Kantian equilibria are computed for symmetric two-player games".into(),
        ));
    }
    game.payoff_matrix(0)
}

fn into_result(solution: QpSolution, method: MixedMethod) -> Result<MixedKantianResult> {
    Ok(MixedKantianResult {
        strategy: MixedStrategy::new(solution.x)?,
        value: solution.value,
        method,
        multiplier: solution.multiplier,
        max_violation: solution.max_violation,
    })
}

/// Global maximizer of `y' A y` over the simplex for a symmetric two-player
/// game with row-player matrix `A`, by support enumeration.
pub fn mixed_kantian_exact(game: &Game) -> Result<MixedKantianResult> {
    let matrix = symmetric_matrix(game)?;
    into_result(
        stqp::maximize_exact(&matrix)?,
        MixedMethod::SupportEnumeration,
    )
}

/// Multi-start replicator dynamics for the same program; a local heuristic.
pub fn mixed_kantian_replicator(
    game: &Game,
    seed: u64,
    restarts: usize,
    iterations: usize,
) -> Result<MixedKantianResult> {
    let matrix = symmetric_matrix(game)?;
    into_result(
        stqp::maximize_replicator(&matrix, seed, restarts, iterations)?,
        MixedMethod::Replicator,
    )
}

/// Price of miscoordination of a symmetric game with strictly positive
/// payoffs.
///
/// `price` takes the supremum over independently mixed profiles of Kantian
/// actions; by multilinearity this is attained at a pure profile. For two
/// players the report also carries the same ratio restricted to a common
/// mixture used by both players.
pub fn price_of_miscoordination(game: &Game) -> Result<MiscoordinationReport> {
    let m = require_identical_actions(game)?.len();
    let structure = game.classify();
    if !structure.symmetric {
        return Err(Error::UnsupportedGame(
            "price of miscoordination needs a symmetric game".into(),
        ));
    }
    if let Some(k) =
        (0..game.num_profiles()).find(|&k| game.utility_at(k).iter().any(|&u| u <= 0.0))
    {
        return Err(Error::Domain(format!(
            "price of miscoordination needs strictly positive payoffs; profile {} has {:?}",
            game.profile_at(k),
            game.utility_at(k)
        )));
    }

    let diagonal_payoff = |a: usize| game.utility(&game.diagonal_profile(a)).map(|u| u[0]);
    let diag: Vec<f64> = (0..m).map(diagonal_payoff).collect::<Result<_>>()?;
    let kantian_payoff = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let kantian_actions: Vec<usize> = (0..m).filter(|&a| diag[a] == kantian_payoff).collect();
    let r = kantian_actions.len();
    let k = game.num_players();

    // Every pure profile over Kantian actions, as an odometer.
    let mut worst_payoff = f64::INFINITY;
    let mut digits = vec![0usize; k];
    loop {
        let profile = PureProfile(digits.iter().map(|&d| kantian_actions[d]).collect());
        let u = game.utility(&profile)?;
        worst_payoff = u.iter().copied().fold(worst_payoff, f64::min);
        let mut pos = k;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < r {
                break;
            }
            digits[pos] = 0;
        }
        if digits.iter().all(|&d| d == 0) {
            break;
        }
    }

    let mut uniform = vec![0.0; m];
    for &a in &kantian_actions {
        uniform[a] = 1.0 / r as f64;
    }
    let uniform = MixedStrategy::new(uniform)?;
    let uniform_mixing_payoff = game.expected_utility_product(&vec![uniform; k])?[0];

    let common_mixing_worst_payoff = if k == 2 && r <= stqp::MAX_EXACT_DIMENSION {
        let negated: Vec<Vec<f64>> = kantian_actions
            .iter()
            .map(|&a| {
                kantian_actions
                    .iter()
                    .map(|&b| game.utility(&PureProfile(vec![a, b])).map(|u| -u[0]))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Some(-stqp::maximize_exact(&negated)?.value)
    } else {
        None
    };

    Ok(MiscoordinationReport {
        price: kantian_payoff / worst_payoff,
        theoretical_range: (1.0, (r as f64).powi(k as i32 - 1)),
        uniform_mixing_payoff,
        common_mixing_price: common_mixing_worst_payoff.map(|w| kantian_payoff / w),
        common_mixing_worst_payoff,
        kantian_actions,
        kantian_payoff,
        worst_payoff,
        diagonal: structure.diagonal,
    })
}

/// Optimal common submission probability in `n`-player Platonia and the
/// resulting expected payoff `p (1 - p)^(n - 1)` at `p = 1/n`.
pub fn platonia_mixed_kantian(n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("Platonia needs at least one player".into()));
    }
    let p = 1.0 / n as f64;
    Ok((p, p * (1.0 - p).powi(n as i32 - 1)))
}
