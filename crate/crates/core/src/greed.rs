//! Bounded-greed (lambda-utilitarian) and homo-moralis payoff transforms,
//! and pure Nash enumeration for the transformed games.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, PureProfile};

/// `1 / (lambda - 1)`: infinite at `lambda = 1`, zero at `lambda = inf`.
pub fn greed_index(lambda: f64) -> f64 {
    if lambda.is_infinite() {
        0.0
    } else {
        1.0 / (lambda - 1.0)
    }
}

/// Per-player deviation thresholds `lambda >= 1` (`f64::INFINITY` allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct GreedParams {
    lambdas: Vec<f64>,
}

impl GreedParams {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if let Some(bad) = lambdas.iter().find(|l| l.is_nan() || **l < 1.0) {
            return Err(Error::Domain(format!(
                "lambda must be at least 1, got {bad}"
            )));
        }
        Ok(GreedParams { lambdas })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn greed_indices(&self) -> Vec<f64> {
        self.lambdas.iter().map(|&l| greed_index(l)).collect()
    }
}

/// How non-Kantian cells are scored once an agent is tempted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedSemantics {
    /// An agent that can gain more than `lambda` times its Kantian payoff
    /// somewhere abandons Kantian evaluation and scores every cell by its
    /// material payoff; otherwise its cells follow the per-cell rule.
    #[default]
    Agent,
    /// Each cell is scored on its own: Kantian action -> Kantian payoff,
    /// non-Kantian action paying at most `lambda` times the Kantian payoff
    /// -> 0, anything above -> material payoff.
    Cell,
}

impl fmt::Display for GreedSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GreedSemantics::Agent => "agent",
            GreedSemantics::Cell => "cell",
        })
    }
}

impl FromStr for GreedSemantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agent" => Ok(GreedSemantics::Agent),
            "cell" => Ok(GreedSemantics::Cell),
            other => Err(Error::Domain(format!("unknown greed semantics '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    LambdaUtilitarian {
        lambdas: Vec<f64>,
        semantics: GreedSemantics,
        /// Whether each agent has a non-Kantian cell beating its threshold.
        tempted: Vec<bool>,
    },
    HomoMoralis {
        kappa: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedGame {
    pub game: Game,
    /// Designated Kantian action per player: first diagonal maximizer.
    pub kantian_actions: Vec<usize>,
    /// Diagonal payoff of the designated Kantian action.
    pub kantian_payoffs: Vec<f64>,
    pub transform: Transform,
}

struct KantianReference {
    actions: Vec<usize>,
    payoffs: Vec<f64>,
    /// `is_kantian[i][a]`: action `a` maximizes player `i`'s diagonal payoff.
    is_kantian: Vec<Vec<bool>>,
    /// `diagonal[i][a] = u_i(a, ..., a)`.
    diagonal: Vec<Vec<f64>>,
}

fn kantian_reference(game: &Game) -> Result<KantianReference> {
    let m = game
        .common_actions()
        .ok_or_else(|| {
            Error::UnsupportedGame("greed transforms need identical action sets".into())
        })?
        .len();
    let n = game.num_players();
    let diagonal: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..m)
                .map(|a| game.utility(&game.diagonal_profile(a)).map(|u| u[i]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut actions = Vec::with_capacity(n);
    let mut payoffs = Vec::with_capacity(n);
    let mut is_kantian = Vec::with_capacity(n);
    for row in &diagonal {
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = row.iter().position(|&v| v == best).unwrap_or(0);
        actions.push(first);
        payoffs.push(best);
        is_kantian.push(row.iter().map(|&v| v == best).collect());
    }
    Ok(KantianReference {
        actions,
        payoffs,
        is_kantian,
        diagonal,
    })
}

/// Perceived utilities of lambda-utilitarian agents, with the default
/// [`GreedSemantics::Agent`] reading.
pub fn greed_transform(game: &Game, params: &GreedParams) -> Result<TransformedGame> {
    greed_transform_with(game, params, GreedSemantics::Agent)
}

pub fn greed_transform_with(
    game: &Game,
    params: &GreedParams,
    semantics: GreedSemantics,
) -> Result<TransformedGame> {
    let n = game.num_players();
    if params.lambdas.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: params.lambdas.len(),
        });
    }
    let reference = kantian_reference(game)?;
    // lambda = inf never deviates, whatever the sign of the Kantian payoff.
    let thresholds: Vec<f64> = params
        .lambdas
        .iter()
        .zip(&reference.payoffs)
        .map(|(&l, &p)| {
            if l.is_infinite() {
                f64::INFINITY
            } else {
                l * p
            }
        })
        .collect();

    let tempted: Vec<bool> = (0..n)
        .map(|i| {
            (0..game.num_profiles()).any(|k| {
                let a = game.profile_at(k).0[i];
                !reference.is_kantian[i][a] && game.utility_at(k)[i] > thresholds[i]
            })
        })
        .collect();

    let transformed = game.map_utilities(|profile, material| {
        (0..n)
            .map(|i| {
                if semantics == GreedSemantics::Agent && tempted[i] {
                    return material[i];
                }
                let a = profile.0[i];
                if reference.is_kantian[i][a] {
                    reference.diagonal[i][a]
                } else if material[i] <= thresholds[i] {
                    0.0
                } else {
                    material[i]
                }
            })
            .collect()
    })?;

    Ok(TransformedGame {
        game: transformed,
        kantian_actions: reference.actions,
        kantian_payoffs: reference.payoffs,
        transform: Transform::LambdaUtilitarian {
            lambdas: params.lambdas.clone(),
            semantics,
            tempted,
        },
    })
}

/// `u_i(x) = (1 - kappa) pi_i(x) + kappa pi_i(x_i, ..., x_i)`.
pub fn homo_moralis_transform(game: &Game, kappa: f64) -> Result<TransformedGame> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Domain(format!(
            "degree of morality must lie in [0, 1], got {kappa}"
        )));
    }
    let reference = kantian_reference(game)?;
    let n = game.num_players();
    let transformed = game.map_utilities(|profile, material| {
        (0..n)
            .map(|i| {
                let own = reference.diagonal[i][profile.0[i]];
                if kappa == 0.0 {
                    material[i]
                } else if kappa == 1.0 {
                    own
                } else {
                    (1.0 - kappa) * material[i] + kappa * own
                }
            })
            .collect()
    })?;
    Ok(TransformedGame {
        game: transformed,
        kantian_actions: reference.actions,
        kantian_payoffs: reference.payoffs,
        transform: Transform::HomoMoralis { kappa },
    })
}

/// Pure profiles where no player has a strictly improving unilateral
/// deviation, in lexicographic order.
pub fn pure_nash(game: &Game) -> Vec<PureProfile> {
    let n = game.num_players();
    game.profiles()
        .filter(|profile| {
            let u = game.utility(profile).expect("enumerated profile");
            (0..n).all(|i| {
                (0..game.num_actions(i)).all(|b| {
                    if b == profile.0[i] {
                        return true;
                    }
                    let mut deviation = profile.clone();
                    deviation.0[i] = b;
                    game.utility(&deviation).expect("valid deviation")[i] <= u[i]
                })
            })
        })
        .collect()
}
