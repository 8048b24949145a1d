//! Welfare equilibria over correlated distributions on the Pareto set.
//!
//! Every equilibrium is computed in up to three linear-programming stages
//! over the probabilities `p(a)` of the Pareto-optimal profiles:
//!
//! 1. the kind-specific criterion (max-min utility, sum of utilities, best
//!    single payoff, min-max percentile, min-max unhappiness);
//! 2. the sum of expected utilities is maximized with the stage-1 optimum
//!    held fixed, so no feasible distribution strictly dominates the result;
//! 3. among stage-2 optima the lexicographically largest probability vector
//!    (in Pareto-set order) is selected, which makes ties deterministic.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Game, JointDistribution};
use crate::lp::{self, Constraint, LinearProgram, LpSolution, LpStatus, Relation};
use crate::pareto::{pareto_optimal_profiles, ParetoSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WelfareKind {
    Rawlsian,
    BenthamHarsanyi,
    BestOff,
    RawlsianPercentile,
    Aspiration,
}

impl WelfareKind {
    pub const ALL: [WelfareKind; 5] = [
        WelfareKind::Rawlsian,
        WelfareKind::BenthamHarsanyi,
        WelfareKind::BestOff,
        WelfareKind::RawlsianPercentile,
        WelfareKind::Aspiration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WelfareKind::Rawlsian => "rawlsian",
            WelfareKind::BenthamHarsanyi => "bentham_harsanyi",
            WelfareKind::BestOff => "best_off",
            WelfareKind::RawlsianPercentile => "rawlsian_percentile",
            WelfareKind::Aspiration => "aspiration",
        }
    }
}

impl fmt::Display for WelfareKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WelfareKind {
    type Err = Error;

    /// Accepts the canonical names and the short CLI aliases.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "rawlsian" => WelfareKind::Rawlsian,
            "bentham" | "bentham_harsanyi" => WelfareKind::BenthamHarsanyi,
            "bestoff" | "best_off" => WelfareKind::BestOff,
            "percentile" | "rawlsian_percentile" => WelfareKind::RawlsianPercentile,
            "aspiration" => WelfareKind::Aspiration,
            other => return Err(Error::Domain(format!("unknown welfare kind '{other}'"))),
        })
    }
}

/// Percentile index of each Pareto profile (rows) for each player (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentileData {
    pub table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AspirationData {
    /// Natural expectation point of each player.
    pub nep: Vec<f64>,
    /// `happy[a][i]` iff player `i`'s payoff at Pareto profile `a` reaches
    /// its natural expectation point.
    pub happy: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageDiagnostic {
    pub stage: String,
    pub status: LpStatus,
    pub pivots: usize,
    pub max_violation: f64,
    pub numerically_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub kind: WelfareKind,
    pub distribution: JointDistribution,
    pub expected_utilities: Vec<f64>,
    /// Optimal value of the kind-specific criterion.
    pub stage1_value: f64,
    pub diagnostics: Vec<StageDiagnostic>,
    pub percentiles: Option<PercentileData>,
    pub aspiration: Option<AspirationData>,
}

/// `perc_i(a) = 100 * #{b != a in P : u_i(b) > u_i(a)} / max(1, |P| - 1)`.
pub fn percentile_table(pareto: &ParetoSet) -> PercentileData {
    let n = pareto.num_players();
    let denom = pareto.len().saturating_sub(1).max(1) as f64;
    let table = pareto
        .payoffs
        .iter()
        .enumerate()
        .map(|(a, ua)| {
            (0..n)
                .map(|i| {
                    let better = pareto
                        .payoffs
                        .iter()
                        .enumerate()
                        .filter(|(b, ub)| *b != a && ub[i] > ua[i])
                        .count();
                    100.0 * better as f64 / denom
                })
                .collect()
        })
        .collect();
    PercentileData { table }
}

/// Median payoff over the Pareto set (mean of the middle pair for even
/// counts) and the resulting happiness flags.
pub fn aspiration_data(pareto: &ParetoSet) -> AspirationData {
    let n = pareto.num_players();
    let nep: Vec<f64> = (0..n)
        .map(|i| {
            let mut values: Vec<f64> = pareto.payoffs.iter().map(|u| u[i]).collect();
            values.sort_by(f64::total_cmp);
            let len = values.len();
            if len % 2 == 1 {
                values[len / 2]
            } else {
                0.5 * (values[len / 2 - 1] + values[len / 2])
            }
        })
        .collect();
    let happy = pareto
        .payoffs
        .iter()
        .map(|u| u.iter().zip(&nep).map(|(x, e)| x >= e).collect())
        .collect();
    AspirationData { nep, happy }
}

pub fn rawlsian(game: &Game) -> Result<EquilibriumReport> {
    solve_welfare(game, WelfareKind::Rawlsian)
}

pub fn bentham_harsanyi(game: &Game) -> Result<EquilibriumReport> {
    solve_welfare(game, WelfareKind::BenthamHarsanyi)
}

pub fn best_off(game: &Game) -> Result<EquilibriumReport> {
    solve_welfare(game, WelfareKind::BestOff)
}

pub fn rawlsian_percentile(game: &Game) -> Result<EquilibriumReport> {
    solve_welfare(game, WelfareKind::RawlsianPercentile)
}

pub fn aspiration(game: &Game) -> Result<EquilibriumReport> {
    solve_welfare(game, WelfareKind::Aspiration)
}

pub fn solve_welfare(game: &Game, kind: WelfareKind) -> Result<EquilibriumReport> {
    let pareto = pareto_optimal_profiles(game);
    solve_on_pareto(game, &pareto, kind)
}

/// Same as [`solve_welfare`] with a precomputed Pareto set.
pub fn solve_on_pareto(
    game: &Game,
    pareto: &ParetoSet,
    kind: WelfareKind,
) -> Result<EquilibriumReport> {
    if pareto.is_empty() {
        return Err(Error::Domain("Pareto set is empty".into()));
    }
    let mut run = Stages::new(pareto);
    let mut percentiles = None;
    let mut aspiration = None;

    let stage1_value = match kind {
        WelfareKind::Rawlsian => {
            let scores = pareto.payoffs.clone();
            run.maxmin(&scores)?
        }
        WelfareKind::RawlsianPercentile => {
            let data = percentile_table(pareto);
            let scores = negate(&data.table);
            percentiles = Some(data);
            -run.maxmin(&scores)?
        }
        WelfareKind::Aspiration => {
            let data = aspiration_data(pareto);
            let unhappy: Vec<Vec<f64>> = data
                .happy
                .iter()
                .map(|row| row.iter().map(|&h| if h { 0.0 } else { -1.0 }).collect())
                .collect();
            aspiration = Some(data);
            -run.maxmin(&unhappy)?
        }
        WelfareKind::BestOff => {
            let n = pareto.num_players();
            let best: Vec<f64> = (0..n)
                .map(|i| {
                    pareto
                        .payoffs
                        .iter()
                        .map(|u| u[i])
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect();
            let mut star = 0;
            for i in 1..n {
                if best[i] > best[star] {
                    star = i;
                }
            }
            let column: Vec<f64> = pareto.payoffs.iter().map(|u| u[star]).collect();
            run.hold(column, best[star]);
            best[star]
        }
        WelfareKind::BenthamHarsanyi => run.maximize_sum()?,
    };

    if kind != WelfareKind::BenthamHarsanyi {
        run.maximize_sum()?;
    }
    let weights = run.lexicographic()?;

    let support: Vec<_> = pareto
        .profiles
        .iter()
        .zip(&weights)
        .filter(|(_, &w)| w > SUPPORT_CUTOFF)
        .map(|(a, &w)| (a.clone(), w))
        .collect();
    let total: f64 = support.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Numeric(format!(
            "{kind} stages returned total mass {total}"
        )));
    }
    let distribution =
        JointDistribution::new(support.into_iter().map(|(a, w)| (a, w / total)).collect())?;
    let expected_utilities = game.expected_utility(&distribution)?;

    Ok(EquilibriumReport {
        kind,
        distribution,
        expected_utilities,
        stage1_value,
        diagnostics: run.diagnostics,
        percentiles,
        aspiration,
    })
}

fn negate(table: &[Vec<f64>]) -> Vec<Vec<f64>> {
    table
        .iter()
        .map(|row| row.iter().map(|v| -v).collect())
        .collect()
}

/// Relative slack when a stage optimum is carried into later stages.
const HOLD_TOLERANCE: f64 = 1e-11;

/// Weights at or below this are dropped from reported distributions.
pub const SUPPORT_CUTOFF: f64 = 1e-9;

fn hold_tolerance(value: f64) -> f64 {
    HOLD_TOLERANCE * (1.0 + value.abs())
}

/// Accumulates constraints over the Pareto probabilities as stages finish.
struct Stages<'a> {
    pareto: &'a ParetoSet,
    held: Vec<Constraint>,
    diagnostics: Vec<StageDiagnostic>,
}

impl<'a> Stages<'a> {
    fn new(pareto: &'a ParetoSet) -> Self {
        Stages {
            pareto,
            held: vec![Constraint {
                coefficients: vec![1.0; pareto.len()],
                relation: Relation::Eq,
                bound: 1.0,
            }],
            diagnostics: Vec::new(),
        }
    }

    fn record(&mut self, stage: &str, solution: &LpSolution) -> Result<()> {
        self.diagnostics.push(StageDiagnostic {
            stage: stage.to_string(),
            status: solution.status,
            pivots: solution.diagnostics.pivots,
            max_violation: solution.diagnostics.max_violation,
            numerically_degenerate: solution.diagnostics.numerically_degenerate,
        });
        if !solution.is_optimal() {
            return Err(Error::Numeric(format!(
                "{stage} LP ended with status {:?}",
                solution.status
            )));
        }
        Ok(())
    }

    /// Requires `coefficients . p >= value` up to the hold tolerance.
    fn hold(&mut self, coefficients: Vec<f64>, value: f64) {
        self.held.push(Constraint {
            coefficients,
            relation: Relation::Ge,
            bound: value - hold_tolerance(value),
        });
    }

    /// `max t` subject to `sum_a p(a) score[a][i] >= t` for every column
    /// `i`; `t` is split into two nonnegative parts.
    fn maxmin(&mut self, scores: &[Vec<f64>]) -> Result<f64> {
        let n_p = self.pareto.len();
        let columns = scores.first().map_or(0, Vec::len);
        let mut objective = vec![0.0; n_p + 2];
        objective[n_p] = 1.0;
        objective[n_p + 1] = -1.0;
        let mut prog = LinearProgram::maximize(objective);
        for c in &self.held {
            let mut coefficients = c.coefficients.clone();
            coefficients.extend([0.0, 0.0]);
            prog.add(coefficients, c.relation, c.bound);
        }
        for i in 0..columns {
            let mut coefficients: Vec<f64> = scores.iter().map(|row| row[i]).collect();
            coefficients.extend([-1.0, 1.0]);
            prog.ge(coefficients, 0.0);
        }
        let solution = lp::solve(&prog)?;
        self.record("stage1", &solution)?;
        let t = solution.value;
        for i in 0..columns {
            self.hold(scores.iter().map(|row| row[i]).collect(), t);
        }
        Ok(t)
    }

    /// Maximizes the sum of expected utilities and holds the optimum.
    fn maximize_sum(&mut self) -> Result<f64> {
        let sums: Vec<f64> = self.pareto.payoffs.iter().map(|u| u.iter().sum()).collect();
        let mut prog = LinearProgram::maximize(sums.clone());
        prog.constraints = self.held.clone();
        let solution = lp::solve(&prog)?;
        self.record("stage2", &solution)?;
        self.hold(sums, solution.value);
        Ok(solution.value)
    }

    /// Lexicographically largest feasible probability vector: maximize
    /// `p(a_0)`, fix it, then `p(a_1)`, and so on. Fixed variables are
    /// substituted out so the program only shrinks.
    fn lexicographic(&mut self) -> Result<Vec<f64>> {
        let n_p = self.pareto.len();
        let mut fixed: Vec<f64> = Vec::with_capacity(n_p);
        let mut summary = StageDiagnostic {
            stage: "tie_break".into(),
            status: LpStatus::Optimal,
            pivots: 0,
            max_violation: 0.0,
            numerically_degenerate: false,
        };
        for k in 0..n_p {
            let assigned: f64 = fixed.iter().sum();
            if assigned >= 1.0 - SUPPORT_CUTOFF {
                fixed.resize(n_p, 0.0);
                break;
            }
            let free = n_p - k;
            let mut objective = vec![0.0; free];
            objective[0] = 1.0;
            let mut prog = LinearProgram::maximize(objective);
            for c in &self.held {
                let shift: f64 = c.coefficients[..k]
                    .iter()
                    .zip(&fixed)
                    .map(|(a, v)| a * v)
                    .sum();
                prog.add(c.coefficients[k..].to_vec(), c.relation, c.bound - shift);
            }
            let solution = lp::solve(&prog)?;
            if !solution.is_optimal() {
                self.record("tie_break", &solution)?;
            }
            summary.pivots += solution.diagnostics.pivots;
            summary.max_violation = summary
                .max_violation
                .max(solution.diagnostics.max_violation);
            summary.numerically_degenerate |= solution.diagnostics.numerically_degenerate;
            fixed.push(solution.x[0].max(0.0));
        }
        self.diagnostics.push(summary);
        Ok(fixed)
    }
}
