//! The `kantian-solve` command line: one subcommand per solver, JSON reports
//! on standard output, JSON errors on standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::Error;
use crate::game::{Game, JointDistribution, PureProfile, VariationFamily};
use crate::greed::{self, GreedParams, GreedSemantics, Transform};
use crate::io;
use crate::kantian::{self, MixedKantianResult};
use crate::pareto::pareto_optimal_profiles;
use crate::protocols::{self, ProtocolRun};
use crate::stqp;
use crate::welfare::{self, EquilibriumReport, WelfareKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "kantian-solve",
    version,
    about = "Kantian and welfare equilibria of finite games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pareto-optimal pure profiles.
    Pareto {
        #[arg(short, long)]
        game: PathBuf,
    },
    /// Pure Kantian equilibria under a variation family.
    KantianPure {
        #[arg(short, long)]
        game: PathBuf,
        /// Variation family file; defaults to "everyone switches to b".
        #[arg(long)]
        family: Option<PathBuf>,
    },
    /// Mixed Kantian equilibrium of a symmetric two-player game.
    KantianMixed {
        #[arg(short, long)]
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 5000)]
        iters: usize,
    },
    /// Price of miscoordination.
    Pom {
        #[arg(short, long)]
        game: PathBuf,
    },
    /// Welfare-based Kantian program equilibrium.
    Welfare {
        #[arg(short, long)]
        game: PathBuf,
        #[arg(long)]
        kind: String,
    },
    /// Perceived game of lambda-utilitarian agents and its pure Nash set.
    Greed {
        #[arg(short, long)]
        game: PathBuf,
        /// One threshold per player, comma separated; `inf` is allowed.
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<f64>,
        #[arg(long, default_value = "agent")]
        semantics: String,
    },
    /// Pure Nash equilibria.
    Nash {
        #[arg(short, long)]
        game: PathBuf,
    },
    /// Closed-form mixed Kantian equilibrium of n-player Platonia.
    Platonia {
        #[arg(long)]
        n: usize,
    },
    /// Simulates a common-program protocol with shared randomness.
    Protocol {
        #[arg(long)]
        name: String,
        #[arg(short, long)]
        game: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
    /// Checks a candidate distribution against the Pareto support and
    /// undominatedness conditions.
    Verify {
        #[arg(short, long)]
        game: PathBuf,
        #[arg(long)]
        dist: PathBuf,
    },
    /// Clique number of a graph via its simplex quadratic program.
    CliqueDemo {
        #[arg(long)]
        graph: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Replicator,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(Error::Parse { .. }) => EXIT_USAGE,
            Failure::Core(Error::Numeric(_)) => EXIT_NUMERIC,
            Failure::Core(_) => EXIT_DOMAIN,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Usage(message) => json!({"error": message, "kind": "usage"}),
            Failure::Core(e) => {
                let kind = match e {
                    Error::Parse { .. } => "parse",
                    Error::Numeric(_) => "numeric",
                    Error::SizeLimit(_) => "size_limit",
                    Error::UnsupportedGame(_) => "unsupported_game",
                    _ => "domain",
                };
                json!({"error": e.to_string(), "kind": kind})
            }
        }
    }
}

/// Runs the CLI with `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let failure = Failure::Usage(e.render().to_string().trim().to_string());
                    let _ = writeln!(stderr, "{}", failure.to_json());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report).expect("reports are valid JSON");
            let _ = writeln!(stdout, "{text}");
            EXIT_OK
        }
        Err(failure) => {
            let _ = writeln!(stderr, "{}", failure.to_json());
            failure.exit_code()
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<Game, Failure> {
    Ok(io::parse_game(&read_file(path)?)?)
}

/// JSON number, or a string for non-finite values.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn profile_list(game: &Game, profiles: &[PureProfile]) -> Value {
    json!(profiles
        .iter()
        .map(|p| game.profile_names(p))
        .collect::<Vec<_>>())
}

fn distribution_json(game: &Game, dist: &JointDistribution) -> Value {
    json!(io::distribution_entries(game, dist))
}

fn execute(command: Command) -> Result<Value, Failure> {
    match command {
        Command::Pareto { game } => {
            let game = load_game(&game)?;
            let set = pareto_optimal_profiles(&game);
            Ok(json!({
                "concept": "pareto_optimal_profiles",
                "profiles": profile_list(&game, &set.profiles),
                "payoffs": set.payoffs,
            }))
        }
        Command::KantianPure { game, family } => {
            let game = load_game(&game)?;
            let family = match family {
                Some(path) => io::parse_family(&game, &read_file(&path)?)?,
                None => VariationFamily::replace_all(game.common_actions().ok_or_else(|| {
                    Error::UnsupportedGame(
                        "the default variation family needs identical action sets".into(),
                    )
                })?),
            };
            let result = kantian::pure_kantian(&game, &family)?;
            Ok(json!({
                "concept": "kantian_pure",
                "family": family.maps().iter().map(|m| m.label.clone()).collect::<Vec<_>>(),
                "equilibria": profile_list(&game, &result.equilibria),
                "payoffs": result.payoffs,
            }))
        }
        Command::KantianMixed {
            game,
            method,
            seed,
            restarts,
            iters,
        } => {
            let game = load_game(&game)?;
            let result = match method {
                Method::Exact => kantian::mixed_kantian_exact(&game)?,
                Method::Replicator => {
                    kantian::mixed_kantian_replicator(&game, seed, restarts, iters)?
                }
            };
            Ok(mixed_report(&game, &result, method, seed))
        }
        Command::Pom { game } => {
            let game = load_game(&game)?;
            let report = kantian::price_of_miscoordination(&game)?;
            let names = game.action_names(0);
            Ok(json!({
                "concept": "price_of_miscoordination",
                "kantian_actions": report.kantian_actions.iter().map(|&a| names[a].clone()).collect::<Vec<_>>(),
                "kantian_payoff": report.kantian_payoff,
                "worst_payoff": report.worst_payoff,
                "price": num(report.price),
                "theoretical_range": [report.theoretical_range.0, report.theoretical_range.1],
                "uniform_mixing_payoff": report.uniform_mixing_payoff,
                "common_mixing_worst_payoff": report.common_mixing_worst_payoff,
                "common_mixing_price": report.common_mixing_price.map(num),
                "diagonal": report.diagonal,
            }))
        }
        Command::Welfare { game, kind } => {
            let game = load_game(&game)?;
            let kind: WelfareKind = kind.parse().map_err(usage)?;
            let report = welfare::solve_welfare(&game, kind)?;
            Ok(welfare_report(&game, &report))
        }
        Command::Greed {
            game,
            lambda,
            semantics,
        } => {
            let game = load_game(&game)?;
            let semantics: GreedSemantics = semantics.parse().map_err(usage)?;
            if lambda.len() != game.num_players() {
                return Err(Error::DimensionMismatch {
                    expected: game.num_players(),
                    found: lambda.len(),
                }
                .into());
            }
            let params = GreedParams::new(lambda)?;
            let transformed = greed::greed_transform_with(&game, &params, semantics)?;
            let tempted = match &transformed.transform {
                Transform::LambdaUtilitarian { tempted, .. } => tempted.clone(),
                Transform::HomoMoralis { .. } => Vec::new(),
            };
            let names = game.action_names(0);
            Ok(json!({
                "concept": "lambda_utilitarian",
                "semantics": semantics.to_string(),
                "lambdas": nums(params.lambdas()),
                "greed_indices": nums(&params.greed_indices()),
                "tempted": tempted,
                "kantian_actions": transformed.kantian_actions.iter().map(|&a| names[a].clone()).collect::<Vec<_>>(),
                "kantian_payoffs": transformed.kantian_payoffs,
                "perceived_game": io::to_document(&transformed.game),
                "pure_nash": profile_list(&game, &greed::pure_nash(&transformed.game)),
            }))
        }
        Command::Nash { game } => {
            let game = load_game(&game)?;
            Ok(json!({
                "concept": "pure_nash",
                "equilibria": profile_list(&game, &greed::pure_nash(&game)),
            }))
        }
        Command::Platonia { n } => {
            let (p, payoff) = kantian::platonia_mixed_kantian(n)?;
            Ok(json!({
                "concept": "platonia_mixed_kantian",
                "n": n,
                "p": p,
                "expected_payoff": payoff,
            }))
        }
        Command::Protocol {
            name,
            game,
            n,
            seed,
            trials,
        } => {
            let id: protocols::ProtocolId = name.parse().map_err(usage)?;
            let run = match id {
                protocols::ProtocolId::ChooseWinner => {
                    let n = n.ok_or_else(|| Failure::Usage("choose-winner needs --n".into()))?;
                    protocols::run_choose_winner(n, seed, trials)?
                }
                _ => {
                    let path = game
                        .ok_or_else(|| Failure::Usage(format!("protocol {name} needs --game")))?;
                    let game = load_game(&path)?;
                    if id == protocols::ProtocolId::BosXor {
                        protocols::run_bos_protocol(&game, seed, trials)?
                    } else {
                        protocols::run_anticoord_protocol(&game, seed, trials)?
                    }
                }
            };
            Ok(protocol_report(&run))
        }
        Command::Verify { game, dist } => {
            let game = load_game(&game)?;
            let dist = io::parse_distribution(&game, &read_file(&dist)?)?;
            let verdict = protocols::verify_candidate(&game, &dist)?;
            Ok(json!({
                "concept": "candidate_verification",
                "supported_on_pareto": verdict.supported_on_pareto,
                "undominated": verdict.undominated,
                "utilities": verdict.expected_utilities,
                "improvement": verdict.improvement,
                "witness": verdict.witness.as_ref().map(|w| distribution_json(&game, w)),
                "witness_utilities": verdict.witness_utilities,
                "common_program_checked": verdict.common_program_checked,
            }))
        }
        Command::CliqueDemo { graph } => {
            let graph = io::parse_graph(&read_file(&graph)?)?;
            let qp = stqp::maximize_exact(&graph.adjacency_matrix())?;
            let implied = 1.0 / (1.0 - qp.value);
            Ok(json!({
                "concept": "motzkin_straus",
                "vertices": graph.len(),
                "quadratic_optimum": qp.value,
                "maximizer": qp.x,
                "implied_clique_size": num(implied),
                "rounded_clique_size": implied.round(),
                "brute_force_clique_size": graph.max_clique_size()?,
            }))
        }
    }
}

fn mixed_report(game: &Game, result: &MixedKantianResult, method: Method, seed: u64) -> Value {
    let mut report = json!({
        "concept": "mixed_kantian",
        "method": result.method,
        "actions": game.action_names(0),
        "strategy": result.strategy.weights(),
        "value": result.value,
        "multiplier": result.multiplier,
        "max_violation": result.max_violation,
    });
    if method == Method::Replicator {
        report["seed"] = json!(seed);
    }
    report
}

fn welfare_report(game: &Game, report: &EquilibriumReport) -> Value {
    let support: Vec<Vec<String>> = report
        .distribution
        .iter()
        .map(|(p, _)| game.profile_names(p))
        .collect();
    let probabilities: Vec<f64> = report.distribution.iter().map(|(_, w)| w).collect();
    let mut out = json!({
        "concept": report.kind.name(),
        "stage1_value": report.stage1_value,
        "support": support,
        "probabilities": probabilities,
        "utilities": report.expected_utilities,
        "diagnostics": report.diagnostics.iter().map(|d| json!({
            "stage": d.stage,
            "status": format!("{:?}", d.status).to_lowercase(),
            "pivots": d.pivots,
            "max_violation": d.max_violation,
            "numerically_degenerate": d.numerically_degenerate,
        })).collect::<Vec<_>>(),
    });
    if let Some(p) = &report.percentiles {
        out["percentile_table"] = json!(p.table);
    }
    if let Some(a) = &report.aspiration {
        out["nep"] = json!(a.nep);
        out["happy"] = json!(a.happy);
    }
    out
}

fn protocol_report(run: &ProtocolRun) -> Value {
    let names = |p: &PureProfile| -> Vec<String> {
        p.choices()
            .iter()
            .enumerate()
            .map(|(i, &a)| run.actions[i][a].clone())
            .collect()
    };
    json!({
        "concept": "kantian_program_equilibrium",
        "protocol": run.protocol.name(),
        "n_agents": run.n_agents,
        "seed": run.seed,
        "trials": run.trials,
        "exact": {
            "distribution": run.exact_distribution.iter().map(|(p, w)| json!({
                "profile": names(p),
                "p": w,
            })).collect::<Vec<_>>(),
            "utilities": run.exact_expected_utilities,
        },
        "empirical": run.empirical.as_ref().map(|e| json!({
            "means": e.means,
            "std_errors": e.std_errors,
        })),
        "submitters_per_trial": run.submitters_per_trial.map(|(lo, hi)| json!({
            "min": lo,
            "max": hi,
        })),
    })
}
