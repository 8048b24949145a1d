//! Kantian, welfare-based and bounded-greed equilibria of finite
//! normal-form games.
//!
//! The crate models games as dense payoff tensors ([`Game`]), enumerates
//! Pareto-optimal profiles, finds pure and mixed Kantian equilibria, solves
//! the welfare-based program equilibria with a built-in simplex solver,
//! transforms games for agents with bounded greed, and simulates
//! common-program protocols with shared randomness.

pub mod cli;
pub mod clique;
pub mod error;
pub mod game;
pub mod greed;
pub mod io;
pub mod kantian;
pub mod lp;
pub mod pareto;
pub mod protocols;
pub mod stqp;
pub mod welfare;

pub use error::{Error, Result};
pub use game::{Game, JointDistribution, MixedStrategy, PureProfile, VariationFamily};
pub use pareto::{pareto_optimal_profiles, ParetoSet};
pub use welfare::{solve_welfare, EquilibriumReport, WelfareKind};
