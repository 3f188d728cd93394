//! Strong Stackelberg equilibria in finite-horizon leader-follower stochastic
//! games, computed through credible sets and point-based value iteration.

pub mod baselines;
pub mod benchmarks;
pub mod credible;
pub mod error;
pub mod experiment;
pub mod game;
pub mod history;
pub mod milp;
pub mod occupancy;
pub mod pbvi;
pub mod vectors;

pub use error::{Result, SseError};
pub use game::{validate_game, Game, Player};
pub use history::{HistId, Histories, HistoryMode};
