//! Fixtures shared by the solver benchmarks.

use sse_core::credible::{credible_transition, filter, CredibleSet};
use sse_core::occupancy::LeaderRule;
use sse_core::pbvi::{SolverConfig, Variant};
use sse_core::{benchmarks, Game, Histories, HistoryMode};

pub fn game(name: &str, horizon: usize) -> Game {
    benchmarks::build(name, horizon).expect("built-in benchmark")
}

pub fn config(variant: Variant) -> SolverConfig {
    SolverConfig {
        variant,
        ..SolverConfig::default()
    }
}

/// The stage-1 credible set under the uniform leader rule, filtered, with its history tables.
pub fn stage_one(g: &Game) -> (Histories, CredibleSet) {
    let hist = Histories::new(HistoryMode::Full);
    let c0 = CredibleSet::initial(g, &hist);
    let mut rule = LeaderRule::new(0);
    let nl = g.n_leader_actions();
    rule.rows.insert(hist.leader.root(g.initial_state), vec![1.0 / nl as f64; nl]);
    let c1 = credible_transition(g, &hist, &c0, &rule, 1 << 16).expect("small transition");
    let c1 = filter(g, &c1);
    (hist, c1)
}
