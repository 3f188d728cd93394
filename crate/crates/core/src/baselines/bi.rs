use std::sync::Arc;

use serde::Serialize;

use super::br::best_response;
use crate::error::{Result, SseError};
use crate::game::{Game, Player};
use crate::history::{Histories, HistoryMode};
use crate::milp::{Backend, Cmp, MilpModel, Outcome, Sense, SolveOptions};
use crate::occupancy::LeaderPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BiMode {
    /// The follower is held to its continuation value.
    Full,
    /// The follower is held to its best immediate reward.
    Myopic,
}

#[derive(Debug, Clone)]
pub struct BiSolution {
    pub policy: LeaderPolicy,
    /// Leader value against the exact best response.
    pub value: f64,
    /// Root value the backward sweep believed it would get.
    pub planned_value: f64,
}

/// Best commitment at one state: for each follower action, the LP over the
/// leader's mixed action keeping that action optimal for the follower.
fn one_state(
    ql: &[Vec<f64>],
    qf: &[Vec<f64>],
    incentive: &[Vec<f64>],
    backend: &dyn Backend,
) -> Result<(Vec<f64>, f64, f64)> {
    let (nl, nf) = (ql.len(), ql[0].len());
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    for af in 0..nf {
        let mut m = MilpModel::new(Sense::Maximize);
        let x: Vec<_> = (0..nl).map(|a| m.add_continuous(format!("x{a}"), 0.0, 1.0)).collect();
        m.add_constraint("simplex", x.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0);
        for other in (0..nf).filter(|&o| o != af) {
            let terms = x
                .iter()
                .enumerate()
                .map(|(a, &v)| (v, incentive[a][af] - incentive[a][other]))
                .collect();
            m.add_constraint(format!("br{other}"), terms, Cmp::Ge, 0.0);
        }
        m.set_objective(x.iter().enumerate().map(|(a, &v)| (v, ql[a][af])).collect(), 0.0);
        let values = match backend.solve(&m, &SolveOptions::default())? {
            Outcome::Optimal(a) => a.values,
            Outcome::Infeasible => continue,
            Outcome::TimedOut(_) => return Err(SseError::Solver("one-state LP timed out".into())),
        };
        let mut row: Vec<f64> = x.iter().map(|v| values[v.0].max(0.0)).collect();
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= total);
        let vl: f64 = (0..nl).map(|a| row[a] * ql[a][af]).sum();
        let vf: f64 = (0..nl).map(|a| row[a] * qf[a][af]).sum();
        if best.as_ref().map_or(true, |b| vl > b.1 + 1e-9) {
            best = Some((row, vl, vf));
        }
    }
    best.ok_or_else(|| SseError::Contract("every follower action infeasible in a one-state program".into()))
}

/// Backward induction over `(stage, state)` returning a Markov leader policy.
pub fn backward_induction(g: &Game, mode: BiMode, backend: &dyn Backend) -> Result<BiSolution> {
    let (ns, nl, nf) = (g.n_states(), g.n_leader_actions(), g.n_follower_actions());
    let mut v = vec![vec![(0.0, 0.0); ns]; g.horizon + 1];
    let mut dist = vec![vec![Vec::new(); ns]; g.horizon];
    for t in (0..g.horizon).rev() {
        let disc = g.discount_at(t);
        for s in 0..ns {
            let mut ql = vec![vec![0.0; nf]; nl];
            let mut qf = vec![vec![0.0; nf]; nl];
            let mut rf = vec![vec![0.0; nf]; nl];
            for al in 0..nl {
                for af in 0..nf {
                    for &(s2, p) in g.successors(s, al, af) {
                        let (cl, cf) = v[t + 1][s2];
                        ql[al][af] += p * (disc * g.reward(Player::Leader, s, al, af, s2) + cl);
                        qf[al][af] += p * (disc * g.reward(Player::Follower, s, al, af, s2) + cf);
                        rf[al][af] += p * disc * g.reward(Player::Follower, s, al, af, s2);
                    }
                }
            }
            let incentive = match mode {
                BiMode::Full => &qf,
                BiMode::Myopic => &rf,
            };
            let (row, vl, vf) = one_state(&ql, &qf, incentive, backend)?;
            v[t][s] = (vl, vf);
            dist[t][s] = row;
        }
    }
    let hist = Arc::new(Histories::new(HistoryMode::Full));
    let policy = LeaderPolicy::markov(g, hist, &dist)?;
    let value = best_response(g, &policy)?.value_leader;
    Ok(BiSolution {
        policy,
        value,
        planned_value: v[0][g.initial_state].0,
    })
}
