use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::enumerate::{check_capacity, follower_policies, leader_policies};
use crate::error::{Result, SseError};
use crate::game::Game;
use crate::history::{HistId, Histories, HistoryMode};
use crate::milp::{Backend, Cmp, MilpModel, Outcome, Sense, SolveOptions};
use crate::occupancy::{evaluate_joint_policy, FollowerPolicy, LeaderPolicy, LeaderRule};

/// Normal form of a game over reduced deterministic policies.
#[derive(Debug, Clone)]
pub struct NormalForm {
    pub leaders: Vec<LeaderPolicy>,
    pub followers: Vec<FollowerPolicy>,
    /// `payoff[l][f] = (v_L, v_F)`.
    pub payoff: Vec<Vec<(f64, f64)>>,
}

impl NormalForm {
    pub fn build(g: &Game, cap: u128) -> Result<NormalForm> {
        check_capacity(g, cap)?;
        let hist = Arc::new(Histories::new(HistoryMode::Full));
        let leaders = leader_policies(g, &hist, cap)?;
        let followers = follower_policies(g, &hist, cap)?;
        let payoff = leaders
            .par_iter()
            .map(|l| followers.iter().map(|f| evaluate_joint_policy(g, l, f)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(NormalForm {
            leaders,
            followers,
            payoff,
        })
    }

    /// Behavioural policy equivalent to a mixture over the pure leader policies.
    pub fn behavioural(&self, g: &Game, mixture: &[f64]) -> LeaderPolicy {
        let na = g.n_leader_actions();
        let hist = self.leaders[0].histories.clone();
        let mut rules = Vec::with_capacity(g.horizon);
        for t in 0..g.horizon {
            let mut acc: BTreeMap<HistId, Vec<f64>> = BTreeMap::new();
            for (l, &x) in self.leaders.iter().zip(mixture) {
                for (&h, row) in &l.rules[t].rows {
                    let e = acc.entry(h).or_insert_with(|| vec![0.0; na]);
                    for a in 0..na {
                        e[a] += x * row[a];
                    }
                }
            }
            let rows = acc
                .into_iter()
                .map(|(h, mut row)| {
                    let total: f64 = row.iter().sum();
                    if total > 0.0 {
                        row.iter_mut().for_each(|p| *p /= total);
                    } else {
                        row = vec![1.0 / na as f64; na];
                    }
                    (h, row)
                })
                .collect();
            rules.push(LeaderRule { stage: t, rows });
        }
        LeaderPolicy {
            histories: hist,
            rules,
            markov_only: false,
        }
    }

    fn value(&self, mixture: &[f64], f: usize) -> (f64, f64) {
        mixture.iter().zip(&self.payoff).fold((0.0, 0.0), |acc, (x, row)| {
            (acc.0 + x * row[f].0, acc.1 + x * row[f].1)
        })
    }

    /// Whether `f` is a follower best response to `mixture` within `tol`.
    fn is_best_response(&self, mixture: &[f64], f: usize, tol: f64) -> bool {
        let vf = self.value(mixture, f).1;
        (0..self.followers.len()).all(|o| self.value(mixture, o).1 <= vf + tol)
    }
}

#[derive(Debug, Clone)]
pub struct NfSolution {
    /// Weights over `NormalForm::leaders`.
    pub mixture: Vec<f64>,
    pub leader: LeaderPolicy,
    pub follower: FollowerPolicy,
    pub value: f64,
}

fn read_mixture(values: &[f64], n: usize, offset: usize) -> Vec<f64> {
    let mut x: Vec<f64> = values[offset..offset + n].iter().map(|v| v.max(0.0)).collect();
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|p| *p /= total);
    x
}

/// One LP per follower policy, keeping the best feasible commitment.
pub fn nf_lp_sse(g: &Game, cap: u128, backend: &dyn Backend) -> Result<NfSolution> {
    let nf = NormalForm::build(g, cap)?;
    nf_lp_solve(g, &nf, backend)
}

pub fn nf_lp_solve(g: &Game, nf: &NormalForm, backend: &dyn Backend) -> Result<NfSolution> {
    let (nl, nfo) = (nf.leaders.len(), nf.followers.len());
    let solved: Vec<Result<Option<(Vec<f64>, f64)>>> = (0..nfo)
        .into_par_iter()
        .map(|f| {
            let mut m = MilpModel::new(Sense::Maximize);
            let x: Vec<_> = (0..nl).map(|l| m.add_continuous(format!("x{l}"), 0.0, 1.0)).collect();
            m.add_constraint("simplex", x.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0);
            for o in (0..nfo).filter(|&o| o != f) {
                let terms = (0..nl).map(|l| (x[l], nf.payoff[l][f].1 - nf.payoff[l][o].1)).collect();
                m.add_constraint(format!("br{o}"), terms, Cmp::Ge, 0.0);
            }
            m.set_objective((0..nl).map(|l| (x[l], nf.payoff[l][f].0)).collect(), 0.0);
            match backend.solve(&m, &SolveOptions::default())? {
                Outcome::Optimal(a) => {
                    let mix = read_mixture(&a.values, nl, 0);
                    Ok(Some((mix.clone(), nf.value(&mix, f).0)))
                }
                Outcome::Infeasible => Ok(None),
                Outcome::TimedOut(_) => Err(SseError::Budget("normal-form LP timed out".into())),
            }
        })
        .collect();
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    for (f, r) in solved.into_iter().enumerate() {
        if let Some((mix, v)) = r? {
            if best.as_ref().map_or(true, |b| v > b.1 + 1e-9) {
                best = Some((mix, v, f));
            }
        }
    }
    let (mixture, value, f) = best.ok_or_else(|| SseError::Contract("no follower policy is inducible".into()))?;
    debug_assert!(nf.is_best_response(&mixture, f, 1e-6));
    Ok(NfSolution {
        leader: nf.behavioural(g, &mixture),
        follower: nf.followers[f].clone(),
        mixture,
        value,
    })
}

/// Joint distribution over policy pairs with a binary follower choice.
pub fn nf_milp_sse(g: &Game, cap: u128, backend: &dyn Backend) -> Result<NfSolution> {
    let nf = NormalForm::build(g, cap)?;
    nf_milp_solve(g, &nf, backend)
}

pub fn nf_milp_solve(g: &Game, nf: &NormalForm, backend: &dyn Backend) -> Result<NfSolution> {
    let (nl, nfo) = (nf.leaders.len(), nf.followers.len());
    let span = nf
        .payoff
        .iter()
        .flatten()
        .map(|p| p.1.abs())
        .fold(0.0, f64::max);
    let big_m = 2.0 * span + 1.0;
    let mut m = MilpModel::new(Sense::Maximize);
    let z: Vec<Vec<_>> = (0..nl)
        .map(|l| (0..nfo).map(|f| m.add_continuous(format!("z{l}_{f}"), 0.0, 1.0)).collect())
        .collect();
    let q: Vec<_> = (0..nfo).map(|f| m.add_binary(format!("q{f}"))).collect();
    let a = m.add_continuous("a", -big_m, big_m);
    m.add_constraint("total", z.iter().flatten().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0);
    m.add_constraint("one_follower", q.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0);
    for f in 0..nfo {
        let mut terms: Vec<_> = (0..nl).map(|l| (z[l][f], 1.0)).collect();
        terms.push((q[f], -1.0));
        m.add_constraint(format!("link{f}"), terms, Cmp::Eq, 0.0);
    }
    for o in 0..nfo {
        // a ≥ v_F(x, o), with equality where o is the chosen follower policy.
        let mut lower: Vec<_> = vec![(a, 1.0)];
        for l in 0..nl {
            for f in 0..nfo {
                lower.push((z[l][f], -nf.payoff[l][o].1));
            }
        }
        let mut upper = lower.clone();
        m.add_constraint(format!("dominates{o}"), lower, Cmp::Ge, 0.0);
        upper.push((q[o], big_m));
        m.add_constraint(format!("attained{o}"), upper, Cmp::Le, big_m);
    }
    let objective = (0..nl)
        .flat_map(|l| (0..nfo).map(move |f| (l, f)))
        .map(|(l, f)| (z[l][f], nf.payoff[l][f].0))
        .collect();
    m.set_objective(objective, 0.0);
    let values = match backend.solve(&m, &SolveOptions::default())? {
        Outcome::Optimal(asg) => asg.values,
        Outcome::Infeasible => return Err(SseError::Contract("normal-form MILP infeasible".into())),
        Outcome::TimedOut(_) => return Err(SseError::Budget("normal-form MILP timed out".into())),
    };
    let f = (0..nfo)
        .max_by(|&i, &j| values[q[i].0].total_cmp(&values[q[j].0]).then(j.cmp(&i)))
        .expect("at least one follower policy");
    let mut mixture: Vec<f64> = (0..nl).map(|l| values[z[l][f].0].max(0.0)).collect();
    let total: f64 = mixture.iter().sum();
    mixture.iter_mut().for_each(|p| *p /= total);
    let value = nf.value(&mixture, f).0;
    Ok(NfSolution {
        leader: nf.behavioural(g, &mixture),
        follower: nf.followers[f].clone(),
        mixture,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::enumerate::DEFAULT_CAP;
    use crate::benchmarks::build;
    use crate::milp::HighsBackend;

    #[test]
    fn small_cells_agree() {
        for (name, l, want) in [("centipede", 1, 1.0), ("centipede", 2, 1.0), ("dec-tiger", 2, 40.0), ("match", 1, -1000.0)] {
            let g = build(name, l).unwrap();
            let lp = nf_lp_sse(&g, DEFAULT_CAP, &HighsBackend).unwrap();
            let milp = nf_milp_sse(&g, DEFAULT_CAP, &HighsBackend).unwrap();
            assert!((lp.value - want).abs() < 1e-6, "{name} {l}: lp {}", lp.value);
            assert!((milp.value - want).abs() < 1e-6, "{name} {l}: milp {}", milp.value);
            let (vl, _) = evaluate_joint_policy(&g, &lp.leader, &lp.follower).unwrap();
            assert!((vl - lp.value).abs() < 1e-6);
        }
    }

    #[test]
    fn horizon_three_is_capped() {
        let g = build("centipede", 3).unwrap();
        assert!(matches!(NormalForm::build(&g, DEFAULT_CAP), Err(SseError::Capacity(_))));
    }
}
