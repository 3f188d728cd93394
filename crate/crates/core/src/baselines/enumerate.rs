use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SseError};
use crate::game::{Game, Player};
use crate::history::{HistId, Histories, HistoryTable};
use crate::occupancy::{FollowerPolicy, FollowerRule, LeaderPolicy, LeaderRule};

/// Default cap on enumerated deterministic policies per player.
pub const DEFAULT_CAP: u128 = 1 << 20;

/// `base^exponent` deterministic policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyCount {
    pub base: u64,
    /// Saturates at `u128::MAX`.
    pub exponent: u128,
}

impl PolicyCount {
    /// The count as an integer, if it fits.
    pub fn value(&self) -> Option<u128> {
        let e = u32::try_from(self.exponent).ok()?;
        (self.base as u128).checked_pow(e)
    }

    pub fn fits(&self, cap: u128) -> bool {
        self.value().is_some_and(|v| v <= cap)
    }

    pub fn log2(&self) -> f64 {
        self.exponent as f64 * (self.base as f64).log2()
    }
}

impl fmt::Display for PolicyCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.base, self.exponent)
    }
}

/// `|A_i|^{Σ_{t<ℓ} |A_i × S|^t}`.
pub fn policy_count(g: &Game, owner: Player, horizon: usize) -> PolicyCount {
    let a = g.n_actions(owner) as u128;
    let step = a * g.n_states() as u128;
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for _ in 0..horizon {
        total = total.saturating_add(term);
        term = term.saturating_mul(step);
    }
    PolicyCount {
        base: a as u64,
        exponent: total,
    }
}

/// Fails with a capacity error unless both players' counts fit the cap.
pub fn check_capacity(g: &Game, cap: u128) -> Result<()> {
    for owner in [Player::Leader, Player::Follower] {
        let c = policy_count(g, owner, g.horizon);
        if !c.fits(cap) {
            return Err(SseError::Capacity(format!(
                "{owner:?} has {c} deterministic policies at horizon {}, above the cap of {cap}",
                g.horizon
            )));
        }
    }
    Ok(())
}

type Plan = Vec<BTreeMap<HistId, usize>>;

/// Deterministic policies restricted to the owner's histories reachable under
/// its own choices and any opponent action.
fn reduced_plans(g: &Game, table: &HistoryTable, owner: Player, cap: u128) -> Result<Vec<Plan>> {
    let na = g.n_actions(owner);
    let other = match owner {
        Player::Leader => g.n_follower_actions(),
        Player::Follower => g.n_leader_actions(),
    };
    let successors = |s: usize, a: usize| -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for b in 0..other {
            let (al, af) = match owner {
                Player::Leader => (a, b),
                Player::Follower => (b, a),
            };
            out.extend(g.successors(s, al, af).iter().map(|x| x.0));
        }
        out
    };
    let mut partial: Vec<(Plan, Vec<HistId>)> = vec![(Vec::new(), vec![table.root(g.initial_state)])];
    for _ in 0..g.horizon {
        let mut next = Vec::new();
        for (plan, frontier) in partial {
            let combos = (na as u128).saturating_pow(frontier.len() as u32);
            if (next.len() as u128).saturating_add(combos) > cap {
                return Err(SseError::Capacity(format!("more than {cap} reduced {owner:?} policies")));
            }
            for mut code in 0..combos {
                let mut rule = BTreeMap::new();
                let mut reach = BTreeSet::new();
                for &h in &frontier {
                    let a = (code % na as u128) as usize;
                    code /= na as u128;
                    rule.insert(h, a);
                    for s2 in successors(table.state(h), a) {
                        reach.insert(table.extend(h, a, s2));
                    }
                }
                let mut p = plan.clone();
                p.push(rule);
                next.push((p, reach.into_iter().collect()));
            }
        }
        partial = next;
    }
    Ok(partial.into_iter().map(|p| p.0).collect())
}

/// Pure leader policies on reachable histories, in a stable order.
pub fn leader_policies(g: &Game, hist: &Arc<Histories>, cap: u128) -> Result<Vec<LeaderPolicy>> {
    let na = g.n_leader_actions();
    Ok(reduced_plans(g, &hist.leader, Player::Leader, cap)?
        .into_iter()
        .map(|plan| LeaderPolicy {
            histories: hist.clone(),
            rules: plan
                .into_iter()
                .enumerate()
                .map(|(t, m)| LeaderRule {
                    stage: t,
                    rows: m
                        .into_iter()
                        .map(|(h, a)| {
                            let mut row = vec![0.0; na];
                            row[a] = 1.0;
                            (h, row)
                        })
                        .collect(),
                })
                .collect(),
            markov_only: false,
        })
        .collect())
}

/// Deterministic follower policies on reachable histories, in a stable order.
pub fn follower_policies(g: &Game, hist: &Arc<Histories>, cap: u128) -> Result<Vec<FollowerPolicy>> {
    Ok(reduced_plans(g, &hist.follower, Player::Follower, cap)?
        .into_iter()
        .map(|plan| FollowerPolicy {
            histories: hist.clone(),
            rules: plan
                .into_iter()
                .enumerate()
                .map(|(t, m)| FollowerRule { stage: t, actions: m })
                .collect(),
        })
        .collect())
}

/// The reported count and, when it fits the cap, every reduced policy.
pub fn enumerate_deterministic_policies(
    g: &Game,
    owner: Player,
    hist: &Arc<Histories>,
    cap: u128,
) -> Result<(PolicyCount, usize)> {
    let count = policy_count(g, owner, g.horizon);
    if !count.fits(cap) {
        return Err(SseError::Capacity(format!("{count} policies exceed the cap of {cap}")));
    }
    let n = match owner {
        Player::Leader => leader_policies(g, hist, cap)?.len(),
        Player::Follower => follower_policies(g, hist, cap)?.len(),
    };
    Ok((count, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{build, build_dec_tiger};
    use crate::history::HistoryMode;

    #[test]
    fn closed_form_counts() {
        let tiger = build_dec_tiger();
        assert_eq!(policy_count(&tiger, Player::Leader, 3).to_string(), "2^21");
        assert_eq!(policy_count(&tiger, Player::Follower, 1).value(), Some(2));
        let mabc = build("mabc", 3).unwrap();
        assert_eq!(policy_count(&mabc, Player::Leader, 3).exponent, 73);
        let huge = policy_count(&mabc, Player::Leader, 40);
        assert!(!huge.fits(DEFAULT_CAP));
    }

    #[test]
    fn horizon_one_has_one_policy_per_action() {
        for name in crate::benchmarks::NAMES {
            let g = build(name, 1).unwrap();
            let hist = Arc::new(Histories::new(HistoryMode::Full));
            assert_eq!(leader_policies(&g, &hist, DEFAULT_CAP).unwrap().len(), g.n_leader_actions());
            assert_eq!(follower_policies(&g, &hist, DEFAULT_CAP).unwrap().len(), g.n_follower_actions());
        }
    }

    #[test]
    fn reduced_enumeration_counts() {
        // Dec-Tiger at horizon 2: one root choice, then one choice at each of
        // the two histories it reaches.
        let g = build_dec_tiger().with_horizon(2);
        let hist = Arc::new(Histories::new(HistoryMode::Full));
        let n = leader_policies(&g, &hist, DEFAULT_CAP).unwrap().len() as u128;
        assert_eq!(n, 2 * 2 * 2);
        assert!(n <= policy_count(&g, Player::Leader, 2).value().unwrap());
        assert!(matches!(leader_policies(&g, &hist, 4), Err(SseError::Capacity(_))));
    }
}
