//! Credible sets and their transition, filtering, terminal reward and metric.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Result, SseError};
use crate::game::{Game, Player};
use crate::history::Histories;
use crate::occupancy::{l1_distance, marginal_belief, tau_advance, FollowerRule, LeaderRule, OccupancyState};

/// Grid used for belief grouping and value-pair uniqueness.
pub const GRID: f64 = 1e-9;

/// Default bound on follower rules enumerated per member by [`credible_transition`].
pub const DEFAULT_RULE_CAP: u64 = 1 << 16;

/// Occupancy states reachable under one leader decision-rule history.
#[derive(Debug, Clone)]
pub struct CredibleSet {
    pub stage: usize,
    pub members: Vec<OccupancyState>,
    pub leader_rules: Vec<Arc<LeaderRule>>,
}

impl CredibleSet {
    pub fn initial(g: &Game, hist: &Histories) -> Self {
        CredibleSet {
            stage: 0,
            members: vec![OccupancyState::initial(g, hist)],
            leader_rules: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Total order on occupancy states used to canonicalize member lists.
pub fn canonical_cmp(a: &OccupancyState, b: &OccupancyState) -> Ordering {
    let (ea, eb) = (a.entries(), b.entries());
    for (x, y) in ea.iter().zip(eb.iter()) {
        let o = x.0.cmp(&y.0).then(x.1.total_cmp(&y.1));
        if o != Ordering::Equal {
            return o;
        }
    }
    ea.len()
        .cmp(&eb.len())
        .then(a.rho(Player::Leader).total_cmp(&b.rho(Player::Leader)))
        .then(a.rho(Player::Follower).total_cmp(&b.rho(Player::Follower)))
}

fn canonicalize(members: &mut Vec<OccupancyState>) {
    members.sort_by(canonical_cmp);
    members.dedup_by(|a, b| canonical_cmp(a, b) == Ordering::Equal);
}

/// Number of deterministic follower rules over the histories of `o`, saturating.
pub fn follower_rule_count(g: &Game, o: &OccupancyState) -> u64 {
    let n = o.follower_histories().len() as u32;
    (g.n_follower_actions() as u64).checked_pow(n).unwrap_or(u64::MAX)
}

/// The `index`-th follower rule in mixed-radix order over the histories of `o`.
pub fn follower_rule_at(g: &Game, o: &OccupancyState, mut index: u64) -> FollowerRule {
    let k = g.n_follower_actions() as u64;
    let mut rule = FollowerRule::new(o.stage);
    for hf in o.follower_histories() {
        rule.actions.insert(hf, (index % k) as usize);
        index /= k;
    }
    rule
}

/// `T(c, δ_L)`: every member advanced under every follower rule.
pub fn credible_transition(
    g: &Game,
    hist: &Histories,
    c: &CredibleSet,
    dl: &LeaderRule,
    rule_cap: u64,
) -> Result<CredibleSet> {
    let mut members = Vec::new();
    for o in &c.members {
        let count = follower_rule_count(g, o);
        if count > rule_cap {
            return Err(SseError::Capacity(format!(
                "{count} follower rules at stage {} exceed the cap of {rule_cap}; use sampled expansion",
                c.stage
            )));
        }
        for i in 0..count {
            let df = follower_rule_at(g, o, i);
            members.push(tau_advance(g, hist, o, dl, &df)?);
        }
    }
    canonicalize(&mut members);
    let mut leader_rules = c.leader_rules.clone();
    leader_rules.push(Arc::new(dl.clone()));
    Ok(CredibleSet {
        stage: c.stage + 1,
        members,
        leader_rules,
    })
}

fn grid(x: f64) -> i64 {
    (x / GRID).round() as i64
}

/// `𝔽(c)`: per belief class, drop Pareto-dominated members and keep one
/// representative per value pair.
pub fn filter(g: &Game, c: &CredibleSet) -> CredibleSet {
    let mut groups: BTreeMap<Vec<i64>, Vec<&OccupancyState>> = BTreeMap::new();
    for o in &c.members {
        let key = marginal_belief(g, o).into_iter().map(grid).collect();
        groups.entry(key).or_default().push(o);
    }
    let mut members = Vec::new();
    for group in groups.values() {
        let vals: Vec<(i64, i64)> = group
            .iter()
            .map(|o| (grid(o.rho(Player::Leader)), grid(o.rho(Player::Follower))))
            .collect();
        let mut best: BTreeMap<(i64, i64), &OccupancyState> = BTreeMap::new();
        for (i, o) in group.iter().enumerate() {
            let (l, f) = vals[i];
            let dominated = vals
                .iter()
                .any(|&(l2, f2)| l2 >= l && f2 >= f && (l2 > l || f2 > f));
            if dominated {
                continue;
            }
            best.entry((l, f))
                .and_modify(|cur| {
                    if canonical_cmp(o, cur) == Ordering::Less {
                        *cur = o;
                    }
                })
                .or_insert(o);
        }
        members.extend(best.into_values().cloned());
    }
    canonicalize(&mut members);
    CredibleSet {
        stage: c.stage,
        members,
        leader_rules: c.leader_rules.clone(),
    }
}

/// Leader-favourable value among members maximizing `ρ_F`.
pub fn leader_favourable_value(c: &CredibleSet) -> f64 {
    let best_f = c
        .members
        .iter()
        .map(|o| o.rho(Player::Follower))
        .fold(f64::NEG_INFINITY, f64::max);
    c.members
        .iter()
        .filter(|o| o.rho(Player::Follower) >= best_f - GRID)
        .map(|o| o.rho(Player::Leader))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `R(c)`: the leader-favourable value at the horizon, 0 before it.
pub fn terminal_reward(g: &Game, c: &CredibleSet) -> f64 {
    if c.stage != g.horizon {
        return 0.0;
    }
    leader_favourable_value(c)
}

/// Hausdorff distance with the ℓ1 base metric.
pub fn hausdorff_distance(a: &CredibleSet, b: &CredibleSet) -> Result<f64> {
    if a.stage != b.stage {
        return Err(SseError::Domain(format!(
            "Hausdorff distance between stages {} and {}",
            a.stage, b.stage
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(SseError::Domain("Hausdorff distance of an empty set".into()));
    }
    let directed = |x: &CredibleSet, y: &CredibleSet| -> Result<f64> {
        let mut sup = 0.0_f64;
        for o in &x.members {
            let mut inf = f64::INFINITY;
            for p in &y.members {
                inf = inf.min(l1_distance(o, p)?);
            }
            sup = sup.max(inf);
        }
        Ok(sup)
    };
    Ok(directed(a, b)?.max(directed(b, a)?))
}

#[derive(Serialize)]
struct MemberSummary {
    belief: Vec<f64>,
    rho_l: f64,
    rho_f: f64,
    support: usize,
}

/// JSON list of `{belief, rho_l, rho_f, support}` per member.
pub fn dump(g: &Game, c: &CredibleSet) -> String {
    let rows: Vec<MemberSummary> = c
        .members
        .iter()
        .map(|o| MemberSummary {
            belief: marginal_belief(g, o),
            rho_l: o.rho(Player::Leader),
            rho_f: o.rho(Player::Follower),
            support: o.entries().len(),
        })
        .collect();
    serde_json::to_string(&rows).unwrap_or_default()
}
