//! Alpha-vector pairs, vector sets and the value representation built on them.
//!
//! A [`VectorSet`] holds one pair of linear functionals per conditional
//! occupancy state of the credible set it was built for. Functionals are dense
//! over that set's `(state, leader history)` domain; points outside the domain
//! are evaluated at the nearest in-domain history observing the same state.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::Mutex;
use serde_json::json;

use crate::credible::{hausdorff_distance, CredibleSet};
use crate::error::{Result, SseError};
use crate::game::{Game, Player};
use crate::history::{HistId, Histories, HistoryMode, HistoryTable};
use crate::occupancy::{condition_on_follower, LeaderRule, OccupancyState, Point};

/// Tolerance for value ties.
pub const TIE: f64 = 1e-9;

/// Where a pair came from: the follower action it prescribes and the pair it
/// continues with in the next stage's set, per observed next state.
#[derive(Debug, Clone, PartialEq)]
pub struct Backpointer {
    pub action: usize,
    pub successors: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPair {
    pub leader: Vec<f64>,
    pub follower: Vec<f64>,
    pub back: Option<Backpointer>,
}

impl AlphaPair {
    pub fn coefficients(&self, player: Player) -> &[f64] {
        match player {
            Player::Leader => &self.leader,
            Player::Follower => &self.follower,
        }
    }
}

/// The pair chosen at a conditional and its two values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub leader: f64,
    pub follower: f64,
}

#[derive(Debug)]
pub struct VectorSet {
    pub id: usize,
    pub stage: usize,
    /// Credible-set id this set was built for.
    pub origin: Option<usize>,
    pub rule: Option<Arc<LeaderRule>>,
    pub pairs: Vec<AlphaPair>,
    pub next: Option<Arc<VectorSet>>,
    domain: Vec<Point>,
    /// Domain histories come from a Markov table: points are matched by state.
    markov: bool,
    by_state: HashMap<u32, Vec<usize>>,
    fallback: Mutex<HashMap<Point, Option<usize>>>,
}

impl VectorSet {
    /// The terminal set: a single zero pair that evaluates to 0 everywhere.
    pub fn zero(id: usize, stage: usize) -> Self {
        VectorSet::from_parts(
            id,
            stage,
            None,
            None,
            Vec::new(),
            vec![AlphaPair {
                leader: Vec::new(),
                follower: Vec::new(),
                back: None,
            }],
            None,
        )
    }

    fn from_parts(
        id: usize,
        stage: usize,
        origin: Option<usize>,
        rule: Option<Arc<LeaderRule>>,
        domain: Vec<Point>,
        pairs: Vec<AlphaPair>,
        next: Option<Arc<VectorSet>>,
    ) -> Self {
        let mut by_state: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, x) in domain.iter().enumerate() {
            by_state.entry(x.state).or_default().push(i);
        }
        VectorSet {
            id,
            stage,
            origin,
            rule,
            pairs,
            next,
            domain,
            markov: false,
            by_state,
            fallback: Mutex::new(HashMap::new()),
        }
    }

    pub fn domain(&self) -> &[Point] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn is_markov(&self) -> bool {
        self.markov
    }

    /// Index of the domain point used to evaluate `x`.
    pub fn locate(&self, leader: &HistoryTable, x: Point) -> Option<usize> {
        if self.domain.is_empty() {
            return None;
        }
        if self.markov {
            return self.by_state.get(&x.state).map(|v| v[0]);
        }
        if let Ok(i) = self.domain.binary_search(&x) {
            return Some(i);
        }
        if let Some(hit) = self.fallback.lock().get(&x) {
            return *hit;
        }
        let found = self.nearest(leader, x);
        if found.is_none() {
            log::warn!(
                "vector set {} has no history observing state {}; extending by 0",
                self.id,
                x.state
            );
        }
        self.fallback.lock().insert(x, found);
        found
    }

    fn nearest(&self, leader: &HistoryTable, x: Point) -> Option<usize> {
        let candidates = self.by_state.get(&x.state)?;
        let (xs, xa) = leader.path(x.hl);
        let mut best: Option<((usize, usize, usize), usize)> = None;
        for &i in candidates {
            let (ys, ya) = leader.path(self.domain[i].hl);
            let key = (mismatches(&xs, &ys), mismatches(&xa, &ya), i);
            if best.map_or(true, |(k, _)| key < k) {
                best = Some((key, i));
            }
        }
        best.map(|(_, i)| i)
    }

    /// Domain indices for a support, resolved once for repeated evaluation.
    pub fn resolve(&self, leader: &HistoryTable, support: &[(Point, f64)]) -> Vec<(Option<usize>, f64)> {
        support.iter().map(|&(x, p)| (self.locate(leader, x), p)).collect()
    }

    /// `(α_L, α_F)` of pair `k` at a resolved support.
    pub fn pair_values(&self, k: usize, resolved: &[(Option<usize>, f64)]) -> (f64, f64) {
        let pair = &self.pairs[k];
        let mut out = (0.0, 0.0);
        for &(i, p) in resolved {
            if let Some(i) = i {
                out.0 += p * pair.leader[i];
                out.1 += p * pair.follower[i];
            }
        }
        out
    }

    /// Follower-maximizing pair at a support, ties broken for the leader and
    /// then by lowest index.
    pub fn select(&self, leader: &HistoryTable, support: &[(Point, f64)]) -> Result<Selection> {
        let resolved = self.resolve(leader, support);
        self.select_resolved(&resolved)
    }

    pub fn select_resolved(&self, resolved: &[(Option<usize>, f64)]) -> Result<Selection> {
        if self.pairs.is_empty() {
            return Err(SseError::Domain(format!("vector set {} is empty", self.id)));
        }
        let values: Vec<(f64, f64)> = (0..self.pairs.len())
            .map(|k| self.pair_values(k, resolved))
            .collect();
        Ok(pick(&values))
    }

    /// `Γ̄(o_hF)`: every pair within [`TIE`] of the best follower value.
    pub fn filtered_argmax(&self, leader: &HistoryTable, support: &[(Point, f64)]) -> Result<Vec<usize>> {
        if self.pairs.is_empty() {
            return Err(SseError::Domain(format!("vector set {} is empty", self.id)));
        }
        let resolved = self.resolve(leader, support);
        let vf: Vec<f64> = (0..self.pairs.len())
            .map(|k| self.pair_values(k, &resolved).1)
            .collect();
        let best = vf.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok((0..vf.len()).filter(|&k| vf[k] >= best - TIE).collect())
    }
}

fn mismatches(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b.iter()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len())
}

/// Follower-best entry of `(leader, follower)` values, leader-best among ties,
/// then lowest index.
pub fn pick(values: &[(f64, f64)]) -> Selection {
    let best_f = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let mut sel: Option<Selection> = None;
    for (k, &(l, f)) in values.iter().enumerate() {
        if f < best_f - TIE {
            continue;
        }
        if sel.map_or(true, |s| l > s.leader + TIE) {
            sel = Some(Selection {
                index: k,
                leader: l,
                follower: f,
            });
        }
    }
    sel.expect("non-empty values")
}

/// `(v_L^Γ(o), v_F^Γ(o))`.
pub fn evaluate_vectorset(g: &Game, hist: &Histories, gamma: &VectorSet, o: &OccupancyState) -> Result<(f64, f64)> {
    if gamma.stage != o.stage {
        return Err(SseError::Domain(format!(
            "vector set at stage {} evaluated at stage {}",
            gamma.stage, o.stage
        )));
    }
    let disc = g.discount_at(o.stage);
    let (mut vl, mut vf) = o.rho_pair();
    for oc in condition_on_follower(o) {
        let s = gamma.select(&hist.leader, &oc.support)?;
        vl += disc * oc.weight * s.leader;
        vf += disc * oc.weight * s.follower;
    }
    Ok((vl, vf))
}

/// `v_i^Γ(o)` for one player.
pub fn vectorset_value(g: &Game, hist: &Histories, gamma: &VectorSet, o: &OccupancyState, player: Player) -> Result<f64> {
    let (l, f) = evaluate_vectorset(g, hist, gamma, o)?;
    Ok(match player {
        Player::Leader => l,
        Player::Follower => f,
    })
}

/// Value of a credible set under a collection and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderValue {
    pub value: f64,
    /// Index into the collection.
    pub set: usize,
    /// Index into the credible set's members.
    pub member: usize,
}

/// Value of `c` under one vector set: the leader-best member among those the
/// follower prefers.
pub fn set_value(g: &Game, hist: &Histories, gamma: &VectorSet, c: &CredibleSet) -> Result<(f64, usize)> {
    if c.is_empty() {
        return Err(SseError::Domain("empty credible set".into()));
    }
    let values = c
        .members
        .iter()
        .map(|o| evaluate_vectorset(g, hist, gamma, o))
        .collect::<Result<Vec<_>>>()?;
    let s = pick(&values);
    Ok((s.leader, s.index))
}

/// `v*_L(c) = max_Γ max{v_L^Γ(o) | o ∈ argmax v_F^Γ}`; the lowest-index set
/// within [`TIE`] of the maximum wins.
pub fn leader_value(g: &Game, hist: &Histories, lambda: &[Arc<VectorSet>], c: &CredibleSet) -> Result<LeaderValue> {
    if lambda.is_empty() {
        return Err(SseError::Domain("empty vector-set collection".into()));
    }
    let mut scored = Vec::with_capacity(lambda.len());
    for gamma in lambda {
        scored.push(set_value(g, hist, gamma, c)?);
    }
    let best = scored.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let set = scored.iter().position(|s| s.0 >= best - TIE).unwrap_or(0);
    Ok(LeaderValue {
        value: scored[set].0,
        set,
        member: scored[set].1,
    })
}

/// Stored value of the nearest samples under `d_H`, the minimum among ties.
pub fn nearest_neighbour_value(values: &[f64], samples: &[CredibleSet], c: &CredibleSet) -> Result<f64> {
    if samples.is_empty() || samples.len() != values.len() {
        return Err(SseError::Domain("nearest-neighbour lookup needs one value per sample".into()));
    }
    let d = samples
        .iter()
        .map(|s| hausdorff_distance(s, c))
        .collect::<Result<Vec<_>>>()?;
    let best = d.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(d.iter()
        .zip(values)
        .filter(|(x, _)| **x <= best + TIE)
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min))
}

/// A conditional occupancy state shared by one or more follower histories.
#[derive(Debug, Clone)]
pub struct Conditional {
    pub support: Vec<(Point, f64)>,
    pub follower_histories: Vec<HistId>,
}

/// The distinct conditionals of a credible set and how members weight them.
///
/// Conditionals with the same support are merged regardless of follower
/// history, so one follower choice is made per distinct conditional.
#[derive(Debug, Clone)]
pub struct ConditionalTable {
    pub stage: usize,
    pub conds: Vec<Conditional>,
    /// Per member: `(conditional index, Pr(hF | o))`.
    pub members: Vec<Vec<(usize, f64)>>,
    pub rho: Vec<(f64, f64)>,
    pub domain: Vec<Point>,
    pub leader_histories: Vec<HistId>,
}

fn support_key(support: &[(Point, f64)]) -> Vec<(Point, i64)> {
    support.iter().map(|&(x, p)| (x, (p / TIE).round() as i64)).collect()
}

impl ConditionalTable {
    pub fn new(c: &CredibleSet) -> Self {
        let mut conds: Vec<Conditional> = Vec::new();
        let mut index: HashMap<Vec<(Point, i64)>, usize> = HashMap::new();
        let mut members = Vec::with_capacity(c.len());
        let mut domain = Vec::new();
        for o in &c.members {
            let mut row = Vec::new();
            for oc in condition_on_follower(o) {
                let k = *index.entry(support_key(&oc.support)).or_insert_with(|| {
                    domain.extend(oc.support.iter().map(|e| e.0));
                    conds.push(Conditional {
                        support: oc.support.clone(),
                        follower_histories: Vec::new(),
                    });
                    conds.len() - 1
                });
                conds[k].follower_histories.push(oc.hf);
                row.push((k, oc.weight));
            }
            members.push(row);
        }
        domain.sort_unstable();
        domain.dedup();
        let mut leader_histories: Vec<HistId> = domain.iter().map(|x| x.hl).collect();
        leader_histories.sort_unstable();
        leader_histories.dedup();
        ConditionalTable {
            stage: c.stage,
            conds,
            members,
            rho: c.members.iter().map(|o| o.rho_pair()).collect(),
            domain,
            leader_histories,
        }
    }

    /// Values of every member given one `(leader, follower)` value per conditional.
    pub fn member_values(&self, g: &Game, per_cond: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let disc = g.discount_at(self.stage);
        self.members
            .iter()
            .zip(&self.rho)
            .map(|(row, &(rl, rf))| {
                row.iter().fold((rl, rf), |acc, &(k, w)| {
                    (acc.0 + disc * w * per_cond[k].0, acc.1 + disc * w * per_cond[k].1)
                })
            })
            .collect()
    }
}

/// Follower-best pair of `next` on the uniform conditional over its domain
/// points observing `state`; pair 0 when none does.
fn default_successor(next: &VectorSet, state: usize) -> usize {
    let Some(idx) = next.by_state.get(&(state as u32)) else {
        return 0;
    };
    let p = 1.0 / idx.len() as f64;
    let resolved: Vec<(Option<usize>, f64)> = idx.iter().map(|&i| (Some(i), p)).collect();
    next.select_resolved(&resolved).map(|s| s.index).unwrap_or(0)
}

/// Materializes the vector set for a backup solution.
///
/// `kappa[k]` is the follower action at conditional `k` and `w[k][s']` the
/// pair of `next` it continues with after observing `s'`. Missing `w` entries
/// for next states the conditional cannot reach are filled with a default.
#[allow(clippy::too_many_arguments)]
pub fn build_vector_set(
    g: &Game,
    hist: &Histories,
    id: usize,
    origin: Option<usize>,
    table: &ConditionalTable,
    rule: Arc<LeaderRule>,
    kappa: &[usize],
    w: &[Vec<Option<usize>>],
    next: Arc<VectorSet>,
) -> Result<VectorSet> {
    let (ns, nl, nf) = (g.n_states(), g.n_leader_actions(), g.n_follower_actions());
    if kappa.len() != table.conds.len() || w.len() != table.conds.len() {
        return Err(SseError::Contract(format!(
            "selection covers {} / {} conditionals, expected {}",
            kappa.len(),
            w.len(),
            table.conds.len()
        )));
    }
    if let Some(&a) = kappa.iter().find(|&&a| a >= nf) {
        return Err(SseError::Contract(format!("follower action {a} out of range")));
    }
    for row in w {
        if row.len() != ns {
            return Err(SseError::Contract("successor selection is not one per state".into()));
        }
        if let Some(j) = row.iter().flatten().find(|&&j| j >= next.pairs.len()) {
            return Err(SseError::Contract(format!(
                "successor pair {j} does not exist in vector set {}",
                next.id
            )));
        }
    }
    for &h in &table.leader_histories {
        let row = rule.row(h).map_err(|_| {
            SseError::Contract(format!("leader rule misses history {}", hist.leader.label(h)))
        })?;
        if row.len() != nl {
            return Err(SseError::Contract(format!("leader row for {h} has wrong length")));
        }
    }

    // Successor lookup per (domain point, leader action, next state).
    let mut succ: HashMap<(usize, usize, usize), Option<usize>> = HashMap::new();
    let mut successor = |d: usize, al: usize, s2: usize| -> Option<usize> {
        *succ.entry((d, al, s2)).or_insert_with(|| {
            let x = table.domain[d];
            next.locate(
                &hist.leader,
                Point {
                    state: s2 as u32,
                    hl: hist.leader.extend(x.hl, al, s2),
                },
            )
        })
    };

    let gamma = g.gamma;
    let mut pairs: Vec<AlphaPair> = Vec::new();
    for (k, &af) in kappa.iter().enumerate() {
        let mut succ_pairs = w[k].clone();
        let mut leader = vec![0.0; table.domain.len()];
        let mut follower = vec![0.0; table.domain.len()];
        for (d, x) in table.domain.iter().enumerate() {
            let s = x.state as usize;
            let row = rule.row(x.hl)?;
            for (al, &q) in row.iter().enumerate() {
                if q <= 0.0 {
                    continue;
                }
                for &(s2, p) in g.successors(s, al, af) {
                    let j = *succ_pairs[s2].get_or_insert_with(|| default_successor(&next, s2));
                    let (mut cl, mut cf) = (
                        g.reward(Player::Leader, s, al, af, s2),
                        g.reward(Player::Follower, s, al, af, s2),
                    );
                    if let Some(i) = successor(d, al, s2) {
                        cl += gamma * next.pairs[j].leader[i];
                        cf += gamma * next.pairs[j].follower[i];
                    }
                    leader[d] += q * p * cl;
                    follower[d] += q * p * cf;
                }
            }
        }
        let pair = AlphaPair {
            leader,
            follower,
            back: Some(Backpointer {
                action: af,
                successors: succ_pairs,
            }),
        };
        let duplicate = pairs.iter().any(|p| {
            p.leader.iter().zip(&pair.leader).all(|(a, b)| (a - b).abs() <= TIE)
                && p.follower.iter().zip(&pair.follower).all(|(a, b)| (a - b).abs() <= TIE)
        });
        if !duplicate {
            pairs.push(pair);
        }
    }
    let mut set = VectorSet::from_parts(id, table.stage, origin, Some(rule), table.domain.clone(), pairs, Some(next));
    set.markov = hist.leader.mode() == HistoryMode::Markov;
    Ok(set)
}

/// Structured export of per-stage collections with coefficients and backpointers.
pub fn export(hist: &Histories, lambda: &[Vec<Arc<VectorSet>>]) -> serde_json::Value {
    let stages: Vec<serde_json::Value> = lambda
        .iter()
        .enumerate()
        .map(|(t, sets)| {
            let sets: Vec<serde_json::Value> = sets
                .iter()
                .map(|v| {
                    let domain: Vec<String> = v
                        .domain
                        .iter()
                        .map(|x| {
                            if v.markov {
                                format!("{}|t{}", x.state, v.stage)
                            } else {
                                format!("{}|{}", x.state, hist.leader.label(x.hl))
                            }
                        })
                        .collect();
                    let pairs: Vec<serde_json::Value> = v
                        .pairs
                        .iter()
                        .map(|p| {
                            json!({
                                "leader": p.leader,
                                "follower": p.follower,
                                "action": p.back.as_ref().map(|b| b.action),
                                "successors": p.back.as_ref().map(|b| b.successors.clone()),
                            })
                        })
                        .collect();
                    json!({
                        "id": v.id,
                        "origin": v.origin,
                        "next": v.next.as_ref().map(|n| n.id),
                        "domain": domain,
                        "pairs": pairs,
                    })
                })
                .collect();
            json!({ "stage": t, "sets": sets })
        })
        .collect();
    json!({ "stages": stages })
}
