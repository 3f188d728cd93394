//! Occupancy states, decision rules, and exact policy evaluation.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Result, SseError};
use crate::game::{Game, Player};
use crate::history::{HistId, Histories};

/// Masses below this are dropped after a transition.
pub const DUST: f64 = 1e-12;

/// Support key of an occupancy state, ordered by follower history first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub hf: HistId,
    pub state: u32,
    pub hl: HistId,
}

/// Support key of a conditional occupancy state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub state: u32,
    pub hl: HistId,
}

/// A stochastic leader decision rule for one stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LeaderRule {
    pub stage: usize,
    pub rows: BTreeMap<HistId, Vec<f64>>,
}

impl LeaderRule {
    pub fn new(stage: usize) -> Self {
        LeaderRule {
            stage,
            rows: BTreeMap::new(),
        }
    }

    pub fn row(&self, hl: HistId) -> Result<&[f64]> {
        self.rows
            .get(&hl)
            .map(|r| r.as_slice())
            .ok_or_else(|| SseError::Domain(format!("leader rule has no row for history {hl}")))
    }
}

/// A deterministic follower decision rule for one stage.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FollowerRule {
    pub stage: usize,
    pub actions: BTreeMap<HistId, usize>,
}

impl FollowerRule {
    pub fn new(stage: usize) -> Self {
        FollowerRule {
            stage,
            actions: BTreeMap::new(),
        }
    }

    pub fn action(&self, hf: HistId) -> Result<usize> {
        self.actions
            .get(&hf)
            .copied()
            .ok_or_else(|| SseError::Domain(format!("follower rule has no action for history {hf}")))
    }
}

/// A leader policy over histories interned in `histories`.
#[derive(Debug, Clone)]
pub struct LeaderPolicy {
    pub histories: Arc<Histories>,
    pub rules: Vec<LeaderRule>,
    pub markov_only: bool,
}

impl LeaderPolicy {
    /// Builds rules over every leader history reachable when the leader follows
    /// `f` and the follower may do anything.
    pub fn materialize(
        g: &Game,
        histories: Arc<Histories>,
        markov_only: bool,
        mut f: impl FnMut(usize, HistId) -> Result<Vec<f64>>,
    ) -> Result<LeaderPolicy> {
        let mut rules = Vec::with_capacity(g.horizon);
        let mut frontier = vec![histories.leader.root(g.initial_state)];
        for t in 0..g.horizon {
            let mut rule = LeaderRule::new(t);
            let mut next = std::collections::BTreeSet::new();
            for &h in &frontier {
                let row = f(t, h)?;
                let s = histories.leader.state(h);
                for (al, &q) in row.iter().enumerate() {
                    if q <= 0.0 {
                        continue;
                    }
                    for af in 0..g.n_follower_actions() {
                        for &(s2, _) in g.successors(s, al, af) {
                            next.insert(histories.leader.extend(h, al, s2));
                        }
                    }
                }
                rule.rows.insert(h, row);
            }
            rules.push(rule);
            frontier = next.into_iter().collect();
        }
        Ok(LeaderPolicy {
            histories,
            rules,
            markov_only,
        })
    }

    /// Rows keyed by history paths, loadable with [`LeaderPolicy::from_json`].
    pub fn to_json(&self) -> serde_json::Value {
        let stages: Vec<serde_json::Value> = self
            .rules
            .iter()
            .map(|r| {
                let rows: Vec<serde_json::Value> = r
                    .rows
                    .iter()
                    .map(|(&h, row)| {
                        let (states, actions) = self.histories.leader.path(h);
                        serde_json::json!({ "states": states, "actions": actions, "row": row })
                    })
                    .collect();
                serde_json::Value::Array(rows)
            })
            .collect();
        serde_json::json!({ "markov_only": self.markov_only, "stages": stages })
    }

    /// Rebuilds a policy over fresh full-history tables.
    pub fn from_json(v: &serde_json::Value) -> Result<LeaderPolicy> {
        #[derive(serde::Deserialize)]
        struct Row {
            states: Vec<usize>,
            actions: Vec<usize>,
            row: Vec<f64>,
        }
        #[derive(serde::Deserialize)]
        struct File {
            markov_only: bool,
            stages: Vec<Vec<Row>>,
        }
        let file: File = serde_json::from_value(v.clone())?;
        let histories = Arc::new(Histories::new(crate::history::HistoryMode::Full));
        let mut rules = Vec::with_capacity(file.stages.len());
        for (t, rows) in file.stages.into_iter().enumerate() {
            let mut rule = LeaderRule::new(t);
            for r in rows {
                if r.states.len() != t + 1 || r.actions.len() != t {
                    return Err(SseError::Domain(format!("malformed stage-{t} history in policy file")));
                }
                let mut h = histories.leader.root(r.states[0]);
                for (a, &s) in r.actions.iter().zip(&r.states[1..]) {
                    h = histories.leader.extend(h, *a, s);
                }
                rule.rows.insert(h, r.row);
            }
            rules.push(rule);
        }
        Ok(LeaderPolicy {
            histories,
            rules,
            markov_only: file.markov_only,
        })
    }

    /// A stage-dependent Markov policy given as `dist[t][s]`.
    pub fn markov(g: &Game, histories: Arc<Histories>, dist: &[Vec<Vec<f64>>]) -> Result<LeaderPolicy> {
        let table = histories.clone();
        LeaderPolicy::materialize(g, histories, true, |t, h| Ok(dist[t][table.leader.state(h)].clone()))
    }
}

/// A deterministic follower policy over histories interned in `histories`.
#[derive(Debug, Clone)]
pub struct FollowerPolicy {
    pub histories: Arc<Histories>,
    pub rules: Vec<FollowerRule>,
}

/// Distribution over `(state, leader history, follower history)` at one stage,
/// with cached values-so-far.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyState {
    pub stage: usize,
    entries: Vec<(Triple, f64)>,
    rho: [f64; 2],
}

fn slot(player: Player) -> usize {
    match player {
        Player::Leader => 0,
        Player::Follower => 1,
    }
}

impl OccupancyState {
    /// Point mass on the initial state with empty histories.
    pub fn initial(g: &Game, hist: &Histories) -> Self {
        let t = Triple {
            hf: hist.follower.root(g.initial_state),
            state: g.initial_state as u32,
            hl: hist.leader.root(g.initial_state),
        };
        OccupancyState {
            stage: 0,
            entries: vec![(t, 1.0)],
            rho: [0.0, 0.0],
        }
    }

    /// Builds a state from raw masses: drops dust, renormalizes, sorts.
    pub fn from_masses(stage: usize, masses: impl IntoIterator<Item = (Triple, f64)>, rho: [f64; 2]) -> Self {
        let mut merged: HashMap<Triple, f64> = HashMap::new();
        for (k, p) in masses {
            *merged.entry(k).or_insert(0.0) += p;
        }
        let mut entries: Vec<(Triple, f64)> = merged.into_iter().filter(|e| e.1 >= DUST).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if total > 0.0 && total != 1.0 {
            entries.iter_mut().for_each(|e| e.1 /= total);
        }
        OccupancyState { stage, entries, rho }
    }

    pub fn entries(&self) -> &[(Triple, f64)] {
        &self.entries
    }

    pub fn rho(&self, player: Player) -> f64 {
        self.rho[slot(player)]
    }

    pub fn rho_pair(&self) -> (f64, f64) {
        (self.rho[0], self.rho[1])
    }

    pub fn mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Distinct leader histories in the support, sorted.
    pub fn leader_histories(&self) -> Vec<HistId> {
        let mut v: Vec<HistId> = self.entries.iter().map(|e| e.0.hl).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Distinct follower histories in the support, sorted.
    pub fn follower_histories(&self) -> Vec<HistId> {
        let mut v: Vec<HistId> = self.entries.iter().map(|e| e.0.hf).collect();
        v.dedup();
        v
    }

    /// Debug dump keyed by `s|hL|hF`.
    pub fn dump(&self, hist: &Histories) -> String {
        let mut out = String::new();
        for (t, p) in &self.entries {
            let _ = writeln!(
                out,
                "{}|{}|{} = {p}",
                t.state,
                hist.leader.label(t.hl),
                hist.follower.label(t.hf)
            );
        }
        out
    }
}

/// Value-so-far `ρ_i(o)`.
pub fn value_so_far(o: &OccupancyState, player: Player) -> f64 {
    o.rho(player)
}

/// `τ(o, δ_L, δ_F)`.
pub fn tau_advance(
    g: &Game,
    hist: &Histories,
    o: &OccupancyState,
    dl: &LeaderRule,
    df: &FollowerRule,
) -> Result<OccupancyState> {
    let t = o.stage;
    let disc = g.discount_at(t);
    let mut masses: HashMap<Triple, f64> = HashMap::new();
    let mut rho = o.rho;
    for &(tr, p) in &o.entries {
        let row = dl.row(tr.hl).map_err(|_| {
            SseError::Domain(format!(
                "leader rule misses history {}",
                hist.leader.label(tr.hl)
            ))
        })?;
        let af = df.action(tr.hf).map_err(|_| {
            SseError::Domain(format!(
                "follower rule misses history {}",
                hist.follower.label(tr.hf)
            ))
        })?;
        let s = tr.state as usize;
        let hf_base = tr.hf;
        for (al, &q) in row.iter().enumerate() {
            if q <= 0.0 {
                continue;
            }
            for &(s2, pp) in g.successors(s, al, af) {
                let m = p * q * pp;
                rho[0] += disc * m * g.reward(Player::Leader, s, al, af, s2);
                rho[1] += disc * m * g.reward(Player::Follower, s, al, af, s2);
                let key = Triple {
                    hf: hist.follower.extend(hf_base, af, s2),
                    state: s2 as u32,
                    hl: hist.leader.extend(tr.hl, al, s2),
                };
                *masses.entry(key).or_insert(0.0) += m;
            }
        }
    }
    Ok(OccupancyState::from_masses(t + 1, masses, rho))
}

/// `b(s) = Σ o(s, ·, ·)`.
pub fn marginal_belief(g: &Game, o: &OccupancyState) -> Vec<f64> {
    let mut b = vec![0.0; g.n_states()];
    for (t, p) in &o.entries {
        b[t.state as usize] += p;
    }
    b
}

/// An occupancy state conditioned on one follower history.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalOccupancy {
    pub hf: HistId,
    pub weight: f64,
    pub support: Vec<(Point, f64)>,
}

impl ConditionalOccupancy {
    /// Dot product with a coefficient lookup.
    pub fn dot(&self, mut f: impl FnMut(Point) -> f64) -> f64 {
        self.support.iter().map(|&(x, p)| p * f(x)).sum()
    }
}

/// `ℂ_F(o)`: one conditional per follower history with positive mass.
pub fn condition_on_follower(o: &OccupancyState) -> Vec<ConditionalOccupancy> {
    let mut out: Vec<ConditionalOccupancy> = Vec::new();
    for &(t, p) in &o.entries {
        let point = Point {
            state: t.state,
            hl: t.hl,
        };
        match out.last_mut() {
            Some(c) if c.hf == t.hf => {
                c.weight += p;
                c.support.push((point, p));
            }
            _ => out.push(ConditionalOccupancy {
                hf: t.hf,
                weight: p,
                support: vec![(point, p)],
            }),
        }
    }
    for c in &mut out {
        let w = c.weight;
        c.support.iter_mut().for_each(|e| e.1 /= w);
    }
    out
}

/// Inverse of [`condition_on_follower`] (values-so-far supplied by the caller).
pub fn reassemble(stage: usize, parts: &[ConditionalOccupancy], rho: [f64; 2]) -> OccupancyState {
    let mut entries: Vec<(Triple, f64)> = parts
        .iter()
        .flat_map(|c| {
            c.support.iter().map(move |&(x, p)| {
                (
                    Triple {
                        hf: c.hf,
                        state: x.state,
                        hl: x.hl,
                    },
                    c.weight * p,
                )
            })
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    OccupancyState { stage, entries, rho }
}

/// Next conditional occupancy state after `(δ_L, a_F)` and observing `s'`.
///
/// Returns the normalizer `η_{s'}` and, when it is positive, the normalized
/// successor whose weight is `weight · η`.
pub fn conditional_step(
    g: &Game,
    hist: &Histories,
    oc: &ConditionalOccupancy,
    dl: &LeaderRule,
    af: usize,
    next: usize,
) -> Result<(f64, Option<ConditionalOccupancy>)> {
    let mut masses: BTreeMap<Point, f64> = BTreeMap::new();
    for &(x, p) in &oc.support {
        let row = dl.row(x.hl)?;
        for (al, &q) in row.iter().enumerate() {
            if q <= 0.0 {
                continue;
            }
            let pp = g.p(x.state as usize, al, af, next);
            if pp > 0.0 {
                let key = Point {
                    state: next as u32,
                    hl: hist.leader.extend(x.hl, al, next),
                };
                *masses.entry(key).or_insert(0.0) += p * q * pp;
            }
        }
    }
    let eta: f64 = masses.values().sum();
    if eta <= 0.0 {
        return Ok((0.0, None));
    }
    let support = masses.into_iter().map(|(k, m)| (k, m / eta)).collect();
    Ok((
        eta,
        Some(ConditionalOccupancy {
            hf: hist.follower.extend(oc.hf, af, next),
            weight: oc.weight * eta,
            support,
        }),
    ))
}

/// Exact `(v_L, v_F)` of a joint policy by propagating occupancy states.
pub fn evaluate_joint_policy(g: &Game, pil: &LeaderPolicy, pif: &FollowerPolicy) -> Result<(f64, f64)> {
    if !Arc::ptr_eq(&pil.histories, &pif.histories) {
        return Err(SseError::Contract("policies use different history tables".into()));
    }
    if pil.rules.len() < g.horizon || pif.rules.len() < g.horizon {
        return Err(SseError::Domain("policy shorter than the horizon".into()));
    }
    let hist = &pil.histories;
    let mut o = OccupancyState::initial(g, hist);
    for t in 0..g.horizon {
        o = tau_advance(g, hist, &o, &pil.rules[t], &pif.rules[t])?;
    }
    Ok(o.rho_pair())
}

/// `Σ |a − b|` over the union of supports.
pub fn l1_distance(a: &OccupancyState, b: &OccupancyState) -> Result<f64> {
    if a.stage != b.stage {
        return Err(SseError::Domain(format!(
            "l1 distance between stages {} and {}",
            a.stage, b.stage
        )));
    }
    Ok(sorted_l1(&a.entries, &b.entries))
}

/// ℓ1 distance between two sorted sparse vectors.
pub fn sorted_l1<K: Ord + Copy>(a: &[(K, f64)], b: &[(K, f64)]) -> f64 {
    let (mut i, mut j, mut d) = (0, 0, 0.0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            d += a[i].1.abs();
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            d += b[j].1.abs();
            j += 1;
        } else {
            d += (a[i].1 - b[j].1).abs();
            i += 1;
            j += 1;
        }
    }
    d
}
