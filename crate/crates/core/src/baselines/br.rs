use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Result, SseError};
use crate::game::{Game, Player};
use crate::history::HistId;
use crate::occupancy::{evaluate_joint_policy, FollowerPolicy, FollowerRule, LeaderPolicy};

/// Tolerance for follower value ties.
pub const BR_TIE: f64 = 1e-9;

/// A follower best response with leader-favourable tie-breaking.
#[derive(Debug, Clone)]
pub struct BestResponse {
    pub follower: FollowerPolicy,
    pub value_follower: f64,
    /// Leader value under the response; the SSE value of the leader policy.
    pub value_leader: f64,
}

/// Every follower best response found by exhaustive search.
#[derive(Debug, Clone)]
pub struct BestResponseSet {
    pub value_follower: f64,
    /// Each optimal follower policy with the leader value it induces.
    pub members: Vec<(FollowerPolicy, f64)>,
}

impl BestResponseSet {
    /// Leader value under the leader-favourable member.
    pub fn sse_value(&self) -> f64 {
        self.members.iter().map(|m| m.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

type Dist = BTreeMap<(usize, HistId), f64>;

struct Dp<'a> {
    g: &'a Game,
    pil: &'a LeaderPolicy,
    rules: Vec<FollowerRule>,
    nodes: u64,
    cap: u64,
}

impl Dp<'_> {
    /// Successor masses per next state after the follower plays `af`, and
    /// the expected immediate rewards `(leader, follower)`.
    fn step(&self, t: usize, dist: &Dist, af: usize) -> Result<(BTreeMap<usize, Dist>, f64, f64)> {
        let g = self.g;
        let hist = &self.pil.histories;
        let disc = g.discount_at(t);
        let mut next: BTreeMap<usize, Dist> = BTreeMap::new();
        let (mut rl, mut rf) = (0.0, 0.0);
        for (&(s, hl), &m) in dist {
            let row = self.pil.rules[t].row(hl)?;
            for (al, &q) in row.iter().enumerate() {
                if q <= 0.0 {
                    continue;
                }
                for &(s2, p) in g.successors(s, al, af) {
                    let w = m * q * p;
                    rl += disc * w * g.reward(Player::Leader, s, al, af, s2);
                    rf += disc * w * g.reward(Player::Follower, s, al, af, s2);
                    *next
                        .entry(s2)
                        .or_default()
                        .entry((s2, hist.leader.extend(hl, al, s2)))
                        .or_insert(0.0) += w;
                }
            }
        }
        Ok((next, rl, rf))
    }

    fn solve(&mut self, t: usize, hf: HistId, dist: &Dist) -> Result<(f64, f64)> {
        if t == self.g.horizon {
            return Ok((0.0, 0.0));
        }
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(SseError::Capacity(format!(
                "best response visits more than {} follower histories",
                self.cap
            )));
        }
        let mut best: Option<(f64, f64, usize)> = None;
        for af in 0..self.g.n_follower_actions() {
            let (next, mut ql, mut qf) = self.step(t, dist, af)?;
            for (s2, d2) in &next {
                let h2 = self.pil.histories.follower.extend(hf, af, *s2);
                let (vl, vf) = self.solve(t + 1, h2, d2)?;
                ql += vl;
                qf += vf;
            }
            let better = match best {
                None => true,
                Some((bl, bf, _)) => {
                    let tol = BR_TIE * bf.abs().max(1.0);
                    qf > bf + tol || (qf >= bf - tol && ql > bl + tol)
                }
            };
            if better {
                best = Some((ql, qf, af));
            }
        }
        let (vl, vf, af) = best.expect("at least one follower action");
        self.rules[t].actions.insert(hf, af);
        Ok((vl, vf))
    }
}

/// Exact best response by dynamic programming over follower histories.
///
/// Each follower history carries the unnormalized distribution over
/// `(state, leader history)`; among follower-optimal actions the one best for
/// the leader is kept, then the lowest index.
pub fn best_response(g: &Game, pil: &LeaderPolicy) -> Result<BestResponse> {
    best_response_capped(g, pil, u64::MAX)
}

/// [`best_response`] failing with a capacity error past `cap` follower histories.
pub fn best_response_capped(g: &Game, pil: &LeaderPolicy, cap: u64) -> Result<BestResponse> {
    if pil.rules.len() < g.horizon {
        return Err(SseError::Domain("leader policy shorter than the horizon".into()));
    }
    let hist = &pil.histories;
    let s0 = g.initial_state;
    let mut dp = Dp {
        g,
        pil,
        rules: (0..g.horizon).map(FollowerRule::new).collect(),
        nodes: 0,
        cap,
    };
    let mut root = Dist::new();
    root.insert((s0, hist.leader.root(s0)), 1.0);
    let (vl, vf) = dp.solve(0, hist.follower.root(s0), &root)?;
    Ok(BestResponse {
        follower: FollowerPolicy {
            histories: pil.histories.clone(),
            rules: dp.rules,
        },
        value_follower: vf,
        value_leader: vl,
    })
}

/// Follower decision tree restricted to histories reachable under `pil`.
struct Node {
    stage: usize,
    hf: HistId,
    /// Per follower action, the child nodes by next state.
    children: Vec<Vec<Node>>,
}

fn build_tree(dp: &Dp, t: usize, hf: HistId, dist: &Dist) -> Result<Node> {
    let mut children = Vec::new();
    if t < dp.g.horizon {
        for af in 0..dp.g.n_follower_actions() {
            let (next, _, _) = dp.step(t, dist, af)?;
            let mut kids = Vec::new();
            for (s2, d2) in &next {
                let h2 = dp.pil.histories.follower.extend(hf, af, *s2);
                kids.push(build_tree(dp, t + 1, h2, d2)?);
            }
            children.push(kids);
        }
    }
    Ok(Node { stage: t, hf, children })
}

fn count(node: &Node) -> u128 {
    if node.children.is_empty() {
        return 1;
    }
    node.children
        .iter()
        .map(|kids| kids.iter().fold(1u128, |acc, k| acc.saturating_mul(count(k))))
        .fold(0u128, |a, b| a.saturating_add(b))
}

type Assignment = Vec<(usize, HistId, usize)>;

fn assignments(node: &Node) -> Vec<Assignment> {
    if node.children.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (af, kids) in node.children.iter().enumerate() {
        let mut partial: Vec<Assignment> = vec![vec![(node.stage, node.hf, af)]];
        for k in kids {
            let sub = assignments(k);
            let mut merged = Vec::with_capacity(partial.len() * sub.len());
            for p in &partial {
                for s in &sub {
                    let mut m = p.clone();
                    m.extend_from_slice(s);
                    merged.push(m);
                }
            }
            partial = merged;
        }
        out.extend(partial);
    }
    out
}

/// Best responses by exhaustive search over deterministic follower policies
/// on the histories reachable under `pil`.
pub fn follower_best_response(g: &Game, pil: &LeaderPolicy, cap: u128) -> Result<BestResponseSet> {
    let hist = &pil.histories;
    let s0 = g.initial_state;
    let dp = Dp {
        g,
        pil,
        rules: Vec::new(),
        nodes: 0,
        cap: u64::MAX,
    };
    let mut root = Dist::new();
    root.insert((s0, hist.leader.root(s0)), 1.0);
    let tree = build_tree(&dp, 0, hist.follower.root(s0), &root)?;
    let n = count(&tree);
    if n > cap {
        return Err(SseError::Capacity(format!("{n} follower policies exceed the cap of {cap}")));
    }
    let mut evaluated = Vec::new();
    for a in assignments(&tree) {
        let mut rules: Vec<FollowerRule> = (0..g.horizon).map(FollowerRule::new).collect();
        for (t, hf, af) in a {
            rules[t].actions.insert(hf, af);
        }
        let pif = FollowerPolicy {
            histories: Arc::clone(&pil.histories),
            rules,
        };
        let (vl, vf) = evaluate_joint_policy(g, pil, &pif)?;
        evaluated.push((pif, vl, vf));
    }
    let best = evaluated.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
    let tol = BR_TIE * best.abs().max(1.0);
    Ok(BestResponseSet {
        value_follower: best,
        members: evaluated
            .into_iter()
            .filter(|e| e.2 >= best - tol)
            .map(|e| (e.0, e.1))
            .collect(),
    })
}

/// `claimed − v_L(π_L, BR)`, signed; zero certifies the claim.
pub fn measured_exploitability(g: &Game, pil: &LeaderPolicy, claimed: f64) -> Result<f64> {
    Ok(claimed - best_response(g, pil)?.value_leader)
}
