//! Finite-horizon leader-follower general-sum stochastic games.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SseError};

/// Row-sum tolerance for transition distributions.
pub const PROB_TOL: f64 = 1e-9;
/// Parsed rows deviating by less than this are renormalized instead of rejected.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    Leader,
    Follower,
}

/// A leader-follower general-sum stochastic game.
///
/// Transition and reward tensors are dense and indexed `[s][aL][aF][s']`.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    pub name: String,
    pub states: Vec<String>,
    pub leader_actions: Vec<String>,
    pub follower_actions: Vec<String>,
    pub initial_state: usize,
    pub gamma: f64,
    pub horizon: usize,
    pub metadata: BTreeMap<String, String>,
    transition: Vec<f64>,
    reward_leader: Vec<f64>,
    reward_follower: Vec<f64>,
    successors: Vec<Vec<(usize, f64)>>,
}

impl Game {
    /// Creates a game with all-zero transitions and rewards.
    pub fn new(
        name: impl Into<String>,
        states: Vec<String>,
        leader_actions: Vec<String>,
        follower_actions: Vec<String>,
        initial_state: usize,
        gamma: f64,
        horizon: usize,
    ) -> Self {
        let n = states.len();
        let cells = n * leader_actions.len() * follower_actions.len();
        Game {
            name: name.into(),
            states,
            leader_actions,
            follower_actions,
            initial_state,
            gamma,
            horizon,
            metadata: BTreeMap::new(),
            transition: vec![0.0; cells * n],
            reward_leader: vec![0.0; cells * n],
            reward_follower: vec![0.0; cells * n],
            successors: vec![Vec::new(); cells],
        }
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_leader_actions(&self) -> usize {
        self.leader_actions.len()
    }

    pub fn n_follower_actions(&self) -> usize {
        self.follower_actions.len()
    }

    pub fn n_actions(&self, player: Player) -> usize {
        match player {
            Player::Leader => self.n_leader_actions(),
            Player::Follower => self.n_follower_actions(),
        }
    }

    #[inline]
    fn cell(&self, s: usize, al: usize, af: usize) -> usize {
        (s * self.leader_actions.len() + al) * self.follower_actions.len() + af
    }

    #[inline]
    fn idx(&self, s: usize, al: usize, af: usize, s2: usize) -> usize {
        self.cell(s, al, af) * self.states.len() + s2
    }

    #[inline]
    pub fn p(&self, s: usize, al: usize, af: usize, s2: usize) -> f64 {
        self.transition[self.idx(s, al, af, s2)]
    }

    #[inline]
    pub fn reward(&self, player: Player, s: usize, al: usize, af: usize, s2: usize) -> f64 {
        let i = self.idx(s, al, af, s2);
        match player {
            Player::Leader => self.reward_leader[i],
            Player::Follower => self.reward_follower[i],
        }
    }

    /// Successor states with positive probability.
    #[inline]
    pub fn successors(&self, s: usize, al: usize, af: usize) -> &[(usize, f64)] {
        &self.successors[self.cell(s, al, af)]
    }

    /// Expected one-step rewards `(r_L, r_F)` for a joint action.
    /// For each state, the smallest leader action with the same transitions
    /// and rewards as each action against every follower action.
    pub fn leader_action_aliases(&self) -> Vec<Vec<usize>> {
        let same = |s: usize, a: usize, b: usize| {
            (0..self.n_follower_actions()).all(|af| {
                let (x, y) = (self.successors(s, a, af), self.successors(s, b, af));
                x == y
                    && x.iter().all(|&(s2, _)| {
                        self.reward(Player::Leader, s, a, af, s2) == self.reward(Player::Leader, s, b, af, s2)
                            && self.reward(Player::Follower, s, a, af, s2) == self.reward(Player::Follower, s, b, af, s2)
                    })
            })
        };
        (0..self.n_states())
            .map(|s| {
                (0..self.n_leader_actions())
                    .map(|a| (0..=a).find(|&b| same(s, a, b)).unwrap_or(a))
                    .collect()
            })
            .collect()
    }

    pub fn expected_reward(&self, s: usize, al: usize, af: usize) -> (f64, f64) {
        let mut out = (0.0, 0.0);
        for &(s2, p) in self.successors(s, al, af) {
            out.0 += p * self.reward(Player::Leader, s, al, af, s2);
            out.1 += p * self.reward(Player::Follower, s, al, af, s2);
        }
        out
    }

    pub fn set_transition(&mut self, s: usize, al: usize, af: usize, dist: &[(usize, f64)]) {
        let n = self.states.len();
        let base = self.cell(s, al, af) * n;
        self.transition[base..base + n].fill(0.0);
        for &(s2, p) in dist {
            self.transition[base + s2] += p;
        }
        self.refresh_cell(self.cell(s, al, af));
    }

    pub fn set_reward(&mut self, s: usize, al: usize, af: usize, s2: usize, rl: f64, rf: f64) {
        let i = self.idx(s, al, af, s2);
        self.reward_leader[i] = rl;
        self.reward_follower[i] = rf;
    }

    /// Sets the same reward for every successor of `(s, aL, aF)`.
    pub fn set_reward_all(&mut self, s: usize, al: usize, af: usize, rl: f64, rf: f64) {
        for s2 in 0..self.states.len() {
            self.set_reward(s, al, af, s2, rl, rf);
        }
    }

    fn refresh_cell(&mut self, cell: usize) {
        let n = self.states.len();
        self.successors[cell] = (0..n)
            .filter_map(|s2| {
                let p = self.transition[cell * n + s2];
                (p > 0.0).then_some((s2, p))
            })
            .collect();
    }

    /// Copy of the game with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Game {
        let mut g = self.clone();
        g.horizon = horizon;
        g
    }

    /// `m = max(‖r_L‖∞, ‖r_F‖∞)`.
    pub fn reward_bound(&self) -> f64 {
        self.reward_leader
            .iter()
            .chain(self.reward_follower.iter())
            .fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    /// `γ^t`, with `γ = 1` giving 1 at every stage.
    pub fn discount_at(&self, t: usize) -> f64 {
        if self.gamma == 1.0 {
            1.0
        } else {
            self.gamma.powi(t as i32)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&GameFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Game> {
        let file: GameFile = serde_json::from_str(text)?;
        file.into_game()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Game> {
        Game::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// One failed invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub message: String,
}

/// Checks every game invariant and reports the failures. Never mutates the game.
pub fn validate_game(g: &Game) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |message: String| out.push(Violation { message });
    if g.states.is_empty() {
        bad("no states".into());
    }
    if g.leader_actions.is_empty() {
        bad("no leader actions".into());
    }
    if g.follower_actions.is_empty() {
        bad("no follower actions".into());
    }
    if g.initial_state >= g.states.len() {
        bad(format!("initial state {} out of range", g.initial_state));
    }
    if !(g.gamma > 0.0 && g.gamma <= 1.0) {
        bad(format!("discount {} outside (0, 1]", g.gamma));
    }
    if g.horizon < 1 {
        bad("horizon must be at least 1".into());
    }
    for s in 0..g.n_states() {
        for al in 0..g.n_leader_actions() {
            for af in 0..g.n_follower_actions() {
                let mut sum = 0.0;
                for s2 in 0..g.n_states() {
                    let p = g.p(s, al, af, s2);
                    if !p.is_finite() || p < 0.0 {
                        bad(format!(
                            "invalid probability {p} at ({}, {}, {}) -> {}",
                            g.states[s], g.leader_actions[al], g.follower_actions[af], g.states[s2]
                        ));
                    }
                    sum += p;
                    for player in [Player::Leader, Player::Follower] {
                        if !g.reward(player, s, al, af, s2).is_finite() {
                            bad(format!(
                                "non-finite {player:?} reward at ({}, {}, {}, {})",
                                g.states[s], g.leader_actions[al], g.follower_actions[af], g.states[s2]
                            ));
                        }
                    }
                }
                if (sum - 1.0).abs() > PROB_TOL {
                    bad(format!(
                        "transition row ({}, {}, {}) sums to {sum}",
                        g.states[s], g.leader_actions[al], g.follower_actions[af]
                    ));
                }
            }
        }
    }
    out
}

/// Smallest `ℓ ≥ 1` with `m·γ^ℓ/(1−γ) ≤ ε`.
pub fn truncation_horizon(gamma: f64, epsilon: f64, m: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(SseError::Domain(format!(
            "truncation horizon needs 0 < gamma < 1, got {gamma}"
        )));
    }
    if !(epsilon > 0.0) || !(m > 0.0) {
        return Err(SseError::Domain("epsilon and m must be positive".into()));
    }
    let tail = |l: usize| m * gamma.powi(l as i32) / (1.0 - gamma);
    let x = ((1.0 - gamma) * epsilon / m).ln() / gamma.ln();
    let mut l = if x.is_finite() && x > 1.0 { x.ceil() as usize } else { 1 };
    while l > 1 && tail(l - 1) <= epsilon {
        l -= 1;
    }
    while tail(l) > epsilon {
        l += 1;
    }
    Ok(l)
}

#[derive(Debug, Serialize, Deserialize)]
struct TransitionEntry {
    s: String,
    #[serde(rename = "aL")]
    al: String,
    #[serde(rename = "aF")]
    af: String,
    dist: BTreeMap<String, f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RewardEntry {
    s: String,
    #[serde(rename = "aL")]
    al: String,
    #[serde(rename = "aF")]
    af: String,
    #[serde(rename = "s'")]
    next: String,
    #[serde(rename = "rL")]
    rl: f64,
    #[serde(rename = "rF")]
    rf: f64,
}

/// On-disk JSON layout.
#[derive(Debug, Serialize, Deserialize)]
struct GameFile {
    #[serde(default)]
    name: String,
    states: Vec<String>,
    leader_actions: Vec<String>,
    follower_actions: Vec<String>,
    initial_state: String,
    gamma: f64,
    horizon: usize,
    transitions: Vec<TransitionEntry>,
    #[serde(default)]
    rewards: Vec<RewardEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

impl From<&Game> for GameFile {
    fn from(g: &Game) -> Self {
        let mut transitions = Vec::new();
        let mut rewards = Vec::new();
        for s in 0..g.n_states() {
            for al in 0..g.n_leader_actions() {
                for af in 0..g.n_follower_actions() {
                    let mut dist = BTreeMap::new();
                    for s2 in 0..g.n_states() {
                        let p = g.p(s, al, af, s2);
                        if p != 0.0 {
                            dist.insert(g.states[s2].clone(), p);
                        }
                        let (rl, rf) = (
                            g.reward(Player::Leader, s, al, af, s2),
                            g.reward(Player::Follower, s, al, af, s2),
                        );
                        if rl != 0.0 || rf != 0.0 {
                            rewards.push(RewardEntry {
                                s: g.states[s].clone(),
                                al: g.leader_actions[al].clone(),
                                af: g.follower_actions[af].clone(),
                                next: g.states[s2].clone(),
                                rl,
                                rf,
                            });
                        }
                    }
                    transitions.push(TransitionEntry {
                        s: g.states[s].clone(),
                        al: g.leader_actions[al].clone(),
                        af: g.follower_actions[af].clone(),
                        dist,
                    });
                }
            }
        }
        GameFile {
            name: g.name.clone(),
            states: g.states.clone(),
            leader_actions: g.leader_actions.clone(),
            follower_actions: g.follower_actions.clone(),
            initial_state: g.states.get(g.initial_state).cloned().unwrap_or_default(),
            gamma: g.gamma,
            horizon: g.horizon,
            transitions,
            rewards,
            metadata: g.metadata.clone(),
        }
    }
}

fn lookup(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| SseError::InvalidGame(format!("unknown {what} '{name}'")))
}

impl GameFile {
    fn into_game(self) -> Result<Game> {
        let initial = lookup(&self.states, &self.initial_state, "state")?;
        let mut g = Game::new(
            self.name,
            self.states,
            self.leader_actions,
            self.follower_actions,
            initial,
            self.gamma,
            self.horizon,
        );
        g.metadata = self.metadata;
        let (ns, nl, nf) = (g.n_states(), g.n_leader_actions(), g.n_follower_actions());
        let mut seen = vec![false; ns * nl * nf];
        for t in &self.transitions {
            let s = lookup(&g.states, &t.s, "state")?;
            let al = lookup(&g.leader_actions, &t.al, "leader action")?;
            let af = lookup(&g.follower_actions, &t.af, "follower action")?;
            let mut dist = Vec::new();
            for (name, &p) in &t.dist {
                dist.push((lookup(&g.states, name, "state")?, p));
            }
            let sum: f64 = dist.iter().map(|d| d.1).sum();
            if dist.iter().any(|d| !(d.1 >= 0.0)) || (sum - 1.0).abs() >= RENORMALIZE_TOL {
                return Err(SseError::InvalidGame(format!(
                    "transition row ({}, {}, {}) sums to {sum}",
                    t.s, t.al, t.af
                )));
            }
            if (sum - 1.0).abs() > 1e-12 {
                dist.iter_mut().for_each(|d| d.1 /= sum);
            }
            let cell = g.cell(s, al, af);
            if seen[cell] {
                return Err(SseError::InvalidGame(format!(
                    "duplicate transition row ({}, {}, {})",
                    t.s, t.al, t.af
                )));
            }
            seen[cell] = true;
            g.set_transition(s, al, af, &dist);
        }
        if let Some(cell) = seen.iter().position(|&b| !b) {
            let (s, al, af) = (cell / (nl * nf), (cell / nf) % nl, cell % nf);
            return Err(SseError::InvalidGame(format!(
                "missing transition row ({}, {}, {})",
                g.states[s], g.leader_actions[al], g.follower_actions[af]
            )));
        }
        for r in &self.rewards {
            let s = lookup(&g.states, &r.s, "state")?;
            let al = lookup(&g.leader_actions, &r.al, "leader action")?;
            let af = lookup(&g.follower_actions, &r.af, "follower action")?;
            let s2 = lookup(&g.states, &r.next, "state")?;
            g.set_reward(s, al, af, s2, r.rl, r.rf);
        }
        let violations = validate_game(&g);
        if let Some(v) = violations.first() {
            return Err(SseError::InvalidGame(v.message.clone()));
        }
        Ok(g)
    }
}
