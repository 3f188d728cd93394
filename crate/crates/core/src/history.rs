//! Interned private histories.
//!
//! A history is a node in a prefix tree keyed by `(parent, own action, state)`.
//! In Markov mode every history collapses to its `(stage, state)` pair, which
//! is how the stage-dependent Markov variant restricts the leader.

use std::collections::HashMap;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::game::Game;

pub type HistId = u32;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HistoryMode {
    /// Full action-observation histories.
    Full,
    /// Histories identified by `(stage, state)` only.
    Markov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Node {
    parent: u32,
    action: u32,
    state: u32,
    stage: u32,
}

#[derive(Debug, Default)]
struct Inner {
    nodes: Vec<Node>,
    index: HashMap<(u32, u32, u32), HistId>,
}

/// Append-only intern table for one player's histories.
#[derive(Debug)]
pub struct HistoryTable {
    mode: HistoryMode,
    aliases: Option<Vec<Vec<u32>>>,
    inner: RwLock<Inner>,
}

impl HistoryTable {
    pub fn new(mode: HistoryMode) -> Self {
        HistoryTable {
            mode,
            aliases: None,
            inner: RwLock::new(Inner::default()),
        }
    }

    /// Records `aliases[s][a]` in place of action `a` taken at state `s`.
    pub fn with_aliases(mut self, aliases: Vec<Vec<usize>>) -> Self {
        self.aliases = Some(aliases.into_iter().map(|r| r.into_iter().map(|a| a as u32).collect()).collect());
        self
    }

    pub fn mode(&self) -> HistoryMode {
        self.mode
    }

    fn intern(&self, key: (u32, u32, u32), node: Node) -> HistId {
        if let Some(&id) = self.inner.read().index.get(&key) {
            return id;
        }
        let mut w = self.inner.write();
        if let Some(&id) = w.index.get(&key) {
            return id;
        }
        let id = w.nodes.len() as HistId;
        w.nodes.push(node);
        w.index.insert(key, id);
        id
    }

    /// The stage-0 history observing `state`.
    pub fn root(&self, state: usize) -> HistId {
        let s = state as u32;
        let node = Node {
            parent: NONE,
            action: NONE,
            state: s,
            stage: 0,
        };
        match self.mode {
            HistoryMode::Full => self.intern((NONE, NONE, s), node),
            HistoryMode::Markov => self.intern((NONE, 0, s), node),
        }
    }

    /// `h · a · s'`.
    pub fn extend(&self, h: HistId, action: usize, next: usize) -> HistId {
        let parent = self.node(h);
        let s = next as u32;
        let action = match &self.aliases {
            Some(a) => a[parent.state as usize][action],
            None => action as u32,
        };
        match self.mode {
            HistoryMode::Full => self.intern(
                (h, action, s),
                Node {
                    parent: h,
                    action,
                    state: s,
                    stage: parent.stage + 1,
                },
            ),
            HistoryMode::Markov => {
                let stage = parent.stage + 1;
                self.intern(
                    (NONE, stage, s),
                    Node {
                        parent: NONE,
                        action: NONE,
                        state: s,
                        stage,
                    },
                )
            }
        }
    }

    fn node(&self, h: HistId) -> Node {
        self.inner.read().nodes[h as usize]
    }

    pub fn state(&self, h: HistId) -> usize {
        self.node(h).state as usize
    }

    pub fn stage(&self, h: HistId) -> usize {
        self.node(h).stage as usize
    }

    pub fn parent(&self, h: HistId) -> Option<HistId> {
        let p = self.node(h).parent;
        (p != NONE).then_some(p)
    }

    pub fn len(&self) -> usize {
        self.inner.read().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(states, actions)` along the history; in Markov mode only the last state.
    pub fn path(&self, h: HistId) -> (Vec<usize>, Vec<usize>) {
        let inner = self.inner.read();
        let mut states = Vec::new();
        let mut actions = Vec::new();
        let mut cur = h;
        loop {
            let n = inner.nodes[cur as usize];
            states.push(n.state as usize);
            if n.parent == NONE {
                break;
            }
            actions.push(n.action as usize);
            cur = n.parent;
        }
        states.reverse();
        actions.reverse();
        (states, actions)
    }

    /// Alternating trace `s0 a0 s1 … s_t`.
    pub fn trace(&self, h: HistId) -> Vec<usize> {
        let (states, actions) = self.path(h);
        let mut out = Vec::with_capacity(states.len() + actions.len());
        for (i, s) in states.iter().enumerate() {
            out.push(*s);
            if let Some(a) = actions.get(i) {
                out.push(*a);
            }
        }
        out
    }

    /// Readable form such as `0.1.2` (or `t3:s2` in Markov mode).
    pub fn label(&self, h: HistId) -> String {
        match self.mode {
            HistoryMode::Full => self
                .trace(h)
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("."),
            HistoryMode::Markov => format!("t{}:s{}", self.stage(h), self.state(h)),
        }
    }
}

/// Leader and follower tables for one run.
#[derive(Debug)]
pub struct Histories {
    pub leader: HistoryTable,
    pub follower: HistoryTable,
}

impl Histories {
    pub fn new(leader_mode: HistoryMode) -> Self {
        Histories {
            leader: HistoryTable::new(leader_mode),
            follower: HistoryTable::new(HistoryMode::Full),
        }
    }

    /// Tables for solving `g`, with payoff-equivalent leader actions merged.
    pub fn for_game(g: &Game, leader_mode: HistoryMode) -> Self {
        Histories {
            leader: HistoryTable::new(leader_mode).with_aliases(g.leader_action_aliases()),
            follower: HistoryTable::new(HistoryMode::Full),
        }
    }
}
