//! The five benchmark games.

use crate::error::{Result, SseError};
use crate::game::Game;

pub const NAMES: [&str; 5] = ["centipede", "match", "dec-tiger", "mabc", "patrolling"];

/// Builds a benchmark by name at the given horizon.
pub fn build(name: &str, horizon: usize) -> Result<Game> {
    if horizon == 0 {
        return Err(SseError::Domain("horizon must be at least 1".into()));
    }
    let g = match name {
        "centipede" => build_centipede(horizon),
        "match" => build_match().with_horizon(horizon),
        "dec-tiger" | "tiger" => build_dec_tiger().with_horizon(horizon),
        "mabc" => build_mabc().with_horizon(horizon),
        "patrolling" => build_patrolling().with_horizon(horizon),
        other => return Err(SseError::Domain(format!("unknown benchmark '{other}'"))),
    };
    Ok(g)
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// Alternating-move centipede with `horizon` decision nodes.
///
/// Node `n_k` is reached at stage `k − 1`; the leader moves at odd `k`, the
/// follower at even `k`, and the other player's action is ignored. Taking at
/// `n_k` ends the game in `s̄_k`; continuing at the last node ends it in
/// `s̄_{ℓ+1}`.
pub fn build_centipede(horizon: usize) -> Game {
    let l = horizon;
    let mut states: Vec<String> = (1..=l).map(|k| format!("n{k}")).collect();
    states.extend((1..=l + 1).map(|k| format!("end{k}")));
    let terminal = |k: usize| l + k - 1;
    let mut g = Game::new(
        format!("centipede-{l}"),
        states,
        names(&["take", "continue"]),
        names(&["take", "continue"]),
        0,
        1.0,
        horizon,
    );
    const TAKE: usize = 0;
    for k in 1..=l {
        let s = k - 1;
        let leader_moves = k % 2 == 1;
        for al in 0..2 {
            for af in 0..2 {
                let take = if leader_moves { al == TAKE } else { af == TAKE };
                if take {
                    let pay = if leader_moves {
                        (k as f64, k.saturating_sub(2) as f64)
                    } else {
                        (k as f64 - 2.0, k as f64)
                    };
                    g.set_transition(s, al, af, &[(terminal(k), 1.0)]);
                    g.set_reward(s, al, af, terminal(k), pay.0, pay.1);
                } else if k < l {
                    g.set_transition(s, al, af, &[(s + 1, 1.0)]);
                } else {
                    let v = (l - 1) as f64;
                    g.set_transition(s, al, af, &[(terminal(l + 1), 1.0)]);
                    g.set_reward(s, al, af, terminal(l + 1), v, v);
                }
            }
        }
    }
    for k in 1..=l + 1 {
        for al in 0..2 {
            for af in 0..2 {
                g.set_transition(terminal(k), al, af, &[(terminal(k), 1.0)]);
            }
        }
    }
    g.metadata.insert("encoding".into(), "alternating turns, dummy action for the non-mover".into());
    g
}

/// A three-step cycle in which only a history-dependent leader can deter
/// defection: the follower defects or cooperates at `s0`, the play passes
/// through `sD`/`sC` to `m`, where the leader may penalize the follower.
pub fn build_match() -> Game {
    let mut g = Game::new(
        "match",
        names(&["s0", "sD", "sC", "m"]),
        names(&["reset", "penalty"]),
        names(&["cooperate", "defect"]),
        0,
        1.0,
        3,
    );
    for al in 0..2 {
        g.set_transition(0, al, 0, &[(2, 1.0)]);
        g.set_transition(0, al, 1, &[(1, 1.0)]);
        g.set_reward(0, al, 1, 1, -1000.0, 1.0);
        for af in 0..2 {
            g.set_transition(1, al, af, &[(3, 1.0)]);
            g.set_transition(2, al, af, &[(3, 1.0)]);
            g.set_transition(3, al, af, &[(0, 1.0)]);
            if al == 1 {
                g.set_reward(3, al, af, 0, 0.0, -2.0);
            }
        }
    }
    g.metadata.insert("penalty".into(), "1000".into());
    g.metadata.insert("temptation".into(), "1".into());
    g.metadata.insert("punishment".into(), "2".into());
    g
}

/// Fully observed tiger problem with a common reward: both players must open
/// the door without the tiger; the tiger is then resampled uniformly.
pub fn build_dec_tiger() -> Game {
    let mut g = Game::new(
        "dec-tiger",
        names(&["tiger-left", "tiger-right"]),
        names(&["open-left", "open-right"]),
        names(&["open-left", "open-right"]),
        0,
        1.0,
        1,
    );
    for s in 0..2 {
        let safe = 1 - s;
        for al in 0..2 {
            for af in 0..2 {
                g.set_transition(s, al, af, &[(0, 0.5), (1, 0.5)]);
                let r = if al == safe && af == safe { 20.0 } else { -50.0 };
                g.set_reward_all(s, al, af, r, r);
            }
        }
    }
    g.metadata.insert("rewards".into(), "+20 both safe, -50 otherwise".into());
    g
}

/// Multi-access broadcast channel with two buffers; state `b_L·2 + b_F`.
///
/// A lone sender with a full buffer delivers a message for a common reward
/// of 1 and empties its buffer; empty buffers refill with probability 0.9
/// (leader) and 0.1 (follower).
pub fn build_mabc() -> Game {
    const FILL: [f64; 2] = [0.9, 0.1];
    let mut g = Game::new(
        "mabc",
        names(&["00", "01", "10", "11"]),
        names(&["wait", "send"]),
        names(&["wait", "send"]),
        3,
        1.0,
        1,
    );
    for s in 0..4 {
        let b = [s / 2, s % 2];
        for al in 0..2 {
            for af in 0..2 {
                let mut after = b;
                let mut r = 0.0;
                let sends = [al == 1, af == 1];
                if sends[0] != sends[1] {
                    let i = if sends[0] { 0 } else { 1 };
                    if b[i] == 1 {
                        after[i] = 0;
                        r = 1.0;
                    }
                }
                let mut dist = Vec::new();
                for s2 in 0..4 {
                    let nb = [s2 / 2, s2 % 2];
                    let mut p = 1.0;
                    for i in 0..2 {
                        p *= match (after[i], nb[i]) {
                            (1, 1) => 1.0,
                            (1, 0) => 0.0,
                            (_, 1) => FILL[i],
                            _ => 1.0 - FILL[i],
                        };
                    }
                    if p > 0.0 {
                        dist.push((s2, p));
                    }
                }
                g.set_transition(s, al, af, &dist);
                g.set_reward_all(s, al, af, r, r);
            }
        }
    }
    g.metadata.insert("fill".into(), "0.9 leader, 0.1 follower".into());
    g
}

/// Two-target patrol: the defender stays or moves between `A` and `B`; the
/// attacker waits or attacks a target, which ends the game. Zero-sum.
pub fn build_patrolling() -> Game {
    let mut g = Game::new(
        "patrolling",
        names(&["A", "B", "done"]),
        names(&["stay", "move"]),
        names(&["wait", "attack-A", "attack-B"]),
        0,
        1.0,
        1,
    );
    for s in 0..2 {
        for al in 0..2 {
            let pos = if al == 0 { s } else { 1 - s };
            g.set_transition(s, al, 0, &[(pos, 1.0)]);
            for target in 0..2 {
                let af = target + 1;
                g.set_transition(s, al, af, &[(2, 1.0)]);
                let caught = if pos == target { 1.0 } else { -1.0 };
                g.set_reward(s, al, af, 2, caught, -caught);
            }
        }
    }
    for al in 0..2 {
        for af in 0..3 {
            g.set_transition(2, al, af, &[(2, 1.0)]);
        }
    }
    g.metadata.insert("graph".into(), "2-cycle".into());
    g
}
