//! The greedy-backup MILP: choose a leader rule at a credible set so that a
//! given member is the follower's preferred one and the leader's value there
//! is maximal, with next-stage values read from one vector set.

use std::collections::BTreeMap;

use super::{Backend, Cmp, MilpModel, Outcome, Sense, SolveOptions, Var};
use crate::error::{Result, SseError};
use crate::game::{Game, Player};
use crate::history::Histories;
use crate::occupancy::{LeaderRule, Point};
use crate::vectors::{pick, ConditionalTable, VectorSet};

/// `2·m·ℓ + 1` for `γ = 1`, else `2·m·(1 − γ^ℓ)/(1 − γ) + 1`.
pub fn big_m(g: &Game) -> f64 {
    let m = g.reward_bound();
    let l = g.horizon as f64;
    if g.gamma == 1.0 {
        2.0 * m * l + 1.0
    } else {
        2.0 * m * (1.0 - g.gamma.powi(g.horizon as i32)) / (1.0 - g.gamma) + 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BigM {
    /// Per-row constants from the bounds of each expression over the rule simplices.
    Tight,
    Uniform(f64),
}

#[derive(Debug, Clone)]
pub struct BackupOptions {
    pub big_m: BigM,
    pub solve: SolveOptions,
    /// Re-solve the LP with binaries fixed before reading the rule.
    pub polish: bool,
    /// Keep the model and raw assignment on the solution for auditing.
    pub keep_model: bool,
}

impl Default for BackupOptions {
    fn default() -> Self {
        BackupOptions {
            big_m: BigM::Tight,
            solve: SolveOptions::default(),
            polish: true,
            keep_model: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BackupSolution {
    pub target: usize,
    pub rule: LeaderRule,
    /// Follower action per conditional of the table.
    pub kappa: Vec<usize>,
    /// Next-stage pair per conditional and next state, `None` where unreachable.
    pub w: Vec<Vec<Option<usize>>>,
    /// Exact `(q_L, q_F)` of every member under the rule.
    pub member_values: Vec<(f64, f64)>,
    /// Leader value at the follower-preferred member, leader-favourable ties.
    pub value: f64,
    pub milp_objective: f64,
    pub timed_out: bool,
    pub audit: Option<(MilpModel, Vec<f64>)>,
}

/// Sparse linear expression over rule variables `δ(h, a)`, column `h·|A_L| + a`.
#[derive(Debug, Clone, Default)]
struct Lin(Vec<(usize, f64)>);

impl Lin {
    fn add(&mut self, col: usize, c: f64) {
        if c != 0.0 {
            self.0.push((col, c));
        }
    }

    fn compact(mut self) -> Lin {
        self.0.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.0.len());
        for (c, a) in self.0 {
            match out.last_mut() {
                Some(l) if l.0 == c => l.1 += a,
                _ => out.push((c, a)),
            }
        }
        Lin(out)
    }

    /// Range over the product of per-history simplices.
    fn bounds(&self, nl: usize) -> (f64, f64) {
        let mut per_h: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for &(c, a) in &self.0 {
            per_h.entry(c / nl).or_insert_with(|| vec![0.0; nl])[c % nl] += a;
        }
        per_h.values().fold((0.0, 0.0), |(lo, hi), row| {
            (
                lo + row.iter().cloned().fold(f64::INFINITY, f64::min),
                hi + row.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )
        })
    }

    fn terms(&self, delta: &[Var], scale: f64) -> Vec<(Var, f64)> {
        self.0.iter().map(|&(c, a)| (delta[c], scale * a)).collect()
    }
}

/// One next-state branch of `(conditional, follower action)`.
struct Branch {
    next_state: usize,
    /// `(rule column, mass, located next-domain index)`.
    terms: Vec<(usize, f64, Option<usize>)>,
}

impl Branch {
    fn value(&self, next: &VectorSet, j: usize, player: Player) -> Lin {
        let coeffs = next.pairs[j].coefficients(player);
        let mut lin = Lin::default();
        for &(col, mass, loc) in &self.terms {
            if let Some(i) = loc {
                lin.add(col, mass * coeffs[i]);
            }
        }
        lin.compact()
    }

    fn points(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.iter().filter_map(|t| t.2).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

struct Action {
    reward: [Lin; 2],
    branches: Vec<Branch>,
}

fn expand_actions(g: &Game, hist: &Histories, table: &ConditionalTable, next: &VectorSet, k: usize) -> Vec<Action> {
    let (nl, nf) = (g.n_leader_actions(), g.n_follower_actions());
    let hidx = |h| table.leader_histories.binary_search(&h).expect("history in table");
    (0..nf)
        .map(|af| {
            let mut rl = Lin::default();
            let mut rf = Lin::default();
            let mut by_state: BTreeMap<usize, Vec<(usize, f64, Option<usize>)>> = BTreeMap::new();
            for &(x, p) in &table.conds[k].support {
                let s = x.state as usize;
                let h = hidx(x.hl);
                for al in 0..nl {
                    let col = h * nl + al;
                    for &(s2, pp) in g.successors(s, al, af) {
                        rl.add(col, p * pp * g.reward(Player::Leader, s, al, af, s2));
                        rf.add(col, p * pp * g.reward(Player::Follower, s, al, af, s2));
                        let loc = next.locate(
                            &hist.leader,
                            Point {
                                state: s2 as u32,
                                hl: hist.leader.extend(x.hl, al, s2),
                            },
                        );
                        by_state.entry(s2).or_default().push((col, p * pp, loc));
                    }
                }
            }
            Action {
                reward: [rl.compact(), rf.compact()],
                branches: by_state
                    .into_iter()
                    .map(|(next_state, terms)| Branch { next_state, terms })
                    .collect(),
            }
        })
        .collect()
}

/// Pairs that can be the follower's (leader-favourable) choice on a branch.
///
/// `j` is dropped when another pair is strictly better for the follower at
/// every reachable point, or at least as good for both players everywhere.
/// With `follower_only`, weak follower dominance alone suffices.
fn candidates(next: &VectorSet, points: &[usize], follower_only: bool) -> Vec<usize> {
    let n = next.pairs.len();
    if points.is_empty() {
        return vec![0];
    }
    let f = |j: usize, i: usize| next.pairs[j].follower[i];
    let l = |j: usize, i: usize| next.pairs[j].leader[i];
    let strict = |a: usize, b: usize| points.iter().all(|&i| f(a, i) > f(b, i));
    let weak = |a: usize, b: usize| {
        points
            .iter()
            .all(|&i| f(a, i) >= f(b, i) && (follower_only || l(a, i) >= l(b, i)))
    };
    (0..n)
        .filter(|&j| {
            !(0..n).any(|d| d != j && (strict(d, j) || (weak(d, j) && (!weak(j, d) || d < j))))
        })
        .collect()
}

struct Built {
    model: MilpModel,
    delta: Vec<Var>,
}

#[allow(clippy::too_many_arguments)]
fn build_model(
    g: &Game,
    table: &ConditionalTable,
    target: usize,
    next: &VectorSet,
    actions: &[Vec<Action>],
    opts: &BackupOptions,
) -> Built {
    let (nl, nf) = (g.n_leader_actions(), g.n_follower_actions());
    let gamma = g.gamma;
    let disc = g.discount_at(table.stage);
    let mut m = MilpModel::new(Sense::Maximize);
    let mut delta = Vec::with_capacity(table.leader_histories.len() * nl);
    for (h, _) in table.leader_histories.iter().enumerate() {
        let row: Vec<Var> = (0..nl).map(|a| m.add_continuous(format!("d_{h}_{a}"), 0.0, 1.0)).collect();
        m.add_constraint(format!("rule_{h}"), row.iter().map(|&v| (v, 1.0)).collect(), Cmp::Eq, 1.0);
        delta.extend(row);
    }
    let big = |lo: f64, hi: f64| match opts.big_m {
        BigM::Tight => (hi - lo).max(0.0) + 1.0,
        BigM::Uniform(v) => v,
    };

    let mut in_target = vec![false; table.conds.len()];
    for &(k, _) in &table.members[target] {
        in_target[k] = true;
    }

    let mut gf_vars = Vec::with_capacity(table.conds.len());
    let mut gl_vars = vec![None; table.conds.len()];
    for k in 0..table.conds.len() {
        let tgt = in_target[k];
        // Follower and leader value expressions per follower action, as
        // (terms, lower bound, upper bound).
        let mut f_exprs: Vec<(Vec<(Var, f64)>, f64, f64)> = Vec::with_capacity(nf);
        let mut l_exprs: Vec<(Vec<(Var, f64)>, f64, f64)> = Vec::with_capacity(nf);
        for (af, act) in actions[k].iter().enumerate() {
            let (mut flo, mut fhi) = act.reward[1].bounds(nl);
            let (mut llo, mut lhi) = act.reward[0].bounds(nl);
            let mut fterms = act.reward[1].terms(&delta, 1.0);
            let mut lterms = act.reward[0].terms(&delta, 1.0);
            if !next.is_zero() {
                for br in &act.branches {
                    let pts = br.points();
                    let cands = candidates(next, &pts, !tgt);
                    let bf: Vec<Lin> = cands.iter().map(|&j| br.value(next, j, Player::Follower)).collect();
                    let bfb: Vec<(f64, f64)> = bf.iter().map(|b| b.bounds(nl)).collect();
                    if cands.len() == 1 {
                        fterms.extend(bf[0].terms(&delta, gamma));
                        flo += gamma * bfb[0].0;
                        fhi += gamma * bfb[0].1;
                        if tgt {
                            let bl = br.value(next, cands[0], Player::Leader);
                            let (lo, hi) = bl.bounds(nl);
                            lterms.extend(bl.terms(&delta, gamma));
                            llo += gamma * lo;
                            lhi += gamma * hi;
                        }
                        continue;
                    }
                    let blo = bfb.iter().map(|b| b.0).fold(f64::NEG_INFINITY, f64::max);
                    let bhi = bfb.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
                    let s2 = br.next_state;
                    let beta_f = m.add_continuous(format!("bf_{k}_{af}_{s2}"), blo, bhi);
                    for (i, b) in bf.iter().enumerate() {
                        let mut t = vec![(beta_f, 1.0)];
                        t.extend(b.terms(&delta, -1.0));
                        m.add_constraint(format!("bfl_{k}_{af}_{s2}_{}", cands[i]), t, Cmp::Ge, 0.0);
                    }
                    fterms.push((beta_f, gamma));
                    flo += gamma * blo;
                    fhi += gamma * bhi;
                    if !tgt {
                        continue;
                    }
                    let bl: Vec<Lin> = cands.iter().map(|&j| br.value(next, j, Player::Leader)).collect();
                    let blb: Vec<(f64, f64)> = bl.iter().map(|b| b.bounds(nl)).collect();
                    let lo = blb.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
                    let hi = blb.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
                    let beta_l = m.add_continuous(format!("bl_{k}_{af}_{s2}"), lo, hi);
                    let mut one_hot = Vec::with_capacity(cands.len());
                    for (i, &j) in cands.iter().enumerate() {
                        let w = m.add_binary(format!("w_{k}_{af}_{s2}_{j}"));
                        one_hot.push((w, 1.0));
                        let mf = big(bfb[i].0, bhi);
                        let mut t = vec![(beta_f, 1.0), (w, mf)];
                        t.extend(bf[i].terms(&delta, -1.0));
                        m.add_constraint(format!("bfu_{k}_{af}_{s2}_{j}"), t, Cmp::Le, mf);
                        let ml = big(blb[i].0, hi);
                        let mut t = vec![(beta_l, 1.0), (w, ml)];
                        t.extend(bl[i].terms(&delta, -1.0));
                        m.add_constraint(format!("blu_{k}_{af}_{s2}_{j}"), t, Cmp::Le, ml);
                    }
                    m.add_constraint(format!("w_{k}_{af}_{s2}"), one_hot, Cmp::Eq, 1.0);
                    lterms.push((beta_l, gamma));
                    llo += gamma * lo;
                    lhi += gamma * hi;
                }
            }
            f_exprs.push((fterms, flo, fhi));
            l_exprs.push((lterms, llo, lhi));
        }

        let glo = f_exprs.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        let ghi = f_exprs.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
        let gf = m.add_continuous(format!("gf_{k}"), glo, ghi);
        for (af, e) in f_exprs.iter().enumerate() {
            let mut t = vec![(gf, 1.0)];
            t.extend(e.0.iter().map(|&(v, a)| (v, -a)));
            m.add_constraint(format!("gfl_{k}_{af}"), t, Cmp::Ge, 0.0);
        }
        gf_vars.push(gf);
        if !tgt {
            continue;
        }
        let lo = l_exprs.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let hi = l_exprs.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
        let gl = m.add_continuous(format!("gl_{k}"), lo, hi);
        gl_vars[k] = Some(gl);
        if nf == 1 {
            let mut t = vec![(gf, 1.0)];
            t.extend(f_exprs[0].0.iter().map(|&(v, a)| (v, -a)));
            m.add_constraint(format!("gfu_{k}_0"), t, Cmp::Le, 0.0);
            let mut t = vec![(gl, 1.0)];
            t.extend(l_exprs[0].0.iter().map(|&(v, a)| (v, -a)));
            m.add_constraint(format!("glu_{k}_0"), t, Cmp::Le, 0.0);
            continue;
        }
        let mut one_hot = Vec::with_capacity(nf);
        for af in 0..nf {
            let kappa = m.add_binary(format!("k_{k}_{af}"));
            one_hot.push((kappa, 1.0));
            let mf = big(f_exprs[af].1, ghi);
            let mut t = vec![(gf, 1.0), (kappa, mf)];
            t.extend(f_exprs[af].0.iter().map(|&(v, a)| (v, -a)));
            m.add_constraint(format!("gfu_{k}_{af}"), t, Cmp::Le, mf);
            let ml = big(l_exprs[af].1, hi);
            let mut t = vec![(gl, 1.0), (kappa, ml)];
            t.extend(l_exprs[af].0.iter().map(|&(v, a)| (v, -a)));
            m.add_constraint(format!("glu_{k}_{af}"), t, Cmp::Le, ml);
        }
        m.add_constraint(format!("k_{k}"), one_hot, Cmp::Eq, 1.0);
    }

    let (rho_l, rho_f) = table.rho[target];
    let objective: Vec<(Var, f64)> = table.members[target]
        .iter()
        .map(|&(k, w)| (gl_vars[k].expect("target conditional"), disc * w))
        .collect();
    m.set_objective(objective, rho_l);
    for (o, row) in table.members.iter().enumerate() {
        if o == target {
            continue;
        }
        let mut t: Vec<(Var, f64)> = table.members[target]
            .iter()
            .map(|&(k, w)| (gf_vars[k], disc * w))
            .collect();
        t.extend(row.iter().map(|&(k, w)| (gf_vars[k], -disc * w)));
        m.add_constraint(format!("pref_{o}"), t, Cmp::Ge, table.rho[o].1 - rho_f);
    }
    Built { model: m, delta }
}

/// Snaps entries within 1e-7 of a fraction with a small denominator.
fn snap(row: &mut [f64]) {
    for x in row.iter_mut() {
        for d in 1..=48u32 {
            let n = (*x * d as f64).round();
            if (*x - n / d as f64).abs() <= 1e-7 {
                *x = n / d as f64;
                break;
            }
        }
    }
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|x| *x /= s);
}

fn read_rule(table: &ConditionalTable, nl: usize, delta: &[Var], values: &[f64], snapped: bool) -> LeaderRule {
    let mut rule = LeaderRule::new(table.stage);
    for (h, &hl) in table.leader_histories.iter().enumerate() {
        let mut row: Vec<f64> = (0..nl).map(|a| values[delta[h * nl + a].0].clamp(0.0, 1.0)).collect();
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
        } else {
            row = vec![1.0 / nl as f64; nl];
        }
        if snapped {
            snap(&mut row);
        }
        rule.rows.insert(hl, row);
    }
    rule
}

/// Follower choices and exact per-conditional values under a fixed rule.
#[derive(Debug, Clone)]
pub struct RuleEvaluation {
    pub kappa: Vec<usize>,
    pub w: Vec<Vec<Option<usize>>>,
    pub per_cond: Vec<(f64, f64)>,
    pub member_values: Vec<(f64, f64)>,
}

/// Evaluates `rule` at every conditional of `table` with next-stage values
/// from `next`, the follower best-responding with leader-favourable ties.
pub fn evaluate_rule(
    g: &Game,
    hist: &Histories,
    table: &ConditionalTable,
    next: &VectorSet,
    rule: &LeaderRule,
) -> Result<RuleEvaluation> {
    let (ns, nf) = (g.n_states(), g.n_follower_actions());
    let mut kappa = Vec::with_capacity(table.conds.len());
    let mut w = Vec::with_capacity(table.conds.len());
    let mut per_cond = Vec::with_capacity(table.conds.len());
    for c in &table.conds {
        let mut options = Vec::with_capacity(nf);
        let mut choices = Vec::with_capacity(nf);
        for af in 0..nf {
            let (mut vl, mut vf) = (0.0, 0.0);
            let mut branch: BTreeMap<usize, Vec<(Option<usize>, f64)>> = BTreeMap::new();
            for &(x, p) in &c.support {
                let s = x.state as usize;
                for (al, &q) in rule.row(x.hl)?.iter().enumerate() {
                    if q <= 0.0 {
                        continue;
                    }
                    for &(s2, pp) in g.successors(s, al, af) {
                        let m = p * q * pp;
                        vl += m * g.reward(Player::Leader, s, al, af, s2);
                        vf += m * g.reward(Player::Follower, s, al, af, s2);
                        let loc = next.locate(
                            &hist.leader,
                            Point {
                                state: s2 as u32,
                                hl: hist.leader.extend(x.hl, al, s2),
                            },
                        );
                        branch.entry(s2).or_default().push((loc, m));
                    }
                }
            }
            let mut sel = vec![None; ns];
            for (s2, resolved) in branch {
                let s = next.select_resolved(&resolved)?;
                vl += g.gamma * s.leader;
                vf += g.gamma * s.follower;
                sel[s2] = Some(s.index);
            }
            options.push((vl, vf));
            choices.push(sel);
        }
        let best = pick(&options);
        kappa.push(best.index);
        w.push(choices.swap_remove(best.index));
        per_cond.push((best.leader, best.follower));
    }
    let member_values = table.member_values(g, &per_cond);
    Ok(RuleEvaluation {
        kappa,
        w,
        per_cond,
        member_values,
    })
}

/// Solves the backup MILP for `target` and reads back an exact solution.
///
/// Returns `Ok(None)` when no rule makes `target` the follower's preferred member.
pub fn greedy_backup_milp(
    g: &Game,
    hist: &Histories,
    table: &ConditionalTable,
    target: usize,
    next: &VectorSet,
    backend: &dyn Backend,
    opts: &BackupOptions,
) -> Result<Option<BackupSolution>> {
    if next.is_empty() {
        return Err(SseError::Domain("backup against an empty vector set".into()));
    }
    if target >= table.members.len() {
        return Err(SseError::Domain(format!("no member {target} in credible set")));
    }
    let nl = g.n_leader_actions();
    let actions: Vec<Vec<Action>> = (0..table.conds.len())
        .map(|k| expand_actions(g, hist, table, next, k))
        .collect();
    let built = build_model(g, table, target, next, &actions, opts);
    let (values, objective, timed_out) = match backend.solve(&built.model, &opts.solve)? {
        Outcome::Optimal(a) => (a.values, a.objective, false),
        Outcome::Infeasible => return Ok(None),
        Outcome::TimedOut(Some(a)) => (a.values, a.objective, true),
        Outcome::TimedOut(None) => {
            return Err(SseError::Budget("backup MILP hit its time limit without an incumbent".into()))
        }
    };
    let mut values = values;
    if opts.polish && built.model.n_binaries() > 0 {
        let fixed = built.model.with_fixed_binaries(&values);
        if let Outcome::Optimal(a) = backend.solve(&fixed, &opts.solve)? {
            values = a.values;
        }
    }

    let mut best: Option<(LeaderRule, RuleEvaluation, f64)> = None;
    for snapped in [true, false] {
        let rule = read_rule(table, nl, &built.delta, &values, snapped);
        let ev = evaluate_rule(g, hist, table, next, &rule)?;
        let v = pick(&ev.member_values).leader;
        if best.as_ref().map_or(true, |b| v > b.2 + 1e-7) {
            best = Some((rule, ev, v));
        }
    }
    let (rule, ev, value) = best.expect("two candidates evaluated");
    Ok(Some(BackupSolution {
        target,
        rule,
        kappa: ev.kappa,
        w: ev.w,
        member_values: ev.member_values,
        value,
        milp_objective: objective,
        timed_out,
        audit: opts.keep_model.then(|| (built.model, values)),
    }))
}

/// The backup model alone, e.g. for LP export.
pub fn backup_model(
    g: &Game,
    hist: &Histories,
    table: &ConditionalTable,
    target: usize,
    next: &VectorSet,
    opts: &BackupOptions,
) -> MilpModel {
    let actions: Vec<Vec<Action>> = (0..table.conds.len())
        .map(|k| expand_actions(g, hist, table, next, k))
        .collect();
    build_model(g, table, target, next, &actions, opts).model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credible::CredibleSet;
    use crate::history::HistoryMode;
    use crate::milp::HighsBackend;

    #[test]
    fn big_m_examples() {
        let mut g = Game::new("g", vec!["a".into()], vec!["x".into()], vec!["u".into()], 0, 1.0, 3);
        g.set_transition(0, 0, 0, &[(0, 1.0)]);
        assert_eq!(big_m(&g), 1.0);
        g.set_reward_all(0, 0, 0, 1.0, -0.5);
        assert_eq!(big_m(&g), 7.0);
        g.set_reward_all(0, 0, 0, 4.0, 0.0);
        assert_eq!(big_m(&g.with_horizon(6)), 49.0);
    }

    #[test]
    fn single_member_picks_best_action() {
        // One state, two leader actions with leader rewards 1 and 3.
        let mut g = Game::new("g", vec!["a".into()], vec!["x".into(), "y".into()], vec!["u".into()], 0, 1.0, 1);
        for al in 0..2 {
            g.set_transition(0, al, 0, &[(0, 1.0)]);
        }
        g.set_reward_all(0, 0, 0, 1.0, 0.0);
        g.set_reward_all(0, 1, 0, 3.0, 0.0);
        let hist = Histories::new(HistoryMode::Full);
        let c = CredibleSet::initial(&g, &hist);
        let table = ConditionalTable::new(&c);
        let zero = VectorSet::zero(0, 1);
        let sol = greedy_backup_milp(&g, &hist, &table, 0, &zero, &HighsBackend, &BackupOptions::default())
            .unwrap()
            .unwrap();
        assert!((sol.value - 3.0).abs() < 1e-9);
        assert_eq!(sol.rule.rows.values().next().unwrap(), &vec![0.0, 1.0]);
    }

    #[test]
    fn commitment_mixes_to_keep_follower_indifferent() {
        // Classic 2x2 commitment game: leader mixes so the follower plays the
        // leader-preferred column.
        let mut g = Game::new(
            "g",
            vec!["s".into(), "end".into()],
            vec!["up".into(), "down".into()],
            vec!["left".into(), "right".into()],
            0,
            1.0,
            1,
        );
        let pay = [[(2.0, 1.0), (4.0, 0.0)], [(1.0, 0.0), (3.0, 2.0)]];
        for al in 0..2 {
            for af in 0..2 {
                for s in 0..2 {
                    g.set_transition(s, al, af, &[(1, 1.0)]);
                }
                g.set_reward_all(0, al, af, pay[al][af].0, pay[al][af].1);
            }
        }
        let hist = Histories::new(HistoryMode::Full);
        let c = CredibleSet::initial(&g, &hist);
        let table = ConditionalTable::new(&c);
        let zero = VectorSet::zero(0, 1);
        let opts = BackupOptions {
            keep_model: true,
            ..BackupOptions::default()
        };
        let sol = greedy_backup_milp(&g, &hist, &table, 0, &zero, &HighsBackend, &opts)
            .unwrap()
            .unwrap();
        // Follower indifferent at up = 2/3: leader gets 2/3·4 + 1/3·3 = 11/3.
        assert!((sol.value - 11.0 / 3.0).abs() < 1e-9, "{}", sol.value);
        assert_eq!(sol.kappa, vec![1]);
        let (model, values) = sol.audit.unwrap();
        assert!(model.check(&values, 1e-6).is_empty());
    }
}
