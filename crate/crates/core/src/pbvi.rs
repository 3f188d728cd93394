//! Point-based value iteration over sampled credible sets.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::credible::{filter, follower_rule_at, follower_rule_count, hausdorff_distance, CredibleSet};
use crate::error::{Result, SseError};
use crate::game::Game;
use crate::history::{HistId, Histories, HistoryMode};
use crate::milp::{backend_from_env, greedy_backup_milp, Backend, BackupOptions, BackupSolution, SolveOptions};
use crate::occupancy::{
    condition_on_follower, sorted_l1, tau_advance, FollowerPolicy, FollowerRule, LeaderPolicy, LeaderRule,
    OccupancyState, Point,
};
use crate::vectors::{build_vector_set, leader_value, set_value, ConditionalTable, VectorSet, TIE};

/// Root-value change below which an iteration counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// History-dependent leader.
    H,
    /// Stage-dependent Markov leader.
    S,
}

/// How expansion samples leader rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExpansionPolicy {
    /// Uniformly random pure rule per leader history.
    Pure,
    /// The uniform stochastic rule.
    Uniform,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub variant: Variant,
    pub expansion: ExpansionPolicy,
    pub epsilon_expand: f64,
    pub epsilon_prune: f64,
    pub max_credible_sets: usize,
    pub max_occupancy: usize,
    pub seed: u64,
    pub pool_size: usize,
    pub max_iterations: usize,
    pub budget: Option<Duration>,
    /// Follower rules per member enumerated exhaustively during expansion;
    /// beyond this many, rules are sampled.
    pub follower_rule_cap: u64,
    pub milp_time_limit: Option<Duration>,
    /// After the first sweep, also expand each sample with the rule of its
    /// best vector set.
    pub greedy_expansion: bool,
    /// Variant H only: seed every stage with the vector sets of a Markov
    /// solve, which are valid history-dependent continuations.
    pub markov_seed: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            variant: Variant::H,
            expansion: ExpansionPolicy::Uniform,
            epsilon_expand: 0.01,
            epsilon_prune: 1e-6,
            max_credible_sets: 1,
            max_occupancy: 5,
            seed: 0,
            pool_size: 1,
            max_iterations: 20,
            budget: None,
            follower_rule_cap: 256,
            milp_time_limit: None,
            greedy_expansion: false,
            markov_seed: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_expand > 0.0) || !(self.epsilon_prune >= 0.0) {
            return Err(SseError::Domain("thresholds must be positive".into()));
        }
        if self.max_credible_sets == 0 || self.max_occupancy == 0 || self.pool_size == 0 || self.max_iterations == 0 {
            return Err(SseError::Domain("caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub id: usize,
    pub set: CredibleSet,
}

/// Extracted leader policy, the recorded follower responses, and the root value.
#[derive(Debug, Clone)]
pub struct SsePolicy {
    pub leader: LeaderPolicy,
    pub follower: FollowerPolicy,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub game: String,
    pub horizon: usize,
    pub config: SolverConfig,
    pub root_values: Vec<f64>,
    pub sample_sizes: Vec<Vec<usize>>,
    pub vector_sets: Vec<usize>,
    pub vf_size: usize,
    pub wall_time_s: f64,
    pub budget_exhausted: bool,
}

#[derive(Debug)]
pub struct SolveResult {
    pub value: f64,
    pub history: Vec<f64>,
    pub policy: SsePolicy,
    pub lambda: Vec<Vec<Arc<VectorSet>>>,
    pub samples: Vec<Vec<Sample>>,
    pub histories: Arc<Histories>,
    pub budget_exhausted: bool,
    pub manifest: Manifest,
}

impl SolveResult {
    /// Total pairs across all stages, the terminal zero pair included.
    pub fn vf_size(&self) -> usize {
        vf_size(&self.lambda)
    }
}

pub fn vf_size(lambda: &[Vec<Arc<VectorSet>>]) -> usize {
    lambda.iter().flatten().map(|v| v.len()).sum()
}

/// Mutable solver state for one game.
pub struct Pbvi<'a> {
    pub g: &'a Game,
    pub cfg: SolverConfig,
    pub hist: Arc<Histories>,
    pub samples: Vec<Vec<Sample>>,
    pub lambda: Vec<Vec<Arc<VectorSet>>>,
    backend: Arc<dyn Backend>,
    backup: BackupOptions,
    next_sample: usize,
    next_set: usize,
}

fn stream(seed: u64, iteration: usize, stage: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iteration as u64) << 32) | stage as u64);
    rng
}

impl<'a> Pbvi<'a> {
    pub fn new(g: &'a Game, cfg: SolverConfig) -> Result<Self> {
        Pbvi::with_backend(g, cfg, Arc::from(backend_from_env()?))
    }

    pub fn with_backend(g: &'a Game, cfg: SolverConfig, backend: Arc<dyn Backend>) -> Result<Self> {
        cfg.validate()?;
        let mode = match cfg.variant {
            Variant::H => HistoryMode::Full,
            Variant::S => HistoryMode::Markov,
        };
        let hist = Arc::new(Histories::for_game(g, mode));
        let c0 = CredibleSet::initial(g, &hist);
        let mut samples = vec![Vec::new(); g.horizon + 1];
        samples[0].push(Sample { id: 0, set: c0 });
        let mut lambda = vec![Vec::new(); g.horizon + 1];
        lambda[g.horizon].push(Arc::new(VectorSet::zero(0, g.horizon)));
        let backup = BackupOptions {
            solve: SolveOptions {
                time_limit: cfg.milp_time_limit,
                ..SolveOptions::default()
            },
            ..BackupOptions::default()
        };
        Ok(Pbvi {
            g,
            cfg,
            hist,
            samples,
            lambda,
            backend,
            backup,
            next_sample: 1,
            next_set: 1,
        })
    }

    fn sample_leader_rule(&self, c: &CredibleSet, rng: &mut ChaCha8Rng) -> LeaderRule {
        let nl = self.g.n_leader_actions();
        let mut hs: Vec<HistId> = c.members.iter().flat_map(|o| o.leader_histories()).collect();
        hs.sort_unstable();
        hs.dedup();
        let mut rule = LeaderRule::new(c.stage);
        for h in hs {
            let row = match self.cfg.expansion {
                ExpansionPolicy::Uniform => vec![1.0 / nl as f64; nl],
                ExpansionPolicy::Pure => {
                    let mut r = vec![0.0; nl];
                    r[rng.gen_range(0..nl)] = 1.0;
                    r
                }
            };
            rule.rows.insert(h, row);
        }
        rule
    }

    fn follower_rules(&self, o: &OccupancyState, rng: &mut ChaCha8Rng) -> Vec<FollowerRule> {
        let cap = self.cfg.follower_rule_cap;
        let count = follower_rule_count(self.g, o);
        if count <= cap {
            let mut idx: Vec<u64> = (0..count).collect();
            idx.shuffle(rng);
            idx.into_iter().map(|i| follower_rule_at(self.g, o, i)).collect()
        } else {
            let nf = self.g.n_follower_actions();
            (0..cap)
                .map(|_| {
                    let mut r = FollowerRule::new(o.stage);
                    for h in o.follower_histories() {
                        r.actions.insert(h, rng.gen_range(0..nf));
                    }
                    r
                })
                .collect()
        }
    }

    /// Successor credible set under `rule`, keeping members that add a novel
    /// conditional, up to the occupancy cap.
    fn successor(&self, c: &CredibleSet, rule: &LeaderRule, rng: &mut ChaCha8Rng) -> Result<CredibleSet> {
        let per_member: Vec<Vec<FollowerRule>> = c.members.iter().map(|o| self.follower_rules(o, rng)).collect();
        let rounds = per_member.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut admitted: Vec<Vec<(Point, f64)>> = Vec::new();
        let mut members: Vec<OccupancyState> = Vec::new();
        'outer: for r in 0..rounds {
            for (o, rules) in c.members.iter().zip(&per_member) {
                let Some(df) = rules.get(r) else { continue };
                let o2 = tau_advance(self.g, &self.hist, o, rule, df)?;
                let conds = condition_on_follower(&o2);
                let novel = conds.iter().any(|oc| {
                    admitted
                        .iter()
                        .all(|a| sorted_l1(a, &oc.support) > self.cfg.epsilon_expand)
                });
                if novel {
                    admitted.extend(conds.into_iter().map(|oc| oc.support));
                    members.push(o2);
                    if members.len() >= self.cfg.max_occupancy {
                        break 'outer;
                    }
                }
            }
        }
        members.sort_by(crate::credible::canonical_cmp);
        let mut leader_rules = c.leader_rules.clone();
        leader_rules.push(Arc::new(rule.clone()));
        let set = CredibleSet {
            stage: c.stage + 1,
            members,
            leader_rules,
        };
        Ok(match self.cfg.variant {
            Variant::S => filter(self.g, &set),
            Variant::H => set,
        })
    }

    /// The rule of the best vector set at `c`, read at each member history
    /// through the set's domain.
    fn greedy_rule(&self, t: usize, c: &CredibleSet) -> Result<Option<LeaderRule>> {
        if self.lambda[t].is_empty() {
            return Ok(None);
        }
        let best = leader_value(self.g, &self.hist, &self.lambda[t], c)?;
        let gamma = &self.lambda[t][best.set];
        let Some(src) = gamma.rule.as_ref() else { return Ok(None) };
        let mut rule = LeaderRule::new(t);
        for o in &c.members {
            for h in o.leader_histories() {
                let x = Point {
                    state: self.hist.leader.state(h) as u32,
                    hl: h,
                };
                let Some(i) = gamma.locate(&self.hist.leader, x) else { return Ok(None) };
                rule.rows.insert(h, src.row(gamma.domain()[i].hl)?.to_vec());
            }
        }
        Ok(Some(rule))
    }

    /// Expansion from stage `t` into stage `t + 1`.
    pub fn expand(&mut self, t: usize, iteration: usize) -> Result<usize> {
        let mut rng = stream(self.cfg.seed, iteration, t);
        let sources: Vec<CredibleSet> = self.samples[t].iter().map(|s| s.set.clone()).collect();
        let mut proposals: Vec<(CredibleSet, LeaderRule)> = Vec::new();
        if self.cfg.greedy_expansion && iteration > 0 {
            for c in &sources {
                if let Some(rule) = self.greedy_rule(t, c)? {
                    proposals.push((c.clone(), rule));
                }
            }
        }
        for c in &sources {
            let rule = self.sample_leader_rule(c, &mut rng);
            proposals.push((c.clone(), rule));
        }
        let mut added = 0;
        for (c, rule) in &proposals {
            if self.samples[t + 1].len() >= self.cfg.max_credible_sets {
                log::debug!("stage {} reached its cap of {} credible sets", t + 1, self.cfg.max_credible_sets);
                break;
            }
            let next = self.successor(c, rule, &mut rng)?;
            if next.is_empty() {
                continue;
            }
            let mut novel = true;
            for s in &self.samples[t + 1] {
                if hausdorff_distance(&s.set, &next)? <= self.cfg.epsilon_expand {
                    novel = false;
                    break;
                }
            }
            if novel {
                self.samples[t + 1].push(Sample {
                    id: self.next_sample,
                    set: next,
                });
                self.next_sample += 1;
                added += 1;
            }
        }
        Ok(added)
    }

    /// Interns every history a backup at stage `t` can reach, so parallel
    /// backups only read the tables.
    fn pre_intern(&self, tables: &[ConditionalTable]) {
        let g = self.g;
        for table in tables {
            for x in &table.domain {
                let s = x.state as usize;
                for al in 0..g.n_leader_actions() {
                    for af in 0..g.n_follower_actions() {
                        for &(s2, _) in g.successors(s, al, af) {
                            self.hist.leader.extend(x.hl, al, s2);
                        }
                    }
                }
            }
        }
    }

    fn best_backup(&self, table: &ConditionalTable, next: &[Arc<VectorSet>]) -> Result<(BackupSolution, usize)> {
        let mut best: Option<(BackupSolution, usize)> = None;
        for (gi, gamma) in next.iter().enumerate() {
            for target in 0..table.members.len() {
                let sol = greedy_backup_milp(self.g, &self.hist, table, target, gamma.as_ref(), self.backend.as_ref(), &self.backup)?;
                if let Some(sol) = sol {
                    if best.as_ref().map_or(true, |b| sol.value > b.0.value + TIE) {
                        best = Some((sol, gi));
                    }
                }
            }
        }
        best.ok_or_else(|| {
            SseError::Contract(format!(
                "no member of a stage-{} credible set admits a feasible backup",
                table.stage
            ))
        })
    }

    /// One backup per sample at stage `t`, appended to `Λ_t`.
    pub fn backup_stage(&mut self, t: usize) -> Result<()> {
        let next = self.lambda[t + 1].clone();
        let tables: Vec<ConditionalTable> = self.samples[t].iter().map(|s| ConditionalTable::new(&s.set)).collect();
        self.pre_intern(&tables);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.pool_size)
            .build()
            .map_err(|e| SseError::Solver(e.to_string()))?;
        let this = &*self;
        let results: Vec<Result<(BackupSolution, usize)>> =
            pool.install(|| tables.par_iter().map(|table| this.best_backup(table, &next)).collect());
        for ((table, sample), res) in tables.iter().zip(self.samples[t].clone()).zip(results) {
            let (sol, gi) = res?;
            let gamma = build_vector_set(
                self.g,
                &self.hist,
                self.next_set,
                Some(sample.id),
                table,
                Arc::new(sol.rule),
                &sol.kappa,
                &sol.w,
                next[gi].clone(),
            )?;
            self.next_set += 1;
            let check = set_value(self.g, &self.hist, &gamma, &sample.set)?.0;
            if (check - sol.value).abs() > 1e-6 {
                log::debug!(
                    "stage {t} sample {}: backup value {} but vector set gives {check}",
                    sample.id,
                    sol.value
                );
            }
            self.lambda[t].push(Arc::new(gamma));
        }
        Ok(())
    }

    /// Keeps the vector sets that attain the value at some sample, plus those
    /// referenced by kept sets one stage up.
    pub fn bounded_pruning(&mut self) -> Result<()> {
        let mut referenced: Vec<usize> = Vec::new();
        for t in 0..self.g.horizon {
            let mut keep = vec![false; self.lambda[t].len()];
            for s in &self.samples[t] {
                if self.lambda[t].is_empty() {
                    break;
                }
                keep[leader_value(self.g, &self.hist, &self.lambda[t], &s.set)?.set] = true;
            }
            for (k, v) in self.lambda[t].iter().enumerate() {
                if referenced.contains(&v.id) {
                    keep[k] = true;
                }
            }
            let kept: Vec<Arc<VectorSet>> = self.lambda[t]
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(v, _)| v.clone())
                .collect();
            referenced = kept.iter().filter_map(|v| v.next.as_ref().map(|n| n.id)).collect();
            self.lambda[t] = kept;
        }
        Ok(())
    }

    /// Drops samples whose value is matched within `epsilon_prune` by an
    /// earlier kept sample's best vector set.
    pub fn prune_uncredible(&mut self) -> Result<()> {
        for t in 1..self.g.horizon {
            if self.lambda[t].is_empty() {
                continue;
            }
            let mut kept: Vec<(Sample, usize)> = Vec::new();
            let mut samples = self.samples[t].clone();
            samples.sort_by_key(|s| s.id);
            for s in samples {
                let own = leader_value(self.g, &self.hist, &self.lambda[t], &s.set)?;
                let mut distinct = true;
                for (_, set) in &kept {
                    let other = set_value(self.g, &self.hist, &self.lambda[t][*set], &s.set)?.0;
                    if (own.value - other).abs() <= self.cfg.epsilon_prune {
                        distinct = false;
                        break;
                    }
                }
                if distinct {
                    kept.push((s, own.set));
                }
            }
            self.samples[t] = kept.into_iter().map(|k| k.0).collect();
        }
        Ok(())
    }

    pub fn root_value(&self) -> Result<f64> {
        Ok(leader_value(self.g, &self.hist, &self.lambda[0], &self.samples[0][0].set)?.value)
    }

    /// Adds the non-terminal vector sets of a Markov solve to every stage.
    fn seed_with_markov(&mut self) -> Result<()> {
        let cfg = SolverConfig {
            variant: Variant::S,
            markov_seed: false,
            ..self.cfg.clone()
        };
        let markov = Pbvi::with_backend(self.g, cfg, self.backend.clone())?.solve()?;
        let mut top = 0;
        for t in 0..self.g.horizon {
            for v in &markov.lambda[t] {
                top = top.max(v.id);
                self.lambda[t].push(v.clone());
            }
        }
        self.next_set = self.next_set.max(top + 1);
        Ok(())
    }

    /// Runs expand / backup / prune until the root value settles.
    pub fn solve(mut self) -> Result<SolveResult> {
        let start = Instant::now();
        let l = self.g.horizon;
        if self.cfg.variant == Variant::H && self.cfg.markov_seed {
            self.seed_with_markov()?;
        }
        let mut history = Vec::new();
        let mut budget_exhausted = false;
        let over = |start: &Instant, cfg: &SolverConfig| cfg.budget.is_some_and(|b| start.elapsed() > b);
        'iterations: for iteration in 0..self.cfg.max_iterations {
            for t in 0..l.saturating_sub(1) {
                self.expand(t, iteration)?;
            }
            for t in (0..l).rev() {
                if over(&start, &self.cfg) && !self.lambda[0].is_empty() {
                    budget_exhausted = true;
                    break 'iterations;
                }
                self.backup_stage(t)?;
            }
            history.push(self.root_value()?);
            self.bounded_pruning()?;
            self.prune_uncredible()?;
            log::info!("iteration {iteration}: root value {}", history.last().unwrap());
            let n = history.len();
            if n >= 2 && (history[n - 1] - history[n - 2]).abs() < CONVERGENCE_TOL {
                break;
            }
            if over(&start, &self.cfg) {
                budget_exhausted = true;
                break;
            }
        }
        if self.lambda[0].is_empty() {
            return Err(SseError::Budget("budget ran out before the first backup completed".into()));
        }
        let value = self.root_value()?;
        let policy = extract_policy(self.g, &self.hist, &self.lambda, self.cfg.variant == Variant::S)?;
        let manifest = Manifest {
            game: self.g.name.clone(),
            horizon: l,
            config: self.cfg.clone(),
            root_values: history.clone(),
            sample_sizes: self.samples.iter().map(|s| s.iter().map(|x| x.set.len()).collect()).collect(),
            vector_sets: self.lambda.iter().map(|v| v.len()).collect(),
            vf_size: vf_size(&self.lambda),
            wall_time_s: start.elapsed().as_secs_f64(),
            budget_exhausted,
        };
        Ok(SolveResult {
            value,
            history,
            policy,
            lambda: self.lambda,
            samples: self.samples,
            histories: self.hist,
            budget_exhausted,
            manifest,
        })
    }
}

/// Solves with the backend selected by the environment.
pub fn solve_sse(g: &Game, cfg: SolverConfig) -> Result<SolveResult> {
    Pbvi::new(g, cfg)?.solve()
}

/// Unrolls the root-maximizing vector set into a leader policy over full
/// histories and the follower responses recorded in the backpointers.
pub fn extract_policy(g: &Game, hist: &Histories, lambda: &[Vec<Arc<VectorSet>>], markov_only: bool) -> Result<SsePolicy> {
    let c0 = CredibleSet::initial(g, hist);
    let root = leader_value(g, hist, &lambda[0], &c0)?;
    let mut chain: Vec<Arc<VectorSet>> = vec![lambda[0][root.set].clone()];
    for t in 1..g.horizon {
        let next = chain[t - 1]
            .next
            .clone()
            .ok_or_else(|| SseError::Contract(format!("vector set at stage {} has no successor", t - 1)))?;
        chain.push(next);
    }

    let eval = Arc::new(Histories::new(HistoryMode::Full));
    // Representative point of each evaluation leader history.
    let mut reps: HashMap<HistId, Option<Point>> = HashMap::new();
    let nl = g.n_leader_actions();
    let rep_of = |reps: &mut HashMap<HistId, Option<Point>>, t: usize, h: HistId| -> Option<Point> {
        if let Some(r) = reps.get(&h) {
            return *r;
        }
        let s = eval.leader.state(h);
        let raw = match eval.leader.parent(h) {
            None => Some(Point {
                state: s as u32,
                hl: hist.leader.root(s),
            }),
            Some(p) => {
                let (_, actions) = eval.leader.path(h);
                let a = *actions.last().expect("non-root history has an action");
                reps.get(&p).copied().flatten().map(|rp| Point {
                    state: s as u32,
                    hl: if chain[t - 1].is_markov() {
                        rp.hl
                    } else {
                        hist.leader.extend(rp.hl, a, s)
                    },
                })
            }
        };
        let rep = raw.and_then(|x| chain[t].locate(&hist.leader, x).map(|i| chain[t].domain()[i]));
        reps.insert(h, rep);
        rep
    };
    let leader = LeaderPolicy::materialize(g, eval.clone(), markov_only, |t, h| {
        let rule = chain[t]
            .rule
            .as_ref()
            .ok_or_else(|| SseError::Contract(format!("vector set at stage {t} has no rule")))?;
        Ok(match rep_of(&mut reps, t, h) {
            Some(x) => rule.row(x.hl)?.to_vec(),
            None => {
                let mut row = vec![0.0; nl];
                row[0] = 1.0;
                row
            }
        })
    })?;

    // Follower: follow the pointers from the root pair.
    let mut o = OccupancyState::initial(g, &eval);
    let mut pointer: HashMap<HistId, usize> = HashMap::new();
    let mut follower_rules = Vec::with_capacity(g.horizon);
    for t in 0..g.horizon {
        let gamma = &chain[t];
        let mut rule = FollowerRule::new(t);
        for oc in condition_on_follower(&o) {
            let support: Vec<(Point, f64)> = oc
                .support
                .iter()
                .filter_map(|&(x, p)| reps.get(&x.hl).copied().flatten().map(|r| (r, p)))
                .collect();
            let chosen = match pointer.get(&oc.hf) {
                Some(&k) => k,
                None => gamma.select(&hist.leader, &support)?.index,
            };
            let pair = gamma
                .pairs
                .get(chosen)
                .ok_or_else(|| SseError::Contract(format!("dangling pair {chosen} at stage {t}")))?;
            let back = pair
                .back
                .as_ref()
                .ok_or_else(|| SseError::Contract(format!("pair {chosen} at stage {t} has no backpointer")))?;
            rule.actions.insert(oc.hf, back.action);
            for (s2, succ) in back.successors.iter().enumerate() {
                if let Some(j) = *succ {
                    if t + 1 < g.horizon && j >= chain[t + 1].pairs.len() {
                        return Err(SseError::Contract(format!("dangling successor {j} at stage {}", t + 1)));
                    }
                    let h2 = eval.follower.extend(oc.hf, back.action, s2);
                    pointer.insert(h2, j);
                }
            }
        }
        o = tau_advance(g, &eval, &o, &leader.rules[t], &rule)?;
        follower_rules.push(rule);
    }
    Ok(SsePolicy {
        leader,
        follower: FollowerPolicy {
            histories: eval,
            rules: follower_rules,
        },
        value: root.value,
    })
}

/// `2mσ/(1−γ)²·[1 + ℓγ^{ℓ+1} − (ℓ+1)γ^ℓ]`.
///
/// The bracket over `(1−γ)²` equals `Σ_{k=1}^{ℓ} k·γ^{k−1}`, which is summed
/// directly to avoid the cancellation of the closed form near `γ = 1`.
pub fn exploitability_bound(m: f64, gamma: f64, horizon: usize, sigma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(SseError::Domain(format!("the bound needs 0 < gamma < 1, got {gamma}")));
    }
    if !(m >= 0.0) || !(sigma >= 0.0) {
        return Err(SseError::Domain("m and sigma must be nonnegative".into()));
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    for k in 1..=horizon {
        sum += k as f64 * power;
        power *= gamma;
    }
    Ok(2.0 * m * sigma * sum)
}
