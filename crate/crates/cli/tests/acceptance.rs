//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sse_core::baselines::{best_response, check_capacity, DEFAULT_CAP};
use sse_core::credible::{credible_transition, filter, terminal_reward, CredibleSet};
use sse_core::milp::{backend_from_env, greedy_backup_milp, BackupOptions};
use sse_core::occupancy::{LeaderPolicy, LeaderRule};
use sse_core::pbvi::exploitability_bound;
use sse_core::vectors::{ConditionalTable, VectorSet};
use sse_core::{benchmarks, Game, Histories, HistoryMode, Player};

const HORIZONS: [usize; 4] = [1, 2, 3, 6];

const GOLDEN_H: [(&str, [f64; 4]); 5] = [
    ("centipede", [1.0, 1.0, 2.0, 4.67]),
    ("match", [-1000.0, -1000.0, 0.0, 0.0]),
    ("dec-tiger", [20.0, 40.0, 60.0, 120.0]),
    ("mabc", [1.0, 2.0, 2.99, 5.93]),
    ("patrolling", [0.0, 0.0, 0.0, 0.0]),
];

const GOLDEN_S: [(&str, [f64; 4]); 5] = [
    ("centipede", [1.0, 1.0, 2.0, 4.67]),
    ("match", [-1000.0, -1000.0, -1000.0, -2000.0]),
    ("dec-tiger", [20.0, 40.0, 60.0, 120.0]),
    ("mabc", [1.0, 2.0, 2.99, 5.93]),
    ("patrolling", [0.0, 0.0, 0.0, 0.0]),
];

/// Published value-function sizes (H, S) at horizons 1, 2, 3, 6.
const PAPER_VF: [(&str, [(usize, usize); 4]); 5] = [
    ("centipede", [(2, 2), (4, 3), (4, 4), (9, 7)]),
    ("match", [(2, 2), (3, 3), (4, 4), (7, 7)]),
    ("dec-tiger", [(2, 2), (4, 3), (6, 4), (12, 7)]),
    ("mabc", [(2, 2), (4, 3), (7, 4), (74, 7)]),
    ("patrolling", [(2, 2), (6, 3), (9, 4), (39, 7)]),
];

struct Report {
    lines: Vec<(String, bool, String)>,
}

impl Report {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        println!("{name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        self.lines.push((name.to_string(), ok, detail));
    }
}

#[derive(Debug, Clone)]
struct CsvRow {
    value: Option<f64>,
    vf_size: Option<usize>,
    status: String,
}

type Table = BTreeMap<(String, usize, String), CsvRow>;

fn parse_csv(text: &str) -> Table {
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("benchmark,horizon,method,value,time_s,vf_size,exploitability,status")
    );
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 8, "malformed row {l}");
            (
                (f[0].to_string(), f[1].parse().unwrap(), f[2].to_string()),
                CsvRow {
                    value: f[3].parse().ok(),
                    vf_size: f[5].parse().ok(),
                    status: f[7].to_string(),
                },
            )
        })
        .collect()
}

fn value(t: &Table, b: &str, h: usize, m: &str) -> Option<f64> {
    t.get(&(b.to_string(), h, m.to_string())).and_then(|r| r.value)
}

fn run_bench(out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sse"))
        .args(["bench", "--suite", "table1", "--seed", "7", "--out"])
        .arg(out)
        .output()
        .expect("sse binary runs")
}

fn golden(report: &mut Report, name: &str, t: &Table, method: &str, table: &[(&str, [f64; 4])]) {
    let mut worst = 0.0_f64;
    let mut misses = Vec::new();
    for (b, want) in table {
        for (i, &h) in HORIZONS.iter().enumerate() {
            match value(t, b, h, method) {
                Some(v) => {
                    let d = (v - want[i]).abs();
                    worst = worst.max(d);
                    if d > 0.02 {
                        misses.push(format!("{b} {h}: {v} vs {}", want[i]));
                    }
                }
                None => misses.push(format!("{b} {h}: missing")),
            }
        }
    }
    let detail = if misses.is_empty() {
        format!("20 cells, max deviation {worst:.4}")
    } else {
        misses.join("; ")
    };
    report.record(name, misses.is_empty(), detail);
}

fn stored_policy(dir: &Path, b: &str, h: usize, m: &str) -> Option<LeaderPolicy> {
    let text = fs::read_to_string(dir.join("policies").join(format!("{b}-{h}-{m}.json"))).ok()?;
    LeaderPolicy::from_json(&serde_json::from_str(&text).ok()?).ok()
}

fn criterion3(report: &mut Report, t: &Table, dir: &Path) {
    let mut problems = Vec::new();
    let mut worst = 0.0_f64;
    for (b, want) in [("centipede", 1.0), ("match", -1000.0)] {
        for m in ["BI", "MY"] {
            match value(t, b, 3, m) {
                Some(v) if (v - want).abs() <= 1e-6 => {}
                other => problems.push(format!("{m} on {b}: {other:?}")),
            }
        }
        let g = benchmarks::build(b, 3).unwrap();
        let claimed = value(t, b, 3, "H");
        match (stored_policy(dir, b, 3, "H"), claimed) {
            (Some(p), Some(v)) => {
                let e = (v - best_response(&g, &p).unwrap().value_leader).abs();
                worst = worst.max(e);
                if e > 1e-6 {
                    problems.push(format!("H on {b} exploitable by {e}"));
                }
            }
            _ => problems.push(format!("H policy for {b} missing")),
        }
    }
    let detail = if problems.is_empty() {
        format!("BI = MY = 1 and -1000; H exploitability {worst:.1e}")
    } else {
        problems.join("; ")
    };
    report.record("criterion 3 (Markov baselines fail, H unexploitable)", problems.is_empty(), detail);
}

fn criterion4(report: &mut Report, t: &Table) {
    let mut problems = Vec::new();
    let mut worst = 0.0_f64;
    for b in benchmarks::NAMES {
        for h in [1, 2] {
            let vals: Vec<Option<f64>> = ["H", "S", "LP", "MILP"].iter().map(|m| value(t, b, h, m)).collect();
            if vals.iter().any(Option::is_none) {
                problems.push(format!("{b} {h}: missing value"));
                continue;
            }
            let v: Vec<f64> = vals.into_iter().flatten().collect();
            for x in &v[1..] {
                worst = worst.max((x - v[0]).abs());
            }
        }
        for h in HORIZONS {
            let g = benchmarks::build(b, h).unwrap();
            let capped = check_capacity(&g, DEFAULT_CAP).is_err();
            if capped != (h >= 3) {
                problems.push(format!("{b} {h}: cap exceeded = {capped}"));
            }
            for m in ["LP", "MILP"] {
                let status = t.get(&(b.to_string(), h, m.to_string())).map(|r| r.status.as_str());
                let want = if h >= 3 { "capacity" } else { "ok" };
                if status != Some(want) {
                    problems.push(format!("{b} {h} {m}: status {status:?}"));
                }
            }
        }
    }
    if worst > 1e-6 {
        problems.push(format!("solvers disagree by {worst}"));
    }
    let detail = if problems.is_empty() {
        format!("max spread {worst:.1e}; cap hit exactly at horizon >= 3")
    } else {
        problems.join("; ")
    };
    report.record("criterion 4 (H = S = LP = MILP at horizons 1-2)", problems.is_empty(), detail);
}

fn criterion9(report: &mut Report, t: &Table) {
    let mut problems = Vec::new();
    let mut ours = Vec::new();
    for (b, sizes) in PAPER_VF {
        for (i, &h) in HORIZONS.iter().enumerate() {
            for (m, paper) in [("H", sizes[i].0), ("S", sizes[i].1)] {
                match t.get(&(b.to_string(), h, m.to_string())).and_then(|r| r.vf_size) {
                    Some(n) if n >= 1 && n <= 4 * paper => {
                        if h == 6 && m == "H" {
                            ours.push(format!("{b} {n}/{paper}"));
                        }
                    }
                    other => problems.push(format!("{b} {h} {m}: {other:?} vs {paper}")),
                }
            }
        }
    }
    let ok = problems.is_empty();
    let detail = if ok {
        format!("horizon 6 H sizes {}", ours.join(", "))
    } else {
        problems.join("; ")
    };
    report.record("criterion 9 (value-function size within 4x)", ok, detail);
}

// Filtering losslessness.

fn random_game(rng: &mut ChaCha8Rng, ns: usize, nl: usize, nf: usize, horizon: usize) -> Game {
    let names = |p: &str, n: usize| (0..n).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
    let mut g = Game::new("random", names("s", ns), names("a", nl), names("b", nf), 0, 1.0, horizon);
    for s in 0..ns {
        for al in 0..nl {
            for af in 0..nf {
                let s2 = rng.gen_range(0..ns);
                if ns > 1 && rng.gen_bool(0.25) {
                    let s3 = (s2 + rng.gen_range(1..ns)) % ns;
                    let p = [0.25, 0.5, 0.75][rng.gen_range(0..3)];
                    g.set_transition(s, al, af, &[(s2, p), (s3, 1.0 - p)]);
                } else {
                    g.set_transition(s, al, af, &[(s2, 1.0)]);
                }
                for s2 in 0..ns {
                    let rl = rng.gen_range(-3..=3) as f64;
                    let rf = rng.gen_range(-3..=3) as f64;
                    g.set_reward(s, al, af, s2, rl, rf);
                }
            }
        }
    }
    g
}

fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    if rng.gen_bool(0.5) {
        let mut row = vec![0.0; n];
        row[rng.gen_range(0..n)] = 1.0;
        return row;
    }
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=4) as f64).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

fn markov_rule(hist: &Histories, sets: &[&CredibleSet], dist: &[Vec<f64>]) -> LeaderRule {
    let mut rule = LeaderRule::new(sets[0].stage);
    for c in sets {
        for o in &c.members {
            for hl in o.leader_histories() {
                rule.rows.insert(hl, dist[hist.leader.state(hl)].clone());
            }
        }
    }
    rule
}

/// Terminal rewards with and without filtering, or `None` if unfiltered
/// enumeration is too large.
fn lossless_instance(rng: &mut ChaCha8Rng) -> Option<(f64, f64, usize)> {
    let ns = rng.gen_range(1..=4);
    let nl = rng.gen_range(1..=3);
    let nf = rng.gen_range(1..=3);
    let horizon = rng.gen_range(1..=4);
    let g = random_game(rng, ns, nl, nf, horizon);
    let hist = Histories::new(HistoryMode::Full);
    let mut plain = CredibleSet::initial(&g, &hist);
    let mut filtered = plain.clone();
    for _ in 0..horizon {
        let dist: Vec<Vec<f64>> = (0..ns).map(|_| random_row(rng, nl)).collect();
        let rule = markov_rule(&hist, &[&plain, &filtered], &dist);
        plain = credible_transition(&g, &hist, &plain, &rule, 1 << 12).ok()?;
        if plain.len() > 20_000 {
            return None;
        }
        filtered = filter(&g, &credible_transition(&g, &hist, &filtered, &rule, 1 << 12).ok()?);
    }
    Some((terminal_reward(&g, &plain), terminal_reward(&g, &filtered), horizon))
}

fn criterion5(report: &mut Report) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut accepted, mut drawn, mut worst) = (0, 0, 0.0_f64);
    let mut by_horizon = [0usize; 5];
    let mut failures = Vec::new();
    while accepted < 200 && drawn < 100_000 {
        drawn += 1;
        if let Some((a, b, h)) = lossless_instance(&mut rng) {
            accepted += 1;
            by_horizon[h] += 1;
            let d = (a - b).abs();
            worst = worst.max(d);
            if d > 1e-9 {
                failures.push(format!("instance {drawn}: {a} vs {b}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = accepted == 200 && failures.is_empty() && secs <= 60.0;
    let detail = format!(
        "{accepted} policies ({drawn} drawn), per horizon 1-4 {:?}, max gap {worst:.1e}, {secs:.1}s{}",
        &by_horizon[1..],
        if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
    );
    report.record("criterion 5 (filtering is lossless)", ok, detail);
}

// MILP backup against a brute-force oracle.

/// Affine function of the rule coordinates: constant plus one slope per coordinate.
#[derive(Clone, Debug)]
struct Affine(Vec<f64>);

impl Affine {
    fn at(&self, x: &[f64]) -> f64 {
        self.0[0] + x.iter().zip(&self.0[1..]).map(|(a, b)| a * b).sum::<f64>()
    }

    fn sub(&self, o: &Affine) -> Affine {
        Affine(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

struct Oracle {
    /// Per member: `ρ` and per follower history, per follower action, affine `(q_L, q_F)`.
    members: Vec<((f64, f64), Vec<Vec<(Affine, Affine)>>)>,
    coords: Vec<u32>,
}

const ORACLE_TIE: f64 = 1e-7;

fn lexi_best(options: &[(f64, f64)]) -> (f64, f64) {
    let f = options.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    let l = options
        .iter()
        .filter(|o| o.1 >= f - ORACLE_TIE)
        .map(|o| o.0)
        .fold(f64::NEG_INFINITY, f64::max);
    (l, f)
}

impl Oracle {
    /// Two leader actions per history; coordinate `i` is the probability of
    /// action 1 at leader history `coords[i]`.
    fn new(g: &Game, c: &CredibleSet) -> Oracle {
        let mut coords = BTreeSet::new();
        for o in &c.members {
            coords.extend(o.leader_histories());
        }
        let coords: Vec<u32> = coords.into_iter().collect();
        let d = coords.len();
        let nf = g.n_follower_actions();
        let members = c
            .members
            .iter()
            .map(|o| {
                let mut per_hf: BTreeMap<u32, Vec<(Affine, Affine)>> = BTreeMap::new();
                for &(tr, mass) in o.entries() {
                    let i = coords.iter().position(|&h| h == tr.hl).unwrap();
                    let e = per_hf
                        .entry(tr.hf)
                        .or_insert_with(|| vec![(Affine(vec![0.0; d + 1]), Affine(vec![0.0; d + 1])); nf]);
                    let s = tr.state as usize;
                    for (af, slot) in e.iter_mut().enumerate() {
                        for al in 0..2 {
                            let (mut rl, mut rf) = (0.0, 0.0);
                            for s2 in 0..g.n_states() {
                                let p = g.p(s, al, af, s2);
                                rl += p * g.reward(Player::Leader, s, al, af, s2);
                                rf += p * g.reward(Player::Follower, s, al, af, s2);
                            }
                            // weight 1 − x for action 0 and x for action 1
                            let sign = if al == 0 { -1.0 } else { 1.0 };
                            if al == 0 {
                                slot.0 .0[0] += mass * rl;
                                slot.1 .0[0] += mass * rf;
                            }
                            slot.0 .0[i + 1] += sign * mass * rl;
                            slot.1 .0[i + 1] += sign * mass * rf;
                        }
                    }
                }
                (o.rho_pair(), per_hf.into_values().collect())
            })
            .collect();
        Oracle { members, coords }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let vals: Vec<(f64, f64)> = self
            .members
            .iter()
            .map(|(rho, hfs)| {
                hfs.iter().fold(*rho, |acc, opts| {
                    let o: Vec<(f64, f64)> = opts.iter().map(|(l, f)| (l.at(x), f.at(x))).collect();
                    let best = lexi_best(&o);
                    (acc.0 + best.0, acc.1 + best.1)
                })
            })
            .collect();
        lexi_best(&vals).0
    }

    /// Every affine function whose zero set can bound a piece of the value.
    fn breakpoints(&self, nf: usize) -> Vec<Affine> {
        let d = self.coords.len();
        let mut lines = Vec::new();
        for i in 0..d {
            let mut e = vec![0.0; d + 1];
            e[i + 1] = 1.0;
            lines.push(Affine(e.clone()));
            e[0] = -1.0;
            lines.push(Affine(e));
        }
        // Follower indifference inside one history.
        for (_, hfs) in &self.members {
            for opts in hfs {
                for a in 0..nf {
                    for b in a + 1..nf {
                        lines.push(opts[a].1.sub(&opts[b].1));
                    }
                }
            }
        }
        // Follower indifference between members, for every response pattern.
        let totals: Vec<Vec<Affine>> = self
            .members
            .iter()
            .map(|(rho, hfs)| {
                let mut acc = vec![{
                    let mut c = vec![0.0; d + 1];
                    c[0] = rho.1;
                    Affine(c)
                }];
                for opts in hfs {
                    acc = acc
                        .iter()
                        .flat_map(|base| {
                            opts.iter().map(move |(_, f)| Affine(base.0.iter().zip(&f.0).map(|(a, b)| a + b).collect()))
                        })
                        .collect();
                }
                acc
            })
            .collect();
        for i in 0..totals.len() {
            for j in i + 1..totals.len() {
                for a in &totals[i] {
                    for b in &totals[j] {
                        lines.push(a.sub(b));
                    }
                }
            }
        }
        lines
    }

    /// Grid points plus every vertex of the breakpoint arrangement in the box.
    fn best(&self, nf: usize) -> f64 {
        let d = self.coords.len();
        let mut cands: Vec<Vec<f64>> = Vec::new();
        let steps = if d == 1 { 100 } else { 20 };
        let grid: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
        if d == 1 {
            cands.extend(grid.iter().map(|&x| vec![x]));
        } else {
            for &x in &grid {
                for &y in &grid {
                    cands.push(vec![x, y]);
                }
            }
        }
        let lines = self.breakpoints(nf);
        let inside = |x: &[f64]| x.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v));
        if d == 1 {
            for l in &lines {
                if l.0[1].abs() > 1e-12 {
                    cands.push(vec![-l.0[0] / l.0[1]]);
                }
            }
        } else {
            for (i, a) in lines.iter().enumerate() {
                for b in &lines[i + 1..] {
                    let det = a.0[1] * b.0[2] - a.0[2] * b.0[1];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = (-a.0[0] * b.0[2] + a.0[2] * b.0[0]) / det;
                    let y = (-a.0[1] * b.0[0] + a.0[0] * b.0[1]) / det;
                    cands.push(vec![x, y]);
                }
            }
        }
        cands
            .into_iter()
            .filter(|x| inside(x))
            .map(|x| x.into_iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<_>>())
            .map(|x| self.value(&x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn tiny_backup_instance(rng: &mut ChaCha8Rng, k: usize) -> (Game, CredibleSet, Histories) {
    let nf = rng.gen_range(2..=3);
    let g = random_game(rng, 2, 2, nf, 2);
    let hist = Histories::new(HistoryMode::Full);
    let root = CredibleSet::initial(&g, &hist);
    if k % 2 == 0 {
        return (g.with_horizon(1), root, hist);
    }
    let mut rule = LeaderRule::new(0);
    let mut row = vec![0.0; 2];
    row[rng.gen_range(0..2)] = 1.0;
    rule.rows.insert(hist.leader.root(0), row);
    let c = credible_transition(&g, &hist, &root, &rule, 1 << 12).unwrap();
    (g, c, hist)
}

fn criterion6(report: &mut Report) {
    let backend = backend_from_env().expect("backend");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    let mut problems = Vec::new();
    for k in 0..50 {
        let (g, c, hist) = tiny_backup_instance(&mut rng, k);
        let table = ConditionalTable::new(&c);
        let next = VectorSet::zero(0, c.stage + 1);
        let mut milp = f64::NEG_INFINITY;
        for target in 0..c.len() {
            let sol = greedy_backup_milp(&g, &hist, &table, target, &next, backend.as_ref(), &BackupOptions::default())
                .expect("backup solves");
            if let Some(s) = sol {
                milp = milp.max(s.value);
            }
        }
        let oracle = Oracle::new(&g, &c).best(g.n_follower_actions());
        let d = (milp - oracle).abs();
        worst = worst.max(d);
        if d > 1e-4 {
            problems.push(format!("instance {k}: milp {milp} oracle {oracle}"));
        }
    }
    let ok = problems.is_empty();
    let detail = if ok {
        format!("50 instances, max gap {worst:.1e}")
    } else {
        problems.join("; ")
    };
    report.record("criterion 6 (MILP backup matches brute force)", ok, detail);
}

// Exploitability bound in exact arithmetic.

fn exact_bound(m: f64, gamma: f64, l: usize, sigma: f64) -> f64 {
    let q = |x: f64| BigRational::from_float(x).unwrap();
    let (m, g, s) = (q(m), q(gamma), q(sigma));
    let pow = |k: usize| (0..k).fold(BigRational::one(), |acc, _| acc * &g);
    let lr = BigRational::from_integer(BigInt::from(l));
    let bracket = BigRational::one() + &lr * pow(l + 1) - (&lr + BigRational::one()) * pow(l);
    let one_minus = BigRational::one() - &g;
    let two = BigRational::from_integer(BigInt::from(2));
    let exact = two * m * s * bracket / (&one_minus * &one_minus);
    exact.to_f64().unwrap()
}

fn criterion7(report: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    let mut problems = Vec::new();
    for _ in 0..20 {
        let m = rng.gen_range(0.1..10.0);
        let gamma = rng.gen_range(0.05..0.99);
        let l = rng.gen_range(1..=40);
        let sigma = rng.gen_range(0.0..1.0);
        let got = exploitability_bound(m, gamma, l, sigma).unwrap();
        let want = exact_bound(m, gamma, l, sigma);
        let rel = (got - want).abs() / want.abs().max(1.0);
        worst = worst.max(rel);
        if rel > 1e-12 {
            problems.push(format!("({m}, {gamma}, {l}, {sigma}): {got} vs {want}"));
        }
    }
    let zero = exploitability_bound(2.0, 0.9, 10, 0.0).unwrap();
    if zero != 0.0 || !BigRational::from_float(zero).unwrap().is_zero() {
        problems.push(format!("sigma = 0 gives {zero}"));
    }
    let ok = problems.is_empty();
    let detail = if ok {
        format!("20 tuples, max relative error {worst:.1e}; sigma = 0 gives 0")
    } else {
        problems.join("; ")
    };
    report.record("criterion 7 (exploitability bound is exact)", ok, detail);
}

fn invariants(report: &mut Report, t: &Table, dir: &Path) {
    let mut problems = Vec::new();
    for b in benchmarks::NAMES {
        for h in HORIZONS {
            if let (Some(hv), Some(sv)) = (value(t, b, h, "H"), value(t, b, h, "S")) {
                if hv < sv - 1e-6 {
                    problems.push(format!("{b} {h}: H {hv} < S {sv}"));
                }
            }
        }
    }
    report.record(
        "invariant (H root >= S root)",
        problems.is_empty(),
        if problems.is_empty() { "20 cells".into() } else { problems.join("; ") },
    );

    // Re-validate every logged exploitability from the stored policy file.
    let text = fs::read_to_string(dir.join("results.csv")).unwrap();
    let mut checked = 0;
    let mut problems = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (Ok(v), Ok(logged)) = (f[3].parse::<f64>(), f[6].parse::<f64>()) else {
            continue;
        };
        let h: usize = f[1].parse().unwrap();
        let g = benchmarks::build(f[0], h).unwrap();
        let Some(p) = stored_policy(dir, f[0], h, f[2]) else {
            problems.push(format!("{} {h} {}: no policy file", f[0], f[2]));
            continue;
        };
        let actual = best_response(&g, &p).unwrap().value_leader;
        // BI and MY report the measured value and log the planned one's excess.
        let bad = if f[2] == "BI" || f[2] == "MY" {
            (v - actual).abs() > 1e-6
        } else {
            ((v - actual) - logged).abs() > 1e-6
        };
        if bad {
            problems.push(format!("{} {h} {}: value {v}, logged {logged}, recomputed {actual}", f[0], f[2]));
        }
        checked += 1;
    }
    report.record(
        "invariant (logged exploitability re-validates)",
        problems.is_empty(),
        if problems.is_empty() { format!("{checked} rows") } else { problems.join("; ") },
    );
}

fn main() {
    let mut report = Report { lines: Vec::new() };
    let root = tempfile::tempdir().expect("temp dir");
    let (a, b): (PathBuf, PathBuf) = (root.path().join("run_a"), root.path().join("run_b"));
    let start = Instant::now();
    let (ra, rb) = std::thread::scope(|s| {
        let ha = s.spawn(|| run_bench(&a));
        let hb = s.spawn(|| run_bench(&b));
        (ha.join().unwrap(), hb.join().unwrap())
    });
    let bench_secs = start.elapsed().as_secs_f64();
    for r in [&ra, &rb] {
        assert!(r.status.success(), "bench failed: {}", String::from_utf8_lossy(&r.stderr));
    }
    let csv_a = fs::read(a.join("results.csv")).unwrap();
    let csv_b = fs::read(b.join("results.csv")).unwrap();
    let table = parse_csv(std::str::from_utf8(&csv_a).unwrap());

    golden(&mut report, "criterion 1 (PBVI-H golden values)", &table, "H", &GOLDEN_H);
    golden(&mut report, "criterion 2 (PBVI-S golden values)", &table, "S", &GOLDEN_S);
    criterion3(&mut report, &table, &a);
    criterion4(&mut report, &table);
    criterion5(&mut report);
    criterion6(&mut report);
    criterion7(&mut report);
    let same = csv_a == csv_b;
    report.record(
        "criterion 8 (table1 CSV is reproducible)",
        same,
        format!("{} bytes, {} rows, two runs in {bench_secs:.1}s", csv_a.len(), table.len()),
    );
    criterion9(&mut report, &table);
    invariants(&mut report, &table, &a);

    let failed: Vec<&str> = report.lines.iter().filter(|l| !l.1).map(|l| l.0.as_str()).collect();
    if failed.is_empty() {
        println!("acceptance: all {} checks passed", report.lines.len());
    } else {
        println!("acceptance: {} of {} checks failed", failed.len(), report.lines.len());
        std::process::exit(1);
    }
}
