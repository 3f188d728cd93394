//! Experiment grid: runs solvers over benchmarks and writes CSV and manifest.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::baselines::{
    backward_induction, best_response_capped, nf_lp_sse, nf_milp_sse, BiMode, DEFAULT_CAP,
};
use crate::benchmarks;
use crate::error::{Result, SseError};
use crate::game::Game;
use crate::milp::backend_from_env;
use crate::occupancy::LeaderPolicy;
use crate::pbvi::{solve_sse, SolverConfig, Variant};

pub const CSV_HEADER: &str = "benchmark,horizon,method,value,time_s,vf_size,exploitability,status";

/// Follower histories the exploitability oracle may visit.
pub const ORACLE_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Method {
    H,
    S,
    BI,
    MY,
    LP,
    MILP,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::H, Method::S, Method::BI, Method::MY, Method::LP, Method::MILP];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Method {
    type Err = SseError;

    fn from_str(s: &str) -> Result<Method> {
        match s.to_ascii_uppercase().as_str() {
            "H" => Ok(Method::H),
            "S" => Ok(Method::S),
            "BI" => Ok(Method::BI),
            "MY" => Ok(Method::MY),
            "LP" => Ok(Method::LP),
            "MILP" => Ok(Method::MILP),
            _ => Err(SseError::Domain(format!("unknown method '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Ok,
    Capacity,
    Budget,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Ok => "ok",
            Status::Capacity => "capacity",
            Status::Budget => "budget",
            Status::Error => "error",
        };
        f.write_str(s)
    }
}

/// One solver run on one game.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub method: Method,
    pub value: Option<f64>,
    pub vf_size: Option<usize>,
    pub exploitability: Option<f64>,
    pub status: Status,
    pub message: Option<String>,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub policy: Option<LeaderPolicy>,
    pub manifest: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub benchmark: String,
    pub horizon: usize,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub benchmarks: Vec<String>,
    pub horizons: Vec<usize>,
    pub methods: Vec<Method>,
    pub config: SolverConfig,
    pub out: Option<PathBuf>,
    pub repetitions: usize,
    /// Write wall-clock times into the CSV; off by default so CSVs are reproducible.
    pub record_times: bool,
    pub enumeration_cap: u128,
}

impl ExperimentSpec {
    /// The Table 1 grid: every benchmark at horizons 1, 2, 3 and 6 with all six methods.
    pub fn table1(seed: u64) -> Self {
        ExperimentSpec {
            benchmarks: benchmarks::NAMES.iter().map(|s| s.to_string()).collect(),
            horizons: vec![1, 2, 3, 6],
            methods: Method::ALL.to_vec(),
            config: SolverConfig {
                seed,
                ..SolverConfig::default()
            },
            out: None,
            repetitions: 1,
            record_times: false,
            enumeration_cap: DEFAULT_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizons.contains(&0) {
            return Err(SseError::Domain("horizons must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(SseError::Domain("repetitions must be at least 1".into()));
        }
        for b in &self.benchmarks {
            benchmarks::build(b, 1)?;
        }
        self.config.validate()
    }
}

fn classify(e: &SseError) -> Status {
    match e {
        SseError::Capacity(_) => Status::Capacity,
        SseError::Budget(_) => Status::Budget,
        _ => Status::Error,
    }
}

fn failed(method: Method, e: SseError, start: Instant) -> Outcome {
    Outcome {
        method,
        value: None,
        vf_size: None,
        exploitability: None,
        status: classify(&e),
        message: Some(e.to_string()),
        wall_time_s: start.elapsed().as_secs_f64(),
        policy: None,
        manifest: None,
    }
}

/// Exploitability against the DP oracle, or `None` past its cap.
fn exploitability(g: &Game, pil: &LeaderPolicy, claimed: f64) -> Option<f64> {
    best_response_capped(g, pil, ORACLE_CAP).ok().map(|br| claimed - br.value_leader)
}

/// Runs one method on one game.
pub fn run_method(g: &Game, method: Method, cfg: &SolverConfig, cap: u128) -> Outcome {
    let start = Instant::now();
    let result = (|| -> Result<Outcome> {
        match method {
            Method::H | Method::S => {
                let variant = if method == Method::H { Variant::H } else { Variant::S };
                let res = solve_sse(
                    g,
                    SolverConfig {
                        variant,
                        ..cfg.clone()
                    },
                )?;
                let pil = res.policy.leader.clone();
                Ok(Outcome {
                    method,
                    value: Some(res.value),
                    vf_size: Some(res.vf_size()),
                    exploitability: exploitability(g, &pil, res.value),
                    status: if res.budget_exhausted { Status::Budget } else { Status::Ok },
                    message: None,
                    wall_time_s: 0.0,
                    policy: Some(pil),
                    manifest: Some(serde_json::to_value(&res.manifest)?),
                })
            }
            Method::BI | Method::MY => {
                let mode = if method == Method::BI { BiMode::Full } else { BiMode::Myopic };
                let backend = backend_from_env()?;
                let sol = backward_induction(g, mode, backend.as_ref())?;
                Ok(Outcome {
                    method,
                    value: Some(sol.value),
                    vf_size: None,
                    exploitability: exploitability(g, &sol.policy, sol.planned_value),
                    status: Status::Ok,
                    message: None,
                    wall_time_s: 0.0,
                    policy: Some(sol.policy),
                    manifest: None,
                })
            }
            Method::LP | Method::MILP => {
                let backend = backend_from_env()?;
                let sol = if method == Method::LP {
                    nf_lp_sse(g, cap, backend.as_ref())?
                } else {
                    nf_milp_sse(g, cap, backend.as_ref())?
                };
                Ok(Outcome {
                    method,
                    value: Some(sol.value),
                    vf_size: None,
                    exploitability: exploitability(g, &sol.leader, sol.value),
                    status: Status::Ok,
                    message: None,
                    wall_time_s: 0.0,
                    policy: Some(sol.leader),
                    manifest: None,
                })
            }
        }
    })();
    match result {
        Ok(mut o) => {
            o.wall_time_s = start.elapsed().as_secs_f64();
            o
        }
        Err(e) => failed(method, e, start),
    }
}

/// Fixed six-decimal rendering with negative zero folded to zero.
pub fn fmt_value(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".into()
    } else {
        s
    }
}

impl Row {
    pub fn csv_record(&self, record_times: bool) -> [String; 8] {
        let o = &self.outcome;
        let dash = || "---".to_string();
        let value = o.value.map(fmt_value).unwrap_or_else(dash);
        let time = if o.value.is_none() {
            dash()
        } else if record_times {
            format!("{:.3}", o.wall_time_s)
        } else {
            "-".into()
        };
        let vf = match (o.value, o.vf_size) {
            (None, _) => dash(),
            (_, Some(n)) => n.to_string(),
            (_, None) => "-".into(),
        };
        let ex = match (o.value, o.exploitability) {
            (None, _) => dash(),
            (_, Some(e)) => fmt_value(e),
            (_, None) => "-".into(),
        };
        [
            self.benchmark.clone(),
            self.horizon.to_string(),
            o.method.to_string(),
            value,
            time,
            vf,
            ex,
            o.status.to_string(),
        ]
    }

    pub fn csv_line(&self, record_times: bool) -> String {
        self.csv_record(record_times).join(",")
    }
}

pub fn to_csv(rows: &[Row], record_times: bool) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.write_record(r.csv_record(record_times))?;
    }
    let bytes = w.into_inner().map_err(|e| SseError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Runs every `(benchmark, horizon, method)` cell in order.
///
/// With repetitions, each cell is rerun and a differing value marks the row
/// as an error.
pub fn run_experiments(spec: &ExperimentSpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for b in &spec.benchmarks {
        for &h in &spec.horizons {
            let g = benchmarks::build(b, h)?;
            for &m in &spec.methods {
                log::info!("running {b} horizon {h} method {m}");
                let mut outcome = run_method(&g, m, &spec.config, spec.enumeration_cap);
                for _ in 1..spec.repetitions {
                    let again = run_method(&g, m, &spec.config, spec.enumeration_cap);
                    if again.value.map(fmt_value) != outcome.value.map(fmt_value) {
                        outcome.status = Status::Error;
                        outcome.message = Some("repetitions disagree".into());
                    }
                }
                rows.push(Row {
                    benchmark: b.clone(),
                    horizon: h,
                    outcome,
                });
            }
        }
    }
    if let Some(dir) = &spec.out {
        write_outputs(dir, spec, &rows)?;
    }
    Ok(rows)
}

/// `results.csv`, `manifest.json` and one policy file per solved row.
pub fn write_outputs(dir: &Path, spec: &ExperimentSpec, rows: &[Row]) -> Result<()> {
    fs::create_dir_all(dir.join("policies"))?;
    fs::write(dir.join("results.csv"), to_csv(rows, spec.record_times)?)?;
    for r in rows {
        if let Some(p) = &r.outcome.policy {
            let name = policy_file_name(&r.benchmark, r.horizon, r.outcome.method);
            let text = serde_json::to_string(&p.to_json())?;
            fs::write(dir.join("policies").join(name), text)?;
        }
    }
    let manifest = serde_json::json!({
        "config": spec.config,
        "benchmarks": spec.benchmarks,
        "horizons": spec.horizons,
        "methods": spec.methods,
        "repetitions": spec.repetitions,
        "enumeration_cap": spec.enumeration_cap.to_string(),
        "backend": std::env::var(crate::milp::BACKEND_ENV).unwrap_or_else(|_| "highs".into()),
        "rows": rows,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn policy_file_name(benchmark: &str, horizon: usize, method: Method) -> String {
    format!("{benchmark}-{horizon}-{method}.json")
}
