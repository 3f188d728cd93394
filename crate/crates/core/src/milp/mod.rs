//! Solver-agnostic mixed-integer linear models and the backends that solve them.

use std::fmt::Write as _;
use std::time::Duration;

use crate::error::{Result, SseError};

pub mod backup;
mod highs_backend;
mod microlp_backend;

pub use backup::{big_m, greedy_backup_milp, BackupOptions, BackupSolution, BigM};
pub use highs_backend::HighsBackend;
pub use microlp_backend::MicrolpBackend;

/// Environment variable selecting the backend (`highs` or `microlp`).
pub const BACKEND_ENV: &str = "SSE_MILP_BACKEND";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarKind {
    Continuous { lb: f64, ub: f64 },
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDef {
    pub name: String,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(Var, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// A linear objective and constraint system over continuous and binary variables.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub sense: Sense,
    vars: Vec<VarDef>,
    constraints: Vec<Constraint>,
    objective: Vec<(Var, f64)>,
    objective_offset: f64,
}

impl MilpModel {
    pub fn new(sense: Sense) -> Self {
        MilpModel {
            sense,
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
        }
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Var {
        self.vars.push(VarDef {
            name: name.into(),
            kind: VarKind::Continuous { lb, ub },
        });
        Var(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Var {
        self.vars.push(VarDef {
            name: name.into(),
            kind: VarKind::Binary,
        });
        Var(self.vars.len() - 1)
    }

    /// Adds `Σ terms cmp rhs`. Repeated variables are merged.
    pub fn add_constraint(&mut self, name: impl Into<String>, terms: Vec<(Var, f64)>, cmp: Cmp, rhs: f64) {
        let terms = merge(terms);
        debug_assert!(terms.iter().all(|(v, _)| v.0 < self.vars.len()));
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            cmp,
            rhs,
        });
    }

    pub fn set_objective(&mut self, terms: Vec<(Var, f64)>, offset: f64) {
        self.objective = merge(terms);
        self.objective_offset = offset;
    }

    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(Var, f64)] {
        &self.objective
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn n_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().map(|(v, c)| c * values[v.0]).sum::<f64>()
    }

    /// Copy with every binary fixed to its rounded value in `values`.
    pub fn with_fixed_binaries(&self, values: &[f64]) -> MilpModel {
        let mut m = self.clone();
        for (i, v) in m.vars.iter_mut().enumerate() {
            if v.kind == VarKind::Binary {
                let x = values[i].round().clamp(0.0, 1.0);
                v.kind = VarKind::Continuous { lb: x, ub: x };
            }
        }
        m
    }

    /// Arithmetic audit of an assignment: bounds, integrality and every row.
    pub fn check(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if values.len() != self.vars.len() {
            out.push(format!("{} values for {} variables", values.len(), self.vars.len()));
            return out;
        }
        for (v, &x) in self.vars.iter().zip(values) {
            match v.kind {
                VarKind::Continuous { lb, ub } => {
                    if x < lb - tol || x > ub + tol {
                        out.push(format!("{} = {x} outside [{lb}, {ub}]", v.name));
                    }
                }
                VarKind::Binary => {
                    if (x - x.round()).abs() > tol || !(-tol..=1.0 + tol).contains(&x) {
                        out.push(format!("{} = {x} is not binary", v.name));
                    }
                }
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(v, a)| a * values[v.0]).sum();
            let ok = match c.cmp {
                Cmp::Le => lhs <= c.rhs + tol,
                Cmp::Ge => lhs >= c.rhs - tol,
                Cmp::Eq => (lhs - c.rhs).abs() <= tol,
            };
            if !ok {
                out.push(format!("{}: {lhs} {:?} {}", c.name, c.cmp, c.rhs));
            }
        }
        out
    }

    /// CPLEX LP-format text of the model.
    pub fn to_lp(&self) -> String {
        let names: Vec<String> = self
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| lp_name(&v.name, i))
            .collect();
        let expr = |terms: &[(Var, f64)]| -> String {
            if terms.is_empty() {
                return "0 ".to_string() + &names.first().cloned().unwrap_or_default();
            }
            let mut s = String::new();
            for (k, (v, a)) in terms.iter().enumerate() {
                let sign = if *a < 0.0 { "-" } else { "+" };
                if k == 0 && *a >= 0.0 {
                    let _ = write!(s, "{} {}", a.abs(), names[v.0]);
                } else {
                    let _ = write!(s, " {sign} {} {}", a.abs(), names[v.0]);
                }
            }
            s
        };
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Maximize => "Maximize\n",
            Sense::Minimize => "Minimize\n",
        });
        let _ = writeln!(out, " obj: {}", expr(&self.objective));
        out.push_str("Subject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let op = match c.cmp {
                Cmp::Le => "<=",
                Cmp::Ge => ">=",
                Cmp::Eq => "=",
            };
            let _ = writeln!(out, " {}: {} {op} {}", lp_name(&c.name, i), expr(&c.terms), c.rhs);
        }
        out.push_str("Bounds\n");
        for (v, name) in self.vars.iter().zip(&names) {
            if let VarKind::Continuous { lb, ub } = v.kind {
                let _ = writeln!(out, " {} <= {name} <= {}", lp_bound(lb), lp_bound(ub));
            }
        }
        let bins: Vec<&String> = self
            .vars
            .iter()
            .zip(&names)
            .filter(|(v, _)| v.kind == VarKind::Binary)
            .map(|(_, n)| n)
            .collect();
        if !bins.is_empty() {
            out.push_str("Binaries\n");
            for n in bins {
                let _ = writeln!(out, " {n}");
            }
        }
        out.push_str("End\n");
        out
    }
}

fn merge(mut terms: Vec<(Var, f64)>) -> Vec<(Var, f64)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(Var, f64)> = Vec::with_capacity(terms.len());
    for (v, a) in terms {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += a,
            _ => out.push((v, a)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

fn lp_name(name: &str, i: usize) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    format!("{clean}_{i}")
}

fn lp_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    /// Absolute MIP gap.
    pub mip_gap: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: None,
            mip_gap: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub values: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Optimal(Assignment),
    Infeasible,
    /// The time limit expired; carries the incumbent if one was found.
    TimedOut(Option<Assignment>),
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<Outcome>;
}

/// Backend named by [`BACKEND_ENV`], HiGHS when unset.
pub fn backend_from_env() -> Result<Box<dyn Backend>> {
    match std::env::var(BACKEND_ENV).ok().as_deref() {
        None | Some("") | Some("highs") => Ok(Box::new(HighsBackend)),
        Some("microlp") => Ok(Box::new(MicrolpBackend)),
        Some(other) => Err(SseError::Solver(format!(
            "unknown backend '{other}' in {BACKEND_ENV}; expected highs or microlp"
        ))),
    }
}
