use microlp::{ComparisonOp, OptimizationDirection, Problem};

use super::{Assignment, Backend, Cmp, MilpModel, Outcome, Sense, SolveOptions, VarKind};
use crate::error::{Result, SseError};

/// The pure-Rust `microlp` solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct MicrolpBackend;

impl Backend for MicrolpBackend {
    fn name(&self) -> &'static str {
        "microlp"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<Outcome> {
        let dir = match model.sense {
            Sense::Maximize => OptimizationDirection::Maximize,
            Sense::Minimize => OptimizationDirection::Minimize,
        };
        let mut pb = Problem::new(dir);
        let mut obj = vec![0.0; model.vars().len()];
        for (v, a) in model.objective() {
            obj[v.0] += a;
        }
        let vars: Vec<_> = model
            .vars()
            .iter()
            .zip(&obj)
            .map(|(v, &c)| match v.kind {
                VarKind::Continuous { lb, ub } => pb.add_var(c, (lb, ub)),
                VarKind::Binary => pb.add_binary_var(c),
            })
            .collect();
        for c in model.constraints() {
            let op = match c.cmp {
                Cmp::Le => ComparisonOp::Le,
                Cmp::Ge => ComparisonOp::Ge,
                Cmp::Eq => ComparisonOp::Eq,
            };
            let expr: Vec<_> = c.terms.iter().map(|(v, a)| (vars[v.0], *a)).collect();
            pb.add_constraint(expr.as_slice(), op, c.rhs);
        }
        if let Some(t) = opts.time_limit {
            pb.set_time_limit(t);
        }
        match pb.solve() {
            Ok(outcome) => match outcome.solution() {
                Some(sol) => {
                    let values: Vec<f64> = vars.iter().map(|&v| sol.var_value_raw(v)).collect();
                    let a = Assignment {
                        objective: model.objective_value(&values),
                        values,
                    };
                    if outcome.is_optimal() {
                        Ok(Outcome::Optimal(a))
                    } else {
                        Ok(Outcome::TimedOut(Some(a)))
                    }
                }
                None => Ok(Outcome::TimedOut(None)),
            },
            Err(microlp::Error::Infeasible) => Ok(Outcome::Infeasible),
            Err(e) => Err(SseError::Solver(format!("microlp failed: {e}"))),
        }
    }
}
