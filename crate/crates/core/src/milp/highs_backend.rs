use highs::{HighsModelStatus, RowProblem, Sense as HSense};

use super::{Assignment, Backend, Cmp, MilpModel, Outcome, Sense, SolveOptions, VarKind};
use crate::error::{Result, SseError};

/// HiGHS through its C API.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

impl Backend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(&self, model: &MilpModel, opts: &SolveOptions) -> Result<Outcome> {
        let mut pb = RowProblem::default();
        let obj: Vec<f64> = {
            let mut c = vec![0.0; model.vars().len()];
            for (v, a) in model.objective() {
                c[v.0] += a;
            }
            c
        };
        let cols: Vec<_> = model
            .vars()
            .iter()
            .zip(&obj)
            .map(|(v, &c)| match v.kind {
                VarKind::Continuous { lb, ub } => pb.add_column(c, lb..=ub),
                VarKind::Binary => pb.add_integer_column(c, 0.0..=1.0),
            })
            .collect();
        for c in model.constraints() {
            let row: Vec<_> = c.terms.iter().map(|(v, a)| (cols[v.0], *a)).collect();
            match c.cmp {
                Cmp::Le => pb.add_row(..=c.rhs, row),
                Cmp::Ge => pb.add_row(c.rhs.., row),
                Cmp::Eq => pb.add_row(c.rhs..=c.rhs, row),
            }
        }
        let sense = match model.sense {
            Sense::Maximize => HSense::Maximise,
            Sense::Minimize => HSense::Minimise,
        };
        let mut m = pb.optimise(sense);
        m.set_option("output_flag", false);
        m.set_option("threads", 1);
        m.set_option("mip_abs_gap", opts.mip_gap);
        m.set_option("mip_rel_gap", 0.0);
        m.set_option("primal_feasibility_tolerance", 1e-9);
        m.set_option("dual_feasibility_tolerance", 1e-9);
        m.set_option("mip_feasibility_tolerance", 1e-9);
        if let Some(t) = opts.time_limit {
            m.set_option("time_limit", t.as_secs_f64());
        }
        let solved = m
            .try_solve()
            .map_err(|s| SseError::Solver(format!("HiGHS failed: {s:?}")))?;
        let read = |solved: &highs::SolvedModel| {
            let values = solved.get_solution().columns().to_vec();
            Assignment {
                objective: model.objective_value(&values),
                values,
            }
        };
        match solved.status() {
            HighsModelStatus::Optimal | HighsModelStatus::ModelEmpty => Ok(Outcome::Optimal(read(&solved))),
            HighsModelStatus::Infeasible => Ok(Outcome::Infeasible),
            HighsModelStatus::ReachedTimeLimit => {
                let a = read(&solved);
                let usable = a.values.len() == model.vars().len() && model.check(&a.values, 1e-6).is_empty();
                Ok(Outcome::TimedOut(usable.then_some(a)))
            }
            other => Err(SseError::Solver(format!("HiGHS returned {other:?}"))),
        }
    }
}
