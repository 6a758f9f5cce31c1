use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use crate::assembly::FeOperators;
use crate::error::Result;
use crate::mesh::build_mesh;
use crate::optcontrol::{solve_ocp_with, PreconKind, SolveOptions, SolverKind};
use crate::par;

use super::{fmt_f64, StudyConfig};

/// One (β, mesh, preconditioner) cell of an iteration study.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationCell {
    pub beta: f64,
    pub n_e: usize,
    pub n_dof: usize,
    pub precon: PreconKind,
    /// `None` when the solver hit its iteration limit.
    pub iterations: Option<usize>,
    pub rel_residual: f64,
    pub seconds: f64,
    /// Unpreconditioned GMRES on the same system, if requested.
    pub unprec_iterations: Option<Option<usize>>,
    pub unprec_seconds: Option<f64>,
}

/// Runs every (β, n_e, preconditioner) cell, in parallel up to `cfg.jobs`.
/// Rows come back sorted by β (descending), n_e and preconditioner.
pub fn iteration_study(cfg: &StudyConfig) -> Result<Vec<IterationCell>> {
    cfg.validate()?;
    let graph = cfg.build_graph()?;
    let data = cfg.data(cfg.betas[0])?;
    par::with_jobs(cfg.jobs, || {
        let operators: Vec<Result<FeOperators>> = par::map_collect(&cfg.n_es, |&n_e| {
            FeOperators::assemble(Arc::new(build_mesh(graph.clone(), n_e)?), &data)
        });
        let operators: Vec<FeOperators> = operators.into_iter().collect::<Result<_>>()?;

        let mut tasks = Vec::new();
        for (level, _) in cfg.n_es.iter().enumerate() {
            for &beta in &cfg.betas {
                for &precon in &cfg.precons {
                    tasks.push((level, beta, precon));
                }
            }
        }
        let cells: Vec<Result<IterationCell>> = par::map_collect(&tasks, |&(level, beta, precon)| {
            let ops = &operators[level];
            let opts = SolveOptions {
                max_it: cfg.max_it,
                tol: cfg.tol,
                ..SolveOptions::new(cfg.solver, precon)
            };
            let sol = solve_ocp_with(ops, beta, &opts)?;
            let (unprec_iterations, unprec_seconds) = if cfg.unpreconditioned {
                let opts = SolveOptions {
                    max_it: cfg.unprec_max_it,
                    tol: cfg.tol,
                    ..SolveOptions::new(SolverKind::Gmres, PreconKind::None)
                };
                let s = solve_ocp_with(ops, beta, &opts)?;
                let it = s.stats.converged.then_some(s.stats.iterations);
                (Some(it), Some(s.stats.setup_seconds + s.stats.solve_seconds))
            } else {
                (None, None)
            };
            Ok(IterationCell {
                beta,
                n_e: cfg.n_es[level],
                n_dof: sol.stats.n_dof,
                precon,
                iterations: sol.stats.converged.then_some(sol.stats.iterations),
                rel_residual: sol.stats.rel_residual,
                seconds: sol.stats.setup_seconds + sol.stats.solve_seconds,
                unprec_iterations,
                unprec_seconds,
            })
        });
        let mut cells: Vec<IterationCell> = cells.into_iter().collect::<Result<_>>()?;
        cells.sort_by(|a, b| {
            b.beta
                .total_cmp(&a.beta)
                .then(a.n_e.cmp(&b.n_e))
                .then(a.precon.cmp(&b.precon))
        });
        Ok(cells)
    })
}

fn count(it: Option<usize>) -> String {
    it.map_or_else(|| "--".to_string(), |i| i.to_string())
}

/// Writes the cells as CSV; wall-time columns only when `timing` is set.
pub fn write_iteration_csv(path: &Path, cells: &[IterationCell], solver: SolverKind, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["beta", "n_e", "n_dof", "solver", "precon", "iterations", "rel_residual"];
    if timing {
        header.push("seconds");
    }
    header.push("unprec_iterations");
    if timing {
        header.push("unprec_seconds");
    }
    w.write_record(&header)?;
    for c in cells {
        let mut row = vec![
            fmt_f64(c.beta),
            c.n_e.to_string(),
            c.n_dof.to_string(),
            solver.to_string(),
            c.precon.to_string(),
            count(c.iterations),
            fmt_f64(c.rel_residual),
        ];
        if timing {
            row.push(format!("{:.4}", c.seconds));
        }
        row.push(c.unprec_iterations.map_or_else(String::new, count));
        if timing {
            row.push(c.unprec_seconds.map_or_else(String::new, |s| format!("{s:.4}")));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Text table with one row per β and one column per N_DOF; cells read
/// `it (unprec)` and `--` marks non-convergence.
pub fn format_iteration_table(cells: &[IterationCell], precon: PreconKind) -> String {
    let cells: Vec<&IterationCell> = cells.iter().filter(|c| c.precon == precon).collect();
    let dofs: BTreeSet<usize> = cells.iter().map(|c| c.n_dof).collect();
    let mut betas: Vec<f64> = Vec::new();
    for c in &cells {
        if !betas.contains(&c.beta) {
            betas.push(c.beta);
        }
    }
    let mut out = format!("{:>10}", "N_DOF");
    for d in &dofs {
        out.push_str(&format!("{d:>16}"));
    }
    out.push('\n');
    for b in betas {
        out.push_str(&format!("{b:>10.0e}"));
        for d in &dofs {
            let text = cells
                .iter()
                .find(|c| c.beta == b && c.n_dof == *d)
                .map(|c| match c.unprec_iterations {
                    Some(u) => format!("{} ({})", count(c.iterations), count(u)),
                    None => count(c.iterations),
                })
                .unwrap_or_default();
            out.push_str(&format!("{text:>16}"));
        }
        out.push('\n');
    }
    out
}
