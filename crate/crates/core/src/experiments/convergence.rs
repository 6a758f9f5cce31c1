use std::path::Path;
use std::sync::Arc;

use crate::assembly::FeOperators;
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, prolong};
use crate::optcontrol::{solve_ocp_with, OcpSolution, SolveOptions};
use crate::par;

use super::{fmt_f64, StudyConfig};

/// Errors of one mesh level against the reference solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub n_e: usize,
    /// Largest interval width.
    pub h: f64,
    pub n_dof: usize,
    pub iterations: usize,
    /// `|u - u_ref|_2`.
    pub err_u: f64,
    /// `||y - y_ref||_{L2}`.
    pub err_y_l2: f64,
    /// `||y - y_ref||_{H1}` (full norm).
    pub err_y_h1: f64,
    /// `|y - y_ref|_{H1}` (seminorm).
    pub err_y_h1_semi: f64,
    pub eoc_u: Option<f64>,
    pub eoc_y_l2: Option<f64>,
    pub eoc_y_h1: Option<f64>,
    pub eoc_y_h1_semi: Option<f64>,
}

/// Experimental order of convergence between two levels.
pub fn eoc(err_coarse: f64, err_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (err_coarse / err_fine).ln() / (h_coarse / h_fine).ln()
}

/// Solves on every level of `cfg.n_es` and on the reference level
/// (`cfg.reference_ne`, default four times the finest level), then measures
/// the errors of the prolonged solutions on the reference mesh. Uses the
/// first β and the first preconditioner of the configuration.
pub fn convergence_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRecord>> {
    cfg.validate()?;
    let finest = *cfg.n_es.iter().max().expect("validated nonempty");
    let n_ref = cfg.reference_ne.unwrap_or(4 * finest);
    if let Some(bad) = cfg.n_es.iter().find(|&&n| n_ref % n != 0) {
        return Err(Error::InvalidInput(format!(
            "level n_e = {bad} is not nested in the reference level n_e = {n_ref}"
        )));
    }
    let beta = cfg.betas[0];
    let data = cfg.data(beta)?;
    let graph = cfg.build_graph()?;
    let opts = SolveOptions {
        max_it: cfg.max_it,
        tol: cfg.tol,
        ..SolveOptions::new(cfg.solver, cfg.precons[0])
    };

    let mut levels = cfg.n_es.clone();
    levels.push(n_ref);
    let solved: Vec<Result<(FeOperators, OcpSolution)>> = par::with_jobs(cfg.jobs, || {
        par::map_collect(&levels, |&n_e| {
            let ops = FeOperators::assemble(Arc::new(build_mesh(graph.clone(), n_e)?), &data)?;
            let sol = solve_ocp_with(&ops, beta, &opts)?;
            if !sol.stats.converged {
                return Err(Error::InvalidInput(format!(
                    "solver did not converge on level n_e = {n_e} ({} iterations)",
                    sol.stats.iterations
                )));
            }
            Ok((ops, sol))
        })
    });
    let mut solved: Vec<(FeOperators, OcpSolution)> = solved.into_iter().collect::<Result<_>>()?;
    let (ref_ops, ref_sol) = solved.pop().expect("reference level present");

    let mut records: Vec<ConvergenceRecord> = Vec::with_capacity(solved.len());
    for (ops, sol) in &solved {
        let y_fine = prolong(&sol.y, &ref_ops.mesh)?;
        let diff: Vec<f64> = y_fine.values().iter().zip(ref_sol.y.values()).map(|(a, b)| a - b).collect();
        let err_u = sol
            .u
            .iter()
            .zip(&ref_sol.u)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        records.push(ConvergenceRecord {
            n_e: ops.mesh.uniform_intervals().unwrap_or(0),
            h: ops.mesh.h_max(),
            n_dof: ops.mesh.n_dof(),
            iterations: sol.stats.iterations,
            err_u,
            err_y_l2: ref_ops.l2_norm(&diff),
            err_y_h1: ref_ops.h1_norm(&diff),
            err_y_h1_semi: ref_ops.h1_seminorm(&diff),
            eoc_u: None,
            eoc_y_l2: None,
            eoc_y_h1: None,
            eoc_y_h1_semi: None,
        });
    }
    for k in 1..records.len() {
        let (prev, cur) = (records[k - 1].clone(), &mut records[k]);
        let rate = |a: f64, b: f64| (a > 0.0 && b > 0.0).then(|| eoc(a, b, prev.h, cur.h));
        cur.eoc_u = rate(prev.err_u, cur.err_u);
        cur.eoc_y_l2 = rate(prev.err_y_l2, cur.err_y_l2);
        cur.eoc_y_h1 = rate(prev.err_y_h1, cur.err_y_h1);
        cur.eoc_y_h1_semi = rate(prev.err_y_h1_semi, cur.err_y_h1_semi);
    }
    Ok(records)
}

pub fn write_convergence_csv(path: &Path, records: &[ConvergenceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "n_e",
        "h",
        "n_dof",
        "iterations",
        "err_u",
        "eoc_u",
        "err_y_l2",
        "eoc_y_l2",
        "err_y_h1",
        "eoc_y_h1",
        "err_y_h1_semi",
        "eoc_y_h1_semi",
    ])?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.4}"));
    for r in records {
        w.write_record([
            r.n_e.to_string(),
            fmt_f64(r.h),
            r.n_dof.to_string(),
            r.iterations.to_string(),
            fmt_f64(r.err_u),
            opt(r.eoc_u),
            fmt_f64(r.err_y_l2),
            opt(r.eoc_y_l2),
            fmt_f64(r.err_y_h1),
            opt(r.eoc_y_h1),
            fmt_f64(r.err_y_h1_semi),
            opt(r.eoc_y_h1_semi),
        ])?;
    }
    w.flush()?;
    Ok(())
}
