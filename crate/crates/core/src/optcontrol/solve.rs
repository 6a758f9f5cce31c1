use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{FeOperators, ProblemData};
use crate::error::{Error, Result};
use crate::graphs::MetricGraph;
use crate::linalg::{dot, norm2, CsrMatrix, FactorKind, Factorization};
use crate::mesh::{build_mesh, PiecewiseLinear};
use crate::par;
use crate::pde::ForwardSolver;

use super::kkt::KktSystem;
use super::krylov::{gmres, gmres_left, minres, KrylovResult};
use super::precond::{PreconKind, Preconditioner};

/// Largest number of controls accepted by [`reduced_oracle`].
pub const ORACLE_CAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Gmres,
    /// GMRES on `P⁻¹ A`, stopping on the preconditioned residual.
    GmresLeft,
    Minres,
    /// Sparse LU of the assembled KKT matrix; for reference solutions.
    Direct,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gmres => "gmres",
            SolverKind::GmresLeft => "gmres-left",
            SolverKind::Minres => "minres",
            SolverKind::Direct => "direct",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gmres" => Ok(SolverKind::Gmres),
            "gmres-left" => Ok(SolverKind::GmresLeft),
            "minres" => Ok(SolverKind::Minres),
            "direct" => Ok(SolverKind::Direct),
            other => Err(Error::InvalidInput(format!("unknown solver '{other}' (expected gmres|gmres-left|minres|direct)"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub solver: SolverKind,
    pub precon: PreconKind,
    pub tol: f64,
    /// Defaults to `min(kkt_dim, 1000)` with a preconditioner and `n_dof`
    /// without one.
    pub max_it: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            solver: SolverKind::Gmres,
            precon: PreconKind::MatchedNonsymmetric,
            tol: 1e-8,
            max_it: None,
        }
    }
}

impl SolveOptions {
    pub fn new(solver: SolverKind, precon: PreconKind) -> Self {
        Self {
            solver,
            precon,
            ..Self::default()
        }
    }

    pub fn max_it_for(&self, n_dof: usize, kkt_dim: usize) -> usize {
        self.max_it.unwrap_or(match self.precon {
            PreconKind::None => n_dof,
            _ => kkt_dim.min(1000),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveStats {
    pub n_dof: usize,
    pub kkt_dim: usize,
    pub iterations: usize,
    pub converged: bool,
    /// True relative residual of the KKT system.
    pub rel_residual: f64,
    pub history: Vec<f64>,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct OcpSolution {
    pub y: PiecewiseLinear,
    pub u: Vec<f64>,
    /// Adjoint state with `β u - K_h p = 0`.
    pub p: PiecewiseLinear,
    pub stats: SolveStats,
}

/// Meshes `graph` with `n_e` intervals per edge and solves the control
/// problem.
pub fn solve_ocp(graph: Arc<MetricGraph>, n_e: usize, data: &ProblemData, opts: &SolveOptions) -> Result<OcpSolution> {
    let mesh = Arc::new(build_mesh(graph, n_e)?);
    let ops = FeOperators::assemble(mesh, data)?;
    solve_ocp_with(&ops, data.beta, opts)
}

/// Solves the KKT system for already assembled operators.
pub fn solve_ocp_with(ops: &FeOperators, beta: f64, opts: &SolveOptions) -> Result<OcpSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.solver == SolverKind::Minres && !opts.precon.is_spd() {
        return Err(Error::InvalidInput(format!(
            "MINRES needs a symmetric positive definite preconditioner, '{}' is not",
            opts.precon
        )));
    }
    let t0 = Instant::now();
    let kkt = KktSystem::new(ops, beta)?;
    let n_dof = ops.mesh.n_dof();
    if opts.solver == SolverKind::Direct {
        let lu = Factorization::new(&kkt.to_csr(usize::MAX)?, FactorKind::Lu)?;
        let setup_seconds = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let x = lu.solve(kkt.rhs());
        let solve_seconds = t1.elapsed().as_secs_f64();
        let bnorm = norm2(kkt.rhs());
        let res = if bnorm == 0.0 {
            0.0
        } else {
            let ax = kkt.apply_vec(&x);
            ax.iter().zip(kkt.rhs()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / bnorm
        };
        let result = KrylovResult {
            x,
            iterations: 0,
            converged: res <= opts.tol,
            history: vec![res],
            true_rel_residual: res,
        };
        return assemble_solution(ops, &kkt, result, setup_seconds, solve_seconds);
    }
    let pre = Preconditioner::new(opts.precon, &kkt)?;
    let setup_seconds = t0.elapsed().as_secs_f64();

    let max_it = opts.max_it_for(n_dof, kkt.dim());
    let t1 = Instant::now();
    let result: KrylovResult = match opts.solver {
        SolverKind::Gmres => gmres(|x, y| kkt.apply(x, y), |r, z| pre.apply(r, z), kkt.rhs(), opts.tol, max_it),
        SolverKind::GmresLeft => {
            gmres_left(|x, y| kkt.apply(x, y), |r, z| pre.apply(r, z), kkt.rhs(), opts.tol, max_it)
        }
        SolverKind::Minres => minres(|x, y| kkt.apply(x, y), |r, z| pre.apply(r, z), kkt.rhs(), opts.tol, max_it)?,
        SolverKind::Direct => unreachable!("handled above"),
    };
    let solve_seconds = t1.elapsed().as_secs_f64();
    assemble_solution(ops, &kkt, result, setup_seconds, solve_seconds)
}

fn assemble_solution(
    ops: &FeOperators,
    kkt: &KktSystem,
    result: KrylovResult,
    setup_seconds: f64,
    solve_seconds: f64,
) -> Result<OcpSolution> {
    let n_dof = ops.mesh.n_dof();
    let (y_f, u, p_f) = kkt.split(&result.x);
    let mut y = y_f.to_vec();
    y.extend_from_slice(u);
    // the symmetric system carries the adjoint with the opposite sign
    let mut p: Vec<f64> = p_f.iter().map(|v| -v).collect();
    p.extend(std::iter::repeat(0.0).take(u.len()));
    let u = u.to_vec();
    Ok(OcpSolution {
        y: PiecewiseLinear::new(ops.mesh.clone(), y)?,
        u,
        p: PiecewiseLinear::new(ops.mesh.clone(), p)?,
        stats: SolveStats {
            n_dof,
            kkt_dim: kkt.dim(),
            iterations: result.iterations,
            converged: result.converged,
            rel_residual: result.true_rel_residual,
            history: result.history,
            setup_seconds,
            solve_seconds,
        },
    })
}

/// `β u - K_h p` with `K_h p = [K p - M (y - ybar)]_D`.
pub fn optimality_residual(ops: &FeOperators, beta: f64, y: &[f64], u: &[f64], p: &[f64]) -> Vec<f64> {
    let mut kh = crate::pde::discrete_kirchhoff(ops, p, y);
    for (k, yb) in kh.iter_mut().zip(ops.ybar_dirichlet()) {
        *k += yb;
    }
    u.iter().zip(&kh).map(|(ui, k)| beta * ui - k).collect()
}

/// Relative residuals of the three block rows `(y, u, p)` of the KKT system
/// for a solution expressed with the reported adjoint sign.
pub fn kkt_block_residuals(ops: &FeOperators, beta: f64, sol: &OcpSolution) -> Result<[f64; 3]> {
    let kkt = KktSystem::new(ops, beta)?;
    let mut x = sol.y.free_values().to_vec();
    x.extend_from_slice(&sol.u);
    x.extend(sol.p.free_values().iter().map(|v| -v));
    let r = kkt.apply_vec(&x);
    let b = kkt.rhs();
    let bn = norm2(b).max(f64::MIN_POSITIVE);
    let (nf, nd) = (kkt.n_free(), kkt.n_dirichlet());
    let block = |range: std::ops::Range<usize>| {
        range.map(|i| (r[i] - b[i]).powi(2)).sum::<f64>().sqrt() / bn
    };
    Ok([block(0..nf), block(nf..nf + nd), block(nf + nd..2 * nf + nd)])
}

/// Minimizes the reduced objective `j(u) = 1/2 |S_h u + y_f - ybar|^2 +
/// β/2 |u|^2` by forming its `n_D x n_D` normal equations densely.
pub fn reduced_oracle(ops: &FeOperators, beta: f64) -> Result<Vec<f64>> {
    let nd = ops.n_dirichlet();
    if nd > ORACLE_CAP {
        return Err(Error::SizeCap {
            what: "reduced oracle",
            size: nd,
            cap: ORACLE_CAP,
        });
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let fwd = ForwardSolver::new(ops)?;
    let y_f = fwd.solve_state(&vec![0.0; nd], &ops.f_vec)?.y;
    let cols: Vec<usize> = (0..nd).collect();
    let ext: Vec<Vec<f64>> = par::map_collect(&cols, |&i| {
        let mut e = vec![0.0; nd];
        e[i] = 1.0;
        fwd.harmonic_extension(&e).expect("control length matches").into_values()
    });
    let m_ext: Vec<Vec<f64>> = par::map_collect(&ext, |v| ops.mass.mul_vec(v));
    // ybar_vec is M ybar; the mass matrix is symmetric
    let mut target = ops.ybar_vec.clone();
    ops.mass.mul_vec_add(-1.0, y_f.values(), &mut target);
    let r: Vec<f64> = ext.iter().map(|v| dot(v, &target)).collect();
    let g = CsrMatrix::from_dense_fn(nd, nd, |i, j| {
        0.5 * (dot(&ext[i], &m_ext[j]) + dot(&ext[j], &m_ext[i])) + if i == j { beta } else { 0.0 }
    });
    Ok(Factorization::new(&g, FactorKind::Cholesky)?.solve(&r))
}
