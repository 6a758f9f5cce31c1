//! Parameter sweeps: iteration counts, discretization errors and spectra of
//! preconditioned KKT operators. Results are plain records with CSV writers.

mod convergence;
mod eigs;
mod iteration;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

pub use convergence::{convergence_study, eoc, write_convergence_csv, ConvergenceRecord};
pub use eigs::{eig_probe, spectrum_summary, write_eig_csv, EigRecord, SpectrumSummary};
pub use iteration::{format_iteration_table, iteration_study, write_iteration_csv, IterationCell};

use crate::assembly::{Field, ProblemData};
use crate::error::{Error, Result};
use crate::graphs::{self, MetricGraph, VertexKind};
use crate::optcontrol::{PreconKind, SolverKind};

/// Graph source: a generator or a file.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    /// Star with `k` Dirichlet leaves and a Kirchhoff centre.
    Star(usize),
    /// L-shaped finite-difference graph on an `N x N` lattice.
    FdmL(usize),
    /// Path with `n` vertices and Dirichlet end points.
    Path(usize),
    /// `.json` metric graph or `.mtx` adjacency matrix.
    File(PathBuf),
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad size in graph spec '{s}'")))
        };
        if let Some(k) = s.strip_prefix("star:") {
            Ok(GraphSpec::Star(num(k)?))
        } else if let Some(n) = s.strip_prefix("fdmL:") {
            Ok(GraphSpec::FdmL(num(n)?))
        } else if let Some(n) = s.strip_prefix("path:") {
            Ok(GraphSpec::Path(num(n)?))
        } else if s.is_empty() {
            Err(Error::InvalidInput("empty graph spec".into()))
        } else {
            Ok(GraphSpec::File(PathBuf::from(s)))
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Star(k) => write!(f, "star:{k}"),
            GraphSpec::FdmL(n) => write!(f, "fdmL:{n}"),
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl GraphSpec {
    /// Builds the metric graph. `controls` random Dirichlet vertices (drawn
    /// with `seed`) are used for the L-graph and for MatrixMarket files;
    /// JSON files keep their own vertex kinds.
    pub fn build(&self, controls: usize, seed: u64) -> Result<MetricGraph> {
        match self {
            GraphSpec::Star(k) => graphs::make_star(*k, VertexKind::Dirichlet),
            GraphSpec::FdmL(n) => graphs::make_fdm_l_graph(*n, controls, seed),
            GraphSpec::Path(n) => graphs::make_path(*n),
            GraphSpec::File(p) => match p.extension().and_then(|e| e.to_str()) {
                Some("json") => graphs::load_json(p),
                Some("mtx") => MetricGraph::unit(graphs::load_matrix_market(p)?).with_random_dirichlet(controls, seed),
                _ => Err(Error::InvalidInput(format!(
                    "cannot infer graph format of '{}' (expected .json or .mtx)",
                    p.display()
                ))),
            },
        }
    }
}

/// Everything a sweep needs.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub graph: GraphSpec,
    pub betas: Vec<f64>,
    /// Intervals per edge, one entry per mesh level.
    pub n_es: Vec<usize>,
    pub solver: SolverKind,
    pub precons: Vec<PreconKind>,
    pub tol: f64,
    pub max_it: Option<usize>,
    pub seed: u64,
    pub controls: usize,
    pub c0: f64,
    pub f: f64,
    pub ybar: f64,
    /// Worker threads for independent cells; 0 uses the global pool.
    pub jobs: usize,
    /// Also run unpreconditioned GMRES in iteration studies.
    pub unpreconditioned: bool,
    pub unprec_max_it: Option<usize>,
    /// Reference level of the convergence study (defaults to 4x the finest).
    pub reference_ne: Option<usize>,
    /// Emit wall-time columns (disable for byte-identical output).
    pub timing: bool,
    pub out: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            graph: GraphSpec::Star(12),
            betas: vec![1e-2, 1e-3, 1e-4, 1e-5],
            n_es: vec![8, 16, 32, 64],
            solver: SolverKind::Gmres,
            precons: vec![PreconKind::MatchedNonsymmetric],
            tol: 1e-8,
            max_it: None,
            seed: 1,
            controls: 12,
            c0: 1.0,
            f: 1.0,
            ybar: 1.0,
            jobs: 0,
            unpreconditioned: true,
            unprec_max_it: None,
            reference_ne: None,
            timing: true,
            out: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() || self.n_es.is_empty() || self.precons.is_empty() {
            return Err(Error::InvalidInput("sweeps must be nonempty".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        if let Some(b) = self.betas.iter().find(|b| !(**b > 0.0)) {
            return Err(Error::InvalidInput(format!("beta must be positive, got {b}")));
        }
        if self.n_es.contains(&0) {
            return Err(Error::InvalidInput("n_e must be at least 1".into()));
        }
        Ok(())
    }

    pub fn data(&self, beta: f64) -> Result<ProblemData> {
        ProblemData::new(beta, Field::Constant(self.c0), Field::Constant(self.f), Field::Constant(self.ybar))
    }

    pub fn build_graph(&self) -> Result<Arc<MetricGraph>> {
        Ok(Arc::new(self.graph.build(self.controls, self.seed)?))
    }
}

/// Formats a float for CSV output with full round-trip precision.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_graph_specs() {
        assert_eq!("star:12".parse::<GraphSpec>().unwrap(), GraphSpec::Star(12));
        assert_eq!("fdmL:10".parse::<GraphSpec>().unwrap(), GraphSpec::FdmL(10));
        assert_eq!("path:4".parse::<GraphSpec>().unwrap(), GraphSpec::Path(4));
        assert!(matches!("g.json".parse::<GraphSpec>().unwrap(), GraphSpec::File(_)));
        assert!("star:x".parse::<GraphSpec>().is_err());
        assert_eq!(GraphSpec::FdmL(10).to_string(), "fdmL:10");
    }

    #[test]
    fn build_generators() {
        let g = GraphSpec::FdmL(10).build(12, 1).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges(), g.n_dirichlet()), (75, 130, 12));
        let s = GraphSpec::Star(12).build(0, 0).unwrap();
        assert_eq!(s.n_dirichlet(), 12);
        assert!(GraphSpec::File("x.txt".into()).build(1, 1).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = StudyConfig::default();
        assert!(c.validate().is_ok());
        c.tol = 0.0;
        assert!(c.validate().is_err());
        c = StudyConfig { betas: vec![], ..StudyConfig::default() };
        assert!(c.validate().is_err());
    }
}
