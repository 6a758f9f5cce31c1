use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use metgraph_ocp::assembly::FeOperators;
use metgraph_ocp::experiments::{
    convergence_study, eig_probe, format_iteration_table, iteration_study, spectrum_summary, write_convergence_csv,
    write_eig_csv, write_iteration_csv, GraphSpec, StudyConfig,
};
use metgraph_ocp::linalg::{mm, norm2};
use metgraph_ocp::mesh::build_mesh;
use metgraph_ocp::optcontrol::{
    kkt_block_residuals, optimality_residual, solve_ocp_with, KktSystem, PreconKind, SolveOptions, SolverKind,
};
use metgraph_ocp::Result;

#[derive(Parser)]
#[command(name = "mgocp", version, about = "Optimal Dirichlet control on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one control problem and print solver statistics.
    Solve(Common),
    /// Iteration counts over beta and mesh sweeps.
    IterationStudy(Common),
    /// Discretization errors against a reference level.
    ConvergenceStudy(Common),
    /// Eigenvalues of preconditioned KKT operators.
    EigProbe(Common),
    /// Vertex and edge counts of a graph.
    GraphInfo(GraphArgs),
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// Graph: star:K, fdmL:N, path:N, or a .json / .mtx file.
    #[arg(long, default_value = "star:12")]
    graph: String,
    /// Number of random Dirichlet vertices (L-graph and .mtx inputs).
    #[arg(long, default_value_t = 12)]
    controls: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Clone)]
struct Common {
    #[command(flatten)]
    graph: GraphArgs,
    /// Intervals per edge (comma separated for sweeps).
    #[arg(long, value_delimiter = ',', default_value = "16")]
    ne: Vec<usize>,
    /// Regularization weight (comma separated for sweeps).
    #[arg(long, value_delimiter = ',', default_value = "1e-2")]
    beta: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    #[arg(long, default_value_t = 1.0)]
    f: f64,
    #[arg(long, default_value_t = 1.0)]
    ybar: f64,
    /// gmres, gmres-left, minres or direct. Defaults to gmres, and to direct
    /// for convergence-study.
    #[arg(long)]
    solver: Option<String>,
    /// none, ideal, sym or nonsym (comma separated for sweeps). Defaults to
    /// nonsym, sym for convergence-study and ideal,sym,nonsym for eig-probe.
    #[arg(long, value_delimiter = ',')]
    precon: Vec<String>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    maxit: Option<usize>,
    /// Worker threads for independent sweep cells (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the unpreconditioned comparison runs.
    #[arg(long)]
    no_unprec: bool,
    /// Iteration limit of the unpreconditioned runs.
    #[arg(long)]
    unprec_maxit: Option<usize>,
    /// Reference level of the convergence study.
    #[arg(long)]
    ref_ne: Option<usize>,
    /// Omit wall-time columns from CSV output.
    #[arg(long)]
    no_timing: bool,
    /// Write A, M, K and the KKT matrix as MatrixMarket files.
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
}

impl Common {
    fn config(&self, default_solver: SolverKind, default_precons: &[PreconKind]) -> Result<StudyConfig> {
        let solver = match &self.solver {
            Some(s) => s.parse::<SolverKind>()?,
            None => default_solver,
        };
        let precons = if self.precon.is_empty() {
            default_precons.to_vec()
        } else {
            self.precon.iter().map(|p| p.parse()).collect::<Result<_>>()?
        };
        let cfg = StudyConfig {
            graph: self.graph.graph.parse::<GraphSpec>()?,
            betas: self.beta.clone(),
            n_es: self.ne.clone(),
            solver,
            precons,
            tol: self.tol,
            max_it: self.maxit,
            seed: self.graph.seed,
            controls: self.graph.controls,
            c0: self.c0,
            f: self.f,
            ybar: self.ybar,
            jobs: self.jobs,
            unpreconditioned: !self.no_unprec,
            unprec_max_it: self.unprec_maxit,
            reference_ne: self.ref_ne,
            timing: !self.no_timing,
            out: self.out.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dump_matrices(dir: &Path, ops: &FeOperators, beta: f64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    mm::write_matrix(dir.join("stiffness.mtx"), &ops.stiffness)?;
    mm::write_matrix(dir.join("mass.mtx"), &ops.mass)?;
    mm::write_matrix(dir.join("system.mtx"), &ops.system)?;
    let kkt = KktSystem::new(ops, beta)?;
    mm::write_matrix(dir.join("kkt.mtx"), &kkt.to_csr(usize::MAX)?)?;
    Ok(())
}

fn solve(args: &Common) -> Result<()> {
    let cfg = args.config(SolverKind::Gmres, &[PreconKind::MatchedNonsymmetric])?;
    let graph = cfg.build_graph()?;
    let beta = cfg.betas[0];
    let data = cfg.data(beta)?;
    let ops = FeOperators::assemble(Arc::new(build_mesh(graph, cfg.n_es[0])?), &data)?;
    if let Some(dir) = &args.dump_matrices {
        dump_matrices(dir, &ops, beta)?;
    }
    let opts = SolveOptions {
        max_it: cfg.max_it,
        tol: cfg.tol,
        ..SolveOptions::new(cfg.solver, cfg.precons[0])
    };
    let sol = solve_ocp_with(&ops, beta, &opts)?;
    let st = &sol.stats;
    let opt = optimality_residual(&ops, beta, sol.y.values(), &sol.u, sol.p.values());
    let blocks = kkt_block_residuals(&ops, beta, &sol)?;
    println!("n_dof        {}", st.n_dof);
    println!("kkt_dim      {}", st.kkt_dim);
    println!("iterations   {}{}", st.iterations, if st.converged { "" } else { " (not converged)" });
    println!("residual     {:.3e}", st.rel_residual);
    println!("blocks       {:.3e} {:.3e} {:.3e}", blocks[0], blocks[1], blocks[2]);
    println!("optimality   {:.3e}", norm2(&opt));
    println!("objective    {:.10e}", ops.objective(beta, sol.y.values(), &sol.u));
    println!("|u|          {:.10e}", norm2(&sol.u));
    println!("setup_s      {:.4}", st.setup_seconds);
    println!("solve_s      {:.4}", st.solve_seconds);
    if let Some(out) = &cfg.out {
        let mut w = csv::Writer::from_path(out)?;
        w.write_record(["vertex", "u"])?;
        for (v, u) in ops.mesh.dirichlet_vertices().iter().zip(&sol.u) {
            w.write_record([v.to_string(), format!("{u:e}")])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => solve(&args),
        Command::IterationStudy(args) => {
            let cfg = args.config(SolverKind::Gmres, &[PreconKind::MatchedNonsymmetric])?;
            let cells = iteration_study(&cfg)?;
            for &p in &cfg.precons {
                println!("{} / {}", cfg.solver, p);
                print!("{}", format_iteration_table(&cells, p));
            }
            if let Some(out) = &cfg.out {
                write_iteration_csv(out, &cells, cfg.solver, cfg.timing)?;
            }
            Ok(())
        }
        Command::ConvergenceStudy(args) => {
            let cfg = args.config(SolverKind::Direct, &[PreconKind::MatchedSymmetric])?;
            let recs = convergence_study(&cfg)?;
            let rate = |v: Option<f64>| v.map_or_else(|| "     ".into(), |x| format!("{x:.2}"));
            println!(
                "{:>8} {:>9} {:>18} {:>18} {:>18} {:>18}",
                "h", "N_DOF", "|u-u_h|", "||y-y_h||_L2", "||y-y_h||_H1", "|y-y_h|_H1"
            );
            for r in &recs {
                println!(
                    "{:>8.2e} {:>9} {:>10.3e} ({}) {:>10.3e} ({}) {:>10.3e} ({}) {:>10.3e} ({})",
                    r.h,
                    r.n_dof,
                    r.err_u,
                    rate(r.eoc_u),
                    r.err_y_l2,
                    rate(r.eoc_y_l2),
                    r.err_y_h1,
                    rate(r.eoc_y_h1),
                    r.err_y_h1_semi,
                    rate(r.eoc_y_h1_semi)
                );
            }
            if let Some(out) = &cfg.out {
                write_convergence_csv(out, &recs)?;
            }
            Ok(())
        }
        Command::EigProbe(args) => {
            let cfg = args.config(SolverKind::Gmres, &[
                PreconKind::Ideal,
                PreconKind::MatchedSymmetric,
                PreconKind::MatchedNonsymmetric,
            ])?;
            let recs = eig_probe(&cfg)?;
            println!("{:>8} {:>8} {:>6} {:>12} {:>12} {:>12} {:>12}", "probe", "beta", "count", "min|l|", "max|l|", "min re", "max re");
            for s in spectrum_summary(&recs) {
                println!(
                    "{:>8} {:>8.0e} {:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}",
                    s.probe, s.beta, s.count, s.min_abs, s.max_abs, s.min_re, s.max_re
                );
            }
            if let Some(out) = &cfg.out {
                write_eig_csv(out, &recs)?;
            }
            Ok(())
        }
        Command::GraphInfo(g) => {
            let graph = g.graph.parse::<GraphSpec>()?.build(g.controls, g.seed)?;
            println!("{} vertices, {} edges", graph.n_vertices(), graph.n_edges());
            println!("dirichlet vertices: {:?}", graph.dirichlet_nodes());
            println!("total length: {}", graph.total_length());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
