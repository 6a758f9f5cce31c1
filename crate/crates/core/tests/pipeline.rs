mod common;

use std::sync::Arc;

use common::norm;
use metgraph_ocp::assembly::{FeOperators, ProblemData};
use metgraph_ocp::experiments::{iteration_study, write_iteration_csv, GraphSpec, StudyConfig};
use metgraph_ocp::graphs::{make_fdm_l_graph, make_star, metric_graph_to_json, VertexKind};
use metgraph_ocp::mesh::build_mesh;
use metgraph_ocp::optcontrol::{
    kkt_block_residuals, optimality_residual, KktSystem, solve_ocp, solve_ocp_with, PreconKind, SolveOptions, SolverKind,
};
use metgraph_ocp::pde::ForwardSolver;
use metgraph_ocp::Error;

fn l_graph_ops(n_e: usize, beta: f64) -> FeOperators {
    let g = Arc::new(make_fdm_l_graph(10, 12, 1).unwrap());
    let data = ProblemData::constant(beta, 2.0, 1.5, 1.0).unwrap();
    FeOperators::assemble(Arc::new(build_mesh(g, n_e).unwrap()), &data).unwrap()
}

fn sym_opts() -> SolveOptions {
    SolveOptions::new(SolverKind::Gmres, PreconKind::MatchedSymmetric)
}

#[test]
fn optimal_control_improves_on_zero_control() {
    let ops = l_graph_ops(4, 0.1);
    let sol = solve_ocp_with(&ops, 0.1, &sym_opts()).unwrap();
    assert!(sol.stats.converged);
    let fwd = ForwardSolver::new(&ops).unwrap();
    let y0 = fwd.solve_state(&vec![0.0; ops.n_dirichlet()], &ops.f_vec).unwrap().y;
    let j0 = ops.objective(0.1, y0.values(), &vec![0.0; ops.n_dirichlet()]);
    let j = ops.objective(0.1, sol.y.values(), &sol.u);
    assert!(j < j0, "{j} >= {j0}");
}

#[test]
fn heavy_penalty_drives_control_to_zero() {
    let u_ref = solve_ocp_with(&l_graph_ops(4, 0.1), 0.1, &sym_opts()).unwrap().u;
    let u_big = solve_ocp_with(&l_graph_ops(4, 1e6), 1e6, &sym_opts()).unwrap().u;
    assert!(norm(&u_big) <= 1e-4 * norm(&u_ref), "{} vs {}", norm(&u_big), norm(&u_ref));
}

#[test]
fn solution_satisfies_block_equations_and_optimality() {
    let ops = l_graph_ops(8, 1e-3);
    let tol = 1e-8;
    let sol = solve_ocp_with(&ops, 1e-3, &SolveOptions { tol, ..sym_opts() }).unwrap();
    assert!(sol.stats.converged);
    let blocks = kkt_block_residuals(&ops, 1e-3, &sol).unwrap();
    assert!(blocks.iter().all(|b| *b <= 10.0 * tol), "{blocks:?}");
    let opt = optimality_residual(&ops, 1e-3, sol.y.values(), &sol.u, sol.p.values());
    // the optimality residual is the control row of the KKT system
    let kkt = KktSystem::new(&ops, 1e-3).unwrap();
    assert!(norm(&opt) <= 10.0 * tol * norm(kkt.rhs()), "{}", norm(&opt));
}

#[test]
fn minres_and_gmres_agree() {
    let g = Arc::new(make_star(5, VertexKind::Dirichlet).unwrap());
    let data = ProblemData::constant(1e-2, 1.0, 1.0, 1.0).unwrap();
    let tight = |solver, precon| SolveOptions {
        tol: 1e-11,
        ..SolveOptions::new(solver, precon)
    };
    let a = solve_ocp(g.clone(), 6, &data, &tight(SolverKind::Gmres, PreconKind::MatchedNonsymmetric)).unwrap();
    let b = solve_ocp(g, 6, &data, &tight(SolverKind::Minres, PreconKind::MatchedSymmetric)).unwrap();
    let diff: Vec<f64> = a.u.iter().zip(&b.u).map(|(x, y)| x - y).collect();
    assert!(norm(&diff) < 1e-6);
}

#[test]
fn ideal_preconditioner_needs_few_iterations() {
    let g = Arc::new(make_star(3, VertexKind::Dirichlet).unwrap());
    let data = ProblemData::constant(1e-2, 1.0, 1.0, 1.0).unwrap();
    let sol = solve_ocp(g, 4, &data, &SolveOptions::new(SolverKind::Gmres, PreconKind::Ideal)).unwrap();
    assert!(sol.stats.converged);
    assert!(sol.stats.iterations <= 5, "{}", sol.stats.iterations);
    assert_eq!(sol.stats.iterations, 3);
}

#[test]
fn zero_data_gives_zero_solution() {
    let g = Arc::new(make_fdm_l_graph(6, 3, 2).unwrap());
    let data = ProblemData::constant(0.1, 1.0, 0.0, 0.0).unwrap();
    let sol = solve_ocp(g, 3, &data, &sym_opts()).unwrap();
    assert!(sol.u.iter().chain(sol.y.values()).chain(sol.p.values()).all(|v| *v == 0.0));
}

#[test]
fn minres_refuses_nonsymmetric_preconditioner() {
    let g = Arc::new(make_star(3, VertexKind::Dirichlet).unwrap());
    let data = ProblemData::constant(0.1, 1.0, 1.0, 1.0).unwrap();
    let r = solve_ocp(g, 2, &data, &SolveOptions::new(SolverKind::Minres, PreconKind::MatchedNonsymmetric));
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

#[test]
fn reported_dof_count() {
    let g = Arc::new(make_star(12, VertexKind::Dirichlet).unwrap());
    let data = ProblemData::constant(1e-2, 1.0, 1.0, 1.0).unwrap();
    let sol = solve_ocp(g, 8, &data, &sym_opts()).unwrap();
    assert_eq!(sol.stats.n_dof, 13 + 12 * 7);
}

fn study(jobs: usize) -> StudyConfig {
    StudyConfig {
        graph: GraphSpec::Star(6),
        betas: vec![1e-2, 1e-4],
        n_es: vec![4, 8],
        precons: vec![PreconKind::MatchedSymmetric, PreconKind::Ideal],
        jobs,
        timing: false,
        ..StudyConfig::default()
    }
}

#[test]
fn iteration_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for (k, jobs) in [1, 0, 2].into_iter().enumerate() {
        let cfg = study(jobs);
        let cells = iteration_study(&cfg).unwrap();
        let p = dir.path().join(format!("{k}.csv"));
        write_iteration_csv(&p, &cells, cfg.solver, false).unwrap();
        texts.push(std::fs::read_to_string(p).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    assert_eq!(texts[0], texts[2]);
    assert_eq!(texts[0].lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn file_graph_specs() {
    let dir = tempfile::tempdir().unwrap();
    let star = make_star(4, VertexKind::Dirichlet).unwrap();
    let jp = dir.path().join("star.json");
    std::fs::write(&jp, metric_graph_to_json(&star).unwrap()).unwrap();
    let loaded = GraphSpec::File(jp).build(0, 0).unwrap();
    assert_eq!(loaded, star);

    let mp = dir.path().join("ring.mtx");
    let body = "%%MatrixMarket matrix coordinate pattern symmetric\n5 5 5\n2 1\n3 2\n4 3\n5 4\n5 1\n";
    std::fs::write(&mp, body).unwrap();
    let ring = GraphSpec::File(mp).build(2, 7).unwrap();
    assert_eq!((ring.n_vertices(), ring.n_edges(), ring.n_dirichlet()), (5, 5, 2));
    assert!(ring.lengths().iter().all(|l| *l == 1.0));
}
