mod common;

use std::sync::Arc;

use common::*;
use metgraph_ocp::assembly::{FeOperators, ProblemData};
use metgraph_ocp::graphs::{make_fdm_l_graph, make_path, make_star, VertexKind};
use metgraph_ocp::optcontrol::{reduced_oracle, solve_ocp_with, PreconKind, SolveOptions, SolverKind};
use metgraph_ocp::pde::ForwardSolver;

fn max_rel_diff(lib: &metgraph_ocp::linalg::CsrMatrix, dense: &Dense) -> f64 {
    let scale = dense.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for (i, row) in dense.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((lib.get(i, j) - v).abs());
        }
    }
    worst / scale
}

#[test]
fn incidence_assembly_matches_element_loop() {
    let mut r = rng(11);
    for n_e in [1, 2, 3, 5] {
        let g = random_graph(9, 6, &mut r);
        let m = mesh(g, n_e);
        let ops = FeOperators::assemble(m.clone(), &ProblemData::constant(1.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
        let (a, mm) = element_assembly(&m);
        assert!(max_rel_diff(&ops.stiffness, &a) < 1e-14);
        assert!(max_rel_diff(&ops.mass, &mm) < 1e-14);
    }
}

#[test]
fn c0_mass_scales_mass() {
    let m = mesh(make_star(4, VertexKind::Dirichlet).unwrap(), 3);
    let ops = FeOperators::assemble(m.clone(), &ProblemData::constant(1.0, 2.5, 0.0, 0.0).unwrap()).unwrap();
    let (a, mm) = element_assembly(&m);
    let k: Dense = a
        .iter()
        .zip(&mm)
        .map(|(ra, rm)| ra.iter().zip(rm).map(|(x, y)| x + 2.5 * y).collect())
        .collect();
    assert!(max_rel_diff(&ops.system, &k) < 1e-14);
}

#[test]
fn kkt_control_matches_dense_reduced_control() {
    let mut r = rng(5);
    for trial in 0..4 {
        let g = random_graph(6 + trial, 3, &mut r);
        let m = mesh(g, 3);
        let (beta, c0, f, yb) = (0.05, 1.0 + trial as f64, 1.5, 1.0);
        let ops = FeOperators::assemble(m.clone(), &ProblemData::constant(beta, c0, f, yb).unwrap()).unwrap();
        let expect = dense_reduced_control(&m, beta, c0, f, yb);
        let opts = SolveOptions {
            tol: 1e-12,
            ..SolveOptions::new(SolverKind::Gmres, PreconKind::MatchedSymmetric)
        };
        let sol = solve_ocp_with(&ops, beta, &opts).unwrap();
        let diff: Vec<f64> = sol.u.iter().zip(&expect).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) <= 1e-8 * (1.0 + norm(&expect)), "trial {trial}: {diff:?}");
        let lib = reduced_oracle(&ops, beta).unwrap();
        let diff: Vec<f64> = lib.iter().zip(&expect).map(|(a, b)| a - b).collect();
        assert!(norm(&diff) <= 1e-10 * (1.0 + norm(&expect)));
    }
}

#[test]
fn direct_and_iterative_solutions_agree() {
    let g = make_fdm_l_graph(6, 4, 3).unwrap();
    let m = mesh(g, 4);
    let ops = FeOperators::assemble(m, &ProblemData::constant(0.1, 2.0, 1.5, 1.0).unwrap()).unwrap();
    let direct = solve_ocp_with(&ops, 0.1, &SolveOptions::new(SolverKind::Direct, PreconKind::None)).unwrap();
    assert!(direct.stats.converged && direct.stats.iterations == 0);
    let opts = SolveOptions {
        tol: 1e-11,
        ..SolveOptions::new(SolverKind::Gmres, PreconKind::MatchedSymmetric)
    };
    let it = solve_ocp_with(&ops, 0.1, &opts).unwrap();
    let diff: Vec<f64> = it.u.iter().zip(&direct.u).map(|(a, b)| a - b).collect();
    assert!(norm(&diff) < 1e-8 * norm(&direct.u));
}

#[test]
fn harmonic_extension_of_constant_without_reaction() {
    // with c0 = 0 a constant control extends to the constant function
    let m = mesh(make_path(5).unwrap(), 4);
    let ops = FeOperators::assemble(m, &ProblemData::constant(1.0, 0.0, 0.0, 0.0).unwrap()).unwrap();
    let fwd = ForwardSolver::new(&ops).unwrap();
    let y = fwd.harmonic_extension(&[2.0, 2.0]).unwrap();
    assert!(y.values().iter().all(|v| (v - 2.0).abs() < 1e-13));
}

#[test]
fn path_state_matches_exact_quadratic() {
    // -y'' = 2 on a path of total length 4 with zero ends: y = x (4 - x),
    // reproduced exactly at the nodes by linear elements
    let g = Arc::new(make_path(5).unwrap());
    let m = Arc::new(metgraph_ocp::mesh::build_mesh(g, 4).unwrap());
    let ops = FeOperators::assemble(m.clone(), &ProblemData::constant(1.0, 0.0, 2.0, 0.0).unwrap()).unwrap();
    let fwd = ForwardSolver::new(&ops).unwrap();
    let y = fwd.solve_state(&[0.0, 0.0], &ops.f_vec).unwrap().y;
    let coord = |k: usize| match m.location(k) {
        metgraph_ocp::mesh::NodeLocation::Vertex(v) => v as f64,
        metgraph_ocp::mesh::NodeLocation::Interior { edge, x } => {
            let (tail, head) = m.graph().edges()[edge];
            // x is measured from the head vertex
            head as f64 + x * (tail as f64 - head as f64)
        }
    };
    for k in 0..m.n_dof() {
        let x = coord(k);
        assert!((y.values()[k] - x * (4.0 - x)).abs() < 1e-12, "node {k} at {x}");
    }
}
