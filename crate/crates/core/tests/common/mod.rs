#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use metgraph_ocp::graphs::{CombinatorialGraph, MetricGraph, VertexKind};
use metgraph_ocp::mesh::ExtendedMesh;

pub type Dense = Vec<Vec<f64>>;

/// Connected graph on `n` vertices: a random spanning tree plus up to `extra`
/// further edges, lengths in [0.25, 2], at least one Dirichlet vertex.
pub fn random_graph(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> MetricGraph {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let (a, b) = (a.min(b), a.max(b));
        if a != b && !edges.iter().any(|&(s, t)| (s.min(t), s.max(t)) == (a, b)) {
            edges.push((a, b));
        }
    }
    let lengths: Vec<f64> = edges.iter().map(|_| rng.gen_range(0.25..2.0)).collect();
    let mut kinds: Vec<VertexKind> = (0..n)
        .map(|_| if rng.gen_bool(0.3) { VertexKind::Dirichlet } else { VertexKind::Kirchhoff })
        .collect();
    let forced = rng.gen_range(0..n);
    kinds[forced] = VertexKind::Dirichlet;
    MetricGraph::new(CombinatorialGraph::new(n, edges).unwrap(), lengths, kinds).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stiffness and mass matrix summed interval by interval from the 2x2
/// element matrices `[1 -1; -1 1] / h` and `h/6 [2 1; 1 2]`.
pub fn element_assembly(mesh: &ExtendedMesh) -> (Dense, Dense) {
    let n = mesh.n_dof();
    let mut a = vec![vec![0.0; n]; n];
    let mut m = vec![vec![0.0; n]; n];
    for e in 0..mesh.graph().n_edges() {
        let h = mesh.h(e);
        for k in 0..mesh.n_intervals(e) {
            let idx = [mesh.edge_node_dof(e, k), mesh.edge_node_dof(e, k + 1)];
            for (r, &i) in idx.iter().enumerate() {
                for (s, &j) in idx.iter().enumerate() {
                    let sign = if r == s { 1.0 } else { -1.0 };
                    a[i][j] += sign / h;
                    m[i][j] += if r == s { 2.0 } else { 1.0 } * h / 6.0;
                }
            }
        }
    }
    (a, m)
}

pub fn mat_vec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Dense = a.iter().zip(b).map(|(r, bi)| r.iter().copied().chain([*bi]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// Optimal control for constant `c0`, `f`, `ybar` from dense matrices built
/// by [`element_assembly`]: eliminates the state through the discrete
/// harmonic extension and solves the normal equations of the reduced
/// tracking functional.
pub fn dense_reduced_control(mesh: &ExtendedMesh, beta: f64, c0: f64, f: f64, ybar: f64) -> Vec<f64> {
    let (a, m) = element_assembly(mesh);
    let n = mesh.n_dof();
    let k: Dense = (0..n).map(|i| (0..n).map(|j| a[i][j] + c0 * m[i][j]).collect()).collect();
    let free = mesh.free_range();
    let dir = mesh.dirichlet_range();
    let kff: Dense = free.clone().map(|i| free.clone().map(|j| k[i][j]).collect()).collect();
    let ones = vec![1.0; n];
    let load = mat_vec(&m, &ones);

    // y_f: source response with zero controls
    let bf: Vec<f64> = free.clone().map(|i| f * load[i]).collect();
    let mut y_f = dense_solve(&kff, &bf);
    y_f.extend(std::iter::repeat(0.0).take(dir.len()));

    let ext: Vec<Vec<f64>> = dir
        .clone()
        .map(|d| {
            let rhs: Vec<f64> = free.clone().map(|i| -k[i][d]).collect();
            let mut y = dense_solve(&kff, &rhs);
            y.extend(dir.clone().map(|j| if j == d { 1.0 } else { 0.0 }));
            y
        })
        .collect();
    let m_ext: Vec<Vec<f64>> = ext.iter().map(|v| mat_vec(&m, v)).collect();
    let nd = dir.len();
    let g: Dense = (0..nd)
        .map(|i| (0..nd).map(|j| dot(&ext[i], &m_ext[j]) + if i == j { beta } else { 0.0 }).collect())
        .collect();
    let target: Vec<f64> = (0..n).map(|i| ybar - y_f[i]).collect();
    let r: Vec<f64> = m_ext.iter().map(|mv| dot(mv, &target)).collect();
    dense_solve(&g, &r)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mesh(g: MetricGraph, n_e: usize) -> Arc<ExtendedMesh> {
    Arc::new(metgraph_ocp::mesh::build_mesh(Arc::new(g), n_e).unwrap())
}
