//! Extended graph: equidistant grids on every edge, the global DOF ordering
//! and the extended incidence matrices.
//!
//! DOFs are ordered as
//! `[interior nodes edge by edge | Kirchhoff vertices | Dirichlet vertices]`,
//! so the free DOFs are a prefix and the Dirichlet DOFs a suffix.
//!
//! On edge `e` with `n_e` intervals the grid nodes are numbered
//! `0..=n_e`: node 0 is the head vertex (the `+1` entry of the incidence
//! column), node `n_e` is the tail, and interior node `j` sits at distance
//! `j * h_e` from the head. Interval `k` joins nodes `k` and `k + 1` and is
//! column `offset_e + k` of the extended incidence matrix.

use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graphs::MetricGraph;
use crate::linalg::CsrMatrix;

/// What a DOF stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofNode {
    /// Interior grid node `j` (`1..n_e`) of edge `edge`.
    Interior { edge: usize, j: usize },
    /// Original graph vertex.
    Vertex(usize),
}

/// Location of a grid node, used to sample nodal data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeLocation {
    Vertex(usize),
    /// `x` is the distance from the head vertex along `edge`.
    Interior { edge: usize, x: f64 },
}

#[derive(Debug, Clone)]
pub struct ExtendedMesh {
    graph: Arc<MetricGraph>,
    n_intervals: Vec<usize>,
    interval_offset: Vec<usize>,
    interior_offset: Vec<usize>,
    n_interior: usize,
    n_kirchhoff: usize,
    n_dirichlet: usize,
    vertex_dof: Vec<usize>,
    dof_node: Vec<DofNode>,
    dirichlet_vertices: Vec<usize>,
}

/// Mesh with `n_e` intervals on every edge.
pub fn build_mesh(graph: Arc<MetricGraph>, n_e: usize) -> Result<ExtendedMesh> {
    let m = graph.n_edges();
    ExtendedMesh::with_intervals(graph, vec![n_e; m])
}

impl ExtendedMesh {
    /// Mesh with `n_intervals[e]` intervals on edge `e`.
    pub fn with_intervals(graph: Arc<MetricGraph>, n_intervals: Vec<usize>) -> Result<Self> {
        if n_intervals.len() != graph.n_edges() {
            return Err(Error::InvalidInput(format!(
                "{} interval counts for {} edges",
                n_intervals.len(),
                graph.n_edges()
            )));
        }
        if let Some(e) = n_intervals.iter().position(|&k| k == 0) {
            return Err(Error::InvalidInput(format!("edge {e} needs at least one interval")));
        }
        let mut interval_offset = Vec::with_capacity(n_intervals.len() + 1);
        let mut interior_offset = Vec::with_capacity(n_intervals.len() + 1);
        let (mut cols, mut rows) = (0, 0);
        for &k in &n_intervals {
            interval_offset.push(cols);
            interior_offset.push(rows);
            cols += k;
            rows += k - 1;
        }
        interval_offset.push(cols);
        interior_offset.push(rows);
        let n_interior = rows;

        let kirchhoff = graph.kirchhoff_nodes();
        let dirichlet = graph.dirichlet_nodes();
        let mut vertex_dof = vec![0; graph.n_vertices()];
        let mut dof_node = Vec::with_capacity(n_interior + graph.n_vertices());
        for (e, &k) in n_intervals.iter().enumerate() {
            dof_node.extend((1..k).map(|j| DofNode::Interior { edge: e, j }));
        }
        for &v in kirchhoff.iter().chain(&dirichlet) {
            vertex_dof[v] = dof_node.len();
            dof_node.push(DofNode::Vertex(v));
        }

        Ok(Self {
            n_kirchhoff: kirchhoff.len(),
            n_dirichlet: dirichlet.len(),
            graph,
            n_intervals,
            interval_offset,
            interior_offset,
            n_interior,
            vertex_dof,
            dof_node,
            dirichlet_vertices: dirichlet,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn n_intervals(&self, e: usize) -> usize {
        self.n_intervals[e]
    }

    pub fn intervals_per_edge(&self) -> &[usize] {
        &self.n_intervals
    }

    /// Uniform interval count, if every edge has the same.
    pub fn uniform_intervals(&self) -> Option<usize> {
        let first = *self.n_intervals.first()?;
        self.n_intervals.iter().all(|&k| k == first).then_some(first)
    }

    pub fn total_intervals(&self) -> usize {
        *self.interval_offset.last().unwrap()
    }

    pub fn h(&self, e: usize) -> f64 {
        self.graph.lengths()[e] / self.n_intervals[e] as f64
    }

    /// Largest interval width.
    pub fn h_max(&self) -> f64 {
        (0..self.n_intervals.len()).map(|e| self.h(e)).fold(0.0, f64::max)
    }

    pub fn h_min(&self) -> f64 {
        (0..self.n_intervals.len()).map(|e| self.h(e)).fold(f64::INFINITY, f64::min)
    }

    /// `n + sum_e (n_e - 1)`.
    pub fn n_dof(&self) -> usize {
        self.dof_node.len()
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_kirchhoff(&self) -> usize {
        self.n_kirchhoff
    }

    pub fn n_dirichlet(&self) -> usize {
        self.n_dirichlet
    }

    pub fn n_free(&self) -> usize {
        self.n_interior + self.n_kirchhoff
    }

    pub fn free_range(&self) -> Range<usize> {
        0..self.n_free()
    }

    pub fn dirichlet_range(&self) -> Range<usize> {
        self.n_free()..self.n_dof()
    }

    /// Dirichlet vertex ids in control-vector order.
    pub fn dirichlet_vertices(&self) -> &[usize] {
        &self.dirichlet_vertices
    }

    pub fn vertex_dof(&self, v: usize) -> usize {
        self.vertex_dof[v]
    }

    pub fn dof_node(&self, k: usize) -> DofNode {
        self.dof_node[k]
    }

    /// DOF of grid node `k` (`0..=n_e`) on edge `e`.
    pub fn edge_node_dof(&self, e: usize, k: usize) -> usize {
        let n_e = self.n_intervals[e];
        let (tail, head) = self.graph.edges()[e];
        match k {
            0 => self.vertex_dof[head],
            k if k == n_e => self.vertex_dof[tail],
            k => {
                debug_assert!(k < n_e);
                self.interior_offset[e] + k - 1
            }
        }
    }

    /// Inverse of [`dof_node`](Self::dof_node).
    pub fn dof_of(&self, node: DofNode) -> usize {
        match node {
            DofNode::Vertex(v) => self.vertex_dof[v],
            DofNode::Interior { edge, j } => self.interior_offset[edge] + j - 1,
        }
    }

    pub fn location(&self, k: usize) -> NodeLocation {
        match self.dof_node[k] {
            DofNode::Vertex(v) => NodeLocation::Vertex(v),
            DofNode::Interior { edge, j } => NodeLocation::Interior {
                edge,
                x: j as f64 * self.h(edge),
            },
        }
    }

    /// Nodal interpolant of `f` in DOF order.
    pub fn interpolate(&self, f: impl Fn(NodeLocation) -> f64) -> Vec<f64> {
        (0..self.n_dof()).map(|k| f(self.location(k))).collect()
    }

    /// Global column range (intervals) of edge `e`.
    pub fn interval_range(&self, e: usize) -> Range<usize> {
        self.interval_offset[e]..self.interval_offset[e + 1]
    }

    /// `E_i`: block diagonal, one `(n_e - 1) x n_e` bidiagonal block
    /// `[-1 1; -1 1; ...]` per edge. Rows are interior DOFs.
    pub fn interior_incidence(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(2 * self.n_interior);
        for e in 0..self.n_intervals.len() {
            let row0 = self.interior_offset[e];
            let col0 = self.interval_offset[e];
            for j in 0..self.n_intervals[e] - 1 {
                t.push((row0 + j, col0 + j, -1.0));
                t.push((row0 + j, col0 + j + 1, 1.0));
            }
        }
        CsrMatrix::from_triplets(self.n_interior, self.total_intervals(), &t)
    }

    /// `E_v` (`n x sum n_e`, rows by vertex id): for edge `j` the head entry
    /// of `E⁺` sits in the first interval column and the tail entry of `E⁻`
    /// in the last one.
    pub fn vertex_incidence(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(2 * self.n_intervals.len());
        for (e, &(tail, head)) in self.graph.edges().iter().enumerate() {
            let cols = self.interval_range(e);
            t.push((head, cols.start, 1.0));
            t.push((tail, cols.end - 1, -1.0));
        }
        CsrMatrix::from_triplets(self.graph.n_vertices(), self.total_intervals(), &t)
    }

    /// `Ẽ = [E_i; E_v]` with the vertex rows moved to their DOF positions.
    pub fn extended_incidence(&self) -> CsrMatrix {
        let ei = self.interior_incidence();
        let ev = self.vertex_incidence();
        let mut t: Vec<_> = ei.triplets().collect();
        t.extend(ev.triplets().map(|(v, c, x)| (self.vertex_dof[v], c, x)));
        CsrMatrix::from_triplets(self.n_dof(), self.total_intervals(), &t)
    }

    /// Width `h_e` of every interval, indexed like the incidence columns.
    pub fn interval_widths(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.total_intervals());
        for e in 0..self.n_intervals.len() {
            w.extend(std::iter::repeat(self.h(e)).take(self.n_intervals[e]));
        }
        w
    }

    /// Same graph and same vertex partition.
    pub fn same_graph(&self, other: &ExtendedMesh) -> bool {
        Arc::ptr_eq(&self.graph, &other.graph) || *self.graph == *other.graph
    }
}

/// A continuous piecewise-linear function given by its nodal values in DOF
/// order.
#[derive(Debug, Clone)]
pub struct PiecewiseLinear {
    mesh: Arc<ExtendedMesh>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(mesh: Arc<ExtendedMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_dof() {
            return Err(Error::DimensionMismatch {
                op: "piecewise linear values",
                left: (mesh.n_dof(), 1),
                right: (values.len(), 1),
            });
        }
        Ok(Self { mesh, values })
    }

    pub fn zero(mesh: Arc<ExtendedMesh>) -> Self {
        let n = mesh.n_dof();
        Self {
            mesh,
            values: vec![0.0; n],
        }
    }

    pub fn mesh(&self) -> &Arc<ExtendedMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn free_values(&self) -> &[f64] {
        &self.values[self.mesh.free_range()]
    }

    pub fn dirichlet_values(&self) -> &[f64] {
        &self.values[self.mesh.dirichlet_range()]
    }

    /// Value at a vertex.
    pub fn at_vertex(&self, v: usize) -> f64 {
        self.values[self.mesh.vertex_dof(v)]
    }
}

fn refinement_ratios(coarse: &ExtendedMesh, fine: &ExtendedMesh) -> Result<Vec<usize>> {
    if !coarse.same_graph(fine) {
        return Err(Error::InvalidInput("meshes live on different graphs".into()));
    }
    coarse
        .intervals_per_edge()
        .iter()
        .zip(fine.intervals_per_edge())
        .enumerate()
        .map(|(e, (&c, &f))| {
            if f % c != 0 {
                Err(Error::InvalidInput(format!(
                    "edge {e}: {f} fine intervals do not refine {c} coarse ones"
                )))
            } else {
                Ok(f / c)
            }
        })
        .collect()
}

/// Exact nodal interpolation of `coarse` onto a nested refinement.
pub fn prolong(coarse: &PiecewiseLinear, fine: &Arc<ExtendedMesh>) -> Result<PiecewiseLinear> {
    let cm = coarse.mesh();
    let ratios = refinement_ratios(cm, fine)?;
    let mut out = vec![0.0; fine.n_dof()];
    for v in 0..cm.graph().n_vertices() {
        out[fine.vertex_dof(v)] = coarse.at_vertex(v);
    }
    for (e, &r) in ratios.iter().enumerate() {
        for j in 1..fine.n_intervals(e) {
            let (c, off) = (j / r, j % r);
            let left = coarse.values[cm.edge_node_dof(e, c)];
            let value = if off == 0 {
                left
            } else {
                let right = coarse.values[cm.edge_node_dof(e, c + 1)];
                let t = off as f64 / r as f64;
                (1.0 - t) * left + t * right
            };
            out[fine.edge_node_dof(e, j)] = value;
        }
    }
    PiecewiseLinear::new(fine.clone(), out)
}

/// Injection of fine nodal values onto the coarse grid nodes.
pub fn restrict(fine: &PiecewiseLinear, coarse: &Arc<ExtendedMesh>) -> Result<PiecewiseLinear> {
    let fm = fine.mesh();
    let ratios = refinement_ratios(coarse, fm)?;
    let mut out = vec![0.0; coarse.n_dof()];
    for (e, &r) in ratios.iter().enumerate() {
        for k in 0..=coarse.n_intervals(e) {
            out[coarse.edge_node_dof(e, k)] = fine.values[fm.edge_node_dof(e, k * r)];
        }
    }
    PiecewiseLinear::new(coarse.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{make_star, CombinatorialGraph, VertexKind};

    fn single_edge() -> Arc<MetricGraph> {
        let base = CombinatorialGraph::new(2, vec![(0, 1)]).unwrap();
        Arc::new(MetricGraph::new(base, vec![1.0], vec![VertexKind::Dirichlet; 2]).unwrap())
    }

    #[test]
    fn dof_counts() {
        let m = build_mesh(single_edge(), 4).unwrap();
        assert_eq!(m.n_dof(), 5);
        assert_eq!(m.n_interior(), 3);
        let star = Arc::new(make_star(12, VertexKind::Dirichlet).unwrap());
        let m = build_mesh(star, 8).unwrap();
        assert_eq!(m.n_dof(), 12 * 7 + 13);
        assert_eq!(m.n_free(), 12 * 7 + 1);
        assert!(build_mesh(single_edge(), 0).is_err());
    }

    #[test]
    fn interior_blocks() {
        let m = build_mesh(single_edge(), 2).unwrap();
        assert_eq!(m.interior_incidence().to_dense(), vec![vec![-1.0, 1.0]]);
        let m = build_mesh(single_edge(), 3).unwrap();
        assert_eq!(
            m.interior_incidence().to_dense(),
            vec![vec![-1.0, 1.0, 0.0], vec![0.0, -1.0, 1.0]]
        );
        let two = Arc::new(
            MetricGraph::new(
                CombinatorialGraph::new(3, vec![(0, 1), (1, 2)]).unwrap(),
                vec![1.0, 1.0],
                vec![VertexKind::Kirchhoff; 3],
            )
            .unwrap(),
        );
        let m = build_mesh(two, 2).unwrap();
        assert_eq!(
            m.interior_incidence().to_dense(),
            vec![vec![-1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, -1.0, 1.0]]
        );
    }

    #[test]
    fn vertex_incidence_single_edge() {
        // edge 0 -> 1: tail 0, head 1
        let m = build_mesh(single_edge(), 2).unwrap();
        let ev = m.vertex_incidence().to_dense();
        assert_eq!(ev, vec![vec![0.0, -1.0], vec![1.0, 0.0]]);
        let ev1 = build_mesh(single_edge(), 1).unwrap().vertex_incidence().to_dense();
        assert_eq!(ev1, vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn star_vertex_incidence_nnz() {
        let star = Arc::new(make_star(3, VertexKind::Dirichlet).unwrap());
        let m = build_mesh(star, 2).unwrap();
        let ev = m.vertex_incidence();
        assert_eq!(ev.shape(), (4, 6));
        assert_eq!(ev.nnz(), 6);
    }

    #[test]
    fn extended_columns_have_one_plus_one_minus() {
        let star = Arc::new(make_star(5, VertexKind::Dirichlet).unwrap());
        for n_e in [1, 2, 5] {
            let m = build_mesh(star.clone(), n_e).unwrap();
            let et = m.extended_incidence().transpose();
            for c in 0..et.nrows() {
                let (_, v) = et.row(c);
                let mut v = v.to_vec();
                v.sort_by(f64::total_cmp);
                assert_eq!(v, vec![-1.0, 1.0]);
            }
        }
    }

    #[test]
    fn dof_order_round_trip() {
        let star = Arc::new(make_star(4, VertexKind::Dirichlet).unwrap());
        let m = build_mesh(star, 3).unwrap();
        for k in 0..m.n_dof() {
            assert_eq!(m.dof_of(m.dof_node(k)), k);
        }
        // Kirchhoff centre first, then the Dirichlet leaves
        assert_eq!(m.vertex_dof(0), m.n_interior());
        assert_eq!(m.dirichlet_range().len(), 4);
    }

    #[test]
    fn prolong_hat_and_constant() {
        let g = single_edge();
        let coarse = Arc::new(build_mesh(g.clone(), 2).unwrap());
        let fine = Arc::new(build_mesh(g, 4).unwrap());
        let mut hat = vec![0.0; coarse.n_dof()];
        hat[coarse.edge_node_dof(0, 1)] = 1.0;
        let p = prolong(&PiecewiseLinear::new(coarse.clone(), hat).unwrap(), &fine).unwrap();
        let along: Vec<f64> = (0..=4).map(|k| p.values()[fine.edge_node_dof(0, k)]).collect();
        assert_eq!(along, vec![0.0, 0.5, 1.0, 0.5, 0.0]);

        let c = PiecewiseLinear::new(coarse.clone(), vec![2.5; coarse.n_dof()]).unwrap();
        assert!(prolong(&c, &fine).unwrap().values().iter().all(|v| *v == 2.5));
        let back = restrict(&prolong(&c, &fine).unwrap(), &coarse).unwrap();
        assert_eq!(back.values(), c.values());
    }

    #[test]
    fn prolong_rejects_non_nested() {
        let g = single_edge();
        let a = Arc::new(build_mesh(g.clone(), 2).unwrap());
        let b = Arc::new(build_mesh(g, 3).unwrap());
        assert!(prolong(&PiecewiseLinear::zero(a), &b).is_err());
    }
}
