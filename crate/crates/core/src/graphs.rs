//! Combinatorial and metric graphs, test-graph generators and loaders.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::mm::{self, MmFormat};
use crate::linalg::CsrMatrix;

/// Undirected weighted graph with a fixed orientation per edge.
///
/// The orientation (`tail -> head`) only signs the incidence matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinatorialGraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    coordinates: Option<Vec<[f64; 2]>>,
    lookup: HashMap<(usize, usize), usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl CombinatorialGraph {
    /// Unit-weight graph.
    pub fn new(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let w = vec![1.0; edges.len()];
        Self::with_weights(n_vertices, edges, w)
    }

    pub fn with_weights(n_vertices: usize, edges: Vec<(usize, usize)>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != edges.len() {
            return Err(Error::InvalidGraph(format!(
                "{} weights for {} edges",
                weights.len(),
                edges.len()
            )));
        }
        let mut lookup = HashMap::with_capacity(edges.len());
        for (j, (&(a, b), &w)) in edges.iter().zip(&weights).enumerate() {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {j} = ({a}, {b}) references a vertex outside 0..{n_vertices}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("edge {j} is a self-loop at {a}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge {j} has non-positive weight {w}")));
            }
            if lookup.insert(key(a, b), j).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self {
            n_vertices,
            edges,
            weights,
            coordinates: None,
            lookup,
        })
    }

    pub fn with_coordinates(mut self, coords: Vec<[f64; 2]>) -> Result<Self> {
        if coords.len() != self.n_vertices {
            return Err(Error::InvalidGraph(format!(
                "{} coordinates for {} vertices",
                coords.len(),
                self.n_vertices
            )));
        }
        self.coordinates = Some(coords);
        Ok(self)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coordinates(&self) -> Option<&[[f64; 2]]> {
        self.coordinates.as_deref()
    }

    /// `w(v, v')`: the edge weight, or zero when not adjacent.
    pub fn weight(&self, v: usize, w: usize) -> f64 {
        self.lookup.get(&key(v, w)).map_or(0.0, |&j| self.weights[j])
    }

    pub fn degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n_vertices];
        for (&(a, b), &w) in self.edges.iter().zip(&self.weights) {
            d[a] += w;
            d[b] += w;
        }
        d
    }
}

/// Signed vertex-edge incidence matrix (`n x m`): `-1` at the tail, `+1` at
/// the head of each edge.
pub fn incidence_matrix(g: &CombinatorialGraph) -> CsrMatrix {
    let t: Vec<_> = g
        .edges()
        .iter()
        .enumerate()
        .flat_map(|(j, &(tail, head))| [(tail, j, -1.0), (head, j, 1.0)])
        .collect();
    CsrMatrix::from_triplets(g.n_vertices(), g.n_edges(), &t)
}

/// `L = D - W`.
pub fn graph_laplacian(g: &CombinatorialGraph) -> CsrMatrix {
    let mut t: Vec<_> = g
        .degrees()
        .into_iter()
        .enumerate()
        .map(|(v, d)| (v, v, d))
        .collect();
    for (&(a, b), &w) in g.edges().iter().zip(g.edge_weights()) {
        t.push((a, b, -w));
        t.push((b, a, -w));
    }
    CsrMatrix::from_triplets(g.n_vertices(), g.n_vertices(), &t)
}

/// `L_s = I - D^{-1/2} W D^{-1/2}`; fails on isolated vertices.
pub fn normalized_laplacian(g: &CombinatorialGraph) -> Result<CsrMatrix> {
    let d = g.degrees();
    if let Some(v) = d.iter().position(|&x| x <= 0.0) {
        return Err(Error::InvalidGraph(format!(
            "vertex {v} is isolated; normalized Laplacian undefined"
        )));
    }
    let s: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut t: Vec<_> = (0..g.n_vertices()).map(|v| (v, v, 1.0)).collect();
    for (&(a, b), &w) in g.edges().iter().zip(g.edge_weights()) {
        let x = -w * s[a] * s[b];
        t.push((a, b, x));
        t.push((b, a, x));
    }
    Ok(CsrMatrix::from_triplets(g.n_vertices(), g.n_vertices(), &t))
}

/// Vertex condition of a metric-graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    /// Value prescribed by the control.
    Dirichlet,
    /// Kirchhoff-Neumann flux balance.
    Kirchhoff,
}

/// A combinatorial graph with edge lengths and a Dirichlet/Kirchhoff split.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    base: CombinatorialGraph,
    lengths: Vec<f64>,
    kinds: Vec<VertexKind>,
}

impl MetricGraph {
    pub fn new(base: CombinatorialGraph, lengths: Vec<f64>, kinds: Vec<VertexKind>) -> Result<Self> {
        if lengths.len() != base.n_edges() {
            return Err(Error::InvalidGraph(format!(
                "{} lengths for {} edges",
                lengths.len(),
                base.n_edges()
            )));
        }
        if let Some((j, l)) = lengths.iter().enumerate().find(|(_, l)| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidGraph(format!("edge {j} has non-positive length {l}")));
        }
        if kinds.len() != base.n_vertices() {
            return Err(Error::InvalidGraph(format!(
                "{} vertex kinds for {} vertices",
                kinds.len(),
                base.n_vertices()
            )));
        }
        Ok(Self { base, lengths, kinds })
    }

    /// Unit lengths, all vertices Kirchhoff.
    pub fn unit(base: CombinatorialGraph) -> Self {
        let m = base.n_edges();
        let n = base.n_vertices();
        Self {
            base,
            lengths: vec![1.0; m],
            kinds: vec![VertexKind::Kirchhoff; n],
        }
    }

    pub fn base(&self) -> &CombinatorialGraph {
        &self.base
    }

    pub fn n_vertices(&self) -> usize {
        self.base.n_vertices()
    }

    pub fn n_edges(&self) -> usize {
        self.base.n_edges()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        self.base.edges()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn kinds(&self) -> &[VertexKind] {
        &self.kinds
    }

    pub fn kind(&self, v: usize) -> VertexKind {
        self.kinds[v]
    }

    /// Dirichlet vertex ids in increasing order.
    pub fn dirichlet_nodes(&self) -> Vec<usize> {
        (0..self.n_vertices())
            .filter(|&v| self.kinds[v] == VertexKind::Dirichlet)
            .collect()
    }

    /// Kirchhoff vertex ids in increasing order.
    pub fn kirchhoff_nodes(&self) -> Vec<usize> {
        (0..self.n_vertices())
            .filter(|&v| self.kinds[v] == VertexKind::Kirchhoff)
            .collect()
    }

    pub fn n_dirichlet(&self) -> usize {
        self.kinds.iter().filter(|k| **k == VertexKind::Dirichlet).count()
    }

    pub fn with_kinds(mut self, kinds: Vec<VertexKind>) -> Result<Self> {
        if kinds.len() != self.n_vertices() {
            return Err(Error::InvalidGraph("vertex kind count mismatch".into()));
        }
        self.kinds = kinds;
        Ok(self)
    }

    /// Replaces the Dirichlet set by `k` vertices drawn with
    /// [`choose_vertices`].
    pub fn with_random_dirichlet(self, k: usize, seed: u64) -> Result<Self> {
        let chosen = choose_vertices(self.n_vertices(), k, seed)?;
        let mut kinds = vec![VertexKind::Kirchhoff; self.n_vertices()];
        for v in chosen {
            kinds[v] = VertexKind::Dirichlet;
        }
        self.with_kinds(kinds)
    }

    /// Edge lengths from the Euclidean distance of vertex coordinates; edges
    /// whose endpoints coincide, or graphs without coordinates, keep length 1.
    pub fn with_euclidean_lengths(mut self) -> Self {
        if let Some(c) = self.base.coordinates() {
            self.lengths = self
                .base
                .edges()
                .iter()
                .map(|&(a, b)| {
                    let d = ((c[a][0] - c[b][0]).powi(2) + (c[a][1] - c[b][1]).powi(2)).sqrt();
                    if d > 0.0 && d.is_finite() {
                        d
                    } else {
                        1.0
                    }
                })
                .collect();
        }
        self
    }
}

/// Draws `k` distinct vertices out of `0..n` by partial Fisher-Yates over a
/// ChaCha8 stream seeded with `seed`. The result is sorted.
///
/// ChaCha8 (from `rand_chacha`) is portable and its output for a given seed
/// is stable across platforms and releases.
pub fn choose_vertices(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::InvalidInput(format!(
            "cannot choose {k} control nodes out of {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        perm.swap(i, j);
    }
    let mut out = perm[..k].to_vec();
    out.sort_unstable();
    Ok(out)
}

/// Star graph: vertex 0 is the Kirchhoff centre, vertices `1..=n_leaves` are
/// leaves of kind `leaf_kind`. Unit lengths and weights.
pub fn make_star(n_leaves: usize, leaf_kind: VertexKind) -> Result<MetricGraph> {
    if n_leaves == 0 {
        return Err(Error::InvalidInput("a star needs at least one leaf".into()));
    }
    let edges = (1..=n_leaves).map(|i| (0, i)).collect();
    let base = CombinatorialGraph::new(n_leaves + 1, edges)?;
    let mut kinds = vec![leaf_kind; n_leaves + 1];
    kinds[0] = VertexKind::Kirchhoff;
    MetricGraph::new(base, vec![1.0; n_leaves], kinds)
}

/// Path `0 - 1 - ... - (n-1)` with Dirichlet end points, Kirchhoff interior.
pub fn make_path(n_vertices: usize) -> Result<MetricGraph> {
    if n_vertices < 2 {
        return Err(Error::InvalidInput("a path needs at least two vertices".into()));
    }
    let edges = (0..n_vertices - 1).map(|i| (i, i + 1)).collect();
    let base = CombinatorialGraph::new(n_vertices, edges)?;
    let mut kinds = vec![VertexKind::Kirchhoff; n_vertices];
    kinds[0] = VertexKind::Dirichlet;
    kinds[n_vertices - 1] = VertexKind::Dirichlet;
    MetricGraph::new(base, vec![1.0; n_vertices - 1], kinds)
}

/// Five-point finite-difference graph of an L-shaped region.
///
/// Vertices are the points `(i, j)` of an `N x N` lattice minus the closed
/// quadrant `i >= N/2, j >= N/2`; edges join horizontal and vertical
/// neighbours. For `N = 10` this gives 75 vertices and 130 edges. Vertices
/// are numbered row by row, edge tails are the smaller id, lengths are 1.
/// `n_controls` vertices chosen by [`choose_vertices`] become Dirichlet.
pub fn make_fdm_l_graph(n: usize, n_controls: usize, seed: u64) -> Result<MetricGraph> {
    if n < 4 {
        return Err(Error::InvalidInput(format!("L-graph needs N >= 4, got {n}")));
    }
    let half = n / 2;
    let inside = |i: usize, j: usize| !(i >= half && j >= half);
    let mut id = vec![vec![usize::MAX; n]; n];
    let mut coords = Vec::new();
    for j in 0..n {
        for i in 0..n {
            if inside(i, j) {
                id[j][i] = coords.len();
                coords.push([i as f64, j as f64]);
            }
        }
    }
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let a = id[j][i];
            if a == usize::MAX {
                continue;
            }
            if i + 1 < n && id[j][i + 1] != usize::MAX {
                edges.push((a, id[j][i + 1]));
            }
            if j + 1 < n && id[j + 1][i] != usize::MAX {
                edges.push((a, id[j + 1][i]));
            }
        }
    }
    edges.sort_unstable();
    let nv = coords.len();
    let m = edges.len();
    let base = CombinatorialGraph::new(nv, edges)?.with_coordinates(coords)?;
    MetricGraph::new(base, vec![1.0; m], vec![VertexKind::Kirchhoff; nv])?
        .with_random_dirichlet(n_controls, seed)
}

/// Companion coordinate file for `dir/name.mtx`: `dir/name_coord.mtx`.
pub fn coordinate_companion(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}_coord.mtx"))
}

/// Reads an undirected graph from a square MatrixMarket coordinate file.
///
/// Each stored off-diagonal entry becomes one edge (both triangles are
/// accepted and deduplicated); diagonal entries are ignored. Weights come
/// from the absolute stored values, or are 1 for pattern files and zero
/// values. If `<stem>_coord.mtx` exists next to the file it is read as an
/// `n x 2` array of vertex positions.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<CombinatorialGraph> {
    let path = path.as_ref();
    let data = mm::read(path)?;
    if data.header.format != MmFormat::Coordinate {
        return Err(Error::Parse {
            path: path.into(),
            line: 1,
            msg: "graph files must use coordinate format".into(),
        });
    }
    if data.nrows != data.ncols {
        return Err(Error::Parse {
            path: path.into(),
            line: 2,
            msg: format!("adjacency matrix must be square, got {}x{}", data.nrows, data.ncols),
        });
    }
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    for &(r, c, v) in &data.entries {
        if r == c {
            continue;
        }
        let k = key(r, c);
        if seen.contains_key(&k) {
            continue;
        }
        seen.insert(k, edges.len());
        edges.push(k);
        let w = v.abs();
        weights.push(if w > 0.0 && w.is_finite() { w } else { 1.0 });
    }
    let mut g = CombinatorialGraph::with_weights(data.nrows, edges, weights)?;
    let companion = coordinate_companion(path);
    if companion.exists() {
        let c = mm::read(&companion)?;
        if c.header.format != MmFormat::Array || c.nrows != data.nrows || c.ncols < 2 {
            return Err(Error::Parse {
                path: companion,
                line: 2,
                msg: format!("expected a {}x2 array of coordinates", data.nrows),
            });
        }
        let coords = (0..c.nrows).map(|i| [c.dense[i], c.dense[c.nrows + i]]).collect();
        g = g.with_coordinates(coords)?;
    }
    Ok(g)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonVertex {
    id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(rename = "type")]
    kind: VertexKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonEdge {
    u: usize,
    v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct JsonGraph {
    vertices: Vec<JsonVertex>,
    edges: Vec<JsonEdge>,
}

/// Parses the graph JSON format. Vertex ids must be `0..n` (any order);
/// missing lengths and weights default to 1.
pub fn metric_graph_from_json(text: &str) -> Result<MetricGraph> {
    let jg: JsonGraph = serde_json::from_str(text)?;
    let n = jg.vertices.len();
    let mut kinds = vec![None; n];
    let mut coords = vec![[f64::NAN; 2]; n];
    let mut have_coords = true;
    for v in &jg.vertices {
        if v.id >= n || kinds[v.id].is_some() {
            return Err(Error::InvalidGraph(format!("vertex ids must be a permutation of 0..{n}; bad id {}", v.id)));
        }
        kinds[v.id] = Some(v.kind);
        match (v.x, v.y) {
            (Some(x), Some(y)) => coords[v.id] = [x, y],
            _ => have_coords = false,
        }
    }
    let kinds: Vec<VertexKind> = kinds.into_iter().map(|k| k.unwrap()).collect();
    let edges = jg.edges.iter().map(|e| (e.u, e.v)).collect();
    let weights = jg.edges.iter().map(|e| e.weight.unwrap_or(1.0)).collect();
    let lengths = jg.edges.iter().map(|e| e.length.unwrap_or(1.0)).collect();
    let mut base = CombinatorialGraph::with_weights(n, edges, weights)?;
    if have_coords && n > 0 {
        base = base.with_coordinates(coords)?;
    }
    MetricGraph::new(base, lengths, kinds)
}

pub fn metric_graph_to_json(g: &MetricGraph) -> Result<String> {
    let coords = g.base().coordinates();
    let jg = JsonGraph {
        vertices: (0..g.n_vertices())
            .map(|v| JsonVertex {
                id: v,
                x: coords.map(|c| c[v][0]),
                y: coords.map(|c| c[v][1]),
                kind: g.kind(v),
            })
            .collect(),
        edges: g
            .edges()
            .iter()
            .zip(g.lengths())
            .zip(g.base().edge_weights())
            .map(|((&(u, v), &l), &w)| JsonEdge {
                u,
                v,
                length: Some(l),
                weight: Some(w),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&jg)?)
}

pub fn load_json(path: impl AsRef<Path>) -> Result<MetricGraph> {
    metric_graph_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(a: &CsrMatrix) -> Vec<Vec<f64>> {
        a.to_dense()
    }

    #[test]
    fn path_incidence_and_laplacian() {
        let g = CombinatorialGraph::new(2, vec![(0, 1)]).unwrap();
        let e = incidence_matrix(&g);
        assert_eq!(dense(&e), vec![vec![-1.0], vec![1.0]]);
        let l = graph_laplacian(&g);
        assert_eq!(dense(&l), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(dense(&e.matmul(&e.transpose()).unwrap()), dense(&l));
        assert_eq!(dense(&normalized_laplacian(&g).unwrap()), dense(&l));
    }

    #[test]
    fn star_laplacian_by_hand() {
        // centre 0, leaves 1 and 2
        let g = CombinatorialGraph::new(3, vec![(0, 1), (0, 2)]).unwrap();
        let e = incidence_matrix(&g);
        let l = e.matmul(&e.transpose()).unwrap();
        assert_eq!(
            dense(&l),
            vec![vec![2.0, -1.0, -1.0], vec![-1.0, 1.0, 0.0], vec![-1.0, 0.0, 1.0]]
        );
    }

    #[test]
    fn triangle_laplacian() {
        let g = CombinatorialGraph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let l = graph_laplacian(&g);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 2.0 } else { -1.0 };
                assert_eq!(l.get(i, j), want);
            }
        }
        assert!(l.row_lump().iter().all(|s| *s == 0.0));
        let ls = normalized_laplacian(&g).unwrap();
        assert_eq!(ls.symmetry_defect(), 0.0);
    }

    #[test]
    fn empty_and_single_vertex() {
        let g = CombinatorialGraph::new(3, vec![]).unwrap();
        let e = incidence_matrix(&g);
        assert_eq!(e.shape(), (3, 0));
        assert_eq!(e.matmul(&e.transpose()).unwrap().nnz(), 0);
        let one = CombinatorialGraph::new(1, vec![]).unwrap();
        assert_eq!(dense(&graph_laplacian(&one)), vec![vec![0.0]]);
        assert!(normalized_laplacian(&one).is_err());
    }

    #[test]
    fn weights_are_symmetric() {
        let g = CombinatorialGraph::with_weights(3, vec![(0, 2), (1, 2)], vec![2.5, 0.5]).unwrap();
        assert_eq!(g.weight(0, 2), 2.5);
        assert_eq!(g.weight(2, 0), 2.5);
        assert_eq!(g.weight(0, 1), 0.0);
    }

    #[test]
    fn invalid_graphs_rejected() {
        assert!(CombinatorialGraph::new(2, vec![(0, 0)]).is_err());
        assert!(CombinatorialGraph::new(2, vec![(0, 2)]).is_err());
        assert!(CombinatorialGraph::new(2, vec![(0, 1), (1, 0)]).is_err());
        let base = CombinatorialGraph::new(2, vec![(0, 1)]).unwrap();
        assert!(MetricGraph::new(base, vec![0.0], vec![VertexKind::Kirchhoff; 2]).is_err());
    }

    #[test]
    fn stars() {
        let s = make_star(3, VertexKind::Dirichlet).unwrap();
        assert_eq!((s.n_vertices(), s.n_edges(), s.n_dirichlet()), (4, 3, 3));
        assert_eq!(s.kind(0), VertexKind::Kirchhoff);
        let one = make_star(1, VertexKind::Dirichlet).unwrap();
        assert_eq!((one.n_edges(), one.dirichlet_nodes()), (1, vec![1]));
        let big = make_star(12, VertexKind::Dirichlet).unwrap();
        assert_eq!((big.n_vertices(), big.n_edges()), (13, 12));
        assert!(make_star(0, VertexKind::Dirichlet).is_err());
    }

    #[test]
    fn l_graph_counts() {
        let g = make_fdm_l_graph(10, 12, 1).unwrap();
        assert_eq!(g.n_vertices(), 75);
        assert_eq!(g.n_edges(), 130);
        assert_eq!(g.n_dirichlet(), 12);
        let again = make_fdm_l_graph(10, 12, 1).unwrap();
        assert_eq!(g.dirichlet_nodes(), again.dirichlet_nodes());
        let other = make_fdm_l_graph(10, 12, 2).unwrap();
        assert_ne!(g.dirichlet_nodes(), other.dirichlet_nodes());
        assert!(make_fdm_l_graph(10, 76, 1).is_err());
        assert!(make_fdm_l_graph(3, 1, 1).is_err());
        for &(a, b) in g.edges() {
            assert!(a < b);
        }
    }

    #[test]
    fn matrix_market_path_and_dedup() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.mtx");
        std::fs::write(&p, "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n2 1\n3 2\n").unwrap();
        let g = load_matrix_market(&p).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);

        let q = dir.path().join("q.mtx");
        std::fs::write(&q, "%%MatrixMarket matrix coordinate real general\n2 2 3\n2 1 3.0\n1 2 3.0\n1 1 5\n").unwrap();
        let h = load_matrix_market(&q).unwrap();
        assert_eq!(h.n_edges(), 1);
        assert_eq!(h.weight(0, 1), 3.0);
        assert!(h.coordinates().is_none());

        std::fs::write(
            dir.path().join("q_coord.mtx"),
            "%%MatrixMarket matrix array real general\n2 2\n0\n3\n0\n4\n",
        )
        .unwrap();
        let h = load_matrix_market(&q).unwrap();
        let mg = MetricGraph::unit(h).with_euclidean_lengths();
        assert!((mg.lengths()[0] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_market_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.mtx");
        std::fs::write(&p, "%%MatrixMarket matrix coordinate pattern general\n2 3 1\n2 1\n").unwrap();
        assert!(load_matrix_market(&p).unwrap_err().to_string().contains("square"));
        std::fs::write(&p, "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n5 1\n").unwrap();
        assert!(load_matrix_market(&p).is_err());
        std::fs::write(&p, "not a header\n").unwrap();
        assert!(load_matrix_market(&p).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":[{"id":1,"type":"kirchhoff"},{"id":0,"type":"dirichlet"}],
                       "edges":[{"u":0,"v":1,"length":2.5}]}"#;
        let g = metric_graph_from_json(text).unwrap();
        assert_eq!(g.lengths(), &[2.5]);
        assert_eq!(g.base().edge_weights(), &[1.0]);
        assert_eq!(g.dirichlet_nodes(), vec![0]);
        let back = metric_graph_from_json(&metric_graph_to_json(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
