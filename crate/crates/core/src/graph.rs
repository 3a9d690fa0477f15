//! Dense graph representation and the standard matrices derived from it.
//!
//! Graphs are undirected and simple: the adjacency matrix is symmetric,
//! 0/1 valued, with a zero diagonal. Entries are stored as `f64` so that
//! every module works on a single matrix type; integer-valued results are
//! rounded (and checked) downstream.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("adjacency matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("adjacency entry ({i},{j}) = {value} is not 0 or 1")]
    NotBinary { i: usize, j: usize, value: f64 },
    #[error("adjacency is not symmetric at ({i},{j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("edge ({i},{j}) out of range for {n} nodes")]
    EdgeOutOfRange { i: usize, j: usize, n: usize },
    #[error("unknown builtin graph `{0}`")]
    UnknownBuiltin(String),
    #[error("edge probability must be a real in [0,1], got {0}")]
    InvalidProbability(f64),
    #[error("node count {0} outside supported range 1..=10000")]
    InvalidNodeCount(usize),
}

/// An undirected simple graph over nodes `0..n`.
///
/// Immutable after construction; cheap to share across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    n: usize,
    adj: Array2<f64>,
}

impl Graph {
    /// Builds a graph from an adjacency matrix, validating all invariants.
    pub fn from_adj(adj: Array2<f64>) -> Result<Self, GraphError> {
        let (rows, cols) = adj.dim();
        if rows != cols {
            return Err(GraphError::NotSquare { rows, cols });
        }
        for i in 0..rows {
            for j in 0..cols {
                let v = adj[[i, j]];
                if v != 0.0 && v != 1.0 {
                    return Err(GraphError::NotBinary { i, j, value: v });
                }
                if i == j && v != 0.0 {
                    return Err(GraphError::SelfLoop(i));
                }
                if adj[[i, j]] != adj[[j, i]] {
                    return Err(GraphError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Graph { n: rows, adj })
    }

    /// Builds a graph on `n` nodes from an edge list. Duplicate edges and
    /// both orientations are accepted.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = Array2::zeros((n, n));
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(GraphError::EdgeOutOfRange { i, j, n });
            }
            if i == j {
                return Err(GraphError::SelfLoop(i));
            }
            adj[[i, j]] = 1.0;
            adj[[j, i]] = 1.0;
        }
        Ok(Graph { n, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The adjacency matrix A.
    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adj
    }

    /// The identity matrix I of matching size.
    pub fn identity(&self) -> Array2<f64> {
        Array2::eye(self.n)
    }

    /// J: all ones except for a zero diagonal.
    pub fn ones_offdiag(&self) -> Array2<f64> {
        let mut m = Array2::ones((self.n, self.n));
        for i in 0..self.n {
            m[[i, i]] = 0.0;
        }
        m
    }

    /// The diagonal degree matrix D = diag(A·1).
    pub fn degree_matrix(&self) -> Array2<f64> {
        Array2::from_diag(&self.degrees())
    }

    /// Node degrees as a vector.
    pub fn degrees(&self) -> Array1<f64> {
        self.adj.dot(&Array1::ones(self.n))
    }

    /// (A, I, J, D) in one call.
    pub fn matrices(&self) -> (Array2<f64>, Array2<f64>, Array2<f64>, Array2<f64>) {
        (
            self.adj.clone(),
            self.identity(),
            self.ones_offdiag(),
            self.degree_matrix(),
        )
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[[i, j] ] == 1.0
    }

    /// Edges as (i, j) with i < j, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(v, u)).collect()
    }

    /// Adjacency lists for all nodes.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|v| self.neighbors(v)).collect()
    }

    /// Relabels nodes: node `v` of the result is node `perm[v]` of `self`.
    ///
    /// # Panics
    /// Panics if `perm` is not a permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n, "permutation length mismatch");
        let mut seen = vec![false; self.n];
        for &p in perm {
            assert!(p < self.n && !seen[p], "not a permutation");
            seen[p] = true;
        }
        let adj = Array2::from_shape_fn((self.n, self.n), |(i, j)| self.adj[[perm[i], perm[j]]]);
        Graph { n: self.n, adj }
    }

    /// Adjacency-list JSON export: `{"n": n, "edges": [[i,j],...]}`.
    pub fn to_edge_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "edges": self.edges().iter().map(|&(i, j)| vec![i, j]).collect::<Vec<_>>(),
        })
    }
}

/// Cycle graph on `k >= 3` nodes.
pub fn cycle(k: usize) -> Graph {
    assert!(k >= 3, "cycle needs at least 3 nodes");
    let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
    Graph::from_edges(k, &edges).unwrap()
}

/// Path graph on `k >= 1` nodes (k - 1 edges).
pub fn path(k: usize) -> Graph {
    assert!(k >= 1, "path needs at least 1 node");
    let edges: Vec<_> = (1..k).map(|i| (i - 1, i)).collect();
    Graph::from_edges(k, &edges).unwrap()
}

/// Complete graph on `k >= 1` nodes.
pub fn complete(k: usize) -> Graph {
    assert!(k >= 1, "complete graph needs at least 1 node");
    let mut edges = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            edges.push((i, j));
        }
    }
    Graph::from_edges(k, &edges).unwrap()
}

/// r x c grid graph with 4-neighborhood connectivity.
pub fn grid(r: usize, c: usize) -> Graph {
    assert!(r >= 1 && c >= 1, "grid needs positive dimensions");
    let idx = |i: usize, j: usize| i * c + j;
    let mut edges = Vec::new();
    for i in 0..r {
        for j in 0..c {
            if j + 1 < c {
                edges.push((idx(i, j), idx(i, j + 1)));
            }
            if i + 1 < r {
                edges.push((idx(i, j), idx(i + 1, j)));
            }
        }
    }
    Graph::from_edges(r * c, &edges).unwrap()
}

/// K4 minus one edge; the remaining edge between the two degree-3 nodes is
/// the chord of the unique chordal cycle.
pub fn diamond() -> Graph {
    Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap()
}

/// Two disjoint triangles: 2-regular on 6 nodes, so 1-WL equivalent to C6.
pub fn two_triangles() -> Graph {
    Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap()
}

/// The Shrikhande graph: Cayley graph on Z4 x Z4 with connection set
/// {(1,0),(3,0),(0,1),(0,3),(1,1),(3,3)}. Strongly regular (16,6,2,2);
/// maximum clique 3.
pub fn shrikhande() -> Graph {
    let diffs = [(1, 0), (3, 0), (0, 1), (0, 3), (1, 1), (3, 3)];
    let idx = |a: usize, b: usize| a * 4 + b;
    let mut edges = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for &(da, db) in &diffs {
                let (c, d) = ((a + da) % 4, (b + db) % 4);
                let (u, v) = (idx(a, b), idx(c, d));
                if u < v {
                    edges.push((u, v));
                }
            }
        }
    }
    Graph::from_edges(16, &edges).unwrap()
}

/// The 4x4 rook's graph (line graph of K_{4,4}): cells of a 4x4 board,
/// adjacent when they share a row or a column. Strongly regular (16,6,2,2);
/// maximum clique 4.
pub fn rook4x4() -> Graph {
    let idx = |a: usize, b: usize| a * 4 + b;
    let mut edges = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let (u, v) = (idx(a, b), idx(c, d));
                    if u < v && ((a == c) != (b == d)) {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    Graph::from_edges(16, &edges).unwrap()
}

/// Resolves a builtin graph name.
///
/// Accepted: `cycle(k)`, `path(k)`, `complete(k)`, `grid(r,c)`, `diamond`,
/// `shrikhande`, `rook4x4`, `two_triangles`.
pub fn builtin(name: &str) -> Result<Graph, GraphError> {
    let name = name.trim();
    match name {
        "diamond" => return Ok(diamond()),
        "shrikhande" => return Ok(shrikhande()),
        "rook4x4" => return Ok(rook4x4()),
        "two_triangles" => return Ok(two_triangles()),
        _ => {}
    }
    let unknown = || GraphError::UnknownBuiltin(name.to_string());
    let (head, rest) = name.split_once('(').ok_or_else(unknown)?;
    let args = rest.strip_suffix(')').ok_or_else(unknown)?;
    let parts: Vec<usize> = args
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| unknown())?;
    match (head, parts.as_slice()) {
        ("cycle", [k]) if *k >= 3 => Ok(cycle(*k)),
        ("path", [k]) if *k >= 1 => Ok(path(*k)),
        ("complete", [k]) if *k >= 1 => Ok(complete(*k)),
        ("grid", [r, c]) if *r >= 1 && *c >= 1 => Ok(grid(*r, *c)),
        _ => Err(unknown()),
    }
}

/// Erdős–Rényi G(n, p) under a deterministic seeded generator.
///
/// Pairs (i, j) with i < j are visited in row-major order; the same
/// (n, p, seed) always reproduces the same graph bit-exactly.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if n < 1 || n > 10_000 {
        return Err(GraphError::InvalidNodeCount(n));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                adj[[i, j]] = 1.0;
                adj[[j, i]] = 1.0;
            }
        }
    }
    Ok(Graph { n, adj })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_degree_matrix() {
        let g = complete(3);
        let d = g.degree_matrix();
        assert_eq!(d, Array2::<f64>::eye(3) * 2.0);
    }

    #[test]
    fn path3_degrees() {
        let g = path(3);
        assert_eq!(g.degrees().to_vec(), vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn cycle4_ones_offdiag() {
        let g = cycle(4);
        assert_eq!(g.ones_offdiag().sum(), 12.0);
    }

    #[test]
    fn diamond_shape() {
        let g = diamond();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 5);
    }

    #[test]
    fn rook_is_6_regular_on_48_edges() {
        let g = rook4x4();
        assert_eq!(g.n(), 16);
        assert_eq!(g.edge_count(), 48);
        assert!(g.degrees().iter().all(|&d| d == 6.0));
    }

    #[test]
    fn shrikhande_is_srg_16_6_2_2() {
        let g = shrikhande();
        assert_eq!(g.n(), 16);
        assert_eq!(g.edge_count(), 48);
        assert!(g.degrees().iter().all(|&d| d == 6.0));
        // Strong regularity: common neighbors = 2 for adjacent and
        // non-adjacent pairs alike.
        let a = g.adjacency();
        let a2 = a.dot(a);
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert_eq!(a2[[i, j]], 2.0, "common neighbors of ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn builtin_names_resolve() {
        assert_eq!(builtin("cycle(6)").unwrap().n(), 6);
        assert_eq!(builtin("grid(3,4)").unwrap().n(), 12);
        assert_eq!(builtin("complete(5)").unwrap().edge_count(), 10);
        assert!(matches!(
            builtin("mystery"),
            Err(GraphError::UnknownBuiltin(_))
        ));
        assert!(matches!(
            builtin("cycle(2)"),
            Err(GraphError::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn erdos_renyi_extremes_and_determinism() {
        let empty = erdos_renyi(5, 0.0, 3).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let full = erdos_renyi(5, 1.0, 3).unwrap();
        assert_eq!(full.edge_count(), 10);
        let g1 = erdos_renyi(12, 0.5, 7).unwrap();
        let g2 = erdos_renyi(12, 0.5, 7).unwrap();
        assert_eq!(g1.adjacency(), g2.adjacency());
        assert!(matches!(
            erdos_renyi(5, 1.5, 0),
            Err(GraphError::InvalidProbability(_))
        ));
        assert!(matches!(
            erdos_renyi(5, f64::NAN, 0),
            Err(GraphError::InvalidProbability(_))
        ));
    }

    #[test]
    fn generated_graphs_satisfy_invariants() {
        for seed in 0..10 {
            let g = erdos_renyi(9, 0.4, seed).unwrap();
            let a = g.adjacency();
            for i in 0..9 {
                assert_eq!(a[[i, i]], 0.0);
                for j in 0..9 {
                    assert_eq!(a[[i, j]], a[[j, i]]);
                    assert!(a[[i, j]] == 0.0 || a[[i, j]] == 1.0);
                }
            }
        }
    }

    #[test]
    fn permuted_relabels_edges() {
        let g = path(3);
        let h = g.permuted(&[2, 1, 0]);
        assert!(h.has_edge(0, 1) && h.has_edge(1, 2) && !h.has_edge(0, 2));
        let k = g.permuted(&[1, 0, 2]);
        assert!(k.has_edge(0, 1) && k.has_edge(0, 2) && !k.has_edge(1, 2));
    }

    #[test]
    fn edge_json_export() {
        let g = complete(3);
        let v = g.to_edge_json();
        assert_eq!(
            v,
            serde_json::json!({"n": 3, "edges": [[0,1],[0,2],[1,2]]})
        );
    }

    #[test]
    fn from_adj_rejects_bad_matrices() {
        let mut m = Array2::zeros((2, 2));
        m[[0, 1]] = 2.0;
        assert!(matches!(
            Graph::from_adj(m),
            Err(GraphError::NotBinary { .. })
        ));
        let mut m = Array2::zeros((2, 2));
        m[[0, 0]] = 1.0;
        assert!(matches!(Graph::from_adj(m), Err(GraphError::SelfLoop(0))));
        let mut m = Array2::zeros((2, 2));
        m[[0, 1]] = 1.0;
        assert!(matches!(
            Graph::from_adj(m),
            Err(GraphError::NotSymmetric { .. })
        ));
    }
}
