//! Exact substructure counting at edge, node and graph level.
//!
//! The closed-form counts are built as expression trees and run through
//! the matlang evaluator, so every counting identity doubles as a test of
//! the interpreter. An independent DFS enumeration oracle (`oracle_count`)
//! recounts the same quantities from adjacency lists for cross-checking.
//!
//! An l-path is a simple path with exactly l edges; an l-cycle is a simple
//! cycle with l edges; a chordal cycle is a 4-cycle plus one chord,
//! equivalently two triangles sharing the chord edge. Edge-level chordal
//! counts are attributed to the chord.

use crate::graph::Graph;
use crate::matlang::{build::*, Evaluator, Expr};
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// Rounding tolerance for integral results; larger drift is a bug signal.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CountError {
    #[error("unsupported {kind} length {len}; paths cover 2..=5, cycles 3..=6")]
    BadLength { kind: &'static str, len: u8 },
    #[error("unknown count kind `{0}`")]
    UnknownKind(String),
    #[error("unknown count level `{0}`")]
    UnknownLevel(String),
    #[error("result entry {value} deviates from an integer by more than {tol}")]
    NotIntegral { value: f64, tol: f64 },
    #[error("oracle enumeration supports up to 14 nodes, got {0}")]
    TooLargeForOracle(usize),
}

/// Substructure to count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountKind {
    /// Simple path with l edges, l in 2..=5.
    Path(u8),
    /// Simple cycle with l edges, l in 3..=6.
    Cycle(u8),
    /// Two triangles sharing an edge (the chord).
    Chordal,
}

impl CountKind {
    pub fn parse(s: &str) -> Result<CountKind, CountError> {
        let kind = match s {
            "chordal" => CountKind::Chordal,
            _ => {
                if let Some(l) = s.strip_prefix("path") {
                    CountKind::Path(l.parse().map_err(|_| CountError::UnknownKind(s.into()))?)
                } else if let Some(l) = s.strip_prefix("cycle") {
                    CountKind::Cycle(l.parse().map_err(|_| CountError::UnknownKind(s.into()))?)
                } else {
                    return Err(CountError::UnknownKind(s.into()));
                }
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn name(self) -> String {
        match self {
            CountKind::Path(l) => format!("path{l}"),
            CountKind::Cycle(l) => format!("cycle{l}"),
            CountKind::Chordal => "chordal".into(),
        }
    }

    fn validate(self) -> Result<(), CountError> {
        match self {
            CountKind::Path(l) if !(2..=5).contains(&l) => {
                Err(CountError::BadLength { kind: "path", len: l })
            }
            CountKind::Cycle(l) if !(3..=6).contains(&l) => {
                Err(CountError::BadLength { kind: "cycle", len: l })
            }
            _ => Ok(()),
        }
    }

    /// All supported kinds, in CLI order.
    pub fn all() -> Vec<CountKind> {
        let mut v: Vec<CountKind> = (2..=5).map(CountKind::Path).collect();
        v.extend((3..=6).map(CountKind::Cycle));
        v.push(CountKind::Chordal);
        v
    }

    /// Edges of the substructure incident to the node position counted at
    /// node level (the denominator converting edge to node counts).
    pub fn edge_multiplicity(self) -> f64 {
        match self {
            // Node counts are anchored at a path tip, which has one edge.
            CountKind::Path(_) => 1.0,
            CountKind::Cycle(_) => 2.0,
            // Chord endpoints are counted through the chord edge alone.
            CountKind::Chordal => 1.0,
        }
    }

    /// Node positions of the substructure counted at node level (the
    /// denominator converting node to graph counts).
    pub fn node_divisor(self) -> f64 {
        match self {
            // Two tips per path.
            CountKind::Path(_) => 2.0,
            CountKind::Cycle(l) => l as f64,
            // Two chord endpoints.
            CountKind::Chordal => 2.0,
        }
    }
}

/// Counting granularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Edge,
    Node,
    Graph,
}

impl Level {
    pub fn parse(s: &str) -> Result<Level, CountError> {
        match s {
            "edge" => Ok(Level::Edge),
            "node" => Ok(Level::Node),
            "graph" => Ok(Level::Graph),
            _ => Err(CountError::UnknownLevel(s.into())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Edge => "edge",
            Level::Node => "node",
            Level::Graph => "graph",
        }
    }
}

/// Integer-valued counting result at one level.
#[derive(Clone, Debug, PartialEq)]
pub enum CountData {
    Matrix(Array2<f64>),
    Vector(Array1<f64>),
    Scalar(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountResult {
    pub kind: CountKind,
    pub level: Level,
    pub data: CountData,
}

impl CountResult {
    /// JSON form `{kind, level, value | vector | matrix}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "kind": self.kind.name(),
            "level": self.level.name(),
        });
        let obj = v.as_object_mut().unwrap();
        match &self.data {
            CountData::Scalar(x) => {
                obj.insert("value".into(), serde_json::json!(x));
            }
            CountData::Vector(xs) => {
                obj.insert("vector".into(), serde_json::json!(xs.to_vec()));
            }
            CountData::Matrix(m) => {
                let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
                obj.insert("matrix".into(), serde_json::json!(rows));
            }
        }
        v
    }
}

fn round_integral(x: f64) -> Result<f64, CountError> {
    let r = x.round();
    if (x - r).abs() > INTEGRALITY_TOL {
        return Err(CountError::NotIntegral {
            value: x,
            tol: INTEGRALITY_TOL,
        });
    }
    // Normalize -0.0 from negative rounding noise.
    Ok(if r == 0.0 { 0.0 } else { r })
}

// ---------------------------------------------------------------------------
// Closed-form count expressions
// ---------------------------------------------------------------------------

fn a2() -> Expr {
    mm(a(), a())
}

/// A^2 ⊙ I: the diagonal degree matrix.
fn deg() -> Expr {
    had(a2(), i())
}

/// A^3 ⊙ I.
fn a3_diag() -> Expr {
    had(mm(a(), a2()), i())
}

/// X_l: entry (i, j) counts the simple l-edge paths between i and j.
pub fn path_expr(l: u8) -> Result<Expr, CountError> {
    CountKind::Path(l).validate()?;
    let x = match l {
        2 => had(a2(), j()),
        3 => add(
            sub(
                sub(had(mm(a(), a2()), j()), mm(a(), deg())),
                mm(deg(), a()),
            ),
            a(),
        ),
        4 => {
            let x2 = path_expr(2)?;
            let a4 = mm(a2(), a2());
            let mut e = had(a4, j());
            e = sub(e, had(mm(mm(a(), sub(deg(), smul(2.0, i()))), a()), j()));
            e = sub(e, mm(deg(), x2.clone()));
            e = sub(e, mm(x2, deg()));
            e = sub(e, mm(a(), a3_diag()));
            e = sub(e, mm(a3_diag(), a()));
            add(e, smul(3.0, had(a2(), a())))
        }
        5 => {
            let x2 = path_expr(2)?;
            let x3 = path_expr(3)?;
            let a5 = mm(a(), mm(a2(), a2()));
            let deg_m1 = sub(deg(), i());
            let tri = had(a(), a2());
            let c4_deg = diag(mm(had(a(), x3.clone()), one()));
            let mut e = had(a5, j());
            e = sub(e, mm(mm(a(), deg()), deg_m1.clone()));
            e = sub(e, mm(mm(deg(), a()), deg()));
            e = sub(e, mm(mm(deg_m1.clone(), deg()), a()));
            e = sub(e, had(mm(mm(a(), deg_m1.clone()), x2.clone()), j()));
            e = sub(e, had(mm(mm(x2.clone(), deg_m1.clone()), a()), j()));
            e = sub(e, mm(deg(), x3.clone()));
            e = sub(e, mm(x3.clone(), deg_m1));
            e = sub(e, mm(a3_diag(), x2.clone()));
            e = sub(e, mm(x2, a3_diag()));
            e = sub(e, had(mm(mm(a(), a3_diag()), a()), j()));
            e = sub(e, tri.clone());
            e = add(
                e,
                smul(
                    3.0,
                    had(add(mm(a(), tri.clone()), mm(tri, a())), j()),
                ),
            );
            e = sub(e, mm(a(), c4_deg.clone()));
            e = sub(e, mm(c4_deg, a()));
            e = add(e, smul(3.0, had(a(), x3)));
            add(
                e,
                smul(3.0, had(had(a(), a2()), sub(a2(), gtzero(a2())))),
            )
        }
        _ => unreachable!("validated above"),
    };
    Ok(x)
}

/// C_l = A ⊙ X_{l-1}: entry (i, j) counts the l-cycles the edge (i, j)
/// lies on.
pub fn cycle_edge_expr(l: u8) -> Result<Expr, CountError> {
    CountKind::Cycle(l).validate()?;
    Ok(had(a(), path_expr(l - 1)?))
}

/// (1/2) A ⊙ A^2 ⊙ (A^2 − (A^2 > 0)): entry (i, j) counts the chordal
/// cycles whose chord is (i, j).
pub fn chordal_edge_expr() -> Expr {
    smul(0.5, had(had(a(), a2()), sub(a2(), gtzero(a2()))))
}

fn edge_expr(kind: CountKind) -> Result<Expr, CountError> {
    match kind {
        CountKind::Path(l) => path_expr(l),
        CountKind::Cycle(l) => cycle_edge_expr(l),
        CountKind::Chordal => Ok(chordal_edge_expr()),
    }
}

/// Node-level count expression.
pub fn node_expr(kind: CountKind) -> Result<Expr, CountError> {
    Ok(match kind {
        CountKind::Path(l) => mm(path_expr(l)?, one()),
        CountKind::Cycle(l) => smul(0.5, mm(cycle_edge_expr(l)?, one())),
        CountKind::Chordal => smul(
            0.5,
            mm(had(had(a(), a2()), sub(a2(), gtzero(a2()))), one()),
        ),
    })
}

/// Graph-level count expression (a sentence: its shape is scalar).
pub fn graph_expr(kind: CountKind) -> Result<Expr, CountError> {
    let quad = |m: Expr| mm(transpose(one()), mm(m, one()));
    Ok(match kind {
        CountKind::Path(l) => smul(0.5, quad(path_expr(l)?)),
        CountKind::Cycle(l) => smul(1.0 / (2.0 * l as f64), quad(cycle_edge_expr(l)?)),
        CountKind::Chordal => smul(
            0.25,
            quad(had(had(a(), a2()), sub(a2(), gtzero(a2())))),
        ),
    })
}

// ---------------------------------------------------------------------------
// Evaluation through the interpreter
// ---------------------------------------------------------------------------

fn eval_matrix(e: &Expr, g: &Graph) -> Result<Array2<f64>, CountError> {
    let v = Evaluator::new(g)
        .eval(e)
        .expect("count expressions are well shaped");
    let m = v.as_matrix().expect("edge-level expression yields a matrix");
    let mut out = m.clone();
    for x in out.iter_mut() {
        *x = round_integral(*x)?;
    }
    Ok(out)
}

/// X_l evaluated on a graph.
pub fn path_matrix(g: &Graph, l: u8) -> Result<Array2<f64>, CountError> {
    eval_matrix(&path_expr(l)?, g)
}

/// C_l evaluated on a graph.
pub fn cycle_edge(g: &Graph, l: u8) -> Result<Array2<f64>, CountError> {
    eval_matrix(&cycle_edge_expr(l)?, g)
}

/// Chord counts evaluated on a graph.
pub fn chordal_edge(g: &Graph) -> Result<Array2<f64>, CountError> {
    eval_matrix(&chordal_edge_expr(), g)
}

/// Node-level counts evaluated on a graph.
pub fn node_level(kind: CountKind, g: &Graph) -> Result<Array1<f64>, CountError> {
    kind.validate()?;
    let v = Evaluator::new(g)
        .eval(&node_expr(kind)?)
        .expect("count expressions are well shaped");
    let v = v.as_colvec().expect("node-level expression yields a vector");
    v.iter().map(|&x| round_integral(x)).collect()
}

/// Graph-level count evaluated on a graph.
pub fn graph_level(kind: CountKind, g: &Graph) -> Result<f64, CountError> {
    kind.validate()?;
    let v = Evaluator::new(g)
        .eval(&graph_expr(kind)?)
        .expect("count expressions are well shaped");
    round_integral(v.as_scalar().expect("graph-level expression yields a scalar"))
}

/// Closed-form count at any level.
pub fn count(kind: CountKind, level: Level, g: &Graph) -> Result<CountResult, CountError> {
    kind.validate()?;
    let data = match level {
        Level::Edge => CountData::Matrix(eval_matrix(&edge_expr(kind)?, g)?),
        Level::Node => CountData::Vector(node_level(kind, g)?),
        Level::Graph => CountData::Scalar(graph_level(kind, g)?),
    };
    Ok(CountResult { kind, level, data })
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Node cap for the exponential enumeration oracle.
pub const ORACLE_MAX_NODES: usize = 14;

struct Tally {
    edge: Array2<f64>,
    node: Array1<f64>,
    graph: f64,
}

impl Tally {
    fn new(n: usize) -> Tally {
        Tally {
            edge: Array2::zeros((n, n)),
            node: Array1::zeros(n),
            graph: 0.0,
        }
    }
}

/// Enumerates endpoint-unordered simple l-paths: the tally credits the
/// whole path once, its two tips, and its endpoint pair in both matrix
/// orientations.
fn enumerate_paths(adj: &[Vec<usize>], l: usize, tally: &mut Tally) {
    let n = adj.len();
    let mut visited = vec![false; n];
    // DFS over simple walks from `start`; forcing start < end at depth l
    // dedups the two traversal directions.
    fn dfs(
        adj: &[Vec<usize>],
        start: usize,
        u: usize,
        left: usize,
        visited: &mut [bool],
        tally: &mut Tally,
    ) {
        if left == 0 {
            if start < u {
                tally.graph += 1.0;
                tally.node[start] += 1.0;
                tally.node[u] += 1.0;
                tally.edge[[start, u]] += 1.0;
                tally.edge[[u, start]] += 1.0;
            }
            return;
        }
        for &w in &adj[u] {
            if !visited[w] {
                visited[w] = true;
                dfs(adj, start, w, left - 1, visited, tally);
                visited[w] = false;
            }
        }
    }
    for start in 0..n {
        visited[start] = true;
        dfs(adj, start, start, l, &mut visited, tally);
        visited[start] = false;
    }
}

/// Enumerates simple l-cycles once each (anchored at their minimum vertex,
/// one rotation direction) and credits every member vertex and edge.
fn enumerate_cycles(adj: &[Vec<usize>], l: usize, tally: &mut Tally) {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut stack: Vec<usize> = Vec::with_capacity(l);
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        adj: &[Vec<usize>],
        anchor: usize,
        u: usize,
        left: usize,
        visited: &mut [bool],
        stack: &mut Vec<usize>,
        tally: &mut Tally,
    ) {
        if left == 0 {
            if adj[u].contains(&anchor) && stack[1] < *stack.last().unwrap() {
                tally.graph += 1.0;
                for k in 0..stack.len() {
                    let (x, y) = (stack[k], stack[(k + 1) % stack.len()]);
                    tally.node[x] += 1.0;
                    tally.edge[[x, y]] += 1.0;
                    tally.edge[[y, x]] += 1.0;
                }
            }
            return;
        }
        for &w in &adj[u] {
            // Keep the anchor minimal within the cycle.
            if !visited[w] && w > anchor {
                visited[w] = true;
                stack.push(w);
                dfs(adj, anchor, w, left - 1, visited, stack, tally);
                stack.pop();
                visited[w] = false;
            }
        }
    }
    for anchor in 0..n {
        visited[anchor] = true;
        stack.push(anchor);
        dfs(adj, anchor, anchor, l - 1, &mut visited, &mut stack, tally);
        stack.pop();
        visited[anchor] = false;
    }
}

/// Enumerates chordal cycles as (chord edge, unordered pair of shared
/// triangle apexes) and credits the chord and its endpoints.
fn enumerate_chordal(adj: &[Vec<usize>], g: &Graph, tally: &mut Tally) {
    let n = adj.len();
    for i in 0..n {
        for j in (i + 1)..n {
            if !g.has_edge(i, j) {
                continue;
            }
            // Each unordered pair {x, y} of shared triangle apexes is one
            // occurrence: the 4-cycle i-x-j-y-i plus the chord (i,j).
            let common: Vec<usize> = adj[i]
                .iter()
                .copied()
                .filter(|&w| w != j && g.has_edge(w, j))
                .collect();
            for xi in 0..common.len() {
                for _yi in (xi + 1)..common.len() {
                    tally.graph += 1.0;
                    tally.node[i] += 1.0;
                    tally.node[j] += 1.0;
                    tally.edge[[i, j]] += 1.0;
                    tally.edge[[j, i]] += 1.0;
                }
            }
        }
    }
}

/// Brute-force count by explicit subgraph enumeration; independent of the
/// closed-form expressions and of the expression evaluator.
pub fn oracle_count(kind: CountKind, level: Level, g: &Graph) -> Result<CountResult, CountError> {
    kind.validate()?;
    if g.n() > ORACLE_MAX_NODES {
        return Err(CountError::TooLargeForOracle(g.n()));
    }
    let adj = g.adjacency_lists();
    let mut tally = Tally::new(g.n());
    match kind {
        CountKind::Path(l) => enumerate_paths(&adj, l as usize, &mut tally),
        CountKind::Cycle(l) => enumerate_cycles(&adj, l as usize, &mut tally),
        CountKind::Chordal => enumerate_chordal(&adj, g, &mut tally),
    }
    let data = match level {
        Level::Edge => CountData::Matrix(tally.edge),
        Level::Node => CountData::Vector(tally.node),
        Level::Graph => CountData::Scalar(tally.graph),
    };
    Ok(CountResult { kind, level, data })
}

// ---------------------------------------------------------------------------
// Corpus verification sweep
// ---------------------------------------------------------------------------

/// Parameters of the formula-versus-oracle sweep.
#[derive(Clone, Copy, Debug)]
pub struct CorpusSpec {
    pub n_min: usize,
    pub n_max: usize,
    pub graphs: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            n_min: 6,
            n_max: 12,
            graphs: 50,
            seed: 1,
        }
    }
}

/// The seeded corpus graphs: sizes cycle through `n_min..=n_max` and edge
/// probabilities alternate between 0.3 and 0.5.
pub fn corpus_graphs(spec: &CorpusSpec) -> Vec<Graph> {
    (0..spec.graphs)
        .map(|k| {
            let n = spec.n_min + k % (spec.n_max - spec.n_min + 1);
            let p = if k % 2 == 0 { 0.3 } else { 0.5 };
            crate::graph::erdos_renyi(n, p, spec.seed.wrapping_mul(1000).wrapping_add(k as u64))
                .expect("corpus parameters are valid")
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub graphs: usize,
    pub checks: usize,
    pub mismatches: Vec<String>,
    pub passed: bool,
}

/// Runs every kind at every level on the corpus and compares the formulas
/// with the enumeration oracle exactly (after integral rounding).
pub fn verify_corpus(spec: &CorpusSpec) -> Result<VerifyReport, CountError> {
    let graphs = corpus_graphs(spec);
    let per_graph: Vec<Result<Vec<String>, CountError>> = graphs
        .par_iter()
        .enumerate()
        .map(|(gi, g)| {
            let mut mismatches = Vec::new();
            for kind in CountKind::all() {
                for level in [Level::Edge, Level::Node, Level::Graph] {
                    let formula = count(kind, level, g)?;
                    let oracle = oracle_count(kind, level, g)?;
                    if formula.data != oracle.data {
                        mismatches.push(format!(
                            "graph {gi} (n={}): {} at {} level disagrees",
                            g.n(),
                            kind.name(),
                            level.name()
                        ));
                    }
                }
            }
            Ok(mismatches)
        })
        .collect();
    let mut mismatches = Vec::new();
    for r in per_graph {
        mismatches.extend(r?);
    }
    let checks = graphs.len() * CountKind::all().len() * 3;
    Ok(VerifyReport {
        graphs: graphs.len(),
        checks,
        passed: mismatches.is_empty(),
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, diamond, erdos_renyi, path};

    #[test]
    fn two_paths_on_a_path() {
        let x2 = path_matrix(&path(3), 2).unwrap();
        assert_eq!(x2[[0, 2]], 1.0);
        assert_eq!(x2[[2, 0]], 1.0);
        assert_eq!(x2[[0, 1]], 0.0);
        assert_eq!(x2[[0, 0]], 0.0);
    }

    #[test]
    fn two_paths_on_triangle_equal_j() {
        let g = complete(3);
        let x2 = path_matrix(&g, 2).unwrap();
        assert_eq!(x2, g.ones_offdiag());
    }

    #[test]
    fn three_paths_on_k4() {
        let x3 = path_matrix(&complete(4), 3).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 0.0 } else { 2.0 };
                assert_eq!(x3[[i, j]], expected, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn cycle_edge_examples() {
        let c3 = cycle_edge(&complete(4), 3).unwrap();
        for (i, j) in complete(4).edges() {
            assert_eq!(c3[[i, j]], 2.0);
        }
        let c4 = cycle_edge(&cycle(4), 4).unwrap();
        for (i, j) in cycle(4).edges() {
            assert_eq!(c4[[i, j]], 1.0);
        }
        let c6 = cycle(6);
        for l in 3..=5 {
            assert_eq!(cycle_edge(&c6, l).unwrap().sum(), 0.0, "C{l} of hexagon");
        }
        let c6m = cycle_edge(&c6, 6).unwrap();
        for (i, j) in c6.edges() {
            assert_eq!(c6m[[i, j]], 1.0);
        }
    }

    #[test]
    fn chordal_edge_examples() {
        let d = chordal_edge(&diamond()).unwrap();
        assert_eq!(d[[0, 1]], 1.0, "the chord");
        assert_eq!(d.sum(), 2.0, "only the chord in both orientations");

        let k4 = chordal_edge(&complete(4)).unwrap();
        for (i, j) in complete(4).edges() {
            assert_eq!(k4[[i, j]], 1.0);
        }
        assert_eq!(chordal_edge(&cycle(5)).unwrap().sum(), 0.0);
    }

    #[test]
    fn node_level_examples() {
        let v = node_level(CountKind::Cycle(3), &cycle(3)).unwrap();
        assert_eq!(v.to_vec(), vec![1.0, 1.0, 1.0]);
        // Node counts are tip-anchored: the middle of a 3-node path lies
        // inside its only 2-edge path, so it starts none.
        let v = node_level(CountKind::Path(2), &path(3)).unwrap();
        assert_eq!(v.to_vec(), vec![1.0, 0.0, 1.0]);
        // In a triangle every node is a tip of two of the three 2-edge
        // paths.
        let v = node_level(CountKind::Path(2), &complete(3)).unwrap();
        assert_eq!(v.to_vec(), vec![2.0, 2.0, 2.0]);
        let v = node_level(CountKind::Chordal, &complete(4)).unwrap();
        assert_eq!(v.to_vec(), vec![3.0, 3.0, 3.0, 3.0]);
    }

    #[test]
    fn graph_level_examples() {
        assert_eq!(graph_level(CountKind::Cycle(6), &cycle(6)).unwrap(), 1.0);
        assert_eq!(graph_level(CountKind::Cycle(3), &complete(4)).unwrap(), 4.0);
        assert_eq!(graph_level(CountKind::Chordal, &complete(4)).unwrap(), 6.0);
        // The three 2-edge paths of a triangle, endpoint-unordered.
        assert_eq!(graph_level(CountKind::Path(2), &complete(3)).unwrap(), 3.0);
        // No 3-edge simple path fits in a triangle.
        assert_eq!(graph_level(CountKind::Path(3), &complete(3)).unwrap(), 0.0);
    }

    #[test]
    fn oracle_examples() {
        let r = oracle_count(CountKind::Cycle(4), Level::Graph, &cycle(4)).unwrap();
        assert_eq!(r.data, CountData::Scalar(1.0));
        let r = oracle_count(CountKind::Path(2), Level::Graph, &complete(3)).unwrap();
        assert_eq!(r.data, CountData::Scalar(3.0));
        let r = oracle_count(CountKind::Chordal, Level::Graph, &diamond()).unwrap();
        assert_eq!(r.data, CountData::Scalar(1.0));
        assert!(matches!(
            oracle_count(CountKind::Chordal, Level::Graph, &erdos_renyi(20, 0.2, 0).unwrap()),
            Err(CountError::TooLargeForOracle(20))
        ));
    }

    #[test]
    fn formulas_match_oracle_on_small_corpus() {
        for seed in 0..6 {
            let g = erdos_renyi(7, 0.45, seed).unwrap();
            for kind in CountKind::all() {
                for level in [Level::Edge, Level::Node, Level::Graph] {
                    let f = count(kind, level, &g).unwrap();
                    let o = oracle_count(kind, level, &g).unwrap();
                    assert_eq!(
                        f.data,
                        o.data,
                        "seed {seed}, {} at {}",
                        kind.name(),
                        level.name()
                    );
                }
            }
        }
    }

    #[test]
    fn level_conversions_hold() {
        let g = erdos_renyi(8, 0.5, 21).unwrap();
        for kind in CountKind::all() {
            let edge = match count(kind, Level::Edge, &g).unwrap().data {
                CountData::Matrix(m) => m,
                _ => unreachable!(),
            };
            let node = node_level(kind, &g).unwrap();
            let graph = graph_level(kind, &g).unwrap();
            let e_s = kind.edge_multiplicity();
            for v in 0..g.n() {
                let row_sum: f64 = edge.row(v).sum();
                assert!(
                    (row_sum / e_s - node[v]).abs() < 1e-9,
                    "{}: node {v}",
                    kind.name()
                );
            }
            assert!((node.sum() / kind.node_divisor() - graph).abs() < 1e-9);
        }
    }

    #[test]
    fn counts_are_relabeling_invariant() {
        let g = erdos_renyi(7, 0.5, 33).unwrap();
        let perm = [4, 2, 6, 0, 3, 1, 5];
        let h = g.permuted(&perm);
        for kind in CountKind::all() {
            assert_eq!(
                graph_level(kind, &g).unwrap(),
                graph_level(kind, &h).unwrap()
            );
            let vg = node_level(kind, &g).unwrap();
            let vh = node_level(kind, &h).unwrap();
            for v in 0..7 {
                assert_eq!(vh[v], vg[perm[v]], "{} node {v}", kind.name());
            }
        }
    }

    #[test]
    fn triangle_free_graphs_have_no_triangles_or_chordal_cycles() {
        for g in [cycle(6), crate::graph::grid(3, 3), path(5)] {
            for level in [Level::Edge, Level::Node, Level::Graph] {
                let tri = count(CountKind::Cycle(3), level, &g).unwrap();
                let cho = count(CountKind::Chordal, level, &g).unwrap();
                for r in [tri, cho] {
                    let total = match r.data {
                        CountData::Scalar(x) => x,
                        CountData::Vector(v) => v.sum(),
                        CountData::Matrix(m) => m.sum(),
                    };
                    assert_eq!(total, 0.0);
                }
            }
        }
    }

    #[test]
    fn edge_matrices_are_symmetric_with_zero_diagonal() {
        let g = erdos_renyi(8, 0.5, 5).unwrap();
        for kind in CountKind::all() {
            let m = match count(kind, Level::Edge, &g).unwrap().data {
                CountData::Matrix(m) => m,
                _ => unreachable!(),
            };
            for i in 0..8 {
                assert_eq!(m[[i, i]], 0.0);
                for j in 0..8 {
                    assert_eq!(m[[i, j]], m[[j, i]]);
                }
            }
        }
    }

    #[test]
    fn integrality_guard_trips_on_drift() {
        assert!(round_integral(3.0000001).is_ok());
        assert!(matches!(
            round_integral(3.1),
            Err(CountError::NotIntegral { .. })
        ));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!(CountKind::parse("path3").unwrap(), CountKind::Path(3));
        assert_eq!(CountKind::parse("cycle6").unwrap(), CountKind::Cycle(6));
        assert_eq!(CountKind::parse("chordal").unwrap(), CountKind::Chordal);
        assert!(CountKind::parse("path7").is_err());
        assert!(CountKind::parse("clique4").is_err());
    }

    #[test]
    fn small_verify_sweep_passes() {
        let spec = CorpusSpec {
            n_min: 6,
            n_max: 8,
            graphs: 6,
            seed: 3,
        };
        let report = verify_corpus(&spec).unwrap();
        assert!(report.passed, "mismatches: {:?}", report.mismatches);
        assert_eq!(report.checks, 6 * 9 * 3);
    }
}
