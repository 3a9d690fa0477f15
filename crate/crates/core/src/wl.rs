//! Weisfeiler-Lehman refinement: 1-WL on nodes, folklore 2-FWL on ordered
//! node pairs, plus an exact max-clique search as an independent
//! non-isomorphism oracle.
//!
//! Colors are canonical, not hashed: each round collects the signatures of
//! every node (or pair), sorts them, and assigns dense ids, which removes
//! any collision soundness risk. Cross-graph comparisons refine both
//! graphs jointly over a shared signature pool so the final ids are
//! directly comparable.

use crate::graph::Graph;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WlError {
    #[error("pair refinement supports up to 500 nodes, got {0}")]
    TooLargeForPairs(usize),
    #[error("max clique search supports up to 32 nodes, got {0}")]
    TooLargeForClique(usize),
}

/// Refinement level: colors on nodes or on ordered node pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Node,
    Pair,
}

/// A stable coloring. For [`Level::Pair`] the colors are stored row-major
/// over ordered pairs (u, v).
#[derive(Clone, Debug)]
pub struct Coloring {
    pub level: Level,
    pub n: usize,
    pub colors: Vec<u32>,
    /// Number of rounds that strictly refined the partition.
    pub rounds: usize,
}

impl Coloring {
    pub fn class_count(&self) -> usize {
        let mut seen: Vec<u32> = self.colors.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Sorted (color, multiplicity) pairs.
    pub fn histogram(&self) -> Vec<(u32, usize)> {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &c in &self.colors {
            *counts.entry(c).or_default() += 1;
        }
        counts.into_iter().collect()
    }
}

/// Which test to run for [`equivalent`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Test {
    Wl1,
    Fwl2,
}

impl Test {
    pub fn parse(s: &str) -> Option<Test> {
        match s {
            "wl1" => Some(Test::Wl1),
            "fwl2" => Some(Test::Fwl2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Test::Wl1 => "wl1",
            Test::Fwl2 => "fwl2",
        }
    }
}

/// Equivalence report, serializable as
/// `{test, equivalent, rounds, histogram_g1, histogram_g2}`.
#[derive(Clone, Debug, Serialize)]
pub struct EquivReport {
    pub test: String,
    pub equivalent: bool,
    pub rounds: usize,
    pub histogram_g1: Vec<(u32, usize)>,
    pub histogram_g2: Vec<(u32, usize)>,
}

/// Joint canonical relabeling: maps each signature to a dense id, ordered
/// by the signature's sort order over the pooled collection.
fn canonical_ids<S: Ord + Clone>(sigs_per_graph: &[Vec<S>]) -> Vec<Vec<u32>> {
    let mut pool: BTreeMap<S, u32> = BTreeMap::new();
    for sigs in sigs_per_graph {
        for s in sigs {
            pool.entry(s.clone()).or_insert(0);
        }
    }
    for (next, (_, id)) in pool.iter_mut().enumerate() {
        *id = next as u32;
    }
    sigs_per_graph
        .iter()
        .map(|sigs| sigs.iter().map(|s| pool[s]).collect())
        .collect()
}

fn total_classes(colorings: &[Vec<u32>]) -> usize {
    let mut all: Vec<u32> = colorings.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

/// 1-WL color refinement run jointly over several graphs.
fn wl1_joint(graphs: &[&Graph]) -> (Vec<Vec<u32>>, usize) {
    let adj: Vec<Vec<Vec<usize>>> = graphs.iter().map(|g| g.adjacency_lists()).collect();
    let mut colors: Vec<Vec<u32>> = graphs.iter().map(|g| vec![0u32; g.n()]).collect();
    let mut classes = 1usize.min(graphs.iter().map(|g| g.n()).sum());
    let mut rounds = 0usize;
    loop {
        let sigs: Vec<Vec<(u32, Vec<u32>)>> = graphs
            .iter()
            .enumerate()
            .map(|(gi, g)| {
                (0..g.n())
                    .map(|v| {
                        let mut nb: Vec<u32> =
                            adj[gi][v].iter().map(|&u| colors[gi][u]).collect();
                        nb.sort_unstable();
                        (colors[gi][v], nb)
                    })
                    .collect()
            })
            .collect();
        let new_colors = canonical_ids(&sigs);
        let new_classes = total_classes(&new_colors);
        // Refinement only splits classes, so an unchanged count means an
        // unchanged partition.
        if new_classes == classes {
            break;
        }
        colors = new_colors;
        classes = new_classes;
        rounds += 1;
    }
    (colors, rounds)
}

/// 2-FWL refinement on ordered pairs, run jointly over several graphs.
///
/// Initial pair colors come from (is-diagonal, adjacency); each round maps
/// the color of (u, v) together with the multiset over w of
/// (color(u, w), color(w, v)) to a fresh canonical id.
fn fwl2_joint(graphs: &[&Graph]) -> Result<(Vec<Vec<u32>>, usize), WlError> {
    for g in graphs {
        if g.n() > 500 {
            return Err(WlError::TooLargeForPairs(g.n()));
        }
    }
    let init_sigs: Vec<Vec<(bool, u8)>> = graphs
        .iter()
        .map(|g| {
            let n = g.n();
            let mut sigs = Vec::with_capacity(n * n);
            for u in 0..n {
                for v in 0..n {
                    sigs.push((u == v, g.has_edge(u, v) as u8));
                }
            }
            sigs
        })
        .collect();
    let mut colors = canonical_ids(&init_sigs);
    let mut classes = total_classes(&colors);
    let mut rounds = 0usize;
    loop {
        let sigs: Vec<Vec<(u32, Vec<(u32, u32)>)>> = graphs
            .iter()
            .enumerate()
            .map(|(gi, g)| {
                let n = g.n();
                let c = &colors[gi];
                let mut sigs = Vec::with_capacity(n * n);
                for u in 0..n {
                    for v in 0..n {
                        let mut ms: Vec<(u32, u32)> =
                            (0..n).map(|w| (c[u * n + w], c[w * n + v])).collect();
                        ms.sort_unstable();
                        sigs.push((c[u * n + v], ms));
                    }
                }
                sigs
            })
            .collect();
        let new_colors = canonical_ids(&sigs);
        let new_classes = total_classes(&new_colors);
        if new_classes == classes {
            break;
        }
        colors = new_colors;
        classes = new_classes;
        rounds += 1;
    }
    Ok((colors, rounds))
}

/// Stable 1-WL node coloring of a single graph.
pub fn wl1(g: &Graph) -> Coloring {
    let (mut colors, rounds) = wl1_joint(&[g]);
    Coloring {
        level: Level::Node,
        n: g.n(),
        colors: colors.pop().unwrap(),
        rounds,
    }
}

/// Stable 2-FWL pair coloring of a single graph. Limited to 500 nodes
/// (each round costs O(n^3)).
pub fn fwl2(g: &Graph) -> Result<Coloring, WlError> {
    let (mut colors, rounds) = fwl2_joint(&[g])?;
    Ok(Coloring {
        level: Level::Pair,
        n: g.n(),
        colors: colors.pop().unwrap(),
        rounds,
    })
}

/// Tests whether two graphs are equivalent under the chosen refinement:
/// stabilized color histograms compared after joint canonical relabeling.
pub fn equivalent(g1: &Graph, g2: &Graph, test: Test) -> Result<EquivReport, WlError> {
    let (colors, rounds) = match test {
        Test::Wl1 => wl1_joint(&[g1, g2]),
        Test::Fwl2 => fwl2_joint(&[g1, g2])?,
    };
    let hist = |cs: &Vec<u32>| {
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &c in cs {
            *counts.entry(c).or_default() += 1;
        }
        counts.into_iter().collect::<Vec<_>>()
    };
    let histogram_g1 = hist(&colors[0]);
    let histogram_g2 = hist(&colors[1]);
    Ok(EquivReport {
        test: test.name().to_string(),
        equivalent: histogram_g1 == histogram_g2,
        rounds,
        histogram_g1,
        histogram_g2,
    })
}

/// Exact maximum clique size by branch and bound; graphs up to 32 nodes.
pub fn max_clique(g: &Graph) -> Result<usize, WlError> {
    let n = g.n();
    if n > 32 {
        return Err(WlError::TooLargeForClique(n));
    }
    let mut masks = vec![0u32; n];
    for i in 0..n {
        for j in 0..n {
            if g.has_edge(i, j) {
                masks[i] |= 1 << j;
            }
        }
    }
    fn extend(masks: &[u32], candidates: u32, size: usize, best: &mut usize) {
        if size + (candidates.count_ones() as usize) <= *best {
            return;
        }
        if candidates == 0 {
            *best = (*best).max(size);
            return;
        }
        let mut rest = candidates;
        while rest != 0 {
            if size + (rest.count_ones() as usize) <= *best {
                return;
            }
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            extend(masks, rest & masks[v], size + 1, best);
        }
        *best = (*best).max(size);
    }
    let mut best = 0usize;
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    extend(&masks, all, 0, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, erdos_renyi, path, rook4x4, shrikhande, two_triangles};

    #[test]
    fn vertex_transitive_graph_is_stable_immediately() {
        let c = wl1(&complete(3));
        assert_eq!(c.class_count(), 1);
        assert_eq!(c.rounds, 0);
    }

    #[test]
    fn path_splits_ends_from_middle() {
        let c = wl1(&path(3));
        assert_eq!(c.class_count(), 2);
    }

    #[test]
    fn regular_pair_is_wl1_equivalent() {
        let r = equivalent(&cycle(6), &two_triangles(), Test::Wl1).unwrap();
        assert!(r.equivalent);
        assert_eq!(r.histogram_g1, r.histogram_g2);
    }

    #[test]
    fn triangle_pair_colors() {
        let c = fwl2(&complete(3)).unwrap();
        assert_eq!(c.class_count(), 2, "diagonal and edge classes");
    }

    #[test]
    fn pair_refinement_separates_triangles_from_hexagon() {
        let r = equivalent(&cycle(6), &two_triangles(), Test::Fwl2).unwrap();
        assert!(!r.equivalent);
    }

    #[test]
    fn srg_pair_is_fwl2_equivalent_but_not_isomorphic() {
        let s = shrikhande();
        let r = rook4x4();
        let eq = equivalent(&s, &r, Test::Fwl2).unwrap();
        assert!(eq.equivalent);
        assert_eq!(max_clique(&s).unwrap(), 3);
        assert_eq!(max_clique(&r).unwrap(), 4);
    }

    #[test]
    fn relabeled_graphs_are_equivalent_under_both_tests() {
        let g = erdos_renyi(8, 0.4, 9).unwrap();
        let h = g.permuted(&[3, 1, 4, 0, 5, 7, 2, 6]);
        assert!(equivalent(&g, &h, Test::Wl1).unwrap().equivalent);
        assert!(equivalent(&g, &h, Test::Fwl2).unwrap().equivalent);
    }

    #[test]
    fn pair_refinement_implies_node_equivalence() {
        for seed in 0..12 {
            let g = erdos_renyi(7, 0.45, seed).unwrap();
            let h = erdos_renyi(7, 0.45, seed + 100).unwrap();
            let fine = equivalent(&g, &h, Test::Fwl2).unwrap().equivalent;
            let coarse = equivalent(&g, &h, Test::Wl1).unwrap().equivalent;
            assert!(!fine || coarse, "2-FWL equivalence must imply 1-WL equivalence");
        }
    }

    #[test]
    fn refinement_terminates_within_node_bound() {
        for seed in 0..6 {
            let g = erdos_renyi(10, 0.3, seed).unwrap();
            let c = wl1(&g);
            assert!(c.rounds <= g.n());
            let p = fwl2(&g).unwrap();
            assert!(p.rounds <= g.n() * g.n());
        }
    }

    #[test]
    fn clique_numbers() {
        assert_eq!(max_clique(&complete(5)).unwrap(), 5);
        assert_eq!(max_clique(&cycle(6)).unwrap(), 2);
        assert!(matches!(
            max_clique(&erdos_renyi(40, 0.1, 0).unwrap()),
            Err(WlError::TooLargeForClique(40))
        ));
    }

    #[test]
    fn report_serializes_with_contracted_fields() {
        let r = equivalent(&complete(3), &complete(3), Test::Wl1).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["test", "equivalent", "rounds", "histogram_g1", "histogram_g2"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}
