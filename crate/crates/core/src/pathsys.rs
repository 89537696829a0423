//! Oriented path systems witnessing parent edges that are missing from the
//! graph, and their congestion.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

use crate::elimination::{validate_elimination_tree, EliminationTree};
use crate::graph::{Graph, VertexId};

/// A path from a child `source` to its tree parent `dest`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedPath {
    pub source: VertexId,
    pub dest: VertexId,
    /// `p_0 = source, ..., p_l = dest`.
    pub vertices: Vec<VertexId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrientedPathSystem {
    /// Sorted by source id.
    pub paths: Vec<OrientedPath>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathViolation {
    #[error("path for {0} is not a simple path of the graph")]
    NotAPath(VertexId),
    #[error("path for {0} does not run from the child to its parent")]
    WrongEndpoints(VertexId),
    #[error("vertex {0} is not adjacent to its parent and has no path")]
    MissingPath(VertexId),
    #[error("vertex {0} has a path it does not need or more than one")]
    ExtraPath(VertexId),
}

impl OrientedPathSystem {
    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn path_for(&self, source: VertexId) -> Option<&OrientedPath> {
        self.paths.iter().find(|p| p.source == source)
    }

    /// One line per path: `u -> v : p_0 ... p_l`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for p in &self.paths {
            let seq: Vec<String> = p.vertices.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{} -> {} : {}", p.source, p.dest, seq.join(" "));
        }
        out
    }
}

/// Lexicographically smallest shortest path from `from` to `to`.
pub fn shortest_path(g: &Graph, from: VertexId, to: VertexId) -> Vec<VertexId> {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    dist[to as usize - 1] = 0;
    let mut queue = VecDeque::from([to]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w as usize - 1] == usize::MAX {
                dist[w as usize - 1] = dist[u as usize - 1] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let d = dist[cur as usize - 1];
        // neighbors are sorted, so the first match is the smallest id
        cur = *g
            .neighbors(cur)
            .iter()
            .find(|&&w| dist[w as usize - 1] + 1 == d)
            .expect("connected graph");
        path.push(cur);
    }
    path
}

/// One shortest path per non-root vertex whose parent is not a neighbor.
pub fn build_path_system(g: &Graph, t: &EliminationTree) -> OrientedPathSystem {
    let mut paths = Vec::new();
    for u in g.vertices() {
        if let Some(p) = t.parent(u) {
            assert_ne!(p, u);
            if !g.has_edge(u, p) {
                paths.push(OrientedPath {
                    source: u,
                    dest: p,
                    vertices: shortest_path(g, u, p),
                });
            }
        }
    }
    OrientedPathSystem { paths }
}

/// Largest number of paths using one vertex as source or internal vertex.
pub fn congestion(p: &OrientedPathSystem) -> usize {
    let mut load = std::collections::HashMap::<VertexId, usize>::new();
    for path in &p.paths {
        for &v in &path.vertices[..path.vertices.len().saturating_sub(1)] {
            *load.entry(v).or_default() += 1;
        }
    }
    load.values().copied().max().unwrap_or(0)
}

/// Checks that `p` contains exactly one valid path for each parent edge
/// missing from `g`, and nothing else.
pub fn validate_path_system(
    g: &Graph,
    t: &EliminationTree,
    p: &OrientedPathSystem,
) -> Result<(), PathViolation> {
    let n = g.n();
    let mut count = vec![0usize; n];
    for path in &p.paths {
        let u = path.source;
        if u == 0 || u as usize > n {
            return Err(PathViolation::NotAPath(u));
        }
        count[u as usize - 1] += 1;
        let seq = &path.vertices;
        if seq.len() < 2 || seq.iter().any(|&v| v == 0 || v as usize > n) {
            return Err(PathViolation::NotAPath(u));
        }
        let mut seen = vec![false; n];
        for &v in seq {
            if std::mem::replace(&mut seen[v as usize - 1], true) {
                return Err(PathViolation::NotAPath(u));
            }
        }
        if seq.windows(2).any(|w| !g.has_edge(w[0], w[1])) {
            return Err(PathViolation::NotAPath(u));
        }
        if seq[0] != u || *seq.last().unwrap() != path.dest || t.parent(u) != Some(path.dest) {
            return Err(PathViolation::WrongEndpoints(u));
        }
    }
    for u in g.vertices() {
        let needs = t.parent(u).is_some_and(|par| !g.has_edge(u, par));
        match (needs, count[u as usize - 1]) {
            (true, 0) => return Err(PathViolation::MissingPath(u)),
            (true, 1) | (false, 0) => {}
            _ => return Err(PathViolation::ExtraPath(u)),
        }
    }
    Ok(())
}

/// True iff `t` is a valid elimination tree of width at most `k`, `p`
/// witnesses it, and the congestion of `p` is at most `k`.
pub fn check_locally_verifiable(
    g: &Graph,
    t: &EliminationTree,
    p: &OrientedPathSystem,
    k: usize,
) -> bool {
    validate_elimination_tree(g, t).is_ok()
        && t.width() <= k
        && validate_path_system(g, t, p).is_ok()
        && congestion(p) <= k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::elimination::tree_from_ordering;

    #[test]
    fn star_tree_needs_no_paths() {
        let g = corpus::path(3);
        let t = tree_from_ordering(&g, &[1, 3, 2]).unwrap();
        let p = build_path_system(&g, &t);
        assert!(p.is_empty());
        assert_eq!(congestion(&p), 0);
        assert!(check_locally_verifiable(&g, &t, &p, 1));
    }

    #[test]
    fn c4_with_adjacent_parents() {
        let g = corpus::cycle(4);
        let t = EliminationTree::from_parts(
            1,
            vec![None, Some(1), Some(2), Some(1)],
            vec![0, 1, 2, 1],
            vec![vec![1], vec![1, 2], vec![1, 2, 3], vec![1, 4]],
        );
        // 3-4 joins two branches, so this is not an elimination tree, but the
        // path builder only looks at parent adjacency.
        assert!(build_path_system(&g, &t).is_empty());
    }

    #[test]
    fn c5_trees() {
        let g = corpus::cycle(5);
        let chain = tree_from_ordering(&g, &[1, 2, 3, 4, 5]).unwrap();
        assert!(build_path_system(&g, &chain).is_empty());
        let t = tree_from_ordering(&g, &[5, 2, 4, 3, 1]).unwrap();
        assert_eq!(t.parent(3), Some(1));
        let p = build_path_system(&g, &t);
        assert_eq!(p.paths.len(), 1);
        assert_eq!(p.paths[0].vertices, vec![3, 2, 1]);
        assert_eq!(congestion(&p), 1);
        assert_eq!(p.dump(), "3 -> 1 : 3 2 1\n");
        validate_path_system(&g, &t, &p).unwrap();
        assert!(check_locally_verifiable(&g, &t, &p, 2));
    }

    #[test]
    fn k4_fails_at_two() {
        let g = corpus::complete(4);
        let t = tree_from_ordering(&g, &[1, 2, 3, 4]).unwrap();
        let p = build_path_system(&g, &t);
        assert!(!check_locally_verifiable(&g, &t, &p, 2));
        assert!(check_locally_verifiable(&g, &t, &p, 3));
    }

    #[test]
    fn congestion_counts_sources_and_internal_vertices() {
        let mk = |s: Vec<VertexId>| OrientedPath {
            source: s[0],
            dest: *s.last().unwrap(),
            vertices: s,
        };
        let p = OrientedPathSystem {
            paths: vec![mk(vec![1, 5, 2]), mk(vec![3, 5, 4])],
        };
        assert_eq!(congestion(&p), 2);
        let single = OrientedPathSystem {
            paths: vec![mk(vec![1, 2, 3])],
        };
        assert_eq!(congestion(&single), 1);
    }

    #[test]
    fn tampered_systems_rejected() {
        let g = corpus::cycle(5);
        let t = tree_from_ordering(&g, &[5, 2, 4, 3, 1]).unwrap();
        let honest = build_path_system(&g, &t);
        let mut p = honest.clone();
        p.paths.clear();
        assert_eq!(validate_path_system(&g, &t, &p), Err(PathViolation::MissingPath(3)));
        let mut p = honest.clone();
        p.paths[0].vertices = vec![3, 1];
        assert_eq!(validate_path_system(&g, &t, &p), Err(PathViolation::NotAPath(3)));
        let mut p = honest.clone();
        p.paths.push(p.paths[0].clone());
        assert_eq!(validate_path_system(&g, &t, &p), Err(PathViolation::ExtraPath(3)));
    }
}
