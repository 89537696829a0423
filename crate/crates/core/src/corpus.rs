//! Graph families used by tests, the fuzzer and the scaling sweeps.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, VertexId};

/// Largest order for which [`connected_graphs`] enumerates isomorphism classes.
pub const ENUM_LIMIT: usize = 7;

pub fn complete(n: usize) -> Graph {
    let mut e = Vec::new();
    for u in 1..=n as VertexId {
        for v in u + 1..=n as VertexId {
            e.push((u, v));
        }
    }
    Graph::from_edges(n, &e).expect("complete graph")
}

pub fn path(n: usize) -> Graph {
    let e: Vec<_> = (1..n as VertexId).map(|i| (i, i + 1)).collect();
    Graph::from_edges(n, &e).expect("path")
}

/// `C_n` on `1..=n` with edges `i, i+1` and `n, 1`. Needs `n >= 3`.
pub fn cycle(n: usize) -> Graph {
    let mut e: Vec<_> = (1..n as VertexId).map(|i| (i, i + 1)).collect();
    e.push((1, n as VertexId));
    Graph::from_edges(n, &e).expect("cycle")
}

pub fn star(leaves: usize) -> Graph {
    let e: Vec<_> = (2..=leaves as VertexId + 1).map(|i| (1, i)).collect();
    Graph::from_edges(leaves + 1, &e).expect("star")
}

/// `r x c` grid, row-major ids.
pub fn grid(r: usize, c: usize) -> Graph {
    let id = |i: usize, j: usize| (i * c + j + 1) as VertexId;
    let mut e = Vec::new();
    for i in 0..r {
        for j in 0..c {
            if j + 1 < c {
                e.push((id(i, j), id(i, j + 1)));
            }
            if i + 1 < r {
                e.push((id(i, j), id(i + 1, j)));
            }
        }
    }
    Graph::from_edges(r * c, &e).expect("grid")
}

pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let mut e = Vec::new();
    for u in 1..=a as VertexId {
        for v in a as VertexId + 1..=(a + b) as VertexId {
            e.push((u, v));
        }
    }
    Graph::from_edges(a + b, &e).expect("complete bipartite")
}

/// A connected partial 2-tree: vertex `v >= 3` attaches to both ends of an
/// earlier edge, then with probability 1/2 drops one of the two new edges.
/// Returns the graph and the reverse construction order, which eliminates
/// with width at most 2.
pub fn partial_2tree(n: usize, seed: u64) -> (Graph, Vec<VertexId>) {
    assert!(n >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Attachment happens on edges of the underlying full 2-tree.
    let mut full: Vec<(VertexId, VertexId)> = vec![(1, 2)];
    let mut kept: Vec<(VertexId, VertexId)> = vec![(1, 2)];
    for v in 3..=n as VertexId {
        let (a, b) = full[rng.random_range(0..full.len())];
        full.push((a, v));
        full.push((b, v));
        match rng.random_range(0..4) {
            0 => kept.push((a, v)),
            1 => kept.push((b, v)),
            _ => {
                kept.push((a, v));
                kept.push((b, v));
            }
        }
    }
    let g = Graph::from_edges(n, &kept).expect("partial 2-tree");
    let order = (1..=n as VertexId).rev().collect();
    (g, order)
}

/// Random connected graph: a random spanning tree plus each remaining pair
/// with probability `p`.
pub fn random_connected(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut e = Vec::new();
    for v in 2..=n as VertexId {
        e.push((rng.random_range(1..v), v));
    }
    for u in 1..=n as VertexId {
        for v in u + 1..=n as VertexId {
            if rng.random_bool(p) {
                e.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &e).expect("connected by construction")
}

fn pair_index(i: usize, j: usize) -> usize {
    // i < j, 0-based
    j * (j - 1) / 2 + i
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn rec(p: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == p.len() {
            out.push(p.clone());
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(p, k + 1, out);
            p.swap(k, i);
        }
    }
    rec(&mut p, 0, &mut out);
    out
}

/// Smallest edge mask over all relabelings; equal iff isomorphic.
fn canonical_mask(mask: u32, perm_maps: &[Vec<u32>]) -> u32 {
    let mut best = u32::MAX;
    for map in perm_maps {
        let mut m = 0u32;
        let mut rest = mask;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            m |= map[b];
        }
        best = best.min(m);
    }
    best
}

fn mask_is_connected(n: usize, mask: u32) -> bool {
    let mut seen = 1u32;
    let mut frontier = 1u32;
    while frontier != 0 {
        let u = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        for w in 0..n {
            if w != u && seen >> w & 1 == 0 {
                let (a, b) = if u < w { (u, w) } else { (w, u) };
                if mask >> pair_index(a, b) & 1 == 1 {
                    seen |= 1 << w;
                    frontier |= 1 << w;
                }
            }
        }
    }
    seen.count_ones() as usize == n
}

fn mask_to_graph(n: usize, mask: u32) -> Graph {
    let mut e = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if mask >> pair_index(i, j) & 1 == 1 {
                e.push((i as VertexId + 1, j as VertexId + 1));
            }
        }
    }
    Graph::from_edges(n, &e).expect("connected mask")
}

/// Canonical masks of all graphs (connected or not) on `n` vertices, built by
/// extending every class on `n - 1` vertices with one more vertex.
fn all_masks(n: usize) -> BTreeSet<u32> {
    if n <= 1 {
        return BTreeSet::from([0]);
    }
    let prev = all_masks(n - 1);
    let perm_maps: Vec<Vec<u32>> = permutations(n)
        .into_iter()
        .map(|p| {
            let mut map = vec![0u32; n * (n - 1) / 2];
            for j in 0..n {
                for i in 0..j {
                    let (a, b) = (p[i].min(p[j]), p[i].max(p[j]));
                    map[pair_index(i, j)] = 1 << pair_index(a, b);
                }
            }
            map
        })
        .collect();
    let mut out = BTreeSet::new();
    for &m in &prev {
        for nb in 0u32..(1 << (n - 1)) {
            let mut mask = m;
            for i in 0..n - 1 {
                if nb >> i & 1 == 1 {
                    mask |= 1 << pair_index(i, n - 1);
                }
            }
            out.insert(canonical_mask(mask, &perm_maps));
        }
    }
    out
}

/// One representative of every isomorphism class of connected graphs on
/// exactly `n` vertices (`1 <= n <= 7`).
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    assert!((1..=ENUM_LIMIT).contains(&n), "enumeration limited to n <= 7");
    all_masks(n)
        .into_iter()
        .filter(|&m| mask_is_connected(n, m))
        .map(|m| mask_to_graph(n, m))
        .collect()
}

/// All connected graphs up to `max_n` vertices (up to isomorphism).
pub fn connected_graphs_upto(max_n: usize) -> Vec<Graph> {
    (1..=max_n).flat_map(connected_graphs).collect()
}

/// The standard test corpus: every connected graph on at most six vertices,
/// then cycles, paths and 30 distinct partial 2-trees on seven and eight
/// vertices each.
pub fn standard_corpus() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for n in 1..=6 {
        for (i, g) in connected_graphs(n).into_iter().enumerate() {
            out.push((format!("conn{n}_{i}"), g));
        }
    }
    for n in 7..=8 {
        out.push((format!("cycle{n}"), cycle(n)));
        out.push((format!("path{n}"), path(n)));
        let mut seen = BTreeSet::new();
        let mut seed = 0;
        while seen.len() < 30 {
            let g = partial_2tree(n, seed).0;
            if seen.insert(g.edges()) {
                out.push((format!("p2t{n}_{seed}"), g));
            }
            seed += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn families_have_expected_size() {
        assert_eq!(grid(3, 3).m(), 12);
        assert_eq!(complete_bipartite(3, 3).m(), 9);
        assert_eq!(cycle(5).m(), 5);
        let (g, order) = partial_2tree(20, 7);
        assert_eq!(g.n(), 20);
        assert_eq!(order.len(), 20);
        assert!(crate::elimination::ordering_width(&g, &order) <= 2);
    }

    #[test]
    fn corpus_is_large_enough() {
        assert!(standard_corpus().len() >= 200);
    }
}
