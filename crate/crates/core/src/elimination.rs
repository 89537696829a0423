//! Elimination trees built from vertex orderings by fill-in simulation,
//! their width, validation against a graph, and exact/heuristic search.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, VertexId};

/// Largest graph accepted by the exact branch-and-bound search.
pub const EXACT_LIMIT: usize = 12;
/// Largest graph accepted by the all-orderings oracle.
pub const BRUTE_FORCE_LIMIT: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EliminationError {
    #[error("ordering is not a permutation of 1..={0}")]
    NotPermutation(usize),
    #[error("elimination tree width {width} exceeds bound {bound}")]
    WidthExceeded { width: usize, bound: usize },
    #[error("graph with {n} vertices exceeds the limit {limit} for exhaustive search")]
    TooLarge { n: usize, limit: usize },
}

/// First violated invariant found by [`validate_elimination_tree`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    #[error("tree covers {found} vertices, graph has {expected}")]
    WrongSize { expected: usize, found: usize },
    #[error("root {0} has a parent")]
    RootHasParent(VertexId),
    #[error("vertex {0} has no parent but is not the root")]
    MissingParent(VertexId),
    #[error("parent pointers from {0} do not reach the root")]
    NotATree(VertexId),
    #[error("depth of {0} is inconsistent with its parent")]
    BadDepth(VertexId),
    #[error("edge {0}-{1} joins two branches")]
    CrossEdge(VertexId, VertexId),
    #[error("recorded str({0}) differs from the recomputed set")]
    BadStr(VertexId),
}

/// Search strategy for [`best_elimination_tree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    Heuristic,
}

/// A rooted spanning tree on `V(G)` in which every edge of `G` joins an
/// ancestor-descendant pair.
///
/// `strset(v)` holds `v` together with every ancestor that has a neighbor in
/// the subtree of `v`, ordered by increasing depth (so `v` comes last).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationTree {
    root: VertexId,
    parent: Vec<Option<VertexId>>,
    depth: Vec<u32>,
    strsets: Vec<Vec<VertexId>>,
}

impl EliminationTree {
    /// Assembles a tree from raw parts without checking anything.
    ///
    /// Use [`validate_elimination_tree`] before trusting the result.
    pub fn from_parts(
        root: VertexId,
        parent: Vec<Option<VertexId>>,
        depth: Vec<u32>,
        strsets: Vec<Vec<VertexId>>,
    ) -> Self {
        EliminationTree {
            root,
            parent,
            depth,
            strsets,
        }
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v as usize - 1]
    }

    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v as usize - 1]
    }

    pub fn strset(&self, v: VertexId) -> &[VertexId] {
        &self.strsets[v as usize - 1]
    }

    /// `str(v) \ {v}`, ordered by increasing depth.
    pub fn boundary(&self, v: VertexId) -> &[VertexId] {
        let s = self.strset(v);
        &s[..s.len() - 1]
    }

    /// Children of `v`, sorted by id.
    pub fn children(&self, v: VertexId) -> Vec<VertexId> {
        (1..=self.n() as VertexId)
            .filter(|&u| self.parent(u) == Some(v))
            .collect()
    }

    /// Vertices ordered so that every child precedes its parent.
    pub fn post_order(&self) -> Vec<VertexId> {
        let mut order: Vec<VertexId> = (1..=self.n() as VertexId).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(self.depth(v)), v));
        order
    }

    pub fn is_ancestor(&self, anc: VertexId, v: VertexId) -> bool {
        let mut cur = Some(v);
        while let Some(c) = cur {
            if c == anc {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }

    pub fn width(&self) -> usize {
        width(self)
    }

    /// One line per vertex: `v parent depth str...` (`-` for the root's parent).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for v in 1..=self.n() as VertexId {
            let p = self
                .parent(v)
                .map_or_else(|| "-".to_string(), |p| p.to_string());
            let s: Vec<String> = self.strset(v).iter().map(u32::to_string).collect();
            let _ = writeln!(out, "{v} {p} {} {}", self.depth(v), s.join(" "));
        }
        out
    }
}

/// Simulates elimination in the given order. The parent of `v` is its
/// earliest-eliminated fill neighbor among those eliminated after it.
pub fn tree_from_ordering(
    g: &Graph,
    ordering: &[VertexId],
) -> Result<EliminationTree, EliminationError> {
    let n = g.n();
    let pos = positions(n, ordering)?;
    let mut fill: Vec<Vec<bool>> = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        fill[u as usize - 1][v as usize - 1] = true;
        fill[v as usize - 1][u as usize - 1] = true;
    }
    let mut parent = vec![None; n];
    let mut higher_sets: Vec<Vec<VertexId>> = vec![Vec::new(); n];
    for &v in ordering {
        let vi = v as usize - 1;
        let higher: Vec<usize> = (0..n)
            .filter(|&w| fill[vi][w] && pos[w] > pos[vi])
            .collect();
        for (a, &x) in higher.iter().enumerate() {
            for &y in &higher[a + 1..] {
                fill[x][y] = true;
                fill[y][x] = true;
            }
        }
        parent[vi] = higher
            .iter()
            .min_by_key(|&&w| pos[w])
            .map(|&w| w as VertexId + 1);
        higher_sets[vi] = higher.iter().map(|&w| w as VertexId + 1).collect();
    }
    let root = *ordering.last().expect("nonempty graph");
    let depth = depths(&parent);
    let strsets = higher_sets
        .into_iter()
        .enumerate()
        .map(|(vi, mut s)| {
            s.sort_by_key(|&x| depth[x as usize - 1]);
            s.push(vi as VertexId + 1);
            s
        })
        .collect();
    Ok(EliminationTree {
        root,
        parent,
        depth,
        strsets,
    })
}

fn positions(n: usize, ordering: &[VertexId]) -> Result<Vec<usize>, EliminationError> {
    if ordering.len() != n {
        return Err(EliminationError::NotPermutation(n));
    }
    let mut pos = vec![usize::MAX; n];
    for (i, &v) in ordering.iter().enumerate() {
        if v == 0 || v as usize > n || pos[v as usize - 1] != usize::MAX {
            return Err(EliminationError::NotPermutation(n));
        }
        pos[v as usize - 1] = i;
    }
    Ok(pos)
}

fn depths(parent: &[Option<VertexId>]) -> Vec<u32> {
    let n = parent.len();
    let mut depth = vec![u32::MAX; n];
    for start in 0..n {
        let mut chain = vec![start];
        let mut cur = start;
        while depth[cur] == u32::MAX {
            match parent[cur] {
                Some(p) => {
                    cur = p as usize - 1;
                    chain.push(cur);
                }
                None => {
                    depth[cur] = 0;
                    break;
                }
            }
        }
        let mut d = depth[cur];
        for &c in chain.iter().rev().skip(1) {
            d += 1;
            depth[c] = d;
        }
    }
    depth
}

/// `max_v |str(v)| - 1`.
pub fn width(t: &EliminationTree) -> usize {
    t.strsets.iter().map(|s| s.len() - 1).max().unwrap_or(0)
}

/// Width of the elimination order without building the tree: the largest
/// number of later fill neighbors any vertex has when it is eliminated.
pub fn ordering_width(g: &Graph, ordering: &[VertexId]) -> usize {
    let n = g.n();
    let mut adj: Vec<u64> = vec![0; n];
    for (u, v) in g.edges() {
        adj[u as usize - 1] |= 1 << (v - 1);
        adj[v as usize - 1] |= 1 << (u - 1);
    }
    let mut alive: u64 = if n == 64 { !0 } else { (1 << n) - 1 };
    let mut best = 0;
    for &v in ordering {
        let vi = v as usize - 1;
        alive &= !(1 << vi);
        let nb = adj[vi] & alive;
        best = best.max(nb.count_ones() as usize);
        let mut rest = nb;
        while rest != 0 {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            adj[w] |= nb & !(1 << w);
        }
    }
    best
}

/// Minimum width over all `n!` orderings. Reference oracle for small graphs.
pub fn treewidth_bruteforce(g: &Graph) -> Result<usize, EliminationError> {
    let n = g.n();
    if n > BRUTE_FORCE_LIMIT {
        return Err(EliminationError::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut perm: Vec<VertexId> = g.vertices().collect();
    let mut best = ordering_width(g, &perm);
    // Heap's algorithm, iterative form.
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(ordering_width(g, &perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

/// Min-fill ordering: repeatedly eliminate the vertex whose neighborhood
/// needs the fewest fill edges (smallest id on ties).
pub fn min_fill_ordering(g: &Graph) -> Vec<VertexId> {
    let n = g.n();
    let mut adj: Vec<Vec<bool>> = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        adj[u as usize - 1][v as usize - 1] = true;
        adj[v as usize - 1][u as usize - 1] = true;
    }
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let nb: Vec<usize> = (0..n).filter(|&w| alive[w] && adj[v][w]).collect();
            let mut fill = 0;
            for (a, &x) in nb.iter().enumerate() {
                fill += nb[a + 1..].iter().filter(|&&y| !adj[x][y]).count();
            }
            if best.is_none_or(|(f, _)| fill < f) {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("vertex remains");
        let nb: Vec<usize> = (0..n).filter(|&w| alive[w] && adj[v][w]).collect();
        for &x in &nb {
            for &y in &nb {
                if x != y {
                    adj[x][y] = true;
                }
            }
        }
        alive[v] = false;
        order.push(v as VertexId + 1);
    }
    order
}

/// Branch and bound over elimination orderings, seeded with the min-fill
/// upper bound. Eliminated prefixes are memoized by vertex set: the cost of
/// eliminating a vertex depends only on which vertices went before it.
fn exact_ordering(g: &Graph) -> Vec<VertexId> {
    let n = g.n();
    let adj: Vec<u32> = g
        .vertices()
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << (w - 1)))
        .collect();
    let heuristic = min_fill_ordering(g);
    let mut search = Search {
        n,
        adj,
        best_width: ordering_width(g, &heuristic),
        best_order: heuristic,
        seen: HashMap::new(),
        prefix: Vec::with_capacity(n),
    };
    search.descend(0, 0);
    search.best_order
}

struct Search {
    n: usize,
    adj: Vec<u32>,
    best_width: usize,
    best_order: Vec<VertexId>,
    // eliminated set -> smallest prefix width reaching it
    seen: HashMap<u32, usize>,
    prefix: Vec<VertexId>,
}

impl Search {
    /// Degree of `v` in the fill graph after eliminating `gone`: the number of
    /// live vertices reachable from `v` through eliminated vertices only.
    fn fill_degree(&self, gone: u32, v: usize) -> usize {
        let mut reached = 1u32 << v;
        let mut frontier = 1u32 << v;
        let mut live = 0u32;
        while frontier != 0 {
            let u = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let next = self.adj[u] & !reached;
            reached |= next;
            live |= next & !gone;
            frontier |= next & gone;
        }
        live.count_ones() as usize
    }

    fn descend(&mut self, gone: u32, width_so_far: usize) {
        if self.prefix.len() == self.n {
            if width_so_far < self.best_width {
                self.best_width = width_so_far;
                self.best_order = self.prefix.clone();
            }
            return;
        }
        if let Some(&w) = self.seen.get(&gone) {
            if w <= width_so_far {
                return;
            }
        }
        self.seen.insert(gone, width_so_far);
        // A remaining graph on r vertices never needs width above r - 1.
        let remaining = self.n - self.prefix.len();
        if width_so_far.max(0) >= self.best_width
            || (remaining <= self.best_width && width_so_far.max(remaining - 1) >= self.best_width)
        {
            return;
        }
        for v in 0..self.n {
            if gone >> v & 1 == 1 {
                continue;
            }
            let deg = self.fill_degree(gone, v);
            let w = width_so_far.max(deg);
            if w >= self.best_width {
                continue;
            }
            self.prefix.push(v as VertexId + 1);
            self.descend(gone | 1 << v, w);
            self.prefix.pop();
        }
    }
}

/// Picks an elimination tree by exact search or the min-fill heuristic and
/// checks it against the width bound `omega`.
pub fn best_elimination_tree(
    g: &Graph,
    mode: SearchMode,
    omega: usize,
) -> Result<EliminationTree, EliminationError> {
    let ordering = match mode {
        SearchMode::Exact => {
            if g.n() > EXACT_LIMIT {
                return Err(EliminationError::TooLarge {
                    n: g.n(),
                    limit: EXACT_LIMIT,
                });
            }
            exact_ordering(g)
        }
        SearchMode::Heuristic => min_fill_ordering(g),
    };
    let tree = tree_from_ordering(g, &ordering)?;
    let w = tree.width();
    if w > omega {
        return Err(EliminationError::WidthExceeded {
            width: w,
            bound: omega,
        });
    }
    Ok(tree)
}

/// Checks every elimination-tree invariant against `g`, recomputing the
/// `str` sets from their definition.
pub fn validate_elimination_tree(g: &Graph, t: &EliminationTree) -> Result<(), TreeViolation> {
    let n = g.n();
    if t.parent.len() != n || t.depth.len() != n || t.strsets.len() != n {
        return Err(TreeViolation::WrongSize {
            expected: n,
            found: t.parent.len(),
        });
    }
    if t.root == 0 || t.root as usize > n {
        return Err(TreeViolation::WrongSize {
            expected: n,
            found: t.parent.len(),
        });
    }
    if t.parent(t.root).is_some() {
        return Err(TreeViolation::RootHasParent(t.root));
    }
    for v in g.vertices() {
        match t.parent(v) {
            None if v != t.root => return Err(TreeViolation::MissingParent(v)),
            Some(p) if p == 0 || p as usize > n || p == v => {
                return Err(TreeViolation::NotATree(v))
            }
            _ => {}
        }
        // Reaching the root within n steps rules out cycles.
        let mut cur = v;
        let mut steps = 0;
        while let Some(p) = t.parent(cur) {
            cur = p;
            steps += 1;
            if steps > n {
                return Err(TreeViolation::NotATree(v));
            }
        }
        if cur != t.root {
            return Err(TreeViolation::NotATree(v));
        }
    }
    for v in g.vertices() {
        let expected = match t.parent(v) {
            None => 0,
            Some(p) => t.depth(p).wrapping_add(1),
        };
        if t.depth(v) != expected {
            return Err(TreeViolation::BadDepth(v));
        }
    }
    for (u, v) in g.edges() {
        if !t.is_ancestor(u, v) && !t.is_ancestor(v, u) {
            return Err(TreeViolation::CrossEdge(u, v));
        }
    }
    for v in g.vertices() {
        let subtree: Vec<VertexId> = g.vertices().filter(|&w| t.is_ancestor(v, w)).collect();
        let mut expected: Vec<VertexId> = g
            .vertices()
            .filter(|&x| {
                x == v
                    || (t.is_ancestor(x, v)
                        && subtree.iter().any(|&w| g.has_edge(x, w)))
            })
            .collect();
        expected.sort_by_key(|&x| t.depth(x));
        if t.strset(v) != expected.as_slice() {
            return Err(TreeViolation::BadStr(v));
        }
    }
    Ok(())
}
