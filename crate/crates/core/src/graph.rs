//! Connected simple graphs with contiguous identifiers `1..=n`, plus the
//! two accepted text formats (plain edge list and DIMACS).

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

/// Vertex identifier. Identifiers are always `1..=n`.
pub type VertexId = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {id} outside 1..={n}")]
    OutOfRange { id: u64, n: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph has no vertices")]
    Empty,
}

/// An undirected, simple, connected graph on vertices `1..=n`.
///
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
}

impl Graph {
    /// Builds a graph from an edge list, deduplicating repeated edges.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut sets = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            for id in [u, v] {
                if id == 0 || id as usize > n {
                    return Err(GraphError::OutOfRange { id: id as u64, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            sets[u as usize - 1].insert(v);
            sets[v as usize - 1].insert(u);
        }
        let g = Graph {
            adj: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        1..=self.n() as VertexId
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize - 1]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// All edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.m());
        for u in self.vertices() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([1 as VertexId]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if !seen[w as usize - 1] {
                    seen[w as usize - 1] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// Serializes in the edge-list format accepted by [`load_graph`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.m());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Smallest-last removal order; see [`degeneracy_order`].
    pub fn degeneracy_order(&self) -> (Vec<VertexId>, usize) {
        degeneracy_order(self)
    }
}

/// Parses either format. DIMACS is detected by a `p` header line.
pub fn load_graph(text: &str) -> Result<Graph, GraphError> {
    let is_dimacs = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('c'))
        .is_some_and(|l| l.starts_with("p "));
    if is_dimacs {
        parse_dimacs(text)
    } else {
        parse_edge_list(text)
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_num(tok: Option<&str>, line: usize, what: &str) -> Result<u64, GraphError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse::<u64>()
        .map_err(|_| parse_err(line, format!("bad {what} `{tok}`")))
}

fn check_id(id: u64, n: usize) -> Result<VertexId, GraphError> {
    if id == 0 || id > n as u64 {
        Err(GraphError::OutOfRange { id, n })
    } else {
        Ok(id as VertexId)
    }
}

fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let a = parse_num(toks.next(), lineno, "number")?;
        let b = parse_num(toks.next(), lineno, "number")?;
        if toks.next().is_some() {
            return Err(parse_err(lineno, "expected exactly two numbers"));
        }
        match header {
            None => header = Some((a as usize, b as usize)),
            Some((n, _)) => {
                let u = check_id(a, n)?;
                let v = check_id(b, n)?;
                if u == v {
                    return Err(GraphError::SelfLoop(u));
                }
                edges.push((u, v));
            }
        }
    }
    let (n, m) = header.ok_or_else(|| parse_err(1, "missing `n m` header"))?;
    if edges.len() != m {
        return Err(parse_err(
            0,
            format!("header declares {m} edges, found {}", edges.len()),
        ));
    }
    Graph::from_edges(n, &edges)
}

fn parse_dimacs(text: &str) -> Result<Graph, GraphError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("p") => {
                if n.is_some() {
                    return Err(parse_err(lineno, "duplicate `p` line"));
                }
                match toks.next() {
                    Some("edge") | Some("col") => {}
                    other => {
                        return Err(parse_err(
                            lineno,
                            format!("unsupported problem `{}`", other.unwrap_or("")),
                        ))
                    }
                }
                n = Some(parse_num(toks.next(), lineno, "vertex count")? as usize);
                parse_num(toks.next(), lineno, "edge count")?;
            }
            Some("e") => {
                let n = n.ok_or_else(|| parse_err(lineno, "edge before `p` line"))?;
                let u = check_id(parse_num(toks.next(), lineno, "endpoint")?, n)?;
                let v = check_id(parse_num(toks.next(), lineno, "endpoint")?, n)?;
                if u == v {
                    return Err(GraphError::SelfLoop(u));
                }
                edges.push((u, v));
            }
            Some(tok) => return Err(parse_err(lineno, format!("unknown line type `{tok}`"))),
            None => {}
        }
    }
    let n = n.ok_or_else(|| parse_err(1, "missing `p edge n m` line"))?;
    Graph::from_edges(n, &edges)
}

/// Repeatedly removes a minimum-degree vertex (smallest id on ties).
///
/// Returns the removal order and the degeneracy `d`, the largest degree seen
/// at removal time. Every vertex has at most `d` neighbors later in the order.
pub fn degeneracy_order(g: &Graph) -> (Vec<VertexId>, usize) {
    let n = g.n();
    let mut deg: Vec<usize> = g.vertices().map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut d = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&i| !removed[i])
            .min_by_key(|&i| (deg[i], i))
            .expect("vertices remain");
        d = d.max(deg[v]);
        removed[v] = true;
        order.push(v as VertexId + 1);
        for &w in g.neighbors(v as VertexId + 1) {
            if !removed[w as usize - 1] {
                deg[w as usize - 1] -= 1;
            }
        }
    }
    (order, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_path_and_triangle() {
        let p3 = load_graph("3 2\n1 2\n2 3\n").unwrap();
        assert_eq!(p3.n(), 3);
        assert_eq!(p3.edges(), vec![(1, 2), (2, 3)]);
        let k3 = load_graph("3 3\n1 2\n2 3\n1 3\n").unwrap();
        assert_eq!(k3.m(), 3);
        assert!(k3.has_edge(3, 1));
    }

    #[test]
    fn rejects_disconnected() {
        assert_eq!(
            load_graph("4 2\n1 2\n3 4\n"),
            Err(GraphError::Disconnected)
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            load_graph("3 1\n1 1\n"),
            Err(GraphError::SelfLoop(1))
        ));
        assert!(matches!(
            load_graph("3 1\n1 4\n"),
            Err(GraphError::OutOfRange { id: 4, .. })
        ));
        assert!(matches!(
            load_graph("3 1\n1 x\n"),
            Err(GraphError::Parse { .. })
        ));
        assert!(matches!(
            load_graph("3 2\n1 2\n"),
            Err(GraphError::Parse { .. })
        ));
    }

    #[test]
    fn comments_and_duplicates() {
        let g = load_graph("# a path\n3 3\n1 2 # first\n2 3\n2 3\n").unwrap();
        assert_eq!(g.m(), 2);
    }

    #[test]
    fn dimacs() {
        let g = load_graph("c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 3 1\n").unwrap();
        assert_eq!(g.m(), 3);
        assert!(matches!(
            load_graph("p edge 3 1\ne 1 5\n"),
            Err(GraphError::OutOfRange { .. })
        ));
    }

    #[test]
    fn degeneracy_examples() {
        let k3 = load_graph("3 3\n1 2\n2 3\n1 3\n").unwrap();
        assert_eq!(degeneracy_order(&k3).1, 2);
        let p3 = load_graph("3 2\n1 2\n2 3\n").unwrap();
        let (order, d) = degeneracy_order(&p3);
        assert_eq!(d, 1);
        assert_eq!(order[0], 1);
        // 2x3 grid: 1-2-3 / 4-5-6 with rungs.
        let grid = Graph::from_edges(
            6,
            &[(1, 2), (2, 3), (4, 5), (5, 6), (1, 4), (2, 5), (3, 6)],
        )
        .unwrap();
        assert_eq!(degeneracy_order(&grid).1, 2);
    }

    #[test]
    fn grid_degeneracy_matches_subgraph_brute_force() {
        let grid = Graph::from_edges(
            6,
            &[(1, 2), (2, 3), (4, 5), (5, 6), (1, 4), (2, 5), (3, 6)],
        )
        .unwrap();
        // Degeneracy = max over vertex subsets of the min degree inside the subset.
        let mut best = 0;
        for mask in 1u32..(1 << 6) {
            let min_deg = (0..6)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| {
                    grid.neighbors(i + 1)
                        .iter()
                        .filter(|&&w| mask >> (w - 1) & 1 == 1)
                        .count()
                })
                .min()
                .unwrap();
            best = best.max(min_deg);
        }
        assert_eq!(best, 2);
        assert_eq!(degeneracy_order(&grid).1, best);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = load_graph("p edge 4 4\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n").unwrap();
        assert_eq!(load_graph(&g.to_edge_list()).unwrap(), g);
    }
}
