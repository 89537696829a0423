//! Fixed test sentences with direct graph-theoretic oracles.

use super::{parse_formula, parse_sentence, Formula, Logic, Sentence};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub logic: Logic,
    pub text: &'static str,
}

impl SuiteEntry {
    pub fn sentence(&self) -> Sentence {
        parse_sentence(self.text, self.logic).expect("suite sentences parse")
    }

    pub fn formula(&self) -> Formula {
        parse_formula(self.text, self.logic).expect("suite sentences parse")
    }
}

const fn mso1(name: &'static str, text: &'static str) -> SuiteEntry {
    SuiteEntry {
        name,
        logic: Logic::Mso1,
        text,
    }
}

const fn mso2(name: &'static str, text: &'static str) -> SuiteEntry {
    SuiteEntry {
        name,
        logic: Logic::Mso2,
        text,
    }
}

pub const MSO1_SUITE: [SuiteEntry; 10] = [
    mso1("edge", "exists x. exists y. adj(x,y)"),
    mso1(
        "bipartite",
        "exists X. forall x. forall y. adj(x,y) -> !(X(x) <-> X(y))",
    ),
    mso1(
        "dominating-clique",
        "exists X. forall x. exists y. forall z. \
         X(y) & (x = y | adj(x,y)) & ((X(x) & X(z) & !(x = z)) -> adj(x,z))",
    ),
    mso1(
        "triangle",
        "exists x. exists y. exists z. adj(x,y) & adj(y,z) & adj(x,z)",
    ),
    mso1("universal-vertex", "exists x. forall y. x = y | adj(x,y)"),
    mso1(
        "diameter-2",
        "forall x. forall y. exists z. x = y | adj(x,y) | (adj(x,z) & adj(z,y))",
    ),
    mso1(
        "connected",
        "forall X. exists x. exists y. forall z. (X(x) & !X(y) & adj(x,y)) | (X(z) <-> X(x))",
    ),
    mso1(
        "3-colorable",
        "exists X. exists Y. forall x. forall y. \
         !(X(x) & Y(x)) & (adj(x,y) -> !((X(x) <-> X(y)) & (Y(x) <-> Y(y))))",
    ),
    mso1(
        "degree-3",
        "exists x. exists a. exists b. exists c. adj(x,a) & adj(x,b) & adj(x,c) \
         & !(a = b) & !(a = c) & !(b = c)",
    ),
    mso1(
        "edges-in-triangles",
        "forall x. forall y. exists z. adj(x,y) -> (adj(x,z) & adj(y,z))",
    ),
];

pub const MSO2_SUITE: [SuiteEntry; 3] = [
    mso2(
        "acyclic",
        "!exists C. (forall x. C(x) -> edg(x)) & (exists e. C(e)) & \
         forall v. vtx(v) -> ((forall e. !(C(e) & inc(v,e))) | \
         (exists a. exists b. !(a = b) & C(a) & C(b) & inc(v,a) & inc(v,b) & \
         forall e. (C(e) & inc(v,e)) -> (e = a | e = b)))",
    ),
    mso2(
        "perfect-matching",
        "exists M. (forall x. M(x) -> edg(x)) & forall v. vtx(v) -> \
         exists e. M(e) & inc(v,e) & forall f. (M(f) & inc(v,f)) -> f = e",
    ),
    // A 2-factor without a triangle component beside other vertices; this
    // is a Hamiltonian cycle on at most seven vertices.
    mso2(
        "hamiltonian",
        "exists H. (forall x. H(x) -> edg(x)) & \
         (forall v. vtx(v) -> exists a. exists b. !(a = b) & H(a) & H(b) & inc(v,a) & inc(v,b) & \
         forall e. (H(e) & inc(v,e)) -> (e = a | e = b)) & \
         !(exists p. exists q. exists r. exists s. vtx(s) & !(s = p) & !(s = q) & !(s = r) & \
         (exists e1. H(e1) & inc(p,e1) & inc(q,e1)) & \
         (exists e2. H(e2) & inc(q,e2) & inc(r,e2)) & \
         (exists e3. H(e3) & inc(p,e3) & inc(r,e3)) & !(p = q) & !(q = r) & !(p = r))",
    ),
];

/// Largest vertex count on which the `hamiltonian` sentence is exact.
pub const HAMILTONIAN_MAX_N: usize = 7;

pub fn lookup(name: &str) -> Option<SuiteEntry> {
    MSO1_SUITE
        .iter()
        .chain(MSO2_SUITE.iter())
        .find(|e| e.name == name)
        .copied()
}

/// Direct evaluation of a suite sentence by a graph algorithm.
pub fn oracle(name: &str, g: &Graph) -> Option<bool> {
    Some(match name {
        "edge" => g.m() > 0,
        "bipartite" => chromatic_at_most(g, 2),
        "dominating-clique" => dominating_clique(g),
        "triangle" => g
            .edges()
            .iter()
            .any(|&(u, v)| g.neighbors(u).iter().any(|&w| g.has_edge(v, w))),
        "universal-vertex" => g.vertices().any(|v| g.degree(v) + 1 == g.n()),
        "diameter-2" => g.vertices().all(|u| {
            g.vertices().all(|v| {
                u == v || g.has_edge(u, v) || g.neighbors(u).iter().any(|&w| g.has_edge(w, v))
            })
        }),
        "connected" => connected(g),
        "3-colorable" => chromatic_at_most(g, 3),
        "degree-3" => g.vertices().any(|v| g.degree(v) >= 3),
        "edges-in-triangles" => g
            .edges()
            .iter()
            .all(|&(u, v)| g.neighbors(u).iter().any(|&w| g.has_edge(v, w))),
        "acyclic" => is_forest(g),
        "perfect-matching" => has_perfect_matching(g),
        "hamiltonian" => is_hamiltonian(g),
        _ => return None,
    })
}

fn connected(g: &Graph) -> bool {
    let n = g.n();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n + 1];
    let mut stack = vec![1u32];
    seen[1] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

fn chromatic_at_most(g: &Graph, k: u8) -> bool {
    fn go(g: &Graph, k: u8, col: &mut Vec<u8>, v: usize) -> bool {
        if v > g.n() {
            return true;
        }
        for c in 0..k {
            if g
                .neighbors(v as u32)
                .iter()
                .all(|&w| (w as usize) >= v || col[w as usize] != c)
            {
                col[v] = c;
                if go(g, k, col, v + 1) {
                    return true;
                }
            }
        }
        false
    }
    go(g, k, &mut vec![0; g.n() + 1], 1)
}

/// Some nonempty clique dominates every vertex.
fn dominating_clique(g: &Graph) -> bool {
    let n = g.n();
    (1u32..1 << n).any(|mask| {
        let inside = |v: u32| mask >> (v - 1) & 1 == 1;
        let clique = g
            .vertices()
            .all(|u| !inside(u) || g.vertices().all(|w| u == w || !inside(w) || g.has_edge(u, w)));
        clique
            && g
                .vertices()
                .all(|v| inside(v) || g.neighbors(v).iter().any(|&w| inside(w)))
    })
}

fn is_forest(g: &Graph) -> bool {
    let mut parent: Vec<usize> = (0..=g.n()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

fn has_perfect_matching(g: &Graph) -> bool {
    fn go(g: &Graph, used: &mut [bool]) -> bool {
        let Some(v) = (1..used.len()).find(|&v| !used[v]) else {
            return true;
        };
        used[v] = true;
        for &w in g.neighbors(v as u32) {
            if !used[w as usize] {
                used[w as usize] = true;
                if go(g, used) {
                    return true;
                }
                used[w as usize] = false;
            }
        }
        used[v] = false;
        false
    }
    go(g, &mut vec![false; g.n() + 1])
}

fn is_hamiltonian(g: &Graph) -> bool {
    let n = g.n();
    if n < 3 {
        return false;
    }
    fn go(g: &Graph, path: &mut Vec<u32>, used: &mut [bool]) -> bool {
        let last = *path.last().unwrap();
        if path.len() == g.n() {
            return g.has_edge(last, path[0]);
        }
        for &w in g.neighbors(last) {
            if !used[w as usize] {
                used[w as usize] = true;
                path.push(w);
                if go(g, path, used) {
                    return true;
                }
                path.pop();
                used[w as usize] = false;
            }
        }
        false
    }
    let mut used = vec![false; n + 1];
    used[1] = true;
    go(g, &mut vec![1], &mut used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::mso::{eval_bruteforce, Budget, Mso2Structure};

    #[test]
    fn counters_within_limits() {
        for e in MSO1_SUITE {
            let f = e.formula();
            assert!(f.q() <= 4, "{} has q = {}", e.name, f.q());
            assert!(f.q_s() <= 2, "{}", e.name);
        }
        for e in MSO2_SUITE {
            e.formula();
        }
    }

    #[test]
    fn mso1_matches_oracles_small() {
        for g in corpus::connected_graphs_upto(5) {
            for e in MSO1_SUITE {
                let got = eval_bruteforce(&g, &e.sentence(), Budget::default()).unwrap();
                assert_eq!(Some(got), oracle(e.name, &g), "{} on {:?}", e.name, g.edges());
            }
        }
    }

    #[test]
    fn mso2_matches_oracles_small() {
        for g in corpus::connected_graphs_upto(5) {
            let m = Mso2Structure::new(&g);
            for e in MSO2_SUITE {
                let got = eval_bruteforce(&m, &e.sentence(), Budget::default()).unwrap();
                assert_eq!(Some(got), oracle(e.name, &g), "{} on {:?}", e.name, g.edges());
            }
        }
    }

    #[test]
    fn known_values() {
        assert!(!oracle("acyclic", &corpus::cycle(4)).unwrap());
        assert!(!oracle("perfect-matching", &corpus::path(3)).unwrap());
        assert!(oracle("perfect-matching", &corpus::path(4)).unwrap());
        assert!(oracle("hamiltonian", &corpus::cycle(6)).unwrap());
        assert!(!oracle("hamiltonian", &corpus::complete_bipartite(2, 3)).unwrap());
        assert!(!oracle("bipartite", &corpus::cycle(5)).unwrap());
        assert!(oracle("3-colorable", &corpus::cycle(5)).unwrap());
        assert!(!oracle("3-colorable", &corpus::complete(4)).unwrap());
        assert!(oracle("dominating-clique", &corpus::path(4)).unwrap());
        assert!(!oracle("dominating-clique", &corpus::path(6)).unwrap());
        assert!(lookup("edge").is_some() && lookup("nope").is_none());
    }
}
