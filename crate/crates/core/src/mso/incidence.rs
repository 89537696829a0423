//! MSO2 over a graph as MSO1 over its labeled incidence graph.

use super::{Atom, Expr, Formula, LabeledGraph, Logic, Sentence};
use crate::graph::Graph;

/// Vertices `1..=n` keep their ids and carry `lv`; edge `j` of the sorted
/// edge list becomes vertex `n + 1 + j` carrying `le`, adjacent to its two
/// endpoints.
pub fn incidence_graph(g: &Graph) -> LabeledGraph {
    let n = g.n() as u32;
    let edges = g.edges();
    let mut inc = Vec::with_capacity(2 * edges.len());
    for (j, &(u, v)) in edges.iter().enumerate() {
        let e = n + 1 + j as u32;
        inc.push((u, e));
        inc.push((v, e));
    }
    let graph = Graph::from_edges(n as usize + edges.len(), &inc)
        .expect("incidence edges are in range and loop-free");
    let mut labels = vec![1u8; n as usize];
    labels.resize(n as usize + edges.len(), 2);
    LabeledGraph { graph, labels }
}

fn translate(e: &Expr) -> Expr {
    e.map_atoms(&|a| match *a {
        Atom::Vtx(x) => Expr::Atom(Atom::Lv(x)),
        Atom::Edg(x) => Expr::Atom(Atom::Le(x)),
        Atom::Inc(x, y) => Expr::and(
            Expr::and(Expr::Atom(Atom::Adj(x, y)), Expr::Atom(Atom::Lv(x))),
            Expr::Atom(Atom::Le(y)),
        ),
        other => Expr::Atom(other),
    })
}

/// Same prefix; `vtx`, `edg` and `inc` become label and adjacency atoms.
pub fn mso2_to_mso1(f: &Formula) -> Formula {
    Formula {
        logic: Logic::Mso1,
        vars: f.vars.clone(),
        prefix: f.prefix.clone(),
        matrix: translate(&f.matrix),
    }
}

pub fn mso2_to_mso1_sentence(s: &Sentence) -> Sentence {
    Sentence {
        logic: Logic::Mso1,
        vars: s.vars.clone(),
        body: translate(&s.body),
    }
}
