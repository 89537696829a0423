//! Brute-force semantics: every quantifier enumerates its whole domain.

use thiserror::Error;

use super::{Atom, Expr, Formula, Sentence, VarKind};
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("evaluation exceeded the budget of {0} steps")]
    Budget(u64),
    #[error("universe of {0} elements is too large for set quantification")]
    TooLarge(usize),
}

/// Caps the number of quantifier bindings tried.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_steps: 4_000_000_000,
        }
    }
}

/// A finite structure with 0-based elements.
pub trait Structure {
    fn size(&self) -> usize;
    fn adj(&self, a: usize, b: usize) -> bool;
    /// Bit 0: vertex label, bit 1: edge label.
    fn label(&self, _a: usize) -> u8 {
        0
    }
    fn vtx(&self, _a: usize) -> bool {
        false
    }
    fn edg(&self, _a: usize) -> bool {
        false
    }
    fn inc(&self, _x: usize, _e: usize) -> bool {
        false
    }
}

impl Structure for Graph {
    fn size(&self) -> usize {
        self.n()
    }

    fn adj(&self, a: usize, b: usize) -> bool {
        self.has_edge(a as u32 + 1, b as u32 + 1)
    }
}

/// A graph whose vertices carry the unary labels `lv` (bit 0) and `le` (bit 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<u8>,
}

impl LabeledGraph {
    pub fn unlabeled(graph: Graph) -> Self {
        let labels = vec![0; graph.n()];
        LabeledGraph { graph, labels }
    }
}

impl Structure for LabeledGraph {
    fn size(&self) -> usize {
        self.graph.n()
    }

    fn adj(&self, a: usize, b: usize) -> bool {
        self.graph.adj(a, b)
    }

    fn label(&self, a: usize) -> u8 {
        self.labels[a]
    }
}

/// The two-sorted view of a graph: elements `0..n` are vertices, then one
/// element per edge in sorted edge order.
#[derive(Clone, Debug)]
pub struct Mso2Structure {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Mso2Structure {
    pub fn new(g: &Graph) -> Self {
        Mso2Structure {
            n: g.n(),
            edges: g
                .edges()
                .into_iter()
                .map(|(u, v)| (u as usize - 1, v as usize - 1))
                .collect(),
        }
    }
}

impl Structure for Mso2Structure {
    fn size(&self) -> usize {
        self.n + self.edges.len()
    }

    fn adj(&self, _a: usize, _b: usize) -> bool {
        false
    }

    fn vtx(&self, a: usize) -> bool {
        a < self.n
    }

    fn edg(&self, a: usize) -> bool {
        a >= self.n
    }

    fn inc(&self, x: usize, e: usize) -> bool {
        x < self.n && e >= self.n && {
            let (u, v) = self.edges[e - self.n];
            x == u || x == v
        }
    }
}

/// Evaluates a quantifier-free formula, asking `atom` for atomic truth
/// values. Short-circuits, so `atom` is only called when needed.
pub fn eval_matrix<E>(
    e: &Expr,
    atom: &mut impl FnMut(&Atom) -> Result<bool, E>,
) -> Result<bool, E> {
    Ok(match e {
        Expr::Atom(a) => atom(a)?,
        Expr::Not(a) => !eval_matrix(a, atom)?,
        Expr::And(a, b) => eval_matrix(a, atom)? && eval_matrix(b, atom)?,
        Expr::Or(a, b) => eval_matrix(a, atom)? || eval_matrix(b, atom)?,
        Expr::Implies(a, b) => !eval_matrix(a, atom)? || eval_matrix(b, atom)?,
        Expr::Iff(a, b) => eval_matrix(a, atom)? == eval_matrix(b, atom)?,
        Expr::Quant(..) => panic!("quantifier inside a matrix"),
    })
}

struct Ctx<'a, S: Structure + ?Sized> {
    s: &'a S,
    ind: Vec<usize>,
    sets: Vec<u64>,
    steps: u64,
    max_steps: u64,
}

impl<S: Structure + ?Sized> Ctx<'_, S> {
    fn atom(&self, a: &Atom) -> bool {
        let i = &self.ind;
        match *a {
            Atom::Adj(x, y) => self.s.adj(i[x], i[y]),
            Atom::Eq(x, y) => i[x] == i[y],
            Atom::Mem(set, x) => self.sets[set] >> i[x] & 1 == 1,
            Atom::Lv(x) => self.s.label(i[x]) & 1 == 1,
            Atom::Le(x) => self.s.label(i[x]) & 2 == 2,
            Atom::Vtx(x) => self.s.vtx(i[x]),
            Atom::Edg(x) => self.s.edg(i[x]),
            Atom::Inc(x, y) => self.s.inc(i[x], i[y]),
        }
    }

    fn step(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.max_steps {
            return Err(EvalError::Budget(self.max_steps));
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr, kinds: &[VarKind]) -> Result<bool, EvalError> {
        Ok(match e {
            Expr::Atom(a) => self.atom(a),
            Expr::Not(a) => !self.eval(a, kinds)?,
            Expr::And(a, b) => self.eval(a, kinds)? && self.eval(b, kinds)?,
            Expr::Or(a, b) => self.eval(a, kinds)? || self.eval(b, kinds)?,
            Expr::Implies(a, b) => !self.eval(a, kinds)? || self.eval(b, kinds)?,
            Expr::Iff(a, b) => self.eval(a, kinds)? == self.eval(b, kinds)?,
            Expr::Quant(q, v, body) => {
                let want = *q == super::Quant::Exists;
                let n = self.s.size();
                match kinds[*v] {
                    VarKind::Individual => {
                        for x in 0..n {
                            self.step()?;
                            self.ind[*v] = x;
                            if self.eval(body, kinds)? == want {
                                return Ok(want);
                            }
                        }
                    }
                    VarKind::Set => {
                        for m in 0..1u64 << n {
                            self.step()?;
                            self.sets[*v] = m;
                            if self.eval(body, kinds)? == want {
                                return Ok(want);
                            }
                        }
                    }
                }
                !want
            }
        })
    }
}

/// Truth of a sentence in a structure by exhaustive enumeration.
pub fn eval_bruteforce<S: Structure + ?Sized>(
    s: &S,
    sentence: &Sentence,
    budget: Budget,
) -> Result<bool, EvalError> {
    let has_sets = sentence.vars.iter().any(|v| v.kind == VarKind::Set);
    if has_sets && s.size() > 63 {
        return Err(EvalError::TooLarge(s.size()));
    }
    let kinds: Vec<VarKind> = sentence.vars.iter().map(|v| v.kind).collect();
    let mut ctx = Ctx {
        s,
        ind: vec![0; kinds.len()],
        sets: vec![0; kinds.len()],
        steps: 0,
        max_steps: budget.max_steps,
    };
    ctx.eval(&sentence.body, &kinds)
}

/// Truth of a prenex formula by exhaustive enumeration.
pub fn eval_formula<S: Structure + ?Sized>(
    s: &S,
    f: &Formula,
    budget: Budget,
) -> Result<bool, EvalError> {
    eval_bruteforce(s, &f.to_sentence(), budget)
}
