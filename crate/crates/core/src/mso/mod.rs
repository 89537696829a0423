//! Monadic second-order sentences over graphs: syntax trees, prenex normal
//! form, a concrete-syntax parser, brute-force semantics and the incidence
//! translation from MSO2 to MSO1.
//!
//! Variables starting with a lowercase letter range over single elements,
//! variables starting with an uppercase letter over sets of elements.

mod eval;
mod incidence;
mod parse;
pub mod suite;

use std::fmt;

use thiserror::Error;

pub use eval::{
    eval_bruteforce, eval_formula, eval_matrix, Budget, EvalError, LabeledGraph, Mso2Structure,
    Structure,
};
pub use incidence::{incidence_graph, mso2_to_mso1, mso2_to_mso1_sentence};
pub use parse::{parse_formula, parse_sentence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Logic {
    /// Vertices with adjacency, plus the unary labels `lv` and `le`.
    Mso1,
    /// Vertices and edges with `vtx`, `edg` and `inc`.
    Mso2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quant {
    Forall,
    Exists,
}

impl Quant {
    pub fn dual(self) -> Self {
        match self {
            Quant::Forall => Quant::Exists,
            Quant::Exists => Quant::Forall,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Individual,
    Set,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
}

/// Atomic formulas. Arguments are variable indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Adj(usize, usize),
    Eq(usize, usize),
    /// `X(x)`: set variable, then individual variable.
    Mem(usize, usize),
    /// Carries the vertex label.
    Lv(usize),
    /// Carries the edge label.
    Le(usize),
    Vtx(usize),
    Edg(usize),
    /// `inc(x, e)`: vertex `x` is an endpoint of edge `e`.
    Inc(usize, usize),
}

impl Atom {
    pub fn vars(&self) -> Vec<usize> {
        match *self {
            Atom::Adj(a, b) | Atom::Eq(a, b) | Atom::Mem(a, b) | Atom::Inc(a, b) => vec![a, b],
            Atom::Lv(a) | Atom::Le(a) | Atom::Vtx(a) | Atom::Edg(a) => vec![a],
        }
    }

    fn map_vars(&self, f: impl Fn(usize) -> usize) -> Atom {
        match *self {
            Atom::Adj(a, b) => Atom::Adj(f(a), f(b)),
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Mem(a, b) => Atom::Mem(f(a), f(b)),
            Atom::Inc(a, b) => Atom::Inc(f(a), f(b)),
            Atom::Lv(a) => Atom::Lv(f(a)),
            Atom::Le(a) => Atom::Le(f(a)),
            Atom::Vtx(a) => Atom::Vtx(f(a)),
            Atom::Edg(a) => Atom::Edg(f(a)),
        }
    }

    pub fn logic(&self) -> Option<Logic> {
        match self {
            Atom::Adj(..) | Atom::Lv(_) | Atom::Le(_) => Some(Logic::Mso1),
            Atom::Vtx(_) | Atom::Edg(_) | Atom::Inc(..) => Some(Logic::Mso2),
            Atom::Eq(..) | Atom::Mem(..) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Atom(Atom),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Quant(Quant, usize, Box<Expr>),
}

impl Expr {
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Or(Box::new(a), Box::new(b))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Expr::Atom(_) => true,
            Expr::Not(a) => a.is_quantifier_free(),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Expr::Quant(..) => false,
        }
    }

    pub fn map_atoms(&self, f: &impl Fn(&Atom) -> Expr) -> Expr {
        match self {
            Expr::Atom(a) => f(a),
            Expr::Not(a) => Expr::not(a.map_atoms(f)),
            Expr::And(a, b) => Expr::and(a.map_atoms(f), b.map_atoms(f)),
            Expr::Or(a, b) => Expr::or(a.map_atoms(f), b.map_atoms(f)),
            Expr::Implies(a, b) => Expr::Implies(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Expr::Iff(a, b) => Expr::Iff(Box::new(a.map_atoms(f)), Box::new(b.map_atoms(f))),
            Expr::Quant(q, v, body) => Expr::Quant(*q, *v, Box::new(body.map_atoms(f))),
        }
    }

    fn map_vars(&self, f: &impl Fn(usize) -> usize) -> Expr {
        match self {
            Expr::Atom(a) => Expr::Atom(a.map_vars(f)),
            Expr::Not(a) => Expr::not(a.map_vars(f)),
            Expr::And(a, b) => Expr::and(a.map_vars(f), b.map_vars(f)),
            Expr::Or(a, b) => Expr::or(a.map_vars(f), b.map_vars(f)),
            Expr::Implies(a, b) => Expr::Implies(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Iff(a, b) => Expr::Iff(Box::new(a.map_vars(f)), Box::new(b.map_vars(f))),
            Expr::Quant(q, v, body) => Expr::Quant(*q, f(*v), Box::new(body.map_vars(f))),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("free variable {0}")]
    FreeVariable(String),
    #[error("variable {0} is bound twice on one branch")]
    DuplicateVariable(String),
    #[error("variable {0} used with the wrong kind")]
    WrongKind(String),
    #[error("predicate {0} is not part of the selected logic")]
    WrongLogic(String),
    #[error("a sentence needs at least one quantifier")]
    NoQuantifier,
}

/// A sentence with arbitrary quantifier nesting. Every quantifier binds its
/// own entry of `vars`; no variable is free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub logic: Logic,
    pub vars: Vec<Var>,
    pub body: Expr,
}

/// A sentence in prenex normal form. Variable `i` is bound by the `i`-th
/// quantifier of the prefix; names are distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Formula {
    pub logic: Logic,
    pub vars: Vec<Var>,
    pub prefix: Vec<Quant>,
    pub matrix: Expr,
}

impl Formula {
    pub fn q(&self) -> usize {
        self.prefix.len()
    }

    pub fn q_v(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Individual).count()
    }

    pub fn q_s(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Set).count()
    }

    pub fn kind(&self, i: usize) -> VarKind {
        self.vars[i].kind
    }

    /// Position of variable `i` among variables of the same kind.
    pub fn slot(&self, i: usize) -> usize {
        let kind = self.vars[i].kind;
        self.vars[..i].iter().filter(|v| v.kind == kind).count()
    }

    /// The same formula as a nested sentence.
    pub fn to_sentence(&self) -> Sentence {
        let mut body = self.matrix.clone();
        for (i, &q) in self.prefix.iter().enumerate().rev() {
            body = Expr::Quant(q, i, Box::new(body));
        }
        Sentence {
            logic: self.logic,
            vars: self.vars.clone(),
            body,
        }
    }

    pub fn negate(&self) -> Formula {
        Formula {
            logic: self.logic,
            vars: self.vars.clone(),
            prefix: self.prefix.iter().map(|q| q.dual()).collect(),
            matrix: Expr::not(self.matrix.clone()),
        }
    }
}

impl Sentence {
    pub fn negate(&self) -> Sentence {
        Sentence {
            logic: self.logic,
            vars: self.vars.clone(),
            body: Expr::not(self.body.clone()),
        }
    }
}

/// Converts to prenex normal form. Bound variables that share a name get
/// fresh names; `<->` is expanded first, so its operands are duplicated.
pub fn to_prenex(s: &Sentence) -> Formula {
    let mut vars = s.vars.clone();
    let body = expand_iff(&s.body, &mut vars);
    let mut prefix = Vec::new();
    let matrix = pull(&body, false, &mut prefix);
    // renumber variables by prefix position
    let mut order = vec![usize::MAX; vars.len()];
    for (pos, &(_, v)) in prefix.iter().enumerate() {
        order[v] = pos;
    }
    let matrix = matrix.map_vars(&|v| order[v]);
    let mut new_vars: Vec<Var> = prefix.iter().map(|&(_, v)| vars[v].clone()).collect();
    rename_duplicates(&mut new_vars);
    Formula {
        logic: s.logic,
        vars: new_vars,
        prefix: prefix.into_iter().map(|(q, _)| q).collect(),
        matrix,
    }
}

fn rename_duplicates(vars: &mut [Var]) {
    let mut used: std::collections::HashSet<String> = std::collections::HashSet::new();
    let all: std::collections::HashSet<String> = vars.iter().map(|v| v.name.clone()).collect();
    for v in vars.iter_mut() {
        if !used.insert(v.name.clone()) {
            let mut k = 1;
            let fresh = loop {
                let cand = format!("{}{}", v.name, k);
                if !all.contains(&cand) && !used.contains(&cand) {
                    break cand;
                }
                k += 1;
            };
            used.insert(fresh.clone());
            v.name = fresh;
        }
    }
}

/// Replaces `a <-> b` by `(a -> b) & (b -> a)`, giving the copy of every
/// binder in the second half a new variable index.
fn expand_iff(e: &Expr, vars: &mut Vec<Var>) -> Expr {
    match e {
        Expr::Atom(_) => e.clone(),
        Expr::Not(a) => Expr::not(expand_iff(a, vars)),
        Expr::And(a, b) => Expr::and(expand_iff(a, vars), expand_iff(b, vars)),
        Expr::Or(a, b) => Expr::or(expand_iff(a, vars), expand_iff(b, vars)),
        Expr::Implies(a, b) => {
            Expr::Implies(Box::new(expand_iff(a, vars)), Box::new(expand_iff(b, vars)))
        }
        Expr::Quant(q, v, body) => Expr::Quant(*q, *v, Box::new(expand_iff(body, vars))),
        Expr::Iff(a, b) => {
            let a1 = expand_iff(a, vars);
            let b1 = expand_iff(b, vars);
            let a2 = fresh_copy(&a1, vars);
            let b2 = fresh_copy(&b1, vars);
            Expr::and(
                Expr::Implies(Box::new(a1), Box::new(b1)),
                Expr::Implies(Box::new(b2), Box::new(a2)),
            )
        }
    }
}

fn binders(e: &Expr, out: &mut Vec<usize>) {
    match e {
        Expr::Atom(_) => {}
        Expr::Not(a) => binders(a, out),
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
            binders(a, out);
            binders(b, out);
        }
        Expr::Quant(_, v, body) => {
            out.push(*v);
            binders(body, out);
        }
    }
}

fn fresh_copy(e: &Expr, vars: &mut Vec<Var>) -> Expr {
    let mut bound = Vec::new();
    binders(e, &mut bound);
    if bound.is_empty() {
        return e.clone();
    }
    let mut map: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for v in bound {
        map.insert(v, vars.len());
        vars.push(vars[v].clone());
    }
    e.map_vars(&|v| *map.get(&v).unwrap_or(&v))
}

/// Pulls quantifiers outwards. `negated` tracks the polarity of the current
/// position so quantifiers under an odd number of negations flip.
fn pull(e: &Expr, negated: bool, prefix: &mut Vec<(Quant, usize)>) -> Expr {
    match e {
        Expr::Atom(_) => e.clone(),
        Expr::Not(a) => Expr::not(pull(a, !negated, prefix)),
        Expr::And(a, b) => Expr::and(pull(a, negated, prefix), pull(b, negated, prefix)),
        Expr::Or(a, b) => Expr::or(pull(a, negated, prefix), pull(b, negated, prefix)),
        Expr::Implies(a, b) => Expr::Implies(
            Box::new(pull(a, !negated, prefix)),
            Box::new(pull(b, negated, prefix)),
        ),
        Expr::Iff(..) => unreachable!("expanded before pulling"),
        Expr::Quant(q, v, body) => {
            prefix.push((if negated { q.dual() } else { *q }, *v));
            pull(body, negated, prefix)
        }
    }
}

struct Show<'a> {
    vars: &'a [Var],
    e: &'a Expr,
}

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = |i: usize| &self.vars[i].name;
        let sub = |e| Show { vars: self.vars, e };
        match self.e {
            Expr::Atom(a) => match *a {
                Atom::Adj(x, y) => write!(f, "adj({},{})", n(x), n(y)),
                Atom::Eq(x, y) => write!(f, "{} = {}", n(x), n(y)),
                Atom::Mem(s, x) => write!(f, "{}({})", n(s), n(x)),
                Atom::Lv(x) => write!(f, "lv({})", n(x)),
                Atom::Le(x) => write!(f, "le({})", n(x)),
                Atom::Vtx(x) => write!(f, "vtx({})", n(x)),
                Atom::Edg(x) => write!(f, "edg({})", n(x)),
                Atom::Inc(x, y) => write!(f, "inc({},{})", n(x), n(y)),
            },
            Expr::Not(a) => write!(f, "!({})", sub(a)),
            Expr::And(a, b) => write!(f, "({}) & ({})", sub(a), sub(b)),
            Expr::Or(a, b) => write!(f, "({}) | ({})", sub(a), sub(b)),
            Expr::Implies(a, b) => write!(f, "({}) -> ({})", sub(a), sub(b)),
            Expr::Iff(a, b) => write!(f, "({}) <-> ({})", sub(a), sub(b)),
            Expr::Quant(q, v, body) => {
                let kw = if *q == Quant::Forall { "forall" } else { "exists" };
                write!(f, "{kw} {}. {}", n(*v), sub(body))
            }
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Show {
            vars: &self.vars,
            e: &self.body,
        }
        .fmt(f)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, q) in self.prefix.iter().enumerate() {
            let kw = if *q == Quant::Forall { "forall" } else { "exists" };
            write!(f, "{kw} {}. ", self.vars[i].name)?;
        }
        Show {
            vars: &self.vars,
            e: &self.matrix,
        }
        .fmt(f)
    }
}
