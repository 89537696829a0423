//! Compact evaluation trees.
//!
//! A tree for vertex `t` of an elimination tree has one level per prefix
//! quantifier and a configuration at every leaf. The universe is the subtree
//! of `t` plus the marked vertices `str(t) \ {t}`; everything outside is
//! `ext`. Trees are hash-consed in an [`Engine`], so sibling subtrees that are
//! isomorphic collapse to the same node and reduction is implicit.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::rc::Rc;
use std::fmt::Write as _;

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

use thiserror::Error;

use crate::elimination::EliminationTree;
use crate::graph::VertexId;
use crate::label::{id_width, BitReader, BitWriter, LabelError};
use crate::mso::{eval_matrix, Atom, Expr, Formula, LabeledGraph, Logic, Quant, VarKind};

pub type NodeId = u32;

/// Default cap on the number of distinct nodes an engine may hold.
pub const DEFAULT_MAX_NODES: usize = 4_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalTreeError {
    #[error("unsupported formula: {0}")]
    Unsupported(String),
    #[error("malformed tree: {0}")]
    Malformed(String),
    #[error("conflicting {0} while combining trees")]
    Conflict(&'static str),
    #[error("individual level without an ext child")]
    MissingExt,
    #[error("mark left over at the root")]
    ResidualMark,
    #[error("unknown relation needed for evaluation")]
    Unknown,
    #[error("tree exceeds {0} nodes")]
    Budget(usize),
}

impl From<LabelError> for EvalTreeError {
    fn from(e: LabelError) -> Self {
        EvalTreeError::Malformed(e.to_string())
    }
}

type Result<T> = std::result::Result<T, EvalTreeError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeState {
    Non,
    Edge,
    Unknown,
}

impl EdgeState {
    fn code(self) -> u64 {
        match self {
            EdgeState::Non => 0,
            EdgeState::Edge => 1,
            EdgeState::Unknown => 2,
        }
    }

    fn from_code(c: u64) -> Option<Self> {
        match c {
            0 => Some(EdgeState::Non),
            1 => Some(EdgeState::Edge),
            2 => Some(EdgeState::Unknown),
            _ => None,
        }
    }

    fn merge(self, other: Self) -> Result<Self> {
        match (self, other) {
            (EdgeState::Unknown, x) | (x, EdgeState::Unknown) => Ok(x),
            (a, b) if a == b => Ok(a),
            _ => Err(EvalTreeError::Conflict("edge states")),
        }
    }
}

fn pair(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    j * (j - 1) / 2 + i
}

fn merge_label(a: Option<u8>, b: Option<u8>) -> Result<Option<u8>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(EvalTreeError::Conflict("labels")),
        (Some(x), _) | (_, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

/// A leaf: a small graph over the vertices hit by individual variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    /// Per individual variable: vertex index, or `None` for `ext`.
    pub assign: Vec<Option<u8>>,
    pub marks: Vec<Option<VertexId>>,
    /// Per vertex: membership bit for every set variable.
    pub sets: Vec<u8>,
    /// Per vertex: label bits, `None` while unknown.
    pub labels: Vec<Option<u8>>,
    /// Upper triangle, pair `(i, j)` with `i < j` at `j(j-1)/2 + i`.
    pub edges: Vec<EdgeState>,
}

impl Config {
    pub fn k(&self) -> usize {
        self.marks.len()
    }

    pub fn edge(&self, i: usize, j: usize) -> EdgeState {
        self.edges[pair(i, j)]
    }

    /// Numbers vertices by the first variable that hits them and drops
    /// vertices no variable hits.
    fn normalize(self) -> Config {
        let mut order: Vec<usize> = Vec::new();
        for &a in self.assign.iter().flatten() {
            if !order.contains(&(a as usize)) {
                order.push(a as usize);
            }
        }
        let mut new_of = vec![None; self.k()];
        for (n, &o) in order.iter().enumerate() {
            new_of[o] = Some(n as u8);
        }
        let m = order.len();
        let mut edges = vec![EdgeState::Non; m * m.saturating_sub(1) / 2];
        for j in 0..m {
            for i in 0..j {
                edges[pair(i, j)] = self.edge(order[i], order[j]);
            }
        }
        Config {
            assign: self
                .assign
                .iter()
                .map(|a| a.and_then(|x| new_of[x as usize]))
                .collect(),
            marks: order.iter().map(|&o| self.marks[o]).collect(),
            sets: order.iter().map(|&o| self.sets[o]).collect(),
            labels: order.iter().map(|&o| self.labels[o]).collect(),
            edges,
        }
    }
}

/// Annotation of the edge to a child. Individual levels use the first three.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Annot {
    Ext,
    Mark(VertexId),
    Fresh,
    Set,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Leaf(Rc<Config>),
    Inner(Rc<[(Annot, NodeId)]>),
}

fn mark_bit(m: VertexId) -> u64 {
    1 << (m % 64)
}

/// Content hash that does not depend on arena ids, so every engine orders
/// siblings the same way.
fn mix(h: u64, x: u64) -> u64 {
    let mut z = (h ^ x).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn annot_code(a: Annot) -> u64 {
    match a {
        Annot::Ext => 0,
        Annot::Mark(m) => 1 + ((m as u64) << 2),
        Annot::Fresh => 2,
        Annot::Set => 3,
    }
}

fn config_hash(c: &Config) -> u64 {
    let mut h = mix(0, c.k() as u64);
    for a in &c.assign {
        h = mix(h, a.map_or(255, u64::from));
    }
    for i in 0..c.k() {
        h = mix(h, c.marks[i].map_or(0, |m| m as u64 + 1));
        h = mix(h, c.sets[i] as u64);
        h = mix(h, c.labels[i].map_or(7, u64::from));
    }
    for e in &c.edges {
        h = mix(h, e.code());
    }
    h
}

/// Subtrees up to this many bits are encoded once per serialization and
/// copied afterwards.
const CACHED_BITS: u64 = 1 << 16;

#[derive(Default)]
struct WriteMemo {
    encoded: HashMap<NodeId, (Vec<u8>, usize)>,
    sizes: HashMap<NodeId, u64>,
}

/// Elements a tree is enumerated over, for auxiliary and reference trees.
struct Universe {
    ids: Vec<VertexId>,
    marked: Vec<bool>,
    labels: Vec<Option<u8>>,
    rel: Vec<EdgeState>,
}

/// Arena of hash-consed trees for one formula and one id width.
pub struct Engine {
    prefix: Vec<Quant>,
    kinds: Vec<VarKind>,
    slot: Vec<usize>,
    names: Vec<String>,
    matrix: Expr,
    q_v: usize,
    q_s: usize,
    s: u32,
    wv: u32,
    dedup: bool,
    max_nodes: usize,
    nodes: Vec<Node>,
    height: Vec<u8>,
    /// Per node, a filter of the marks occurring in its subtree.
    mark_filter: Vec<u64>,
    shape: Vec<u64>,
    /// Per node, the memberships of each mark in the set variables
    /// quantified above it; `None` if its leaves disagree.
    fixed: Vec<Option<Rc<[(VertexId, u8)]>>>,
    /// Per level, the set-variable bits quantified strictly above it.
    above: Vec<u8>,
    index: HashMap<Node, NodeId>,
    prod: HashMap<(NodeId, NodeId), Option<NodeId>>,
    truth: HashMap<NodeId, bool>,
    /// Leaves already parsed, keyed by their encoding behind a 1 bit.
    leaf_codes: HashMap<u128, NodeId>,
}

fn check_atoms(e: &Expr) -> Result<()> {
    match e {
        Expr::Atom(a) => match a {
            Atom::Vtx(_) | Atom::Edg(_) | Atom::Inc(..) => Err(EvalTreeError::Unsupported(
                "incidence atoms; translate to the incidence graph first".into(),
            )),
            _ => Ok(()),
        },
        Expr::Not(a) => check_atoms(a),
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => {
            check_atoms(a)?;
            check_atoms(b)
        }
        Expr::Quant(..) => Err(EvalTreeError::Unsupported("quantifier in matrix".into())),
    }
}

impl Engine {
    /// An engine for `f` writing vertex ids in `s` bits.
    pub fn new(f: &Formula, s: u32) -> Result<Self> {
        if f.logic != Logic::Mso1 {
            return Err(EvalTreeError::Unsupported("MSO2 formula".into()));
        }
        check_atoms(&f.matrix)?;
        if f.q() == 0 {
            return Err(EvalTreeError::Unsupported("no quantifier".into()));
        }
        if f.q_v() > 16 || f.q_s() > 8 {
            return Err(EvalTreeError::Unsupported("too many variables".into()));
        }
        let q_v = f.q_v();
        Ok(Engine {
            prefix: f.prefix.clone(),
            kinds: f.vars.iter().map(|v| v.kind).collect(),
            slot: (0..f.q()).map(|i| f.slot(i)).collect(),
            names: f.vars.iter().map(|v| v.name.clone()).collect(),
            matrix: f.matrix.clone(),
            q_v,
            q_s: f.q_s(),
            s,
            wv: (u64::BITS - (q_v as u64).leading_zeros()).max(1),
            dedup: true,
            max_nodes: DEFAULT_MAX_NODES,
            nodes: Vec::new(),
            height: Vec::new(),
            mark_filter: Vec::new(),
            shape: Vec::new(),
            fixed: Vec::new(),
            above: (0..=f.q())
                .map(|l| {
                    (0..l)
                        .filter(|&i| f.vars[i].kind == VarKind::Set)
                        .fold(0u8, |m, i| m | 1 << f.slot(i))
                })
                .collect(),
            index: HashMap::default(),
            prod: HashMap::default(),
            truth: HashMap::default(),
            leaf_codes: HashMap::default(),
        })
    }

    pub fn with_max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    /// Keeps isomorphic siblings apart. Only for checking that reduction
    /// does not change truth values.
    pub fn without_reduction(mut self) -> Self {
        self.dedup = false;
        self
    }

    pub fn q(&self) -> usize {
        self.prefix.len()
    }

    pub fn id_bits(&self) -> u32 {
        self.s
    }

    /// Number of distinct nodes held by the arena.
    pub fn arena_size(&self) -> usize {
        self.nodes.len()
    }

    fn level(&self, id: NodeId) -> usize {
        self.q() - self.height[id as usize] as usize
    }

    fn write_config(&self, w: &mut BitWriter, c: &Config) {
        let ext = self.q_v as u64;
        w.uint(c.k() as u64, self.wv).expect("k fits");
        for a in &c.assign {
            w.uint(a.map_or(ext, |x| x as u64), self.wv).expect("index fits");
        }
        for i in 0..c.k() {
            match c.marks[i] {
                Some(m) => {
                    w.bit(true);
                    w.uint(m as u64 - 1, self.s).expect("mark fits the id width");
                }
                None => w.bit(false),
            }
            w.uint(c.sets[i] as u64, self.q_s as u32).expect("set bits fit");
            match c.labels[i] {
                Some(l) => {
                    w.bit(true);
                    w.uint(l as u64, 2).expect("label fits");
                }
                None => w.bit(false),
            }
        }
        for e in &c.edges {
            w.uint(e.code(), 2).expect("edge code fits");
        }
    }

    fn write_annot(&self, w: &mut BitWriter, a: Annot) {
        match a {
            Annot::Ext => w.uint(0, 2).expect("fits"),
            Annot::Mark(m) => {
                w.uint(1, 2).expect("fits");
                w.uint(m as u64 - 1, self.s).expect("mark fits the id width");
            }
            Annot::Fresh => w.uint(2, 2).expect("fits"),
            Annot::Set => {}
        }
    }

    /// Canonical order of subtrees: by content hash, ties broken
    /// structurally (leaves by configuration, inner nodes lexicographically
    /// by their (annotation, child) lists).
    fn cmp_nodes(&self, a: NodeId, b: NodeId) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        let o = self.shape[a as usize].cmp(&self.shape[b as usize]);
        if o != Ordering::Equal {
            return o;
        }
        match (&self.nodes[a as usize], &self.nodes[b as usize]) {
            (Node::Leaf(x), Node::Leaf(y)) => x.cmp(y),
            (Node::Inner(x), Node::Inner(y)) => self.cmp_children(x, y),
            (Node::Leaf(_), Node::Inner(_)) => Ordering::Less,
            (Node::Inner(_), Node::Leaf(_)) => Ordering::Greater,
        }
    }

    fn cmp_children(&self, x: &[(Annot, NodeId)], y: &[(Annot, NodeId)]) -> Ordering {
        for (p, q) in x.iter().zip(y) {
            let o = p.0.cmp(&q.0).then_with(|| self.cmp_nodes(p.1, q.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        x.len().cmp(&y.len())
    }

    fn intern_leaf(&mut self, c: Config) -> Result<NodeId> {
        self.insert(Node::Leaf(Rc::new(c)))
    }

    fn intern_inner(&mut self, mut ch: Vec<(Annot, NodeId)>) -> Result<NodeId> {
        ch.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| self.cmp_nodes(a.1, b.1)));
        if self.dedup {
            ch.dedup();
        }
        self.insert(Node::Inner(ch.into()))
    }

    fn insert(&mut self, node: Node) -> Result<NodeId> {
        if let Some(&id) = self.index.get(&node) {
            return Ok(id);
        }
        if self.nodes.len() >= self.max_nodes {
            return Err(EvalTreeError::Budget(self.max_nodes));
        }
        let (height, filter, shape) = match &node {
            Node::Leaf(c) => (
                0,
                c.marks.iter().flatten().fold(0, |f, &m| f | mark_bit(m)),
                config_hash(c),
            ),
            Node::Inner(ch) => {
                let mut filter = 0;
                let mut shape = mix(1, ch.len() as u64);
                for &(a, c) in ch.iter() {
                    if let Annot::Mark(m) = a {
                        filter |= mark_bit(m);
                    }
                    filter |= self.mark_filter[c as usize];
                    shape = mix(mix(shape, annot_code(a)), self.shape[c as usize]);
                }
                (self.height[ch[0].1 as usize] + 1, filter, shape)
            }
        };
        let fixed = self.fixed_of(&node, height);
        let id = self.nodes.len() as NodeId;
        self.height.push(height);
        self.mark_filter.push(filter);
        self.shape.push(shape);
        self.fixed.push(fixed);
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        Ok(id)
    }

    fn fixed_of(&self, node: &Node, height: u8) -> Option<Rc<[(VertexId, u8)]>> {
        let mask = self.above[self.q() - height as usize];
        let mut out: Vec<(VertexId, u8)> = Vec::new();
        let mut add = |m: VertexId, bits: u8| -> bool {
            match out.binary_search_by_key(&m, |e| e.0) {
                Ok(i) => out[i].1 == bits & mask,
                Err(i) => {
                    out.insert(i, (m, bits & mask));
                    true
                }
            }
        };
        match node {
            Node::Leaf(c) => {
                for (m, &bits) in c.marks.iter().zip(&c.sets) {
                    if let Some(m) = m {
                        add(*m, bits);
                    }
                }
            }
            Node::Inner(ch) => {
                for &(_, c) in ch.iter() {
                    for &(m, bits) in self.fixed[c as usize].as_deref()? {
                        if !add(m, bits) {
                            return None;
                        }
                    }
                }
            }
        }
        Some(out.into())
    }

    /// Whether two set-level siblings can combine: marks present in both
    /// must agree on every set variable fixed so far.
    fn compatible(&self, a: NodeId, b: NodeId) -> bool {
        let (Some(x), Some(y)) = (&self.fixed[a as usize], &self.fixed[b as usize]) else {
            return true;
        };
        let (mut i, mut j) = (0, 0);
        while i < x.len() && j < y.len() {
            match x[i].0.cmp(&y[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    if x[i].1 != y[j].1 {
                        return false;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        true
    }

    fn write_cached(&self, w: &mut BitWriter, id: NodeId, memo: &mut WriteMemo) {
        if let Some((bytes, bits)) = memo.encoded.get(&id) {
            w.append(bytes, *bits);
            return;
        }
        if self.size_bits(id, &mut memo.sizes) <= CACHED_BITS {
            let mut sub = BitWriter::new();
            self.write_node(&mut sub, id, memo);
            let (bytes, bits) = sub.into_parts();
            w.append(&bytes, bits);
            memo.encoded.insert(id, (bytes, bits));
        } else {
            self.write_node(w, id, memo);
        }
    }

    fn write_node(&self, w: &mut BitWriter, id: NodeId, memo: &mut WriteMemo) {
        match &self.nodes[id as usize] {
            Node::Leaf(c) => self.write_config(w, c),
            Node::Inner(ch) => {
                w.gamma(ch.len() as u64);
                for &(a, c) in ch.iter() {
                    self.write_annot(w, a);
                    self.write_cached(w, c, memo);
                }
            }
        }
    }

    fn annot_bits(&self, a: Annot) -> u64 {
        match a {
            Annot::Ext | Annot::Fresh => 2,
            Annot::Mark(_) => 2 + self.s as u64,
            Annot::Set => 0,
        }
    }

    fn size_bits(&self, id: NodeId, sizes: &mut HashMap<NodeId, u64>) -> u64 {
        if let Some(&b) = sizes.get(&id) {
            return b;
        }
        let b = match &self.nodes[id as usize] {
            Node::Leaf(c) => {
                let mut w = BitWriter::new();
                self.write_config(&mut w, c);
                w.len() as u64
            }
            Node::Inner(ch) => {
                let gamma = 2 * (63 - (ch.len() as u64).leading_zeros() as u64) + 1;
                ch.iter().fold(gamma, |acc, &(a, c)| {
                    acc.saturating_add(self.annot_bits(a))
                        .saturating_add(self.size_bits(c, sizes))
                })
            }
        };
        sizes.insert(id, b);
        b
    }

    fn children(&self, id: NodeId) -> &[(Annot, NodeId)] {
        match &self.nodes[id as usize] {
            Node::Inner(ch) => ch,
            Node::Leaf(_) => &[],
        }
    }

    fn children_rc(&self, id: NodeId) -> Rc<[(Annot, NodeId)]> {
        match &self.nodes[id as usize] {
            Node::Inner(ch) => ch.clone(),
            Node::Leaf(_) => Rc::new([]),
        }
    }

    /// The leaf configuration, if `id` is a leaf.
    pub fn config(&self, id: NodeId) -> Option<&Config> {
        match &self.nodes[id as usize] {
            Node::Leaf(c) => Some(&**c),
            Node::Inner(_) => None,
        }
    }

    fn merge(&self, a: &Config, b: &Config) -> Result<Option<Config>> {
        for j in 0..b.k() {
            if let Some(m) = b.marks[j] {
                if let Some(i) = a.marks.iter().position(|&x| x == Some(m)) {
                    if a.sets[i] != b.sets[j] {
                        return Ok(None);
                    }
                }
            }
        }
        let ka = a.k();
        let mut map = Vec::with_capacity(b.k());
        let mut marks = a.marks.clone();
        let mut sets = a.sets.clone();
        let mut labels = a.labels.clone();
        let mut from_a = vec![true; ka];
        for j in 0..b.k() {
            let same = b.marks[j].and_then(|m| a.marks.iter().position(|&x| x == Some(m)));
            match same {
                Some(i) => {
                    if a.sets[i] != b.sets[j] {
                        return Ok(None);
                    }
                    labels[i] = merge_label(a.labels[i], b.labels[j])?;
                    map.push(i);
                }
                None => {
                    map.push(marks.len());
                    marks.push(b.marks[j]);
                    sets.push(b.sets[j]);
                    labels.push(b.labels[j]);
                    from_a.push(false);
                }
            }
        }
        let k = marks.len();
        let mut edges = vec![None; k * k.saturating_sub(1) / 2];
        for j in 0..ka {
            for i in 0..j {
                edges[pair(i, j)] = Some(a.edge(i, j));
            }
        }
        for j in 0..b.k() {
            for i in 0..j {
                let (x, y) = (map[i], map[j]);
                if x == y {
                    return Err(EvalTreeError::Conflict("marks"));
                }
                let e = b.edge(i, j);
                let slot = &mut edges[pair(x, y)];
                *slot = Some(match *slot {
                    Some(old) => old.merge(e)?,
                    None => e,
                });
            }
        }
        let mut full = Vec::with_capacity(edges.len());
        for j in 0..k {
            for i in 0..j {
                full.push(edges[pair(i, j)].unwrap_or(
                    if marks[i].is_some() && marks[j].is_some() {
                        EdgeState::Unknown
                    } else {
                        EdgeState::Non
                    },
                ));
            }
        }
        let mut assign = Vec::with_capacity(a.assign.len());
        for (x, y) in a.assign.iter().zip(&b.assign) {
            assign.push(match (x, y) {
                (Some(x), Some(y)) => {
                    if map[*y as usize] != *x as usize {
                        return Err(EvalTreeError::Conflict("variable assignments"));
                    }
                    Some(*x)
                }
                (Some(x), None) => Some(*x),
                (None, Some(y)) => Some(map[*y as usize] as u8),
                (None, None) => None,
            });
        }
        Ok(Some(
            Config {
                assign,
                marks,
                sets,
                labels,
                edges: full,
            }
            .normalize(),
        ))
    }

    /// The tree product. `None` means no consistent combination exists.
    pub fn product(&mut self, a: NodeId, b: NodeId) -> Result<Option<NodeId>> {
        if let Some(&r) = self.prod.get(&(a, b)) {
            return Ok(r);
        }
        if self.height[a as usize] != self.height[b as usize] {
            return Err(EvalTreeError::Malformed("trees of different height".into()));
        }
        let level = self.level(a);
        let r = if level == self.q() {
            let (ca, cb) = (self.config(a).unwrap(), self.config(b).unwrap());
            match self.merge(ca, cb)? {
                Some(c) => Some(self.intern_leaf(c)?),
                None => None,
            }
        } else if self.kinds[level] == VarKind::Set {
            let (xa, xb) = (self.children_rc(a), self.children_rc(b));
            let mut out = Vec::with_capacity(xa.len().max(xb.len()));
            for &(_, ca) in xa.iter() {
                for &(_, cb) in xb.iter() {
                    if !self.compatible(ca, cb) {
                        continue;
                    }
                    if let Some(c) = self.product(ca, cb)? {
                        out.push((Annot::Set, c));
                    }
                }
            }
            if out.is_empty() {
                None
            } else {
                Some(self.intern_inner(out)?)
            }
        } else {
            self.individual_product(a, b)?
        };
        self.prod.insert((a, b), r);
        Ok(r)
    }

    fn individual_product(&mut self, a: NodeId, b: NodeId) -> Result<Option<NodeId>> {
        let (xa, xb) = (self.children_rc(a), self.children_rc(b));
        let ext = |x: &[(Annot, NodeId)]| {
            x.iter()
                .find(|c| c.0 == Annot::Ext)
                .map(|c| c.1)
                .ok_or(EvalTreeError::MissingExt)
        };
        let (ea, eb) = (ext(&xa)?, ext(&xb)?);
        let mark = |x: &[(Annot, NodeId)], m| x.iter().find(|c| c.0 == Annot::Mark(m)).map(|c| c.1);
        let mut out = Vec::with_capacity(xa.len() + xb.len());
        let mut push = |e: &mut Self, ann, ca, cb| -> Result<bool> {
            Ok(match e.product(ca, cb)? {
                Some(c) => {
                    out.push((ann, c));
                    true
                }
                None => false,
            })
        };
        for &(ann, ca) in xa.iter() {
            let ok = match ann {
                Annot::Ext => true,
                Annot::Mark(m) => push(self, ann, ca, mark(&xb, m).unwrap_or(eb))?,
                Annot::Fresh => push(self, ann, ca, eb)?,
                Annot::Set => return Err(EvalTreeError::Malformed("set annotation".into())),
            };
            if !ok {
                return Ok(None);
            }
        }
        for &(ann, cb) in xb.iter() {
            let ok = match ann {
                Annot::Mark(m) if mark(&xa, m).is_none() => push(self, ann, ea, cb)?,
                Annot::Fresh => push(self, ann, ea, cb)?,
                Annot::Set => return Err(EvalTreeError::Malformed("set annotation".into())),
                _ => true,
            };
            if !ok {
                return Ok(None);
            }
        }
        if !push(self, Annot::Ext, ea, eb)? {
            return Ok(None);
        }
        Ok(Some(self.intern_inner(out)?))
    }

    /// Forgets the mark of `t`; relations involving `t` must be known by now.
    pub fn strip(&mut self, id: NodeId, t: VertexId) -> Result<NodeId> {
        let mut memo = HashMap::default();
        self.strip_rec(id, t, &mut memo)
    }

    fn strip_rec(
        &mut self,
        id: NodeId,
        t: VertexId,
        memo: &mut HashMap<NodeId, NodeId>,
    ) -> Result<NodeId> {
        if self.mark_filter[id as usize] & mark_bit(t) == 0 {
            return Ok(id);
        }
        if let Some(&r) = memo.get(&id) {
            return Ok(r);
        }
        let r = match self.nodes[id as usize].clone() {
            Node::Leaf(c) => {
                let mut c = (*c).clone();
                if let Some(i) = c.marks.iter().position(|&m| m == Some(t)) {
                    c.marks[i] = None;
                    if c.labels[i].is_none() {
                        return Err(EvalTreeError::Unknown);
                    }
                    if (0..c.k()).any(|j| j != i && c.edge(i, j) == EdgeState::Unknown) {
                        return Err(EvalTreeError::Unknown);
                    }
                }
                self.intern_leaf(c)?
            }
            Node::Inner(ch) => {
                let mut out = Vec::with_capacity(ch.len());
                for &(a, c) in ch.iter() {
                    let a = if a == Annot::Mark(t) { Annot::Fresh } else { a };
                    out.push((a, self.strip_rec(c, t, memo)?));
                }
                self.intern_inner(out)?
            }
        };
        memo.insert(id, r);
        Ok(r)
    }

    fn enumerate(&mut self, u: &Universe) -> Result<NodeId> {
        if u.ids.len() > 20 {
            return Err(EvalTreeError::Unsupported("universe too large to enumerate".into()));
        }
        let mut assign = vec![None; self.q_v];
        let mut sets = vec![0u64; self.q_s];
        self.enumerate_rec(u, 0, &mut assign, &mut sets)
    }

    fn enumerate_rec(
        &mut self,
        u: &Universe,
        level: usize,
        assign: &mut Vec<Option<usize>>,
        sets: &mut Vec<u64>,
    ) -> Result<NodeId> {
        if level == self.q() {
            let hit: Vec<usize> = {
                let mut h: Vec<usize> = assign.iter().flatten().copied().collect();
                h.sort_unstable();
                h.dedup();
                h
            };
            let k = hit.len();
            let mut edges = vec![EdgeState::Non; k * k.saturating_sub(1) / 2];
            for j in 0..k {
                for i in 0..j {
                    edges[pair(i, j)] = u.rel[pair(hit[i], hit[j])];
                }
            }
            let config = Config {
                assign: assign
                    .iter()
                    .map(|a| a.map(|e| hit.iter().position(|&h| h == e).unwrap() as u8))
                    .collect(),
                marks: hit
                    .iter()
                    .map(|&e| u.marked[e].then_some(u.ids[e]))
                    .collect(),
                sets: hit
                    .iter()
                    .map(|&e| {
                        (0..self.q_s).fold(0u8, |acc, s| acc | ((sets[s] >> e & 1) as u8) << s)
                    })
                    .collect(),
                labels: hit.iter().map(|&e| u.labels[e]).collect(),
                edges,
            };
            return self.intern_leaf(config.normalize());
        }
        let slot = self.slot[level];
        let mut out = Vec::new();
        match self.kinds[level] {
            VarKind::Individual => {
                assign[slot] = None;
                out.push((Annot::Ext, self.enumerate_rec(u, level + 1, assign, sets)?));
                for e in 0..u.ids.len() {
                    assign[slot] = Some(e);
                    let ann = if u.marked[e] {
                        Annot::Mark(u.ids[e])
                    } else {
                        Annot::Fresh
                    };
                    out.push((ann, self.enumerate_rec(u, level + 1, assign, sets)?));
                }
                assign[slot] = None;
            }
            VarKind::Set => {
                for mask in 0..1u64 << u.ids.len() {
                    sets[slot] = mask;
                    out.push((Annot::Set, self.enumerate_rec(u, level + 1, assign, sets)?));
                }
                sets[slot] = 0;
            }
        }
        self.intern_inner(out)
    }

    /// The auxiliary tree of `t`: universe `str(t)`, every element marked by
    /// its own id. `adj[i]` tells whether `t` is adjacent to `boundary[i]`.
    pub fn aux(
        &mut self,
        t: VertexId,
        boundary: &[VertexId],
        adj: &[bool],
        label: u8,
    ) -> Result<NodeId> {
        let k = boundary.len() + 1;
        let mut rel = vec![EdgeState::Unknown; k * (k - 1) / 2];
        for (i, &a) in adj.iter().enumerate() {
            rel[pair(i, k - 1)] = if a { EdgeState::Edge } else { EdgeState::Non };
        }
        let mut ids = boundary.to_vec();
        ids.push(t);
        let mut labels = vec![None; k - 1];
        labels.push(Some(label));
        let u = Universe {
            ids,
            marked: vec![true; k],
            labels,
            rel,
        };
        self.enumerate(&u)
    }

    /// Folds the children's trees (in the given order) with the auxiliary
    /// tree of `t`, then forgets the mark of `t`.
    pub fn fold(
        &mut self,
        t: VertexId,
        boundary: &[VertexId],
        adj: &[bool],
        label: u8,
        children: &[NodeId],
    ) -> Result<NodeId> {
        let empty = || EvalTreeError::Malformed("no consistent combination".into());
        let mut acc: Option<NodeId> = None;
        for &c in children {
            acc = Some(match acc {
                None => c,
                Some(x) => self.product(x, c)?.ok_or_else(empty)?,
            });
        }
        let a = self.aux(t, boundary, adj, label)?;
        let r = match acc {
            None => a,
            Some(x) => self.product(x, a)?.ok_or_else(empty)?,
        };
        self.strip(r, t)
    }

    /// Reference tree built directly from the graph by enumerating every
    /// assignment over the subtree of `v` and its marked boundary.
    pub fn reference_tree(
        &mut self,
        lg: &LabeledGraph,
        t: &EliminationTree,
        v: VertexId,
    ) -> Result<NodeId> {
        let g = &lg.graph;
        let mut ids: Vec<VertexId> = g.vertices().filter(|&u| t.is_ancestor(v, u)).collect();
        let inside = ids.len();
        ids.extend_from_slice(t.boundary(v));
        let k = ids.len();
        let mut rel = vec![EdgeState::Non; k * k.saturating_sub(1) / 2];
        for j in 0..k {
            for i in 0..j {
                rel[pair(i, j)] = if i >= inside {
                    EdgeState::Unknown
                } else if g.has_edge(ids[i], ids[j]) {
                    EdgeState::Edge
                } else {
                    EdgeState::Non
                };
            }
        }
        let u = Universe {
            marked: (0..k).map(|i| i >= inside).collect(),
            labels: (0..k)
                .map(|i| (i < inside).then(|| lg.labels[ids[i] as usize - 1]))
                .collect(),
            ids,
            rel,
        };
        self.enumerate(&u)
    }

    /// Truth value of a root tree; `ext` branches are ignored.
    pub fn evaluate_root(&mut self, id: NodeId) -> Result<bool> {
        if let Some(&r) = self.truth.get(&id) {
            return Ok(r);
        }
        let level = self.level(id);
        let r = if level == self.q() {
            let c = self.config(id).unwrap();
            if c.marks.iter().any(|m| m.is_some()) {
                return Err(EvalTreeError::ResidualMark);
            }
            self.leaf_truth(c)?
        } else {
            let want = self.prefix[level] == Quant::Exists;
            let mut result = !want;
            for (a, c) in self.children(id).to_vec() {
                match a {
                    Annot::Ext => continue,
                    Annot::Mark(_) => return Err(EvalTreeError::ResidualMark),
                    _ => {}
                }
                if self.evaluate_root(c)? == want {
                    result = want;
                    break;
                }
            }
            result
        };
        self.truth.insert(id, r);
        Ok(r)
    }

    fn leaf_truth(&self, c: &Config) -> Result<bool> {
        let vertex = |var: usize| {
            c.assign[self.slot[var]]
                .map(|x| x as usize)
                .ok_or_else(|| EvalTreeError::Malformed("unassigned variable".into()))
        };
        eval_matrix(&self.matrix, &mut |a: &Atom| -> Result<bool> {
            Ok(match *a {
                Atom::Adj(x, y) => {
                    let (i, j) = (vertex(x)?, vertex(y)?);
                    i != j
                        && match c.edge(i, j) {
                            EdgeState::Edge => true,
                            EdgeState::Non => false,
                            EdgeState::Unknown => return Err(EvalTreeError::Unknown),
                        }
                }
                Atom::Eq(x, y) => vertex(x)? == vertex(y)?,
                Atom::Mem(set, x) => c.sets[vertex(x)?] >> self.slot[set] & 1 == 1,
                Atom::Lv(x) => c.labels[vertex(x)?].ok_or(EvalTreeError::Unknown)? & 1 == 1,
                Atom::Le(x) => c.labels[vertex(x)?].ok_or(EvalTreeError::Unknown)? & 2 == 2,
                Atom::Vtx(_) | Atom::Edg(_) | Atom::Inc(..) => {
                    return Err(EvalTreeError::Unsupported("incidence atom".into()))
                }
            })
        })
    }

    pub fn serialize(&self, id: NodeId) -> Vec<u8> {
        let mut w = BitWriter::new();
        self.write_cached(&mut w, id, &mut WriteMemo::default());
        w.into_parts().0
    }

    /// Bit length of the serialized tree before padding.
    pub fn serialized_bits(&self, id: NodeId) -> u64 {
        self.size_bits(id, &mut HashMap::default())
    }

    /// Parses a serialized tree. Only canonical encodings are accepted.
    pub fn deserialize(&mut self, bytes: &[u8]) -> Result<NodeId> {
        let mut r = BitReader::new(bytes, bytes.len() * 8);
        let id = self.parse(&mut r, 0)?;
        let pad = r.remaining();
        if pad >= 8 || r.uint(pad as u32)? != 0 {
            return Err(EvalTreeError::Malformed("not in canonical form".into()));
        }
        Ok(id)
    }

    fn parse(&mut self, r: &mut BitReader, level: usize) -> Result<NodeId> {
        if level == self.q() {
            return self.parse_leaf(r);
        }
        let count = r.gamma()?;
        if count as usize > r.remaining() {
            return Err(LabelError::Truncated.into());
        }
        let individual = self.kinds[level] == VarKind::Individual;
        let mut out = Vec::with_capacity(count as usize);
        let mut seen = Vec::new();
        let mut exts = 0;
        for _ in 0..count {
            let ann = if individual {
                match r.uint(2)? {
                    0 => {
                        exts += 1;
                        Annot::Ext
                    }
                    1 => {
                        let m = r.uint(self.s)? as VertexId + 1;
                        seen.push(m);
                        Annot::Mark(m)
                    }
                    2 => Annot::Fresh,
                    _ => return Err(EvalTreeError::Malformed("bad annotation".into())),
                }
            } else {
                Annot::Set
            };
            out.push((ann, self.parse(r, level + 1)?));
        }
        if individual && exts != 1 {
            return Err(EvalTreeError::MissingExt);
        }
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(EvalTreeError::Malformed("repeated mark".into()));
        }
        let limit = if self.dedup {
            Ordering::Less
        } else {
            Ordering::Equal
        };
        if out
            .windows(2)
            .any(|w| w[0].0.cmp(&w[1].0).then_with(|| self.cmp_nodes(w[0].1, w[1].1)) > limit)
        {
            return Err(EvalTreeError::Malformed("not in canonical form".into()));
        }
        self.insert(Node::Inner(out.into()))
    }

    /// Bit length of the leaf encoding starting at the reader, found by
    /// skipping over its fields.
    fn leaf_len(&self, mut r: BitReader) -> Option<usize> {
        let start = r.position();
        let k = r.uint(self.wv).ok()? as usize;
        if k > self.q_v {
            return None;
        }
        r.uint(self.wv * self.q_v as u32).ok()?;
        for _ in 0..k {
            if r.bit().ok()? {
                r.uint(self.s).ok()?;
            }
            r.uint(self.q_s as u32).ok()?;
            if r.bit().ok()? {
                r.uint(2).ok()?;
            }
        }
        r.uint((k * k.saturating_sub(1)) as u32).ok()?;
        Some(r.position() - start)
    }

    fn parse_leaf(&mut self, r: &mut BitReader) -> Result<NodeId> {
        let len = match self.leaf_len(r.clone()) {
            Some(len) if len < 128 => len,
            _ => {
                let c = self.parse_config(r)?;
                return self.intern_leaf(c);
            }
        };
        let before = r.clone();
        let hi = len.saturating_sub(64) as u32;
        let code = (1u128 << len) | (r.uint(hi)? as u128) << (len as u32 - hi) | r.uint(len as u32 - hi)? as u128;
        if let Some(&id) = self.leaf_codes.get(&code) {
            return Ok(id);
        }
        *r = before;
        let c = self.parse_config(r)?;
        let id = self.intern_leaf(c)?;
        self.leaf_codes.insert(code, id);
        Ok(id)
    }

    fn parse_config(&mut self, r: &mut BitReader) -> Result<Config> {
        let bad = |m: &str| EvalTreeError::Malformed(m.into());
        let k = r.uint(self.wv)? as usize;
        if k > self.q_v {
            return Err(bad("too many vertices"));
        }
        let mut assign = Vec::with_capacity(self.q_v);
        for _ in 0..self.q_v {
            let a = r.uint(self.wv)? as usize;
            assign.push(match a {
                a if a < k => Some(a as u8),
                a if a == self.q_v => None,
                _ => return Err(bad("assignment out of range")),
            });
        }
        let mut marks = Vec::with_capacity(k);
        let mut sets = Vec::with_capacity(k);
        let mut labels = Vec::with_capacity(k);
        for _ in 0..k {
            let m = if r.bit()? {
                let m = r.uint(self.s)? as VertexId + 1;
                if marks.contains(&Some(m)) {
                    return Err(bad("repeated mark"));
                }
                Some(m)
            } else {
                None
            };
            marks.push(m);
            sets.push(r.uint(self.q_s as u32)? as u8);
            let l = if r.bit()? {
                Some(r.uint(2)? as u8)
            } else {
                None
            };
            if l.is_none() && m.is_none() {
                return Err(bad("unknown label on an unmarked vertex"));
            }
            labels.push(l);
        }
        let mut edges = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for j in 0..k {
            for i in 0..j {
                let e = EdgeState::from_code(r.uint(2)?).ok_or_else(|| bad("bad edge state"))?;
                if e == EdgeState::Unknown && (marks[i].is_none() || marks[j].is_none()) {
                    return Err(bad("unknown relation with an unmarked vertex"));
                }
                edges.push(e);
            }
        }
        let c = Config {
            assign,
            marks,
            sets,
            labels,
            edges,
        };
        if c.clone().normalize() != c {
            return Err(bad("not in canonical form"));
        }
        Ok(c)
    }

    fn reachable(&self, id: NodeId) -> Vec<NodeId> {
        let mut seen = HashSet::default();
        seen.insert(id);
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            for &(_, c) in self.children(x) {
                if seen.insert(c) {
                    stack.push(c);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Every vertex id used as a mark anywhere in the tree.
    pub fn marks(&self, id: NodeId) -> BTreeSet<VertexId> {
        let mut out = BTreeSet::new();
        for x in self.reachable(id) {
            match &self.nodes[x as usize] {
                Node::Leaf(c) => out.extend(c.marks.iter().flatten()),
                Node::Inner(ch) => out.extend(ch.iter().filter_map(|c| match c.0 {
                    Annot::Mark(m) => Some(m),
                    _ => None,
                })),
            }
        }
        out
    }

    /// Number of pairwise non-isomorphic leaf configurations.
    pub fn leaf_count(&self, id: NodeId) -> usize {
        self.reachable(id)
            .into_iter()
            .filter(|&x| self.config(x).is_some())
            .count()
    }

    /// Nodes of the tree as written out, shared subtrees counted repeatedly.
    pub fn node_count(&self, id: NodeId) -> u64 {
        fn go(e: &Engine, id: NodeId, memo: &mut HashMap<NodeId, u64>) -> u64 {
            if let Some(&c) = memo.get(&id) {
                return c;
            }
            let c = e
                .children(id)
                .iter()
                .fold(1u64, |acc, &(_, c)| acc.saturating_add(go(e, c, memo)));
            memo.insert(id, c);
            c
        }
        go(self, id, &mut HashMap::default())
    }

    /// Indented text rendering, one node per line.
    pub fn dump(&self, id: NodeId) -> String {
        let mut out = String::new();
        self.dump_rec(id, 0, "root".into(), &mut out);
        out
    }

    fn dump_rec(&self, id: NodeId, level: usize, edge: String, out: &mut String) {
        let pad = "  ".repeat(level);
        match &self.nodes[id as usize] {
            Node::Leaf(c) => {
                let _ = writeln!(out, "{pad}{edge}: {}", self.show_config(c));
            }
            Node::Inner(ch) => {
                let q = if self.prefix[level] == Quant::Exists {
                    "exists"
                } else {
                    "forall"
                };
                let _ = writeln!(out, "{pad}{edge}: {q} {}", self.names[level]);
                for &(a, c) in ch.iter() {
                    let e = match a {
                        Annot::Ext => "ext".to_string(),
                        Annot::Mark(m) => format!("mark {m}"),
                        Annot::Fresh => "fresh".to_string(),
                        Annot::Set => "set".to_string(),
                    };
                    self.dump_rec(c, level + 1, e, out);
                }
            }
        }
    }

    fn show_config(&self, c: &Config) -> String {
        let mut s = String::from("vars [");
        for (i, a) in c.assign.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            match a {
                Some(x) => s.push_str(&x.to_string()),
                None => s.push_str("ext"),
            }
        }
        s.push_str("] vertices [");
        for i in 0..c.k() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{i}");
            if let Some(m) = c.marks[i] {
                let _ = write!(s, "@{m}");
            }
            if self.q_s > 0 {
                let _ = write!(s, "/{:0w$b}", c.sets[i], w = self.q_s);
            }
            match c.labels[i] {
                Some(l) if l != 0 => {
                    let _ = write!(s, ":{l}");
                }
                None => s.push_str(":?"),
                _ => {}
            }
        }
        s.push_str("] edges [");
        let mut first = true;
        for j in 0..c.k() {
            for i in 0..j {
                let e = c.edge(i, j);
                if e != EdgeState::Non {
                    if !first {
                        s.push(' ');
                    }
                    first = false;
                    let sym = if e == EdgeState::Edge { "-" } else { "?" };
                    let _ = write!(s, "{i}{sym}{j}");
                }
            }
        }
        s.push(']');
        s
    }
}

/// The evaluation tree of every vertex, computed bottom-up.
pub struct EvalForest {
    pub engine: Engine,
    /// Indexed by vertex id minus one.
    pub trees: Vec<NodeId>,
    pub root: VertexId,
}

impl EvalForest {
    pub fn tree(&self, v: VertexId) -> NodeId {
        self.trees[v as usize - 1]
    }

    pub fn bytes(&self, v: VertexId) -> Vec<u8> {
        self.engine.serialize(self.tree(v))
    }

    pub fn evaluate(&mut self) -> Result<bool> {
        let r = self.tree(self.root);
        self.engine.evaluate_root(r)
    }
}

/// Adjacency bits between `v` and each vertex of its boundary.
pub fn boundary_adjacency(lg: &LabeledGraph, t: &EliminationTree, v: VertexId) -> Vec<bool> {
    t.boundary(v)
        .iter()
        .map(|&b| lg.graph.has_edge(v, b))
        .collect()
}

/// Builds `Q_v` for every vertex: children are folded in id order, then the
/// auxiliary tree is multiplied in.
pub fn compute_all(lg: &LabeledGraph, t: &EliminationTree, f: &Formula) -> Result<EvalForest> {
    compute_all_with(lg, t, f, DEFAULT_MAX_NODES)
}

pub fn compute_all_with(
    lg: &LabeledGraph,
    t: &EliminationTree,
    f: &Formula,
    max_nodes: usize,
) -> Result<EvalForest> {
    let n = lg.graph.n();
    let mut engine = Engine::new(f, id_width(n))?.with_max_nodes(max_nodes);
    let mut trees = vec![0; n];
    for v in t.post_order() {
        let children: Vec<NodeId> = t.children(v).iter().map(|&c| trees[c as usize - 1]).collect();
        let adj = boundary_adjacency(lg, t, v);
        let label = lg.labels[v as usize - 1];
        trees[v as usize - 1] = engine.fold(v, t.boundary(v), &adj, label, &children)?;
    }
    Ok(EvalForest {
        engine,
        trees,
        root: t.root(),
    })
}

/// `Q_v` rebuilt from nothing but the children's serialized trees (in id
/// order), the boundary of `v`, its adjacency to it and its label.
pub fn recompute_local(
    f: &Formula,
    s: u32,
    v: VertexId,
    boundary: &[VertexId],
    adj: &[bool],
    label: u8,
    children: &[&[u8]],
) -> Result<Vec<u8>> {
    let mut e = Engine::new(f, s)?;
    let mut ids = Vec::with_capacity(children.len());
    for c in children {
        ids.push(e.deserialize(c)?);
    }
    let r = e.fold(v, boundary, adj, label, &ids)?;
    Ok(e.serialize(r))
}

/// Upper bound on pairwise non-isomorphic leaf configurations:
/// `3^C(q_v,2) * (q_v+1)^q_v * (2^q_v)^q_S * (q_v+omega)` falling `omega-1`.
pub fn leaf_bound(q_v: usize, q_s: usize, omega: usize) -> u128 {
    let mut b: u128 = 3u128.saturating_pow((q_v * q_v.saturating_sub(1) / 2) as u32);
    b = b.saturating_mul((q_v as u128 + 1).saturating_pow(q_v as u32));
    b = b.saturating_mul(2u128.saturating_pow((q_v * q_s) as u32));
    for i in 0..omega.saturating_sub(1) {
        b = b.saturating_mul((q_v + omega - i) as u128);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::elimination::{best_elimination_tree, tree_from_ordering, SearchMode};
    use crate::graph::Graph;
    use crate::mso::{eval_bruteforce, parse_formula, Budget};

    fn formula(text: &str) -> Formula {
        parse_formula(text, Logic::Mso1).unwrap()
    }

    fn root_truth(g: &Graph, f: &Formula) -> bool {
        let t = best_elimination_tree(g, SearchMode::Exact, g.n()).unwrap();
        let lg = LabeledGraph::unlabeled(g.clone());
        compute_all(&lg, &t, f).unwrap().evaluate().unwrap()
    }

    const EDGE: &str = "exists x. exists y. adj(x,y)";
    const TWO_COL: &str = "exists X. forall x. forall y. adj(x,y) -> !(X(x) <-> X(y))";

    #[test]
    fn single_vertex() {
        let e = Engine::new(&formula("exists x. x = x"), 0);
        let mut e = e.unwrap();
        let id = e.fold(1, &[], &[], 0, &[]).unwrap();
        assert_eq!(e.children(id).len(), 2);
        assert!(e.evaluate_root(id).unwrap());
        assert!(root_truth(&corpus::path(1), &formula("forall x. x = x")));
    }

    #[test]
    fn small_examples() {
        assert!(root_truth(&corpus::path(2), &formula(EDGE)));
        assert!(root_truth(&corpus::path(3), &formula(EDGE)));
        assert!(!root_truth(&corpus::cycle(5), &formula(TWO_COL)));
        assert!(root_truth(&corpus::cycle(4), &formula(TWO_COL)));
        let clique = formula("forall x. forall y. x = y | adj(x,y)");
        assert!(root_truth(&corpus::path(2), &clique));
        assert!(!root_truth(&corpus::path(3), &clique));
    }

    #[test]
    fn leaf_of_k2_marks_the_root() {
        let f = formula(EDGE);
        let mut e = Engine::new(&f, 1).unwrap();
        let id = e.fold(1, &[2], &[true], 0, &[]).unwrap();
        let leaves: Vec<Config> = e
            .reachable(id)
            .into_iter()
            .filter_map(|x| e.config(x).cloned())
            .collect();
        let want = Config {
            assign: vec![Some(0), Some(1)],
            marks: vec![None, Some(2)],
            sets: vec![0, 0],
            labels: vec![Some(0), None],
            edges: vec![EdgeState::Edge],
        };
        assert!(leaves.contains(&want));
    }

    #[test]
    fn marks_identified_in_product() {
        let f = formula("exists x. x = x");
        let mut e = Engine::new(&f, 2).unwrap();
        let a = e.fold(1, &[3], &[true], 0, &[]).unwrap();
        let b = e.fold(2, &[3], &[true], 0, &[]).unwrap();
        let p = e.product(a, b).unwrap().unwrap();
        let marked: Vec<Config> = e
            .reachable(p)
            .into_iter()
            .filter_map(|x| e.config(x).cloned())
            .filter(|c| c.marks.contains(&Some(3)))
            .collect();
        assert_eq!(marked.len(), 1);
        assert_eq!(marked[0].k(), 1);
    }

    #[test]
    fn serialization_round_trip() {
        let f = formula(TWO_COL);
        let g = corpus::cycle(5);
        let t = best_elimination_tree(&g, SearchMode::Exact, 5).unwrap();
        let forest = compute_all(&LabeledGraph::unlabeled(g), &t, &f).unwrap();
        for v in 1..=5 {
            let bytes = forest.bytes(v);
            let mut e = Engine::new(&f, 3).unwrap();
            let id = e.deserialize(&bytes).unwrap();
            assert_eq!(e.serialize(id), bytes);
            let mut bad = bytes.clone();
            bad.push(0);
            assert!(e.deserialize(&bad).is_err());
        }
    }

    #[test]
    fn child_order_does_not_matter_for_bytes() {
        let f = formula(TWO_COL);
        let mut e = Engine::new(&f, 2).unwrap();
        let a = e.fold(1, &[3], &[true], 0, &[]).unwrap();
        let b = e.fold(2, &[3], &[true], 0, &[]).unwrap();
        let ab = e.product(a, b).unwrap().unwrap();
        let ba = e.product(b, a).unwrap().unwrap();
        assert_eq!(e.serialize(ab), e.serialize(ba));
    }

    #[test]
    fn matches_reference_trees() {
        let texts = [EDGE, TWO_COL, "forall x. exists y. adj(x,y) & !(exists Z. Z(x) & !Z(y))"];
        for g in corpus::connected_graphs_upto(4) {
            let n = g.n();
            let lg = LabeledGraph::unlabeled(g.clone());
            let t = tree_from_ordering(&g, &(1..=n as u32).collect::<Vec<_>>()).unwrap();
            for text in texts {
                let f = formula(text);
                let mut forest = compute_all(&lg, &t, &f).unwrap();
                for v in 1..=n as u32 {
                    let r = forest.engine.reference_tree(&lg, &t, v).unwrap();
                    assert_eq!(forest.engine.serialize(r), forest.bytes(v), "{text} at {v}");
                }
                let s = f.to_sentence();
                let want = eval_bruteforce(&g, &s, Budget::default()).unwrap();
                assert_eq!(forest.evaluate().unwrap(), want);
            }
        }
    }

    #[test]
    fn reduction_does_not_change_truth() {
        let f = formula(TWO_COL);
        for g in corpus::connected_graphs_upto(4) {
            let t = tree_from_ordering(&g, &(1..=g.n() as u32).collect::<Vec<_>>()).unwrap();
            let lg = LabeledGraph::unlabeled(g.clone());
            let mut plain = Engine::new(&f, id_width(g.n())).unwrap().without_reduction();
            let r = plain.reference_tree(&lg, &t, t.root()).unwrap();
            let mut forest = compute_all(&lg, &t, &f).unwrap();
            assert_eq!(plain.evaluate_root(r).unwrap(), forest.evaluate().unwrap());
        }
    }

    #[test]
    fn rejects_incidence_atoms() {
        let f = parse_formula("exists e. edg(e)", Logic::Mso2).unwrap();
        assert!(Engine::new(&f, 1).is_err());
    }

    #[test]
    fn bound_formula() {
        assert_eq!(leaf_bound(2, 0, 1), 3 * 9);
        assert_eq!(leaf_bound(2, 1, 2), 3 * 9 * 4 * 4);
    }
}
