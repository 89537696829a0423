//! Prover and one-round verifier for locally verifiable treewidth.
//!
//! The verifier at `v` sees only its own id, its neighbors' ids and the
//! labels of its closed neighborhood.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::elimination::EliminationTree;
use crate::graph::{Graph, VertexId};
use crate::label::{
    decode_label, encode_label, id_width, BitString, ChannelBlock, LabelError, LabelView, Tuple,
};
use crate::pathsys::OrientedPathSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    Yes,
    No,
}

/// Why a vertex rejected.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Reason {
    #[error("own label illegal: {0}")]
    OwnLabel(LabelError),
    #[error("label of neighbor {0} illegal")]
    NeighborLabel(VertexId),
    #[error("neighbor {0} uses a different field width")]
    WidthMismatch(VertexId),
    #[error("identifier does not fit the field width")]
    IdRange,
    #[error("empty label on a vertex with neighbors")]
    EmptyLabel,
    #[error("ancestor list malformed")]
    Ancestors,
    #[error("(a) no unique parent")]
    Parent,
    #[error("(b) child {0} inconsistent")]
    Child(VertexId),
    #[error("(c) neighbor {0} missing from ancestors")]
    Neighbor(VertexId),
    #[error("(d) depths not distinct")]
    Distinct,
    #[error("channel ({0},{1}) broken at its start")]
    ChannelStart(VertexId, VertexId),
    #[error("channel ({0},{1}) broken in transit")]
    ChannelRelay(VertexId, VertexId),
    #[error("channel from {0} arrives inconsistently")]
    ChannelArrival(VertexId),
    #[error("evaluation tree missing")]
    MissingTree,
    #[error("evaluation tree malformed: {0}")]
    BadTree(String),
    #[error("child {0} uses marks outside the ancestor set")]
    ChildMarks(VertexId),
    #[error("recomputed evaluation tree differs from the certificate")]
    TreeMismatch,
    #[error("root evaluation tree evaluates to false")]
    RootFalse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub decision: Decision,
    pub reason: Option<Reason>,
}

impl Verdict {
    pub fn yes() -> Self {
        Verdict {
            decision: Decision::Yes,
            reason: None,
        }
    }

    pub fn no(reason: Reason) -> Self {
        Verdict {
            decision: Decision::No,
            reason: Some(reason),
        }
    }

    pub fn is_yes(&self) -> bool {
        self.decision == Decision::Yes
    }
}

impl From<Result<(), Reason>> for Verdict {
    fn from(r: Result<(), Reason>) -> Self {
        match r {
            Ok(()) => Verdict::yes(),
            Err(reason) => Verdict::no(reason),
        }
    }
}

/// What a vertex sees in one round: its id and the labels of its closed
/// neighborhood.
#[derive(Clone, Debug)]
pub struct LocalInstance<'a> {
    pub self_id: VertexId,
    /// `(id, label)` for the vertex itself and each neighbor.
    pub neighborhood: Vec<(VertexId, &'a BitString)>,
    /// The vertex's own input label bits (`lv` = 1, `le` = 2), zero for
    /// unlabeled graphs.
    pub input: u8,
}

impl<'a> LocalInstance<'a> {
    pub fn new(g: &Graph, labels: &'a [BitString], v: VertexId) -> Self {
        let mut neighborhood = vec![(v, &labels[v as usize - 1])];
        for &w in g.neighbors(v) {
            neighborhood.push((w, &labels[w as usize - 1]));
        }
        LocalInstance {
            self_id: v,
            neighborhood,
            input: 0,
        }
    }

    pub fn with_input(mut self, input: u8) -> Self {
        self.input = input;
        self
    }

    pub fn own_label(&self) -> Option<&'a BitString> {
        self.neighborhood
            .iter()
            .find(|(id, _)| *id == self.self_id)
            .map(|&(_, l)| l)
    }

    pub fn neighbors(&self) -> impl Iterator<Item = &(VertexId, &'a BitString)> {
        self.neighborhood.iter().filter(move |(id, _)| *id != self.self_id)
    }
}

/// A tree child of the verifying vertex, seen directly or through a channel.
#[derive(Clone, Debug)]
pub struct ChildInfo {
    pub id: VertexId,
    pub tuple: Tuple,
    /// The child's evaluation-tree payload, if it has one.
    pub evaltree: Option<Vec<u8>>,
}

/// Everything the treewidth checks established at one vertex.
#[derive(Clone, Debug)]
pub struct TwContext {
    pub own: LabelView,
    pub own_tuple: Tuple,
    pub neighbors: BTreeMap<VertexId, LabelView>,
    /// Sorted by id.
    pub children: Vec<ChildInfo>,
}

impl TwContext {
    pub fn is_root(&self) -> bool {
        self.own.depth == 0
    }
}

/// Outcome of the treewidth checks: the single-vertex graph has no labels.
#[derive(Clone, Debug)]
pub enum TwOutcome {
    Isolated,
    Checked(Box<TwContext>),
}

fn tuple_of(t: &EliminationTree, v: VertexId) -> Tuple {
    Tuple {
        id: v,
        depth: t.depth(v),
        anc: t.boundary(v).iter().map(|&x| (x, t.depth(x))).collect(),
    }
}

/// Decoded labels of the honest prover, before encoding. Empty for `n = 1`.
pub fn prove_views(g: &Graph, t: &EliminationTree, p: &OrientedPathSystem) -> Vec<LabelView> {
    let n = g.n();
    if n == 1 {
        return Vec::new();
    }
    let s = id_width(n);
    let mut views: Vec<LabelView> = g
        .vertices()
        .map(|v| {
            let tu = tuple_of(t, v);
            LabelView {
                s,
                depth: tu.depth,
                anc: tu.anc,
                channels: Vec::new(),
                evaltree: None,
            }
        })
        .collect();
    for path in &p.paths {
        let seq = &path.vertices;
        for i in 0..seq.len() - 1 {
            views[seq[i] as usize - 1].channels.push(ChannelBlock {
                child: path.source,
                parent: path.dest,
                pred: (i > 0).then(|| seq[i - 1]),
                succ: seq[i + 1],
                cargo_child: tuple_of(t, path.source),
                cargo_parent: tuple_of(t, path.dest),
                mc_cargo: None,
            });
        }
    }
    for v in &mut views {
        v.channels.sort_by_key(|c| (c.child, c.parent));
    }
    views
}

/// Honest labeling for the given elimination tree and path system.
pub fn prove_tw(g: &Graph, t: &EliminationTree, p: &OrientedPathSystem) -> Vec<BitString> {
    if g.n() == 1 {
        return vec![BitString::new()];
    }
    prove_views(g, t, p)
        .iter()
        .map(|v| encode_label(v).expect("honest fields fit"))
        .collect()
}

/// Runs every treewidth check at one vertex.
pub fn verify_tw(inst: &LocalInstance, omega: usize) -> Verdict {
    check_tw(inst, omega).map(|_| ()).into()
}

fn same_cargo(a: &ChannelBlock, b: &ChannelBlock) -> bool {
    a.cargo_child == b.cargo_child && a.cargo_parent == b.cargo_parent && a.mc_cargo == b.mc_cargo
}

fn find_block(view: &LabelView, child: VertexId, parent: VertexId) -> Option<&ChannelBlock> {
    view.channels
        .iter()
        .find(|c| c.child == child && c.parent == parent)
}

/// The treewidth checks; on success returns the decoded neighborhood and the
/// list of tree children for the model-checking layer.
pub fn check_tw(inst: &LocalInstance, omega: usize) -> Result<TwOutcome, Reason> {
    let v = inst.self_id;
    let own_bits = inst.own_label().ok_or(Reason::OwnLabel(LabelError::NoPrefix))?;
    if own_bits.is_empty() {
        return if inst.neighbors().next().is_none() {
            Ok(TwOutcome::Isolated)
        } else {
            Err(Reason::EmptyLabel)
        };
    }
    let own = decode_label(own_bits, omega).map_err(Reason::OwnLabel)?;
    let s = own.s;
    let fits = |id: VertexId| id >= 1 && (id as u64 - 1) >> s == 0;
    if !fits(v) {
        return Err(Reason::IdRange);
    }
    let mut neighbors = BTreeMap::new();
    for (w, bits) in inst.neighbors() {
        let view = decode_label(bits, omega).map_err(|_| Reason::NeighborLabel(*w))?;
        if view.s != s {
            return Err(Reason::WidthMismatch(*w));
        }
        if !fits(*w) || neighbors.insert(*w, view).is_some() {
            return Err(Reason::IdRange);
        }
    }
    let d = own.depth;
    let own_tuple = Tuple {
        id: v,
        depth: d,
        anc: own.anc.clone(),
    };

    // (d), plus canonical order: ancestors strictly shallower, increasing depth
    let mut ids = BTreeSet::from([v]);
    for &(x, dx) in &own.anc {
        if !ids.insert(x) {
            return Err(Reason::Ancestors);
        }
        if dx >= d {
            return Err(Reason::Distinct);
        }
    }
    if own.anc.windows(2).any(|w| w[0].1 >= w[1].1) {
        return Err(Reason::Distinct);
    }
    let anc_depth: HashMap<VertexId, u32> = own.anc.iter().copied().collect();

    // (a)
    let started: Vec<&ChannelBlock> = own.channels.iter().filter(|c| c.child == v).collect();
    let direct_parents = neighbors
        .values()
        .filter(|w| d > 0 && w.depth == d - 1)
        .count();
    if d == 0 {
        if !own.anc.is_empty() || !started.is_empty() {
            return Err(Reason::Parent);
        }
    } else {
        if direct_parents + started.len() != 1 {
            return Err(Reason::Parent);
        }
        if let Some(ch) = started.first() {
            if ch.cargo_parent.depth != d - 1 {
                return Err(Reason::Parent);
            }
        }
    }

    // (c)
    for (&z, w) in &neighbors {
        if w.depth <= d && anc_depth.get(&z) != Some(&w.depth) {
            return Err(Reason::Neighbor(z));
        }
    }

    check_channels(v, &own, &own_tuple, &neighbors)?;

    // children: neighbors one level down, then channel arrivals
    let mut children: Vec<ChildInfo> = neighbors
        .iter()
        .filter(|(_, w)| w.depth == d + 1)
        .map(|(&u, w)| ChildInfo {
            id: u,
            tuple: Tuple {
                id: u,
                depth: w.depth,
                anc: w.anc.clone(),
            },
            evaltree: w.evaltree.clone(),
        })
        .collect();
    let mut arrivals: BTreeMap<VertexId, &ChannelBlock> = BTreeMap::new();
    for w in neighbors.values() {
        for ch in w.channels.iter().filter(|c| c.parent == v && c.succ == v) {
            if arrivals.insert(ch.child, ch).is_some() {
                return Err(Reason::ChannelArrival(ch.child));
            }
        }
    }
    for (&u, ch) in &arrivals {
        if u == v
            || children.iter().any(|c| c.id == u)
            || ch.cargo_child.id != u
            || ch.cargo_parent != own_tuple
            || ch.cargo_child.depth != d + 1
        {
            return Err(Reason::ChannelArrival(u));
        }
        children.push(ChildInfo {
            id: u,
            tuple: ch.cargo_child.clone(),
            evaltree: ch.mc_cargo.clone(),
        });
    }
    children.sort_by_key(|c| c.id);

    // (b)
    for c in &children {
        for &(x, dx) in &c.tuple.anc {
            let ok = if x == v {
                dx == d
            } else {
                anc_depth.get(&x) == Some(&dx)
            };
            if !ok {
                return Err(Reason::Child(c.id));
            }
        }
    }

    Ok(TwOutcome::Checked(Box::new(TwContext {
        own,
        own_tuple,
        neighbors,
        children,
    })))
}

fn check_channels(
    v: VertexId,
    own: &LabelView,
    own_tuple: &Tuple,
    neighbors: &BTreeMap<VertexId, LabelView>,
) -> Result<(), Reason> {
    let mut names = BTreeSet::new();
    for ch in &own.channels {
        let (u, p) = (ch.child, ch.parent);
        let relay = Reason::ChannelRelay(u, p);
        if !names.insert((u, p)) || p == v || ch.cargo_child.id != u || ch.cargo_parent.id != p {
            return Err(relay);
        }
        if ch.succ == v || !neighbors.contains_key(&ch.succ) {
            return Err(relay);
        }
        match ch.pred {
            None => {
                if u != v || ch.cargo_child != *own_tuple || ch.mc_cargo != own.evaltree {
                    return Err(Reason::ChannelStart(u, p));
                }
            }
            Some(pr) => {
                if u == v {
                    return Err(relay);
                }
                let prev = neighbors
                    .get(&pr)
                    .and_then(|w| find_block(w, u, p))
                    .ok_or_else(|| relay.clone())?;
                if prev.succ != v || !same_cargo(prev, ch) {
                    return Err(relay);
                }
            }
        }
        if ch.succ != p {
            let next = find_block(&neighbors[&ch.succ], u, p).ok_or_else(|| relay.clone())?;
            if next.pred != Some(v) || !same_cargo(next, ch) {
                return Err(relay);
            }
        }
        // no other neighbor may carry this channel
        for (&w, view) in neighbors {
            let expected = Some(w) == ch.pred || (w == ch.succ && w != p);
            if find_block(view, u, p).is_some() != expected {
                return Err(relay);
            }
        }
    }
    Ok(())
}
