//! One-round LOCAL simulation, the end-to-end pipeline, metrics and the
//! soundness fuzzer.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus;
use crate::elimination::{
    best_elimination_tree, tree_from_ordering, treewidth_bruteforce, EliminationError,
    EliminationTree, SearchMode, BRUTE_FORCE_LIMIT, EXACT_LIMIT,
};
use crate::evaltree::{compute_all, leaf_bound, EvalForest};
use crate::graph::{Graph, VertexId};
use crate::label::{encode_label, id_width, BitString, ChannelBlock, LabelView, Tuple};
use crate::mso::{eval_formula, Budget, Formula, LabeledGraph};
use crate::pathsys::{build_path_system, congestion, shortest_path, OrientedPathSystem};
use crate::pls_mso::{prove_mso_from, prove_mso_views, verify_mso, ProveError};
use crate::pls_tw::{prove_tw, verify_tw, LocalInstance, Verdict};

/// What every vertex runs.
#[derive(Clone, Debug)]
pub struct VerifierConfig {
    pub omega: usize,
    /// `None` runs the treewidth scheme alone.
    pub formula: Option<Formula>,
}

pub fn verify_vertex(
    lg: &LabeledGraph,
    labels: &[BitString],
    v: VertexId,
    cfg: &VerifierConfig,
) -> Verdict {
    let inst = LocalInstance::new(&lg.graph, labels, v).with_input(lg.labels[v as usize - 1]);
    match &cfg.formula {
        Some(f) => verify_mso(&inst, cfg.omega, f),
        None => verify_tw(&inst, cfg.omega),
    }
}

/// Runs the verifier once at every vertex of an unlabeled graph.
pub fn run_round(g: &Graph, labels: &[BitString], cfg: &VerifierConfig) -> Vec<Verdict> {
    run_round_labeled(&LabeledGraph::unlabeled(g.clone()), labels, cfg)
}

/// Runs the verifier once at every vertex; entry `v - 1` is the verdict of `v`.
pub fn run_round_labeled(
    lg: &LabeledGraph,
    labels: &[BitString],
    cfg: &VerifierConfig,
) -> Vec<Verdict> {
    assert_eq!(labels.len(), lg.graph.n(), "one label per vertex");
    (1..=lg.graph.n() as VertexId)
        .into_par_iter()
        .map(|v| verify_vertex(lg, labels, v, cfg))
        .collect()
}

pub fn all_yes(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(Verdict::is_yes)
}

/// Same global outcome as [`run_round_labeled`], but visits `first` before
/// the rest and stops at the first NO.
pub fn accepts(
    lg: &LabeledGraph,
    labels: &[BitString],
    cfg: &VerifierConfig,
    first: &[VertexId],
) -> bool {
    let mut order: Vec<VertexId> = Vec::with_capacity(lg.graph.n());
    let mut seen = vec![false; lg.graph.n() + 1];
    for &v in first.iter().chain(&(1..=lg.graph.n() as VertexId).collect::<Vec<_>>()) {
        if !seen[v as usize] {
            seen[v as usize] = true;
            order.push(v);
        }
    }
    order
        .into_iter()
        .all(|v| verify_vertex(lg, labels, v, cfg).is_yes())
}

/// How the prover picks its elimination tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeChoice {
    /// Exact search up to the size limit, min-fill beyond.
    Auto,
    Exact,
    Heuristic,
    Ordering(Vec<VertexId>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error(transparent)]
    Elimination(#[from] EliminationError),
    #[error("path system congestion {congestion} exceeds {omega}")]
    Congestion { congestion: usize, omega: usize },
    #[error(transparent)]
    Prove(#[from] ProveError),
}

pub fn elimination_tree(
    g: &Graph,
    choice: &TreeChoice,
    omega: usize,
) -> Result<EliminationTree, EliminationError> {
    match choice {
        TreeChoice::Auto if g.n() <= EXACT_LIMIT => best_elimination_tree(g, SearchMode::Exact, omega),
        TreeChoice::Auto | TreeChoice::Heuristic => {
            best_elimination_tree(g, SearchMode::Heuristic, omega)
        }
        TreeChoice::Exact => best_elimination_tree(g, SearchMode::Exact, omega),
        TreeChoice::Ordering(o) => {
            let t = tree_from_ordering(g, o)?;
            if t.width() > omega {
                return Err(EliminationError::WidthExceeded {
                    width: t.width(),
                    bound: omega,
                });
            }
            Ok(t)
        }
    }
}

/// Output of the honest prover.
pub struct Certificate {
    pub tree: EliminationTree,
    pub paths: OrientedPathSystem,
    pub labels: Vec<BitString>,
    pub forest: Option<EvalForest>,
}

/// Builds tree, paths and labels; with a formula, also the evaluation trees.
pub fn certify(
    lg: &LabeledGraph,
    omega: usize,
    f: Option<&Formula>,
    choice: &TreeChoice,
) -> Result<Certificate, PipelineError> {
    let g = &lg.graph;
    let tree = elimination_tree(g, choice, omega)?;
    let paths = build_path_system(g, &tree);
    let c = congestion(&paths);
    if c > omega {
        return Err(PipelineError::Congestion {
            congestion: c,
            omega,
        });
    }
    let (labels, forest) = match f {
        Some(f) => {
            let mut forest = compute_all(lg, &tree, f).map_err(ProveError::from)?;
            let labels = prove_mso_from(lg, &tree, &paths, &mut forest)?;
            (labels, Some(forest))
        }
        None => (prove_tw(g, &tree, &paths), None),
    };
    Ok(Certificate {
        tree,
        paths,
        labels,
        forest,
    })
}

/// Metrics of one honest run.
#[derive(Clone, Debug, Serialize)]
pub struct Stats {
    pub n: usize,
    pub m: usize,
    pub omega: usize,
    pub width: usize,
    pub congestion: usize,
    pub channels: usize,
    pub id_bits: u32,
    pub max_label_bits: usize,
    pub mean_label_bits: f64,
    /// `max_label_bits / ceil(log2 n)`; zero when `n = 1`.
    pub bits_per_id_bit: f64,
    pub max_tree_nodes: u64,
    pub mean_tree_nodes: f64,
    pub max_tree_bytes: usize,
    pub max_leaf_configs: usize,
    pub leaf_bound: String,
    pub prove_ms: f64,
    pub verify_ms: f64,
    pub accepted: bool,
}

pub fn stats(
    lg: &LabeledGraph,
    omega: usize,
    f: Option<&Formula>,
    choice: &TreeChoice,
) -> Result<Stats, PipelineError> {
    let n = lg.graph.n();
    let start = Instant::now();
    let cert = certify(lg, omega, f, choice)?;
    let prove_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let cfg = VerifierConfig {
        omega,
        formula: f.cloned(),
    };
    let accepted = all_yes(&run_round_labeled(lg, &cert.labels, &cfg));
    let verify_ms = start.elapsed().as_secs_f64() * 1e3;
    let bits: Vec<usize> = cert.labels.iter().map(BitString::len).collect();
    let max_label_bits = bits.iter().copied().max().unwrap_or(0);
    let id_bits = id_width(n);
    let (mut max_nodes, mut sum_nodes, mut max_bytes, mut max_leaves) = (0u64, 0u64, 0, 0);
    if let Some(forest) = &cert.forest {
        for v in lg.graph.vertices() {
            let q = forest.tree(v);
            let nodes = forest.engine.node_count(q);
            max_nodes = max_nodes.max(nodes);
            sum_nodes = sum_nodes.saturating_add(nodes);
            max_bytes = max_bytes.max(forest.engine.serialize(q).len());
            max_leaves = max_leaves.max(forest.engine.leaf_count(q));
        }
    }
    Ok(Stats {
        n,
        m: lg.graph.m(),
        omega,
        width: cert.tree.width(),
        congestion: congestion(&cert.paths),
        channels: cert.paths.paths.len(),
        id_bits,
        max_label_bits,
        mean_label_bits: bits.iter().sum::<usize>() as f64 / n as f64,
        bits_per_id_bit: if id_bits == 0 {
            0.0
        } else {
            max_label_bits as f64 / id_bits as f64
        },
        max_tree_nodes: max_nodes,
        mean_tree_nodes: sum_nodes as f64 / n as f64,
        max_tree_bytes: max_bytes,
        max_leaf_configs: max_leaves,
        leaf_bound: f
            .map(|f| leaf_bound(f.q_v(), f.q_s(), omega).to_string())
            .unwrap_or_default(),
        prove_ms,
        verify_ms,
        accepted,
    })
}

/// The adversary's strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Attack {
    BitFlip,
    FieldSwap,
    Transplant,
    ChannelForgery,
    TreeTampering,
}

pub const ATTACKS: [Attack; 5] = [
    Attack::BitFlip,
    Attack::FieldSwap,
    Attack::Transplant,
    Attack::ChannelForgery,
    Attack::TreeTampering,
];

#[derive(Clone, Debug, Serialize)]
pub struct AttackTally {
    pub attack: Attack,
    pub trials: usize,
    pub accepted: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct FuzzReport {
    pub n: usize,
    pub omega: usize,
    pub seed: u64,
    pub trials: usize,
    pub accepted: usize,
    pub formula_false: bool,
    pub width_exceeded: bool,
    /// Whether a satisfying graph of the same size was found for transplants.
    pub donor: bool,
    pub per_attack: Vec<AttackTally>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FuzzError {
    #[error("the graph satisfies the formula within the width bound; nothing to attack")]
    Precondition,
    #[error("cannot confirm the instance is negative: {0}")]
    Unconfirmed(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// A labeling in decoded form together with the graph it was made for.
struct Base {
    views: Vec<LabelView>,
    labels: Vec<BitString>,
}

fn encode_views(views: &[LabelView]) -> Option<Vec<BitString>> {
    views.iter().map(|v| encode_label(v).ok()).collect()
}

/// Honest-looking labels for `lg` under tree `t`, whatever the formula says.
fn structural_base(lg: &LabeledGraph, t: &EliminationTree, f: &Formula) -> Option<Base> {
    let p = build_path_system(&lg.graph, t);
    let forest = compute_all(lg, t, f).ok()?;
    let views = prove_mso_views(lg, t, &p, &forest);
    let labels = encode_views(&views)?;
    Some(Base { views, labels })
}

/// A graph on the same vertex count and input labels that satisfies `f`
/// within the width bound, with its honest labels.
fn find_donor(lg: &LabeledGraph, omega: usize, f: &Formula) -> Option<Base> {
    let n = lg.graph.n();
    if n < 2 {
        return None;
    }
    let mut candidates = vec![corpus::path(n), corpus::star(n - 1)];
    if n >= 3 {
        candidates.push(corpus::cycle(n));
    }
    if n >= 4 {
        candidates.push(corpus::complete_bipartite(2, n - 2));
    }
    candidates.extend((0..12).map(|s| corpus::partial_2tree(n, s).0));
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    candidates.extend((0..12).map(|_| corpus::random_connected(n, 0.3, &mut rng)));
    if n <= 7 {
        candidates.push(corpus::complete(n));
    }
    for h in candidates {
        if h == lg.graph {
            continue;
        }
        let donor = LabeledGraph {
            graph: h,
            labels: lg.labels.clone(),
        };
        let truth = eval_formula(&donor, f, Budget { max_steps: 50_000_000 });
        if truth != Ok(true) {
            continue;
        }
        let Ok(cert) = certify(&donor, omega, Some(f), &TreeChoice::Auto) else {
            continue;
        };
        let forest = cert.forest.as_ref().expect("formula given");
        let views = prove_mso_views(&donor, &cert.tree, &cert.paths, forest);
        return Some(Base {
            views,
            labels: cert.labels,
        });
    }
    None
}

fn tuple_of(view: &LabelView, id: VertexId) -> Tuple {
    Tuple {
        id,
        depth: view.depth,
        anc: view.anc.clone(),
    }
}

struct Campaign<'a> {
    lg: &'a LabeledGraph,
    cfg: VerifierConfig,
    own: Base,
    donor: Option<Base>,
}

impl Campaign<'_> {
    fn n(&self) -> usize {
        self.lg.graph.n()
    }

    fn vertex(&self, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(0..self.n())
    }

    fn pick_base(&self, rng: &mut ChaCha8Rng) -> &Base {
        match &self.donor {
            Some(d) if rng.random_bool(0.25) => d,
            _ => &self.own,
        }
    }

    fn bit_flip(&self, rng: &mut ChaCha8Rng) -> Vec<BitString> {
        let mut labels = self.pick_base(rng).labels.clone();
        for _ in 0..rng.random_range(1..=3) {
            let v = self.vertex(rng);
            let len = labels[v].len();
            if len == 0 {
                labels[v].bits_mut().push(rng.random_bool(0.5));
            } else {
                labels[v].flip(rng.random_range(0..len));
            }
        }
        labels
    }

    fn field_swap(&self, rng: &mut ChaCha8Rng) -> Vec<BitString> {
        let base = self.pick_base(rng);
        let mut views = base.views.clone();
        let n = self.n();
        let a = self.vertex(rng);
        let b = (a + rng.random_range(1..n)) % n;
        match rng.random_range(0..6) {
            0 => {
                let d = views[a].depth;
                views[a].depth = views[b].depth;
                views[b].depth = d;
            }
            1 => {
                let x = views[a].anc.clone();
                views[a].anc = std::mem::replace(&mut views[b].anc, x);
            }
            2 => {
                let x = views[a].channels.clone();
                views[a].channels = std::mem::replace(&mut views[b].channels, x);
            }
            3 => {
                let x = views[a].evaltree.clone();
                views[a].evaltree = std::mem::replace(&mut views[b].evaltree, x);
            }
            4 => {
                let (da, aa) = (views[a].depth, views[a].anc.clone());
                views[a].depth = views[b].depth;
                views[a].anc = views[b].anc.clone();
                views[b].depth = da;
                views[b].anc = aa;
            }
            _ => views.swap(a, b),
        }
        encode_views(&views).unwrap_or_else(|| base.labels.clone())
    }

    fn transplant(&self, rng: &mut ChaCha8Rng) -> Vec<BitString> {
        let Some(donor) = &self.donor else {
            // no satisfying graph of this size: take another graph's labels
            let (h, order) = corpus::partial_2tree(self.n(), rng.random());
            let other = LabeledGraph {
                graph: h,
                labels: self.lg.labels.clone(),
            };
            let t = tree_from_ordering(&other.graph, &order).expect("valid ordering");
            let f = self.cfg.formula.as_ref().expect("formula set");
            return structural_base(&other, &t, f)
                .map(|b| b.labels)
                .unwrap_or_else(|| self.own.labels.clone());
        };
        let n = self.n();
        let mut perm: Vec<usize> = (0..n).collect();
        if rng.random_bool(0.5) {
            perm.shuffle(rng);
        }
        let partial = rng.random_bool(0.5);
        (0..n)
            .map(|v| {
                if partial && rng.random_bool(0.5) {
                    self.own.labels[v].clone()
                } else {
                    donor.labels[perm[v]].clone()
                }
            })
            .collect()
    }

    fn channel_forgery(&self, rng: &mut ChaCha8Rng) -> Vec<BitString> {
        let base = self.pick_base(rng);
        let mut views = base.views.clone();
        let g = &self.lg.graph;
        let n = self.n();
        let names: BTreeSet<(VertexId, VertexId)> = views
            .iter()
            .flat_map(|v| v.channels.iter().map(|c| (c.child, c.parent)))
            .collect();
        let names: Vec<_> = names.into_iter().collect();
        match rng.random_range(0..4) {
            0 if !names.is_empty() => {
                // rewrite the relayed tree consistently along the whole path
                let (u, p) = names[rng.random_range(0..names.len())];
                let src = self.vertex(rng);
                let cargo = views[src].evaltree.clone();
                for v in views.iter_mut() {
                    for c in v.channels.iter_mut().filter(|c| (c.child, c.parent) == (u, p)) {
                        c.mc_cargo = cargo.clone();
                    }
                }
                if rng.random_bool(0.5) {
                    views[u as usize - 1].evaltree = cargo;
                }
            }
            1 if !names.is_empty() => {
                let (u, p) = names[rng.random_range(0..names.len())];
                for v in views.iter_mut() {
                    v.channels.retain(|c| (c.child, c.parent) != (u, p));
                }
            }
            _ => {
                // a new channel from u to an arbitrary parent p
                let u = rng.random_range(1..=n as VertexId);
                let p = (u as usize % n + rng.random_range(0..n - 1)) as VertexId % n as VertexId + 1;
                if p == u {
                    return base.labels.clone();
                }
                if rng.random_bool(0.5) {
                    views[u as usize - 1].depth = views[p as usize - 1].depth + 1;
                }
                let path = shortest_path(g, u, p);
                let child = tuple_of(&views[u as usize - 1], u);
                let parent = tuple_of(&views[p as usize - 1], p);
                let cargo = views[u as usize - 1].evaltree.clone();
                for i in 0..path.len() - 1 {
                    let view = &mut views[path[i] as usize - 1];
                    view.channels.retain(|c| (c.child, c.parent) != (u, p));
                    view.channels.push(ChannelBlock {
                        child: u,
                        parent: p,
                        pred: (i > 0).then(|| path[i - 1]),
                        succ: path[i + 1],
                        cargo_child: child.clone(),
                        cargo_parent: parent.clone(),
                        mc_cargo: cargo.clone(),
                    });
                    view.channels.sort_by_key(|c| (c.child, c.parent));
                }
            }
        }
        encode_views(&views).unwrap_or_else(|| base.labels.clone())
    }

    fn tree_tampering(&self, rng: &mut ChaCha8Rng) -> Vec<BitString> {
        let base = self.pick_base(rng);
        let mut views = base.views.clone();
        let v = self.vertex(rng);
        let new_tree = match rng.random_range(0..4) {
            0 => views[v].evaltree.clone().map(|mut t| {
                let keep = rng.random_range(0..t.len().max(1));
                t.truncate(keep);
                t
            }),
            1 => views[self.vertex(rng)].evaltree.clone(),
            2 => match &self.donor {
                Some(d) => d.views[rng.random_range(0..d.views.len())].evaltree.clone(),
                None => None,
            },
            _ => views[v].evaltree.clone().map(|mut t| {
                if !t.is_empty() {
                    let i = rng.random_range(0..t.len());
                    t[i] ^= 1 << rng.random_range(0..8);
                }
                t
            }),
        };
        views[v].evaltree = new_tree.clone();
        // keep the channels of v consistent so only the tree itself is wrong
        if rng.random_bool(0.5) {
            let id = v as VertexId + 1;
            for w in views.iter_mut() {
                for c in w.channels.iter_mut().filter(|c| c.child == id) {
                    c.mc_cargo = new_tree.clone();
                }
            }
        }
        encode_views(&views).unwrap_or_else(|| base.labels.clone())
    }

    fn trial(&self, attack: Attack, rng: &mut ChaCha8Rng) -> bool {
        let labels = match attack {
            Attack::BitFlip => self.bit_flip(rng),
            Attack::FieldSwap => self.field_swap(rng),
            Attack::Transplant => self.transplant(rng),
            Attack::ChannelForgery => self.channel_forgery(rng),
            Attack::TreeTampering => self.tree_tampering(rng),
        };
        let g = &self.lg.graph;
        let mut first = Vec::new();
        for v in g.vertices() {
            if labels[v as usize - 1] != self.own.labels[v as usize - 1] {
                first.push(v);
                first.extend_from_slice(g.neighbors(v));
            }
        }
        accepts(self.lg, &labels, &self.cfg, &first)
    }
}

/// Tries `trials` adversarial labelings, spread evenly over the attack
/// classes, and counts the ones every vertex accepts.
pub fn fuzz_soundness(
    lg: &LabeledGraph,
    omega: usize,
    f: &Formula,
    trials: usize,
    seed: u64,
) -> Result<FuzzReport, FuzzError> {
    let g = &lg.graph;
    let n = g.n();
    let formula_false = match eval_formula(lg, f, Budget::default()) {
        Ok(b) => !b,
        Err(e) => return Err(FuzzError::Unconfirmed(e.to_string())),
    };
    let width_exceeded = if n <= BRUTE_FORCE_LIMIT {
        treewidth_bruteforce(g).map_err(|e| FuzzError::Unconfirmed(e.to_string()))? > omega
    } else {
        false
    };
    if !formula_false && !width_exceeded {
        return if n <= BRUTE_FORCE_LIMIT {
            Err(FuzzError::Precondition)
        } else {
            Err(FuzzError::Unconfirmed("graph too large for the treewidth oracle".into()))
        };
    }
    let choice = if n <= EXACT_LIMIT {
        SearchMode::Exact
    } else {
        SearchMode::Heuristic
    };
    let t = best_elimination_tree(g, choice, usize::MAX).map_err(PipelineError::from)?;
    let own = structural_base(lg, &t, f).ok_or_else(|| {
        FuzzError::Unconfirmed("could not build a structural labeling".into())
    })?;
    let donor = find_donor(lg, omega, f);
    let campaign = Campaign {
        lg,
        cfg: VerifierConfig {
            omega,
            formula: Some(f.clone()),
        },
        own,
        donor,
    };
    let outcomes: Vec<(Attack, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let attack = ATTACKS[i % ATTACKS.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (attack, campaign.trial(attack, &mut rng))
        })
        .collect();
    let per_attack: Vec<AttackTally> = ATTACKS
        .iter()
        .map(|&a| AttackTally {
            attack: a,
            trials: outcomes.iter().filter(|o| o.0 == a).count(),
            accepted: outcomes.iter().filter(|o| o.0 == a && o.1).count(),
        })
        .collect();
    Ok(FuzzReport {
        n,
        omega,
        seed,
        trials,
        accepted: outcomes.iter().filter(|o| o.1).count(),
        formula_false,
        width_exceeded,
        donor: campaign.donor.is_some(),
        per_attack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mso::{parse_formula, Logic};

    fn f(text: &str) -> Formula {
        parse_formula(text, Logic::Mso1).unwrap()
    }

    const EDGE: &str = "exists x. exists y. adj(x,y)";
    const TWO_COL: &str = "exists X. forall x. forall y. adj(x,y) -> !(X(x) <-> X(y))";

    #[test]
    fn honest_round_accepts() {
        let lg = LabeledGraph::unlabeled(corpus::path(3));
        let cert = certify(&lg, 1, Some(&f(EDGE)), &TreeChoice::Auto).unwrap();
        let cfg = VerifierConfig {
            omega: 1,
            formula: Some(f(EDGE)),
        };
        assert!(all_yes(&run_round(&lg.graph, &cert.labels, &cfg)));
    }

    #[test]
    fn empty_labels_rejected_everywhere() {
        let g = corpus::cycle(4);
        let labels = vec![BitString::new(); 4];
        let cfg = VerifierConfig {
            omega: 2,
            formula: None,
        };
        assert!(run_round(&g, &labels, &cfg).iter().all(|v| !v.is_yes()));
    }

    #[test]
    fn one_flip_is_caught_nearby() {
        let lg = LabeledGraph::unlabeled(corpus::cycle(5));
        let cert = certify(&lg, 2, Some(&f(EDGE)), &TreeChoice::Auto).unwrap();
        let cfg = VerifierConfig {
            omega: 2,
            formula: Some(f(EDGE)),
        };
        let mut labels = cert.labels.clone();
        labels[2].flip(0);
        let verdicts = run_round(&lg.graph, &labels, &cfg);
        let near: Vec<u32> = [3].into_iter().chain(lg.graph.neighbors(3).iter().copied()).collect();
        assert!(near.iter().any(|&v| !verdicts[v as usize - 1].is_yes()));
    }

    #[test]
    fn fuzz_is_reproducible_and_sound() {
        let lg = LabeledGraph::unlabeled(corpus::cycle(5));
        let a = fuzz_soundness(&lg, 2, &f(TWO_COL), 100, 7).unwrap();
        let b = fuzz_soundness(&lg, 2, &f(TWO_COL), 100, 7).unwrap();
        assert_eq!(a.accepted, 0);
        assert!(a.donor);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn fuzz_refuses_positive_instances() {
        let lg = LabeledGraph::unlabeled(corpus::cycle(4));
        assert_eq!(
            fuzz_soundness(&lg, 2, &f(TWO_COL), 10, 1).unwrap_err(),
            FuzzError::Precondition
        );
    }

    #[test]
    fn stats_for_p3_and_k1() {
        let lg = LabeledGraph::unlabeled(corpus::path(3));
        let s = stats(&lg, 1, Some(&f(EDGE)), &TreeChoice::Auto).unwrap();
        assert_eq!((s.width, s.congestion), (1, 0));
        assert!(s.accepted);
        let k1 = LabeledGraph::unlabeled(corpus::path(1));
        let s = stats(&k1, 0, Some(&f("forall x. x = x")), &TreeChoice::Auto).unwrap();
        assert_eq!((s.id_bits, s.max_label_bits), (0, 0));
        assert!(s.accepted);
    }
}
