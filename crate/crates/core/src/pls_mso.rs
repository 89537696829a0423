//! Treewidth labels extended with evaluation-tree certificates.
//!
//! Every vertex `v` carries the serialized tree `C_v`; channels relay the
//! child's tree to its parent. The verifier rebuilds its own tree from the
//! children's trees and its adjacency to `str(v)`, compares bytes, and the
//! root additionally evaluates its tree.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::elimination::EliminationTree;
use crate::evaltree::{compute_all, Engine, EvalForest, EvalTreeError};
use crate::label::{encode_label, id_width, BitString, LabelView};
use crate::mso::{Formula, LabeledGraph};
use crate::pathsys::OrientedPathSystem;
use crate::pls_tw::{check_tw, prove_views, LocalInstance, Reason, TwContext, TwOutcome, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProveError {
    #[error("the formula is false on this graph")]
    FormulaFalse,
    #[error(transparent)]
    Tree(#[from] EvalTreeError),
}

/// Decoded labels with evaluation trees and channel cargo filled in.
pub fn prove_mso_views(
    lg: &LabeledGraph,
    t: &EliminationTree,
    p: &OrientedPathSystem,
    forest: &EvalForest,
) -> Vec<LabelView> {
    let mut views = prove_views(&lg.graph, t, p);
    for (i, view) in views.iter_mut().enumerate() {
        view.evaltree = Some(forest.bytes(i as u32 + 1));
        for ch in &mut view.channels {
            ch.mc_cargo = Some(forest.bytes(ch.child));
        }
    }
    views
}

fn encode_all(n: usize, views: &[LabelView]) -> Vec<BitString> {
    if n == 1 {
        return vec![BitString::new()];
    }
    views
        .iter()
        .map(|v| encode_label(v).expect("honest fields fit"))
        .collect()
}

/// Labels following the honest construction without checking that the
/// formula holds. Useful as a starting point for adversarial labelings.
pub fn prove_mso_unchecked(
    lg: &LabeledGraph,
    t: &EliminationTree,
    p: &OrientedPathSystem,
    f: &Formula,
) -> Result<Vec<BitString>, ProveError> {
    let forest = compute_all(lg, t, f)?;
    Ok(encode_all(lg.graph.n(), &prove_mso_views(lg, t, p, &forest)))
}

/// Honest labels; refuses when the formula is false.
pub fn prove_mso(
    lg: &LabeledGraph,
    t: &EliminationTree,
    p: &OrientedPathSystem,
    f: &Formula,
) -> Result<Vec<BitString>, ProveError> {
    let mut forest = compute_all(lg, t, f)?;
    prove_mso_from(lg, t, p, &mut forest)
}

/// [`prove_mso`] on an already computed forest.
pub fn prove_mso_from(
    lg: &LabeledGraph,
    t: &EliminationTree,
    p: &OrientedPathSystem,
    forest: &mut EvalForest,
) -> Result<Vec<BitString>, ProveError> {
    if !forest.evaluate()? {
        return Err(ProveError::FormulaFalse);
    }
    Ok(encode_all(lg.graph.n(), &prove_mso_views(lg, t, p, forest)))
}

/// The verifier: treewidth checks, then the tree recomputation and, at the
/// root, evaluation.
pub fn verify_mso(inst: &LocalInstance, omega: usize, f: &Formula) -> Verdict {
    check_mso(inst, omega, f).into()
}

fn bad(e: EvalTreeError) -> Reason {
    Reason::BadTree(e.to_string())
}

pub fn check_mso(inst: &LocalInstance, omega: usize, f: &Formula) -> Result<(), Reason> {
    match check_tw(inst, omega)? {
        TwOutcome::Isolated => {
            let mut e = Engine::new(f, id_width(1)).map_err(bad)?;
            let q = e.fold(inst.self_id, &[], &[], inst.input, &[]).map_err(bad)?;
            if e.evaluate_root(q).map_err(bad)? {
                Ok(())
            } else {
                Err(Reason::RootFalse)
            }
        }
        TwOutcome::Checked(ctx) => check_trees(inst, &ctx, f),
    }
}

fn check_trees(inst: &LocalInstance, ctx: &TwContext, f: &Formula) -> Result<(), Reason> {
    let v = inst.self_id;
    let own = ctx.own.evaltree.as_ref().ok_or(Reason::MissingTree)?;
    let mut e = Engine::new(f, ctx.own.s).map_err(bad)?;
    let boundary: Vec<u32> = ctx.own.anc.iter().map(|&(x, _)| x).collect();
    let allowed: BTreeSet<u32> = boundary.iter().copied().chain([v]).collect();
    let mut children = Vec::with_capacity(ctx.children.len());
    for c in &ctx.children {
        let bytes = c.evaltree.as_ref().ok_or(Reason::MissingTree)?;
        let id = e.deserialize(bytes).map_err(bad)?;
        if !e.marks(id).is_subset(&allowed) {
            return Err(Reason::ChildMarks(c.id));
        }
        children.push(id);
    }
    let adj: Vec<bool> = boundary
        .iter()
        .map(|b| ctx.neighbors.contains_key(b))
        .collect();
    let q = e
        .fold(v, &boundary, &adj, inst.input, &children)
        .map_err(bad)?;
    if e.serialize(q) != *own {
        return Err(Reason::TreeMismatch);
    }
    if ctx.is_root() && !e.evaluate_root(q).map_err(bad)? {
        return Err(Reason::RootFalse);
    }
    Ok(())
}
