//! C interface to the `lvcert` prover and verifier.
//!
//! Graphs, formulas and labelings live behind opaque handles that the caller
//! frees with the matching `*_free` function. Every fallible call returns an
//! [`LvcertStatus`]; on failure [`lvcert_last_error`] describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lvcert::graph::{load_graph, Graph};
use lvcert::label::{read_labels, write_labels, BitString};
use lvcert::mso::suite::lookup;
use lvcert::mso::{
    eval_formula, incidence_graph, mso2_to_mso1, parse_formula, Budget, Formula, LabeledGraph,
    Logic, Mso2Structure,
};
use lvcert::sim::{certify, run_round_labeled, TreeChoice, VerifierConfig};
use thiserror::Error;

/// Result codes; zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LvcertStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Graph = 3,
    Formula = 4,
    Pipeline = 5,
    Labels = 6,
    Evaluation = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LvcertLogic {
    Mso1 = 0,
    Mso2 = 1,
}

/// A parsed graph.
pub struct LvcertGraph {
    graph: Graph,
}

/// A parsed sentence and the logic it was written in.
pub struct LvcertFormula {
    formula: Formula,
    logic: Logic,
}

/// One label per vertex of the structure the verifier runs on.
pub struct LvcertLabeling {
    labels: Vec<BitString>,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("null pointer argument")]
    Null,
    #[error("string is not valid UTF-8")]
    Utf8,
    #[error(transparent)]
    Graph(#[from] lvcert::graph::GraphError),
    #[error(transparent)]
    Formula(#[from] lvcert::mso::FormulaError),
    #[error(transparent)]
    Pipeline(#[from] lvcert::sim::PipelineError),
    #[error(transparent)]
    Labels(#[from] lvcert::label::LabelError),
    #[error(transparent)]
    Evaluation(#[from] lvcert::mso::EvalError),
    #[error("buffer holds {have} entries, {need} needed")]
    BufferTooSmall { have: usize, need: usize },
}

impl FfiError {
    fn status(&self) -> LvcertStatus {
        match self {
            FfiError::Null => LvcertStatus::NullPointer,
            FfiError::Utf8 => LvcertStatus::InvalidUtf8,
            FfiError::Graph(_) => LvcertStatus::Graph,
            FfiError::Formula(_) => LvcertStatus::Formula,
            FfiError::Pipeline(_) => LvcertStatus::Pipeline,
            FfiError::Labels(_) => LvcertStatus::Labels,
            FfiError::Evaluation(_) => LvcertStatus::Evaluation,
            FfiError::BufferTooSmall { .. } => LvcertStatus::BufferTooSmall,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> LvcertStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LvcertStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            e.status()
        }
        Err(_) => {
            set_error("internal panic".into());
            LvcertStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, FfiError> {
    if p.is_null() {
        return Err(FfiError::Null);
    }
    CStr::from_ptr(p).to_str().map_err(|_| FfiError::Utf8)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, FfiError> {
    p.as_ref().ok_or(FfiError::Null)
}

unsafe fn out<T>(p: *mut T, value: T) -> Result<(), FfiError> {
    if p.is_null() {
        return Err(FfiError::Null);
    }
    p.write(value);
    Ok(())
}

/// The structure and verifier configuration for a graph and optional formula.
fn instance(g: &LvcertGraph, f: Option<&LvcertFormula>, omega: usize) -> (LabeledGraph, VerifierConfig) {
    let (lg, formula) = match f {
        Some(f) if f.logic == Logic::Mso2 => {
            (incidence_graph(&g.graph), Some(mso2_to_mso1(&f.formula)))
        }
        Some(f) => (LabeledGraph::unlabeled(g.graph.clone()), Some(f.formula.clone())),
        None => (LabeledGraph::unlabeled(g.graph.clone()), None),
    };
    (lg, VerifierConfig { omega, formula })
}

/// Description of the last failure on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lvcert_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses an edge list or DIMACS text.
///
/// # Safety
/// `text` must be a nul-terminated string and `out_graph` writable.
#[no_mangle]
pub unsafe extern "C" fn lvcert_graph_parse(
    text: *const c_char,
    out_graph: *mut *mut LvcertGraph,
) -> LvcertStatus {
    guard(|| {
        let graph = load_graph(self::text(text)?)?;
        out(out_graph, Box::into_raw(Box::new(LvcertGraph { graph })))
    })
}

/// Number of vertices, or zero for a null handle.
///
/// # Safety
/// `g` must be null or a live graph handle.
#[no_mangle]
pub unsafe extern "C" fn lvcert_graph_vertex_count(g: *const LvcertGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.n())
}

/// # Safety
/// `g` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn lvcert_graph_free(g: *mut LvcertGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Parses a sentence, or looks up a suite sentence by name; a suite name
/// overrides `logic`.
///
/// # Safety
/// `text` must be a nul-terminated string and `out_formula` writable.
#[no_mangle]
pub unsafe extern "C" fn lvcert_formula_parse(
    text: *const c_char,
    logic: LvcertLogic,
    out_formula: *mut *mut LvcertFormula,
) -> LvcertStatus {
    guard(|| {
        let text = self::text(text)?;
        let (text, logic) = match lookup(text) {
            Some(e) => (e.text, e.logic),
            None => (
                text,
                match logic {
                    LvcertLogic::Mso1 => Logic::Mso1,
                    LvcertLogic::Mso2 => Logic::Mso2,
                },
            ),
        };
        let formula = parse_formula(text, logic)?;
        out(
            out_formula,
            Box::into_raw(Box::new(LvcertFormula { formula, logic })),
        )
    })
}

/// # Safety
/// `f` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn lvcert_formula_free(f: *mut LvcertFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Brute-force truth of the formula on the graph.
///
/// # Safety
/// Handles must be live; `out_holds` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvcert_oracle(
    g: *const LvcertGraph,
    f: *const LvcertFormula,
    out_holds: *mut bool,
) -> LvcertStatus {
    guard(|| {
        let (g, f) = (handle(g)?, handle(f)?);
        let holds = match f.logic {
            Logic::Mso1 => eval_formula(&g.graph, &f.formula, Budget::default())?,
            Logic::Mso2 => eval_formula(&Mso2Structure::new(&g.graph), &f.formula, Budget::default())?,
        };
        out(out_holds, holds)
    })
}

/// Runs the honest prover. A null formula certifies the width bound alone.
/// MSO2 formulas are certified on the incidence graph, so the labeling then
/// has one label per vertex and per edge.
///
/// # Safety
/// `g` must be live, `f` null or live, `out_labeling` writable.
#[no_mangle]
pub unsafe extern "C" fn lvcert_prove(
    g: *const LvcertGraph,
    f: *const LvcertFormula,
    omega: usize,
    out_labeling: *mut *mut LvcertLabeling,
) -> LvcertStatus {
    guard(|| {
        let (lg, cfg) = instance(handle(g)?, f.as_ref(), omega);
        let cert = certify(&lg, omega, cfg.formula.as_ref(), &TreeChoice::Auto)?;
        out(
            out_labeling,
            Box::into_raw(Box::new(LvcertLabeling {
                labels: cert.labels,
            })),
        )
    })
}

/// Runs one verification round. `verdicts` receives 1 (YES) or 0 (NO) per
/// vertex and must hold [`lvcert_labeling_len`] entries; it may be null.
///
/// # Safety
/// Handles must be live; `verdicts` must hold `capacity` bytes when non-null;
/// `out_accepted` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvcert_verify(
    g: *const LvcertGraph,
    f: *const LvcertFormula,
    omega: usize,
    labeling: *const LvcertLabeling,
    verdicts: *mut u8,
    capacity: usize,
    out_accepted: *mut bool,
) -> LvcertStatus {
    guard(|| {
        let (lg, cfg) = instance(handle(g)?, f.as_ref(), omega);
        let labeling = handle(labeling)?;
        let need = lg.graph.n();
        if labeling.labels.len() != need {
            return Err(lvcert::label::LabelError::File(format!(
                "{} labels for {need} vertices",
                labeling.labels.len()
            ))
            .into());
        }
        if !verdicts.is_null() && capacity < need {
            return Err(FfiError::BufferTooSmall {
                have: capacity,
                need,
            });
        }
        if out_accepted.is_null() {
            return Err(FfiError::Null);
        }
        let result = run_round_labeled(&lg, &labeling.labels, &cfg);
        if !verdicts.is_null() {
            for (i, v) in result.iter().enumerate() {
                verdicts.add(i).write(v.is_yes() as u8);
            }
        }
        out(out_accepted, result.iter().all(|v| v.is_yes()))
    })
}

/// Number of labels, or zero for a null handle.
///
/// # Safety
/// `l` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn lvcert_labeling_len(l: *const LvcertLabeling) -> usize {
    l.as_ref().map_or(0, |l| l.labels.len())
}

/// Bit length of the label of vertex `v` (1-based), or zero if out of range.
///
/// # Safety
/// `l` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn lvcert_label_bits(l: *const LvcertLabeling, v: usize) -> usize {
    l.as_ref()
        .and_then(|l| l.labels.get(v.wrapping_sub(1)))
        .map_or(0, BitString::len)
}

/// Flips bit `bit` of the label of vertex `v` (1-based); a no-op when out of
/// range. Meant for fault-injection experiments.
///
/// # Safety
/// `l` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn lvcert_label_flip(l: *mut LvcertLabeling, v: usize, bit: usize) {
    if let Some(label) = l.as_mut().and_then(|l| l.labels.get_mut(v.wrapping_sub(1))) {
        if bit < label.len() {
            label.flip(bit);
        }
    }
}

/// Serializes the labeling as `id[u32] len[u32] bits` records into a new
/// buffer released with [`lvcert_bytes_free`].
///
/// # Safety
/// `l` must be live; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvcert_labeling_write(
    l: *const LvcertLabeling,
    out_data: *mut *mut u8,
    out_len: *mut usize,
) -> LvcertStatus {
    guard(|| {
        if out_data.is_null() || out_len.is_null() {
            return Err(FfiError::Null);
        }
        let bytes = write_labels(&handle(l)?.labels).into_boxed_slice();
        out(out_len, bytes.len())?;
        out(out_data, Box::into_raw(bytes) as *mut u8)
    })
}

/// # Safety
/// `data` and `len` must come from one [`lvcert_labeling_write`] call.
#[no_mangle]
pub unsafe extern "C" fn lvcert_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}

/// Reads `n` labels from the record format.
///
/// # Safety
/// `data` must hold `len` bytes; `out_labeling` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lvcert_labeling_read(
    data: *const u8,
    len: usize,
    n: usize,
    out_labeling: *mut *mut LvcertLabeling,
) -> LvcertStatus {
    guard(|| {
        if data.is_null() {
            return Err(FfiError::Null);
        }
        let labels = read_labels(std::slice::from_raw_parts(data, len), n)?;
        out(
            out_labeling,
            Box::into_raw(Box::new(LvcertLabeling { labels })),
        )
    })
}

/// # Safety
/// `l` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn lvcert_labeling_free(l: *mut LvcertLabeling) {
    if !l.is_null() {
        drop(Box::from_raw(l));
    }
}
