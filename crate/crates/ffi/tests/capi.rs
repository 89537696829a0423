use std::ffi::{CStr, CString};
use std::ptr;

use lvcert_ffi::*;

struct Handles {
    g: *mut LvcertGraph,
    f: *mut LvcertFormula,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            lvcert_graph_free(self.g);
            lvcert_formula_free(self.f);
        }
    }
}

fn load(edges: &str, formula: &str, logic: LvcertLogic) -> Handles {
    let (text, ftext) = (CString::new(edges).unwrap(), CString::new(formula).unwrap());
    let mut h = Handles {
        g: ptr::null_mut(),
        f: ptr::null_mut(),
    };
    unsafe {
        assert_eq!(lvcert_graph_parse(text.as_ptr(), &mut h.g), LvcertStatus::Ok);
        assert_eq!(
            lvcert_formula_parse(ftext.as_ptr(), logic, &mut h.f),
            LvcertStatus::Ok
        );
    }
    h
}

fn last_error() -> String {
    let p = lvcert_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const C6: &str = "6 6\n1 2\n2 3\n3 4\n4 5\n5 6\n6 1\n";
const C5: &str = "5 5\n1 2\n2 3\n3 4\n4 5\n5 1\n";

#[test]
fn prove_verify_round_trip() {
    let h = load(C6, "bipartite", LvcertLogic::Mso1);
    unsafe {
        assert_eq!(lvcert_graph_vertex_count(h.g), 6);
        let mut l = ptr::null_mut();
        assert_eq!(lvcert_prove(h.g, h.f, 2, &mut l), LvcertStatus::Ok);
        assert_eq!(lvcert_labeling_len(l), 6);
        assert!(lvcert_label_bits(l, 1) > 0);
        assert_eq!(lvcert_label_bits(l, 7), 0);

        let mut verdicts = [9u8; 6];
        let mut accepted = false;
        let st = lvcert_verify(h.g, h.f, 2, l, verdicts.as_mut_ptr(), 6, &mut accepted);
        assert_eq!(st, LvcertStatus::Ok);
        assert!(accepted);
        assert_eq!(verdicts, [1; 6]);

        let (mut data, mut len) = (ptr::null_mut(), 0usize);
        assert_eq!(lvcert_labeling_write(l, &mut data, &mut len), LvcertStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(lvcert_labeling_read(data, len, 6, &mut back), LvcertStatus::Ok);
        lvcert_bytes_free(data, len);
        let st = lvcert_verify(h.g, h.f, 2, back, ptr::null_mut(), 0, &mut accepted);
        assert_eq!(st, LvcertStatus::Ok);
        assert!(accepted);

        lvcert_label_flip(back, 3, 0);
        let st = lvcert_verify(h.g, h.f, 2, back, verdicts.as_mut_ptr(), 6, &mut accepted);
        assert_eq!(st, LvcertStatus::Ok);
        assert!(!accepted);
        assert!(verdicts.contains(&0));

        lvcert_labeling_free(back);
        lvcert_labeling_free(l);
    }
}

#[test]
fn false_formula_is_refused() {
    let h = load(C5, "bipartite", LvcertLogic::Mso1);
    unsafe {
        let mut holds = true;
        assert_eq!(lvcert_oracle(h.g, h.f, &mut holds), LvcertStatus::Ok);
        assert!(!holds);
        let mut l = ptr::null_mut();
        assert_eq!(lvcert_prove(h.g, h.f, 2, &mut l), LvcertStatus::Pipeline);
        assert!(l.is_null());
        assert!(last_error().contains("false"));
    }
}

#[test]
fn mso2_runs_on_incidence_graph() {
    let h = load("4 3\n1 2\n2 3\n3 4\n", "perfect-matching", LvcertLogic::Mso1);
    unsafe {
        let mut holds = false;
        assert_eq!(lvcert_oracle(h.g, h.f, &mut holds), LvcertStatus::Ok);
        assert!(holds);
        let mut l = ptr::null_mut();
        assert_eq!(lvcert_prove(h.g, h.f, 2, &mut l), LvcertStatus::Ok);
        // four vertices and three edges
        assert_eq!(lvcert_labeling_len(l), 7);
        let mut accepted = false;
        let st = lvcert_verify(h.g, h.f, 2, l, ptr::null_mut(), 0, &mut accepted);
        assert_eq!(st, LvcertStatus::Ok);
        assert!(accepted);
        lvcert_labeling_free(l);
    }
}

#[test]
fn treewidth_only_with_null_formula() {
    let text = CString::new(C6).unwrap();
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(lvcert_graph_parse(text.as_ptr(), &mut g), LvcertStatus::Ok);
        let mut l = ptr::null_mut();
        assert_eq!(lvcert_prove(g, ptr::null(), 2, &mut l), LvcertStatus::Ok);
        let mut accepted = false;
        let st = lvcert_verify(g, ptr::null(), 2, l, ptr::null_mut(), 0, &mut accepted);
        assert_eq!(st, LvcertStatus::Ok);
        assert!(accepted);
        let mut l1 = ptr::null_mut();
        assert_eq!(lvcert_prove(g, ptr::null(), 1, &mut l1), LvcertStatus::Pipeline);
        lvcert_labeling_free(l);
        lvcert_graph_free(g);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(lvcert_graph_parse(ptr::null(), &mut g), LvcertStatus::NullPointer);
        assert!(last_error().contains("null"));

        let bad = CString::new("2 1\n1 x\n").unwrap();
        assert_eq!(lvcert_graph_parse(bad.as_ptr(), &mut g), LvcertStatus::Graph);
        assert!(!last_error().is_empty());

        let mut f = ptr::null_mut();
        let bad = CString::new("exists x. adj(x").unwrap();
        assert_eq!(
            lvcert_formula_parse(bad.as_ptr(), LvcertLogic::Mso1, &mut f),
            LvcertStatus::Formula
        );

        let junk = [0u8, 0, 0, 1, 0, 0];
        let mut l = ptr::null_mut();
        assert_eq!(lvcert_labeling_read(junk.as_ptr(), junk.len(), 2, &mut l), LvcertStatus::Labels);

        let h = load(C6, "edge", LvcertLogic::Mso1);
        let mut l = ptr::null_mut();
        assert_eq!(lvcert_prove(h.g, h.f, 2, &mut l), LvcertStatus::Ok);
        let mut small = [0u8; 3];
        let mut accepted = false;
        let st = lvcert_verify(h.g, h.f, 2, l, small.as_mut_ptr(), 3, &mut accepted);
        assert_eq!(st, LvcertStatus::BufferTooSmall);
        // a successful call clears the error
        assert_eq!(lvcert_verify(h.g, h.f, 2, l, ptr::null_mut(), 0, &mut accepted), LvcertStatus::Ok);
        assert!(lvcert_last_error().is_null());
        lvcert_labeling_free(l);

        lvcert_graph_free(ptr::null_mut());
        lvcert_formula_free(ptr::null_mut());
        lvcert_labeling_free(ptr::null_mut());
        assert_eq!(lvcert_labeling_len(ptr::null()), 0);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/lvcert.h");
    for name in [
        "lvcert_last_error",
        "lvcert_graph_parse",
        "lvcert_graph_vertex_count",
        "lvcert_graph_free",
        "lvcert_formula_parse",
        "lvcert_formula_free",
        "lvcert_oracle",
        "lvcert_prove",
        "lvcert_verify",
        "lvcert_labeling_len",
        "lvcert_label_bits",
        "lvcert_label_flip",
        "lvcert_labeling_write",
        "lvcert_bytes_free",
        "lvcert_labeling_read",
        "lvcert_labeling_free",
        "LVCERT_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(header.contains(name), "{name} missing from the header");
    }
}
