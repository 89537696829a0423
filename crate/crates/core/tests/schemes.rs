use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lvcert::corpus;
use lvcert::elimination::{best_elimination_tree, tree_from_ordering, SearchMode};
use lvcert::evaltree::{compute_all, leaf_bound, Engine};
use lvcert::graph::Graph;
use lvcert::label::{id_width, BitString};
use lvcert::mso::suite::{self, MSO1_SUITE};
use lvcert::mso::{eval_bruteforce, eval_formula, parse_formula, Budget, LabeledGraph, Logic};
use lvcert::pathsys::{build_path_system, congestion};
use lvcert::pls_tw::prove_tw;
use lvcert::sim::{
    accepts, all_yes, certify, fuzz_soundness, run_round, run_round_labeled, stats, FuzzError,
    TreeChoice, VerifierConfig,
};

fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    corpus::random_connected(n, p, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn tw_only(omega: usize) -> VerifierConfig {
    VerifierConfig {
        omega,
        formula: None,
    }
}

#[test]
fn empty_labels_are_rejected_everywhere() {
    for g in [corpus::path(2), corpus::cycle(5), corpus::complete(4)] {
        let labels = vec![BitString::new(); g.n()];
        let v = run_round(&g, &labels, &tw_only(3));
        assert!(v.iter().all(|v| !v.is_yes()), "{:?}", g.edges());
    }
}

#[test]
fn width_bound_is_enforced() {
    let g = corpus::complete(4);
    let t = best_elimination_tree(&g, SearchMode::Exact, 3).unwrap();
    let labels = prove_tw(&g, &t, &build_path_system(&g, &t));
    assert!(all_yes(&run_round(&g, &labels, &tw_only(3))));
    assert!(!all_yes(&run_round(&g, &labels, &tw_only(2))));
}

#[test]
fn single_vertex_graph() {
    let lg = LabeledGraph::unlabeled(corpus::path(1));
    let f = suite::lookup("universal-vertex").unwrap().formula();
    let cert = certify(&lg, 0, Some(&f), &TreeChoice::Auto).unwrap();
    assert_eq!(cert.labels, vec![BitString::new()]);
    let s = stats(&lg, 0, Some(&f), &TreeChoice::Auto).unwrap();
    assert!(s.accepted);
    assert_eq!((s.n, s.width, s.max_label_bits), (1, 0, 0));
}

#[test]
fn p3_stats() {
    let lg = LabeledGraph::unlabeled(corpus::path(3));
    let f = suite::lookup("edge").unwrap().formula();
    let s = stats(&lg, 1, Some(&f), &TreeChoice::Exact).unwrap();
    assert!(s.accepted);
    assert_eq!((s.width, s.congestion, s.id_bits), (1, 0, 2));
}

#[test]
fn cycle_scaling_is_logarithmic() {
    let f = suite::lookup("edge").unwrap().formula();
    let mut ratios = Vec::new();
    for n in [8, 16, 32, 64] {
        let lg = LabeledGraph::unlabeled(corpus::cycle(n));
        let s = stats(&lg, 2, Some(&f), &TreeChoice::Heuristic).unwrap();
        assert!(s.accepted);
        ratios.push(s.bits_per_id_bit);
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::MAX, 0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    assert!(hi <= 2.0 * lo, "{ratios:?}");
}

#[test]
fn fuzz_refuses_positive_instances() {
    let lg = LabeledGraph::unlabeled(corpus::cycle(4));
    let f = suite::lookup("bipartite").unwrap().formula();
    assert_eq!(
        fuzz_soundness(&lg, 2, &f, 10, 1).unwrap_err(),
        FuzzError::Precondition
    );
}

#[test]
fn fuzz_is_reproducible_and_sound() {
    let lg = LabeledGraph::unlabeled(corpus::cycle(5));
    let f = suite::lookup("bipartite").unwrap().formula();
    let a = fuzz_soundness(&lg, 2, &f, 200, 42).unwrap();
    let b = fuzz_soundness(&lg, 2, &f, 200, 42).unwrap();
    assert_eq!(a.accepted, 0);
    assert!(a.formula_false && !a.width_exceeded);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a.per_attack.iter().map(|t| t.trials).sum::<usize>(), 200);
}

#[test]
fn fuzz_width_violation() {
    let lg = LabeledGraph::unlabeled(corpus::complete(4));
    let f = suite::lookup("edge").unwrap().formula();
    let r = fuzz_soundness(&lg, 2, &f, 200, 7).unwrap();
    assert_eq!(r.accepted, 0);
    assert!(r.width_exceeded);
}

#[test]
fn suite_leaf_counts_within_bound_on_grid() {
    let g = corpus::grid(2, 4);
    let t = best_elimination_tree(&g, SearchMode::Exact, 3).unwrap();
    let lg = LabeledGraph::unlabeled(g.clone());
    for e in MSO1_SUITE.iter().filter(|e| e.name != "3-colorable") {
        let f = e.formula();
        let mut forest = compute_all(&lg, &t, &f).unwrap();
        let want = eval_bruteforce(&g, &e.sentence(), Budget::default()).unwrap();
        assert_eq!(forest.evaluate().unwrap(), want, "{}", e.name);
        let bound = leaf_bound(f.q_v(), f.q_s(), t.width());
        for v in g.vertices() {
            assert!(forest.engine.leaf_count(forest.tree(v)) as u128 <= bound);
        }
    }
}

#[test]
fn serialized_trees_round_trip_across_engines() {
    let g = corpus::cycle(6);
    let t = tree_from_ordering(&g, &[1, 3, 5, 2, 4, 6]).unwrap();
    let lg = LabeledGraph::unlabeled(g.clone());
    let f = suite::lookup("dominating-clique").unwrap().formula();
    let forest = compute_all(&lg, &t, &f).unwrap();
    let mut fresh = Engine::new(&f, id_width(6)).unwrap();
    for v in g.vertices() {
        let bytes = forest.bytes(v);
        let id = fresh.deserialize(&bytes).unwrap();
        assert_eq!(fresh.serialize(id), bytes);
        assert_eq!(fresh.serialized_bits(id).div_ceil(8) as usize, bytes.len());
        if !bytes.is_empty() {
            let mut bad = bytes.clone();
            bad.pop();
            assert!(fresh.deserialize(&bad).is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn treewidth_scheme_is_complete(n in 1usize..14, p in 0.0..0.5f64, seed in any::<u64>()) {
        let g = random_graph(n, p, seed);
        let t = best_elimination_tree(&g, SearchMode::Heuristic, usize::MAX).unwrap();
        let paths = build_path_system(&g, &t);
        let omega = t.width().max(congestion(&paths));
        let labels = prove_tw(&g, &t, &paths);
        prop_assert!(all_yes(&run_round(&g, &labels, &tw_only(omega))));
    }

    #[test]
    fn early_exit_agrees_with_full_round(
        n in 2usize..10,
        seed in any::<u64>(),
        flips in proptest::collection::vec((any::<usize>(), any::<usize>()), 1..4),
    ) {
        let g = random_graph(n, 0.3, seed);
        let lg = LabeledGraph::unlabeled(g.clone());
        let cert = certify(&lg, 3, None, &TreeChoice::Heuristic);
        prop_assume!(cert.is_ok());
        let mut labels = cert.unwrap().labels;
        for (v, b) in flips {
            let l = &mut labels[v % n];
            if !l.is_empty() {
                let i = b % l.len();
                l.flip(i);
            }
        }
        let full = all_yes(&run_round_labeled(&lg, &labels, &tw_only(3)));
        prop_assert_eq!(accepts(&lg, &labels, &tw_only(3), &[1]), full);
    }

    #[test]
    fn mso_scheme_is_complete_and_matches_oracle(
        n in 2usize..8,
        p in 0.0..0.6f64,
        seed in any::<u64>(),
        which in 0usize..MSO1_SUITE.len(),
    ) {
        let e = MSO1_SUITE[which];
        prop_assume!(e.name != "3-colorable" || n <= 6);
        let g = random_graph(n, p, seed);
        let f = e.formula();
        let lg = LabeledGraph::unlabeled(g.clone());
        let truth = suite::oracle(e.name, &g).unwrap();
        prop_assert_eq!(eval_formula(&g, &f, Budget::default()).unwrap(), truth);
        let t = best_elimination_tree(&g, SearchMode::Exact, usize::MAX).unwrap();
        let omega = t.width().max(congestion(&build_path_system(&g, &t)));
        match certify(&lg, omega, Some(&f), &TreeChoice::Exact) {
            Ok(cert) => {
                prop_assert!(truth);
                let cfg = VerifierConfig { omega, formula: Some(f.clone()) };
                prop_assert!(all_yes(&run_round_labeled(&lg, &cert.labels, &cfg)));
            }
            Err(err) => prop_assert!(!truth, "{}", err),
        }
    }

    #[test]
    fn negation_flips_truth(n in 1usize..7, p in 0.0..0.6f64, seed in any::<u64>(), which in 0usize..MSO1_SUITE.len()) {
        let g = random_graph(n, p, seed);
        let f = MSO1_SUITE[which].formula();
        let a = eval_formula(&g, &f, Budget::default()).unwrap();
        let b = eval_formula(&g, &f.negate(), Budget::default()).unwrap();
        prop_assert_eq!(a, !b);
    }

    #[test]
    fn printed_formulas_reparse(which in 0usize..MSO1_SUITE.len()) {
        let f = MSO1_SUITE[which].formula();
        let again = parse_formula(&f.to_string(), Logic::Mso1).unwrap();
        prop_assert_eq!(again.to_string(), f.to_string());
    }

    #[test]
    fn accepted_tree_bytes_are_canonical(
        order_seed in any::<u64>(),
        which in 0usize..MSO1_SUITE.len(),
        edits in proptest::collection::vec((any::<usize>(), any::<u8>()), 1..4),
    ) {
        use rand::seq::SliceRandom;
        let g = corpus::cycle(6);
        let mut order: Vec<u32> = g.vertices().collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(order_seed));
        let t = tree_from_ordering(&g, &order).unwrap();
        let f = MSO1_SUITE[which].formula();
        let forest = compute_all(&LabeledGraph::unlabeled(g.clone()), &t, &f);
        prop_assume!(forest.is_ok());
        let forest = forest.unwrap();
        for v in g.vertices() {
            let mut bytes = forest.bytes(v);
            prop_assume!(!bytes.is_empty());
            for &(i, x) in &edits {
                let i = i % bytes.len();
                bytes[i] ^= x;
            }
            let mut fresh = Engine::new(&f, id_width(6)).unwrap();
            if let Ok(id) = fresh.deserialize(&bytes) {
                prop_assert_eq!(fresh.serialize(id), bytes);
            }
        }
    }
}
