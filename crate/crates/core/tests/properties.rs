//! Property tests over random small graphs: dictionary injectivity, context
//! blindness/sensitivity, permutation invariance, oracle equivalence of the
//! vectorized kernel against brute-force pair counting, kernel-in-h
//! monotonicity, Cauchy-Schwarz, context collapse, and positive
//! semi-definiteness of corpus Gram matrices.

use std::collections::{HashMap, HashSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cwlk_core::kernel::{brute_force_kernel, featurize_corpus, kernel_matrix, kernel_value};
use cwlk_core::{Mode, Node, Prg, Relabeler};

fn arb_prg(max_nodes: usize) -> impl Strategy<Value = Prg> {
    (1..=max_nodes).prop_flat_map(|n| {
        let node = (
            prop::sample::select(vec!["a", "b", "c", "d", "e"]),
            prop::collection::hash_set(prop::sample::select(vec!["c1", "c2", "c3"]), 1..=2),
        );
        let nodes = prop::collection::vec(node, n);
        let edges =
            prop::collection::hash_set((0..n as u32, 0..n as u32), 0..=(2 * n).min(n * n));
        (nodes, edges).prop_map(|(nodes, edges)| {
            let nodes = nodes
                .into_iter()
                .enumerate()
                .map(|(i, (label, contexts))| {
                    Node::new(format!("n{i}"), label, contexts.into_iter().collect::<Vec<_>>())
                })
                .collect();
            Prg::new(nodes, edges.into_iter().collect(), None).expect("generated graph is valid")
        })
    })
}

/// `g` with its nodes re-declared in a seeded random order (edges remapped,
/// ids and labels carried along).
fn permuted(g: &Prg, seed: u64) -> Prg {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut new_index = vec![0u32; n];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new as u32;
    }
    let nodes: Vec<Node> = order.iter().map(|&old| g.nodes()[old].clone()).collect();
    let edges: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .map(|&(s, d)| (new_index[s as usize], new_index[d as usize]))
        .collect();
    Prg::new(nodes, edges, g.class_tag()).expect("permutation preserves validity")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dictionary_is_a_bijection_over_random_corpora(
        graphs in prop::collection::vec(arb_prg(10), 1..4),
        h in 0usize..4,
    ) {
        let mut relabeler = Relabeler::new();
        for (k, g) in graphs.iter().enumerate() {
            relabeler.contextual_relabel(g, &format!("g{k}"), h);
        }
        for dict in [relabeler.wl_dictionary(), relabeler.contextual_dictionary()] {
            let mut keys = HashSet::new();
            let mut codes = HashSet::new();
            for (i, raw, code) in dict.iter() {
                prop_assert!(keys.insert((i, raw.to_owned())));
                prop_assert!(codes.insert(code));
            }
            prop_assert_eq!(keys.len(), dict.len());
        }
    }

    #[test]
    fn wl_labels_ignore_contexts_and_contextual_labels_track_them(
        g in arb_prg(10),
        h in 0usize..4,
    ) {
        // Retag node 0 with a context no generated graph uses.
        let mut nodes = g.nodes().to_vec();
        nodes[0].contexts = vec!["zz".to_owned()];
        let altered = Prg::new(nodes, g.edges().to_vec(), None).unwrap();

        let mut relabeler = Relabeler::new();
        let before = relabeler.contextual_relabel(&g, "before", h);
        let after = relabeler.contextual_relabel(&altered, "after", h);
        for i in 0..=h {
            for u in 0..g.node_count() {
                prop_assert_eq!(before.wl_code(i, u), after.wl_code(i, u));
                if u == 0 {
                    prop_assert_ne!(before.contextual_code(i, u), after.contextual_code(i, u));
                } else {
                    prop_assert_eq!(before.contextual_code(i, u), after.contextual_code(i, u));
                }
            }
        }
    }

    #[test]
    fn raw_multisets_survive_node_permutation(
        g in arb_prg(10),
        h in 0usize..4,
        seed in any::<u64>(),
    ) {
        let gp = permuted(&g, seed);
        let mut relabeler = Relabeler::new();
        let s = relabeler.contextual_relabel(&g, "g", h);
        let sp = relabeler.contextual_relabel(&gp, "gp", h);
        for i in 0..=h {
            let mut a: Vec<&str> =
                (0..g.node_count()).map(|u| relabeler.contextual_raw(&s, i, u)).collect();
            let mut b: Vec<&str> =
                (0..g.node_count()).map(|u| relabeler.contextual_raw(&sp, i, u)).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn kernel_values_survive_node_permutation(
        g in arb_prg(10),
        g2 in arb_prg(10),
        h in 0usize..3,
        seed in any::<u64>(),
    ) {
        for mode in [Mode::Wl, Mode::Contextual] {
            let original = brute_force_kernel(&g, &g2, h, mode);
            let moved = brute_force_kernel(&permuted(&g, seed), &g2, h, mode);
            prop_assert_eq!(original, moved);
        }
    }

    #[test]
    fn vectorized_kernel_equals_brute_force(
        g in arb_prg(15),
        g2 in arb_prg(15),
        h in 0usize..4,
    ) {
        for mode in [Mode::Wl, Mode::Contextual] {
            let corpus = [g.clone(), g2.clone()];
            let m = kernel_matrix(&corpus, None, h, mode);
            prop_assert_eq!(m.get(0, 1) as u64, brute_force_kernel(&g, &g2, h, mode));
            prop_assert_eq!(m.get(0, 0) as u64, brute_force_kernel(&g, &g, h, mode));
            prop_assert_eq!(m.get(1, 1) as u64, brute_force_kernel(&g2, &g2, h, mode));
            prop_assert_eq!(m.get(0, 1), m.get(1, 0));
        }
    }

    #[test]
    fn kernel_is_monotone_in_height(g in arb_prg(12), g2 in arb_prg(12)) {
        for mode in [Mode::Wl, Mode::Contextual] {
            let mut prev = 0u64;
            for h in 0..=3 {
                let k = brute_force_kernel(&g, &g2, h, mode);
                prop_assert!(k >= prev, "k^({h}) = {k} < k^({}) = {prev}", h.saturating_sub(1));
                prev = k;
            }
        }
    }

    #[test]
    fn cauchy_schwarz_holds(g in arb_prg(12), g2 in arb_prg(12), h in 0usize..3) {
        for mode in [Mode::Wl, Mode::Contextual] {
            let cross = brute_force_kernel(&g, &g2, h, mode) as u128;
            let a = brute_force_kernel(&g, &g, h, mode) as u128;
            let b = brute_force_kernel(&g2, &g2, h, mode) as u128;
            prop_assert!(cross * cross <= a * b);
        }
    }

    #[test]
    fn contextual_counts_sum_to_height_times_nodes(g in arb_prg(12), h in 0usize..4) {
        let corpus = [g.clone()];
        let (_, _, vectors) = featurize_corpus(&corpus, None, h, Mode::Contextual);
        prop_assert_eq!(vectors[0].total(), ((h + 1) * g.node_count()) as u64);
    }

    #[test]
    fn uniform_context_collapses_cwl_to_wl(
        graphs in prop::collection::vec(arb_prg(10), 2..5),
        h in 0usize..3,
    ) {
        let collapsed: Vec<Prg> =
            graphs.iter().map(|g| g.with_uniform_context("only")).collect();
        let cwl = kernel_matrix(&collapsed, None, h, Mode::Contextual);
        let wl = kernel_matrix(&collapsed, None, h, Mode::Wl);
        prop_assert_eq!(cwl.values(), wl.values());
    }

    #[test]
    fn gram_matrices_are_positive_semidefinite(
        graphs in prop::collection::vec(arb_prg(8), 3..8),
        h in 0usize..3,
    ) {
        let m = kernel_matrix(&graphs, None, h, Mode::Contextual);
        let k = m.dim();
        let dm = nalgebra::DMatrix::from_row_slice(k, k, m.values());
        let eigen = nalgebra::SymmetricEigen::new(dm);
        let max = eigen.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
        let min = eigen.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(min >= -1e-8 * max.max(1.0), "min {min} vs max {max}");
    }

    #[test]
    fn contextual_labels_are_a_function_of_context_set_and_wl_label(
        g in arb_prg(12),
        h in 0usize..3,
    ) {
        let mut relabeler = Relabeler::new();
        let seq = relabeler.contextual_relabel(&g, "g", h);
        let mut seen: HashMap<(usize, Vec<String>, u32), u32> = HashMap::new();
        for i in 0..=h {
            for u in 0..g.node_count() {
                let key = (
                    i,
                    g.nodes()[u].contexts.clone(),
                    seq.wl_code(i, u).index() as u32,
                );
                let gamma = seq.contextual_code(i, u).index() as u32;
                if let Some(&prev) = seen.get(&key) {
                    prop_assert_eq!(prev, gamma);
                } else {
                    seen.insert(key, gamma);
                }
            }
        }
    }
}

#[test]
fn relabel_then_featurize_is_deterministic_across_fresh_relabelers() {
    let g = cwlk_core::fixtures::geinimi();
    let run = || {
        let (_, vocab, vectors) = featurize_corpus(&[g.clone()], None, 2, Mode::Contextual);
        (vocab.hash_hex(), vectors[0].counts().to_vec())
    };
    assert_eq!(run(), run());
}

#[test]
fn kernel_value_is_commutative_on_fixtures() {
    let corpus = [cwlk_core::fixtures::geinimi(), cwlk_core::fixtures::yahoo_weather()];
    let (_, _, v) = featurize_corpus(&corpus, None, 2, Mode::Contextual);
    assert_eq!(kernel_value(&v[0], &v[1]).unwrap(), kernel_value(&v[1], &v[0]).unwrap());
}
