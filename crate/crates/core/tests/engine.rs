mod common;

use common::{generic_network, projective_trees, rng, sizes, GoldScorer};
use htparse::config::ModelConfig;
use htparse::corpus::{check_tree, is_projective};
use htparse::engine::{parse, NeuralScorer, Pending, Scorer, SelectMode};
use proptest::prelude::*;
use rand::Rng;

fn words_and_tags(seed: u64, n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut r = rng(seed);
    let s = sizes();
    (0..n).map(|_| (r.gen_range(0..s.words), r.gen_range(0..s.tags))).unzip()
}

#[test]
fn gold_scorer_rebuilds_every_small_tree() {
    for n in 1..=5 {
        for (t, heads) in projective_trees(n).into_iter().enumerate() {
            let mut r = rng(t as u64);
            let mut labels: Vec<usize> = (0..n).map(|_| r.gen_range(1..4)).collect();
            let root = heads.iter().position(|&h| h == 0).unwrap();
            labels[root] = 0;
            for salt in 0..3 {
                let scorer = GoldScorer::new(&heads, &labels, 4, salt);
                let out = parse(n, scorer, SelectMode::Lazy, 0).unwrap();
                assert_eq!(out.heads, heads);
                assert_eq!(out.labels, labels);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_networks_emit_projective_trees(seed in 0u64..1_000_000, n in 1usize..=12, bilstm in any::<bool>(), tree in any::<bool>()) {
        let cfg = ModelConfig { use_bilstm: bilstm, use_tree: tree, ..ModelConfig::tiny() };
        let (net, store) = generic_network(&cfg, seed);
        let (w, t) = words_and_tags(seed, n);
        let scorer = NeuralScorer::new(&net, &store, &w, &t).unwrap();
        let out = parse(n, scorer, SelectMode::Lazy, 0).unwrap();
        prop_assert_eq!(out.heads.len(), n);
        prop_assert!(check_tree(&out.heads).is_ok());
        prop_assert!(is_projective(&out.heads));
        prop_assert_eq!(out.actions.len(), n - 1);
        prop_assert_eq!(out.heads.iter().filter(|&&h| h == 0).count(), 1);
    }

    #[test]
    fn lazy_selection_matches_rescan_on_networks(seed in 0u64..1_000_000, n in 1usize..=14) {
        let (net, store) = generic_network(&ModelConfig::tiny(), seed);
        let (w, t) = words_and_tags(seed ^ 3, n);
        let lazy = parse(n, NeuralScorer::new(&net, &store, &w, &t).unwrap(), SelectMode::Lazy, 0).unwrap();
        let full = parse(n, NeuralScorer::new(&net, &store, &w, &t).unwrap(), SelectMode::Rescan, 0).unwrap();
        prop_assert_eq!(lazy.heads, full.heads);
        prop_assert_eq!(lazy.labels, full.labels);
        prop_assert_eq!(lazy.actions, full.actions);
    }

    #[test]
    fn scores_ignore_words_outside_the_window(seed in 0u64..1_000_000, n in 7usize..=12, at in 0usize..100, far in 0usize..100) {
        let cfg = ModelConfig { use_bilstm: false, ..ModelConfig::tiny() };
        let (net, store) = generic_network(&cfg, seed);
        let (w, t) = words_and_tags(seed, n);
        let left = 1 + at % (n - 1);
        // window covers left-2 ..= left+3
        let outside: Vec<usize> = (1..=n).filter(|&i| i + 2 < left || i > left + 3).collect();
        prop_assume!(!outside.is_empty());
        let victim = outside[far % outside.len()];
        let mut w2 = w.clone();
        w2[victim - 1] = (w[victim - 1] + 1) % sizes().words;
        let pend = Pending::new(n);
        let a = NeuralScorer::new(&net, &store, &w, &t).unwrap().score(&pend, left).unwrap();
        let b = NeuralScorer::new(&net, &store, &w2, &t).unwrap().score(&pend, left).unwrap();
        prop_assert_eq!(a, b);
    }
}
