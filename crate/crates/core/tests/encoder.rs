mod common;

use common::{generic_network, gold_orders, projective_trees, random_projective_tree, rng, sizes};
use htparse::config::ModelConfig;
use htparse::encoder::Network;
use htparse::engine::{Action, NeuralScorer, Parser, SelectMode};
use htparse::nn::{Graph, ParamStore};
use rand::seq::SliceRandom;
use rand::Rng;

fn config(use_bilstm: bool) -> ModelConfig {
    ModelConfig {
        tree_layers: 2,
        bilstm_layers: 2,
        use_bilstm,
        ..ModelConfig::tiny()
    }
}

fn ids(seed: u64, n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut r = rng(seed);
    let s = sizes();
    (0..n).map(|_| (r.gen_range(0..s.words), r.gen_range(0..s.tags))).unzip()
}

/// Root encoding after replaying `order` through the parser.
fn incremental(net: &Network, store: &ParamStore, words: &[usize], tags: &[usize], order: &[Action], root_label: usize) -> Vec<f64> {
    let scorer = NeuralScorer::new(net, store, words, tags).unwrap();
    let mut parser = Parser::new(words.len(), scorer, SelectMode::Lazy).unwrap();
    for a in order {
        parser.apply(*a).unwrap();
    }
    let root = parser.pending().first().unwrap();
    let scorer = parser.scorer_mut();
    let enc = scorer.finalize(root, root_label).unwrap();
    scorer.graph().value(enc).to_vec()
}

fn batch(net: &Network, store: &ParamStore, words: &[usize], tags: &[usize], heads: &[usize], labels: &[usize]) -> Vec<f64> {
    let mut g = Graph::new(store);
    let v = net.word_vectors(&mut g, words, tags).unwrap();
    let enc = net.encode_tree(&mut g, &v, heads, labels).unwrap();
    g.value(enc).to_vec()
}

#[test]
fn every_action_order_matches_batch_encoding() {
    let (net, store) = generic_network(&config(true), 21);
    let mut checked = 0;
    for n in 1..=5 {
        for (t, heads) in projective_trees(n).into_iter().enumerate() {
            let mut r = rng((n * 1000 + t) as u64);
            let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..sizes().labels)).collect();
            let (words, tags) = ids(t as u64, n);
            let root = heads.iter().position(|&h| h == 0).unwrap();
            let expected = batch(&net, &store, &words, &tags, &heads, &labels);
            for order in gold_orders(&heads, &labels) {
                let got = incremental(&net, &store, &words, &tags, &order, labels[root]);
                assert_eq!(got, expected, "tree {heads:?} order {order:?}");
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 443);
}

#[test]
fn six_word_trees_match_batch_encoding() {
    let (net, store) = generic_network(&config(false), 22);
    for (t, heads) in projective_trees(6).into_iter().enumerate() {
        let mut r = rng(t as u64);
        let labels: Vec<usize> = (0..6).map(|_| r.gen_range(0..sizes().labels)).collect();
        let (words, tags) = ids(t as u64 + 7, 6);
        let root = heads.iter().position(|&h| h == 0).unwrap();
        let expected = batch(&net, &store, &words, &tags, &heads, &labels);
        let orders = gold_orders(&heads, &labels);
        let order = orders.choose(&mut r).unwrap();
        assert_eq!(incremental(&net, &store, &words, &tags, order, labels[root]), expected);
    }
}

#[test]
fn modifiers_are_folded_head_outward() {
    let (net, store) = generic_network(&config(false), 23);
    let mut r = rng(5);
    for _ in 0..200 {
        let n = r.gen_range(2..=10);
        let heads = random_projective_tree(&mut r, n);
        let labels = vec![0; n];
        let (words, tags) = ids(r.gen(), n);
        let scorer = NeuralScorer::new(&net, &store, &words, &tags).unwrap();
        let mut parser = Parser::new(n, scorer, SelectMode::Lazy).unwrap();
        let mut oracle = htparse::training::OracleState::new(&heads, &labels).unwrap();
        while !parser.is_done() {
            let options: Vec<Action> = parser
                .candidates()
                .filter(|a| a.label == 0 && oracle.is_correct(a, false))
                .collect();
            let a = *options.choose(&mut r).unwrap();
            oracle.apply(&a);
            parser.apply(a).unwrap();
            let node = parser.scorer().node(a.head()).unwrap();
            // nearest first on both sides, one LSTM step per modifier
            assert!(node.left_mods.windows(2).all(|w| w[0] > w[1]));
            assert!(node.right_mods.windows(2).all(|w| w[0] < w[1]));
            assert!(node.left_mods.iter().all(|&m| m < a.head()));
            assert!(node.right_mods.iter().all(|&m| m > a.head()));
            assert_eq!(node.left.as_ref().unwrap().steps(), 1 + node.left_mods.len());
            assert_eq!(node.right.as_ref().unwrap().steps(), 1 + node.right_mods.len());
        }
    }
}

#[test]
fn training_loss_reaches_every_participating_embedding() {
    let (net, store) = generic_network(&config(true), 24);
    let heads = [2, 0, 4, 2, 2, 7, 5];
    let labels = [1, 0, 2, 3, 1, 2, 0];
    let words = [3, 8, 9, 12, 3, 20, 25];
    let tags = [1, 2, 3, 4, 1, 5, 6];
    let order = gold_orders(&heads, &labels).remove(0);

    let scorer = NeuralScorer::new(&net, &store, &words, &tags).unwrap();
    let mut parser = Parser::new(words.len(), scorer, SelectMode::Lazy).unwrap();
    let mut terms = Vec::new();
    for a in &order {
        let others: Vec<Action> = parser.candidates().collect();
        let s = parser.scorer_mut();
        for o in &others {
            terms.push(s.score_expr(o).unwrap());
        }
        parser.apply(*a).unwrap();
    }
    let mut g = parser.into_scorer().into_graph();
    let loss = g.sum(&terms).unwrap();
    let grads = g.backward(loss).unwrap();

    let row_nonzero = |table, row: usize| {
        let t = grads.dense(&store, table);
        let cols = t.shape()[1];
        t.data()[row * cols..(row + 1) * cols].iter().any(|v| *v != 0.0)
    };
    for &w in &words {
        assert!(row_nonzero(net.word_embeddings(), w), "word {w}");
    }
    for &t in &tags {
        assert!(row_nonzero(net.pos_embeddings().unwrap(), t), "tag {t}");
    }
    // the last attachment's encoding is never scored
    let scored_labels: Vec<usize> = order[..order.len() - 1].iter().map(|a| a.label).collect();
    for l in scored_labels {
        assert!(row_nonzero(net.label_embeddings().unwrap(), l), "label {l}");
    }
}
