mod common;

use common::{crossing_free, rng};
use htparse::config::ModelConfig;
use htparse::corpus::{
    is_projective, read_conll, write_conll, Arc, Sentence, Token, Vocab, VocabOptions, WordDropout, WriteOptions,
};
use htparse::{sample, Model};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

/// Any tree over `n` words, projective or not.
fn random_tree<R: Rng>(r: &mut R, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(r);
    let mut heads = vec![0; n];
    for k in 1..n {
        heads[order[k] - 1] = order[r.gen_range(0..k)];
    }
    heads
}

fn sentence_strategy() -> impl Strategy<Value = Sentence> {
    (1usize..12, any::<u64>()).prop_map(|(n, seed)| {
        let mut r = rng(seed);
        let forms = ["a", "Dog", "ran", "x_y", "3.5", "Zürich", "--", "(", "''", "über"];
        let tags = ["DT", "NN", "VB", ",", "CD", "-LRB-"];
        let labels = ["det", "nsubj", "root", "punct", "prep:by"];
        let heads = random_tree(&mut r, n);
        let tokens = (1..=n)
            .map(|i| Token::new(i, forms[r.gen_range(0..forms.len())], tags[r.gen_range(0..tags.len())]))
            .collect();
        let arcs = heads
            .iter()
            .enumerate()
            .map(|(i, &head)| Arc {
                head,
                modifier: i + 1,
                label: labels[r.gen_range(0..labels.len())].to_string(),
            })
            .collect();
        Sentence {
            tokens,
            arcs: Some(arcs),
        }
    })
}

proptest! {
    #[test]
    fn conll_write_then_read_is_identity(sents in prop::collection::vec(sentence_strategy(), 1..6)) {
        let mut buf = Vec::new();
        write_conll(&mut buf, &sents, &WriteOptions::default()).unwrap();
        let back = read_conll(buf.as_slice()).unwrap();
        prop_assert_eq!(back, sents);
    }

    #[test]
    fn disabled_dropout_never_replaces(word in 0usize..200, reps in 1usize..50) {
        let vocab = Vocab::build(&sample::generate(20, 3), &VocabOptions::default()).unwrap();
        let w = word % vocab.num_words();
        let mut d = WordDropout::disabled();
        for _ in 0..reps {
            prop_assert_eq!(d.replace(w, &vocab), w);
        }
    }
}

#[test]
fn projectivity_matches_crossing_check() {
    let mut r = rng(11);
    let mut non_projective = 0;
    for _ in 0..10_000 {
        let n = r.gen_range(1..=10);
        let heads = random_tree(&mut r, n);
        let fast = is_projective(&heads);
        assert_eq!(fast, crossing_free(&heads), "{heads:?}");
        non_projective += usize::from(!fast);
    }
    assert!(non_projective > 1000);
}

#[test]
fn vocabulary_ids_survive_model_file() {
    let sents = sample::generate(40, 5);
    let vocab = Vocab::build(&sents, &VocabOptions::default()).unwrap();
    let model = Model::new(ModelConfig::tiny(), vocab, 1).unwrap();
    let mut buf = Vec::new();
    model.write(&mut buf).unwrap();
    let back = Model::read(buf.as_slice()).unwrap();
    for s in &sents {
        for (t, a) in s.tokens.iter().zip(s.arcs.as_ref().unwrap()) {
            assert_eq!(back.vocab().word_id(&t.form), model.vocab().word_id(&t.form));
            assert_eq!(back.vocab().tag_id(&t.cpos), model.vocab().tag_id(&t.cpos));
            assert_eq!(back.vocab().label_id(&a.label), model.vocab().label_id(&a.label));
        }
    }
    for id in 0..model.vocab().num_words() {
        assert_eq!(back.vocab().count(id), model.vocab().count(id));
    }
}
