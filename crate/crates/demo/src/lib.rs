//! Browser bindings: synthetic treebank samples, a parser that can be stepped
//! one attachment at a time, and the word dropout curve.
//!
//! Everything is plain Rust returning JSON strings; the `#[wasm_bindgen]`
//! wrappers at the bottom only convert errors.

use std::collections::HashMap;

use htparse::config::ModelConfig;
use htparse::corpus::{Arc, Sentence, Token, Vocab, VocabOptions, WordDropout, replacement_probability};
use htparse::engine::{Dir, NeuralScorer, Parser, SelectMode};
use htparse::training::{train, TrainConfig};
use htparse::{sample, Model};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize, Debug, PartialEq)]
pub struct Tree {
    pub words: Vec<String>,
    pub tags: Vec<String>,
    /// 1-based heads, 0 for the root.
    pub heads: Vec<usize>,
    pub labels: Vec<String>,
}

fn tree_of(s: &Sentence) -> Tree {
    Tree {
        words: s.tokens.iter().map(|t| t.form.clone()).collect(),
        tags: s.tokens.iter().map(|t| t.cpos.clone()).collect(),
        heads: s.heads().unwrap_or_default(),
        labels: s
            .labels()
            .map(|ls| ls.into_iter().map(String::from).collect())
            .unwrap_or_default(),
    }
}

pub fn sample_trees_json(count: usize, seed: u64) -> String {
    let trees: Vec<Tree> = sample::generate(count, seed).iter().map(tree_of).collect();
    serde_json::to_string(&trees).expect("trees serialize")
}

#[derive(Serialize, Debug)]
pub struct CurvePoint {
    pub count: usize,
    pub expected: f64,
    pub observed: f64,
}

/// Replacement probability against word count, both the closed form and the
/// frequency seen over `draws` samples.
pub fn dropout_curve_points(alpha: f64, max_count: usize, draws: usize, seed: u64) -> Result<Vec<CurvePoint>, String> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(format!("alpha must be positive, got {alpha}"));
    }
    let max_count = max_count.clamp(1, 200);
    let mut sents = Vec::new();
    for c in 1..=max_count {
        for _ in 0..c {
            sents.push(Sentence {
                tokens: vec![Token::new(1, &format!("w{c}"), "X")],
                arcs: Some(vec![Arc {
                    head: 0,
                    modifier: 1,
                    label: "root".into(),
                }]),
            });
        }
    }
    let vocab = Vocab::build(&sents, &VocabOptions::default()).map_err(|e| e.to_string())?;
    let mut d = WordDropout::new(alpha, seed);
    Ok((1..=max_count)
        .map(|c| {
            let id = vocab.word_id(&format!("w{c}"));
            let hits = (0..draws).filter(|_| d.replace(id, &vocab) != id).count();
            CurvePoint {
                count: c,
                expected: replacement_probability(alpha, c),
                observed: if draws == 0 { 0.0 } else { hits as f64 / draws as f64 },
            }
        })
        .collect())
}

#[derive(Serialize, Debug, Clone)]
pub struct Move {
    pub left: usize,
    pub right: usize,
    pub head: usize,
    pub modifier: usize,
    pub label: String,
    pub score: f64,
}

#[derive(Serialize, Debug)]
pub struct Step {
    /// Items still waiting for a head, in order.
    pub pending: Vec<usize>,
    /// Best labeled action per adjacent pair and direction.
    pub options: Vec<Move>,
    pub chosen: Move,
}

#[derive(Serialize, Debug)]
pub struct Trace {
    pub words: Vec<String>,
    pub tags: Vec<String>,
    pub steps: Vec<Step>,
    pub heads: Vec<usize>,
    pub labels: Vec<String>,
}

#[derive(Serialize, Debug)]
pub struct EpochLine {
    pub epoch: usize,
    pub loss: f64,
    pub dev_uas: Option<f64>,
}

/// A small model trained on generated sentences.
pub struct Demo {
    model: Model,
    tags: HashMap<String, String>,
    epochs: Vec<EpochLine>,
}

fn demo_config() -> ModelConfig {
    ModelConfig {
        word_dim: 24,
        pos_dim: 8,
        rel_dim: 8,
        proj_dim: 24,
        tree_hidden: 24,
        tree_layers: 1,
        bilstm_hidden: 12,
        bilstm_layers: 1,
        unlabeled_hidden: 24,
        labeled_hidden: 24,
        window: 2,
        use_bilstm: true,
        use_pos: true,
        use_tree: true,
    }
}

impl Demo {
    pub fn train(sentences: usize, epochs: usize, seed: u64) -> Result<Demo, String> {
        let (train_set, dev) = sample::generate_split(sentences.max(1), 40, seed);
        let vocab = Vocab::build(&train_set, &VocabOptions::default()).map_err(|e| e.to_string())?;
        let mut model = Model::new(demo_config(), vocab, seed).map_err(|e| e.to_string())?;
        let cfg = TrainConfig {
            epochs,
            seed,
            ..TrainConfig::default()
        };
        let mut lines = Vec::new();
        train(&mut model, &train_set, Some(&dev), &cfg, |r| {
            lines.push(EpochLine {
                epoch: r.epoch,
                loss: r.mean_loss,
                dev_uas: r.dev_uas,
            })
        })
        .map_err(|e| e.to_string())?;

        // most frequent tag per word, for untagged input
        let mut seen: HashMap<(String, String), usize> = HashMap::new();
        for s in &train_set {
            for t in &s.tokens {
                *seen.entry((t.form.clone(), t.cpos.clone())).or_default() += 1;
            }
        }
        let mut best: HashMap<String, (usize, String)> = HashMap::new();
        for ((w, t), c) in seen {
            let e = best.entry(w).or_insert((0, String::new()));
            if c > e.0 || (c == e.0 && t < e.1) {
                *e = (c, t);
            }
        }
        let tags = best.into_iter().map(|(w, (_, t))| (w, t)).collect();
        Ok(Demo {
            model,
            tags,
            epochs: lines,
        })
    }

    pub fn epochs(&self) -> &[EpochLine] {
        &self.epochs
    }

    /// Splits `text` on whitespace; `word/TAG` sets a tag explicitly, other
    /// words get their most frequent training tag.
    pub fn tokenize(&self, text: &str) -> Vec<(String, String)> {
        text.split_whitespace()
            .map(|piece| match piece.rsplit_once('/') {
                Some((w, t)) if !w.is_empty() && !t.is_empty() => (w.to_string(), t.to_string()),
                _ => {
                    let tag = self.tags.get(piece).cloned().unwrap_or_else(|| "NN".into());
                    (piece.to_string(), tag)
                }
            })
            .collect()
    }

    pub fn trace(&self, text: &str) -> Result<Trace, String> {
        let toks = self.tokenize(text);
        if toks.is_empty() {
            return Err("no words".into());
        }
        let vocab = self.model.vocab();
        let words: Vec<usize> = toks.iter().map(|(w, _)| vocab.word_id(w)).collect();
        let tags: Vec<usize> = toks.iter().map(|(_, t)| vocab.tag_id(t)).collect();
        let n = words.len();
        let scorer = NeuralScorer::for_inference(self.model.network(), self.model.params(), &words, &tags)
            .map_err(|e| e.to_string())?;
        let mut parser = Parser::new(n, scorer, SelectMode::Lazy).map_err(|e| e.to_string())?;
        let to_move = |a: &htparse::engine::Action| Move {
            left: a.left,
            right: a.right,
            head: a.head(),
            modifier: a.modifier(),
            label: vocab.label(a.label).to_string(),
            score: a.score,
        };
        let mut heads = vec![0; n];
        let mut labels = vec![vocab.label(vocab.root_label()).to_string(); n];
        let mut steps = Vec::new();
        while !parser.is_done() {
            let mut options: Vec<Move> = Vec::new();
            let mut by_pair: HashMap<(usize, Dir), htparse::engine::Action> = HashMap::new();
            for a in parser.candidates() {
                let e = by_pair.entry((a.left, a.dir)).or_insert(a);
                if a.score > e.score {
                    *e = a;
                }
            }
            let mut picked: Vec<_> = by_pair.into_values().collect();
            picked.sort_by_key(|a| (a.left, a.dir.index()));
            options.extend(picked.iter().map(to_move));
            let best = parser.best().ok_or("no action available")?;
            let pending = parser.pending().iter().collect();
            parser.apply(best).map_err(|e| e.to_string())?;
            heads[best.modifier() - 1] = best.head();
            labels[best.modifier() - 1] = vocab.label(best.label).to_string();
            steps.push(Step {
                pending,
                options,
                chosen: to_move(&best),
            });
        }
        Ok(Trace {
            words: toks.iter().map(|(w, _)| w.clone()).collect(),
            tags: toks.into_iter().map(|(_, t)| t).collect(),
            steps,
            heads,
            labels,
        })
    }
}

#[wasm_bindgen]
pub fn sample_trees(count: u32, seed: u32) -> String {
    sample_trees_json(count as usize, seed as u64)
}

#[wasm_bindgen]
pub fn dropout_curve(alpha: f64, max_count: u32, draws: u32, seed: u32) -> Result<String, JsError> {
    let points = dropout_curve_points(alpha, max_count as usize, draws as usize, seed as u64).map_err(|e| JsError::new(&e))?;
    Ok(serde_json::to_string(&points).expect("points serialize"))
}

#[wasm_bindgen]
pub struct DemoParser {
    inner: Demo,
}

#[wasm_bindgen]
impl DemoParser {
    /// Trains on `sentences` generated sentences for `epochs` epochs.
    #[wasm_bindgen(constructor)]
    pub fn new(sentences: u32, epochs: u32, seed: u32) -> Result<DemoParser, JsError> {
        let inner = Demo::train(sentences as usize, epochs as usize, seed as u64).map_err(|e| JsError::new(&e))?;
        Ok(DemoParser { inner })
    }

    pub fn training_log(&self) -> String {
        serde_json::to_string(self.inner.epochs()).expect("log serializes")
    }

    pub fn trace(&self, text: &str) -> Result<String, JsError> {
        let t = self.inner.trace(text).map_err(|e| JsError::new(&e))?;
        Ok(serde_json::to_string(&t).expect("trace serializes"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_follows_the_closed_form() {
        let pts = dropout_curve_points(0.25, 6, 20_000, 3).unwrap();
        assert_eq!(pts.len(), 6);
        for p in &pts {
            assert_eq!(p.expected, 0.25 / (p.count as f64 + 0.25));
            let se = (p.expected * (1.0 - p.expected) / 20_000.0).sqrt();
            assert!((p.observed - p.expected).abs() < 4.0 * se, "{p:?}");
        }
        assert!(dropout_curve_points(0.0, 3, 10, 1).is_err());
    }

    #[test]
    fn explicit_tags_win_over_the_lookup() {
        let demo = Demo::train(20, 0, 1).unwrap();
        let toks = demo.tokenize("the dog/VB zzz");
        assert_eq!(toks[0], ("the".to_string(), "DT".to_string()));
        assert_eq!(toks[1].1, "VB");
        assert_eq!(toks[2].1, "NN");
    }
}
