//! A trained parser: configuration, vocabulary and parameters in one file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::config::ModelConfig;
use crate::corpus::{Arc, PretrainedOverlay, Sentence, Vocab, WordDropout};
use crate::encoder::{Network, VocabSizes};
use crate::engine::{parse, NeuralScorer, ParseOutput, SelectMode};
use crate::error::{Error, Result};
use crate::nn::serialize::{read_params, write_params, Metadata};
use crate::nn::ParamStore;

#[derive(Clone, Debug)]
pub struct Model {
    config: ModelConfig,
    vocab: Vocab,
    store: ParamStore,
    net: Network,
}

fn sizes(vocab: &Vocab) -> VocabSizes {
    VocabSizes {
        words: vocab.num_words(),
        tags: vocab.num_tags(),
        labels: vocab.num_labels(),
        labeled: vocab.labeled(),
    }
}

impl Model {
    /// Freshly initialized parameters, deterministic in `seed`.
    pub fn new(config: ModelConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        let mut store = ParamStore::new();
        let net = Network::new(&config, sizes(&vocab), &mut store, seed)?;
        Ok(Model {
            config,
            vocab,
            store,
            net,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    /// Overwrites word-embedding rows with pretrained vectors.
    pub fn apply_pretrained(&mut self, overlay: &PretrainedOverlay) -> Result<usize> {
        let table = self.net.word_embeddings();
        let dim = self.config.word_dim;
        for (id, v) in overlay {
            if v.len() != dim {
                return Err(Error::ModelMismatch(format!(
                    "pretrained vector has {} values, word_dim is {dim}",
                    v.len()
                )));
            }
            self.store.value_mut(table).row_mut(*id).copy_from_slice(v);
        }
        Ok(overlay.len())
    }

    /// Word and tag ids for a sentence, with word dropout applied.
    pub fn encode_input(&self, sentence: &Sentence, dropout: &mut WordDropout) -> (Vec<usize>, Vec<usize>) {
        let column = self.vocab.pos_column();
        sentence
            .tokens
            .iter()
            .map(|t| {
                let w = dropout.replace(self.vocab.word_id(&t.form), &self.vocab);
                (w, self.vocab.tag_id(t.tag(column)))
            })
            .unzip()
    }

    /// Gold `(heads, label ids)`; relations unseen in training are an error.
    pub fn gold(&self, sentence: &Sentence) -> Result<(Vec<usize>, Vec<usize>)> {
        let arcs = sentence
            .arcs
            .as_ref()
            .ok_or_else(|| Error::Training("sentence has no gold arcs".into()))?;
        let heads = arcs.iter().map(|a| a.head).collect();
        let labels = arcs
            .iter()
            .map(|a| {
                self.vocab
                    .label_id(&a.label)
                    .ok_or_else(|| Error::Training(format!("unknown relation {:?}", a.label)))
            })
            .collect::<Result<_>>()?;
        Ok((heads, labels))
    }

    pub fn parse_ids(&self, words: &[usize], tags: &[usize], mode: SelectMode) -> Result<ParseOutput> {
        if words.is_empty() {
            return Ok(ParseOutput {
                heads: Vec::new(),
                labels: Vec::new(),
                actions: Vec::new(),
            });
        }
        let scorer = NeuralScorer::for_inference(&self.net, &self.store, words, tags)?;
        parse(words.len(), scorer, mode, self.vocab.root_label())
    }

    /// The sentence with predicted arcs in place of any it had.
    pub fn parse(&self, sentence: &Sentence) -> Result<Sentence> {
        let (words, tags) = self.encode_input(sentence, &mut WordDropout::disabled());
        let out = self.parse_ids(&words, &tags, SelectMode::Lazy)?;
        let arcs = out
            .heads
            .iter()
            .zip(&out.labels)
            .enumerate()
            .map(|(i, (&head, &label))| Arc {
                head,
                modifier: i + 1,
                label: self.vocab.label(label).to_string(),
            })
            .collect();
        Ok(sentence.with_arcs(arcs))
    }

    /// Parses many sentences, in parallel when the `parallel` feature is on.
    pub fn parse_all(&self, sentences: &[Sentence]) -> Result<Vec<Sentence>> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            sentences.par_iter().map(|s| self.parse(s)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            sentences.iter().map(|s| self.parse(s)).collect()
        }
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut meta = Metadata::new();
        self.config.to_metadata(&mut meta);
        self.vocab.to_metadata(&mut meta);
        write_params(w, &meta, &self.store)?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let (meta, store) = read_params(r)?;
        let config = ModelConfig::from_metadata(&meta)?;
        let vocab = Vocab::from_metadata(&meta).map_err(Error::ModelMismatch)?;
        let net = Network::bind(&config, sizes(&vocab), &store).map_err(|e| Error::ModelMismatch(e.to_string()))?;
        Ok(Model {
            config,
            vocab,
            store,
            net,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_conll, VocabOptions};

    const DATA: &str = "1\tThe\t_\tDT\tDT\t_\t2\tdet\t_\t_
2\tdog\t_\tNN\tNN\t_\t3\tnsubj\t_\t_
3\tbarks\t_\tVB\tVB\t_\t0\troot\t_\t_

1\tDogs\t_\tNN\tNN\t_\t2\tnsubj\t_\t_
2\tbark\t_\tVB\tVB\t_\t0\troot\t_\t_
";

    fn model() -> Model {
        let sents = read_conll(DATA.as_bytes()).unwrap();
        let vocab = Vocab::build(&sents, &VocabOptions::default()).unwrap();
        Model::new(ModelConfig::tiny(), vocab, 3).unwrap()
    }

    #[test]
    fn save_load_is_bitwise() {
        let m = model();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = Model::read(buf.as_slice()).unwrap();
        assert!(back.params().bitwise_eq(m.params()));
        assert_eq!(back.vocab(), m.vocab());
        assert_eq!(back.config(), m.config());
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn parse_gives_tree_with_root_label() {
        let m = model();
        let s = &read_conll(DATA.as_bytes()).unwrap()[0];
        let out = m.parse(s).unwrap();
        let arcs = out.arcs.unwrap();
        assert_eq!(arcs.len(), 3);
        assert_eq!(arcs.iter().filter(|a| a.head == 0).count(), 1);
        assert!(arcs.iter().any(|a| a.head == 0 && a.label == "root"));
    }

    #[test]
    fn unknown_words_map_to_unk() {
        let m = model();
        let s = &read_conll("1\tzebra\t_\tQQ\tQQ\t_\t0\troot\t_\t_\n".as_bytes()).unwrap()[0];
        let (w, t) = m.encode_input(s, &mut WordDropout::disabled());
        assert_eq!((w, t), (vec![crate::corpus::UNK], vec![crate::corpus::UNK]));
    }

    #[test]
    fn pretrained_rows_overwrite() {
        let mut m = model();
        let id = m.vocab().word_id("dog");
        m.apply_pretrained(&vec![(id, vec![0.5; 8])]).unwrap();
        let t = m.params().value(m.network().word_embeddings());
        assert_eq!(t.row(id), &[0.5; 8]);
        assert!(m.apply_pretrained(&vec![(id, vec![0.5; 3])]).is_err());
    }

    #[test]
    fn mismatched_config_rejected() {
        let m = model();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let (mut meta, store) = read_params(buf.as_slice()).unwrap();
        meta.set("model.tree_hidden", 9);
        let mut bad = Vec::new();
        write_params(&mut bad, &meta, &store).unwrap();
        assert!(matches!(Model::read(bad.as_slice()), Err(Error::ModelMismatch(_))));
    }
}
