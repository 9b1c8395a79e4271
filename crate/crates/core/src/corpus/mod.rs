//! Treebank ingestion: CoNLL I/O, tree checks, vocabulary, word dropout and
//! pretrained embedding loading.

mod conll;
mod dropout;
mod embeddings;
mod projective;
mod vocab;

pub use conll::{read_conll, write_conll, WriteOptions};
pub use dropout::{replacement_probability, WordDropout};
pub use embeddings::{load_pretrained_embeddings, PretrainedOverlay};
pub use projective::{check_tree, is_projective, TreeError};
pub use vocab::{PosColumn, Vocab, VocabOptions, PAD, UNK};

use std::fs::File;
use std::io::{self, BufReader};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty corpus: {0}")]
    Empty(&'static str),
    #[error("sentence {0} has no gold arcs")]
    MissingArcs(usize),
    #[error("embedding file line {line}: {message}")]
    Embedding { line: usize, message: String },
    #[error("embedding dimension {found} does not match configured dimension {expected}")]
    EmbeddingDim { found: usize, expected: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub cpos: String,
    pub pos: String,
    pub feats: String,
}

impl Token {
    pub fn new(index: usize, form: &str, pos: &str) -> Self {
        Token {
            index,
            form: form.to_string(),
            lemma: "_".to_string(),
            cpos: pos.to_string(),
            pos: pos.to_string(),
            feats: "_".to_string(),
        }
    }

    pub fn tag(&self, column: PosColumn) -> &str {
        match column {
            PosColumn::Coarse => &self.cpos,
            PosColumn::Fine => &self.pos,
        }
    }
}

/// A labeled dependency `head -> modifier`; head 0 is the artificial root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub head: usize,
    pub modifier: usize,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    /// One arc per token, ordered by modifier; `None` for unannotated input.
    pub arcs: Option<Vec<Arc>>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// `heads()[i]` is the head of word `i + 1`.
    pub fn heads(&self) -> Option<Vec<usize>> {
        self.arcs
            .as_ref()
            .map(|arcs| arcs.iter().map(|a| a.head).collect())
    }

    pub fn labels(&self) -> Option<Vec<&str>> {
        self.arcs
            .as_ref()
            .map(|arcs| arcs.iter().map(|a| a.label.as_str()).collect())
    }

    /// Copy of the sentence carrying `arcs` instead of its own.
    pub fn with_arcs(&self, arcs: Vec<Arc>) -> Sentence {
        Sentence {
            tokens: self.tokens.clone(),
            arcs: Some(arcs),
        }
    }

    pub fn is_projective(&self) -> bool {
        self.heads().map(|h| is_projective(&h)).unwrap_or(true)
    }
}

pub fn read_conll_file(path: &Path) -> Result<Vec<Sentence>, CorpusError> {
    read_conll(BufReader::new(File::open(path)?))
}
