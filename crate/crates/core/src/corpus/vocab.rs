use std::collections::HashMap;

use super::{CorpusError, Sentence};
use crate::nn::serialize::Metadata;

/// Reserved id of the unknown-word (and unknown-tag) symbol.
pub const UNK: usize = 0;
/// Reserved id of the padding symbol.
pub const PAD: usize = 1;
const RESERVED: [&str; 2] = ["<unk>", "<pad>"];

/// Which CoNLL column supplies the part-of-speech input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PosColumn {
    /// Column 4, CPOSTAG.
    #[default]
    Coarse,
    /// Column 5, POSTAG.
    Fine,
}

#[derive(Clone, Debug)]
pub struct VocabOptions {
    pub pos_column: PosColumn,
    pub lowercase: bool,
    /// When false all relations collapse into `placeholder_label`.
    pub labeled: bool,
    pub placeholder_label: String,
}

impl Default for VocabOptions {
    fn default() -> Self {
        VocabOptions {
            pos_column: PosColumn::Coarse,
            lowercase: true,
            labeled: true,
            placeholder_label: "dep".to_string(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Interner {
    items: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn with_reserved(reserved: &[&str]) -> Self {
        let mut i = Interner::default();
        for r in reserved {
            i.intern(r);
        }
        i
    }

    fn intern(&mut self, s: &str) -> usize {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        self.items.push(s.to_string());
        self.index.insert(s.to_string(), self.items.len() - 1);
        self.items.len() - 1
    }

    fn get(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// Dense ids for forms, tags and relations plus raw training counts of forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    words: Interner,
    counts: Vec<usize>,
    tags: Interner,
    labels: Interner,
    root_label: usize,
    pos_column: PosColumn,
    lowercase: bool,
    labeled: bool,
}

impl Vocab {
    pub fn build(sentences: &[Sentence], opts: &VocabOptions) -> Result<Vocab, CorpusError> {
        if sentences.is_empty() {
            return Err(CorpusError::Empty("no training sentences"));
        }
        let mut words = Interner::with_reserved(&RESERVED);
        let mut counts = vec![0; RESERVED.len()];
        let mut tags = Interner::with_reserved(&RESERVED);
        let mut labels = Interner::default();
        let mut root_counts: HashMap<String, usize> = HashMap::new();
        if !opts.labeled {
            labels.intern(&opts.placeholder_label);
        }
        for (k, s) in sentences.iter().enumerate() {
            let arcs = s.arcs.as_ref().ok_or(CorpusError::MissingArcs(k))?;
            for (t, a) in s.tokens.iter().zip(arcs) {
                let key = normalize(&t.form, opts.lowercase);
                let id = words.intern(&key);
                if id == counts.len() {
                    counts.push(0);
                }
                counts[id] += 1;
                tags.intern(t.tag(opts.pos_column));
                if opts.labeled {
                    labels.intern(&a.label);
                    if a.head == 0 {
                        *root_counts.entry(a.label.clone()).or_default() += 1;
                    }
                }
            }
        }
        let root_label = if opts.labeled {
            let best = root_counts
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
                .map(|(l, _)| l.clone())
                .ok_or(CorpusError::Empty("no root arcs"))?;
            labels.get(&best).unwrap()
        } else {
            0
        };
        Ok(Vocab {
            words,
            counts,
            tags,
            labels,
            root_label,
            pos_column: opts.pos_column,
            lowercase: opts.lowercase,
            labeled: opts.labeled,
        })
    }

    /// Embedding-table size for forms (reserved symbols included).
    pub fn num_words(&self) -> usize {
        self.words.items.len()
    }

    pub fn num_tags(&self) -> usize {
        self.tags.items.len()
    }

    /// Number of relations `L`.
    pub fn num_labels(&self) -> usize {
        self.labels.items.len()
    }

    pub fn pos_column(&self) -> PosColumn {
        self.pos_column
    }

    pub fn labeled(&self) -> bool {
        self.labeled
    }

    pub fn word_id(&self, form: &str) -> usize {
        self.words.get(&normalize(form, self.lowercase)).unwrap_or(UNK)
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words.items[id]
    }

    /// Training-corpus count of a form id; 0 for reserved symbols.
    pub fn count(&self, id: usize) -> usize {
        self.counts.get(id).copied().unwrap_or(0)
    }

    pub fn tag_id(&self, tag: &str) -> usize {
        self.tags.get(tag).unwrap_or(UNK)
    }

    pub fn label_id(&self, label: &str) -> Option<usize> {
        if !self.labeled {
            return Some(0);
        }
        self.labels.get(label)
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels.items[id]
    }

    /// Relation used for the final attachment to the root.
    pub fn root_label(&self) -> usize {
        self.root_label
    }

    pub fn to_metadata(&self, meta: &mut Metadata) {
        meta.set("vocab.pos_column", match self.pos_column {
            PosColumn::Coarse => "cpos",
            PosColumn::Fine => "pos",
        });
        meta.set("vocab.lowercase", self.lowercase);
        meta.set("vocab.labeled", self.labeled);
        meta.set("vocab.words", self.words.items.len());
        for (i, w) in self.words.items.iter().enumerate() {
            meta.set(format!("vocab.word.{i}"), format!("{}\t{}", self.counts[i], w));
        }
        meta.set("vocab.tags", self.tags.items.len());
        for (i, t) in self.tags.items.iter().enumerate() {
            meta.set(format!("vocab.tag.{i}"), t);
        }
        meta.set("vocab.labels", self.labels.items.len());
        for (i, l) in self.labels.items.iter().enumerate() {
            meta.set(format!("vocab.label.{i}"), l);
        }
        meta.set("vocab.root_label", self.root_label);
    }

    pub fn from_metadata(meta: &Metadata) -> Result<Vocab, String> {
        let get = |k: &str| meta.get(k).ok_or_else(|| format!("missing metadata key {k}"));
        let num = |k: &str| -> Result<usize, String> { get(k)?.parse().map_err(|_| format!("bad value for {k}")) };
        let flag = |k: &str| -> Result<bool, String> { get(k)?.parse().map_err(|_| format!("bad value for {k}")) };
        let pos_column = match get("vocab.pos_column")? {
            "cpos" => PosColumn::Coarse,
            "pos" => PosColumn::Fine,
            other => return Err(format!("unknown pos column {other:?}")),
        };
        let mut words = Interner::default();
        let mut counts = Vec::new();
        for i in 0..num("vocab.words")? {
            let v = get(&format!("vocab.word.{i}"))?;
            let (c, w) = v.split_once('\t').ok_or_else(|| format!("bad word entry {i}"))?;
            counts.push(c.parse().map_err(|_| format!("bad count for word {i}"))?);
            if words.intern(w) != i {
                return Err(format!("duplicate word {w:?}"));
            }
        }
        let mut tags = Interner::default();
        for i in 0..num("vocab.tags")? {
            tags.intern(get(&format!("vocab.tag.{i}"))?);
        }
        let mut labels = Interner::default();
        for i in 0..num("vocab.labels")? {
            labels.intern(get(&format!("vocab.label.{i}"))?);
        }
        let root_label = num("vocab.root_label")?;
        if root_label >= labels.items.len() {
            return Err("root label out of range".into());
        }
        Ok(Vocab {
            words,
            counts,
            tags,
            labels,
            root_label,
            pos_column,
            lowercase: flag("vocab.lowercase")?,
            labeled: flag("vocab.labeled")?,
        })
    }
}

fn normalize(form: &str, lowercase: bool) -> String {
    if lowercase {
        form.to_lowercase()
    } else {
        form.to_string()
    }
}
