//! CoNLL-X style reading and writing.
//!
//! Columns: ID FORM LEMMA CPOSTAG POSTAG FEATS HEAD DEPREL [PHEAD PDEPREL ...].
//! Fields are tab separated; lines without tabs are split on whitespace.

use std::io::{BufRead, Write};

use super::{Arc, CorpusError, Sentence, Token};
use crate::corpus::projective::{check_tree, TreeError};

pub fn read_conll<R: BufRead>(reader: R) -> Result<Vec<Sentence>, CorpusError> {
    let mut sentences = Vec::new();
    let mut block: Vec<(usize, Vec<String>)> = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            if !block.is_empty() {
                sentences.push(build_sentence(std::mem::take(&mut block))?);
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<String> = if line.contains('\t') {
            line.split('\t').map(|s| s.trim().to_string()).collect()
        } else {
            line.split_whitespace().map(str::to_string).collect()
        };
        let id = &fields[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        if fields.len() < 8 {
            return Err(CorpusError::Parse {
                line: lineno,
                message: format!("expected at least 8 columns, found {}", fields.len()),
            });
        }
        block.push((lineno, fields));
    }
    if !block.is_empty() {
        sentences.push(build_sentence(block)?);
    }
    Ok(sentences)
}

fn build_sentence(rows: Vec<(usize, Vec<String>)>) -> Result<Sentence, CorpusError> {
    let n = rows.len();
    let mut tokens = Vec::with_capacity(n);
    let mut heads: Vec<Option<(usize, String)>> = Vec::with_capacity(n);
    for (expected, (line, f)) in rows.iter().enumerate() {
        let err = |message: String| CorpusError::Parse { line: *line, message };
        let id: usize = f[0]
            .parse()
            .map_err(|_| err(format!("token id {:?} is not an integer", f[0])))?;
        if id != expected + 1 {
            return Err(if id <= expected {
                err(format!("duplicate token id {id}"))
            } else {
                err(format!("token id {id} out of sequence, expected {}", expected + 1))
            });
        }
        if f[1].is_empty() {
            return Err(err("empty word form".into()));
        }
        tokens.push(Token {
            index: id,
            form: f[1].clone(),
            lemma: f[2].clone(),
            cpos: f[3].clone(),
            pos: f[4].clone(),
            feats: f[5].clone(),
        });
        if f[6] == "_" {
            heads.push(None);
            continue;
        }
        let head: usize = f[6]
            .parse()
            .map_err(|_| err(format!("head {:?} is not a non-negative integer", f[6])))?;
        if head > n {
            return Err(err(format!("head {head} out of range for a {n}-token sentence")));
        }
        if head == id {
            return Err(err(format!("token {id} is its own head")));
        }
        heads.push(Some((head, f[7].clone())));
    }

    let annotated = heads.iter().filter(|h| h.is_some()).count();
    let arcs = if annotated == 0 {
        None
    } else if annotated < n {
        let line = rows[heads.iter().position(|h| h.is_none()).unwrap()].0;
        return Err(CorpusError::Parse {
            line,
            message: "sentence mixes annotated and unannotated heads".into(),
        });
    } else {
        let arcs: Vec<Arc> = heads
            .into_iter()
            .enumerate()
            .map(|(i, h)| {
                let (head, label) = h.unwrap();
                Arc {
                    head,
                    modifier: i + 1,
                    label,
                }
            })
            .collect();
        let head_vec: Vec<usize> = arcs.iter().map(|a| a.head).collect();
        if let Err(e) = check_tree(&head_vec) {
            let line = match e {
                TreeError::Cycle(m) | TreeError::OutOfRange(m) | TreeError::SelfLoop(m) => rows[m - 1].0,
                TreeError::RootCount(_) => rows[0].0,
            };
            return Err(CorpusError::Parse {
                line,
                message: e.to_string(),
            });
        }
        Some(arcs)
    };
    Ok(Sentence { tokens, arcs })
}

/// Options for [`write_conll`].
#[derive(Clone, Debug, Default)]
pub struct WriteOptions {
    /// When set, every relation is written as this label (unlabeled output).
    pub placeholder_label: Option<String>,
}

pub fn write_conll<W: Write>(mut w: W, sentences: &[Sentence], opts: &WriteOptions) -> Result<(), CorpusError> {
    for s in sentences {
        for (i, t) in s.tokens.iter().enumerate() {
            let (head, label) = match &s.arcs {
                Some(arcs) => {
                    let a = &arcs[i];
                    let label = opts.placeholder_label.as_deref().unwrap_or(&a.label);
                    (a.head.to_string(), label.to_string())
                }
                None => ("_".to_string(), "_".to_string()),
            };
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t_\t_",
                t.index,
                t.form,
                or_underscore(&t.lemma),
                or_underscore(&t.cpos),
                or_underscore(&t.pos),
                or_underscore(&t.feats),
                head,
                label
            )?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn or_underscore(s: &str) -> &str {
    if s.is_empty() {
        "_"
    } else {
        s
    }
}
