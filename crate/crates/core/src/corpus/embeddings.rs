use std::io::BufRead;

use super::{CorpusError, Vocab};

/// Rows of the word-embedding table to overwrite: `(word id, vector)`.
pub type PretrainedOverlay = Vec<(usize, Vec<f64>)>;

/// Reads "word v1 v2 ... vd" rows and keeps the ones whose word is in `vocab`.
pub fn load_pretrained_embeddings<R: BufRead>(
    reader: R,
    vocab: &Vocab,
    dim: usize,
) -> Result<PretrainedOverlay, CorpusError> {
    let mut width = None;
    let mut seen = vec![false; vocab.num_words()];
    let mut overlay = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let values = parts
            .map(|p| p.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CorpusError::Embedding {
                line: k + 1,
                message: e.to_string(),
            })?;
        match width {
            None => {
                if values.len() != dim {
                    return Err(CorpusError::EmbeddingDim {
                        found: values.len(),
                        expected: dim,
                    });
                }
                width = Some(values.len());
            }
            Some(w) if w != values.len() => {
                return Err(CorpusError::Embedding {
                    line: k + 1,
                    message: format!("row has {} values, earlier rows have {w}", values.len()),
                })
            }
            _ => {}
        }
        let id = vocab.word_id(word);
        if id == super::UNK || seen[id] {
            continue;
        }
        seen[id] = true;
        overlay.push((id, values));
    }
    Ok(overlay)
}
