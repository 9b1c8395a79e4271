//! Attachment scores.

use std::collections::HashSet;
use std::fmt;

use crate::corpus::Sentence;
use crate::error::{Error, Result};

/// Gold POS tags that mark a token as punctuation.
pub const PTB_PUNCTUATION: [&str; 5] = ["``", "''", ":", ",", "."];

/// Which tokens are left out of the scores, judged by the gold tokens' tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PunctPolicy {
    /// Score every token.
    None,
    /// Skip tokens whose coarse or fine gold tag is in the set.
    Tags(HashSet<String>),
}

impl Default for PunctPolicy {
    fn default() -> Self {
        PunctPolicy::Tags(PTB_PUNCTUATION.iter().map(|s| s.to_string()).collect())
    }
}

impl PunctPolicy {
    pub fn from_tags<I: IntoIterator<Item = S>, S: Into<String>>(tags: I) -> Self {
        PunctPolicy::Tags(tags.into_iter().map(Into::into).collect())
    }

    fn excludes(&self, cpos: &str, pos: &str) -> bool {
        match self {
            PunctPolicy::None => false,
            PunctPolicy::Tags(t) => t.contains(cpos) || t.contains(pos),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SentenceScore {
    pub counted: usize,
    pub excluded: usize,
    pub correct_heads: usize,
    pub correct_labeled: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub uas: f64,
    pub las: f64,
    pub counted: usize,
    pub excluded: usize,
    pub correct_heads: usize,
    pub correct_labeled: usize,
    pub sentences: Vec<SentenceScore>,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.counted + self.excluded
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "uas={:.4} las={:.4} counted={} excluded={} sentences={}",
            self.uas,
            self.las,
            self.counted,
            self.excluded,
            self.sentences.len()
        )
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Compares predicted arcs with gold arcs sentence by sentence.
pub fn evaluate(gold: &[Sentence], predicted: &[Sentence], policy: &PunctPolicy) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::Alignment {
            index: gold.len().min(predicted.len()),
            message: format!("{} gold sentences but {} predicted", gold.len(), predicted.len()),
        });
    }
    let mut report = EvalReport::default();
    for (index, (g, p)) in gold.iter().zip(predicted).enumerate() {
        let misaligned = |message: String| Error::Alignment { index, message };
        if g.len() != p.len() {
            return Err(misaligned(format!("{} gold tokens but {} predicted", g.len(), p.len())));
        }
        let ga = g.arcs.as_ref().ok_or_else(|| misaligned("gold side has no arcs".into()))?;
        let pa = p.arcs.as_ref().ok_or_else(|| misaligned("predicted side has no arcs".into()))?;
        let mut s = SentenceScore::default();
        for ((tok, ga), pa) in g.tokens.iter().zip(ga).zip(pa) {
            if policy.excludes(&tok.cpos, &tok.pos) {
                s.excluded += 1;
                continue;
            }
            s.counted += 1;
            if ga.head == pa.head {
                s.correct_heads += 1;
                if ga.label == pa.label {
                    s.correct_labeled += 1;
                }
            }
        }
        report.counted += s.counted;
        report.excluded += s.excluded;
        report.correct_heads += s.correct_heads;
        report.correct_labeled += s.correct_labeled;
        report.sentences.push(s);
    }
    report.uas = ratio(report.correct_heads, report.counted);
    report.las = ratio(report.correct_labeled, report.counted);
    Ok(report)
}
