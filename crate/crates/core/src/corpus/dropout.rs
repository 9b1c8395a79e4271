use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Vocab, PAD, UNK};

/// `alpha / (count + alpha)`.
pub fn replacement_probability(alpha: f64, count: usize) -> f64 {
    alpha / (count as f64 + alpha)
}

/// Frequency-sensitive word dropout used while training.
#[derive(Clone, Debug)]
pub struct WordDropout {
    alpha: f64,
    enabled: bool,
    rng: ChaCha8Rng,
}

impl WordDropout {
    pub fn new(alpha: f64, seed: u64) -> Self {
        assert!(alpha > 0.0, "dropout alpha must be positive");
        WordDropout {
            alpha,
            enabled: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A policy that never replaces anything (parsing and evaluation).
    pub fn disabled() -> Self {
        WordDropout {
            alpha: 1.0,
            enabled: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    /// Returns `UNK` with probability `alpha / (#(w) + alpha)`, else `word`.
    pub fn replace(&mut self, word: usize, vocab: &Vocab) -> usize {
        if !self.enabled || word == UNK || word == PAD {
            return word;
        }
        self.replace_with_count(word, vocab.count(word))
    }

    pub(crate) fn replace_with_count(&mut self, word: usize, count: usize) -> usize {
        if !self.enabled {
            return word;
        }
        let p = replacement_probability(self.alpha, count);
        if self.rng.gen::<f64>() < p {
            UNK
        } else {
            word
        }
    }
}
