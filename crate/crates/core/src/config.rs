//! Network dimensions and switches. Defaults are the published configuration.

use thiserror::Error;

use crate::nn::serialize::Metadata;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("invalid value for {key}: {value:?}")]
    BadValue { key: String, value: String },
    #[error("missing configuration key {0}")]
    Missing(&'static str),
    #[error("{0}")]
    Inconsistent(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    pub word_dim: usize,
    pub pos_dim: usize,
    pub rel_dim: usize,
    /// Width of the per-word projection `g(W^v (w ∘ p) + b^v)`.
    pub proj_dim: usize,
    pub tree_hidden: usize,
    pub tree_layers: usize,
    /// Per-direction width of the sentence BiLSTM.
    pub bilstm_hidden: usize,
    pub bilstm_layers: usize,
    pub unlabeled_hidden: usize,
    pub labeled_hidden: usize,
    /// Subtrees looked at on each side of the candidate pair.
    pub window: usize,
    pub use_bilstm: bool,
    pub use_pos: bool,
    /// When false each pending item is represented by its head word vector only.
    pub use_tree: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_dim: 100,
            pos_dim: 25,
            rel_dim: 25,
            proj_dim: 100,
            tree_hidden: 200,
            tree_layers: 2,
            bilstm_hidden: 100,
            bilstm_layers: 2,
            unlabeled_hidden: 100,
            labeled_hidden: 100,
            window: 2,
            use_bilstm: true,
            use_pos: true,
            use_tree: true,
        }
    }
}

const DIM_KEYS: [&str; 11] = [
    "word_dim",
    "pos_dim",
    "rel_dim",
    "proj_dim",
    "tree_hidden",
    "tree_layers",
    "bilstm_hidden",
    "bilstm_layers",
    "unlabeled_hidden",
    "labeled_hidden",
    "window",
];
const FLAG_KEYS: [&str; 3] = ["use_bilstm", "use_pos", "use_tree"];

impl ModelConfig {
    /// Small network for tests and quick experiments.
    pub fn tiny() -> Self {
        ModelConfig {
            word_dim: 8,
            pos_dim: 4,
            rel_dim: 4,
            proj_dim: 8,
            tree_hidden: 6,
            tree_layers: 1,
            bilstm_hidden: 4,
            bilstm_layers: 1,
            unlabeled_hidden: 6,
            labeled_hidden: 6,
            window: 2,
            use_bilstm: true,
            use_pos: true,
            use_tree: true,
        }
    }

    /// Dimension of the word vectors `v_i`.
    pub fn word_vector_dim(&self) -> usize {
        if self.use_bilstm {
            2 * self.bilstm_hidden
        } else {
            self.proj_dim
        }
    }

    /// Dimension of a subtree encoding; equal to the word-vector width so both
    /// can feed the same tree LSTMs.
    pub fn enc_dim(&self) -> usize {
        self.word_vector_dim()
    }

    /// Width of a pending item's representation `c`.
    pub fn item_dim(&self) -> usize {
        if self.use_tree {
            2 * self.tree_hidden
        } else {
            self.word_vector_dim()
        }
    }

    /// Number of subtrees in the scoring window.
    pub fn window_slots(&self) -> usize {
        2 * self.window + 2
    }

    pub fn scorer_input_dim(&self) -> usize {
        self.window_slots() * self.item_dim()
    }

    fn dims(&self) -> [usize; 11] {
        [
            self.word_dim,
            self.pos_dim,
            self.rel_dim,
            self.proj_dim,
            self.tree_hidden,
            self.tree_layers,
            self.bilstm_hidden,
            self.bilstm_layers,
            self.unlabeled_hidden,
            self.labeled_hidden,
            self.window,
        ]
    }

    fn dims_mut(&mut self) -> [&mut usize; 11] {
        [
            &mut self.word_dim,
            &mut self.pos_dim,
            &mut self.rel_dim,
            &mut self.proj_dim,
            &mut self.tree_hidden,
            &mut self.tree_layers,
            &mut self.bilstm_hidden,
            &mut self.bilstm_layers,
            &mut self.unlabeled_hidden,
            &mut self.labeled_hidden,
            &mut self.window,
        ]
    }

    fn flags_mut(&mut self) -> [&mut bool; 3] {
        [&mut self.use_bilstm, &mut self.use_pos, &mut self.use_tree]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (k, v) in DIM_KEYS.iter().zip(self.dims()) {
            // window 0 is a legal (pair-only) scorer
            if v == 0 && *k != "window" {
                return Err(ConfigError::NonPositive(k));
            }
        }
        Ok(())
    }

    pub fn to_metadata(&self, meta: &mut Metadata) {
        for (k, v) in DIM_KEYS.iter().zip(self.dims()) {
            meta.set(format!("model.{k}"), v);
        }
        meta.set("model.use_bilstm", self.use_bilstm);
        meta.set("model.use_pos", self.use_pos);
        meta.set("model.use_tree", self.use_tree);
        meta.set("model.enc_dim", self.enc_dim());
    }

    pub fn from_metadata(meta: &Metadata) -> Result<Self, ConfigError> {
        let mut cfg = ModelConfig::default();
        for (k, slot) in DIM_KEYS.iter().zip(cfg.dims_mut()) {
            let v = meta.get(&format!("model.{k}")).ok_or(ConfigError::Missing(k))?;
            *slot = v.parse().map_err(|_| ConfigError::BadValue {
                key: k.to_string(),
                value: v.to_string(),
            })?;
        }
        for (k, slot) in FLAG_KEYS.iter().zip(cfg.flags_mut()) {
            let v = meta.get(&format!("model.{k}")).ok_or(ConfigError::Missing(k))?;
            *slot = v.parse().map_err(|_| ConfigError::BadValue {
                key: k.to_string(),
                value: v.to_string(),
            })?;
        }
        if let Some(enc) = meta.get("model.enc_dim") {
            if enc != cfg.enc_dim().to_string() {
                return Err(ConfigError::Inconsistent(format!(
                    "stored encoding width {enc} disagrees with word-vector width {}",
                    cfg.word_vector_dim()
                )));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
