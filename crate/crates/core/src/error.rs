use thiserror::Error;

use crate::config::ConfigError;
use crate::corpus::{CorpusError, TreeError};
use crate::nn::serialize::FormatError;
use crate::nn::NnError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid tree: {0}")]
    Tree(#[from] TreeError),
    #[error("{what} id {id} out of range (size {size})")]
    InvalidId { what: &'static str, id: usize, size: usize },
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("model file disagrees with its configuration: {0}")]
    ModelMismatch(String),
    #[error("sentence {index}: {message}")]
    Alignment { index: usize, message: String },
    #[error("{0}")]
    Training(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
