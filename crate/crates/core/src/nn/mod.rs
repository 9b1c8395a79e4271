//! Minimal reverse-mode autodiff: tensors, an eager graph, LSTM and MLP
//! building blocks, ADAM, and the binary model container.

mod adam;
mod graph;
mod lstm;
mod mlp;
mod params;
pub mod serialize;
mod tensor;

pub use adam::Adam;
pub use graph::{Graph, NodeId};
pub use lstm::{Lstm, LstmState};
pub use mlp::Mlp;
pub use params::{Gradients, Init, ParamId, ParamStore, Parameter};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("dimension error in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },
    #[error("index {index} out of range for {op} over length {len}")]
    IndexOutOfRange { op: &'static str, index: usize, len: usize },
    #[error("loss must be a scalar, got a {0}-vector")]
    NonScalarLoss(usize),
    #[error("duplicate parameter name {0:?}")]
    DuplicateParam(String),
    #[error("missing parameter {0:?}")]
    MissingParam(String),
    #[error("parameter {0:?} has non-finite values")]
    NonFinite(String),
}
