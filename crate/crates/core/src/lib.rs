pub mod config;
pub mod corpus;
pub mod encoder;
pub mod engine;
pub mod error;
pub mod eval;
pub mod model;
pub mod nn;
pub mod sample;
pub mod training;

pub use error::{Error, Result};
pub use model::Model;
