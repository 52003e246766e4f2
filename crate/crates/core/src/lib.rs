pub mod arith;
pub mod checkers;
pub mod cycletree;
pub mod error;
pub mod graph;
pub mod predictor;

pub use error::{Error, Result};
