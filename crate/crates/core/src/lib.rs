//! Genetic-algorithm wrapper feature selection for small, high-dimensional
//! binary classification problems, with nested cross-validation to measure
//! how well the selected subsets generalize.

pub mod classifiers;
pub mod config;
pub mod dataset;
pub mod error;
pub mod fitness;
pub mod ga;
pub mod harness;
pub mod matrix;
pub mod seed;

pub use error::{Error, Result};
