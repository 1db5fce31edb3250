//! Identification and categorization of help-request tweets ("rweets").
//!
//! The crate is organised as a chain of stages, each of which persists its
//! output so later stages can reuse it:
//!
//! * [`corpus`] loads and synthesizes labeled tweet datasets.
//! * [`preprocess`] cleans raw text into token sequences.
//! * [`rules`] evaluates the eighteen sequential request patterns.
//! * [`features`] turns cleaned tokens into sparse n-gram matrices.
//! * [`models`] trains logistic regression and multinomial naive Bayes.
//! * [`eval`] computes confusion matrices and micro/macro metrics.
//! * [`pipeline`] chains identification and categorization.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod pipeline;
pub mod preprocess;
pub mod rules;
pub mod sparse;
pub mod util;

pub use error::{Error, Result};
