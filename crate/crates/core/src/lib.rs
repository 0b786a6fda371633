//! Readability ranking for words and phrases.
//!
//! This crate measures the relative complexity of two words or phrases with a
//! pairwise feedforward regressor over Gaussian-binned numeric features, and
//! applies that ranker to lexical simplification tasks: substitution ranking,
//! paraphrase-rule simplicity classification, substitution generation, and
//! complex word identification.
//!
//! The main pieces:
//!
//! - [`lexicon`]: the human-rated word-complexity lexicon (load, query,
//!   aggregate raw annotator ratings).
//! - [`resources`]: corpus-derived signals — an n-gram language model with
//!   Kneser-Ney smoothing, token frequency tables, and a word-embedding store.
//! - [`features`]: the per-word and pairwise feature set, with a gated schema.
//! - [`binning`]: Gaussian radial-basis soft binning of scalar features.
//! - [`net`]: the ranking network itself — manual forward/backward passes,
//!   Adam, dropout, and model (de)serialization.
//! - [`tasks`]: adapters binding the ranker to the four applications.
//! - [`metrics`]: evaluation measures (P@1, Pearson, MAP, G-score, per-class
//!   precision) and a paired bootstrap test.

pub mod binning;
pub mod error;
pub mod features;
pub mod lexicon;
pub mod metrics;
pub mod net;
pub mod resources;
pub mod tasks;

mod bytes;

pub use error::{Error, Result};
