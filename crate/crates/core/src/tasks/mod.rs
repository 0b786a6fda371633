//! Task adapters binding the pairwise ranker to its applications:
//! substitution ranking, paraphrase-rule classification and batch scoring,
//! substitution generation, and complex word identification.

pub mod cwi;
pub mod ppdb;
pub mod ranking;

use crate::error::Result;
use crate::features::{ContextWindow, Resources};
use crate::net::NRRModel;

/// Anything that can score an ordered pair of words/phrases: negative means
/// the first is simpler. Ranking and generation are written against this
/// trait so they can be exercised with stub scorers.
pub trait PairwiseScorer {
    fn score(&self, a: &str, b: &str, context: Option<&ContextWindow>) -> Result<f64>;
}

/// The trained model plus its resources, as a [`PairwiseScorer`].
pub struct NrrScorer<'a> {
    pub model: &'a NRRModel,
    pub resources: &'a Resources,
}

impl PairwiseScorer for NrrScorer<'_> {
    fn score(&self, a: &str, b: &str, context: Option<&ContextWindow>) -> Result<f64> {
        self.model.score_pair(a, b, context, self.resources)
    }
}
