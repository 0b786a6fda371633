//! Corpus-derived signals consumed by the feature extractor: an n-gram
//! language model, token frequency tables, and a word-embedding store.
//!
//! All three are immutable once loaded or trained and safe for concurrent
//! reads.

mod embed;
mod freq;
mod lm;

pub use embed::{cosine, EmbeddingStore, PhraseEmbedding};
pub use freq::{relative_frequency, FrequencyTable};
pub use lm::{NGramLanguageModel, SmoothingParams};
