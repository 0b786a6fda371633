//! N-gram language model with interpolated Kneser-Ney smoothing.
//!
//! Probabilities are conditional: a query for `w1 .. wn` scores the last
//! token given the preceding ones, backing off to shorter contexts. The top
//! order interpolates discounted raw counts with the lower levels, which use
//! continuation counts; the unigram level reserves mass for a single UNK
//! class, so every query over the vocabulary (plus UNK for unseen tokens)
//! has a finite log-probability, and for any fixed context the conditional
//! distribution sums to one exactly.
//!
//! A model trained with order 1 falls back to add-alpha unigram estimates,
//! since there are no continuation counts to work with.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use indexmap::IndexMap;

use crate::bytes::{BinReader, BinWriter};
use crate::error::{Error, Result};

const LM_MAGIC: &[u8; 4] = b"NRLM";
const LM_VERSION: u32 = 1;

/// Token id for out-of-vocabulary queries; never present in the tables.
const UNK: u32 = u32::MAX;

/// Smoothing constants. The absolute discount applies at every order; the
/// add-alpha mass is only used by order-1 models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub discount: f64,
    pub alpha: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        SmoothingParams {
            discount: 0.75,
            alpha: 0.1,
        }
    }
}

type Gram = Box<[u32]>;

/// One scoring level: numerator counts per k-gram plus aggregated context
/// statistics (total mass and distinct continuations per (k-1)-gram).
#[derive(Debug, Clone, Default)]
struct Level {
    num: HashMap<Gram, u64>,
    ctx: HashMap<Gram, (u64, u64)>,
}

impl Level {
    fn from_counts(num: HashMap<Gram, u64>) -> Self {
        let mut ctx: HashMap<Gram, (u64, u64)> = HashMap::new();
        for (gram, &count) in &num {
            let context: Gram = gram[..gram.len() - 1].into();
            let entry = ctx.entry(context).or_insert((0, 0));
            entry.0 += count;
            entry.1 += 1;
        }
        Level { num, ctx }
    }
}

#[derive(Debug, Clone)]
pub struct NGramLanguageModel {
    order: usize,
    smoothing: SmoothingParams,
    vocab: IndexMap<String, u32>,
    /// Raw k-gram counts, `counts[k-1]` holding the k-grams. These are the
    /// persisted state; everything below is derived.
    counts: Vec<HashMap<Gram, u64>>,
    /// Scoring tables per level 1..=order: the top level carries raw counts,
    /// lower levels carry continuation counts.
    levels: Vec<Level>,
    total_tokens: u64,
}

impl NGramLanguageModel {
    /// Count n-grams of a token stream and build the smoothed model.
    pub fn train<S: AsRef<str>>(corpus: &[S], order: usize) -> Result<Self> {
        Self::train_with(corpus, order, SmoothingParams::default())
    }

    pub fn train_with<S: AsRef<str>>(
        corpus: &[S],
        order: usize,
        smoothing: SmoothingParams,
    ) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyInput("training corpus has no tokens"));
        }
        if order < 1 {
            return Err(Error::InvalidArgument("order must be >= 1".into()));
        }
        if !(0.0 < smoothing.discount && smoothing.discount < 1.0) {
            return Err(Error::InvalidArgument(
                "discount must lie strictly between 0 and 1".into(),
            ));
        }
        if smoothing.alpha.is_nan() || smoothing.alpha <= 0.0 {
            return Err(Error::InvalidArgument("alpha must be > 0".into()));
        }

        let mut vocab: IndexMap<String, u32> = IndexMap::new();
        let ids: Vec<u32> = corpus
            .iter()
            .map(|t| {
                let next = vocab.len() as u32;
                *vocab.entry(t.as_ref().to_string()).or_insert(next)
            })
            .collect();

        let mut counts: Vec<HashMap<Gram, u64>> = vec![HashMap::new(); order];
        for k in 1..=order {
            let table = &mut counts[k - 1];
            if ids.len() >= k {
                for window in ids.windows(k) {
                    *table.entry(window.into()).or_insert(0) += 1;
                }
            }
        }

        Ok(Self::assemble(
            order,
            smoothing,
            vocab,
            counts,
            ids.len() as u64,
        ))
    }

    fn assemble(
        order: usize,
        smoothing: SmoothingParams,
        vocab: IndexMap<String, u32>,
        counts: Vec<HashMap<Gram, u64>>,
        total_tokens: u64,
    ) -> Self {
        let mut levels = Vec::with_capacity(order);
        for k in 1..=order {
            if k == order {
                levels.push(Level::from_counts(counts[k - 1].clone()));
            } else {
                // Continuation counts: how many distinct predecessors each
                // k-gram has among the (k+1)-grams.
                let mut cont: HashMap<Gram, u64> = HashMap::new();
                for gram in counts[k].keys() {
                    *cont.entry(gram[1..].into()).or_insert(0) += 1;
                }
                levels.push(Level::from_counts(cont));
            }
        }
        NGramLanguageModel {
            order,
            smoothing,
            vocab,
            counts,
            levels,
            total_tokens,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn smoothing(&self) -> SmoothingParams {
        self.smoothing
    }

    fn token_id(&self, token: &str) -> u32 {
        self.vocab.get(token).copied().unwrap_or(UNK)
    }

    /// log10 of the conditional probability of the last token given the
    /// preceding ones. The query may be any length from 1 up to the model
    /// order; unseen tokens are mapped to the UNK class, so the result is
    /// always finite.
    pub fn logprob<S: AsRef<str>>(&self, ngram: &[S]) -> Result<f64> {
        Ok(self.prob(ngram)?.log10())
    }

    /// Conditional probability (see [`Self::logprob`]).
    pub fn prob<S: AsRef<str>>(&self, ngram: &[S]) -> Result<f64> {
        if ngram.is_empty() {
            return Err(Error::EmptyInput("cannot score an empty n-gram"));
        }
        if ngram.len() > self.order {
            return Err(Error::InvalidArgument(format!(
                "query of length {} exceeds model order {}",
                ngram.len(),
                self.order
            )));
        }
        let ids: Vec<u32> = ngram.iter().map(|t| self.token_id(t.as_ref())).collect();
        Ok(self.prob_ids(&ids))
    }

    fn prob_ids(&self, gram: &[u32]) -> f64 {
        if gram.len() == 1 {
            return self.unigram_prob(gram[0]);
        }
        let level = &self.levels[gram.len() - 1];
        let context = &gram[..gram.len() - 1];
        let backoff = || self.prob_ids(&gram[1..]);
        match level.ctx.get(context) {
            None => backoff(),
            Some(&(total, distinct)) => {
                let d = self.smoothing.discount;
                let num = level.num.get(gram).copied().unwrap_or(0) as f64;
                let total = total as f64;
                (num - d).max(0.0) / total + d * distinct as f64 / total * backoff()
            }
        }
    }

    fn unigram_prob(&self, id: u32) -> f64 {
        let classes = (self.vocab.len() + 1) as f64; // vocabulary plus UNK
        if self.order == 1 {
            // Add-alpha over raw unigram counts.
            let alpha = self.smoothing.alpha;
            let count = self.counts[0].get(&[id][..]).copied().unwrap_or(0) as f64;
            return (count + alpha) / (self.total_tokens as f64 + alpha * classes);
        }
        // Discounted continuation counts, with the reserved mass spread
        // uniformly over vocabulary + UNK.
        let level = &self.levels[0];
        let uniform = 1.0 / classes;
        match level.ctx.get(&[][..]) {
            None => uniform, // degenerate corpus with no bigrams at all
            Some(&(total, types)) => {
                let d = self.smoothing.discount;
                let cont = level.num.get(&[id][..]).copied().unwrap_or(0) as f64;
                let total = total as f64;
                (cont - d).max(0.0) / total + d * types as f64 / total * uniform
            }
        }
    }

    /// Persist as a versioned binary file: magic bytes, order, smoothing,
    /// vocabulary, then one section of raw counts per order. The derived
    /// tables are rebuilt on load.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BinWriter::new(BufWriter::new(file));
        let io = |e| Error::io(path, e);
        w.u32(u32::from_le_bytes(*LM_MAGIC)).map_err(io)?;
        w.u32(LM_VERSION).map_err(io)?;
        w.u32(self.order as u32).map_err(io)?;
        w.f64(self.smoothing.discount).map_err(io)?;
        w.f64(self.smoothing.alpha).map_err(io)?;
        w.u64(self.total_tokens).map_err(io)?;
        w.u32(self.vocab.len() as u32).map_err(io)?;
        for token in self.vocab.keys() {
            w.str(token).map_err(io)?;
        }
        for table in &self.counts {
            let mut entries: Vec<(&Gram, &u64)> = table.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            w.u64(entries.len() as u64).map_err(io)?;
            for (gram, &count) in entries {
                for &id in gram.iter() {
                    w.u32(id).map_err(io)?;
                }
                w.u64(count).map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BinReader::new(BufReader::new(file), path);
        r.expect_magic(LM_MAGIC, "language model")?;
        let version = r.u32()?;
        if version != LM_VERSION {
            return Err(r.corrupt(format!("unsupported model version {version}")));
        }
        let order = r.u32()? as usize;
        if order == 0 || order > 16 {
            return Err(r.corrupt(format!("implausible order {order}")));
        }
        let smoothing = SmoothingParams {
            discount: r.f64()?,
            alpha: r.f64()?,
        };
        let total_tokens = r.u64()?;
        let vocab_len = r.u32()? as usize;
        let mut vocab = IndexMap::with_capacity(vocab_len);
        for id in 0..vocab_len {
            vocab.insert(r.str()?, id as u32);
        }
        let mut counts = Vec::with_capacity(order);
        for k in 1..=order {
            let n = r.u64()? as usize;
            let mut table = HashMap::with_capacity(n);
            for _ in 0..n {
                let mut gram = Vec::with_capacity(k);
                for _ in 0..k {
                    let id = r.u32()?;
                    if id as usize >= vocab_len {
                        return Err(r.corrupt(format!("token id {id} out of range")));
                    }
                    gram.push(id);
                }
                table.insert(gram.into_boxed_slice(), r.u64()?);
            }
            counts.push(table);
        }
        Ok(Self::assemble(order, smoothing, vocab, counts, total_tokens))
    }
}
