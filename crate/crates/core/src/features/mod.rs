//! Feature extraction for single inputs and input pairs.
//!
//! Per input word or phrase the extractor emits surface statistics (word
//! count, character length, syllables), corpus frequencies, the
//! word-complexity lexicon probe, and language-model context features. For a
//! pair it additionally emits the per-feature differences, the cosine of the
//! phrase embeddings, and the raw embedding difference vector.
//!
//! Features are grouped and the schema can switch whole groups off; two of
//! the task presets do exactly that (no embedding features for substitution
//! ranking, no context features for paraphrase rules). Disabling a group
//! removes exactly its columns and changes the schema hash.

mod syllable;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::binning::GaussianBinner;
use crate::error::{Error, Result};
use crate::lexicon::{Lemmatizer, SuffixLemmatizer, WordComplexityLexicon};
use crate::resources::{cosine, relative_frequency, EmbeddingStore, FrequencyTable, NGramLanguageModel};

pub use syllable::{count_syllables, HeuristicSyllables, SyllableCounter};

/// LM context features: every n-gram of length 2..=5 inside the two-token
/// window around the anchor, identified by (length, start offset).
const CONTEXT_CONFIGS: &[(usize, isize, &str)] = &[
    (2, -1, "ctx2_m1"),
    (2, 0, "ctx2_0"),
    (3, -2, "ctx3_m2"),
    (3, -1, "ctx3_m1"),
    (3, 0, "ctx3_0"),
    (4, -2, "ctx4_m2"),
    (4, -1, "ctx4_m1"),
    (5, -2, "ctx5_m2"),
];

/// Per-word scalar features in schema order.
const WORD_FEATURES: &[(&str, FeatureGroup)] = &[
    ("word_count", FeatureGroup::Surface),
    ("char_len", FeatureGroup::Surface),
    ("syllables", FeatureGroup::Surface),
    ("google_freq", FeatureGroup::Frequency),
    ("wiki_rel_freq", FeatureGroup::Frequency),
    ("lex_present", FeatureGroup::Lexicon),
    ("lex_score", FeatureGroup::Lexicon),
    ("had_context", FeatureGroup::Context),
    ("ctx2_m1", FeatureGroup::Context),
    ("ctx2_0", FeatureGroup::Context),
    ("ctx3_m2", FeatureGroup::Context),
    ("ctx3_m1", FeatureGroup::Context),
    ("ctx3_0", FeatureGroup::Context),
    ("ctx4_m2", FeatureGroup::Context),
    ("ctx4_m1", FeatureGroup::Context),
    ("ctx5_m2", FeatureGroup::Context),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureGroup {
    Surface,
    Frequency,
    Lexicon,
    Context,
    Embeddings,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 5] = [
        FeatureGroup::Surface,
        FeatureGroup::Frequency,
        FeatureGroup::Lexicon,
        FeatureGroup::Context,
        FeatureGroup::Embeddings,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Surface => "surface",
            FeatureGroup::Frequency => "frequency",
            FeatureGroup::Lexicon => "lexicon",
            FeatureGroup::Context => "context",
            FeatureGroup::Embeddings => "embeddings",
        }
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "surface" => Ok(FeatureGroup::Surface),
            "frequency" => Ok(FeatureGroup::Frequency),
            "lexicon" => Ok(FeatureGroup::Lexicon),
            "context" => Ok(FeatureGroup::Context),
            "embeddings" => Ok(FeatureGroup::Embeddings),
            other => Err(Error::InvalidArgument(format!(
                "unknown feature group {other:?} (expected surface|frequency|lexicon|context|embeddings)"
            ))),
        }
    }
}

/// The ordered, gated feature set. The hash changes exactly when the
/// ordered enabled set changes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    groups: Vec<FeatureGroup>,
    /// Individually disabled features (constant training columns).
    dropped: Vec<String>,
    /// Embedding dimension; present iff the embeddings group is enabled.
    emb_dim: Option<usize>,
}

impl FeatureSchema {
    /// Every group enabled; embeddings only when a dimension is known.
    pub fn all(emb_dim: Option<usize>) -> Self {
        let groups = match emb_dim {
            Some(_) => FeatureGroup::ALL.to_vec(),
            None => FeatureGroup::ALL
                .into_iter()
                .filter(|g| *g != FeatureGroup::Embeddings)
                .collect(),
        };
        FeatureSchema {
            groups,
            dropped: Vec::new(),
            emb_dim,
        }
    }

    pub fn with_groups(groups: &[FeatureGroup], emb_dim: Option<usize>) -> Result<Self> {
        let mut selected = Vec::new();
        for g in FeatureGroup::ALL {
            if groups.contains(&g) {
                selected.push(g);
            }
        }
        if selected.contains(&FeatureGroup::Embeddings) && emb_dim.is_none() {
            return Err(Error::InvalidArgument(
                "embeddings group requires an embedding dimension".into(),
            ));
        }
        if selected.is_empty() {
            return Err(Error::InvalidArgument("no feature groups enabled".into()));
        }
        let emb_dim = if selected.contains(&FeatureGroup::Embeddings) {
            emb_dim
        } else {
            None
        };
        Ok(FeatureSchema {
            groups: selected,
            dropped: Vec::new(),
            emb_dim,
        })
    }

    pub fn disable_group(&mut self, group: FeatureGroup) {
        self.groups.retain(|g| *g != group);
        if group == FeatureGroup::Embeddings {
            self.emb_dim = None;
        }
    }

    /// Disable one named feature (used when a training column is constant).
    pub fn drop_feature(&mut self, name: &str) {
        if !self.dropped.iter().any(|d| d == name) {
            self.dropped.push(name.to_string());
        }
    }

    pub fn has_group(&self, group: FeatureGroup) -> bool {
        self.groups.contains(&group)
    }

    pub fn groups(&self) -> &[FeatureGroup] {
        &self.groups
    }

    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn emb_dim(&self) -> Option<usize> {
        self.emb_dim
    }

    fn feature_enabled(&self, name: &str, group: FeatureGroup) -> bool {
        self.has_group(group) && !self.dropped.iter().any(|d| d == name)
    }

    /// Enabled per-word scalar features, in schema order.
    pub fn word_features(&self) -> Vec<&'static str> {
        WORD_FEATURES
            .iter()
            .filter(|(name, group)| self.feature_enabled(name, *group))
            .map(|(name, _)| *name)
            .collect()
    }

    pub fn has_cosine(&self) -> bool {
        self.feature_enabled("cosine", FeatureGroup::Embeddings)
    }

    pub fn has_emb_diff(&self) -> bool {
        self.feature_enabled("emb_diff", FeatureGroup::Embeddings) && self.emb_dim.is_some()
    }

    /// Binnable column names in assembly order: a./b./d. triples per word
    /// feature, then the pairwise cosine.
    pub fn binnable_columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        for feature in self.word_features() {
            for prefix in ["a", "b", "d"] {
                out.push(format!("{prefix}.{feature}"));
            }
        }
        if self.has_cosine() {
            out.push("pair.cosine".to_string());
        }
        out
    }

    /// Network input width: k entries per binnable column plus the raw
    /// embedding difference.
    pub fn input_dim(&self, k: usize) -> usize {
        self.binnable_columns().len() * k
            + if self.has_emb_diff() {
                self.emb_dim.unwrap_or(0)
            } else {
                0
            }
    }

    /// FNV-1a over the ordered enabled column set.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for col in self.binnable_columns() {
            eat(col.as_bytes());
            eat(b";");
        }
        if self.has_emb_diff() {
            eat(format!("emb_diff:{}", self.emb_dim.unwrap_or(0)).as_bytes());
        }
        h
    }
}

/// Up to two tokens of sentence context on each side of the target slot.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ContextWindow {
    pub left: Vec<String>,
    pub right: Vec<String>,
}

impl ContextWindow {
    /// Window around `target` in `tokens`; keeps at most two tokens per side.
    pub fn around(tokens: &[String], target: usize) -> Self {
        let start = target.saturating_sub(2);
        let left = tokens[start..target.min(tokens.len())].to_vec();
        let end = (target + 3).min(tokens.len());
        let right = if target + 1 < tokens.len() {
            tokens[target + 1..end].to_vec()
        } else {
            Vec::new()
        };
        ContextWindow { left, right }
    }
}

/// The resource bundle feature extraction draws from. Only the resources
/// required by the enabled feature groups need to be present.
#[derive(Clone)]
pub struct Resources {
    pub lexicon: Option<WordComplexityLexicon>,
    pub lm: Option<NGramLanguageModel>,
    pub google_freq: Option<FrequencyTable>,
    pub wiki_simple: Option<FrequencyTable>,
    pub wiki_normal: Option<FrequencyTable>,
    pub embeddings: Option<EmbeddingStore>,
    pub lemmatizer: Arc<dyn Lemmatizer + Send + Sync>,
}

impl Default for Resources {
    fn default() -> Self {
        Resources {
            lexicon: None,
            lm: None,
            google_freq: None,
            wiki_simple: None,
            wiki_normal: None,
            embeddings: None,
            lemmatizer: Arc::new(SuffixLemmatizer),
        }
    }
}

impl fmt::Debug for Resources {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Resources")
            .field("lexicon", &self.lexicon.as_ref().map(|l| l.len()))
            .field("lm", &self.lm.as_ref().map(|m| m.order()))
            .field("google_freq", &self.google_freq.as_ref().map(|t| t.len()))
            .field("wiki_simple", &self.wiki_simple.as_ref().map(|t| t.len()))
            .field("wiki_normal", &self.wiki_normal.as_ref().map(|t| t.len()))
            .field("embeddings", &self.embeddings.as_ref().map(|e| e.len()))
            .finish()
    }
}

/// Named features for a `(w_a, w_b)` input pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairFeatures {
    pub schema_hash: u64,
    pub a: IndexMap<String, f64>,
    pub b: IndexMap<String, f64>,
    /// `a[k] - b[k]` per scalar feature.
    pub diffs: IndexMap<String, f64>,
    pub cosine: Option<f64>,
    pub emb_diff: Option<Vec<f64>>,
}

/// Extract the enabled scalar features for one word or phrase.
pub fn extract_single(
    input: &str,
    context: Option<&ContextWindow>,
    resources: &Resources,
    schema: &FeatureSchema,
) -> Result<IndexMap<String, f64>> {
    let words: Vec<&str> = input.split_whitespace().collect();
    if words.is_empty() {
        return Err(Error::EmptyInput("cannot extract features of an empty phrase"));
    }

    let mut out = IndexMap::new();
    let mut context_values: Option<IndexMap<&'static str, f64>> = None;

    for feature in schema.word_features() {
        let value = match feature {
            "word_count" => words.len() as f64,
            "char_len" => input.trim().chars().count() as f64,
            "syllables" => count_syllables(input) as f64,
            "google_freq" => {
                let table = resources
                    .google_freq
                    .as_ref()
                    .ok_or(Error::MissingResource("n-gram frequency table"))?;
                phrase_log_count(table, input, &words)
            }
            "wiki_rel_freq" => {
                let simple = resources
                    .wiki_simple
                    .as_ref()
                    .ok_or(Error::MissingResource("Simple Wikipedia frequency table"))?;
                let normal = resources
                    .wiki_normal
                    .as_ref()
                    .ok_or(Error::MissingResource("Wikipedia frequency table"))?;
                phrase_relative_frequency(simple, normal, input, &words)
            }
            "lex_present" | "lex_score" => {
                let lexicon = resources
                    .lexicon
                    .as_ref()
                    .ok_or(Error::MissingResource("word-complexity lexicon"))?;
                let (present, score) = lexicon.lookup(input, Some(resources.lemmatizer.as_ref()));
                if feature == "lex_present" {
                    if present {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    score
                }
            }
            name => {
                // Context group: computed once, then served per feature.
                if context_values.is_none() {
                    let lm = resources
                        .lm
                        .as_ref()
                        .ok_or(Error::MissingResource("language model"))?;
                    context_values = Some(context_features(lm, &words, context)?);
                }
                *context_values
                    .as_ref()
                    .expect("just filled")
                    .get(name)
                    .unwrap_or_else(|| panic!("unknown feature {name}"))
            }
        };
        out.insert(feature.to_string(), value);
    }
    Ok(out)
}

/// Phrase count: the full phrase first, else the mean of the per-word log
/// counts.
fn phrase_log_count(table: &FrequencyTable, phrase: &str, words: &[&str]) -> f64 {
    if words.len() == 1 || table.count(phrase.trim()) > 0 {
        table.log_count(phrase.trim())
    } else {
        words.iter().map(|w| table.log_count(w)).sum::<f64>() / words.len() as f64
    }
}

fn phrase_relative_frequency(
    simple: &FrequencyTable,
    normal: &FrequencyTable,
    phrase: &str,
    words: &[&str],
) -> f64 {
    if words.len() == 1 || simple.count(phrase.trim()) > 0 || normal.count(phrase.trim()) > 0 {
        relative_frequency(simple, normal, phrase.trim())
    } else {
        words
            .iter()
            .map(|w| relative_frequency(simple, normal, w))
            .sum::<f64>()
            / words.len() as f64
    }
}

/// LM context features for every window configuration.
///
/// With context, each feature averages the log-probabilities of the window
/// n-grams anchored at each token of the phrase; configurations that do not
/// fit (sentence edge, or n beyond the model order) fall back to the
/// context-free value. Without context, every configuration takes the
/// context-free value and `had_context` is 0.
fn context_features(
    lm: &NGramLanguageModel,
    words: &[&str],
    context: Option<&ContextWindow>,
) -> Result<IndexMap<&'static str, f64>> {
    let context_free = context_free_logprob(lm, words)?;
    let mut out = IndexMap::new();
    out.insert("had_context", if context.is_some() { 1.0 } else { 0.0 });

    let seq: Vec<&str> = match context {
        None => {
            for (_, _, name) in CONTEXT_CONFIGS {
                out.insert(*name, context_free);
            }
            return Ok(out);
        }
        Some(cw) => {
            let left = cw.left.iter().rev().take(2).rev();
            let right = cw.right.iter().take(2);
            left.map(String::as_str)
                .chain(words.iter().copied())
                .chain(right.map(String::as_str))
                .collect()
        }
    };
    let left_len = context.map(|c| c.left.len().min(2)).unwrap_or(0);
    let anchors = left_len..left_len + words.len();

    for &(n, off, name) in CONTEXT_CONFIGS {
        if n > lm.order() {
            out.insert(name, context_free);
            continue;
        }
        let mut values = Vec::new();
        for anchor in anchors.clone() {
            let start = anchor as isize + off;
            let end = start + n as isize;
            if start >= 0 && end as usize <= seq.len() {
                values.push(lm.logprob(&seq[start as usize..end as usize])?);
            }
        }
        let value = if values.is_empty() {
            context_free
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        };
        out.insert(name, value);
    }
    Ok(out)
}

/// Mean log-probability over every contiguous span of the phrase tokens, up
/// to the model order.
fn context_free_logprob(lm: &NGramLanguageModel, words: &[&str]) -> Result<f64> {
    let max_n = lm.order().min(words.len());
    let mut sum = 0.0;
    let mut count = 0usize;
    for n in 1..=max_n {
        for span in words.windows(n) {
            sum += lm.logprob(span)?;
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

/// Extract pair features: both sides, scalar differences, and the embedding
/// comparison. Both sides share the same optional context window (candidate
/// substitutions fill the same sentence slot).
pub fn extract_pair(
    w_a: &str,
    w_b: &str,
    context: Option<&ContextWindow>,
    resources: &Resources,
    schema: &FeatureSchema,
) -> Result<PairFeatures> {
    let a = extract_single(w_a, context, resources, schema)?;
    let b = extract_single(w_b, context, resources, schema)?;
    let mut diffs = IndexMap::with_capacity(a.len());
    for (name, &va) in &a {
        let vb = b
            .get(name)
            .copied()
            .expect("both sides extracted with the same schema");
        diffs.insert(name.clone(), va - vb);
    }

    let (cos, emb_diff) = if schema.has_cosine() || schema.has_emb_diff() {
        let store = resources
            .embeddings
            .as_ref()
            .ok_or(Error::MissingResource("embedding store"))?;
        let ea = store.phrase_embedding(w_a);
        let eb = store.phrase_embedding(w_b);
        let cos = cosine(&ea.vector, &eb.vector)?;
        let diff: Vec<f64> = ea
            .vector
            .iter()
            .zip(&eb.vector)
            .map(|(x, y)| x - y)
            .collect();
        (
            schema.has_cosine().then_some(cos),
            schema.has_emb_diff().then_some(diff),
        )
    } else {
        (None, None)
    };

    Ok(PairFeatures {
        schema_hash: schema.hash(),
        a,
        b,
        diffs,
        cosine: cos,
        emb_diff,
    })
}

/// Assembles network input vectors from pair features: every binnable
/// column through the fitted binner, then the raw embedding difference.
#[derive(Debug, Clone)]
pub struct PairVectorizer {
    schema: FeatureSchema,
    binner: GaussianBinner,
    /// (column name, side, feature) resolved once.
    columns: Vec<(String, Side, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    A,
    B,
    Diff,
    Cosine,
}

impl PairVectorizer {
    pub fn new(schema: FeatureSchema, binner: GaussianBinner) -> Self {
        let mut columns = Vec::new();
        for feature in schema.word_features() {
            for (prefix, side) in [("a", Side::A), ("b", Side::B), ("d", Side::Diff)] {
                columns.push((format!("{prefix}.{feature}"), side, feature.to_string()));
            }
        }
        if schema.has_cosine() {
            columns.push(("pair.cosine".to_string(), Side::Cosine, "cosine".to_string()));
        }
        PairVectorizer {
            schema,
            binner,
            columns,
        }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn binner(&self) -> &GaussianBinner {
        &self.binner
    }

    pub fn input_dim(&self) -> usize {
        self.schema.input_dim(self.binner.k())
    }

    pub fn vectorize(&self, pair: &PairFeatures) -> Result<Vec<f64>> {
        if pair.schema_hash != self.schema.hash() {
            return Err(Error::SchemaMismatch {
                expected: self.schema.hash(),
                actual: pair.schema_hash,
            });
        }
        self.vectorize_unchecked(pair)
    }

    /// Assembly without the schema-hash guard. Used during training, where
    /// the effective schema may have dropped constant features and the
    /// feature maps are a superset of what it needs.
    pub(crate) fn vectorize_unchecked(&self, pair: &PairFeatures) -> Result<Vec<f64>> {
        let k = self.binner.k();
        let mut out = vec![0.0; self.input_dim()];
        let mut offset = 0usize;
        for (column, side, feature) in &self.columns {
            let value = match side {
                Side::A => pair.a.get(feature).copied(),
                Side::B => pair.b.get(feature).copied(),
                Side::Diff => pair.diffs.get(feature).copied(),
                Side::Cosine => pair.cosine,
            }
            .ok_or_else(|| {
                Error::InvalidArgument(format!("pair features miss column {column}"))
            })?;
            self.binner
                .transform_into(column, value, &mut out[offset..offset + k])?;
            offset += k;
        }
        if self.schema.has_emb_diff() {
            let dim = self.schema.emb_dim().unwrap_or(0);
            let diff = pair
                .emb_diff
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("pair features miss emb_diff".into()))?;
            if diff.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: diff.len(),
                });
            }
            out[offset..offset + dim].copy_from_slice(diff);
        }
        Ok(out)
    }
}

/// Gather the binnable training columns from a set of pair features, for
/// fitting the binner.
pub fn collect_columns(
    schema: &FeatureSchema,
    pairs: &[PairFeatures],
) -> Result<Vec<(String, Vec<f64>)>> {
    let hash = schema.hash();
    let mut columns: Vec<(String, Vec<f64>)> = schema
        .binnable_columns()
        .into_iter()
        .map(|name| (name, Vec::with_capacity(pairs.len())))
        .collect();
    for pair in pairs {
        if pair.schema_hash != hash {
            return Err(Error::SchemaMismatch {
                expected: hash,
                actual: pair.schema_hash,
            });
        }
        let mut idx = 0usize;
        for feature in schema.word_features() {
            for map in [&pair.a, &pair.b, &pair.diffs] {
                let v = map.get(feature).copied().ok_or_else(|| {
                    Error::InvalidArgument(format!("pair features miss {feature}"))
                })?;
                columns[idx].1.push(v);
                idx += 1;
            }
        }
        if schema.has_cosine() {
            let v = pair
                .cosine
                .ok_or_else(|| Error::InvalidArgument("pair features miss cosine".into()))?;
            columns[idx].1.push(v);
        }
    }
    Ok(columns)
}
