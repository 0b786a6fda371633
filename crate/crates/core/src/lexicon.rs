//! The human-rated word-complexity lexicon: loading the released TSV
//! resource, querying it with phrase and lemma fallbacks, and rebuilding it
//! from raw annotator ratings (outlier discard plus inter-annotator
//! agreement).

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::metrics::pearson;

/// Scores live on a 6-point Likert scale: 1 is the simplest, 6 the most
/// complex.
pub const SCORE_MIN: f64 = 1.0;
pub const SCORE_MAX: f64 = 6.0;

/// A rating with this distance (strictly) above the mean of the other
/// ratings for the same word is discarded as an outlier. Ratings exactly at
/// the boundary are kept.
const OUTLIER_DISTANCE: f64 = 2.0;

/// Map from surface word to averaged human complexity score.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, Default)]
pub struct WordComplexityLexicon {
    entries: IndexMap<String, f64>,
    source: Option<PathBuf>,
    /// Words whose ratings were all outliers under the discard rule; their
    /// score is the plain mean of all ratings.
    flagged: Vec<String>,
}

/// Raw annotator ratings for one word. Position i holds annotator i's
/// rating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingRecord {
    pub word: String,
    pub ratings: Vec<u8>,
}

impl RatingRecord {
    pub fn new(word: impl Into<String>, ratings: Vec<u8>) -> Self {
        RatingRecord {
            word: word.into(),
            ratings,
        }
    }
}

/// Maps an inflected form to candidate lemmas, most plausible first.
pub trait Lemmatizer {
    fn lemmas(&self, word: &str) -> Vec<String>;
}

/// Suffix-stripping fallback lemmatizer (s/es/ies/ed/ing rules) so lookups
/// work without an external morphological resource.
#[derive(Debug, Default, Clone, Copy)]
pub struct SuffixLemmatizer;

impl Lemmatizer for SuffixLemmatizer {
    fn lemmas(&self, word: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut push = |s: String| {
            if s.len() >= 2 && !out.contains(&s) {
                out.push(s);
            }
        };
        let n = word.len();
        if let Some(stem) = word.strip_suffix("ies").filter(|_| n >= 5) {
            push(format!("{stem}y"));
        }
        if let Some(stem) = word.strip_suffix("es").filter(|_| n >= 4) {
            push(stem.to_string());
        }
        if let Some(stem) = word.strip_suffix('s').filter(|s| n >= 3 && !s.ends_with('s')) {
            push(stem.to_string());
        }
        if let Some(stem) = word.strip_suffix("ed").filter(|_| n >= 4) {
            push(stem.to_string());
            push(format!("{stem}e"));
            if let Some(short) = strip_doubled_consonant(stem) {
                push(short);
            }
        }
        if let Some(stem) = word.strip_suffix("ing").filter(|_| n >= 5) {
            push(stem.to_string());
            push(format!("{stem}e"));
            if let Some(short) = strip_doubled_consonant(stem) {
                push(short);
            }
        }
        out
    }
}

fn strip_doubled_consonant(stem: &str) -> Option<String> {
    let bytes = stem.as_bytes();
    let n = bytes.len();
    if n >= 3 && bytes[n - 1] == bytes[n - 2] && !b"aeiou".contains(&bytes[n - 1]) {
        Some(stem[..n - 1].to_string())
    } else {
        None
    }
}

impl WordComplexityLexicon {
    /// Load from a two-column UTF-8 TSV (`word<TAB>score`). Lines starting
    /// with `#` and blank lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut entries = IndexMap::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut cols = trimmed.split('\t');
            let (word, score) = match (cols.next(), cols.next(), cols.next()) {
                (Some(w), Some(s), None) => (w, s),
                _ => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        "expected exactly two tab-separated columns",
                    ))
                }
            };
            let score: f64 = score.trim().parse().map_err(|_| {
                Error::parse(path, lineno, format!("non-numeric score {score:?}"))
            })?;
            if !(SCORE_MIN..=SCORE_MAX).contains(&score) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("score out of range [1, 6]: {score}"),
                ));
            }
            if entries.insert(word.to_string(), score).is_some() {
                return Err(Error::parse(path, lineno, format!("duplicate word {word:?}")));
            }
        }
        if entries.is_empty() {
            log::warn!("lexicon {} contains no entries", path.display());
        }
        log::info!("loaded {} lexicon entries from {}", entries.len(), path.display());
        Ok(WordComplexityLexicon {
            entries,
            source: Some(path.to_path_buf()),
            flagged: Vec::new(),
        })
    }

    /// Write as the same two-column TSV the loader reads.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        for (word, score) in &self.entries {
            writeln!(file, "{word}\t{score}").map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (String, f64)>) -> Self {
        WordComplexityLexicon {
            entries: entries.into_iter().collect(),
            source: None,
            flagged: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source(&self) -> Option<&Path> {
        self.source.as_deref()
    }

    /// Words whose score fell back to the plain mean because every rating
    /// was discarded.
    pub fn flagged(&self) -> &[String] {
        &self.flagged
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(w, &s)| (w.as_str(), s))
    }

    /// Exact probe, then lowercase.
    fn probe(&self, word: &str) -> Option<f64> {
        if let Some(&s) = self.entries.get(word) {
            return Some(s);
        }
        let lower = word.to_lowercase();
        if lower != word {
            if let Some(&s) = self.entries.get(lower.as_str()) {
                return Some(s);
            }
        }
        None
    }

    /// Look up a word or phrase. For a multi-word phrase the longest word is
    /// probed (first of equals on ties). If the surface form misses and a
    /// lemmatizer is given, its candidates are probed next. Absence is a
    /// valid result: `(false, 0.0)`.
    pub fn lookup(&self, phrase: &str, lemmatizer: Option<&dyn Lemmatizer>) -> (bool, f64) {
        let word = match longest_word(phrase) {
            Some(w) => w,
            None => return (false, 0.0),
        };
        if let Some(score) = self.probe(word) {
            return (true, score);
        }
        if let Some(lemmatizer) = lemmatizer {
            for lemma in lemmatizer.lemmas(word) {
                if let Some(score) = self.probe(&lemma) {
                    return (true, score);
                }
            }
            let lower = word.to_lowercase();
            if lower != word {
                for lemma in lemmatizer.lemmas(&lower) {
                    if let Some(score) = self.probe(&lemma) {
                        return (true, score);
                    }
                }
            }
        }
        (false, 0.0)
    }
}

/// The longest whitespace-separated word of a phrase (first wins on ties).
pub fn longest_word(phrase: &str) -> Option<&str> {
    let mut best: Option<(&str, usize)> = None;
    for word in phrase.split_whitespace() {
        let len = word.chars().count();
        if best.is_none_or(|(_, b)| len > b) {
            best = Some((word, len));
        }
    }
    best.map(|(w, _)| w)
}

/// Average each word's ratings after one pass of outlier removal: rating
/// r_i is discarded when it differs from the mean of the other ratings by
/// more than 2 points (`OUTLIER_DISTANCE`). If every rating for a word would be
/// discarded, the plain mean is kept and the word flagged.
pub fn aggregate_ratings(records: &[RatingRecord]) -> Result<WordComplexityLexicon> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no rating records"));
    }
    let mut entries = IndexMap::with_capacity(records.len());
    let mut flagged = Vec::new();
    for record in records {
        if record.ratings.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "word {:?} has {} rating(s); the discard rule needs at least 2",
                record.word,
                record.ratings.len()
            )));
        }
        for &r in &record.ratings {
            if !(1..=6).contains(&r) {
                return Err(Error::InvalidArgument(format!(
                    "word {:?} has rating {r} outside 1..6",
                    record.word
                )));
            }
        }
        let total: f64 = record.ratings.iter().map(|&r| r as f64).sum();
        let n = record.ratings.len() as f64;
        let survivors: Vec<f64> = record
            .ratings
            .iter()
            .map(|&r| r as f64)
            .filter(|&r| {
                let mean_rest = (total - r) / (n - 1.0);
                (r - mean_rest).abs() <= OUTLIER_DISTANCE
            })
            .collect();
        let score = if survivors.is_empty() {
            flagged.push(record.word.clone());
            total / n
        } else {
            survivors.iter().sum::<f64>() / survivors.len() as f64
        };
        entries.insert(record.word.clone(), score);
    }
    Ok(WordComplexityLexicon {
        entries,
        source: None,
        flagged,
    })
}

/// Pearson correlation between one annotator's ratings and the per-word mean
/// of all other annotators' ratings, over the words the annotator rated.
pub fn interannotator_agreement(records: &[RatingRecord], annotator: usize) -> Result<f64> {
    let mut own = Vec::new();
    let mut rest = Vec::new();
    for record in records {
        let Some(&r) = record.ratings.get(annotator) else {
            continue; // annotator did not rate this word
        };
        if record.ratings.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "word {:?} has no ratings besides annotator {annotator}'s",
                record.word
            )));
        }
        let total: f64 = record.ratings.iter().map(|&x| x as f64).sum();
        own.push(r as f64);
        rest.push((total - r as f64) / (record.ratings.len() - 1) as f64);
    }
    if own.len() < 2 {
        return Err(Error::EmptyInput(
            "annotator rated fewer than 2 words; agreement undefined",
        ));
    }
    pearson(&own, &rest).map_err(|e| match e {
        Error::ZeroVariance(_) => Error::ZeroVariance("undefined correlation"),
        other => other,
    })
}

/// Read a ratings file: `word<TAB>r1<TAB>r2...` with `#` comments.
pub fn load_ratings(path: impl AsRef<Path>) -> Result<Vec<RatingRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cols = trimmed.split('\t');
        let word = cols.next().unwrap_or_default();
        if word.is_empty() {
            return Err(Error::parse(path, lineno, "empty word column"));
        }
        let ratings = cols
            .map(|c| {
                c.trim()
                    .parse::<u8>()
                    .ok()
                    .filter(|r| (1..=6).contains(r))
                    .ok_or_else(|| {
                        Error::parse(path, lineno, format!("rating {c:?} is not an integer in 1..6"))
                    })
            })
            .collect::<Result<Vec<u8>>>()?;
        if ratings.is_empty() {
            return Err(Error::parse(path, lineno, "no ratings on line"));
        }
        records.push(RatingRecord::new(word, ratings));
    }
    Ok(records)
}
