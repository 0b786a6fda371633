//! Complex word identification: the lexicon-threshold classifier, the
//! nearest-centroid classifier with optional lexicon features, and readers
//! for the two shared-task file layouts.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::features::count_syllables;
use crate::lexicon::{SuffixLemmatizer, WordComplexityLexicon};
use crate::metrics::{self, EvalReport};
use crate::resources::{cosine, relative_frequency, EmbeddingStore, FrequencyTable};

/// One labelled target in context. `complex` is the gold label on training
/// and test data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CwiInstance {
    pub sentence: Vec<String>,
    pub target_start: usize,
    pub target_len: usize,
    pub complex: bool,
}

impl CwiInstance {
    pub fn validate(&self) -> Result<()> {
        if self.target_len == 0 || self.target_start + self.target_len > self.sentence.len() {
            return Err(Error::InvalidArgument(
                "target span lies outside the sentence".into(),
            ));
        }
        Ok(())
    }

    pub fn target_text(&self) -> String {
        self.sentence[self.target_start..self.target_start + self.target_len].join(" ")
    }
}

/// Coarse part-of-speech classes for the centroid features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosTag {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; 5] = [
        PosTag::Noun,
        PosTag::Verb,
        PosTag::Adjective,
        PosTag::Adverb,
        PosTag::Other,
    ];
}

pub trait PosTagger: Send + Sync {
    fn tag(&self, word: &str) -> PosTag;
}

/// Suffix-rule fallback tagger so the centroid classifier runs without an
/// external tagger. Unknown shapes default to noun, the largest open class.
#[derive(Debug, Default, Clone, Copy)]
pub struct SuffixTagger;

impl PosTagger for SuffixTagger {
    fn tag(&self, word: &str) -> PosTag {
        let w = word.to_lowercase();
        if !w.chars().any(|c| c.is_ascii_alphabetic()) {
            return PosTag::Other;
        }
        const ADV: &[&str] = &["ly"];
        const VERB: &[&str] = &["ing", "ize", "ise", "ify", "ate", "ed"];
        const ADJ: &[&str] = &[
            "ous", "ful", "ive", "able", "ible", "ish", "less", "ic", "al",
        ];
        const NOUN: &[&str] = &[
            "tion", "sion", "ness", "ment", "ity", "ance", "ence", "ship", "hood", "ism", "er",
            "or", "ist",
        ];
        for s in ADV {
            if w.ends_with(s) && w.len() > s.len() + 1 {
                return PosTag::Adverb;
            }
        }
        for s in NOUN {
            if w.ends_with(s) && w.len() > s.len() + 1 {
                return PosTag::Noun;
            }
        }
        for s in VERB {
            if w.ends_with(s) && w.len() > s.len() + 1 {
                return PosTag::Verb;
            }
        }
        for s in ADJ {
            if w.ends_with(s) && w.len() > s.len() + 1 {
                return PosTag::Adjective;
            }
        }
        PosTag::Noun
    }
}

/// Resource bundle for the centroid classifier. Absent optional resources
/// simply omit their feature columns.
#[derive(Clone)]
pub struct CwiResources {
    pub lexicon: Option<WordComplexityLexicon>,
    pub embeddings: Option<EmbeddingStore>,
    pub google_freq: Option<FrequencyTable>,
    pub wiki_simple: Option<FrequencyTable>,
    pub wiki_normal: Option<FrequencyTable>,
    /// Word -> sense count table.
    pub senses: Option<FrequencyTable>,
    pub tagger: Arc<dyn PosTagger>,
}

impl Default for CwiResources {
    fn default() -> Self {
        CwiResources {
            lexicon: None,
            embeddings: None,
            google_freq: None,
            wiki_simple: None,
            wiki_normal: None,
            senses: None,
            tagger: Arc::new(SuffixTagger),
        }
    }
}

// ---------------------------------------------------------------------------
// WC-only threshold classifier
// ---------------------------------------------------------------------------

/// Predicts `complex` when the lexicon score reaches the learned cut.
/// Out-of-vocabulary targets are predicted complex: the lexicon covers the
/// most frequent words, so absence correlates with rarity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WcThresholdClassifier {
    pub threshold: f64,
    /// True when the training data had a single class; the threshold is
    /// then arbitrary.
    pub degenerate: bool,
}

impl WcThresholdClassifier {
    pub fn predict(&self, target: &str, lexicon: &WordComplexityLexicon) -> bool {
        let (present, score) = lexicon.lookup(target, Some(&SuffixLemmatizer));
        if !present {
            return true;
        }
        score >= self.threshold
    }
}

/// G-score of a fixed threshold over the training instances.
fn threshold_g_score(
    threshold: f64,
    scores: &[(Option<f64>, bool)], // (lexicon score if in vocabulary, gold complex)
) -> f64 {
    let n = scores.len();
    let mut correct = 0usize;
    let mut tp = 0usize;
    let mut gold_complex = 0usize;
    for &(score, complex) in scores {
        let predicted = match score {
            None => true,
            Some(s) => s >= threshold,
        };
        if predicted == complex {
            correct += 1;
        }
        if complex {
            gold_complex += 1;
            if predicted {
                tp += 1;
            }
        }
    }
    let accuracy = correct as f64 / n as f64;
    let recall = if gold_complex == 0 {
        0.0
    } else {
        tp as f64 / gold_complex as f64
    };
    metrics::g_score(accuracy, recall)
}

/// Learn the complexity-score cut that maximizes the training G-score,
/// sweeping the midpoints of adjacent distinct scores plus one cut below
/// and one above the range. Ties pick the smallest cut.
pub fn train_wc_only(
    instances: &[CwiInstance],
    lexicon: &WordComplexityLexicon,
) -> Result<WcThresholdClassifier> {
    if instances.is_empty() {
        return Err(Error::EmptyInput("no training instances"));
    }
    let scores: Vec<(Option<f64>, bool)> = instances
        .iter()
        .map(|inst| {
            inst.validate()?;
            let (present, score) = lexicon.lookup(&inst.target_text(), Some(&SuffixLemmatizer));
            Ok((present.then_some(score), inst.complex))
        })
        .collect::<Result<_>>()?;
    let mut covered: Vec<f64> = scores.iter().filter_map(|(s, _)| *s).collect();
    if covered.is_empty() {
        return Err(Error::InvalidArgument(
            "lexicon covers none of the training targets".into(),
        ));
    }
    covered.sort_by(|a, b| a.partial_cmp(b).unwrap());
    covered.dedup();

    let mut cuts = Vec::with_capacity(covered.len() + 1);
    cuts.push(covered[0] - 1.0);
    for pair in covered.windows(2) {
        cuts.push((pair[0] + pair[1]) / 2.0);
    }
    cuts.push(covered[covered.len() - 1] + 1.0);

    let mut best = (cuts[0], f64::NEG_INFINITY);
    for &cut in &cuts {
        let g = threshold_g_score(cut, &scores);
        if g > best.1 {
            best = (cut, g);
        }
    }

    let one_class = instances.iter().all(|i| i.complex == instances[0].complex);
    if one_class {
        log::warn!("wc-only training data has a single class; threshold is degenerate");
    }
    Ok(WcThresholdClassifier {
        threshold: best.0,
        degenerate: one_class,
    })
}

// ---------------------------------------------------------------------------
// Nearest-centroid classifier
// ---------------------------------------------------------------------------

/// Nearest centroid over standardized features; equidistant points go to
/// `simple`.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidClassifier {
    feature_names: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
    centroid_simple: Vec<f64>,
    centroid_complex: Vec<f64>,
    with_wc: bool,
}

impl CentroidClassifier {
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn predict(&self, instance: &CwiInstance, resources: &CwiResources) -> Result<bool> {
        instance.validate()?;
        let x = centroid_features(instance, resources, self.with_wc)?;
        if x.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                actual: x.len(),
            });
        }
        let z: Vec<f64> = x
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect();
        let d = |c: &[f64]| -> f64 {
            z.iter()
                .zip(c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        Ok(d(&self.centroid_complex) < d(&self.centroid_simple))
    }
}

fn centroid_feature_names(resources: &CwiResources, with_wc: bool) -> Vec<String> {
    let mut names = vec![
        "word_count".to_string(),
        "char_len".to_string(),
        "syllables".to_string(),
    ];
    if resources.senses.is_some() {
        names.push("n_senses".to_string());
    }
    for tag in ["noun", "verb", "adj", "adv", "other"] {
        names.push(format!("pos_{tag}"));
    }
    if resources.embeddings.is_some() {
        names.push("ctx_cosine".to_string());
    }
    if resources.google_freq.is_some() {
        names.push("google_freq".to_string());
    }
    if resources.wiki_simple.is_some() && resources.wiki_normal.is_some() {
        names.push("wiki_rel_freq".to_string());
    }
    if with_wc {
        names.push("lex_present".to_string());
        names.push("lex_score".to_string());
    }
    names
}

fn centroid_features(
    instance: &CwiInstance,
    resources: &CwiResources,
    with_wc: bool,
) -> Result<Vec<f64>> {
    let target = instance.target_text();
    let words: Vec<&str> = target.split_whitespace().collect();
    let mut x = vec![
        words.len() as f64,
        target.chars().count() as f64,
        count_syllables(&target) as f64,
    ];
    if let Some(senses) = &resources.senses {
        x.push(senses.count(&target) as f64);
    }
    // One-hot over the coarse POS of the head (longest) word.
    let head = crate::lexicon::longest_word(&target).unwrap_or(&target);
    let tag = resources.tagger.tag(head);
    for t in PosTag::ALL {
        x.push(if t == tag { 1.0 } else { 0.0 });
    }
    if let Some(store) = &resources.embeddings {
        let target_emb = store.phrase_embedding(&target);
        let rest: Vec<&str> = instance
            .sentence
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                *i < instance.target_start || *i >= instance.target_start + instance.target_len
            })
            .map(|(_, t)| t.as_str())
            .collect();
        let ctx_emb = store.phrase_embedding(&rest.join(" "));
        x.push(cosine(&target_emb.vector, &ctx_emb.vector)?);
    }
    if let Some(google) = &resources.google_freq {
        x.push(google.log_count(&target));
    }
    if let (Some(simple), Some(normal)) = (&resources.wiki_simple, &resources.wiki_normal) {
        x.push(relative_frequency(simple, normal, &target));
    }
    if with_wc {
        let lexicon = resources
            .lexicon
            .as_ref()
            .ok_or(Error::MissingResource("word-complexity lexicon"))?;
        let (present, score) = lexicon.lookup(&target, Some(&SuffixLemmatizer));
        x.push(if present { 1.0 } else { 0.0 });
        x.push(score);
    }
    Ok(x)
}

/// Fit per-class centroids in z-scored feature space.
pub fn train_nearest_centroid(
    instances: &[CwiInstance],
    resources: &CwiResources,
    with_wc: bool,
) -> Result<CentroidClassifier> {
    if instances.is_empty() {
        return Err(Error::EmptyInput("no training instances"));
    }
    let feature_names = centroid_feature_names(resources, with_wc);
    let rows: Vec<Vec<f64>> = instances
        .iter()
        .map(|i| centroid_features(i, resources, with_wc))
        .collect::<Result<_>>()?;
    let dim = feature_names.len();
    let n = rows.len() as f64;

    let mut means = vec![0.0; dim];
    for row in &rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut stds = vec![0.0; dim];
    for row in &rows {
        for (s, (v, m)) in stds.iter_mut().zip(row.iter().zip(&means)) {
            *s += (v - m) * (v - m);
        }
    }
    for s in stds.iter_mut() {
        *s = (*s / n).sqrt().max(1e-9);
    }

    let mut sums = [vec![0.0; dim], vec![0.0; dim]];
    let mut counts = [0usize; 2];
    for (row, inst) in rows.iter().zip(instances) {
        let cls = usize::from(inst.complex);
        counts[cls] += 1;
        for (acc, (v, (m, s))) in sums[cls]
            .iter_mut()
            .zip(row.iter().zip(means.iter().zip(&stds)))
        {
            *acc += (v - m) / s;
        }
    }
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::InvalidArgument(
            "nearest centroid needs at least one instance of each class".into(),
        ));
    }
    for (sum, count) in sums.iter_mut().zip(counts) {
        for v in sum.iter_mut() {
            *v /= count as f64;
        }
    }
    let [centroid_simple, centroid_complex] = sums;
    Ok(CentroidClassifier {
        feature_names,
        means,
        stds,
        centroid_simple,
        centroid_complex,
        with_wc,
    })
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Accuracy, complex-class F1, and G-score (the harmonic mean of accuracy
/// and complex recall) for aligned predictions.
pub fn evaluate_cwi(predictions: &[bool], golds: &[bool]) -> Result<EvalReport> {
    let labels = |v: &[bool]| -> Vec<&'static str> {
        v.iter().map(|&c| if c { "complex" } else { "simple" }).collect()
    };
    let rep = metrics::class_precisions(
        &labels(predictions),
        &labels(golds),
        &["simple", "complex"],
        &"complex",
    )?;
    let gold_complex = golds.iter().filter(|&&g| g).count();
    let tp = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| **p && **g)
        .count();
    let recall = if gold_complex == 0 {
        0.0
    } else {
        tp as f64 / gold_complex as f64
    };
    let mut report = EvalReport::new(golds.len());
    report.push("g_score", metrics::g_score(rep.accuracy, recall));
    report.push("f_score", rep.f1_positive);
    report.push("accuracy", rep.accuracy);
    report.push("recall_complex", recall);
    report.per_class = rep.per_class;
    Ok(report)
}

// ---------------------------------------------------------------------------
// Readers
// ---------------------------------------------------------------------------

/// `sentence<TAB>word<TAB>token-index<TAB>label` layout (one target per
/// line, label 0 = simple, 1 = complex).
pub fn load_semeval2016(path: impl AsRef<Path>) -> Result<Vec<CwiInstance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(Error::parse(path, lineno, "expected 4 tab-separated columns"));
        }
        let sentence: Vec<String> = cols[0].split_whitespace().map(String::from).collect();
        let word = cols[1];
        let start: usize = cols[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, "non-integer token index"))?;
        let label = match cols[3].trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(path, lineno, format!("bad label {other:?}")))
            }
        };
        let target_len = word.split_whitespace().count().max(1);
        let inst = CwiInstance {
            sentence,
            target_start: start,
            target_len,
            complex: label,
        };
        inst.validate()
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        out.push(inst);
    }
    Ok(out)
}

/// The 11-column layout: id, sentence, char start, char end, target, four
/// annotator counts, binary label, probabilistic label.
pub fn load_cwig3g2(path: impl AsRef<Path>) -> Result<Vec<CwiInstance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 11 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 11 tab-separated columns, found {}", cols.len()),
            ));
        }
        let sentence_text = cols[1];
        let start: usize = cols[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, "non-integer start offset"))?;
        let end: usize = cols[3]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, "non-integer end offset"))?;
        let label = match cols[9].trim() {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(path, lineno, format!("bad label {other:?}")))
            }
        };
        // Convert the character span to a token span. The file's offsets
        // count characters, so the scan does too.
        let mut sentence: Vec<String> = Vec::new();
        let mut token_start = None;
        let mut token_end = None;
        let mut current = String::new();
        let mut current_begin = 0usize;
        for (char_pos, ch) in sentence_text
            .chars()
            .chain(std::iter::once(' '))
            .enumerate()
        {
            if ch.is_whitespace() {
                if !current.is_empty() {
                    if current_begin < end && char_pos > start {
                        if token_start.is_none() {
                            token_start = Some(sentence.len());
                        }
                        token_end = Some(sentence.len() + 1);
                    }
                    sentence.push(std::mem::take(&mut current));
                }
            } else {
                if current.is_empty() {
                    current_begin = char_pos;
                }
                current.push(ch);
            }
        }
        let (Some(ts), Some(te)) = (token_start, token_end) else {
            return Err(Error::parse(
                path,
                lineno,
                format!("char span {start}..{end} matches no tokens"),
            ));
        };
        let inst = CwiInstance {
            sentence,
            target_start: ts,
            target_len: te - ts,
            complex: label,
        };
        inst.validate()
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        out.push(inst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::io::Write as _;

    fn inst(sentence: &str, start: usize, len: usize, complex: bool) -> CwiInstance {
        CwiInstance {
            sentence: sentence.split_whitespace().map(String::from).collect(),
            target_start: start,
            target_len: len,
            complex,
        }
    }

    fn word_inst(word: &str, complex: bool) -> CwiInstance {
        CwiInstance {
            sentence: vec![word.to_string()],
            target_start: 0,
            target_len: 1,
            complex,
        }
    }

    #[test]
    fn wc_only_separable_fixture() {
        // Complex words score >= 4, simple ones < 4.
        let lexicon = WordComplexityLexicon::from_entries([
            ("watch".to_string(), 1.0),
            ("pattern".to_string(), 2.4),
            ("revenue".to_string(), 3.6),
            ("cortex".to_string(), 4.2),
            ("assay".to_string(), 5.8),
        ]);
        let train: Vec<CwiInstance> = vec![
            word_inst("watch", false),
            word_inst("pattern", false),
            word_inst("revenue", false),
            word_inst("cortex", true),
            word_inst("assay", true),
        ];
        let clf = train_wc_only(&train, &lexicon).unwrap();
        assert!(!clf.degenerate);
        assert!(clf.threshold > 3.6 && clf.threshold <= 4.2, "{}", clf.threshold);
        for i in &train {
            assert_eq!(clf.predict(&i.target_text(), &lexicon), i.complex);
        }
        // OOV targets are predicted complex.
        assert!(clf.predict("zzqx", &lexicon));
    }

    #[test]
    fn wc_only_matches_exhaustive_sweep_oracle() {
        let words: [(&str, f64, bool); 10] = [
            ("a", 1.0, false),
            ("b", 1.5, false),
            ("c", 2.0, true), // noise
            ("d", 2.5, false),
            ("e", 3.0, false),
            ("f", 3.5, true),
            ("g", 4.0, true),
            ("h", 4.5, false), // noise
            ("i", 5.0, true),
            ("j", 5.5, true),
        ];
        let lexicon = WordComplexityLexicon::from_entries(
            words.iter().map(|(w, s, _)| (w.to_string(), *s)),
        );
        let train: Vec<CwiInstance> =
            words.iter().map(|(w, _, c)| word_inst(w, *c)).collect();
        let clf = train_wc_only(&train, &lexicon).unwrap();

        // Oracle: brute force over a dense grid of cuts.
        let scores: Vec<(Option<f64>, bool)> =
            words.iter().map(|(_, s, c)| (Some(*s), *c)).collect();
        let mut best_g = f64::NEG_INFINITY;
        let mut cut = 0.0;
        for i in 0..=110 {
            let t = i as f64 * 0.05;
            let g = threshold_g_score(t, &scores);
            if g > best_g {
                best_g = g;
                cut = t;
            }
        }
        assert_abs_diff_eq!(
            threshold_g_score(clf.threshold, &scores),
            best_g,
            epsilon = 1e-12
        );
        // Both cuts make identical predictions.
        for (_, s, _) in words {
            assert_eq!(s >= clf.threshold, s >= cut);
        }
    }

    #[test]
    fn wc_only_degenerate_single_class() {
        let lexicon = WordComplexityLexicon::from_entries([
            ("x".to_string(), 2.0),
            ("y".to_string(), 3.0),
        ]);
        let train = vec![word_inst("x", false), word_inst("y", false)];
        let clf = train_wc_only(&train, &lexicon).unwrap();
        assert!(clf.degenerate);
    }

    #[test]
    fn wc_only_zero_coverage_is_an_error() {
        let lexicon = WordComplexityLexicon::from_entries([]);
        let train = vec![word_inst("anything", true), word_inst("more", false)];
        assert!(train_wc_only(&train, &lexicon).is_err());
    }

    #[test]
    fn centroid_separable_clusters() {
        // Short frequent words vs long rare ones: surface features separate
        // them cleanly.
        let mut train = Vec::new();
        for w in ["cat", "dog", "sun", "map", "cup"] {
            train.push(word_inst(w, false));
        }
        for w in [
            "perspicacious",
            "sesquipedalian",
            "circumlocution",
            "obfuscation",
            "grandiloquent",
        ] {
            train.push(word_inst(w, true));
        }
        let resources = CwiResources::default();
        let clf = train_nearest_centroid(&train, &resources, false).unwrap();
        for i in &train {
            assert_eq!(clf.predict(i, &resources).unwrap(), i.complex);
        }
    }

    #[test]
    fn centroid_tie_goes_to_simple() {
        // Two mirror-image clusters leave the origin exactly equidistant.
        let train = vec![
            word_inst("ab", false),
            word_inst("abcdef", true),
        ];
        let resources = CwiResources::default();
        let clf = train_nearest_centroid(&train, &resources, false).unwrap();
        // A word halfway between the two training points in every feature.
        let probe = word_inst("abcd", false);
        assert!(!clf.predict(&probe, &resources).unwrap());
    }

    #[test]
    fn centroid_empty_class_is_an_error() {
        let train = vec![word_inst("a", true), word_inst("b", true)];
        assert!(train_nearest_centroid(&train, &CwiResources::default(), false).is_err());
    }

    #[test]
    fn wc_features_lift_an_ambiguous_fixture_to_perfect() {
        // Same surface shape across classes; only the lexicon separates.
        let lexicon = WordComplexityLexicon::from_entries([
            ("bench".to_string(), 1.2),
            ("chair".to_string(), 1.3),
            ("table".to_string(), 1.1),
            ("fugue".to_string(), 5.2),
            ("ictus".to_string(), 5.4),
            ("nadir".to_string(), 5.1),
        ]);
        let train = vec![
            word_inst("bench", false),
            word_inst("chair", false),
            word_inst("table", false),
            word_inst("fugue", true),
            word_inst("ictus", true),
            word_inst("nadir", true),
        ];
        let resources = CwiResources {
            lexicon: Some(lexicon),
            ..Default::default()
        };
        let without = train_nearest_centroid(&train, &resources, false).unwrap();
        let with = train_nearest_centroid(&train, &resources, true).unwrap();
        let acc = |clf: &CentroidClassifier| -> f64 {
            let correct = train
                .iter()
                .filter(|i| clf.predict(i, &resources).unwrap() == i.complex)
                .count();
            correct as f64 / train.len() as f64
        };
        assert!(acc(&without) < 1.0);
        assert_eq!(acc(&with), 1.0);
    }

    #[test]
    fn suffix_tagger_rules() {
        let t = SuffixTagger;
        assert_eq!(t.tag("quickly"), PosTag::Adverb);
        assert_eq!(t.tag("simplification"), PosTag::Noun);
        assert_eq!(t.tag("running"), PosTag::Verb);
        assert_eq!(t.tag("beautiful"), PosTag::Adjective);
        assert_eq!(t.tag("cat"), PosTag::Noun);
        assert_eq!(t.tag("123"), PosTag::Other);
    }

    #[test]
    fn evaluate_cwi_matches_hand_counts() {
        // gold:  C C C S S S S S
        // pred:  C S C C S S S S
        // accuracy 6/8; recall 2/3; precision(complex) 2/3; f1 2/3
        let gold = [true, true, true, false, false, false, false, false];
        let pred = [true, false, true, true, false, false, false, false];
        let report = evaluate_cwi(&pred, &gold).unwrap();
        assert_abs_diff_eq!(report.metrics["accuracy"], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(report.metrics["recall_complex"], 2.0 / 3.0, epsilon = 1e-12);
        let expected_g = metrics::g_score(0.75, 2.0 / 3.0);
        assert_abs_diff_eq!(report.metrics["g_score"], expected_g, epsilon = 1e-12);
        assert_abs_diff_eq!(report.metrics["f_score"], 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn semeval2016_reader() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            "Nine people were killed in the bombardment .\tbombardment\t6\t1"
        )
        .unwrap();
        writeln!(f, "The cat sat .\tcat\t1\t0").unwrap();
        let instances = load_semeval2016(f.path()).unwrap();
        assert_eq!(instances.len(), 2);
        assert_eq!(instances[0].target_text(), "bombardment");
        assert!(instances[0].complex);
        assert!(!instances[1].complex);
    }

    #[test]
    fn cwig3g2_reader_char_spans() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        // target "bombardment" at chars 30..41
        let sentence = "Nine people were killed in the bombardment .";
        let start = sentence.find("bombardment").unwrap();
        let end = start + "bombardment".len();
        writeln!(
            f,
            "id1\t{sentence}\t{start}\t{end}\tbombardment\t10\t10\t6\t4\t1\t0.5"
        )
        .unwrap();
        let instances = load_cwig3g2(f.path()).unwrap();
        assert_eq!(instances.len(), 1);
        assert_eq!(instances[0].target_text(), "bombardment");
        assert!(instances[0].complex);

        // Multi-token span.
        let mut f2 = tempfile::NamedTempFile::new().unwrap();
        let s2 = "A grand piano stood there .";
        let st = s2.find("grand").unwrap();
        let en = s2.find("piano").unwrap() + "piano".len();
        writeln!(f2, "id2\t{s2}\t{st}\t{en}\tgrand piano\t10\t10\t1\t0\t0\t0.1").unwrap();
        let instances = load_cwig3g2(f2.path()).unwrap();
        assert_eq!(instances[0].target_text(), "grand piano");
        assert!(!instances[0].complex);
    }

    #[test]
    fn cwig3g2_reader_counts_characters_not_bytes() {
        // "café" is 4 characters but 5 bytes; the offsets in the file count
        // characters.
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let sentence = "the café naïveté was obvious";
        let chars: Vec<char> = sentence.chars().collect();
        let start = 9; // first char of "naïveté"
        let end = start + "naïveté".chars().count();
        assert_eq!(chars[start..end].iter().collect::<String>(), "naïveté");
        writeln!(f, "id\t{sentence}\t{start}\t{end}\tnaïveté\t10\t10\t9\t8\t1\t0.9").unwrap();
        let instances = load_cwig3g2(f.path()).unwrap();
        assert_eq!(instances[0].target_text(), "naïveté");
        assert!(instances[0].complex);
    }

    #[test]
    fn readers_reject_malformed_rows() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "only two\tcolumns").unwrap();
        assert!(load_semeval2016(f.path()).is_err());

        let mut f2 = tempfile::NamedTempFile::new().unwrap();
        writeln!(f2, "id\tshort line\t0\t2\tx\t1\t1\t0\t0\t7\t0.0").unwrap();
        assert!(load_cwig3g2(f2.path()).is_err());
    }
}
