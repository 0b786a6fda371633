//! Paraphrase-rule scoring: three-way simplicity classification, the
//! streaming batch pipeline that turns a full rule database into a scored
//! resource, and substitution generation on top of it.
//!
//! A rule maps a source phrase to a target phrase. The model scores the
//! ordered pair (source, target); positive means the source is the more
//! complex side, i.e. the rule simplifies. Scores map to classes with the
//! fixed thresholds -0.4 / 0.4, boundary values falling into the middle
//! class.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::{extract_pair, FeatureSchema, PairFeatures, Resources};
use crate::net::NRRModel;

/// Class thresholds on the predicted score.
pub const THRESHOLD_LO: f64 = -0.4;
pub const THRESHOLD_HI: f64 = 0.4;

/// Quality-score floors for substitution generation.
pub const QUALITY_MIN_WORD: f64 = 3.5;
pub const QUALITY_MIN_PHRASE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleClass {
    Simplifying,
    NoDifference,
    Complicating,
}

impl RuleClass {
    pub const ALL: [RuleClass; 3] = [
        RuleClass::Simplifying,
        RuleClass::NoDifference,
        RuleClass::Complicating,
    ];

    /// Regression label: +1 simplifying, 0 no difference, -1 complicating.
    pub fn label(self) -> f64 {
        match self {
            RuleClass::Simplifying => 1.0,
            RuleClass::NoDifference => 0.0,
            RuleClass::Complicating => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RuleClass::Simplifying => "simplifying",
            RuleClass::NoDifference => "no-difference",
            RuleClass::Complicating => "complicating",
        }
    }
}

impl fmt::Display for RuleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplifying" | "+1" | "1" => Ok(RuleClass::Simplifying),
            "no-difference" | "nodiff" | "0" => Ok(RuleClass::NoDifference),
            "complicating" | "-1" => Ok(RuleClass::Complicating),
            other => Err(Error::InvalidArgument(format!(
                "unknown rule class {other:?}"
            ))),
        }
    }
}

/// Map a predicted score to its class. The thresholds themselves belong to
/// the middle class.
pub fn classify_score(yhat: f64) -> RuleClass {
    if yhat < THRESHOLD_LO {
        RuleClass::Complicating
    } else if yhat > THRESHOLD_HI {
        RuleClass::Simplifying
    } else {
        RuleClass::NoDifference
    }
}

/// One paraphrase rule. `label` is the human class on annotated training
/// data, absent for the raw database.
#[derive(Debug, Clone, PartialEq)]
pub struct ParaphraseRule {
    pub category: String,
    pub source: String,
    pub target: String,
    pub quality: f64,
    pub label: Option<RuleClass>,
}

impl ParaphraseRule {
    /// A rule counts as lexical when both sides are single words; phrasal
    /// rules face the higher quality floor.
    pub fn is_word_rule(&self) -> bool {
        !self.source.trim().contains(char::is_whitespace)
            && !self.target.trim().contains(char::is_whitespace)
    }

    pub fn quality_floor(&self) -> f64 {
        if self.is_word_rule() {
            QUALITY_MIN_WORD
        } else {
            QUALITY_MIN_PHRASE
        }
    }
}

/// Column positions inside a `|||`-delimited rule line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleColumns {
    pub category: usize,
    pub source: usize,
    pub target: usize,
    pub quality: usize,
    pub label: Option<usize>,
}

impl Default for RuleColumns {
    fn default() -> Self {
        RuleColumns {
            category: 0,
            source: 1,
            target: 2,
            quality: 3,
            label: None,
        }
    }
}

/// Parse one `category ||| source ||| target ||| quality` line.
pub fn parse_rule_line(line: &str, columns: &RuleColumns) -> std::result::Result<ParaphraseRule, String> {
    let fields: Vec<&str> = line.split("|||").map(str::trim).collect();
    let need = [
        columns.category,
        columns.source,
        columns.target,
        columns.quality,
    ]
    .into_iter()
    .chain(columns.label)
    .max()
    .unwrap_or(0);
    if fields.len() <= need {
        return Err(format!(
            "expected at least {} |||-separated fields, found {}",
            need + 1,
            fields.len()
        ));
    }
    let quality: f64 = fields[columns.quality]
        .parse()
        .map_err(|_| format!("non-numeric quality {:?}", fields[columns.quality]))?;
    let label = match columns.label {
        Some(idx) => Some(
            RuleClass::from_str(fields[idx]).map_err(|_| format!("bad label {:?}", fields[idx]))?,
        ),
        None => None,
    };
    if fields[columns.source].is_empty() || fields[columns.target].is_empty() {
        return Err("empty source or target phrase".to_string());
    }
    Ok(ParaphraseRule {
        category: fields[columns.category].to_string(),
        source: fields[columns.source].to_string(),
        target: fields[columns.target].to_string(),
        quality,
        label,
    })
}

/// Strict reader for complete rule files (training data): any malformed
/// line is an error with its line number.
pub fn load_rules(path: impl AsRef<Path>, columns: &RuleColumns) -> Result<Vec<ParaphraseRule>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let rule =
            parse_rule_line(&line, columns).map_err(|m| Error::parse(path, idx + 1, m))?;
        out.push(rule);
    }
    Ok(out)
}

/// Lenient reader for raw database files: malformed lines are logged,
/// counted, and skipped, matching the streaming scorer's behaviour.
pub fn load_rules_lenient(
    path: impl AsRef<Path>,
    columns: &RuleColumns,
) -> Result<(Vec<ParaphraseRule>, u64)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut skipped = 0u64;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_rule_line(&line, columns) {
            Ok(rule) => out.push(rule),
            Err(message) => {
                log::warn!("skipping malformed rule at line {}: {message}", idx + 1);
                skipped += 1;
            }
        }
    }
    Ok((out, skipped))
}

/// Training rows from labeled rules: the (source, target) pair without
/// context, labelled -1 / 0 / +1.
pub fn rules_training_rows(
    rules: &[ParaphraseRule],
    resources: &Resources,
    schema: &FeatureSchema,
) -> Result<Vec<(PairFeatures, f64)>> {
    rules
        .iter()
        .map(|rule| {
            let label = rule.label.ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "rule {} -> {} has no gold class",
                    rule.source, rule.target
                ))
            })?;
            let features = extract_pair(&rule.source, &rule.target, None, resources, schema)?;
            Ok((features, label.label()))
        })
        .collect()
}

/// Score one rule: relative complexity of (source, target).
pub fn score_rule(model: &NRRModel, resources: &Resources, rule: &ParaphraseRule) -> Result<f64> {
    model.score_pair(&rule.source, &rule.target, None, resources)
}

/// Score and classify one rule in a single step.
pub fn classify_rule(
    model: &NRRModel,
    resources: &Resources,
    rule: &ParaphraseRule,
) -> Result<(f64, RuleClass)> {
    let yhat = score_rule(model, resources, rule)?;
    Ok((yhat, classify_score(yhat)))
}

/// Options for the batch scorer.
#[derive(Debug, Clone)]
pub struct BuildOptions {
    /// Worker threads for scoring; output order is preserved regardless.
    pub jobs: usize,
    /// Rules per write-and-checkpoint cycle.
    pub batch_size: usize,
    /// Stop after this many scored rules (the checkpoint stays behind, so a
    /// later run resumes where this one stopped).
    pub limit: Option<u64>,
    /// Pick up from an existing checkpoint instead of starting over.
    pub resume: bool,
    pub columns: RuleColumns,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            jobs: 1,
            batch_size: 1024,
            limit: None,
            resume: true,
            columns: RuleColumns::default(),
        }
    }
}

/// Counters reported by the batch scorer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub scored: u64,
    pub skipped: u64,
    /// Counts per class, indexed like [`RuleClass::ALL`].
    pub class_counts: [u64; 3],
    /// False when a `limit` stopped the run early.
    pub completed: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct Checkpoint {
    lines_consumed: u64,
    output_bytes: u64,
    scored: u64,
    skipped: u64,
    class_counts: [u64; 3],
}

fn checkpoint_path(output: &Path) -> PathBuf {
    let mut os = output.as_os_str().to_owned();
    os.push(".ckpt");
    PathBuf::from(os)
}

fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<()> {
    let tmp = path.with_extension("ckpt.tmp");
    let body = format!(
        "nrr-simpleppdb-checkpoint v1\nlines {}\nbytes {}\nscored {}\nskipped {}\nclasses {} {} {}\n",
        ck.lines_consumed,
        ck.output_bytes,
        ck.scored,
        ck.skipped,
        ck.class_counts[0],
        ck.class_counts[1],
        ck.class_counts[2],
    );
    std::fs::write(&tmp, body).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut ck = Checkpoint::default();
    let mut lines = body.lines();
    if lines.next() != Some("nrr-simpleppdb-checkpoint v1") {
        return Err(Error::CorruptFile {
            path: path.to_path_buf(),
            message: "unrecognized checkpoint header".into(),
        });
    }
    for line in lines {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let mut next = || -> Result<u64> {
            parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::CorruptFile {
                    path: path.to_path_buf(),
                    message: format!("bad checkpoint field {key:?}"),
                })
        };
        match key {
            "lines" => ck.lines_consumed = next()?,
            "bytes" => ck.output_bytes = next()?,
            "scored" => ck.scored = next()?,
            "skipped" => ck.skipped = next()?,
            "classes" => {
                for slot in ck.class_counts.iter_mut() {
                    *slot = next()?;
                }
            }
            _ => {}
        }
    }
    Ok(ck)
}

/// Stream a rule file through the model into the scored resource:
/// `category<TAB>source<TAB>target<TAB>yhat<TAB>class` per rule.
///
/// Work proceeds in batches, each scored (in parallel when `jobs` > 1,
/// order preserved), appended to the output, flushed, and recorded in a
/// checkpoint sidecar. A killed or limited run resumes at the last
/// checkpoint and the final file is byte-identical to an uninterrupted run.
/// Malformed lines are logged, counted, and skipped.
pub fn build_simpleppdb(
    model: &NRRModel,
    resources: &Resources,
    input: impl AsRef<Path>,
    output: impl AsRef<Path>,
    options: &BuildOptions,
) -> Result<BuildStats> {
    let input = input.as_ref();
    let output = output.as_ref();
    if options.jobs < 1 {
        return Err(Error::InvalidArgument("jobs must be >= 1".into()));
    }
    if options.batch_size < 1 {
        return Err(Error::InvalidArgument("batch size must be >= 1".into()));
    }

    let ckpt_path = checkpoint_path(output);
    let mut ck = Checkpoint::default();
    if options.resume && ckpt_path.exists() {
        ck = read_checkpoint(&ckpt_path)?;
        log::info!(
            "resuming from checkpoint: {} rules scored, {} input lines consumed",
            ck.scored,
            ck.lines_consumed
        );
    }

    // Truncate the output to the last checkpointed byte (drops any partial
    // tail a killed run may have left) and position for appending.
    let out_file = OpenOptions::new()
        .create(true)
        .truncate(false)
        .write(true)
        .open(output)
        .map_err(|e| Error::io(output, e))?;
    out_file
        .set_len(ck.output_bytes)
        .map_err(|e| Error::io(output, e))?;
    let mut out_file = out_file;
    out_file
        .seek(SeekFrom::Start(ck.output_bytes))
        .map_err(|e| Error::io(output, e))?;
    let mut writer = BufWriter::new(out_file);

    let in_file = File::open(input).map_err(|e| Error::io(input, e))?;
    let mut lines = BufReader::new(in_file).lines();
    for _ in 0..ck.lines_consumed {
        if lines.next().is_none() {
            return Err(Error::CorruptFile {
                path: input.to_path_buf(),
                message: "input is shorter than the checkpoint expects".into(),
            });
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;

    let mut done = false;
    let limit = options.limit.unwrap_or(u64::MAX);
    while !done && ck.scored < limit {
        // Gather one batch of parseable rules.
        let mut batch: Vec<ParaphraseRule> = Vec::with_capacity(options.batch_size);
        let mut consumed = 0u64;
        let mut skipped = 0u64;
        let budget = options
            .batch_size
            .min((limit - ck.scored) as usize);
        while batch.len() < budget {
            match lines.next() {
                None => {
                    done = true;
                    break;
                }
                Some(line) => {
                    let line = line.map_err(|e| Error::io(input, e))?;
                    consumed += 1;
                    if line.trim().is_empty() || line.starts_with('#') {
                        continue;
                    }
                    match parse_rule_line(&line, &options.columns) {
                        Ok(rule) => batch.push(rule),
                        Err(message) => {
                            log::warn!(
                                "skipping malformed rule at input line {}: {message}",
                                ck.lines_consumed + consumed
                            );
                            skipped += 1;
                        }
                    }
                }
            }
        }

        if !batch.is_empty() {
            let scored: Vec<f64> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|rule| score_rule(model, resources, rule))
                    .collect::<Result<Vec<f64>>>()
            })?;
            for (rule, yhat) in batch.iter().zip(&scored) {
                let class = classify_score(*yhat);
                ck.class_counts[RuleClass::ALL
                    .iter()
                    .position(|c| *c == class)
                    .expect("class is in ALL")] += 1;
                writeln!(
                    writer,
                    "{}\t{}\t{}\t{:.6}\t{}",
                    rule.category, rule.source, rule.target, yhat, class
                )
                .map_err(|e| Error::io(output, e))?;
            }
            ck.scored += batch.len() as u64;
        }
        ck.lines_consumed += consumed;
        ck.skipped += skipped;

        writer.flush().map_err(|e| Error::io(output, e))?;
        ck.output_bytes = writer
            .get_ref()
            .metadata()
            .map_err(|e| Error::io(output, e))?
            .len();
        write_checkpoint(&ckpt_path, &ck)?;
    }

    let completed = done;
    if completed {
        let _ = std::fs::remove_file(&ckpt_path);
    }
    Ok(BuildStats {
        scored: ck.scored,
        skipped: ck.skipped,
        class_counts: ck.class_counts,
        completed,
    })
}

/// Assign rules to `k` cross-validation folds so that the vocabularies of
/// different folds are disjoint: rules sharing any word on either side end
/// up in the same fold. Connected word groups are dealt to the currently
/// smallest fold, in a seeded shuffle order.
pub fn vocabulary_disjoint_folds(
    rules: &[ParaphraseRule],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if k < 1 {
        return Err(Error::InvalidArgument("fold count must be >= 1".into()));
    }
    let mut word_ids: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut rule_root = Vec::with_capacity(rules.len());
    for rule in rules {
        let mut first: Option<usize> = None;
        for word in rule
            .source
            .split_whitespace()
            .chain(rule.target.split_whitespace())
        {
            let next = parent.len();
            let id = *word_ids.entry(word.to_lowercase()).or_insert_with(|| {
                parent.push(next);
                next
            });
            let root = find(&mut parent, id);
            match first {
                None => first = Some(root),
                Some(f) => {
                    let fr = find(&mut parent, f);
                    parent[root] = fr;
                    first = Some(fr);
                }
            }
        }
        rule_root.push(first.expect("rules have non-empty phrases"));
    }

    // Group rules by component, in first-appearance order.
    let mut groups: indexmap::IndexMap<usize, Vec<usize>> = indexmap::IndexMap::new();
    for (idx, &root) in rule_root.iter().enumerate() {
        let canonical = find(&mut parent, root);
        groups.entry(canonical).or_default().push(idx);
    }
    let mut components: Vec<Vec<usize>> = groups.into_values().collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    components.shuffle(&mut rng);
    if components.len() < k {
        log::warn!(
            "only {} vocabulary-disjoint groups for {} folds; some folds will be empty",
            components.len(),
            k
        );
    }

    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for component in components {
        let smallest = folds
            .iter()
            .enumerate()
            .min_by_key(|(i, f)| (f.len(), *i))
            .map(|(i, _)| i)
            .expect("k >= 1");
        folds[smallest].extend(component);
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// A scored substitution candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Substitution {
    pub text: String,
    pub yhat: f64,
    pub class: RuleClass,
}

/// Candidate substitutions for a target: rules whose source matches the
/// target (and category, when given), passing the per-arity quality floor,
/// ranked most simplifying first. A target with no surviving rules yields
/// an empty list.
pub fn generate_substitutions(
    target: &str,
    category: Option<&str>,
    rules: &[ParaphraseRule],
    model: &NRRModel,
    resources: &Resources,
) -> Result<Vec<Substitution>> {
    let target_lower = target.to_lowercase();
    let mut scored: Vec<Substitution> = Vec::new();
    for rule in rules {
        if rule.source != target && rule.source.to_lowercase() != target_lower {
            continue;
        }
        if let Some(cat) = category {
            if rule.category != cat {
                continue;
            }
        }
        if rule.quality < rule.quality_floor() {
            continue;
        }
        let yhat = score_rule(model, resources, rule)?;
        scored.push(Substitution {
            text: rule.target.clone(),
            yhat,
            class: classify_score(yhat),
        });
    }
    // Most simplifying first; ties and duplicates resolved by text.
    scored.sort_by(|a, b| {
        b.yhat
            .partial_cmp(&a.yhat)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.text.cmp(&b.text))
    });
    scored.dedup_by(|a, b| a.text == b.text);
    Ok(scored)
}
