//! Implementations of the subcommands. Each returns the process exit code
//! on success so checks like `gradcheck` can signal failure without an
//! error message.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};

use nrr_core::binning::BinnerConfig;
use nrr_core::features::{FeatureGroup, FeatureSchema, Resources};
use nrr_core::lexicon::{aggregate_ratings, interannotator_agreement, load_ratings};
use nrr_core::metrics::{self, EvalReport};
use nrr_core::net::{self, NRRModel, TrainConfig};
use nrr_core::resources::{FrequencyTable, NGramLanguageModel};
use nrr_core::tasks::cwi::{
    evaluate_cwi, load_cwig3g2, load_semeval2016, train_nearest_centroid, train_wc_only,
    CwiInstance, CwiResources,
};
use nrr_core::tasks::ppdb::{
    self, load_rules, rules_training_rows, BuildOptions, RuleClass, RuleColumns,
};
use nrr_core::tasks::ranking::{
    self, load_dataset, load_rankings, rank_candidates, ranking_training_rows,
};
use nrr_core::tasks::NrrScorer;
use nrr_core::{Error, Result};

use crate::settings::{resolve, resource_path, ResourceArgs, Settings};

fn write_result(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn render_report(report: &EvalReport, json: bool) -> String {
    if json {
        format!("{}\n", report.render_json())
    } else {
        report.render_text()
    }
}

// ---------------------------------------------------------------------------
// build-lexicon
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct BuildLexiconArgs {
    /// Ratings file: `word<TAB>r1<TAB>r2...`
    #[arg(long, value_name = "FILE")]
    ratings: PathBuf,
    /// Output lexicon TSV
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Also print per-annotator agreement (Pearson vs. mean of the rest)
    #[arg(long)]
    agreement: bool,
}

pub fn build_lexicon(args: BuildLexiconArgs, _settings: &Settings) -> Result<u8> {
    let records = load_ratings(&args.ratings)?;
    let lexicon = aggregate_ratings(&records)?;
    lexicon.save(&args.out)?;
    println!(
        "wrote {} entries to {} ({} flagged as all-outlier)",
        lexicon.len(),
        args.out.display(),
        lexicon.flagged().len()
    );
    if args.agreement {
        let annotators = records.iter().map(|r| r.ratings.len()).max().unwrap_or(0);
        for a in 0..annotators {
            match interannotator_agreement(&records, a) {
                Ok(r) => println!("annotator {a}: r = {r:.4}"),
                Err(e) => println!("annotator {a}: undefined ({e})"),
            }
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// train-lm
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct TrainLmArgs {
    /// Plain-text corpus; whitespace tokenized
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,
    /// Output model file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Model order
    #[arg(long)]
    order: Option<usize>,
    /// Lowercase the corpus before counting
    #[arg(long)]
    lowercase: bool,
}

pub fn train_lm(args: TrainLmArgs, settings: &Settings) -> Result<u8> {
    let order = resolve(args.order, settings.usize("order"), 5);
    let body = std::fs::read_to_string(&args.corpus).map_err(|e| Error::Io {
        path: args.corpus.clone(),
        source: e,
    })?;
    let tokens: Vec<String> = body
        .split_whitespace()
        .map(|t| {
            if args.lowercase {
                t.to_lowercase()
            } else {
                t.to_string()
            }
        })
        .collect();
    let lm = NGramLanguageModel::train(&tokens, order)?;
    lm.save(&args.out)?;
    println!(
        "trained order-{order} model on {} tokens ({} types), wrote {}",
        tokens.len(),
        lm.vocab_len(),
        args.out.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    /// Substitution ranking (pairs from ranked candidate sets)
    Rank,
    /// Paraphrase-rule classification (labels -1/0/+1)
    Ppdb,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    task: Task,
    /// rank: context sentences with `<head>` targets; ppdb: labeled rules
    #[arg(long, value_name = "FILE")]
    data: PathBuf,
    /// rank only: gold rankings file
    #[arg(long, value_name = "FILE")]
    rankings: Option<PathBuf>,
    /// ppdb only: |||-column of the gold label [default: 4]
    #[arg(long)]
    label_col: Option<usize>,
    /// Output model file
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Learning rate [default: 0.0005 for rank, 0.001 for ppdb]
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bin count for the Gaussian feature vectorization
    #[arg(long)]
    k: Option<usize>,
    /// Bin width fraction for the Gaussian sigma
    #[arg(long)]
    gamma: Option<f64>,
    /// Feature groups to enable (surface,frequency,lexicon,context,embeddings).
    /// Default: every group with a loaded resource, minus embeddings for
    /// rank and minus context for ppdb.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    #[command(flatten)]
    resources: ResourceArgs,
}

fn select_groups(task: Task, resources: &Resources) -> Vec<FeatureGroup> {
    let mut groups = vec![FeatureGroup::Surface];
    if resources.google_freq.is_some()
        && resources.wiki_simple.is_some()
        && resources.wiki_normal.is_some()
    {
        groups.push(FeatureGroup::Frequency);
    }
    if resources.lexicon.is_some() {
        groups.push(FeatureGroup::Lexicon);
    }
    if resources.lm.is_some() && task == Task::Rank {
        groups.push(FeatureGroup::Context);
    }
    if resources.embeddings.is_some() && task == Task::Ppdb {
        groups.push(FeatureGroup::Embeddings);
    }
    groups
}

fn build_schema(
    features: Option<&[String]>,
    task: Task,
    resources: &Resources,
) -> Result<FeatureSchema> {
    let groups = match features {
        Some(named) => named
            .iter()
            .map(|n| FeatureGroup::from_str(n))
            .collect::<Result<Vec<_>>>()?,
        None => select_groups(task, resources),
    };
    let emb_dim = if groups.contains(&FeatureGroup::Embeddings) {
        Some(
            resources
                .embeddings
                .as_ref()
                .ok_or(Error::MissingResource("embedding store"))?
                .dim(),
        )
    } else {
        None
    };
    FeatureSchema::with_groups(&groups, emb_dim)
}

pub fn train(args: TrainArgs, settings: &Settings) -> Result<u8> {
    let resources = args.resources.load(settings)?;
    let schema = build_schema(args.features.as_deref(), args.task, &resources)?;

    let base = match args.task {
        Task::Rank => TrainConfig::for_ranking(),
        Task::Ppdb => TrainConfig::for_rules(),
    };
    let config = TrainConfig {
        learning_rate: resolve(args.lr, settings.f64("lr"), base.learning_rate),
        epochs: resolve(args.epochs, settings.usize("epochs"), base.epochs),
        dropout: resolve(args.dropout, settings.f64("dropout"), base.dropout),
        batch_size: resolve(args.batch_size, settings.usize("batch_size"), base.batch_size),
        seed: resolve(args.seed, settings.u64("seed"), base.seed),
        bins: BinnerConfig {
            k: resolve(args.k, settings.usize("k"), base.bins.k),
            gamma: resolve(args.gamma, settings.f64("gamma"), base.bins.gamma),
        },
    };

    let rows = match args.task {
        Task::Rank => {
            let rankings = args
                .rankings
                .ok_or_else(|| Error::InvalidArgument("--task rank needs --rankings".into()))?;
            let instances = load_dataset(&args.data, &rankings)?;
            ranking_training_rows(&instances, &resources, &schema)?
        }
        Task::Ppdb => {
            let columns = RuleColumns {
                label: Some(resolve(args.label_col, settings.usize("label_col"), 4)),
                ..RuleColumns::default()
            };
            let rules = load_rules(&args.data, &columns)?;
            rules_training_rows(&rules, &resources, &schema)?
        }
    };

    log::info!("training on {} pairs, input groups {:?}", rows.len(), schema.groups());
    let outcome = net::train(&rows, &schema, &config)?;
    outcome.model.save(&args.out)?;
    println!(
        "trained on {} pairs for {} epochs: loss {:.6} -> {:.6}; wrote {}",
        rows.len(),
        config.epochs,
        outcome.loss_trace.first().unwrap_or(&f64::NAN),
        outcome.loss_trace.last().unwrap_or(&f64::NAN),
        args.out.display()
    );
    if !outcome.dropped_features.is_empty() {
        println!("dropped constant features: {}", outcome.dropped_features.join(", "));
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct RankArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Context sentences with `<head>` targets
    #[arg(long, value_name = "FILE")]
    contexts: PathBuf,
    /// Gold rankings; when given, the candidate sets come from it and an
    /// evaluation report is printed to standard error
    #[arg(long, value_name = "FILE")]
    rankings: PathBuf,
    /// Ranked candidates per instance (tab-separated), simplest first
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Print the evaluation report as JSON
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    resources: ResourceArgs,
}

pub fn rank(args: RankArgs, settings: &Settings) -> Result<u8> {
    let model = NRRModel::load(&args.model)?;
    let resources = args.resources.load(settings)?;
    let instances = load_dataset(&args.contexts, &args.rankings)?;
    let scorer = NrrScorer {
        model: &model,
        resources: &resources,
    };
    let mut lines = String::new();
    for instance in &instances {
        let ranked = rank_candidates(&scorer, instance)?;
        let ordered: Vec<String> = ranked.into_iter().map(|(c, _)| c).collect();
        lines.push_str(&ordered.join("\t"));
        lines.push('\n');
    }
    write_result(args.out.as_deref(), &lines)?;
    let report = ranking::evaluate_ranking(&scorer, &instances)?;
    eprint!("{}", render_report(&report, args.json));
    Ok(0)
}

// ---------------------------------------------------------------------------
// classify-ppdb
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct ClassifyPpdbArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Rule file (category ||| source ||| target ||| quality)
    #[arg(long, value_name = "FILE")]
    rules: PathBuf,
    /// |||-column of a gold label; when set, an evaluation report is
    /// printed to standard error
    #[arg(long)]
    label_col: Option<usize>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    resources: ResourceArgs,
}

pub fn classify_ppdb(args: ClassifyPpdbArgs, settings: &Settings) -> Result<u8> {
    let model = NRRModel::load(&args.model)?;
    let resources = args.resources.load(settings)?;
    let columns = RuleColumns {
        label: args.label_col,
        ..RuleColumns::default()
    };
    let rules = load_rules(&args.rules, &columns)?;
    let mut lines = String::new();
    let mut predictions = Vec::with_capacity(rules.len());
    for rule in &rules {
        let yhat = ppdb::score_rule(&model, &resources, rule)?;
        let class = ppdb::classify_score(yhat);
        predictions.push(class);
        lines.push_str(&format!(
            "{}\t{}\t{}\t{yhat:.6}\t{class}\n",
            rule.category, rule.source, rule.target
        ));
    }
    write_result(args.out.as_deref(), &lines)?;

    if args.label_col.is_some() {
        let golds: Vec<RuleClass> = rules
            .iter()
            .map(|r| r.label.expect("label column parsed"))
            .collect();
        let report = rule_class_report(&predictions, &golds)?;
        eprint!("{}", render_report(&report, args.json));
    }
    Ok(0)
}

fn rule_class_report(predictions: &[RuleClass], golds: &[RuleClass]) -> Result<EvalReport> {
    let names = |v: &[RuleClass]| -> Vec<&'static str> { v.iter().map(|c| c.name()).collect() };
    let rep = metrics::class_precisions(
        &names(predictions),
        &names(golds),
        &["simplifying", "no-difference", "complicating"],
        &"simplifying",
    )?;
    let mut report = EvalReport::new(golds.len());
    report.push("accuracy", rep.accuracy);
    report.push("f1_simplifying", rep.f1_positive);
    report.per_class = rep.per_class;
    Ok(report)
}

// ---------------------------------------------------------------------------
// build-simpleppdb
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct BuildSimpleppdbArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Rule database, one rule per line
    #[arg(long, value_name = "FILE")]
    rules: PathBuf,
    /// Scored resource: `category<TAB>source<TAB>target<TAB>score<TAB>class`
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Worker threads (output order is preserved)
    #[arg(long)]
    jobs: Option<usize>,
    /// Rules per write/checkpoint cycle
    #[arg(long)]
    batch_size: Option<usize>,
    /// Stop after N rules, leaving a resumable checkpoint
    #[arg(long)]
    limit: Option<u64>,
    /// Ignore any existing checkpoint and start over
    #[arg(long)]
    no_resume: bool,
    #[command(flatten)]
    resources: ResourceArgs,
}

pub fn build_simpleppdb(args: BuildSimpleppdbArgs, settings: &Settings) -> Result<u8> {
    let model = NRRModel::load(&args.model)?;
    let resources = args.resources.load(settings)?;
    let options = BuildOptions {
        jobs: resolve(args.jobs, settings.usize("jobs"), 1),
        batch_size: resolve(args.batch_size, settings.usize("batch_size"), 1024),
        limit: args.limit.or(settings.u64("limit")),
        resume: !args.no_resume,
        columns: RuleColumns::default(),
    };
    let stats = ppdb::build_simpleppdb(&model, &resources, &args.rules, &args.out, &options)?;
    println!(
        "scored={} skipped={} simplifying={} no-difference={} complicating={} completed={}",
        stats.scored,
        stats.skipped,
        stats.class_counts[0],
        stats.class_counts[1],
        stats.class_counts[2],
        stats.completed
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct GenerateArgs {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Rule database with quality scores
    #[arg(long, value_name = "FILE")]
    rules: PathBuf,
    /// Target word or phrase to simplify
    #[arg(long)]
    target: String,
    /// Restrict to rules of this syntactic category
    #[arg(long)]
    category: Option<String>,
    /// Keep only the top N candidates
    #[arg(long)]
    top: Option<usize>,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
}

pub fn generate(args: GenerateArgs, settings: &Settings) -> Result<u8> {
    let model = NRRModel::load(&args.model)?;
    let resources = args.resources.load(settings)?;
    let (rules, skipped) = ppdb::load_rules_lenient(&args.rules, &RuleColumns::default())?;
    if skipped > 0 {
        log::warn!("{skipped} malformed rule lines skipped");
    }
    let mut subs = ppdb::generate_substitutions(
        &args.target,
        args.category.as_deref(),
        &rules,
        &model,
        &resources,
    )?;
    if let Some(top) = args.top {
        subs.truncate(top);
    }
    let mut lines = String::new();
    for s in &subs {
        lines.push_str(&format!("{}\t{:.6}\t{}\n", s.text, s.yhat, s.class));
    }
    write_result(args.out.as_deref(), &lines)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// cwi
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CwiMode {
    /// Threshold over the lexicon score alone
    WcOnly,
    /// Nearest centroid over surface/corpus features
    Centroid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CwiFormat {
    Semeval2016,
    Cwig3g2,
}

#[derive(Args)]
pub struct CwiArgs {
    #[arg(long, value_enum)]
    mode: CwiMode,
    /// Add the lexicon features to the centroid classifier
    #[arg(long)]
    with_wc: bool,
    #[arg(long, value_name = "FILE")]
    train: PathBuf,
    /// Held-out instances; defaults to evaluating on the training set
    #[arg(long, value_name = "FILE")]
    test: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "semeval2016")]
    format: CwiFormat,
    /// Word-to-sense-count TSV for the centroid features
    #[arg(long, value_name = "FILE")]
    senses: Option<PathBuf>,
    /// Write per-instance predictions (0/1 per line)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    resources: ResourceArgs,
}

fn load_cwi(path: &Path, format: CwiFormat) -> Result<Vec<CwiInstance>> {
    match format {
        CwiFormat::Semeval2016 => load_semeval2016(path),
        CwiFormat::Cwig3g2 => load_cwig3g2(path),
    }
}

pub fn cwi(args: CwiArgs, settings: &Settings) -> Result<u8> {
    let base = args.resources.load(settings)?;
    let senses = match resource_path(args.senses.as_deref(), settings, "senses", "senses.tsv") {
        Some(p) => Some(FrequencyTable::load(&p)?),
        None => None,
    };
    let cwi_resources = CwiResources {
        lexicon: base.lexicon.clone(),
        embeddings: base.embeddings.clone(),
        google_freq: base.google_freq.clone(),
        wiki_simple: base.wiki_simple.clone(),
        wiki_normal: base.wiki_normal.clone(),
        senses,
        ..Default::default()
    };

    let train_set = load_cwi(&args.train, args.format)?;
    let test_set = match &args.test {
        Some(p) => load_cwi(p, args.format)?,
        None => train_set.clone(),
    };

    let predictions: Vec<bool> = match args.mode {
        CwiMode::WcOnly => {
            let lexicon = cwi_resources
                .lexicon
                .as_ref()
                .ok_or(Error::MissingResource("word-complexity lexicon"))?;
            let clf = train_wc_only(&train_set, lexicon)?;
            eprintln!("learned threshold {:.4}", clf.threshold);
            test_set
                .iter()
                .map(|i| clf.predict(&i.target_text(), lexicon))
                .collect()
        }
        CwiMode::Centroid => {
            let clf = train_nearest_centroid(&train_set, &cwi_resources, args.with_wc)?;
            log::info!("centroid features: {}", clf.feature_names().join(", "));
            test_set
                .iter()
                .map(|i| clf.predict(i, &cwi_resources))
                .collect::<Result<_>>()?
        }
    };

    if args.out.is_some() {
        let mut lines = String::new();
        for p in &predictions {
            lines.push_str(if *p { "1\n" } else { "0\n" });
        }
        write_result(args.out.as_deref(), &lines)?;
    }

    let golds: Vec<bool> = test_set.iter().map(|i| i.complex).collect();
    let report = evaluate_cwi(&predictions, &golds)?;
    print!("{}", render_report(&report, args.json));
    Ok(0)
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalTask {
    Rank,
    Ppdb,
    Cwi,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    task: EvalTask,
    /// Predictions: rank = ranked candidates per line; ppdb = scored TSV;
    /// cwi = 0/1 per line
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    /// Gold data: rank = rankings file; ppdb = labeled rules (label column
    /// 4); cwi = dataset file
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,
    /// CWI gold format
    #[arg(long, value_enum, default_value = "semeval2016")]
    format: CwiFormat,
    /// Second system's predictions: adds a paired bootstrap test of
    /// pred-beats-compare
    #[arg(long, value_name = "FILE")]
    compare: Option<PathBuf>,
    /// Bootstrap resamples
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    BufReader::new(file)
        .lines()
        .collect::<std::io::Result<Vec<String>>>()
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

/// Per-instance scores used for the report and for bootstrap comparison.
fn eval_scores(task: EvalTask, pred: &Path, gold: &Path, format: CwiFormat) -> Result<(EvalReport, Vec<f64>)> {
    match task {
        EvalTask::Rank => {
            let gold_rankings = load_rankings(gold)?;
            let pred_lines = read_lines(pred)?;
            if pred_lines.len() != gold_rankings.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} predictions but {} gold instances",
                    pred_lines.len(),
                    gold_rankings.len()
                )));
            }
            let mut hits = Vec::with_capacity(pred_lines.len());
            let mut ranked_instances = Vec::new();
            let mut predicted_positions = Vec::new();
            let mut gold_rank_values = Vec::new();
            for (line, gold_ranks) in pred_lines.iter().zip(&gold_rankings) {
                let predicted: Vec<String> =
                    line.split('\t').map(str::to_string).collect();
                let best = gold_ranks.iter().map(|(_, r)| *r).min().unwrap_or(1);
                let hit = predicted
                    .first()
                    .map(|top| gold_ranks.iter().any(|(c, r)| *r == best && c == top))
                    .unwrap_or(false);
                hits.push(if hit { 1.0 } else { 0.0 });
                for (pos, cand) in predicted.iter().enumerate() {
                    if let Some((_, r)) = gold_ranks.iter().find(|(c, _)| c == cand) {
                        predicted_positions.push((pos + 1) as f64);
                        gold_rank_values.push(*r as f64);
                    }
                }
                ranked_instances.push(metrics::RankedInstance {
                    predicted,
                    gold_ranks: gold_ranks.clone(),
                });
            }
            let mut report = EvalReport::new(gold_rankings.len());
            report.push("p_at_1", metrics::precision_at_1(&ranked_instances)?);
            report.push(
                "pearson",
                metrics::pearson(&predicted_positions, &gold_rank_values)?,
            );
            Ok((report, hits))
        }
        EvalTask::Ppdb => {
            let columns = RuleColumns {
                label: Some(4),
                ..RuleColumns::default()
            };
            let rules = load_rules(gold, &columns)?;
            let pred_lines = read_lines(pred)?;
            if pred_lines.len() != rules.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} predictions but {} gold rules",
                    pred_lines.len(),
                    rules.len()
                )));
            }
            let predictions: Vec<RuleClass> = pred_lines
                .iter()
                .enumerate()
                .map(|(i, line)| {
                    let class_field = line.split('\t').next_back().unwrap_or(line);
                    RuleClass::from_str(class_field.trim()).map_err(|_| {
                        Error::Parse {
                            path: pred.to_path_buf(),
                            line: i + 1,
                            message: format!("bad class {class_field:?}"),
                        }
                    })
                })
                .collect::<Result<_>>()?;
            let golds: Vec<RuleClass> =
                rules.iter().map(|r| r.label.expect("label parsed")).collect();
            let report = rule_class_report(&predictions, &golds)?;
            let scores = predictions
                .iter()
                .zip(&golds)
                .map(|(p, g)| if p == g { 1.0 } else { 0.0 })
                .collect();
            Ok((report, scores))
        }
        EvalTask::Cwi => {
            let instances = match format {
                CwiFormat::Semeval2016 => load_semeval2016(gold)?,
                CwiFormat::Cwig3g2 => load_cwig3g2(gold)?,
            };
            let pred_lines = read_lines(pred)?;
            if pred_lines.len() != instances.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} predictions but {} gold instances",
                    pred_lines.len(),
                    instances.len()
                )));
            }
            let predictions: Vec<bool> = pred_lines
                .iter()
                .enumerate()
                .map(|(i, line)| match line.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Parse {
                        path: pred.to_path_buf(),
                        line: i + 1,
                        message: format!("bad label {other:?}"),
                    }),
                })
                .collect::<Result<_>>()?;
            let golds: Vec<bool> = instances.iter().map(|i| i.complex).collect();
            let report = evaluate_cwi(&predictions, &golds)?;
            let scores = predictions
                .iter()
                .zip(&golds)
                .map(|(p, g)| if p == g { 1.0 } else { 0.0 })
                .collect();
            Ok((report, scores))
        }
    }
}

pub fn eval(args: EvalArgs, settings: &Settings) -> Result<u8> {
    let (mut report, scores) = eval_scores(args.task, &args.pred, &args.gold, args.format)?;
    if let Some(other) = &args.compare {
        let (_, other_scores) = eval_scores(args.task, other, &args.gold, args.format)?;
        let resamples = resolve(args.resamples, settings.usize("resamples"), 10_000);
        let seed = resolve(args.seed, settings.u64("seed"), 42);
        // One-sided: probability that pred does not beat compare.
        let p = metrics::paired_bootstrap(&other_scores, &scores, resamples, seed)?;
        report.push("bootstrap_p", p);
    }
    print!("{}", render_report(&report, args.json));
    Ok(0)
}

// ---------------------------------------------------------------------------
// gradcheck
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn gradcheck(args: GradcheckArgs, settings: &Settings) -> Result<u8> {
    let draws = resolve(args.draws, settings.usize("draws"), 100);
    let seed = resolve(args.seed, settings.u64("seed"), 7);
    let report = net::gradient_check(draws, seed)?;
    println!(
        "max relative gradient error over {} draws: {:.3e}",
        report.draws, report.max_rel_error
    );
    Ok(if report.passed() { 0 } else { 1 })
}
