//! The pairwise readability regressor: a fixed input -> 8 -> 8 -> 8 -> 1
//! tanh network trained with mini-batch Adam on the mean squared error of
//! relative-complexity labels. Negative predictions mean the first input is
//! the simpler one.

mod adam;
mod io;
mod mlp;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binning::{BinnerConfig, GaussianBinner};
use crate::error::{Error, Result};
use crate::features::{
    collect_columns, extract_pair, ContextWindow, FeatureSchema, PairFeatures, PairVectorizer,
    Resources,
};

use adam::Adam;
pub use mlp::{finite_difference_max_error, DropoutMasks, Gradients, Mlp, HIDDEN_DEPTH, HIDDEN_WIDTH};

/// Training hyperparameters. The learning-rate defaults differ by task:
/// 0.0005 for substitution ranking, 0.001 for paraphrase-rule
/// classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub dropout: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub bins: BinnerConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 5e-4,
            epochs: 100,
            dropout: 0.2,
            batch_size: 32,
            seed: 42,
            bins: BinnerConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn for_ranking() -> Self {
        TrainConfig::default()
    }

    pub fn for_rules() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            ..TrainConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be >= 1".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidArgument("learning rate must be > 0".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument("dropout must lie in [0, 1)".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

/// A trained ranking model: the feature schema and fitted binner that shape
/// its input, plus the network weights. Immutable once trained; prediction
/// is deterministic (no dropout at evaluation).
#[derive(Debug, Clone)]
pub struct NRRModel {
    vectorizer: PairVectorizer,
    mlp: Mlp,
    config: TrainConfig,
}

impl NRRModel {
    pub(crate) fn from_parts(vectorizer: PairVectorizer, mlp: Mlp, config: TrainConfig) -> Self {
        NRRModel {
            vectorizer,
            mlp,
            config,
        }
    }

    pub(crate) fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn schema(&self) -> &FeatureSchema {
        self.vectorizer.schema()
    }

    pub fn binner(&self) -> &GaussianBinner {
        self.vectorizer.binner()
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn input_dim(&self) -> usize {
        self.vectorizer.input_dim()
    }

    /// Relative complexity of the pair the features were extracted from.
    /// Negative means the first input is simpler. Rejects features built
    /// with a different schema.
    pub fn predict(&self, pair: &PairFeatures) -> Result<f64> {
        let x = self.vectorizer.vectorize(pair)?;
        self.mlp.forward(&x, None)
    }

    /// Extract features with this model's schema and predict in one step.
    pub fn score_pair(
        &self,
        w_a: &str,
        w_b: &str,
        context: Option<&ContextWindow>,
        resources: &Resources,
    ) -> Result<f64> {
        let pair = extract_pair(w_a, w_b, context, resources, self.schema())?;
        self.predict(&pair)
    }
}

/// Result of a training run.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: NRRModel,
    /// Mean training loss per epoch.
    pub loss_trace: Vec<f64>,
    /// Features removed because their training column was constant.
    pub dropped_features: Vec<String>,
}

/// Fit the binner on the training columns and run `epochs` passes of
/// mini-batch Adam. Fully deterministic for a fixed config seed.
///
/// Features whose training column is constant carry no signal and would
/// leave the bin range undefined, so they are disabled (with a warning)
/// before fitting; the returned model's schema reflects that.
pub fn train(
    rows: &[(PairFeatures, f64)],
    schema: &FeatureSchema,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyInput("training needs at least one pair"));
    }
    let expected_hash = schema.hash();
    for (pair, _) in rows {
        if pair.schema_hash != expected_hash {
            return Err(Error::SchemaMismatch {
                expected: expected_hash,
                actual: pair.schema_hash,
            });
        }
    }

    let pairs: Vec<PairFeatures> = rows.iter().map(|(p, _)| p.clone()).collect();
    let columns = collect_columns(schema, &pairs)?;

    // Disable features with constant training columns.
    let mut effective = schema.clone();
    let mut dropped_features = Vec::new();
    for (column, values) in &columns {
        let constant = values.len() < 2 || values.windows(2).all(|w| w[0] == w[1]);
        if constant {
            let feature = column.split('.').nth(1).unwrap_or(column);
            if !dropped_features.iter().any(|d| d == feature) {
                log::warn!("feature '{feature}' is constant over the training data; disabling it");
                dropped_features.push(feature.to_string());
                effective.drop_feature(feature);
            }
        }
    }
    let keep = effective.binnable_columns();
    let columns: Vec<(String, Vec<f64>)> = columns
        .into_iter()
        .filter(|(name, _)| keep.contains(name))
        .collect();
    if columns.is_empty() && !effective.has_emb_diff() {
        return Err(Error::InvalidArgument(
            "no usable features remain after dropping constant columns".into(),
        ));
    }

    let binner = GaussianBinner::fit(config.bins, &columns)?;
    let vectorizer = PairVectorizer::new(effective, binner);

    let data: Vec<(Vec<f64>, f64)> = rows
        .iter()
        .map(|(pair, y)| Ok((vectorizer.vectorize_unchecked(pair)?, *y)))
        .collect::<Result<_>>()?;

    let mut mlp = Mlp::init(vectorizer.input_dim(), config.seed)?;
    let mut optimizer = Adam::new(&mlp, config.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = data.len();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut loss_trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        indices.shuffle(&mut rng);
        let mut epoch_sse = 0.0;
        for chunk in indices.chunks(config.batch_size) {
            let batch: Vec<(Vec<f64>, f64)> = chunk.iter().map(|&i| data[i].clone()).collect();
            let masks: Option<Vec<DropoutMasks>> = if config.dropout > 0.0 {
                Some(
                    batch
                        .iter()
                        .map(|_| mlp.sample_masks(config.dropout, &mut rng))
                        .collect(),
                )
            } else {
                None
            };
            let (loss, grads) = mlp.loss_and_grad(&batch, masks.as_deref())?;
            if !loss.is_finite() {
                return Err(Error::NanLoss { epoch });
            }
            optimizer.step(&mut mlp, &grads);
            epoch_sse += loss * batch.len() as f64;
        }
        loss_trace.push(epoch_sse / n as f64);
    }

    Ok(TrainOutcome {
        model: NRRModel {
            vectorizer,
            mlp,
            config: *config,
        },
        loss_trace,
        dropped_features,
    })
}

/// Outcome of the randomized gradient verification.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub draws: usize,
    pub max_rel_error: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < 1e-4
    }
}

/// Compare backprop gradients against central finite differences
/// (h = 1e-5) over `draws` random model/batch draws, half of them with
/// active dropout masks. Reports the maximum relative error seen.
pub fn gradient_check(draws: usize, seed: u64) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel_error = 0.0f64;
    for draw in 0..draws {
        let input_dim = rng.random_range(2..16);
        let mlp = Mlp::init(input_dim, rng.random())?;
        let batch_len = rng.random_range(1..4);
        let batch: Vec<(Vec<f64>, f64)> = (0..batch_len)
            .map(|_| {
                let x: Vec<f64> = (0..input_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
                (x, rng.random_range(-2.0..2.0))
            })
            .collect();
        let masks: Option<Vec<DropoutMasks>> = if draw % 2 == 0 {
            Some(
                batch
                    .iter()
                    .map(|_| mlp.sample_masks(0.2, &mut rng))
                    .collect(),
            )
        } else {
            None
        };
        let err = finite_difference_max_error(&mlp, &batch, masks.as_deref(), 1e-5)?;
        max_rel_error = max_rel_error.max(err);
    }
    Ok(GradCheckReport {
        draws,
        max_rel_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureGroup;
    use indexmap::IndexMap;

    /// Synthetic pairs over the lexicon features: lex_score carries the
    /// latent complexity, lex_present is constant (and must get dropped).
    fn synthetic_rows(n: usize, seed: u64) -> (Vec<(PairFeatures, f64)>, FeatureSchema) {
        let schema = FeatureSchema::with_groups(&[FeatureGroup::Lexicon], None).unwrap();
        let hash = schema.hash();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|_| {
                let za: f64 = rng.random_range(1.0..6.0);
                let zb: f64 = rng.random_range(1.0..6.0);
                let side = |z: f64| {
                    IndexMap::from([
                        ("lex_present".to_string(), 1.0),
                        ("lex_score".to_string(), z),
                    ])
                };
                let pair = PairFeatures {
                    schema_hash: hash,
                    a: side(za),
                    b: side(zb),
                    diffs: IndexMap::from([
                        ("lex_present".to_string(), 0.0),
                        ("lex_score".to_string(), za - zb),
                    ]),
                    cosine: None,
                    emb_diff: None,
                };
                (pair, za - zb)
            })
            .collect();
        (rows, schema)
    }

    #[test]
    fn training_drops_constant_features_and_learns() {
        let (rows, schema) = synthetic_rows(200, 11);
        let config = TrainConfig {
            epochs: 80,
            learning_rate: 2e-3,
            ..TrainConfig::default()
        };
        let outcome = train(&rows, &schema, &config).unwrap();
        assert_eq!(outcome.dropped_features, vec!["lex_present".to_string()]);
        assert_eq!(outcome.loss_trace.len(), 80);
        let first = outcome.loss_trace[0];
        let last = *outcome.loss_trace.last().unwrap();
        assert!(
            last < first * 0.2,
            "training failed to reduce loss: {first} -> {last}"
        );
    }

    #[test]
    fn loss_strictly_decreases_over_early_epochs() {
        // Dropout off so the trace reflects pure optimization progress.
        let (rows, schema) = synthetic_rows(300, 5);
        let config = TrainConfig {
            epochs: 10,
            dropout: 0.0,
            ..TrainConfig::default()
        };
        let outcome = train(&rows, &schema, &config).unwrap();
        for w in outcome.loss_trace.windows(2) {
            assert!(
                w[1] < w[0],
                "trace not strictly decreasing: {:?}",
                outcome.loss_trace
            );
        }
    }

    #[test]
    fn zero_epochs_is_rejected() {
        let (rows, schema) = synthetic_rows(10, 1);
        let config = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&rows, &schema, &config),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn same_seed_reproduces_identical_models() {
        let (rows, schema) = synthetic_rows(64, 3);
        let config = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let a = train(&rows, &schema, &config).unwrap();
        let b = train(&rows, &schema, &config).unwrap();
        assert_eq!(a.model.mlp, b.model.mlp);
        assert_eq!(a.loss_trace, b.loss_trace);
    }

    #[test]
    fn different_seeds_differ() {
        let (rows, schema) = synthetic_rows(64, 3);
        let mut config = TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        };
        let a = train(&rows, &schema, &config).unwrap();
        config.seed = 43;
        let b = train(&rows, &schema, &config).unwrap();
        assert_ne!(a.model.mlp, b.model.mlp);
    }

    #[test]
    fn prediction_is_deterministic_and_schema_checked() {
        let (rows, schema) = synthetic_rows(64, 9);
        let config = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let model = train(&rows, &schema, &config).unwrap().model;
        let hash = model.schema().hash();
        let mut pair = rows[0].0.clone();
        pair.schema_hash = hash;
        let y1 = model.predict(&pair).unwrap();
        let y2 = model.predict(&pair).unwrap();
        assert_eq!(y1, y2);

        let mut stale = rows[0].0.clone();
        stale.schema_hash = 0xdead_beef;
        assert!(matches!(
            model.predict(&stale),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn predictions_track_training_labels() {
        let (rows, schema) = synthetic_rows(400, 21);
        let config = TrainConfig {
            epochs: 40,
            ..TrainConfig::default()
        };
        let model = train(&rows, &schema, &config).unwrap().model;
        let hash = model.schema().hash();
        let mut correct = 0usize;
        let mut total = 0usize;
        for (pair, y) in &rows {
            if y.abs() < 0.5 {
                continue;
            }
            let mut p = pair.clone();
            p.schema_hash = hash;
            let yhat = model.predict(&p).unwrap();
            total += 1;
            if yhat.signum() == y.signum() {
                correct += 1;
            }
        }
        let acc = correct as f64 / total as f64;
        assert!(acc > 0.9, "sign accuracy {acc}");
    }

    #[test]
    fn nan_features_abort_with_diagnostic() {
        let schema = FeatureSchema::with_groups(&[FeatureGroup::Embeddings], Some(2)).unwrap();
        let hash = schema.hash();
        let rows: Vec<(PairFeatures, f64)> = (0..4)
            .map(|i| {
                let pair = PairFeatures {
                    schema_hash: hash,
                    a: IndexMap::new(),
                    b: IndexMap::new(),
                    diffs: IndexMap::new(),
                    cosine: Some(i as f64 / 4.0),
                    emb_diff: Some(vec![f64::NAN, 1.0]),
                };
                (pair, 0.5)
            })
            .collect();
        let config = TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&rows, &schema, &config),
            Err(Error::NanLoss { .. })
        ));
    }

    #[test]
    fn gradient_check_small_run() {
        let report = gradient_check(10, 7).unwrap();
        assert!(report.passed(), "max error {}", report.max_rel_error);
    }
}
