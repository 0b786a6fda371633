//! Gaussian radial-basis soft binning of scalar features.
//!
//! Each fitted feature's value range [f_min, f_max] is divided evenly into k
//! bins, with a Gaussian centered at each bin midpoint and a shared standard
//! deviation expressed as a fraction gamma of the bin width:
//!
//! ```text
//! sigma = gamma * (f_max - f_min) / k
//! mu_j  = f_min + (j - 1/2) * (f_max - f_min) / k,   j = 1..k
//! d_j(v) = exp(-(v - mu_j)^2 / (2 sigma^2))
//! ```
//!
//! The responses (d_1..d_k) are normalized to sum to 1, projecting the scalar
//! onto the k-simplex. Values outside the fitted range are transformed as-is;
//! the Gaussian tails extend beyond the range, so no clipping happens.

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Floor for sigma when a fitted range is pathologically narrow.
const SIGMA_FLOOR: f64 = 1e-12;

/// Bin count and width fraction used when fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinnerConfig {
    pub k: usize,
    pub gamma: f64,
}

impl Default for BinnerConfig {
    fn default() -> Self {
        // Defaults used throughout: 10 bins, sigma at 0.2 of bin width.
        BinnerConfig { k: 10, gamma: 0.2 }
    }
}

/// Fitted parameters for one feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFeature {
    pub f_min: f64,
    pub f_max: f64,
    pub centers: Vec<f64>,
    pub sigma: f64,
}

/// A fitted soft-binning vectorizer. Immutable after `fit`; `transform` is
/// pure and thread-safe.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBinner {
    config: BinnerConfig,
    features: IndexMap<String, FittedFeature>,
}

impl GaussianBinner {
    /// Fit per-feature ranges from training columns. Every column must hold
    /// at least two distinct values; a constant column is an error naming the
    /// feature.
    pub fn fit<S: AsRef<str>>(config: BinnerConfig, columns: &[(S, Vec<f64>)]) -> Result<Self> {
        if config.k < 1 {
            return Err(Error::InvalidArgument("bin count k must be >= 1".into()));
        }
        if config.gamma.is_nan() || config.gamma <= 0.0 {
            return Err(Error::InvalidArgument("gamma must be > 0".into()));
        }
        let mut features = IndexMap::new();
        for (name, values) in columns {
            let name = name.as_ref();
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for &v in values {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "feature '{name}' has a non-finite training value"
                    )));
                }
                min = min.min(v);
                max = max.max(v);
            }
            if values.is_empty() || min >= max {
                return Err(Error::ConstantFeature(name.to_string()));
            }
            features.insert(name.to_string(), fit_feature(min, max, config));
        }
        Ok(GaussianBinner { config, features })
    }

    pub fn config(&self) -> BinnerConfig {
        self.config
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn is_fitted(&self, feature: &str) -> bool {
        self.features.contains_key(feature)
    }

    pub fn feature(&self, name: &str) -> Option<&FittedFeature> {
        self.features.get(name)
    }

    /// Fitted features in insertion order, for serialization.
    pub fn features(&self) -> impl Iterator<Item = (&str, &FittedFeature)> {
        self.features.iter().map(|(n, f)| (n.as_str(), f))
    }

    /// Rebuild a binner from serialized parameters.
    pub fn from_parts(
        config: BinnerConfig,
        features: impl IntoIterator<Item = (String, FittedFeature)>,
    ) -> Self {
        GaussianBinner {
            config,
            features: features.into_iter().collect(),
        }
    }

    /// Project one value onto the k bins of a fitted feature. Infinite
    /// values take the limit behaviour (one-hot on the nearest edge bin);
    /// NaN is rejected rather than silently masked.
    pub fn transform(&self, feature: &str, value: f64) -> Result<Vec<f64>> {
        let fitted = self
            .features
            .get(feature)
            .ok_or_else(|| Error::UnfittedFeature(feature.to_string()))?;
        if value.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "feature '{feature}' has a NaN value"
            )));
        }
        Ok(transform_value(fitted, value))
    }

    /// Transform into a caller-provided slice of length k (hot path for the
    /// feature assembly loop).
    pub fn transform_into(&self, feature: &str, value: f64, out: &mut [f64]) -> Result<()> {
        let fitted = self
            .features
            .get(feature)
            .ok_or_else(|| Error::UnfittedFeature(feature.to_string()))?;
        if value.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "feature '{feature}' has a NaN value"
            )));
        }
        transform_value_into(fitted, value, out);
        Ok(())
    }
}

fn fit_feature(f_min: f64, f_max: f64, config: BinnerConfig) -> FittedFeature {
    let k = config.k;
    let width = (f_max - f_min) / k as f64;
    let centers = (1..=k)
        .map(|j| f_min + (j as f64 - 0.5) * width)
        .collect();
    let mut sigma = config.gamma * width;
    if sigma < SIGMA_FLOOR {
        log::warn!(
            "sigma underflow for range [{f_min}, {f_max}] with k={k}: flooring at {SIGMA_FLOOR}"
        );
        sigma = SIGMA_FLOOR;
    }
    FittedFeature {
        f_min,
        f_max,
        centers,
        sigma,
    }
}

fn transform_value(fitted: &FittedFeature, value: f64) -> Vec<f64> {
    let mut out = vec![0.0; fitted.centers.len()];
    transform_value_into(fitted, value, &mut out);
    out
}

fn transform_value_into(fitted: &FittedFeature, value: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), fitted.centers.len());
    let two_sigma_sq = 2.0 * fitted.sigma * fitted.sigma;
    let mut sum = 0.0;
    for (o, &mu) in out.iter_mut().zip(&fitted.centers) {
        let d = value - mu;
        let resp = (-(d * d) / two_sigma_sq).exp();
        *o = resp;
        sum += resp;
    }
    if sum > 0.0 {
        for o in out.iter_mut() {
            *o /= sum;
        }
    } else {
        // Every response underflowed (value far outside the range, or gamma
        // near zero). The limit of the normalized vector is one-hot on the
        // nearest center.
        let nearest = nearest_center(fitted, value);
        for (j, o) in out.iter_mut().enumerate() {
            *o = if j == nearest { 1.0 } else { 0.0 };
        }
    }
}

fn nearest_center(fitted: &FittedFeature, value: f64) -> usize {
    // Every distance to an infinite value compares equal, so pick the edge
    // bin directly.
    if value == f64::INFINITY {
        return fitted.centers.len() - 1;
    }
    if value == f64::NEG_INFINITY {
        return 0;
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &mu) in fitted.centers.iter().enumerate() {
        let d = (value - mu).abs();
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}
