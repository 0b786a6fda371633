//! Evaluation measures for the simplification tasks: precision of the top
//! candidate, Pearson correlation, mean average precision, G-score, per-class
//! precision, and a paired bootstrap significance test.
//!
//! All functions here are pure and permutation-invariant over instances.

use std::fmt;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// One instance for top-candidate precision: the predicted ranking (simplest
/// first) and the gold candidate ranks (rank 1 = simplest, ties allowed).
#[derive(Debug, Clone)]
pub struct RankedInstance {
    pub predicted: Vec<String>,
    pub gold_ranks: Vec<(String, u32)>,
}

/// Fraction of instances whose predicted top candidate is among the gold
/// rank-1 candidates. Gold ties at the top all count as correct; a predicted
/// top that is missing from the gold list counts as a miss.
pub fn precision_at_1(instances: &[RankedInstance]) -> Result<f64> {
    if instances.is_empty() {
        return Err(Error::EmptyInput("precision_at_1 needs >= 1 instance"));
    }
    let mut hits = 0usize;
    for inst in instances {
        let top = match inst.predicted.first() {
            Some(t) => t,
            None => continue,
        };
        let best = match inst.gold_ranks.iter().map(|(_, r)| *r).min() {
            Some(b) => b,
            None => continue,
        };
        if inst
            .gold_ranks
            .iter()
            .any(|(c, r)| *r == best && c == top)
        {
            hits += 1;
        }
    }
    Ok(hits as f64 / instances.len() as f64)
}

/// Standard Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::EmptyInput("pearson needs >= 2 points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance("pearson input has zero variance"));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Mean average precision over ranked lists with per-item relevance flags.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MapOutcome {
    pub map: f64,
    /// Lists that entered the mean.
    pub evaluated: usize,
    /// Empty lists, excluded from the mean (reported, not averaged in).
    pub excluded: usize,
}

/// Average precision of one list: mean over relevant positions of the
/// precision at that position. A list with no relevant item contributes 0.
fn average_precision(rel: &[bool]) -> f64 {
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, &r) in rel.iter().enumerate() {
        if r {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

/// MAP over targets. Targets with an empty candidate list are excluded from
/// the mean; the exclusion count is reported alongside the value.
pub fn mean_average_precision(lists: &[Vec<bool>]) -> MapOutcome {
    let mut sum = 0.0;
    let mut evaluated = 0usize;
    let mut excluded = 0usize;
    for list in lists {
        if list.is_empty() {
            excluded += 1;
        } else {
            sum += average_precision(list);
            evaluated += 1;
        }
    }
    MapOutcome {
        map: if evaluated == 0 { 0.0 } else { sum / evaluated as f64 },
        evaluated,
        excluded,
    }
}

/// Harmonic mean of accuracy and recall; 0 when both are 0.
pub fn g_score(accuracy: f64, recall: f64) -> f64 {
    if accuracy + recall == 0.0 {
        0.0
    } else {
        2.0 * accuracy * recall / (accuracy + recall)
    }
}

/// Per-class precision for one label.
#[derive(Debug, Clone, Serialize)]
pub struct ClassPrecision {
    pub class: String,
    pub precision: f64,
    pub predicted: usize,
    pub correct: usize,
    /// True when the class was never predicted; `precision` is then reported
    /// as 0 by convention.
    pub undefined: bool,
}

/// Confusion-matrix summary: per-class precision, overall accuracy, and F1
/// of the designated positive class.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub per_class: Vec<ClassPrecision>,
    pub accuracy: f64,
    /// F1 of the positive class (precision/recall of that class).
    pub f1_positive: f64,
    pub instances: usize,
}

/// Compute per-class precision, accuracy, and the positive-class F1 over
/// aligned prediction/gold lists.
pub fn class_precisions<T>(
    predictions: &[T],
    golds: &[T],
    classes: &[T],
    positive: &T,
) -> Result<ClassReport>
where
    T: PartialEq + fmt::Display,
{
    if predictions.len() != golds.len() {
        return Err(Error::DimensionMismatch {
            expected: golds.len(),
            actual: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("class_precisions needs >= 1 instance"));
    }

    let n = predictions.len();
    let correct_total = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| p == g)
        .count();

    let mut per_class = Vec::with_capacity(classes.len());
    for class in classes {
        let predicted = predictions.iter().filter(|p| *p == class).count();
        let correct = predictions
            .iter()
            .zip(golds)
            .filter(|(p, g)| *p == class && p == g)
            .count();
        let undefined = predicted == 0;
        per_class.push(ClassPrecision {
            class: class.to_string(),
            precision: if undefined {
                0.0
            } else {
                correct as f64 / predicted as f64
            },
            predicted,
            correct,
            undefined,
        });
    }

    // F1 of the positive class.
    let tp = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| *p == positive && *g == positive)
        .count() as f64;
    let pred_pos = predictions.iter().filter(|p| *p == positive).count() as f64;
    let gold_pos = golds.iter().filter(|g| *g == positive).count() as f64;
    let precision = if pred_pos == 0.0 { 0.0 } else { tp / pred_pos };
    let recall = if gold_pos == 0.0 { 0.0 } else { tp / gold_pos };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    Ok(ClassReport {
        per_class,
        accuracy: correct_total as f64 / n as f64,
        f1_positive: f1,
        instances: n,
    })
}

/// One-sided paired bootstrap test: resample instances with replacement and
/// report the fraction of resamples in which system `b` does not beat system
/// `a` on the mean of the per-instance scores. Small values mean `b > a` is
/// significant.
pub fn paired_bootstrap(a: &[f64], b: &[f64], resamples: usize, seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("paired_bootstrap needs >= 1 instance"));
    }
    let n = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut not_better = 0usize;
    for _ in 0..resamples {
        let mut diff = 0.0;
        for _ in 0..n {
            let i = rng.random_range(0..n);
            diff += b[i] - a[i];
        }
        if diff <= 0.0 {
            not_better += 1;
        }
    }
    Ok(not_better as f64 / resamples as f64)
}

/// A named bundle of metric values, rendered by the CLI as aligned-column
/// text or JSON lines.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EvalReport {
    pub metrics: IndexMap<String, f64>,
    pub instances: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_class: Vec<ClassPrecision>,
}

impl EvalReport {
    pub fn new(instances: usize) -> Self {
        EvalReport {
            instances,
            ..Default::default()
        }
    }

    pub fn push(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    /// Aligned-column text rendering.
    pub fn render_text(&self) -> String {
        let width = self
            .metrics
            .keys()
            .map(|k| k.len())
            .chain(self.per_class.iter().map(|c| c.class.len() + 10))
            .max()
            .unwrap_or(8)
            .max(9);
        let mut out = String::new();
        out.push_str(&format!("{:<width$} {:>10}\n", "instances", self.instances));
        for (k, v) in &self.metrics {
            out.push_str(&format!("{k:<width$} {v:>10.4}\n"));
        }
        for c in &self.per_class {
            let name = format!("precision[{}]", c.class);
            let flag = if c.undefined { "  (never predicted)" } else { "" };
            out.push_str(&format!("{name:<width$} {:>10.4}{flag}\n", c.precision));
        }
        out
    }

    /// One JSON object on a single line.
    pub fn render_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn inst(predicted: &[&str], gold: &[(&str, u32)]) -> RankedInstance {
        RankedInstance {
            predicted: predicted.iter().map(|s| s.to_string()).collect(),
            gold_ranks: gold.iter().map(|(c, r)| (c.to_string(), *r)).collect(),
        }
    }

    #[test]
    fn p_at_1_all_correct() {
        let xs = vec![
            inst(&["a", "b"], &[("a", 1), ("b", 2)]),
            inst(&["c", "d"], &[("c", 1), ("d", 2)]),
        ];
        assert_eq!(precision_at_1(&xs).unwrap(), 1.0);
    }

    #[test]
    fn p_at_1_none_correct() {
        let xs = vec![inst(&["b", "a"], &[("a", 1), ("b", 2)])];
        assert_eq!(precision_at_1(&xs).unwrap(), 0.0);
    }

    #[test]
    fn p_at_1_two_of_three() {
        let xs = vec![
            inst(&["a", "b"], &[("a", 1), ("b", 2)]),
            inst(&["b", "a"], &[("a", 1), ("b", 2)]),
            inst(&["c"], &[("c", 1)]),
        ];
        assert_abs_diff_eq!(precision_at_1(&xs).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn p_at_1_gold_tie_at_top_credits_either() {
        let xs = vec![inst(&["b", "a"], &[("a", 1), ("b", 1), ("c", 2)])];
        assert_eq!(precision_at_1(&xs).unwrap(), 1.0);
    }

    #[test]
    fn pearson_affine() {
        let x = [1.0, 2.0, 3.0];
        let y = [3.0, 5.0, 7.0]; // 2x + 1
        assert_abs_diff_eq!(pearson(&x, &y).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_negation() {
        let x = [1.0, 2.0, 3.0];
        let y = [-1.0, -2.0, -3.0];
        assert_abs_diff_eq!(pearson(&x, &y).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn pearson_textbook_fixture() {
        // Hand computation: centered products sum 6.0, variances 5.0 and 9.0,
        // r = 6/sqrt(45) = 2/sqrt(5).
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 2.0, 2.0, 5.0];
        assert_abs_diff_eq!(
            pearson(&x, &y).unwrap(),
            0.894_427_190_999_915_9,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pearson_zero_variance_is_error() {
        let x = [1.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(pearson(&x, &y), Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn map_all_relevant() {
        let out = mean_average_precision(&[vec![true, true, true]]);
        assert_abs_diff_eq!(out.map, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn map_single_list_second_relevant() {
        // AP = P@2 / 1 = 0.5
        let out = mean_average_precision(&[vec![false, true]]);
        assert_abs_diff_eq!(out.map, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn map_no_relevant_contributes_zero() {
        let out = mean_average_precision(&[vec![false, false], vec![true]]);
        assert_abs_diff_eq!(out.map, 0.5, epsilon = 1e-12);
        assert_eq!(out.evaluated, 2);
    }

    #[test]
    fn map_excludes_empty_lists() {
        let out = mean_average_precision(&[vec![], vec![true]]);
        assert_eq!(out.excluded, 1);
        assert_eq!(out.evaluated, 1);
        assert_abs_diff_eq!(out.map, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn g_score_values() {
        assert_abs_diff_eq!(g_score(0.5, 0.5), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(g_score(0.8, 0.6), 0.685_714_285_714_285_7, epsilon = 1e-12);
        assert_eq!(g_score(0.7, 0.0), 0.0);
        assert_eq!(g_score(0.0, 0.0), 0.0);
    }

    #[test]
    fn class_precisions_perfect() {
        let p = vec!["x", "y", "x"];
        let g = vec!["x", "y", "x"];
        let rep = class_precisions(&p, &g, &["x", "y"], &"x").unwrap();
        assert_eq!(rep.accuracy, 1.0);
        assert!(rep.per_class.iter().all(|c| c.precision == 1.0));
        assert_eq!(rep.f1_positive, 1.0);
    }

    #[test]
    fn class_precisions_confusion_fixture() {
        // 3x3 confusion, hand-counted:
        //     gold:   a a a a  b b b  c c c
        //     pred:   a a b c  b b a  c c b
        // predicted a: 3 (2 correct) -> 2/3; b: 4 (2 correct) -> 1/2;
        // c: 3 (2 correct) -> 2/3; accuracy 6/10.
        let g = vec!["a", "a", "a", "a", "b", "b", "b", "c", "c", "c"];
        let p = vec!["a", "a", "b", "c", "b", "b", "a", "c", "c", "b"];
        let rep = class_precisions(&p, &g, &["a", "b", "c"], &"a").unwrap();
        assert_abs_diff_eq!(rep.accuracy, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.per_class[0].precision, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.per_class[1].precision, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.per_class[2].precision, 2.0 / 3.0, epsilon = 1e-12);
        // positive class a: precision 2/3, recall 2/4, f1 = 2*(2/3)*(1/2)/(2/3+1/2)
        assert_abs_diff_eq!(rep.f1_positive, 4.0 / 7.0, epsilon = 1e-12);
    }

    #[test]
    fn class_never_predicted_is_flagged_zero() {
        let p = vec!["a", "a"];
        let g = vec!["a", "b"];
        let rep = class_precisions(&p, &g, &["a", "b"], &"b").unwrap();
        assert!(rep.per_class[1].undefined);
        assert_eq!(rep.per_class[1].precision, 0.0);
    }

    #[test]
    fn bootstrap_detects_clear_winner() {
        let a = vec![0.0; 50];
        let b = vec![1.0; 50];
        let p = paired_bootstrap(&a, &b, 1000, 7).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn bootstrap_identical_systems_not_significant() {
        let a = vec![0.5; 30];
        let p = paired_bootstrap(&a, &a, 500, 7).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn report_renders_text_and_json() {
        let mut r = EvalReport::new(3);
        r.push("p_at_1", 0.5);
        let text = r.render_text();
        assert!(text.contains("p_at_1"));
        assert!(text.contains("0.5000"));
        let json = r.render_json();
        assert!(json.contains("\"p_at_1\":0.5"));
    }

    proptest::proptest! {
        // harmonic <= geometric <= arithmetic
        #[test]
        fn mean_chain_property(a in 1e-6f64..1.0, r in 1e-6f64..1.0) {
            let h = g_score(a, r);
            let gm = (a * r).sqrt();
            let am = (a + r) / 2.0;
            proptest::prop_assert!(h <= gm + 1e-12);
            proptest::prop_assert!(gm <= am + 1e-12);
        }

        #[test]
        fn pearson_affine_is_sign_of_slope(
            xs in proptest::collection::vec(-100.0f64..100.0, 3..20),
            a in proptest::prop_oneof![-10.0f64..-0.01, 0.01f64..10.0],
            b in -5.0f64..5.0,
        ) {
            let distinct = xs.iter().any(|&v| (v - xs[0]).abs() > 1e-9);
            proptest::prop_assume!(distinct);
            let ys: Vec<f64> = xs.iter().map(|&x| a * x + b).collect();
            let r = pearson(&xs, &ys).unwrap();
            proptest::prop_assert!((r - a.signum()).abs() < 1e-9);
        }
    }
}
