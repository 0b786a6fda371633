//! Substitution ranking: pairwise training-set construction, score
//! aggregation, and the shared-task data reader.
//!
//! Training turns every unordered candidate pair of an instance into both
//! ordered pairs, labelled with the rank differences. At prediction time the
//! pairwise scores are aggregated per candidate, `R(c_a) = sum_b S(c_a,
//! c_b)`, and candidates are sorted by increasing R: the simplest comes
//! first.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::PairwiseScorer;
use crate::error::{Error, Result};
use crate::features::{extract_pair, ContextWindow, FeatureSchema, PairFeatures, Resources};
use crate::metrics::{self, EvalReport, RankedInstance};

/// One shared-task instance: a sentence with a target slot, candidate
/// substitutions, and their gold simplicity ranks (1 = simplest; ties
/// allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingInstance {
    pub sentence: Vec<String>,
    pub target: usize,
    pub candidates: Vec<String>,
    pub gold_ranks: Vec<u32>,
}

impl RankingInstance {
    pub fn validate(&self) -> Result<()> {
        if self.candidates.len() < 2 {
            return Err(Error::InvalidArgument(
                "a ranking instance needs at least 2 candidates".into(),
            ));
        }
        if self.candidates.len() != self.gold_ranks.len() {
            return Err(Error::InvalidArgument(
                "every candidate needs a gold rank".into(),
            ));
        }
        if self.target >= self.sentence.len() {
            return Err(Error::InvalidArgument(
                "target index lies outside the sentence".into(),
            ));
        }
        Ok(())
    }

    pub fn context_window(&self) -> ContextWindow {
        ContextWindow::around(&self.sentence, self.target)
    }

    /// Candidates sharing the smallest gold rank.
    pub fn gold_simplest(&self) -> Vec<&str> {
        let best = self.gold_ranks.iter().min().copied().unwrap_or(1);
        self.candidates
            .iter()
            .zip(&self.gold_ranks)
            .filter(|(_, r)| **r == best)
            .map(|(c, _)| c.as_str())
            .collect()
    }
}

/// One ordered training pair: candidate texts, the instance they came from,
/// and the rank-difference label.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingPair {
    pub instance: usize,
    pub a: String,
    pub b: String,
    pub label: f64,
}

/// Every unordered candidate pair of every instance, emitted in both orders
/// with labels `r_a - r_b` and `r_b - r_a`. Tied candidates stay in the set
/// with label 0.
pub fn build_ranking_pairs(instances: &[RankingInstance]) -> Vec<RankingPair> {
    let mut out = Vec::new();
    for (idx, inst) in instances.iter().enumerate() {
        for i in 0..inst.candidates.len() {
            for j in i + 1..inst.candidates.len() {
                let label = inst.gold_ranks[i] as f64 - inst.gold_ranks[j] as f64;
                out.push(RankingPair {
                    instance: idx,
                    a: inst.candidates[i].clone(),
                    b: inst.candidates[j].clone(),
                    label,
                });
                out.push(RankingPair {
                    instance: idx,
                    a: inst.candidates[j].clone(),
                    b: inst.candidates[i].clone(),
                    label: -label,
                });
            }
        }
    }
    out
}

/// Extract features for every training pair, in the instance's sentence
/// context.
pub fn ranking_training_rows(
    instances: &[RankingInstance],
    resources: &Resources,
    schema: &FeatureSchema,
) -> Result<Vec<(PairFeatures, f64)>> {
    for inst in instances {
        inst.validate()?;
    }
    let pairs = build_ranking_pairs(instances);
    let windows: Vec<ContextWindow> = instances.iter().map(|i| i.context_window()).collect();
    pairs
        .into_iter()
        .map(|p| {
            let features =
                extract_pair(&p.a, &p.b, Some(&windows[p.instance]), resources, schema)?;
            Ok((features, p.label))
        })
        .collect()
}

/// Score all ordered candidate pairs, aggregate per candidate, and sort by
/// increasing aggregate (ties broken by candidate text). The first entry is
/// the predicted simplest.
pub fn rank_candidates<S: PairwiseScorer>(
    scorer: &S,
    instance: &RankingInstance,
) -> Result<Vec<(String, f64)>> {
    instance.validate()?;
    let window = instance.context_window();
    let n = instance.candidates.len();
    let mut aggregate = vec![0.0f64; n];
    for (i, total) in aggregate.iter_mut().enumerate() {
        for j in 0..n {
            if i != j {
                *total += scorer.score(
                    &instance.candidates[i],
                    &instance.candidates[j],
                    Some(&window),
                )?;
            }
        }
    }
    let mut ranked: Vec<(String, f64)> = instance
        .candidates
        .iter()
        .cloned()
        .zip(aggregate)
        .collect();
    ranked.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    Ok(ranked)
}

/// Rank every instance and report P@1 plus the Pearson correlation between
/// predicted and gold ranks pooled over all candidates.
pub fn evaluate_ranking<S: PairwiseScorer>(
    scorer: &S,
    instances: &[RankingInstance],
) -> Result<EvalReport> {
    if instances.is_empty() {
        return Err(Error::EmptyInput("no instances to evaluate"));
    }
    let mut ranked_instances = Vec::with_capacity(instances.len());
    let mut predicted_ranks = Vec::new();
    let mut gold_ranks = Vec::new();
    for inst in instances {
        let ranked = rank_candidates(scorer, inst)?;
        for (position, (candidate, _)) in ranked.iter().enumerate() {
            let ci = inst
                .candidates
                .iter()
                .position(|c| c == candidate)
                .expect("ranked candidates come from the instance");
            predicted_ranks.push((position + 1) as f64);
            gold_ranks.push(inst.gold_ranks[ci] as f64);
        }
        ranked_instances.push(RankedInstance {
            predicted: ranked.into_iter().map(|(c, _)| c).collect(),
            gold_ranks: inst
                .candidates
                .iter()
                .cloned()
                .zip(inst.gold_ranks.iter().copied())
                .collect(),
        });
    }
    let p_at_1 = metrics::precision_at_1(&ranked_instances)?;
    let pearson = metrics::pearson(&predicted_ranks, &gold_ranks)?;
    let mut report = EvalReport::new(instances.len());
    report.push("p_at_1", p_at_1);
    report.push("pearson", pearson);
    Ok(report)
}

/// Read the shared-task context file: one sentence per line with the target
/// token wrapped in `<head>...</head>`.
pub fn load_contexts(path: impl AsRef<Path>) -> Result<Vec<(Vec<String>, usize)>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut target = None;
        let mut tokens = Vec::new();
        for (t, raw) in line.split_whitespace().enumerate() {
            if raw.contains("<head>") {
                if target.is_some() {
                    return Err(Error::parse(path, lineno, "multiple <head> targets"));
                }
                target = Some(t);
                tokens.push(raw.replace("<head>", "").replace("</head>", ""));
            } else {
                tokens.push(raw.to_string());
            }
        }
        let target =
            target.ok_or_else(|| Error::parse(path, lineno, "no <head> target on line"))?;
        out.push((tokens, target));
    }
    Ok(out)
}

/// Read the gold rankings file: `Sentence N rankings: {a} {b, c} ...`,
/// where candidates in the same brace group are tied at the same rank.
pub fn load_rankings(path: impl AsRef<Path>) -> Result<Vec<Vec<(String, u32)>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let after = match line.find(':') {
            Some(pos) => &line[pos + 1..],
            None => line.as_str(),
        };
        let mut ranks = Vec::new();
        let mut rank = 0u32;
        let mut rest = after;
        while let Some(open) = rest.find('{') {
            let close = rest[open..]
                .find('}')
                .ok_or_else(|| Error::parse(path, lineno, "unbalanced braces"))?
                + open;
            rank += 1;
            for cand in rest[open + 1..close].split(',') {
                let cand = cand.trim();
                if !cand.is_empty() {
                    ranks.push((cand.to_string(), rank));
                }
            }
            rest = &rest[close + 1..];
        }
        if ranks.is_empty() {
            return Err(Error::parse(path, lineno, "no candidate groups on line"));
        }
        out.push(ranks);
    }
    Ok(out)
}

/// Join the context and rankings files into instances (line-aligned).
pub fn load_dataset(
    contexts_path: impl AsRef<Path>,
    rankings_path: impl AsRef<Path>,
) -> Result<Vec<RankingInstance>> {
    let contexts = load_contexts(&contexts_path)?;
    let rankings = load_rankings(&rankings_path)?;
    if contexts.len() != rankings.len() {
        return Err(Error::InvalidArgument(format!(
            "context file has {} instances but rankings file has {}",
            contexts.len(),
            rankings.len()
        )));
    }
    Ok(contexts
        .into_iter()
        .zip(rankings)
        .map(|((sentence, target), ranks)| {
            let (candidates, gold_ranks) = ranks.into_iter().unzip();
            RankingInstance {
                sentence,
                target,
                candidates,
                gold_ranks,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::collections::HashMap;
    use std::io::Write as _;

    struct StubScorer<F: Fn(&str, &str) -> f64>(F);

    impl<F: Fn(&str, &str) -> f64> PairwiseScorer for StubScorer<F> {
        fn score(&self, a: &str, b: &str, _ctx: Option<&ContextWindow>) -> Result<f64> {
            Ok((self.0)(a, b))
        }
    }

    fn instance(candidates: &[(&str, u32)]) -> RankingInstance {
        RankingInstance {
            sentence: vec!["that".into(), "is".into(), "terrible".into()],
            target: 2,
            candidates: candidates.iter().map(|(c, _)| c.to_string()).collect(),
            gold_ranks: candidates.iter().map(|(_, r)| *r).collect(),
        }
    }

    #[test]
    fn three_candidates_give_six_ordered_pairs() {
        let inst = instance(&[("bad", 1), ("awful", 2), ("deplorable", 3)]);
        let pairs = build_ranking_pairs(&[inst]);
        assert_eq!(pairs.len(), 6);
        let labels: Vec<f64> = pairs.iter().map(|p| p.label).collect();
        assert_eq!(labels, vec![-1.0, 1.0, -2.0, 2.0, -1.0, 1.0]);
        // Antisymmetric label set under argument swap.
        for chunk in pairs.chunks(2) {
            assert_eq!(chunk[0].a, chunk[1].b);
            assert_eq!(chunk[0].b, chunk[1].a);
            assert_eq!(chunk[0].label, -chunk[1].label);
        }
    }

    #[test]
    fn two_candidates_give_two_pairs_and_ties_label_zero() {
        let pairs = build_ranking_pairs(&[instance(&[("x", 1), ("y", 1)])]);
        assert_eq!(pairs.len(), 2);
        assert!(pairs.iter().all(|p| p.label == 0.0));
    }

    #[test]
    fn pair_count_is_n_times_n_minus_one() {
        for n in 2..=6 {
            let cands: Vec<(String, u32)> =
                (0..n).map(|i| (format!("c{i}"), i as u32 + 1)).collect();
            let refs: Vec<(&str, u32)> =
                cands.iter().map(|(c, r)| (c.as_str(), *r)).collect();
            let pairs = build_ranking_pairs(&[instance(&refs)]);
            assert_eq!(pairs.len(), n * (n - 1));
        }
    }

    #[test]
    fn aggregation_matches_hand_computation() {
        // S(x, y) = complexity(x) - complexity(y) with complexities 1, 2, 3:
        // R(c1) = -3, R(c2) = 0, R(c3) = 3.
        let complexity: HashMap<&str, f64> =
            HashMap::from([("c1", 1.0), ("c2", 2.0), ("c3", 3.0)]);
        let scorer = StubScorer(move |a: &str, b: &str| complexity[a] - complexity[b]);
        let inst = instance(&[("c2", 2), ("c3", 3), ("c1", 1)]);
        let ranked = rank_candidates(&scorer, &inst).unwrap();
        let names: Vec<&str> = ranked.iter().map(|(c, _)| c.as_str()).collect();
        assert_eq!(names, vec!["c1", "c2", "c3"]);
        assert_abs_diff_eq!(ranked[0].1, -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ranked[1].1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ranked[2].1, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn all_equal_scores_fall_back_to_lexicographic_order() {
        let scorer = StubScorer(|_: &str, _: &str| 0.0);
        let inst = instance(&[("zeta", 1), ("alpha", 2), ("mid", 3)]);
        let ranked = rank_candidates(&scorer, &inst).unwrap();
        let names: Vec<&str> = ranked.iter().map(|(c, _)| c.as_str()).collect();
        assert_eq!(names, vec!["alpha", "mid", "zeta"]);
    }

    #[test]
    fn shifting_one_candidates_scores_moves_only_that_candidate() {
        let base = StubScorer(|a: &str, b: &str| a.len() as f64 - b.len() as f64);
        let shifted = StubScorer(|a: &str, b: &str| {
            let s = a.len() as f64 - b.len() as f64;
            if a == "bb" {
                s + 10.0
            } else {
                s
            }
        });
        let inst = instance(&[("a", 1), ("bb", 2), ("ccc", 3)]);
        let r1 = rank_candidates(&base, &inst).unwrap();
        let r2 = rank_candidates(&shifted, &inst).unwrap();
        let get = |r: &[(String, f64)], name: &str| {
            r.iter().find(|(c, _)| c == name).unwrap().1
        };
        assert_abs_diff_eq!(
            get(&r2, "bb"),
            get(&r1, "bb") + 20.0, // two ordered pairs involve bb as first argument
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(get(&r2, "a"), get(&r1, "a"), epsilon = 1e-12);
        assert_abs_diff_eq!(get(&r2, "ccc"), get(&r1, "ccc"), epsilon = 1e-12);
    }

    #[test]
    fn fewer_than_two_candidates_is_an_error() {
        let inst = RankingInstance {
            sentence: vec!["x".into()],
            target: 0,
            candidates: vec!["only".into()],
            gold_ranks: vec![1],
        };
        let scorer = StubScorer(|_: &str, _: &str| 0.0);
        assert!(rank_candidates(&scorer, &inst).is_err());
    }

    /// Brute-force oracle: materialize the full score matrix, sum rows,
    /// sort by (sum, text).
    fn oracle_order<S: PairwiseScorer>(scorer: &S, inst: &RankingInstance) -> Vec<String> {
        let n = inst.candidates.len();
        let mut matrix = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    matrix[i][j] = scorer
                        .score(
                            &inst.candidates[i],
                            &inst.candidates[j],
                            Some(&inst.context_window()),
                        )
                        .unwrap();
                }
            }
        }
        let mut rows: Vec<(String, f64)> = inst
            .candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), matrix[i].iter().sum()))
            .collect();
        rows.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap()
                .then_with(|| a.0.cmp(&b.0))
        });
        rows.into_iter().map(|(c, _)| c).collect()
    }

    #[test]
    fn aggregation_agrees_with_brute_force_oracle_on_random_stubs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..100 {
            let n = rng.random_range(2..=8);
            let cands: Vec<(String, u32)> = (0..n)
                .map(|i| (format!("w{i}"), rng.random_range(1..=4)))
                .collect();
            let refs: Vec<(&str, u32)> =
                cands.iter().map(|(c, r)| (c.as_str(), *r)).collect();
            let inst = instance(&refs);
            let mut table = HashMap::new();
            for a in &inst.candidates {
                for b in &inst.candidates {
                    table.insert((a.clone(), b.clone()), rng.random_range(-3.0..3.0));
                }
            }
            let scorer =
                StubScorer(move |a: &str, b: &str| table[&(a.to_string(), b.to_string())]);
            let ranked: Vec<String> = rank_candidates(&scorer, &inst)
                .unwrap()
                .into_iter()
                .map(|(c, _)| c)
                .collect();
            assert_eq!(ranked, oracle_order(&scorer, &inst));
        }
    }

    #[test]
    fn evaluation_reports_p1_and_pearson() {
        // A scorer that ranks by the gold complexity (word length here).
        let scorer = StubScorer(|a: &str, b: &str| a.len() as f64 - b.len() as f64);
        let instances = vec![
            instance(&[("bad", 1), ("awful", 2), ("deplorable", 3)]),
            instance(&[("sad", 1), ("mournful", 2)]),
        ];
        let report = evaluate_ranking(&scorer, &instances).unwrap();
        assert_abs_diff_eq!(report.metrics["p_at_1"], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.metrics["pearson"], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dataset_reader_roundtrip() {
        let mut ctx = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            ctx,
            "When you think about it , that 's pretty <head>terrible</head> ."
        )
        .unwrap();
        writeln!(ctx, "A <head>tough</head> decision .").unwrap();
        let mut gold = tempfile::NamedTempFile::new().unwrap();
        writeln!(gold, "Sentence 1 rankings: {{bad}} {{awful, deplorable}}").unwrap();
        writeln!(gold, "Sentence 2 rankings: {{hard}} {{difficult}}").unwrap();

        let instances = load_dataset(ctx.path(), gold.path()).unwrap();
        assert_eq!(instances.len(), 2);
        assert_eq!(instances[0].sentence[9], "terrible");
        assert_eq!(instances[0].target, 9);
        assert_eq!(
            instances[0].candidates,
            vec!["bad", "awful", "deplorable"]
        );
        assert_eq!(instances[0].gold_ranks, vec![1, 2, 2]);
        assert_eq!(instances[0].gold_simplest(), vec!["bad"]);
        assert_eq!(instances[1].candidates, vec!["hard", "difficult"]);
    }

    #[test]
    fn reader_rejects_missing_head() {
        let mut ctx = tempfile::NamedTempFile::new().unwrap();
        writeln!(ctx, "no target here").unwrap();
        assert!(matches!(
            load_contexts(ctx.path()),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
