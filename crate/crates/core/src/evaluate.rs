//! Paired comparison of decision rules over a shared set of sampled fault
//! patterns, with relative-gap confidence intervals and a one-sided paired
//! test for ordering claims.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::policy::{rollout_policy, Policy};
use crate::transition::Realization;
use crate::VERSION;

/// Critical value for a two-sided 95% normal interval.
const Z_95_TWO_SIDED: f64 = 1.96;
/// Critical value for a one-sided 5% normal test.
const Z_95_ONE_SIDED: f64 = 1.645;

/// Aggregate results for one decision rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyRow {
    pub policy: String,
    /// Mean total disruption time over the shared fault patterns.
    pub mean_total: f64,
    /// Mean percentage gap to the best-performing rule in this report.
    pub gap_mean_pct: f64,
    /// 95% confidence interval for the mean gap, lower bound.
    pub gap_ci_lo: f64,
    /// 95% confidence interval for the mean gap, upper bound.
    pub gap_ci_hi: f64,
}

/// Results of evaluating several decision rules on the same fault patterns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub rows: Vec<PolicyRow>,
    /// Number of fault patterns drawn.
    pub realizations: usize,
    pub seed: u64,
    /// Name of the rule with the lowest mean total.
    pub best: String,
    /// True when a single pattern was drawn, making intervals degenerate.
    pub degenerate: bool,
    /// Per-pattern totals, one inner vector per rule (rows order).
    pub totals: Vec<Vec<f64>>,
}

/// Runs every policy against the same `realization_count` sampled fault
/// patterns and reports means and paired gaps relative to the best rule.
pub fn evaluate(
    instance: &Instance,
    policies: &mut [(String, Policy)],
    realization_count: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    if policies.is_empty() {
        return Err(Error::InvalidParameter("no policies to evaluate".into()));
    }
    if realization_count == 0 {
        return Err(Error::InvalidParameter(
            "realization count must be at least 1".into(),
        ));
    }
    let n = instance.tree.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let realizations: Vec<Realization> = (0..realization_count)
        .map(|_| Realization::sample(n, instance.fault_prob, &mut rng))
        .collect();

    let mut totals: Vec<Vec<f64>> = Vec::with_capacity(policies.len());
    for (_, policy) in policies.iter_mut() {
        let mut per_pattern = Vec::with_capacity(realization_count);
        for real in &realizations {
            per_pattern.push(rollout_policy(instance, real, policy)?.total);
        }
        totals.push(per_pattern);
    }

    let means: Vec<f64> = totals
        .iter()
        .map(|t| t.iter().sum::<f64>() / realization_count as f64)
        .collect();
    let best_idx = argmin(&means);
    let best = policies[best_idx].0.clone();
    let degenerate = realization_count == 1;

    let mut rows = Vec::with_capacity(policies.len());
    for (i, (name, _)) in policies.iter().enumerate() {
        // Paired per-pattern percentage gaps to the best rule's total.
        let gaps: Vec<f64> = (0..realization_count)
            .map(|r| {
                let base = totals[best_idx][r];
                if base == 0.0 {
                    0.0
                } else {
                    100.0 * (totals[i][r] - base) / base
                }
            })
            .collect();
        let (lo, hi, mean) = mean_ci(&gaps);
        rows.push(PolicyRow {
            policy: name.clone(),
            mean_total: means[i],
            gap_mean_pct: mean,
            gap_ci_lo: lo,
            gap_ci_hi: hi,
        });
    }

    Ok(EvaluationReport {
        rows,
        realizations: realization_count,
        seed,
        best,
        degenerate,
        totals,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Returns (lower, upper, mean) of the 95% normal interval for the mean of
/// `samples`. A single sample yields a zero-width interval.
pub fn mean_ci(samples: &[f64]) -> (f64, f64, f64) {
    let n = samples.len();
    assert!(n > 0, "mean_ci needs at least one sample");
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, mean, mean);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = Z_95_TWO_SIDED * (var / n as f64).sqrt();
    (mean - half, mean + half, mean)
}

/// One-sided paired test that the first sample's mean is lower than the
/// second's at the 5% level. Returns the z statistic and the verdict.
///
/// Pairs with zero variance in their differences are decided by sign alone.
pub fn paired_lower_test(first: &[f64], second: &[f64]) -> (f64, bool) {
    assert_eq!(first.len(), second.len(), "paired samples must align");
    let n = first.len();
    assert!(n > 1, "paired test needs at least two pairs");
    let diffs: Vec<f64> = first.iter().zip(second).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        let z = if mean < 0.0 {
            f64::INFINITY
        } else if mean > 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        return (z, mean < 0.0);
    }
    let z = -mean / (var / n as f64).sqrt();
    (z, z >= Z_95_ONE_SIDED)
}

impl EvaluationReport {
    /// Renders the report as CSV, one row per policy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "policy,mean_total,gap_mean_pct,gap_ci_lo,gap_ci_hi,realizations,seed,version\n",
        );
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.4},{:.4},{:.4},{},{},{}\n",
                row.policy,
                row.mean_total,
                row.gap_mean_pct,
                row.gap_ci_lo,
                row.gap_ci_hi,
                self.realizations,
                self.seed,
                VERSION,
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixture;
    use crate::oracle::ExactSolver;

    fn chain3() -> Instance {
        fixture(
            &[None, Some(1), Some(2)],
            &[(1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (2.0, 0.0)],
            1.0,
            0.5,
        )
    }

    #[test]
    fn mean_ci_matches_hand_computation() {
        let samples = [100.0, 110.0, 120.0, 130.0];
        let (lo, hi, mean) = mean_ci(&samples);
        assert!((mean - 115.0).abs() < 1e-12);
        // Sample sd = sqrt(500/3); half-width = 1.96 * sd / 2.
        let half = 1.96 * (500.0f64 / 3.0).sqrt() / 2.0;
        assert!((hi - mean - half).abs() < 1e-9);
        assert!((mean - lo - half).abs() < 1e-9);
    }

    #[test]
    fn single_sample_interval_is_degenerate() {
        let (lo, hi, mean) = mean_ci(&[42.0]);
        assert_eq!((lo, hi, mean), (42.0, 42.0, 42.0));
    }

    #[test]
    fn paired_test_detects_a_consistent_improvement() {
        let better: Vec<f64> = (0..50).map(|i| 10.0 + (i % 5) as f64).collect();
        let worse: Vec<f64> = better.iter().map(|x| x + 1.0 + (x % 2.0)).collect();
        let (z, verdict) = paired_lower_test(&better, &worse);
        assert!(verdict, "z = {z}");
        let (_, reverse) = paired_lower_test(&worse, &better);
        assert!(!reverse);
    }

    #[test]
    fn paired_test_handles_zero_variance_differences() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![2.0, 3.0, 4.0];
        let (z, verdict) = paired_lower_test(&a, &b);
        assert!(z.is_infinite() && verdict);
        let (_, same) = paired_lower_test(&a, &a);
        assert!(!same);
    }

    #[test]
    fn evaluate_reports_paired_gaps_against_the_best_rule() {
        let inst = chain3();
        let mut policies = vec![
            (
                "oracle".to_string(),
                Policy::OracleGreedy(ExactSolver::new(&inst).unwrap()),
            ),
            ("nn".to_string(), Policy::NearestNeighbor),
            ("ps".to_string(), Policy::PrioritySequence),
        ];
        let report = evaluate(&inst, &mut policies, 64, 7).unwrap();
        assert_eq!(report.realizations, 64);
        assert_eq!(report.seed, 7);
        assert!(!report.degenerate);
        assert_eq!(report.rows.len(), 3);
        // The oracle-greedy rule is optimal per pattern, so no rule can
        // have a lower mean.
        let oracle_mean = report.rows[0].mean_total;
        for row in &report.rows {
            assert!(row.mean_total >= oracle_mean - 1e-9);
        }
        assert_eq!(report.best, "oracle");
        // Best rule's gap to itself is identically zero.
        assert_eq!(report.rows[0].gap_mean_pct, 0.0);
        assert_eq!(report.rows[0].gap_ci_lo, 0.0);
        assert_eq!(report.rows[0].gap_ci_hi, 0.0);
        // Gap intervals are ordered and contain the mean.
        for row in &report.rows {
            assert!(row.gap_ci_lo <= row.gap_mean_pct + 1e-12);
            assert!(row.gap_mean_pct <= row.gap_ci_hi + 1e-12);
        }
    }

    #[test]
    fn evaluate_is_deterministic_in_the_seed() {
        let inst = chain3();
        let run = |seed| {
            let mut policies = vec![
                ("nn".to_string(), Policy::NearestNeighbor),
                ("ps".to_string(), Policy::PrioritySequence),
            ];
            evaluate(&inst, &mut policies, 32, seed).unwrap().to_csv()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn evaluate_single_realization_is_flagged_degenerate() {
        let inst = chain3();
        let mut policies = vec![("nn".to_string(), Policy::NearestNeighbor)];
        let report = evaluate(&inst, &mut policies, 1, 0).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.rows[0].gap_ci_lo, report.rows[0].gap_ci_hi);
    }

    #[test]
    fn evaluate_rejects_empty_inputs() {
        let inst = chain3();
        assert!(evaluate(&inst, &mut [], 10, 0).is_err());
        let mut policies = vec![("nn".to_string(), Policy::NearestNeighbor)];
        assert!(evaluate(&inst, &mut policies, 0, 0).is_err());
    }

    #[test]
    fn csv_has_one_line_per_policy_plus_header() {
        let inst = chain3();
        let mut policies = vec![
            ("nn".to_string(), Policy::NearestNeighbor),
            ("ps".to_string(), Policy::PrioritySequence),
        ];
        let report = evaluate(&inst, &mut policies, 8, 1).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("policy,mean_total"));
        assert!(lines[1].starts_with("nn,"));
        assert!(lines[2].ends_with(VERSION));
    }
}
