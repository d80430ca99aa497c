use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Phase, Technique, TrialOutcome, TrialRecord};
use crate::scene::{PerplexityLevel, TargetCount};

/// Completion times further than this many standard deviations from their
/// condition mean are dropped before analysis.
pub const OUTLIER_SD: f64 = 4.0;

const Z_95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConditionKey {
    pub technique: Technique,
    pub perplexity: PerplexityLevel,
    pub num_targets: TargetCount,
    pub phase: Phase,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutlierSplit {
    pub kept: Vec<TrialRecord>,
    pub removed: Vec<TrialRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    #[serde(flatten)]
    pub key: ConditionKey,
    pub n: usize,
    pub mean_ms: f64,
    pub sd_ms: f64,
    pub ci95_halfwidth_ms: f64,
    pub removed_outliers: usize,
}

/// Mean and sample standard deviation. A single value has sd 0.
fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1.0)))
}

fn completed_times(records: &[TrialRecord]) -> BTreeMap<ConditionKey, Vec<f64>> {
    let mut groups: BTreeMap<ConditionKey, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.outcome == TrialOutcome::Completed) {
        groups
            .entry(r.spec.condition())
            .or_default()
            .push(r.completion_ms as f64);
    }
    groups
}

/// One pass over completed records, grouped by condition. A record is removed
/// when `|t - mean| > 4 sd` for its group. Aborted records are always kept
/// (they carry no time and are ignored by [`summarize`]). Input order is
/// preserved in both halves.
pub fn filter_outliers(records: &[TrialRecord]) -> OutlierSplit {
    let bounds: BTreeMap<ConditionKey, (f64, f64)> = completed_times(records)
        .into_iter()
        .map(|(k, ts)| (k, mean_sd(&ts)))
        .collect();
    let mut split = OutlierSplit::default();
    for r in records {
        let outlier = r.outcome == TrialOutcome::Completed
            && bounds.get(&r.spec.condition()).is_some_and(|&(mean, sd)| {
                libm::fabs(r.completion_ms as f64 - mean) > OUTLIER_SD * sd
            });
        if outlier {
            split.removed.push(r.clone());
        } else {
            split.kept.push(r.clone());
        }
    }
    split
}

/// Per-condition mean, sample sd and normal-approximation 95% CI half-width
/// of completion time over completed records, in key order.
pub fn summarize(kept: &[TrialRecord], removed: &[TrialRecord]) -> Vec<ConditionSummary> {
    let mut removed_counts: BTreeMap<ConditionKey, usize> = BTreeMap::new();
    for r in removed {
        *removed_counts.entry(r.spec.condition()).or_default() += 1;
    }
    let groups = completed_times(kept);
    let mut keys: Vec<ConditionKey> = groups.keys().chain(removed_counts.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|key| {
            let ts = groups.get(&key).map_or(&[][..], |v| &v[..]);
            let (mean_ms, sd_ms) = if ts.is_empty() { (0.0, 0.0) } else { mean_sd(ts) };
            let n = ts.len();
            let ci95_halfwidth_ms = if n == 0 {
                0.0
            } else {
                Z_95 * sd_ms / libm::sqrt(n as f64)
            };
            ConditionSummary {
                key,
                n,
                mean_ms,
                sd_ms,
                ci95_halfwidth_ms,
                removed_outliers: removed_counts.get(&key).copied().unwrap_or(0),
            }
        })
        .collect()
}
