//! Per-subset performance, group gaps and the random-split baseline.
//!
//! Metrics that cannot be evaluated on a subset (no negatives for FPR, a
//! single class for AUC) come back as `None` rather than an error.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, GroupId, Instance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    #[serde(rename = "auc")]
    SubgroupAuc,
    #[serde(rename = "fpr")]
    FalsePositiveRate,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [
        MetricKind::Accuracy,
        MetricKind::SubgroupAuc,
        MetricKind::FalsePositiveRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::SubgroupAuc => "auc",
            MetricKind::FalsePositiveRate => "fpr",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "accuracy" | "acc" => Ok(MetricKind::Accuracy),
            "auc" | "subgroup_auc" => Ok(MetricKind::SubgroupAuc),
            "fpr" | "false_positive_rate" => Ok(MetricKind::FalsePositiveRate),
            other => Err(format!("unknown metric {other:?} (expected accuracy, auc or fpr)")),
        }
    }
}

/// Performance of both groups on one subset and their absolute difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub perf_group1: Option<f64>,
    pub perf_group2: Option<f64>,
    /// `None` when either side is undefined.
    pub gap: Option<f64>,
    pub n_group1: usize,
    pub n_group2: usize,
}

/// Performance of the classifier on `subset`; `None` when undefined.
pub fn performance(subset: &[&Instance], kind: MetricKind) -> Result<Option<f64>> {
    match kind {
        MetricKind::Accuracy => {
            if subset.is_empty() {
                return Ok(None);
            }
            let correct = subset.iter().filter(|i| i.is_correct()).count();
            Ok(Some(correct as f64 / subset.len() as f64))
        }
        MetricKind::FalsePositiveRate => {
            let (mut negatives, mut false_pos) = (0usize, 0usize);
            for inst in subset.iter().filter(|i| i.label == 0) {
                negatives += 1;
                if inst.prediction == 1 {
                    false_pos += 1;
                }
            }
            Ok((negatives > 0).then(|| false_pos as f64 / negatives as f64))
        }
        MetricKind::SubgroupAuc => {
            let mut scored = Vec::with_capacity(subset.len());
            for inst in subset {
                let s = inst.score.ok_or(Error::MissingScore)?;
                scored.push((s, inst.label == 1));
            }
            Ok(rank_auc(&mut scored))
        }
    }
}

/// Mann–Whitney AUC with average ranks for ties (a tied pair scores 0.5).
fn rank_auc(scored: &mut [(f64, bool)]) -> Option<f64> {
    let positives = scored.iter().filter(|(_, pos)| *pos).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < scored.len() {
        let mut end = start + 1;
        while end < scored.len() && scored[end].0 == scored[start].0 {
            end += 1;
        }
        // 1-based ranks start+1..=end share their mean
        let mean_rank = (start + 1 + end) as f64 / 2.0;
        let tied_pos = scored[start..end].iter().filter(|(_, pos)| *pos).count();
        rank_sum += mean_rank * tied_pos as f64;
        start = end;
    }
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Some(u / (p * negatives as f64))
}

/// Per-group performance on `subset` and the absolute gap between the groups.
pub fn group_gap(subset: &[&Instance], kind: MetricKind, groups: &[GroupId; 2]) -> Result<GapResult> {
    let g1: Vec<&Instance> = subset.iter().copied().filter(|i| i.group == groups[0]).collect();
    let g2: Vec<&Instance> = subset.iter().copied().filter(|i| i.group == groups[1]).collect();
    let perf_group1 = performance(&g1, kind)?;
    let perf_group2 = performance(&g2, kind)?;
    Ok(GapResult {
        perf_group1,
        perf_group2,
        gap: perf_group1.zip(perf_group2).map(|(a, b)| (a - b).abs()),
        n_group1: g1.len(),
        n_group2: g2.len(),
    })
}

/// Group gap over the whole corpus.
pub fn global_bias(d: &Dataset, kind: MetricKind) -> Result<GapResult> {
    let all: Vec<&Instance> = d.instances().iter().collect();
    group_gap(&all, kind, d.groups())
}

/// Mean and (population) standard deviation of the gap between random
/// pseudo-groups sized like the real ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitBaseline {
    pub runs: usize,
    /// Runs whose gap was defined; only these enter the statistics.
    pub defined_runs: usize,
    pub mean_gap: Option<f64>,
    pub std_gap: Option<f64>,
}

impl SplitBaseline {
    /// `mean + std`, the level a real gap should clear to count as bias.
    pub fn upper(&self) -> Option<f64> {
        self.mean_gap.zip(self.std_gap).map(|(m, s)| m + s)
    }
}

pub fn random_split_baseline(d: &Dataset, kind: MetricKind, runs: usize, seed: u64) -> Result<SplitBaseline> {
    if runs == 0 {
        return Err(Error::Config("random split needs at least one run".into()));
    }
    let n_first = d.group_counts()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..d.len()).collect();
    let mut gaps = Vec::with_capacity(runs);
    for _ in 0..runs {
        order.shuffle(&mut rng);
        let (a, b) = order.split_at(n_first);
        let a: Vec<&Instance> = a.iter().map(|&i| d.instance(i)).collect();
        let b: Vec<&Instance> = b.iter().map(|&i| d.instance(i)).collect();
        if let (Some(pa), Some(pb)) = (performance(&a, kind)?, performance(&b, kind)?) {
            gaps.push((pa - pb).abs());
        }
    }
    let (mean_gap, std_gap) = if gaps.is_empty() {
        (None, None)
    } else {
        let m = gaps.iter().sum::<f64>() / gaps.len() as f64;
        let v = gaps.iter().map(|g| (g - m) * (g - m)).sum::<f64>() / gaps.len() as f64;
        (Some(m), Some(v.sqrt()))
    };
    Ok(SplitBaseline {
        runs,
        defined_runs: gaps.len(),
        mean_gap,
        std_gap,
    })
}
