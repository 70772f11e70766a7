//! Small-cluster merging, per-cluster bias reports and clustering comparison.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::clustering::{inertia, sq_dist};
use crate::data::{ClusterModel, Dataset, Instance, LoganConfig};
use crate::error::{Error, Result};
use crate::metrics::{group_gap, GapResult, MetricKind};

/// Repeatedly folds the smallest cluster into the cluster with the nearest
/// centroid until every cluster has `min_cluster_total` members or only
/// `min_clusters` remain. Empty clusters are dropped and ids compacted,
/// preserving their relative order.
pub fn merge_small_clusters(model: &ClusterModel, d: &Dataset, cfg: &LoganConfig) -> ClusterModel {
    let mut assignment = model.assignment.clone();
    let mut centroids = model.centroids.clone();
    let mut sizes = model.sizes();

    loop {
        let live: Vec<usize> = (0..sizes.len()).filter(|&j| sizes[j] > 0).collect();
        if live.len() <= cfg.min_clusters || live.iter().all(|&j| sizes[j] >= cfg.min_cluster_total) {
            break;
        }
        let small = *live.iter().min_by_key(|&&j| (sizes[j], j)).expect("live cluster");
        let target = *live
            .iter()
            .filter(|&&j| j != small)
            .min_by(|&&a, &&b| {
                sq_dist(&centroids[small], &centroids[a])
                    .total_cmp(&sq_dist(&centroids[small], &centroids[b]))
                    .then(a.cmp(&b))
            })
            .expect("at least two live clusters");

        let mut sum = vec![0.0; d.dim()];
        for (i, a) in assignment.iter_mut().enumerate() {
            if *a == small {
                *a = target;
            }
            if *a == target {
                for (s, x) in sum.iter_mut().zip(d.features(i)) {
                    *s += x;
                }
            }
        }
        sizes[target] += sizes[small];
        sizes[small] = 0;
        centroids[target] = sum.iter().map(|s| s / sizes[target] as f64).collect();
    }

    let mut new_id = vec![usize::MAX; sizes.len()];
    let mut compacted = Vec::new();
    for j in (0..sizes.len()).filter(|&j| sizes[j] > 0) {
        new_id[j] = compacted.len();
        compacted.push(centroids[j].clone());
    }
    ClusterModel {
        centroids: compacted,
        assignment: assignment.iter().map(|&a| new_id[a]).collect(),
        objective_trace: model.objective_trace.clone(),
        converged: model.converged,
        iterations_run: model.iterations_run,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster_id: usize,
    pub size: usize,
    pub n_group1: usize,
    pub n_group2: usize,
    /// Always contains accuracy, plus any other requested metric.
    pub metrics: BTreeMap<MetricKind, GapResult>,
    /// Both groups have at least `min_per_group` members.
    pub detectable: bool,
    /// Detectable and the accuracy gap reaches `bias_threshold`.
    pub biased: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_tokens: Option<Vec<String>>,
}

impl ClusterReport {
    pub fn accuracy(&self) -> &GapResult {
        &self.metrics[&MetricKind::Accuracy]
    }

    pub fn accuracy_gap(&self) -> Option<f64> {
        self.accuracy().gap
    }
}

/// One report per non-empty cluster, in cluster-id order.
pub fn cluster_reports(model: &ClusterModel, d: &Dataset, cfg: &LoganConfig, kinds: &[MetricKind]) -> Result<Vec<ClusterReport>> {
    let mut kinds: Vec<MetricKind> = kinds.to_vec();
    kinds.push(MetricKind::Accuracy);
    kinds.sort();
    kinds.dedup();

    let mut reports = Vec::new();
    for (cluster_id, members) in model.members().into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        let subset: Vec<&Instance> = members.iter().map(|&i| d.instance(i)).collect();
        let mut metrics = BTreeMap::new();
        for &kind in &kinds {
            metrics.insert(kind, group_gap(&subset, kind, d.groups())?);
        }
        let acc = metrics[&MetricKind::Accuracy];
        let detectable = acc.n_group1 >= cfg.min_per_group && acc.n_group2 >= cfg.min_per_group;
        let biased = detectable && acc.gap.is_some_and(|g| g >= cfg.bias_threshold);
        reports.push(ClusterReport {
            cluster_id,
            size: members.len(),
            n_group1: acc.n_group1,
            n_group2: acc.n_group2,
            metrics,
            detectable,
            biased,
            top_tokens: None,
        });
    }
    Ok(reports)
}

/// Largest accuracy gap among detectable clusters.
pub fn max_detectable_gap(reports: &[ClusterReport]) -> Option<f64> {
    reports
        .iter()
        .filter(|r| r.detectable)
        .filter_map(|r| r.accuracy_gap())
        .max_by(f64::total_cmp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub inertia: f64,
    pub baseline_inertia: f64,
    /// `inertia / baseline_inertia`; `None` when the baseline inertia is 0.
    pub inertia_ratio: Option<f64>,
    /// Biased clusters over detectable clusters (0 when none are detectable).
    pub bcr: f64,
    /// Instances in biased clusters over instances in detectable clusters.
    pub bir: f64,
    /// Mean accuracy gap over biased clusters.
    pub mean_abs_bias: Option<f64>,
    pub n_clusters: usize,
    pub n_detectable: usize,
    pub n_biased: usize,
    pub n_detectable_instances: usize,
    pub n_biased_instances: usize,
}

pub fn compare(candidate: &ClusterModel, baseline: &ClusterModel, d: &Dataset, cfg: &LoganConfig) -> Result<ComparisonReport> {
    let reports = cluster_reports(candidate, d, cfg, &[MetricKind::Accuracy])?;
    let cand_inertia = inertia(d, candidate);
    let base_inertia = inertia(d, baseline);

    let detectable: Vec<&ClusterReport> = reports.iter().filter(|r| r.detectable).collect();
    let biased: Vec<&ClusterReport> = detectable.iter().copied().filter(|r| r.biased).collect();
    let n_detectable_instances: usize = detectable.iter().map(|r| r.size).sum();
    let n_biased_instances: usize = biased.iter().map(|r| r.size).sum();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let mean_abs_bias = (!biased.is_empty()).then(|| {
        biased.iter().filter_map(|r| r.accuracy_gap()).sum::<f64>() / biased.len() as f64
    });

    Ok(ComparisonReport {
        inertia: cand_inertia,
        baseline_inertia: base_inertia,
        inertia_ratio: (base_inertia > 0.0).then(|| cand_inertia / base_inertia),
        bcr: ratio(biased.len(), detectable.len()),
        bir: ratio(n_biased_instances, n_detectable_instances),
        mean_abs_bias,
        n_clusters: reports.len(),
        n_detectable: detectable.len(),
        n_biased: biased.len(),
        n_detectable_instances,
        n_biased_instances,
    })
}

fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Tokens over-represented in a cluster: ranked by in-cluster relative
/// frequency divided by corpus relative frequency, ties broken
/// lexicographically. Only tokens occurring in the cluster are candidates.
pub fn interpret_cluster(d: &Dataset, members: &[usize], top_n: usize, stop_tokens: &[String]) -> Result<Vec<String>> {
    let stop: HashSet<String> = stop_tokens.iter().map(|s| s.to_lowercase()).collect();
    let count = |texts: &mut dyn Iterator<Item = &str>| {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for text in texts {
            for tok in tokenize(text) {
                *counts.entry(tok).or_default() += 1;
            }
        }
        counts
    };

    let mut cluster_texts = members.iter().filter_map(|&i| d.instance(i).text.as_deref()).peekable();
    if cluster_texts.peek().is_none() {
        return Err(Error::NoText);
    }
    let in_cluster = count(&mut cluster_texts);
    let in_corpus = count(&mut d.instances().iter().filter_map(|inst| inst.text.as_deref()));

    // both frequencies share the same totals, so cluster/corpus count ratios
    // rank identically; compare them exactly by cross-multiplication
    let mut ranked: Vec<(&String, u64, u64)> = in_cluster
        .iter()
        .filter(|(tok, _)| !stop.contains(*tok))
        .map(|(tok, &c)| (tok, c, in_corpus[tok]))
        .collect();
    ranked.sort_by(|a, b| {
        let lhs = a.1 as u128 * b.2 as u128;
        let rhs = b.1 as u128 * a.2 as u128;
        rhs.cmp(&lhs).then_with(|| a.0.cmp(b.0))
    });
    Ok(ranked.into_iter().take(top_n).map(|(t, _, _)| t.clone()).collect())
}

/// Number of merges performed between a fitted and a merged model.
pub fn merges_performed(fitted: &ClusterModel, merged: &ClusterModel) -> usize {
    fitted.live_clusters().len().saturating_sub(merged.k())
}
