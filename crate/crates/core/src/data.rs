//! Instance, dataset and configuration types shared across the pipeline.
//!
//! Everything here is validated on construction and immutable afterwards.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, RowError};

/// Identity of a demographic group, e.g. `"white"` or `"female"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupId(pub String);

impl GroupId {
    pub fn new(name: impl Into<String>) -> Self {
        GroupId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One evaluation example together with the classifier's output on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub features: Vec<f64>,
    pub group: GroupId,
    pub label: u8,
    pub prediction: u8,
    /// Classifier confidence for class 1.
    pub score: Option<f64>,
    pub text: Option<String>,
}

impl Instance {
    pub fn is_correct(&self) -> bool {
        self.label == self.prediction
    }
}

/// Unvalidated input record, as it appears on one line of a JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    pub features: Vec<f64>,
    pub group: String,
    pub label: i64,
    pub pred: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// A validated evaluation corpus with exactly two groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<Instance>,
    dim: usize,
    groups: [GroupId; 2],
    // 0 or 1 per instance, indexing into `groups`
    group_index: Vec<u8>,
}

impl Dataset {
    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn instance(&self, i: usize) -> &Instance {
        &self.instances[i]
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The two groups in lexicographic order.
    pub fn groups(&self) -> &[GroupId; 2] {
        &self.groups
    }

    /// Position (0 or 1) of instance `i`'s group in [`Dataset::groups`].
    pub fn group_of(&self, i: usize) -> usize {
        self.group_index[i] as usize
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.instances[i].features
    }

    pub fn group_counts(&self) -> [usize; 2] {
        let mut counts = [0usize; 2];
        for &g in &self.group_index {
            counts[g as usize] += 1;
        }
        counts
    }

    /// Converts back into raw records, the inverse of [`build_dataset`].
    pub fn to_records(&self) -> Vec<RawRecord> {
        self.instances
            .iter()
            .map(|inst| RawRecord {
                id: inst.id.clone(),
                features: inst.features.clone(),
                group: inst.group.0.clone(),
                label: inst.label as i64,
                pred: inst.prediction as i64,
                score: inst.score,
                text: inst.text.clone(),
            })
            .collect()
    }

    /// Same dataset with different feature vectors. Caller guarantees shape.
    fn with_features(&self, features: Vec<Vec<f64>>) -> Dataset {
        let instances = self
            .instances
            .iter()
            .zip(features)
            .map(|(inst, f)| Instance {
                features: f,
                ..inst.clone()
            })
            .collect();
        Dataset {
            instances,
            dim: self.dim,
            groups: self.groups.clone(),
            group_index: self.group_index.clone(),
        }
    }
}

fn validate_row(row: &RawRecord, dim: usize) -> std::result::Result<Instance, RowError> {
    if row.features.len() != dim {
        return Err(RowError::DimensionMismatch {
            expected: dim,
            found: row.features.len(),
        });
    }
    if let Some(index) = row.features.iter().position(|v| !v.is_finite()) {
        return Err(RowError::NonFiniteFeature { index });
    }
    let label = match row.label {
        0 | 1 => row.label as u8,
        other => return Err(RowError::BadLabel(other)),
    };
    let prediction = match row.pred {
        0 | 1 => row.pred as u8,
        other => return Err(RowError::BadPrediction(other)),
    };
    if let Some(s) = row.score {
        if !(0.0..=1.0).contains(&s) {
            return Err(RowError::ScoreOutOfRange(s));
        }
    }
    Ok(Instance {
        id: row.id.clone(),
        features: row.features.clone(),
        group: GroupId(row.group.clone()),
        label,
        prediction,
        score: row.score,
        text: row.text.clone(),
    })
}

/// Validates raw rows into a [`Dataset`]. The feature dimension is taken from
/// the first row and the two groups are put in lexicographic order.
pub fn build_dataset(rows: &[RawRecord]) -> Result<Dataset> {
    let first = rows.first().ok_or(Error::EmptyDataset)?;
    let dim = first.features.len();
    if dim == 0 {
        return Err(Error::InvalidRow {
            row: 0,
            source: RowError::EmptyFeatures,
        });
    }

    let mut seen = HashSet::with_capacity(rows.len());
    let mut instances = Vec::with_capacity(rows.len());
    for (row_idx, row) in rows.iter().enumerate() {
        let inst = validate_row(row, dim).map_err(|source| Error::InvalidRow {
            row: row_idx,
            source,
        })?;
        if !seen.insert(inst.id.clone()) {
            return Err(Error::InvalidRow {
                row: row_idx,
                source: RowError::DuplicateId(inst.id),
            });
        }
        instances.push(inst);
    }

    let mut names: Vec<&GroupId> = instances.iter().map(|i| &i.group).collect();
    names.sort();
    names.dedup();
    if names.len() != 2 {
        return Err(Error::GroupCardinality {
            found: names.len(),
            names: names.iter().map(|g| g.0.clone()).collect(),
        });
    }
    let groups = [names[0].clone(), names[1].clone()];
    let group_index = instances
        .iter()
        .map(|i| u8::from(i.group != groups[0]))
        .collect();

    Ok(Dataset {
        instances,
        dim,
        groups,
        group_index,
    })
}

/// Z-scores every feature column (population standard deviation). Columns
/// with zero variance are centered to 0.
pub fn standardize_features(d: &Dataset) -> Dataset {
    let n = d.len() as f64;
    let mut mean = vec![0.0; d.dim];
    for inst in &d.instances {
        for (m, &x) in mean.iter_mut().zip(&inst.features) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut var = vec![0.0; d.dim];
    for inst in &d.instances {
        for ((v, &x), &m) in var.iter_mut().zip(&inst.features).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let scale: Vec<Option<f64>> = var
        .iter()
        .zip(&mean)
        .map(|(&v, &m)| {
            let sd = (v / n).sqrt();
            // relative cutoff: centering a constant column can leave rounding residue
            (sd > 1e-12 * m.abs().max(1.0)).then_some(sd)
        })
        .collect();

    let features = d
        .instances
        .iter()
        .map(|inst| {
            inst.features
                .iter()
                .zip(&mean)
                .zip(&scale)
                .map(|((&x, &m), s)| match s {
                    Some(sd) => (x - m) / sd,
                    None => 0.0,
                })
                .collect()
        })
        .collect();
    d.with_features(features)
}

/// Clustering and detection parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoganConfig {
    /// Initial cluster count.
    pub k: usize,
    /// Weight of the bias loss.
    pub lambda: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Clusters smaller than this are merged into a neighbor.
    pub min_cluster_total: usize,
    /// Merging never goes below this many clusters.
    pub min_clusters: usize,
    /// A cluster is detectable when each group has at least this many members.
    pub min_per_group: usize,
    /// Accuracy gap at or above which a detectable cluster counts as biased.
    pub bias_threshold: f64,
    pub standardize: bool,
    /// Divide the clustering loss by n so lambda is scale-free.
    pub normalize_inertia: bool,
}

impl Default for LoganConfig {
    fn default() -> Self {
        Self {
            k: 10,
            lambda: 0.0,
            max_iter: 100,
            seed: 0,
            min_cluster_total: 20,
            min_clusters: 5,
            min_per_group: 20,
            bias_threshold: 0.05,
            standardize: false,
            normalize_inertia: false,
        }
    }
}

impl LoganConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_clusters < 1 {
            return Err(Error::Config("min_clusters must be at least 1".into()));
        }
        if self.k < self.min_clusters {
            return Err(Error::Config(format!(
                "k ({}) must be at least min_clusters ({})",
                self.k, self.min_clusters
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.bias_threshold >= 0.0) {
            return Err(Error::Config(format!(
                "bias_threshold must be non-negative, got {}",
                self.bias_threshold
            )));
        }
        Ok(())
    }
}

/// Value of the combined objective at one point of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    /// Clustering loss (squared distances to cluster means).
    pub clustering: f64,
    /// Bias loss, in [-k, 0].
    pub bias: f64,
    pub total: f64,
}

/// Result of one clustering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per instance.
    pub assignment: Vec<usize>,
    pub objective_trace: Vec<ObjectiveValue>,
    pub converged: bool,
    pub iterations_run: usize,
}

impl ClusterModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }

    /// Ids of non-empty clusters, ascending.
    pub fn live_clusters(&self) -> Vec<usize> {
        self.sizes()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Instance indices per cluster, in dataset order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centroids.len()];
        for (i, &a) in self.assignment.iter().enumerate() {
            out[a].push(i);
        }
        out
    }

    pub fn final_objective(&self) -> Option<ObjectiveValue> {
        self.objective_trace.last().copied()
    }
}
