//! Choosing the bias weight from a grid of candidates.
//!
//! Each candidate runs fit, merge and report with the shared seed. The winner
//! has the most biased clusters; ties go to the larger maximum gap, then to
//! the smaller lambda.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::logan_fit;
use crate::data::{ClusterModel, Dataset, LoganConfig};
use crate::error::{Error, Result};
use crate::metrics::MetricKind;
use crate::postprocess::{cluster_reports, max_detectable_gap, merge_small_clusters, ClusterReport};

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub lambda: f64,
    /// Fitted and merged.
    pub model: ClusterModel,
    pub reports: Vec<ClusterReport>,
    pub biased_count: usize,
    pub max_gap: Option<f64>,
}

/// Compact per-lambda outcome, as written into audit reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub lambda: f64,
    pub biased_count: usize,
    pub max_gap: Option<f64>,
    pub clusters: usize,
    pub converged: bool,
    pub iterations_run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    /// In the order the lambdas were given.
    pub cells: Vec<GridCell>,
    pub chosen: usize,
}

impl GridResult {
    pub fn chosen_cell(&self) -> &GridCell {
        &self.cells[self.chosen]
    }

    pub fn chosen_lambda(&self) -> f64 {
        self.cells[self.chosen].lambda
    }

    pub fn summaries(&self) -> Vec<GridSummary> {
        self.cells
            .iter()
            .map(|c| GridSummary {
                lambda: c.lambda,
                biased_count: c.biased_count,
                max_gap: c.max_gap,
                clusters: c.model.k(),
                converged: c.model.converged,
                iterations_run: c.model.iterations_run,
            })
            .collect()
    }
}

fn cmp_gap(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => Ordering::Greater,
        (None, Some(_)) => Ordering::Less,
        (None, None) => Ordering::Equal,
    }
}

/// `Greater` when `a` should be preferred over `b`.
fn preference(a: &GridCell, b: &GridCell) -> Ordering {
    a.biased_count
        .cmp(&b.biased_count)
        .then_with(|| cmp_gap(a.max_gap, b.max_gap))
        .then_with(|| b.lambda.total_cmp(&a.lambda))
}

/// Fit, merge and report for a single lambda.
pub fn evaluate_lambda(d: &Dataset, cfg: &LoganConfig, lambda: f64) -> Result<GridCell> {
    let cfg = LoganConfig { lambda, ..cfg.clone() };
    let fitted = logan_fit(d, &cfg)?;
    let model = merge_small_clusters(&fitted, d, &cfg);
    let reports = cluster_reports(&model, d, &cfg, &[MetricKind::Accuracy])?;
    Ok(GridCell {
        lambda,
        biased_count: reports.iter().filter(|r| r.biased).count(),
        max_gap: max_detectable_gap(&reports),
        model,
        reports,
    })
}

pub fn grid_search(d: &Dataset, cfg: &LoganConfig, lambdas: &[f64]) -> Result<GridResult> {
    if lambdas.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
        return Err(Error::Config(format!("lambda {bad} must be finite and non-negative")));
    }
    let cells = lambdas
        .par_iter()
        .map(|&lambda| evaluate_lambda(d, cfg, lambda))
        .collect::<Result<Vec<_>>>()?;
    let chosen = (0..cells.len())
        .max_by(|&a, &b| preference(&cells[a], &cells[b]))
        .expect("non-empty grid");
    Ok(GridResult { cells, chosen })
}
