//! Local group bias detection.
//!
//! Clusters the instances of an evaluation set so that clusters are compact
//! in feature space *and* expose large accuracy gaps between two demographic
//! groups, then reports which clusters show bias that corpus-level metrics
//! average away.
//!
//! Pipeline: [`io::load_dataset`] → [`clustering::logan_fit`] /
//! [`clustering::kmeans_fit`] → [`postprocess::merge_small_clusters`] →
//! [`postprocess::cluster_reports`] and [`postprocess::compare`], with
//! [`selection::grid_search`] choosing the bias weight.

pub mod clustering;
pub mod data;
pub mod error;
pub mod io;
pub mod metrics;
pub mod postprocess;
pub mod selection;
pub mod synthetic;

pub use clustering::{kmeans_fit, kmeanspp_init, logan_fit, objective, ClusterStats};
pub use data::{build_dataset, standardize_features, ClusterModel, Dataset, GroupId, Instance, LoganConfig, ObjectiveValue, RawRecord};
pub use error::{Error, Result};
pub use metrics::{global_bias, group_gap, performance, random_split_baseline, GapResult, MetricKind};
pub use postprocess::{cluster_reports, compare, interpret_cluster, merge_small_clusters, ClusterReport, ComparisonReport};
pub use selection::{grid_search, GridResult};
