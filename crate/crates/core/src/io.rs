//! Dataset loading/writing, audit reports and plot-data emission.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::kmeans_fit;
use crate::data::{build_dataset, standardize_features, ClusterModel, Dataset, LoganConfig, RawRecord};
use crate::error::{Error, Result};
use crate::metrics::{global_bias, random_split_baseline, GapResult, MetricKind, SplitBaseline};
use crate::postprocess::{cluster_reports, compare, interpret_cluster, merge_small_clusters, ClusterReport, ComparisonReport};
use crate::selection::{grid_search, GridSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// `.csv` files are CSV, anything else JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::Jsonl,
        }
    }
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(format!("unknown format {other:?} (expected jsonl or csv)")),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Runs `build_dataset` and reports row errors against source line numbers.
fn build_with_lines(rows: Vec<RawRecord>, lines: &[usize]) -> Result<Dataset> {
    build_dataset(&rows).map_err(|e| match e {
        Error::InvalidRow { row, source } => Error::InvalidLine { line: lines[row], source },
        other => other,
    })
}

pub fn parse_jsonl(text: &str) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        rows.push(record);
        lines.push(idx + 1);
    }
    build_with_lines(rows, &lines)
}

/// One JSON object per line with fields `id`, `features`, `group`, `label`,
/// `pred` and optionally `score` and `text`. Unknown fields are ignored.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_jsonl(&read_text(path.as_ref())?)
}

struct CsvColumns {
    id: usize,
    group: usize,
    label: usize,
    pred: usize,
    score: Option<usize>,
    text: Option<usize>,
    features: Vec<usize>,
}

impl CsvColumns {
    fn from_header(header: &csv::StringRecord) -> Result<Self> {
        let find = |name: &str| header.iter().position(|h| h.trim() == name);
        let require = |name: &str| {
            find(name).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column `{name}`"),
            })
        };
        let mut features = Vec::new();
        while let Some(col) = find(&format!("f{}", features.len())) {
            features.push(col);
        }
        let stray = header.iter().filter(|h| {
            let h = h.trim();
            h.len() > 1 && h.starts_with('f') && h[1..].chars().all(|c| c.is_ascii_digit())
        });
        if stray.count() != features.len() {
            return Err(Error::Parse {
                line: 1,
                message: "feature columns must be named f0..f{d-1} without gaps".into(),
            });
        }
        if features.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "no feature columns (expected f0, f1, ...)".into(),
            });
        }
        Ok(CsvColumns {
            id: require("id")?,
            group: require("group")?,
            label: require("label")?,
            pred: require("pred")?,
            score: find("score"),
            text: find("text"),
            features,
        })
    }

    fn record(&self, rec: &csv::StringRecord, line: usize) -> Result<RawRecord> {
        let field = |col: usize| rec.get(col).unwrap_or("");
        let bad = |what: &str, value: &str| Error::Parse {
            line,
            message: format!("cannot parse {what} from {value:?}"),
        };
        let int = |col: usize, what: &str| field(col).trim().parse::<i64>().map_err(|_| bad(what, field(col)));
        let mut features = Vec::with_capacity(self.features.len());
        for (j, &col) in self.features.iter().enumerate() {
            let v = field(col).trim();
            features.push(v.parse::<f64>().map_err(|_| bad(&format!("f{j}"), v))?);
        }
        let score = match self.score.map(field).map(str::trim) {
            None | Some("") => None,
            Some(v) => Some(v.parse::<f64>().map_err(|_| bad("score", v))?),
        };
        let text = self.text.map(field).filter(|t| !t.is_empty()).map(str::to_string);
        Ok(RawRecord {
            id: field(self.id).to_string(),
            features,
            group: field(self.group).to_string(),
            label: int(self.label, "label")?,
            pred: int(self.pred, "pred")?,
            score,
            text,
        })
    }
}

pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?.clone();
    let columns = CsvColumns::from_header(&header)?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        rows.push(columns.record(&rec, line)?);
        lines.push(line);
    }
    build_with_lines(rows, &lines)
}

/// Same columns as JSONL, with features spread over `f0..f{d-1}`.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_csv(&read_text(path.as_ref())?)
}

pub fn load_dataset(path: impl AsRef<Path>, format: Option<InputFormat>) -> Result<Dataset> {
    let path = path.as_ref();
    match format.unwrap_or_else(|| InputFormat::from_path(path)) {
        InputFormat::Jsonl => load_jsonl(path),
        InputFormat::Csv => load_csv(path),
    }
}

pub fn to_jsonl(d: &Dataset) -> Result<String> {
    let mut out = String::new();
    for rec in d.to_records() {
        out.push_str(&serde_json::to_string(&rec)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn to_csv(d: &Dataset) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "group".into(), "label".into(), "pred".into(), "score".into(), "text".into()];
    header.extend((0..d.dim()).map(|j| format!("f{j}")));
    w.write_record(&header)?;
    for rec in d.to_records() {
        let mut row = vec![
            rec.id,
            rec.group,
            rec.label.to_string(),
            rec.pred.to_string(),
            rec.score.map(|s| s.to_string()).unwrap_or_default(),
            rec.text.unwrap_or_default(),
        ];
        row.extend(rec.features.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

pub fn write_dataset(d: &Dataset, path: impl AsRef<Path>, format: Option<InputFormat>) -> Result<()> {
    let path = path.as_ref();
    let text = match format.unwrap_or_else(|| InputFormat::from_path(path)) {
        InputFormat::Jsonl => to_jsonl(d)?,
        InputFormat::Csv => to_csv(d)?,
    };
    write_file(path, text.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    /// K-Means baseline plus bias-aware grid search.
    Detect,
    /// K-Means only.
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub mode: AuditMode,
    pub k: usize,
    /// Chosen bias weight; absent for baseline audits.
    pub lambda: Option<f64>,
    pub lambdas: Vec<f64>,
    pub max_iter: usize,
    pub seed: u64,
    pub min_cluster_total: usize,
    pub min_clusters: usize,
    pub min_per_group: usize,
    pub bias_threshold: f64,
    pub standardize: bool,
    pub normalize_inertia: bool,
    pub metrics: Vec<MetricKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSection {
    pub groups: [String; 2],
    pub n_group1: usize,
    pub n_group2: usize,
    pub gaps: BTreeMap<MetricKind, GapResult>,
    /// Accuracy gap between random pseudo-groups.
    pub random_split: SplitBaseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSection {
    /// K-Means against itself (inertia ratio 1).
    pub kmeans: ComparisonReport,
    pub logan: Option<ComparisonReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input_sha256: String,
    pub seed: u64,
    pub tool_version: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical invocations.
    pub generated_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub config: ConfigEcho,
    pub global: GlobalSection,
    pub grid: Vec<GridSummary>,
    /// Clusters of the audited model: the chosen bias-aware model for
    /// `detect`, K-Means for `baseline`.
    pub clusters: Vec<ClusterReport>,
    /// K-Means clusters, present for `detect` audits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_clusters: Option<Vec<ClusterReport>>,
    pub comparison: ComparisonSection,
    pub provenance: Provenance,
}

impl AuditReport {
    pub fn biased_clusters(&self) -> usize {
        self.clusters.iter().filter(|c| c.biased).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub input: PathBuf,
    pub format: Option<InputFormat>,
    pub config: LoganConfig,
    /// `None` runs a K-Means-only audit.
    pub lambdas: Option<Vec<f64>>,
    /// Metrics to report; `None` picks accuracy, FPR, and AUC when every
    /// instance has a score.
    pub metrics: Option<Vec<MetricKind>>,
    pub split_runs: usize,
    pub top_tokens: usize,
    pub stop_tokens: Vec<String>,
}

impl AuditOptions {
    pub fn new(input: impl Into<PathBuf>, config: LoganConfig) -> Self {
        Self {
            input: input.into(),
            format: None,
            config,
            lambdas: Some(vec![1.0, 5.0, 10.0, 100.0]),
            metrics: None,
            split_runs: 5,
            top_tokens: 10,
            stop_tokens: Vec::new(),
        }
    }
}

fn default_metrics(d: &Dataset) -> Vec<MetricKind> {
    let mut kinds = vec![MetricKind::Accuracy, MetricKind::FalsePositiveRate];
    if d.instances().iter().all(|i| i.score.is_some()) {
        kinds.push(MetricKind::SubgroupAuc);
    }
    kinds.sort();
    kinds
}

fn attach_tokens(reports: &mut [ClusterReport], model: &ClusterModel, d: &Dataset, opts: &AuditOptions) -> Result<()> {
    if opts.top_tokens == 0 || d.instances().iter().all(|i| i.text.is_none()) {
        return Ok(());
    }
    let members = model.members();
    for r in reports {
        r.top_tokens = match interpret_cluster(d, &members[r.cluster_id], opts.top_tokens, &opts.stop_tokens) {
            Ok(tokens) => Some(tokens),
            Err(Error::NoText) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(())
}

/// Full audit: load, optionally standardize, K-Means baseline, bias-aware
/// grid search (unless K-Means only), merge, report and compare.
pub fn audit(opts: &AuditOptions) -> Result<AuditReport> {
    let cfg = &opts.config;
    cfg.validate()?;
    let bytes = fs::read(&opts.input).map_err(|e| Error::io(&opts.input, e))?;
    let raw = load_dataset(&opts.input, opts.format)?;
    let d = if cfg.standardize { standardize_features(&raw) } else { raw };

    let mut metrics = opts.metrics.clone().unwrap_or_else(|| default_metrics(&d));
    metrics.sort();
    metrics.dedup();

    let mut gaps = BTreeMap::new();
    for &kind in &metrics {
        gaps.insert(kind, global_bias(&d, kind)?);
    }
    let counts = d.group_counts();
    let global = GlobalSection {
        groups: [d.groups()[0].0.clone(), d.groups()[1].0.clone()],
        n_group1: counts[0],
        n_group2: counts[1],
        gaps,
        random_split: random_split_baseline(&d, MetricKind::Accuracy, opts.split_runs, cfg.seed)?,
    };

    let kmeans = merge_small_clusters(&kmeans_fit(&d, cfg)?, &d, cfg);
    let mut kmeans_reports = cluster_reports(&kmeans, &d, cfg, &metrics)?;
    attach_tokens(&mut kmeans_reports, &kmeans, &d, opts)?;
    let kmeans_cmp = compare(&kmeans, &kmeans, &d, cfg)?;

    let (lambda, grid, clusters, baseline_clusters, logan_cmp) = match &opts.lambdas {
        Some(lambdas) => {
            let result = grid_search(&d, cfg, lambdas)?;
            let chosen = result.chosen_cell();
            let cfg_chosen = LoganConfig { lambda: chosen.lambda, ..cfg.clone() };
            let mut reports = cluster_reports(&chosen.model, &d, &cfg_chosen, &metrics)?;
            attach_tokens(&mut reports, &chosen.model, &d, opts)?;
            let cmp = compare(&chosen.model, &kmeans, &d, &cfg_chosen)?;
            (Some(chosen.lambda), result.summaries(), reports, Some(kmeans_reports), Some(cmp))
        }
        None => (None, Vec::new(), kmeans_reports, None, None),
    };

    let generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    Ok(AuditReport {
        config: ConfigEcho {
            mode: if opts.lambdas.is_some() { AuditMode::Detect } else { AuditMode::Baseline },
            k: cfg.k,
            lambda,
            lambdas: opts.lambdas.clone().unwrap_or_default(),
            max_iter: cfg.max_iter,
            seed: cfg.seed,
            min_cluster_total: cfg.min_cluster_total,
            min_clusters: cfg.min_clusters,
            min_per_group: cfg.min_per_group,
            bias_threshold: cfg.bias_threshold,
            standardize: cfg.standardize,
            normalize_inertia: cfg.normalize_inertia,
            metrics,
        },
        global,
        grid,
        clusters,
        baseline_clusters,
        comparison: ComparisonSection {
            kmeans: kmeans_cmp,
            logan: logan_cmp,
        },
        provenance: Provenance {
            input_sha256: hex::encode(Sha256::digest(&bytes)),
            seed: cfg.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at,
        },
    })
}

/// Runs the audit and writes the JSON report to `output`. Nothing is written
/// when the audit fails.
pub fn run_detect(opts: &AuditOptions, output: impl AsRef<Path>) -> Result<AuditReport> {
    let report = audit(opts)?;
    let mut json = report.to_json()?;
    json.push('\n');
    write_file(output.as_ref(), json.as_bytes())?;
    Ok(report)
}

/// One (cluster, group) row of plot data.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub cluster_id: usize,
    pub group: String,
    pub n: usize,
    pub accuracy: Option<f64>,
    pub gap: Option<f64>,
    pub biased: bool,
}

pub fn plot_rows(report: &AuditReport) -> Vec<PlotRow> {
    let mut rows = Vec::with_capacity(report.clusters.len() * 2);
    let mut clusters: Vec<&ClusterReport> = report.clusters.iter().collect();
    clusters.sort_by_key(|c| c.cluster_id);
    for c in clusters {
        let acc = c.accuracy();
        for (group, n, accuracy) in [
            (&report.global.groups[0], acc.n_group1, acc.perf_group1),
            (&report.global.groups[1], acc.n_group2, acc.perf_group2),
        ] {
            rows.push(PlotRow {
                cluster_id: c.cluster_id,
                group: group.clone(),
                n,
                accuracy,
                gap: acc.gap,
                biased: c.biased,
            });
        }
    }
    rows
}

pub fn plot_csv(report: &AuditReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["cluster_id", "group", "n", "accuracy", "gap", "biased"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in plot_rows(report) {
        w.write_record([
            r.cluster_id.to_string(),
            r.group,
            r.n.to_string(),
            opt(r.accuracy),
            opt(r.gap),
            r.biased.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

/// Writes per-(cluster, group) accuracy rows for external plotting.
pub fn emit_plot_data(report: &AuditReport, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), plot_csv(report)?.as_bytes())
}

pub fn parse_plot_csv(text: &str) -> Result<Vec<PlotRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |msg: &str| Error::Parse { line, message: msg.to_string() };
        let get = |i: usize| rec.get(i).ok_or_else(|| bad("short row"));
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad("bad number"))
            }
        };
        out.push(PlotRow {
            cluster_id: get(0)?.parse().map_err(|_| bad("bad cluster_id"))?,
            group: get(1)?.to_string(),
            n: get(2)?.parse().map_err(|_| bad("bad n"))?,
            accuracy: opt(get(3)?)?,
            gap: opt(get(4)?)?,
            biased: get(5)?.parse().map_err(|_| bad("bad biased flag"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GOOD: &str = r#"{"id":"a","features":[0.5,1.0],"group":"m","label":1,"pred":1,"score":0.9}
{"id":"b","features":[1.5,-1.0],"group":"f","label":0,"pred":1,"extra":"ignored"}
{"id":"c","features":[2.5,0.0],"group":"m","label":0,"pred":0,"text":"hello world"}
"#;

    #[test]
    fn loads_three_lines() {
        let d = parse_jsonl(GOOD).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.instance(0).score, Some(0.9));
        assert_eq!(d.instance(2).text.as_deref(), Some("hello world"));
    }

    #[test]
    fn missing_group_names_line_two() {
        let text = "{\"id\":\"a\",\"features\":[0.5],\"group\":\"m\",\"label\":1,\"pred\":1}\n\
                    {\"id\":\"b\",\"features\":[0.5],\"label\":1,\"pred\":1}\n";
        match parse_jsonl(text) {
            Err(Error::Parse { line: 2, message }) => assert!(message.contains("group"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_range_score_names_line() {
        let text = "{\"id\":\"a\",\"features\":[0.5],\"group\":\"m\",\"label\":1,\"pred\":1}\n\
                    \n\
                    {\"id\":\"b\",\"features\":[0.5],\"group\":\"f\",\"label\":1,\"pred\":1,\"score\":1.5}\n";
        match parse_jsonl(text) {
            Err(Error::InvalidLine { line: 3, source: crate::error::RowError::ScoreOutOfRange(s) }) => assert_eq!(s, 1.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_loader_matches_jsonl() {
        let csv = "id,group,label,pred,score,text,f0,f1\n\
                   a,m,1,1,0.9,,0.5,1.0\n\
                   b,f,0,1,,,1.5,-1.0\n\
                   c,m,0,0,,\"hello world\",2.5,0.0\n";
        assert_eq!(parse_csv(csv).unwrap(), parse_jsonl(GOOD).unwrap());
    }

    #[test]
    fn csv_quoting_and_errors() {
        let csv = "id,group,label,pred,text,f0\n\
                   a,m,1,1,\"multi\nline, quoted\",0.5\n\
                   b,f,1,x,,0.5\n";
        match parse_csv(csv) {
            Err(Error::Parse { line: 4, message }) => assert!(message.contains("pred"), "{message}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_csv("id,group,label,pred,f1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_csv("id,group,label,f0\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn csv_roundtrip() {
        let d = parse_jsonl(GOOD).unwrap();
        assert_eq!(parse_csv(&to_csv(&d).unwrap()).unwrap(), d);
    }

    #[test]
    fn format_detection() {
        assert_eq!(InputFormat::from_path(Path::new("x.CSV")), InputFormat::Csv);
        assert_eq!(InputFormat::from_path(Path::new("x.jsonl")), InputFormat::Jsonl);
        assert_eq!("csv".parse::<InputFormat>().unwrap(), InputFormat::Csv);
        assert!("xml".parse::<InputFormat>().is_err());
    }

    fn arb_records() -> impl Strategy<Value = Vec<RawRecord>> {
        (1usize..4, 2usize..20).prop_flat_map(|(dim, n)| {
            prop::collection::vec(
                (
                    prop::collection::vec(-1e6..1e6f64, dim),
                    any::<bool>(),
                    0i64..2,
                    0i64..2,
                    prop::option::of(0.0..=1.0f64),
                    prop::option::of("[a-z ]{0,12}"),
                ),
                n,
            )
            .prop_map(|v| {
                let len = v.len();
                v.into_iter()
                    .enumerate()
                    .map(|(i, (features, g, label, pred, score, text))| RawRecord {
                        id: format!("id{i}"),
                        features,
                        // force both groups to appear
                        group: if i == 0 { "a".into() } else if i == len - 1 { "b".into() } else if g { "a".into() } else { "b".into() },
                        label,
                        pred,
                        score,
                        text,
                    })
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn jsonl_roundtrip_is_identity(records in arb_records()) {
            let d = build_dataset(&records).unwrap();
            let back = parse_jsonl(&to_jsonl(&d).unwrap()).unwrap();
            prop_assert_eq!(back.to_records(), records);
            prop_assert_eq!(back, d);
        }
    }
}
