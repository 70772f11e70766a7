//! Command-line front end.
//!
//! Exit status: 0 when no biased cluster is found, 2 when at least one is,
//! 1 on any error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use logan::io::{emit_plot_data, load_dataset, run_detect, write_dataset, AuditOptions, InputFormat};
use logan::metrics::{random_split_baseline, MetricKind};
use logan::synthetic::{generate, PlantedBiasSpec};
use logan::LoganConfig;

#[derive(Parser)]
#[command(name = "logan", version, about = "Find clusters where a classifier treats two groups differently")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// K-Means baseline plus bias-aware clustering over a lambda grid.
    Detect {
        #[command(flatten)]
        audit: AuditArgs,
        /// Comma-separated bias weights to try.
        #[arg(long, value_delimiter = ',', default_value = "1,5,10,100")]
        lambdas: Vec<f64>,
    },
    /// K-Means-only audit.
    Baseline {
        #[command(flatten)]
        audit: AuditArgs,
    },
    /// Write a synthetic dataset with planted local bias.
    Synth {
        #[arg(long, value_enum, default_value = "planted-bias")]
        preset: Preset,
        #[arg(long, default_value_t = 400)]
        n_per_component: usize,
        #[arg(long, default_value_t = 0.30)]
        planted_gap: f64,
        #[arg(long, default_value_t = 5)]
        n_clusters: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        format: Option<InputFormat>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Gap between random pseudo-groups sized like the real ones.
    RandomSplit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        format: Option<InputFormat>,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "accuracy")]
        metric: MetricKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    PlantedBias,
    AllCorrect,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    format: Option<InputFormat>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    bias_threshold: f64,
    #[arg(long, default_value_t = 20)]
    min_per_group: usize,
    #[arg(long, default_value_t = 20)]
    min_cluster_total: usize,
    #[arg(long, default_value_t = 5)]
    min_clusters: usize,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Z-score feature columns before clustering.
    #[arg(long)]
    standardize: bool,
    /// Divide the clustering loss by the number of instances.
    #[arg(long)]
    normalize_inertia: bool,
    /// Comma-separated subset of accuracy,auc,fpr.
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<MetricKind>>,
    #[arg(long, default_value_t = 5)]
    split_runs: usize,
    /// Top tokens per cluster when instances carry text (0 disables).
    #[arg(long, default_value_t = 10)]
    top_tokens: usize,
    #[arg(long, value_delimiter = ',')]
    stop_words: Vec<String>,
    #[arg(long)]
    output: PathBuf,
    /// Also write per-(cluster, group) accuracy rows as CSV.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

impl AuditArgs {
    fn options(&self, lambdas: Option<Vec<f64>>) -> AuditOptions {
        let config = LoganConfig {
            k: self.k,
            lambda: 0.0,
            max_iter: self.max_iter,
            seed: self.seed,
            min_cluster_total: self.min_cluster_total,
            min_clusters: self.min_clusters,
            min_per_group: self.min_per_group,
            bias_threshold: self.bias_threshold,
            standardize: self.standardize,
            normalize_inertia: self.normalize_inertia,
        };
        AuditOptions {
            input: self.input.clone(),
            format: self.format,
            config,
            lambdas,
            metrics: self.metrics.clone(),
            split_runs: self.split_runs,
            top_tokens: self.top_tokens,
            stop_tokens: self.stop_words.clone(),
        }
    }
}

fn audit(args: &AuditArgs, lambdas: Option<Vec<f64>>) -> logan::Result<ExitCode> {
    let report = run_detect(&args.options(lambdas), &args.output)?;
    if let Some(path) = &args.plot_data {
        emit_plot_data(&report, path)?;
    }
    let biased = report.biased_clusters();
    eprintln!(
        "{} clusters, {} biased (threshold {}); report written to {}",
        report.clusters.len(),
        biased,
        report.config.bias_threshold,
        args.output.display()
    );
    Ok(if biased > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn run(cli: Cli) -> logan::Result<ExitCode> {
    match cli.command {
        Command::Detect { audit: args, lambdas } => audit(&args, Some(lambdas)),
        Command::Baseline { audit: args } => audit(&args, None),
        Command::Synth {
            preset,
            n_per_component,
            planted_gap,
            n_clusters,
            dim,
            seed,
            format,
            output,
        } => {
            let base = match preset {
                Preset::PlantedBias => PlantedBiasSpec { planted_gap, ..Default::default() },
                Preset::AllCorrect => PlantedBiasSpec::all_correct(seed),
            };
            let spec = PlantedBiasSpec {
                n_per_component,
                n_clusters,
                dim,
                seed,
                counter_component: (n_clusters > 1).then_some(1),
                ..base
            };
            let d = generate(&spec)?;
            write_dataset(&d, &output, format)?;
            eprintln!("wrote {} instances to {}", d.len(), output.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::RandomSplit {
            input,
            format,
            runs,
            seed,
            metric,
        } => {
            let d = load_dataset(&input, format)?;
            let b = random_split_baseline(&d, metric, runs, seed)?;
            let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| x.to_string());
            println!("mean_gap\t{}", fmt(b.mean_gap));
            println!("std_gap\t{}", fmt(b.std_gap));
            println!("runs\t{}/{}", b.defined_runs, b.runs);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage-error status (2) would collide with "bias found"
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
