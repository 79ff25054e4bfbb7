use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use imbench_core::benchmark::{load_records, run_from_config, BenchmarkConfig, MethodConfig, MethodId, RunStatus};
use imbench_core::dataset::{load_csv, write_csv, LabelColumn};
use imbench_core::metrics::evaluate;
use imbench_core::report::emit::rank_table_csv;
use imbench_core::report::{
    aggregate_ranks, appendix_rank_table, emit_report, friedman_statistic, load_appendix_dir, records_rank_table,
    MissingPolicy, RankPolicy, RankSummary, TiePolicy,
};
use imbench_core::{Class, Metric, ScoredPredictions};

#[derive(Parser)]
#[command(name = "bench", version, about = "Benchmark resampling methods for imbalanced classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured method on every configured dataset.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rank methods per dataset and summarise the ranks.
    Report(ReportArgs),
    /// Apply one resampling configuration to a CSV file.
    Resample(ResampleArgs),
    /// Score a CSV of `score,label` rows with every metric.
    Metrics {
        #[arg(long)]
        scores: PathBuf,
        /// Label value of the positive (minority) class.
        #[arg(long, default_value = "1")]
        positive_label: String,
        /// FPR bound of the partial ROC area; defaults to the positive rate.
        #[arg(long)]
        fpr_cap: Option<f64>,
    },
}

#[derive(Args)]
struct ReportArgs {
    /// Record file written by `run` (records.jsonl).
    #[arg(long, required_unless_present = "appendix", conflicts_with = "appendix")]
    records: Option<PathBuf>,
    /// Directory of per-dataset result tables with an index.csv.
    #[arg(long)]
    appendix: Option<PathBuf>,
    /// Only appendix tables of this domain.
    #[arg(long, requires = "appendix")]
    domain: Option<String>,
    /// Metric to rank by; repeat for several. Defaults to the three curve metrics.
    #[arg(long = "metric")]
    metrics: Vec<Metric>,
    #[arg(long, default_value = "report")]
    out: PathBuf,
    /// Also draw a box plot per metric.
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value = "average")]
    ties: TiePolicy,
    #[arg(long, default_value = "exclude")]
    missing: MissingPolicy,
}

#[derive(Args)]
struct ResampleArgs {
    /// Method id or display name.
    #[arg(long)]
    method: MethodId,
    /// Comma-separated `name=value` pairs; unspecified parameters take defaults.
    #[arg(long, default_value = "")]
    params: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "label")]
    label_column: String,
    #[arg(long, default_value = "1")]
    positive_label: String,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config } => run(&config),
        Command::Report(args) => report(&args),
        Command::Resample(args) => resample(&args),
        Command::Metrics {
            scores,
            positive_label,
            fpr_cap,
        } => metrics(&scores, &positive_label, fpr_cap),
    }
}

fn run(config: &Path) -> Result<()> {
    let cfg = BenchmarkConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    let out = run_from_config(&cfg)?;
    let failed = out.records.iter().filter(|r| r.status != RunStatus::Ok).count();
    println!(
        "{} records ({failed} not ok) -> {}, {}, {}",
        out.records.len(),
        out.records_path.display(),
        out.results_path.display(),
        out.timings_path.display()
    );
    Ok(())
}

fn print_summaries(metric: Metric, summaries: &[RankSummary]) {
    println!("{metric}");
    println!("  {:<24} {:>7} {:>5} {:>5} {:>5} {:>5} {:>5} {:>3}", "method", "mean", "min", "p25", "p50", "p75", "max", "n");
    for s in summaries {
        println!(
            "  {:<24} {:>7.3} {:>5.1} {:>5.1} {:>5.1} {:>5.1} {:>5.1} {:>3}",
            s.method, s.mean, s.min, s.p25, s.p50, s.p75, s.max, s.n
        );
    }
}

fn report(args: &ReportArgs) -> Result<()> {
    let metrics = if args.metrics.is_empty() {
        Metric::CURVE.to_vec()
    } else {
        args.metrics.clone()
    };
    let policy = RankPolicy {
        ties: args.ties,
        missing: args.missing,
    };
    if let Some(dir) = &args.appendix {
        let tables = load_appendix_dir(dir, args.domain.as_deref())?;
        if tables.is_empty() {
            bail!("no appendix tables in {}", dir.display());
        }
        fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
        for metric in metrics {
            let table = appendix_rank_table(&tables, metric, policy)?;
            let path = args.out.join(format!("ranks_{metric}.csv"));
            fs::write(&path, rank_table_csv(&table)?).with_context(|| format!("writing {}", path.display()))?;
            print_summaries(metric, &aggregate_ranks(&table));
            if let Ok(f) = friedman_statistic(&table) {
                println!("  Friedman chi2 = {:.3}, p = {:.3e} (k = {}, N = {})", f.statistic, f.p_value, f.k, f.n);
            }
        }
        return Ok(());
    }
    let path = args.records.as_ref().expect("clap enforces records or appendix");
    let records = load_records(path).with_context(|| format!("loading {}", path.display()))?;
    let written = emit_report(&records, &args.out, &metrics, policy, args.svg)?;
    for metric in metrics {
        print_summaries(metric, &aggregate_ranks(&records_rank_table(&records, metric, policy)));
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn resample(args: &ResampleArgs) -> Result<()> {
    let column = match args.label_column.parse::<usize>() {
        Ok(i) => LabelColumn::Index(i),
        Err(_) => LabelColumn::Name(args.label_column.clone()),
    };
    let (d, _) = load_csv(&args.input, &column, &args.positive_label)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let params = MethodConfig::parse_params(&args.params)?;
    let config = MethodConfig::new(args.method, params, 0)?;
    let out = config.resample(&d, args.seed)?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_csv(&out.dataset, BufWriter::new(file))?;
    let ((maj0, min0), (maj1, min1)) = (d.class_counts(), out.dataset.class_counts());
    println!("{config}: majority {maj0} -> {maj1}, minority {min0} -> {min1}");
    Ok(())
}

fn metrics(path: &Path, positive_label: &str, fpr_cap: Option<f64>) -> Result<()> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| format!("{}: missing column `{name}`", path.display()))
    };
    let (score_col, label_col) = (col("score")?, col("label")?);
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let s = rec[score_col].trim();
        scores.push(s.parse::<f64>().with_context(|| format!("row {}: bad score `{s}`", i + 2))?);
        labels.push(Class::from_bool(rec[label_col].trim() == positive_label));
    }
    let sp = ScoredPredictions::new(scores, labels)?;
    let (pos, neg) = sp.class_counts();
    if pos == 0 || neg == 0 {
        bail!("both classes are needed (positive {pos}, negative {neg})");
    }
    let cap = fpr_cap.unwrap_or(pos as f64 / (pos + neg) as f64);
    let scores = evaluate(&sp, cap)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, &scores)?;
    writeln!(out)?;
    Ok(())
}
