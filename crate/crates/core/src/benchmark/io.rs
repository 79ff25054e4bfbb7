use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::MethodId;
use super::runner::{run_benchmark, EvaluationRecord, DEFAULT_BUDGET_SECONDS};
use crate::dataset::{load_csv, LabelColumn, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::Metric;

pub const RECORDS_FILE: &str = "records.jsonl";
pub const RESULTS_FILE: &str = "results.csv";
pub const TIMINGS_FILE: &str = "timings.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub id: String,
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
    pub label_column: LabelColumn,
    pub positive_label: String,
}

fn default_methods() -> Vec<MethodId> {
    MethodId::ALL.to_vec()
}

fn default_parallelism() -> usize {
    1
}

fn default_budget() -> f64 {
    DEFAULT_BUDGET_SECONDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub datasets: Vec<DatasetSpec>,
    #[serde(default = "default_methods", deserialize_with = "de_methods")]
    pub methods: Vec<MethodId>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_budget")]
    pub budget_seconds: f64,
    pub output_dir: PathBuf,
}

/// Method names may be ids or display names.
fn de_methods<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Vec<MethodId>, D::Error> {
    let names: Vec<String> = Vec::deserialize(de)?;
    names
        .iter()
        .map(|n| n.parse().map_err(serde::de::Error::custom))
        .collect()
}

impl BenchmarkConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for d in &mut cfg.datasets {
            if d.path.is_relative() {
                d.path = base.join(&d.path);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn load_datasets(&self) -> Result<Vec<(String, LabeledDataset)>> {
        self.datasets
            .iter()
            .map(|s| {
                let (d, report) = load_csv(&s.path, &s.label_column, &s.positive_label)?;
                if report.imputed_cells > 0 {
                    log::warn!("{}: imputed {} empty cells with column means", s.id, report.imputed_cells);
                }
                Ok((s.id.clone(), d))
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<EvaluationRecord>,
    pub records_path: PathBuf,
    pub results_path: PathBuf,
    pub timings_path: PathBuf,
}

/// Loads the datasets, runs the benchmark and writes the three output files.
pub fn run_from_config(cfg: &BenchmarkConfig) -> Result<RunOutput> {
    let datasets = cfg.load_datasets()?;
    let records = run_benchmark(&datasets, &cfg.methods, cfg.seed, cfg.parallelism, cfg.budget_seconds)?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let out = RunOutput {
        records_path: cfg.output_dir.join(RECORDS_FILE),
        results_path: cfg.output_dir.join(RESULTS_FILE),
        timings_path: cfg.output_dir.join(TIMINGS_FILE),
        records,
    };
    write_records_jsonl(&out.records, create(&out.records_path)?)?;
    write_results_csv(&out.records, create(&out.results_path)?)?;
    write_timings_csv(&out.records, create(&out.timings_path)?)?;
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_records_jsonl<W: Write>(records: &[EvaluationRecord], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io("<records>", e))?;
    }
    w.flush().map_err(|e| Error::io("<records>", e))
}

pub fn read_records_jsonl<R: Read>(r: R) -> Result<Vec<EvaluationRecord>> {
    let mut out = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line.map_err(|e| Error::io("<records>", e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Reads `records.jsonl` and, when a `timings.csv` sits next to it, fills in
/// the resample times.
pub fn load_records(path: impl AsRef<Path>) -> Result<Vec<EvaluationRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = read_records_jsonl(file)?;
    let timings = path.with_file_name(TIMINGS_FILE);
    if timings.exists() {
        let file = File::open(&timings).map_err(|e| Error::io(&timings, e))?;
        let t = read_timings_csv(file)?;
        for r in &mut records {
            if let Some(&s) = t.get(&(r.dataset.clone(), r.method, r.config_index)) {
                r.resample_seconds = Some(s);
            }
        }
    }
    Ok(records)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Flat table: identifiers, status, the eight metrics and resample time.
pub fn write_results_csv<W: Write>(records: &[EvaluationRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["dataset", "method", "config_index", "status"];
    header.extend(Metric::ALL.iter().map(|m| m.name()));
    header.push("resample_seconds");
    out.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.dataset.clone(),
            r.method.to_string(),
            r.config_index.to_string(),
            r.status.as_str().to_string(),
        ];
        row.extend(Metric::ALL.iter().map(|&m| opt(r.scores.get(m))));
        row.push(opt(r.resample_seconds));
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::io("<results>", e))
}

pub fn write_timings_csv<W: Write>(records: &[EvaluationRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["dataset", "method", "config_index", "resample_seconds"])?;
    for r in records {
        out.write_record([
            r.dataset.clone(),
            r.method.to_string(),
            r.config_index.to_string(),
            opt(r.resample_seconds),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<timings>", e))
}

pub type TimingKey = (String, MethodId, usize);

pub fn read_timings_csv<R: Read>(r: R) -> Result<HashMap<TimingKey, f64>> {
    #[derive(Deserialize)]
    struct Row {
        dataset: String,
        method: String,
        config_index: usize,
        resample_seconds: Option<f64>,
    }
    let mut out = HashMap::new();
    for row in csv::Reader::from_reader(r).deserialize::<Row>() {
        let row = row?;
        if let Some(s) = row.resample_seconds {
            out.insert((row.dataset, row.method.parse()?, row.config_index), s);
        }
    }
    Ok(out)
}
