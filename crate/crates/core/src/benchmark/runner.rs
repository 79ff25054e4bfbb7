use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{expand_grid, MethodConfig, MethodId, Params};
use crate::dataset::{standardize, stratified_split, Class, LabeledDataset};
use crate::error::{Error, Result};
use crate::learners::{default_candidates, select_model_cv};
use crate::metrics::{evaluate, MetricScores, ScoredPredictions};
use crate::rng;

pub const TRAIN_FRACTION: f64 = 0.75;
pub const CV_FOLDS: usize = 5;
pub const DEFAULT_BUDGET_SECONDS: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    ResampleError,
    Timeout,
    MetricUndefined,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::ResampleError => "resample_error",
            RunStatus::Timeout => "timeout",
            RunStatus::MetricUndefined => "metric_undefined",
        }
    }
}

/// Outcome of one (dataset, method, configuration) run.
///
/// `resample_seconds` is wall-clock time and is left out of the JSON form so
/// that record files are reproducible byte for byte; it is written to the CSV
/// outputs instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub dataset: String,
    pub method: MethodId,
    pub config_index: usize,
    pub params: Params,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub scores: MetricScores,
    pub classifier: Option<String>,
    pub seed: u64,
    #[serde(skip)]
    pub resample_seconds: Option<f64>,
}

/// A dataset split and standardized once, shared by every configuration.
#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub id: String,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// Minority prevalence of the test part; the partial ROC FPR cap.
    pub fpr_cap: f64,
}

impl PreparedDataset {
    pub fn new(id: &str, d: &LabeledDataset, seed: u64) -> Result<Self> {
        let split = stratified_split(d, TRAIN_FRACTION, rng::derive(seed, &format!("split/{id}")))?;
        let (_, train, mut others) = standardize(&split.train, &[&split.test]);
        let test = others.pop().expect("one test set");
        let (maj, min) = test.class_counts();
        Ok(Self {
            id: id.to_string(),
            train,
            test,
            fpr_cap: min as f64 / (maj + min) as f64,
        })
    }
}

/// Per-run seed from the global seed, dataset and configuration.
pub fn run_seed(seed: u64, dataset_id: &str, config: &MethodConfig) -> u64 {
    rng::derive(seed, &format!("run/{dataset_id}/{}/{}", config.method, config.config_index))
}

/// Splits, standardizes and evaluates one configuration. Fails only when the
/// dataset itself cannot be split.
pub fn run_one(
    dataset_id: &str,
    d: &LabeledDataset,
    config: &MethodConfig,
    seed: u64,
    budget_seconds: f64,
) -> Result<EvaluationRecord> {
    let prepared = PreparedDataset::new(dataset_id, d, seed)?;
    Ok(run_prepared(&prepared, config, seed, budget_seconds))
}

pub fn run_prepared(p: &PreparedDataset, config: &MethodConfig, seed: u64, budget_seconds: f64) -> EvaluationRecord {
    let seed = run_seed(seed, &p.id, config);
    let mut rec = EvaluationRecord {
        dataset: p.id.clone(),
        method: config.method,
        config_index: config.config_index,
        params: config.params.clone(),
        status: RunStatus::Ok,
        message: None,
        warnings: Vec::new(),
        scores: MetricScores::default(),
        classifier: None,
        seed,
        resample_seconds: None,
    };

    let start = Instant::now();
    let resampled = config.resample(&p.train, rng::derive(seed, "resample"));
    let elapsed = start.elapsed().as_secs_f64();
    rec.resample_seconds = Some(elapsed);
    let resampled = match resampled {
        Ok(r) => r,
        Err(e) => {
            rec.status = RunStatus::ResampleError;
            rec.message = Some(e.to_string());
            return rec;
        }
    };
    rec.warnings = resampled.warnings;
    if elapsed > budget_seconds {
        rec.status = RunStatus::Timeout;
        rec.message = Some(format!("resampling took {elapsed:.1} s, budget {budget_seconds} s"));
        return rec;
    }

    match score(p, &resampled.dataset, seed) {
        Ok((classifier, scores)) => {
            rec.classifier = Some(classifier);
            rec.scores = scores;
        }
        Err(e) => {
            rec.status = RunStatus::MetricUndefined;
            rec.message = Some(e.to_string());
        }
    }
    rec
}

fn score(p: &PreparedDataset, train: &LabeledDataset, seed: u64) -> Result<(String, MetricScores)> {
    let sel = select_model_cv(train, &default_candidates(), CV_FOLDS, rng::derive(seed, "cv"))?;
    let preds = ScoredPredictions::new(sel.scorer.score(&p.test)?, p.test.labels().to_vec())?;
    let scores = evaluate(&preds, p.fpr_cap)?;
    Ok((sel.config.to_string(), scores))
}

/// Runs every configuration of `methods` on every dataset with a pool of
/// `parallelism` threads. Records come back in dataset, method, configuration
/// order whatever the scheduling.
pub fn run_benchmark(
    datasets: &[(String, LabeledDataset)],
    methods: &[MethodId],
    seed: u64,
    parallelism: usize,
    budget_seconds: f64,
) -> Result<Vec<EvaluationRecord>> {
    let prepared: Vec<PreparedDataset> = datasets
        .iter()
        .map(|(id, d)| PreparedDataset::new(id, d, seed))
        .collect::<Result<_>>()?;
    let configs: Vec<MethodConfig> = methods.iter().flat_map(|&m| expand_grid(m)).collect();
    let tasks: Vec<(&PreparedDataset, &MethodConfig)> = prepared
        .iter()
        .flat_map(|p| configs.iter().map(move |c| (p, c)))
        .collect();
    log::info!(
        "{} datasets x {} configurations = {} runs on {} threads",
        prepared.len(),
        configs.len(),
        tasks.len(),
        parallelism.max(1)
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .map(|(p, c)| {
                let rec = run_prepared(p, c, seed, budget_seconds);
                log::debug!("{} {} -> {}", p.id, c, rec.status.as_str());
                rec
            })
            .collect()
    }))
}

/// Training-set rows that also appear in the test set; empty when nothing
/// leaked.
pub fn leaked_rows(train: &LabeledDataset, test: &LabeledDataset) -> Vec<usize> {
    use std::collections::HashSet;
    let key = |r: &[f64], c: Class| (r.iter().map(|v| v.to_bits()).collect::<Vec<u64>>(), c);
    let test_rows: HashSet<_> = (0..test.n_samples()).map(|i| key(test.row(i), test.label(i))).collect();
    (0..train.n_samples())
        .filter(|&i| test_rows.contains(&key(train.row(i), train.label(i))))
        .collect()
}
