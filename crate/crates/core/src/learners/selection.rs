use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::knn::knn_score;
use super::linear::{logistic_fit, LinearScorer};
use crate::dataset::{Class, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::{roc_auc, ScoredPredictions};
use crate::rng;

/// Gradient steps for every logistic candidate.
pub const LOGISTIC_EPOCHS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Logistic { lambda: f64 },
    Knn { k: usize },
}

impl fmt::Display for ClassifierConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierConfig::Logistic { lambda } => write!(f, "logistic(lambda={lambda})"),
            ClassifierConfig::Knn { k } => write!(f, "knn(k={k})"),
        }
    }
}

/// The fixed candidate pool searched by cross-validation.
pub fn default_candidates() -> Vec<ClassifierConfig> {
    vec![
        ClassifierConfig::Logistic { lambda: 1e-3 },
        ClassifierConfig::Logistic { lambda: 1e-1 },
        ClassifierConfig::Knn { k: 5 },
        ClassifierConfig::Knn { k: 15 },
    ]
}

/// A trained scorer; higher scores mean "more minority".
#[derive(Debug, Clone)]
pub enum FittedScorer {
    Logistic(LinearScorer),
    Knn { train: LabeledDataset, k: usize },
}

impl FittedScorer {
    pub fn fit(config: ClassifierConfig, train: &LabeledDataset, seed: u64) -> Result<Self> {
        match config {
            ClassifierConfig::Logistic { lambda } => {
                logistic_fit(train, lambda, LOGISTIC_EPOCHS, seed).map(FittedScorer::Logistic)
            }
            ClassifierConfig::Knn { k } => {
                train.require_both_classes()?;
                Ok(FittedScorer::Knn {
                    train: train.clone(),
                    // Small folds can hold fewer rows than k.
                    k: k.min(train.n_samples()),
                })
            }
        }
    }

    pub fn score(&self, data: &LabeledDataset) -> Result<Vec<f64>> {
        match self {
            FittedScorer::Logistic(m) => Ok(m.score_all(data)),
            FittedScorer::Knn { train, k } => knn_score(train, data.features(), *k),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub config: ClassifierConfig,
    pub scorer: FittedScorer,
    /// Mean out-of-fold ROC AUC per candidate, in candidate order.
    pub cv_scores: Vec<f64>,
    pub folds_used: usize,
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(d: &LabeledDataset, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::seeded(seed);
    let mut fold_of = vec![0; d.n_samples()];
    let mut next = 0;
    for class in [Class::Minority, Class::Majority] {
        let mut idx = d.indices_of(class);
        idx.shuffle(&mut rng);
        for i in idx {
            fold_of[i] = next % folds;
            next += 1;
        }
    }
    fold_of
}

/// Picks the candidate with the best mean out-of-fold ROC AUC (first wins
/// ties) and refits it on all of `train`. Folds whose validation part holds a
/// single class are skipped.
pub fn select_model_cv(
    train: &LabeledDataset,
    candidates: &[ClassifierConfig],
    folds: usize,
    seed: u64,
) -> Result<Selection> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 folds, got {folds}")));
    }
    if candidates.is_empty() {
        return Err(Error::ModelSelection("no candidate classifiers".into()));
    }
    train.require_both_classes()?;
    let fold_of = stratified_folds(train, folds, rng::derive(seed, "folds"));

    let mut sums = vec![0.0; candidates.len()];
    let mut used = 0;
    for f in 0..folds {
        let (val_idx, fit_idx): (Vec<usize>, Vec<usize>) =
            (0..train.n_samples()).partition(|&i| fold_of[i] == f);
        let val = train.select(&val_idx);
        let fit = train.select(&fit_idx);
        let (vmaj, vmin) = val.class_counts();
        let (fmaj, fmin) = fit.class_counts();
        if vmaj == 0 || vmin == 0 || fmaj == 0 || fmin == 0 {
            log::debug!("fold {f} skipped: single-class part");
            continue;
        }
        used += 1;
        for (c, cfg) in candidates.iter().enumerate() {
            let scorer = FittedScorer::fit(*cfg, &fit, rng::derive_index(seed, f as u64))?;
            let sp = ScoredPredictions::new(scorer.score(&val)?, val.labels().to_vec())?;
            sums[c] += roc_auc(&sp)?;
        }
    }
    if used == 0 {
        return Err(Error::ModelSelection("every fold had a single class".into()));
    }
    let cv_scores: Vec<f64> = sums.iter().map(|s| s / used as f64).collect();
    let best = cv_scores
        .iter()
        .enumerate()
        .fold(0, |best, (i, &s)| if s > cv_scores[best] { i } else { best });
    let config = candidates[best];
    let scorer = FittedScorer::fit(config, train, rng::derive(seed, "refit"))?;
    Ok(Selection {
        config,
        scorer,
        cv_scores,
        folds_used: used,
    })
}
