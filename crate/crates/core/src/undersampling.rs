//! Undersampling: prototype selection (random, CNN, ENN family, NearMiss,
//! Tomek links, OSS, NCL) and prototype generation (cluster centroids).
//!
//! Minority rows are never removed. Selection methods keep surviving rows in
//! their original order.

use std::collections::BTreeSet;

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::dataset::{Class, LabeledDataset};
use crate::error::{Error, Result};
use crate::learners::kmeans_fit;
use crate::neighbors::{squared_distance, NeighborIndex};
use crate::resample::{undersample_target, Resampled};
use crate::rng;

/// When an edited-NN test removes a majority row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnnCriterion {
    /// Minority labels strictly outnumber majority labels among the neighbours.
    #[default]
    Mode,
    /// Any neighbour is minority.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnnMode {
    #[default]
    Single,
    Repeated,
    AllKnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NearMissVersion {
    V1,
    V2,
    V3,
}

impl NearMissVersion {
    pub fn from_number(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Self::V1),
            2 => Ok(Self::V2),
            3 => Ok(Self::V3),
            _ => Err(Error::InvalidParameter(format!("NearMiss version {v} not in 1..=3"))),
        }
    }
}

pub const DEFAULT_ENN_MAX_ITER: usize = 100;
pub const DEFAULT_CLEANING_THRESHOLD: f64 = 0.5;

fn keep(d: &LabeledDataset, mut kept: Vec<usize>) -> LabeledDataset {
    kept.sort_unstable();
    kept.dedup();
    d.select(&kept)
}

/// Keeps `ceil(N_min / ratio)` majority rows drawn uniformly without
/// replacement.
pub fn random_undersample(d: &LabeledDataset, target_ratio: f64, seed: u64) -> Result<Resampled> {
    d.require_both_classes()?;
    let (n_maj, n_min) = d.class_counts();
    let target = undersample_target(target_ratio, n_min)?;
    if target > n_maj {
        return Err(Error::InvalidParameter(format!(
            "ratio {target_ratio} needs {target} majority rows, only {n_maj} present"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut kept: Vec<usize> = d
        .indices_of(Class::Majority)
        .choose_multiple(&mut rng, target)
        .copied()
        .collect();
    kept.extend(d.indices_of(Class::Minority));
    Ok(keep(d, kept).into())
}

/// Row ids of the condensed store.
pub fn condensed_store(d: &LabeledDataset, n_seeds: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::seeded(seed);
    let mut majority = d.indices_of(Class::Majority);
    majority.shuffle(&mut rng);
    let n_seeds = n_seeds.min(majority.len());
    let mut store = d.indices_of(Class::Minority);
    store.extend_from_slice(&majority[..n_seeds]);
    let mut pending: Vec<usize> = majority[n_seeds..].to_vec();

    // 1-NN over the store; equal distances go to the earlier store entry.
    let nearest_label = |store: &[usize], x: &[f64]| {
        store
            .iter()
            .map(|&s| (squared_distance(d.row(s), x), s))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, s)| d.label(s))
    };

    loop {
        let mut moved = false;
        let mut still = Vec::with_capacity(pending.len());
        for i in pending {
            if nearest_label(&store, d.row(i)) != Some(Class::Majority) {
                store.push(i);
                moved = true;
            } else {
                still.push(i);
            }
        }
        pending = still;
        if !moved || pending.is_empty() {
            break;
        }
    }
    store
}

pub fn condensed_nn(d: &LabeledDataset, n_seeds: usize, seed: u64) -> Result<Resampled> {
    d.require_both_classes()?;
    Ok(keep(d, condensed_store(d, n_seeds, seed)).into())
}

/// One ENN round over `rows`: returns the rows that survive.
fn enn_round(d: &LabeledDataset, rows: &[usize], k: usize, criterion: EnnCriterion) -> Result<Vec<usize>> {
    let k = k.min(rows.len().saturating_sub(1));
    if k == 0 {
        return Ok(rows.to_vec());
    }
    let index = NeighborIndex::over_rows(d, rows)?;
    let mut out = Vec::with_capacity(rows.len());
    for (pos, &row) in rows.iter().enumerate() {
        if d.label(row).is_minority() {
            out.push(row);
            continue;
        }
        let nn = index.knn_of(pos, k)?;
        let minority = nn.iter().filter(|n| d.label(rows[n.index]).is_minority()).count();
        let remove = match criterion {
            EnnCriterion::Mode => minority > k - minority,
            EnnCriterion::All => minority > 0,
        };
        if !remove {
            out.push(row);
        }
    }
    Ok(out)
}

fn majority_count(d: &LabeledDataset, rows: &[usize]) -> usize {
    rows.iter().filter(|&&r| !d.label(r).is_minority()).count()
}

pub fn edited_nn(
    d: &LabeledDataset,
    k: usize,
    criterion: EnnCriterion,
    mode: EnnMode,
    max_iter: usize,
) -> Result<Resampled> {
    d.require_both_classes()?;
    if k == 0 {
        return Err(Error::InvalidParameter("k_neighbors must be at least 1".into()));
    }
    let n_min = d.class_counts().1;
    let mut rows: Vec<usize> = (0..d.n_samples()).collect();
    let mut warnings = Vec::new();
    match mode {
        EnnMode::Single => rows = enn_round(d, &rows, k, criterion)?,
        EnnMode::Repeated => {
            let mut converged = false;
            for _ in 0..max_iter {
                let next = enn_round(d, &rows, k, criterion)?;
                if next.len() == rows.len() {
                    converged = true;
                    break;
                }
                let n_maj = majority_count(d, &next);
                if n_maj == 0 || n_maj < n_min {
                    warnings.push(format!(
                        "stopped before a round that would leave {n_maj} majority rows"
                    ));
                    converged = true;
                    break;
                }
                rows = next;
            }
            if !converged {
                warnings.push(format!("no fixpoint within {max_iter} rounds"));
            }
        }
        EnnMode::AllKnn => {
            for kk in 1..=k {
                rows = enn_round(d, &rows, kk, criterion)?;
            }
        }
    }
    if majority_count(d, &rows) == 0 {
        warnings.push("every majority row was removed".into());
    }
    Ok(Resampled {
        dataset: d.select(&rows),
        warnings,
    })
}

/// Mean distance from each majority row to its `n` closest (or furthest)
/// minority rows.
fn near_miss_scores(d: &LabeledDataset, majority: &[usize], minority: &[usize], n: usize, furthest: bool) -> Vec<f64> {
    majority
        .iter()
        .map(|&i| {
            let mut dist: Vec<f64> = minority
                .iter()
                .map(|&j| squared_distance(d.row(i), d.row(j)).sqrt())
                .collect();
            dist.sort_by(f64::total_cmp);
            let pick = if furthest { &dist[dist.len() - n..] } else { &dist[..n] };
            pick.iter().sum::<f64>() / n as f64
        })
        .collect()
}

/// NearMiss-3 candidate pool: the union of each minority row's `k` nearest
/// majority rows.
pub fn near_miss_pool(d: &LabeledDataset, k: usize) -> Result<Vec<usize>> {
    let majority = d.indices_of(Class::Majority);
    let k = k.min(majority.len());
    let index = NeighborIndex::over_rows(d, &majority)?;
    let mut pool = BTreeSet::new();
    for i in d.indices_of(Class::Minority) {
        for n in index.knn(d.row(i), k, None)? {
            pool.insert(majority[n.index]);
        }
    }
    Ok(pool.into_iter().collect())
}

fn lowest(candidates: &[usize], scores: &[f64], count: usize, descending: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let c = scores[a].total_cmp(&scores[b]);
        (if descending { c.reverse() } else { c }).then(candidates[a].cmp(&candidates[b]))
    });
    order.into_iter().take(count).map(|p| candidates[p]).collect()
}

pub fn near_miss(
    d: &LabeledDataset,
    version: NearMissVersion,
    k: usize,
    target_ratio: f64,
) -> Result<Resampled> {
    d.require_both_classes()?;
    let (n_maj, n_min) = d.class_counts();
    if k == 0 || k > n_min {
        return Err(Error::TooFewCandidates { k, available: n_min });
    }
    let target = undersample_target(target_ratio, n_min)?;
    if target > n_maj {
        return Err(Error::InvalidParameter(format!(
            "ratio {target_ratio} needs {target} majority rows, only {n_maj} present"
        )));
    }
    let majority = d.indices_of(Class::Majority);
    let minority = d.indices_of(Class::Minority);
    let mut warnings = Vec::new();
    let chosen = match version {
        NearMissVersion::V1 | NearMissVersion::V2 => {
            let s = near_miss_scores(d, &majority, &minority, k, version == NearMissVersion::V2);
            lowest(&majority, &s, target, false)
        }
        NearMissVersion::V3 => {
            let pool = near_miss_pool(d, k)?;
            if pool.len() <= target {
                if pool.len() < target {
                    warnings.push(format!(
                        "candidate pool holds {} rows, fewer than the target {target}",
                        pool.len()
                    ));
                }
                pool
            } else {
                let s = near_miss_scores(d, &pool, &minority, k, false);
                lowest(&pool, &s, target, true)
            }
        }
    };
    let mut kept = chosen;
    kept.extend(minority);
    Ok(Resampled {
        dataset: keep(d, kept),
        warnings,
    })
}

/// Tomek links as `(majority row, minority row)` pairs, sorted: cross-class
/// pairs that are each other's unique nearest neighbour.
pub fn tomek_link_pairs(d: &LabeledDataset) -> Result<Vec<(usize, usize)>> {
    let n = d.n_samples();
    if n < 2 {
        return Ok(Vec::new());
    }
    let index = NeighborIndex::build(d.features().to_vec(), d.n_features())?;
    let k = 2.min(n - 1);
    let unique_nn: Vec<Option<usize>> = (0..n)
        .map(|i| {
            let nn = index.knn_of(i, k)?;
            Ok(match nn.as_slice() {
                [a] => Some(a.index),
                [a, b] if b.distance > a.distance => Some(a.index),
                _ => None,
            })
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for i in 0..n {
        if d.label(i).is_minority() {
            continue;
        }
        if let Some(j) = unique_nn[i] {
            if d.label(j).is_minority() && unique_nn[j] == Some(i) {
                pairs.push((i, j));
            }
        }
    }
    Ok(pairs)
}

pub fn tomek_links(d: &LabeledDataset) -> Result<Resampled> {
    d.require_both_classes()?;
    let removed: BTreeSet<usize> = tomek_link_pairs(d)?.into_iter().map(|(m, _)| m).collect();
    let kept: Vec<usize> = (0..d.n_samples()).filter(|i| !removed.contains(i)).collect();
    Ok(d.select(&kept).into())
}

pub fn one_sided_selection(d: &LabeledDataset, n_seeds: usize, seed: u64) -> Result<Resampled> {
    let condensed = condensed_nn(d, n_seeds, seed)?.dataset;
    tomek_links(&condensed)
}

/// Neighbourhood cleaning: ENN removals plus majority neighbours of
/// minority rows misclassified by their 3 nearest neighbours.
pub fn ncl(d: &LabeledDataset, k: usize, criterion: EnnCriterion, cleaning_threshold: f64) -> Result<Resampled> {
    d.require_both_classes()?;
    if k == 0 {
        return Err(Error::InvalidParameter("k_neighbors must be at least 1".into()));
    }
    let all: Vec<usize> = (0..d.n_samples()).collect();
    let mut removed: BTreeSet<usize> = BTreeSet::new();
    let survivors: BTreeSet<usize> = enn_round(d, &all, k, criterion)?.into_iter().collect();
    removed.extend(all.iter().copied().filter(|i| !survivors.contains(i)));

    let (n_maj, n_min) = d.class_counts();
    if n_maj as f64 >= cleaning_threshold * n_min as f64 {
        let index = NeighborIndex::build(d.features().to_vec(), d.n_features())?;
        let k3 = 3.min(d.n_samples() - 1);
        for i in d.indices_of(Class::Minority) {
            let nn = index.knn_of(i, k3)?;
            let maj: Vec<usize> = nn
                .iter()
                .map(|n| n.index)
                .filter(|&j| !d.label(j).is_minority())
                .collect();
            if 2 * maj.len() > nn.len() {
                removed.extend(maj);
            }
        }
    }
    let kept: Vec<usize> = all.into_iter().filter(|i| !removed.contains(i)).collect();
    Ok(d.select(&kept).into())
}

/// Replaces the majority class by `ceil(N_min / ratio)` k-means centroids.
/// Output holds the centroids first, then the minority rows.
pub fn cluster_centroids(d: &LabeledDataset, target_ratio: f64, seed: u64, n_restarts: usize) -> Result<Resampled> {
    d.require_both_classes()?;
    let (n_maj, n_min) = d.class_counts();
    let k = undersample_target(target_ratio, n_min)?;
    if k > n_maj {
        return Err(Error::TooFewCandidates { k, available: n_maj });
    }
    let majority = d.indices_of(Class::Majority);
    let model = kmeans_fit(&d.gather(&majority), d.n_features(), k, seed, 100, n_restarts)?;
    let minority = d.indices_of(Class::Minority);
    let mut features = model.centroids.clone();
    features.extend(d.gather(&minority));
    let mut labels = vec![Class::Majority; k];
    labels.extend(std::iter::repeat_n(Class::Minority, minority.len()));
    let mut out = LabeledDataset::new(features, d.n_features(), labels)?;
    if let Some(names) = d.feature_names() {
        out = out.with_feature_names(names.to_vec());
    }
    Ok(out.into())
}
