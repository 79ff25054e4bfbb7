//! Oversampling: random duplication and the SMOTE family.
//!
//! Every method keeps the input rows untouched and in order, then appends
//! `ceil(target_ratio × N_maj) − N_min` new minority rows.

use rand::seq::IndexedRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::{Class, LabeledDataset};
use crate::error::{Error, Result};
use crate::learners::{kmeans_fit, svm_fit};
use crate::neighbors::{distance, NeighborIndex};
use crate::resample::{oversample_target, Resampled};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BorderlineKind {
    /// Interpolate towards minority neighbours only.
    Borderline1,
    /// Also towards majority neighbours, at most half way.
    Borderline2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OversampleParams {
    /// Desired `N_min / N_maj` after resampling, in `(0, 1]`.
    pub target_ratio: f64,
    pub k_neighbors: usize,
    /// Neighbourhood size used to find borderline samples.
    pub m_neighbors: usize,
    pub kind: BorderlineKind,
    pub svm_c: f64,
    pub svm_epochs: usize,
    pub n_clusters: usize,
    pub sparsity_exponent: f64,
    pub kmeans_restarts: usize,
}

impl Default for OversampleParams {
    fn default() -> Self {
        Self {
            target_ratio: 1.0,
            k_neighbors: 5,
            m_neighbors: 10,
            kind: BorderlineKind::Borderline1,
            svm_c: 1.0,
            svm_epochs: 20,
            n_clusters: 8,
            sparsity_exponent: 1.0,
            kmeans_restarts: 3,
        }
    }
}

/// `base + u·(neighbor − base)`.
pub fn smote_interpolate(base: &[f64], neighbor: &[f64], u: f64) -> Vec<f64> {
    base.iter()
        .zip(neighbor)
        .map(|(b, n)| b + u * (n - b))
        .collect()
}

fn finish(d: &LabeledDataset, synthetic: &[Vec<f64>]) -> Resampled {
    d.append_rows(synthetic, Class::Minority).into()
}

/// Number of synthetic rows to generate.
fn synthetic_count(d: &LabeledDataset, target_ratio: f64) -> Result<usize> {
    d.require_both_classes()?;
    let (n_maj, n_min) = d.class_counts();
    Ok(oversample_target(target_ratio, n_maj, n_min)? - n_min)
}

pub fn random_oversample(d: &LabeledDataset, target_ratio: f64, seed: u64) -> Result<Resampled> {
    let g = synthetic_count(d, target_ratio)?;
    let minority = d.indices_of(Class::Minority);
    let mut rng = rng::seeded(seed);
    let dup: Vec<Vec<f64>> = (0..g)
        .map(|_| d.row(*minority.choose(&mut rng).expect("minority present")).to_vec())
        .collect();
    Ok(finish(d, &dup))
}

/// Minority rows with their k nearest minority neighbours.
struct MinorityNeighbors {
    rows: Vec<usize>,
    /// `neighbors[i]` holds positions into `rows`.
    neighbors: Vec<Vec<usize>>,
}

impl MinorityNeighbors {
    fn build(d: &LabeledDataset, rows: Vec<usize>, k: usize) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Resample(format!(
                "too few minority samples for interpolation ({})",
                rows.len()
            )));
        }
        if k == 0 || k > rows.len() - 1 {
            return Err(Error::TooFewCandidates {
                k,
                available: rows.len() - 1,
            });
        }
        let index = NeighborIndex::over_rows(d, &rows)?;
        let neighbors = (0..rows.len())
            .map(|i| Ok(index.knn_of(i, k)?.into_iter().map(|n| n.index).collect()))
            .collect::<Result<_>>()?;
        Ok(Self { rows, neighbors })
    }

    /// One synthetic from minority position `i` towards a random neighbour.
    fn synthesize(&self, d: &LabeledDataset, i: usize, rng: &mut rng::Rng) -> Vec<f64> {
        let nb = *self.neighbors[i].choose(rng).expect("k >= 1");
        let u: f64 = rng.random();
        smote_interpolate(d.row(self.rows[i]), d.row(self.rows[nb]), u)
    }
}

pub fn smote(d: &LabeledDataset, p: &OversampleParams, seed: u64) -> Result<Resampled> {
    let g = synthetic_count(d, p.target_ratio)?;
    let mn = MinorityNeighbors::build(d, d.indices_of(Class::Minority), p.k_neighbors)?;
    let mut rng = rng::seeded(seed);
    let synthetic: Vec<Vec<f64>> = (0..g)
        .map(|_| {
            let base = rng.random_range(0..mn.rows.len());
            mn.synthesize(d, base, &mut rng)
        })
        .collect();
    Ok(finish(d, &synthetic))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BorderlineCategory {
    Safe,
    Danger,
    Noise,
}

/// Categorises each minority row by the majority share of its `m` nearest
/// neighbours over the whole set. Returns `(row, category)` pairs.
pub fn classify_borderline(d: &LabeledDataset, m: usize) -> Result<Vec<(usize, BorderlineCategory)>> {
    let index = NeighborIndex::build(d.features().to_vec(), d.n_features())?;
    d.indices_of(Class::Minority)
        .into_iter()
        .map(|i| {
            let majority = index
                .knn_of(i, m)?
                .iter()
                .filter(|n| !d.label(n.index).is_minority())
                .count();
            let cat = if majority == m {
                BorderlineCategory::Noise
            } else if 2 * majority >= m {
                BorderlineCategory::Danger
            } else {
                BorderlineCategory::Safe
            };
            Ok((i, cat))
        })
        .collect()
}

pub fn borderline_smote(d: &LabeledDataset, p: &OversampleParams, seed: u64) -> Result<Resampled> {
    let g = synthetic_count(d, p.target_ratio)?;
    let minority = d.indices_of(Class::Minority);
    let danger: Vec<usize> = classify_borderline(d, p.m_neighbors)?
        .into_iter()
        .filter(|(_, c)| *c == BorderlineCategory::Danger)
        .map(|(i, _)| i)
        .collect();
    if danger.is_empty() {
        return Err(Error::Resample("no borderline minority samples".into()));
    }
    let mut rng = rng::seeded(seed);
    let synthetic = match p.kind {
        BorderlineKind::Borderline1 => {
            let mn = MinorityNeighbors::build(d, minority.clone(), p.k_neighbors)?;
            let pos: Vec<usize> = danger
                .iter()
                .map(|r| minority.binary_search(r).expect("danger rows are minority"))
                .collect();
            (0..g)
                .map(|_| {
                    let base = *pos.choose(&mut rng).expect("non-empty");
                    mn.synthesize(d, base, &mut rng)
                })
                .collect::<Vec<_>>()
        }
        BorderlineKind::Borderline2 => {
            let index = NeighborIndex::build(d.features().to_vec(), d.n_features())?;
            let neighbors: Vec<Vec<usize>> = danger
                .iter()
                .map(|&i| Ok(index.knn_of(i, p.k_neighbors)?.into_iter().map(|n| n.index).collect()))
                .collect::<Result<_>>()?;
            (0..g)
                .map(|_| {
                    let b = rng.random_range(0..danger.len());
                    let nb = *neighbors[b].choose(&mut rng).expect("k >= 1");
                    let u: f64 = if d.label(nb).is_minority() {
                        rng.random()
                    } else {
                        rng.random::<f64>() * 0.5
                    };
                    smote_interpolate(d.row(danger[b]), d.row(nb), u)
                })
                .collect()
        }
    };
    Ok(finish(d, &synthetic))
}

/// Minority rows flagged as support points by a linear SVM.
pub fn svm_support_minority(d: &LabeledDataset, p: &OversampleParams, seed: u64) -> Result<Vec<usize>> {
    let fit = svm_fit(d, p.svm_c, p.svm_epochs, seed)?;
    Ok((0..d.n_samples())
        .filter(|&i| d.label(i).is_minority() && fit.support[i])
        .collect())
}

pub fn svm_smote(d: &LabeledDataset, p: &OversampleParams, seed: u64) -> Result<Resampled> {
    let g = synthetic_count(d, p.target_ratio)?;
    let minority = d.indices_of(Class::Minority);
    let mn = MinorityNeighbors::build(d, minority.clone(), p.k_neighbors)?;
    let bases = svm_support_minority(d, p, rng::derive(seed, "svm"))?;
    if bases.is_empty() {
        return Err(Error::Resample("no minority support vectors".into()));
    }
    let pos: Vec<usize> = bases
        .iter()
        .map(|r| minority.binary_search(r).expect("support rows are minority"))
        .collect();
    let mut rng = rng::seeded(seed);
    let synthetic: Vec<Vec<f64>> = (0..g)
        .map(|_| {
            let base = *pos.choose(&mut rng).expect("non-empty");
            mn.synthesize(d, base, &mut rng)
        })
        .collect();
    Ok(finish(d, &synthetic))
}

/// Splits `total` proportionally to `weights` by the largest-remainder
/// method; equal remainders go to the larger weight, then the lower index.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.total_cmp(&ra)
            .then(weights[b].total_cmp(&weights[a]))
            .then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

/// Mean pairwise distance among the given rows; 0 for fewer than two.
pub fn mean_pairwise_distance(d: &LabeledDataset, rows: &[usize]) -> f64 {
    let m = rows.len();
    if m < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for a in 0..m {
        for b in a + 1..m {
            total += distance(d.row(rows[a]), d.row(rows[b]));
        }
    }
    total / (m * (m - 1) / 2) as f64
}

/// Per-cluster synthetic counts from sparsities. Falls back to equal weights
/// when every sparsity is zero.
pub fn kmeans_smote_allocation(sparsity: &[f64], total: usize, exponent: f64) -> Vec<usize> {
    let mut w: Vec<f64> = sparsity.iter().map(|s| s.powf(exponent)).collect();
    if !w.iter().any(|v| *v > 0.0 && v.is_finite()) {
        w = vec![1.0; sparsity.len()];
    }
    largest_remainder(&w, total)
}

pub fn kmeans_smote(d: &LabeledDataset, p: &OversampleParams, seed: u64) -> Result<Resampled> {
    let g = synthetic_count(d, p.target_ratio)?;
    if p.n_clusters == 0 {
        return Err(Error::InvalidParameter("n_clusters must be at least 1".into()));
    }
    let model = kmeans_fit(
        d.features(),
        d.n_features(),
        p.n_clusters,
        rng::derive(seed, "kmeans"),
        100,
        p.kmeans_restarts,
    )?;
    let kept: Vec<Vec<usize>> = model
        .members()
        .into_iter()
        .filter_map(|members| {
            let minority: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&i| d.label(i).is_minority())
                .collect();
            (2 * minority.len() > members.len()).then_some(minority)
        })
        .collect();
    if kept.is_empty() {
        return Err(Error::Resample("no minority-dominated cluster".into()));
    }
    let sparsity: Vec<f64> = kept.iter().map(|rows| mean_pairwise_distance(d, rows)).collect();
    let alloc = kmeans_smote_allocation(&sparsity, g, p.sparsity_exponent);

    let mut rng = rng::seeded(seed);
    let mut synthetic = Vec::with_capacity(g);
    for (rows, &count) in kept.iter().zip(&alloc) {
        if count == 0 {
            continue;
        }
        let k = p.k_neighbors.min(rows.len() - 1);
        if k == 0 {
            synthetic.extend(std::iter::repeat_n(d.row(rows[0]).to_vec(), count));
            continue;
        }
        let mn = MinorityNeighbors::build(d, rows.clone(), k)?;
        for _ in 0..count {
            let base = rng.random_range(0..rows.len());
            synthetic.push(mn.synthesize(d, base, &mut rng));
        }
    }
    Ok(finish(d, &synthetic))
}

/// ADASYN difficulty `r_i`: majority share among each minority row's `k`
/// nearest neighbours over the whole set. Returned in minority-row order.
pub fn adasyn_difficulty(d: &LabeledDataset, k: usize) -> Result<Vec<f64>> {
    let index = NeighborIndex::build(d.features().to_vec(), d.n_features())?;
    d.indices_of(Class::Minority)
        .into_iter()
        .map(|i| {
            let nn = index.knn_of(i, k)?;
            let maj = nn.iter().filter(|n| !d.label(n.index).is_minority()).count();
            Ok(maj as f64 / k as f64)
        })
        .collect()
}

pub fn adasyn(d: &LabeledDataset, p: &OversampleParams, seed: u64) -> Result<Resampled> {
    let g = synthetic_count(d, p.target_ratio)?;
    let minority = d.indices_of(Class::Minority);
    let mn = MinorityNeighbors::build(d, minority, p.k_neighbors)?;
    let r = adasyn_difficulty(d, p.k_neighbors)?;
    if r.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Resample(
            "no adaptive distribution: no minority sample has a majority neighbour".into(),
        ));
    }
    let per_base = largest_remainder(&r, g);
    let mut rng = rng::seeded(seed);
    let mut synthetic = Vec::with_capacity(g);
    for (i, &count) in per_base.iter().enumerate() {
        for _ in 0..count {
            synthetic.push(mn.synthesize(d, i, &mut rng));
        }
    }
    Ok(finish(d, &synthetic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(majority: &[Vec<f64>], minority: &[Vec<f64>]) -> LabeledDataset {
        LabeledDataset::from_classes(majority, minority).unwrap()
    }

    fn params(ratio: f64, k: usize) -> OversampleParams {
        OversampleParams {
            target_ratio: ratio,
            k_neighbors: k,
            ..Default::default()
        }
    }

    fn line(n: usize, offset: f64) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![offset + i as f64]).collect()
    }

    fn appended(out: &Resampled, d: &LabeledDataset) -> Vec<Vec<f64>> {
        (d.n_samples()..out.dataset.n_samples())
            .map(|i| out.dataset.row(i).to_vec())
            .collect()
    }

    /// Distance from `x` to the segment `[a, b]`.
    fn segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
        let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
        let len2: f64 = ab.iter().map(|v| v * v).sum();
        let t = if len2 == 0.0 {
            0.0
        } else {
            (x.iter().zip(a).zip(&ab).map(|((xi, ai), v)| (xi - ai) * v).sum::<f64>() / len2).clamp(0.0, 1.0)
        };
        let proj: Vec<f64> = a.iter().zip(&ab).map(|(ai, v)| ai + t * v).collect();
        distance(x, &proj)
    }

    #[test]
    fn interpolation_examples() {
        assert_eq!(smote_interpolate(&[0.0, 0.0], &[1.0, 1.0], 0.5), vec![0.5, 0.5]);
        assert_eq!(smote_interpolate(&[2.0, 3.0], &[2.0, 3.0], 0.37), vec![2.0, 3.0]);
        assert_eq!(smote_interpolate(&[1.0, 4.0], &[3.0, -2.0], 0.0), vec![1.0, 4.0]);
        assert_eq!(smote_interpolate(&[1.0, 4.0], &[3.0, -2.0], 1.0), vec![3.0, -2.0]);
    }

    #[test]
    fn random_oversample_counts_and_membership() {
        let d = ds(&line(10, 0.0), &line(2, 100.0));
        let out = random_oversample(&d, 1.0, 3).unwrap();
        assert_eq!(out.dataset.class_counts(), (10, 10));
        let out = random_oversample(&d, 0.5, 3).unwrap();
        assert_eq!(out.dataset.class_counts(), (10, 5));
        for r in appended(&out, &d) {
            assert!(r == vec![100.0] || r == vec![101.0]);
        }
        assert!(random_oversample(&d, 0.1, 3).is_err());
    }

    #[test]
    fn smote_two_points_stays_on_segment() {
        let d = ds(
            &[vec![-10.0, 0.0], vec![-9.0, 0.0], vec![-8.0, 0.0]],
            &[vec![0.0, 0.0], vec![1.0, 1.0]],
        );
        let out = smote(&d, &params(1.0, 1), 8).unwrap();
        let syn = appended(&out, &d);
        assert_eq!(syn.len(), 1);
        let s = &syn[0];
        assert!((s[0] - s[1]).abs() < 1e-12 && (0.0..=1.0).contains(&s[0]));
    }

    #[test]
    fn smote_identical_minority() {
        let d = ds(&line(6, 5.0), &[vec![1.0], vec![1.0], vec![1.0]]);
        let out = smote(&d, &params(1.0, 2), 1).unwrap();
        assert!(appended(&out, &d).iter().all(|r| r == &vec![1.0]));
    }

    #[test]
    fn smote_errors() {
        let d = ds(&line(6, 5.0), &[vec![1.0]]);
        assert!(matches!(smote(&d, &params(1.0, 1), 0), Err(Error::Resample(_))));
        let d = ds(&line(6, 5.0), &line(3, 0.0));
        assert!(smote(&d, &params(1.0, 3), 0).is_err());
    }

    #[test]
    fn borderline_categories() {
        // Minority 0.05 sits inside the majority block. Minority 50..53 form
        // a group next to a lone majority row at 49.
        let maj = vec![vec![0.0], vec![0.1], vec![-0.1], vec![0.2], vec![-0.2], vec![49.0]];
        let min = vec![vec![0.05], vec![50.0], vec![51.0], vec![52.0], vec![53.0]];
        let d = ds(&maj, &min);
        let cats = classify_borderline(&d, 3).unwrap();
        assert_eq!(cats[0].1, BorderlineCategory::Noise);
        // 51 sees 50, 52 and then 49 (ties with 53, lower row wins): 1 of 3.
        assert_eq!(cats[2].1, BorderlineCategory::Safe);
        assert_eq!(cats[4].1, BorderlineCategory::Safe);
        // 50 sees 49 and 51 at m = 2: half majority.
        let cats2 = classify_borderline(&d, 2).unwrap();
        assert_eq!(cats2[1].1, BorderlineCategory::Danger);
        assert_eq!(cats2[0].1, BorderlineCategory::Noise);
    }

    #[test]
    fn borderline_without_danger_errors() {
        let d = ds(&line(5, 0.0), &line(5, 100.0));
        let p = OversampleParams { m_neighbors: 3, k_neighbors: 2, ..params(1.0, 2) };
        let err = borderline_smote(&d, &p, 0).unwrap_err();
        assert!(err.to_string().contains("no borderline minority samples"));
    }

    #[test]
    fn borderline2_majority_steps_stop_half_way() {
        let maj: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.1, 1.0]).collect();
        let min: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64 * 0.3, 0.9]).collect();
        let d = ds(&maj, &min);
        let p = OversampleParams {
            m_neighbors: 4,
            k_neighbors: 3,
            kind: BorderlineKind::Borderline2,
            ..params(1.0, 3)
        };
        let out = borderline_smote(&d, &p, 4).unwrap();
        assert_eq!(out.dataset.class_counts(), (10, 10));
        for s in appended(&out, &d) {
            // y lies between a minority base (0.9) and at most half way to a
            // majority neighbour (1.0), or between two minority rows.
            assert!(s[1] >= 0.9 - 1e-12 && s[1] <= 0.95 + 1e-12, "{s:?}");
        }
    }

    #[test]
    fn svm_smote_uses_the_overlapping_point() {
        // Majority spread on x in [-6, -4], minority on [4, 6], plus one
        // minority row inside the majority block.
        let maj: Vec<Vec<f64>> = (0..21).map(|i| vec![-6.0 + 0.1 * i as f64]).collect();
        let mut min: Vec<Vec<f64>> = (0..16).map(|i| vec![4.0 + 0.1 * i as f64]).collect();
        min.push(vec![-5.0]);
        let d = ds(&maj, &min);
        let p = OversampleParams { svm_c: 1.0, svm_epochs: 50, ..params(1.0, 3) };
        let bases = svm_support_minority(&d, &p, rng::derive(7, "svm")).unwrap();
        assert_eq!(bases, vec![d.n_samples() - 1]);
        let out = svm_smote(&d, &p, 7).unwrap();
        assert_eq!(out.dataset.class_counts(), (21, 21));
    }

    #[test]
    fn kmeans_smote_targets_minority_cluster() {
        let maj: Vec<Vec<f64>> = (0..12).map(|i| vec![0.0 + 0.01 * i as f64, 0.0]).collect();
        let min: Vec<Vec<f64>> = (0..6).map(|i| vec![20.0 + 0.1 * i as f64, 20.0]).collect();
        let d = ds(&maj, &min);
        let p = OversampleParams { n_clusters: 2, ..params(1.0, 2) };
        let out = kmeans_smote(&d, &p, 5).unwrap();
        assert_eq!(out.dataset.class_counts(), (12, 12));
        assert!(appended(&out, &d).iter().all(|r| r[0] >= 20.0 && r[0] <= 20.5 + 1e-12));
    }

    #[test]
    fn kmeans_smote_allocation_follows_sparsity() {
        assert_eq!(kmeans_smote_allocation(&[2.0, 1.0], 9, 1.0), vec![6, 3]);
        // 10 * 2/3 = 6.67 and 3.33: the sparser cluster takes the remainder.
        assert_eq!(kmeans_smote_allocation(&[2.0, 1.0], 10, 1.0), vec![7, 3]);
        assert_eq!(kmeans_smote_allocation(&[1.0, 1.0], 3, 1.0), vec![2, 1]);
        assert_eq!(kmeans_smote_allocation(&[1.0, 3.0], 3, 1.0).iter().sum::<usize>(), 3);
        assert_eq!(kmeans_smote_allocation(&[0.0, 0.0], 4, 1.0), vec![2, 2]);
    }

    #[test]
    fn kmeans_smote_without_minority_cluster_errors() {
        let d = ds(&line(20, 0.0), &[vec![3.0], vec![11.0]]);
        let p = OversampleParams { n_clusters: 2, ..params(1.0, 1) };
        let err = kmeans_smote(&d, &p, 0).unwrap_err();
        assert!(err.to_string().contains("no minority-dominated cluster"));
    }

    #[test]
    fn adasyn_allocation() {
        // Minority at 0 has majority neighbour 0.4; minority at 10 only sees
        // the other minority row with k = 1.
        let maj = vec![vec![0.4], vec![-30.0], vec![-31.0], vec![-32.0]];
        let min = vec![vec![0.0], vec![10.0], vec![10.5]];
        let d = ds(&maj, &min);
        assert_eq!(adasyn_difficulty(&d, 1).unwrap(), vec![1.0, 0.0, 0.0]);
        let out = adasyn(&d, &params(1.0, 1), 2).unwrap();
        // Every synthetic starts at 0 and heads to its nearest minority row, 10.
        assert_eq!(out.dataset.class_counts(), (4, 4));
        for s in appended(&out, &d) {
            assert!((0.0..=10.0).contains(&s[0]));
        }
    }

    #[test]
    fn adasyn_isolated_minority_errors() {
        let d = ds(&line(5, 0.0), &line(4, 100.0));
        let err = adasyn(&d, &params(1.0, 2), 0).unwrap_err();
        assert!(err.to_string().contains("no adaptive distribution"));
    }

    #[test]
    fn largest_remainder_sums() {
        let w = [0.2, 0.5, 0.3];
        let a = largest_remainder(&w, 7);
        assert_eq!(a.iter().sum::<usize>(), 7);
        let sum: f64 = w.iter().sum();
        let normalized: f64 = w.iter().map(|x| x / sum).sum();
        assert!((normalized - 1.0).abs() < 1e-12);
    }

    fn random_dataset(seed: u64, n_maj: usize, n_min: usize) -> LabeledDataset {
        let mut rng = rng::seeded(seed);
        let maj: Vec<Vec<f64>> = (0..n_maj).map(|_| vec![rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)]).collect();
        let min: Vec<Vec<f64>> = (0..n_min).map(|_| vec![rng.random_range(0.0..3.0), rng.random_range(0.0..3.0)]).collect();
        ds(&maj, &min)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn smote_family_contracts(seed: u64, n_min in 6usize..18, ratio in 0.6f64..1.0) {
            let d = random_dataset(seed, 30, n_min);
            let p = OversampleParams { m_neighbors: 5, k_neighbors: 3, n_clusters: 4, ..params(ratio, 3) };
            let min_rows: Vec<Vec<f64>> = d.indices_of(Class::Minority).iter().map(|&i| d.row(i).to_vec()).collect();
            let lo = [0.0, 0.0];
            let hi = [3.0, 3.0];
            let runs: Vec<Result<Resampled>> = vec![
                smote(&d, &p, seed),
                borderline_smote(&d, &p, seed),
                svm_smote(&d, &p, seed),
                kmeans_smote(&d, &p, seed),
                adasyn(&d, &p, seed),
            ];
            for out in runs.into_iter().flatten() {
                let (n_maj, n_min_out) = out.dataset.class_counts();
                prop_assert_eq!(n_maj, 30);
                prop_assert_eq!(n_min_out, (ratio * 30.0 - 1e-9).ceil() as usize);
                for i in 0..d.n_samples() {
                    prop_assert_eq!(out.dataset.row(i), d.row(i));
                }
                for s in appended(&out, &d) {
                    for j in 0..2 {
                        prop_assert!(s[j] >= lo[j] - 1e-12 && s[j] <= hi[j] + 1e-12);
                    }
                    let best = min_rows.iter().flat_map(|a| min_rows.iter().map(move |b| (a, b)))
                        .map(|(a, b)| segment_distance(&s, a, b))
                        .fold(f64::INFINITY, f64::min);
                    prop_assert!(best <= 1e-9);
                }
            }
            let again = smote(&d, &p, seed).unwrap();
            prop_assert_eq!(again.dataset, smote(&d, &p, seed).unwrap().dataset);
        }
    }
}
