//! Threshold-sweep curves and the scalar metrics reported per run.
//!
//! Curves are built from every distinct score: tied scores enter together, so
//! the ROC area equals `P(s+ > s-) + ½·P(s+ = s-)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Class;
use crate::error::{Error, Result};

/// Threshold used by the single-operating-point metrics.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPredictions {
    scores: Vec<f64>,
    labels: Vec<Class>,
}

impl ScoredPredictions {
    pub fn new(scores: Vec<f64>, labels: Vec<Class>) -> Result<Self> {
        if scores.len() != labels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} scores for {} labels",
                scores.len(),
                labels.len()
            )));
        }
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidParameter("NaN score".into()));
        }
        Ok(Self { scores, labels })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> &[Class] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// `(positives, negatives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let p = self.labels.iter().filter(|c| c.is_minority()).count();
        (p, self.labels.len() - p)
    }

    fn require_both(&self, what: &str) -> Result<(usize, usize)> {
        match self.class_counts() {
            (0, _) => Err(Error::UndefinedMetric(format!("{what}: no positive examples"))),
            (_, 0) => Err(Error::UndefinedMetric(format!("{what}: no negative examples"))),
            c => Ok(c),
        }
    }

    /// Cumulative `(tp, fp)` after admitting each distinct score, highest first.
    fn sweep(&self) -> Vec<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.scores[b].total_cmp(&self.scores[a]));
        let mut out = Vec::new();
        let (mut tp, mut fp) = (0, 0);
        for (pos, &i) in order.iter().enumerate() {
            if self.labels[i].is_minority() {
                tp += 1;
            } else {
                fp += 1;
            }
            let last_of_group = order
                .get(pos + 1)
                .is_none_or(|&j| self.scores[j] != self.scores[i]);
            if last_of_group {
                out.push((tp, fp));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

/// Predicts positive iff `score >= threshold`.
pub fn confusion_at(sp: &ScoredPredictions, threshold: f64) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for (&s, l) in sp.scores.iter().zip(&sp.labels) {
        match (s >= threshold, l.is_minority()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Roc,
    Pr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoints {
    pub kind: CurveKind,
    /// `(fpr, tpr)` for ROC, `(recall, precision)` for PR.
    pub points: Vec<(f64, f64)>,
}

pub fn roc_curve(sp: &ScoredPredictions) -> Result<CurvePoints> {
    let (p, n) = sp.require_both("ROC curve")?;
    let mut points = vec![(0.0, 0.0)];
    points.extend(
        sp.sweep()
            .into_iter()
            .map(|(tp, fp)| (fp as f64 / n as f64, tp as f64 / p as f64)),
    );
    Ok(CurvePoints {
        kind: CurveKind::Roc,
        points,
    })
}

pub fn pr_curve(sp: &ScoredPredictions) -> Result<CurvePoints> {
    let (p, _) = sp.class_counts();
    if p == 0 {
        return Err(Error::UndefinedMetric("PR curve: no positive examples".into()));
    }
    let points = sp
        .sweep()
        .into_iter()
        .map(|(tp, fp)| (tp as f64 / p as f64, tp as f64 / (tp + fp) as f64))
        .collect();
    Ok(CurvePoints {
        kind: CurveKind::Pr,
        points,
    })
}

/// Trapezoidal ROC area over `FPR ∈ [0, cap]`, not normalised.
fn roc_area_up_to(points: &[(f64, f64)], cap: f64) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x1 <= cap {
            area += (x1 - x0) * (y0 + y1) * 0.5;
        } else {
            if x0 < cap {
                let y_cap = y0 + (y1 - y0) * (cap - x0) / (x1 - x0);
                area += (cap - x0) * (y0 + y_cap) * 0.5;
            }
            break;
        }
    }
    area
}

pub fn roc_auc(sp: &ScoredPredictions) -> Result<f64> {
    Ok(roc_area_up_to(&roc_curve(sp)?.points, 1.0))
}

/// ROC area restricted to `FPR ∈ [0, fpr_cap]` divided by `fpr_cap`, so a
/// perfect ranking scores 1.
pub fn partial_roc_auc(sp: &ScoredPredictions, fpr_cap: f64) -> Result<f64> {
    if !(fpr_cap > 0.0 && fpr_cap <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "FPR cap {fpr_cap} outside (0, 1]"
        )));
    }
    Ok(roc_area_up_to(&roc_curve(sp)?.points, fpr_cap) / fpr_cap)
}

/// Unnormalised partial area; exposed for monotonicity checks.
pub fn partial_roc_area(sp: &ScoredPredictions, fpr_cap: f64) -> Result<f64> {
    Ok(partial_roc_auc(sp, fpr_cap)? * fpr_cap)
}

/// Average precision: `Σ ΔRecall · Precision` over distinct thresholds.
pub fn pr_auc(sp: &ScoredPredictions) -> Result<f64> {
    let curve = pr_curve(sp)?;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for (recall, precision) in curve.points {
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Best F1 over all distinct-score thresholds.
pub fn f1_max(sp: &ScoredPredictions) -> Result<f64> {
    let (p, _) = sp.class_counts();
    if p == 0 {
        return Err(Error::UndefinedMetric("F1: no positive examples".into()));
    }
    Ok(sp
        .sweep()
        .into_iter()
        .map(|(tp, fp)| f1(tp, fp, p - tp))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarMetrics {
    pub balanced_accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub mcc: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl From<ConfusionCounts> for ScalarMetrics {
    fn from(c: ConfusionCounts) -> Self {
        let recall = ratio(c.tp, c.tp + c.fn_);
        let specificity = ratio(c.tn, c.tn + c.fp);
        let factors = [c.tp + c.fp, c.tp + c.fn_, c.tn + c.fp, c.tn + c.fn_];
        let mcc = if factors.contains(&0) {
            0.0
        } else {
            let num = c.tp as f64 * c.tn as f64 - c.fp as f64 * c.fn_ as f64;
            num / factors.iter().map(|&f| f as f64).product::<f64>().sqrt()
        };
        Self {
            balanced_accuracy: 0.5 * (recall + specificity),
            precision: ratio(c.tp, c.tp + c.fp),
            recall,
            mcc,
        }
    }
}

pub fn scalar_metrics(sp: &ScoredPredictions, threshold: f64) -> ScalarMetrics {
    confusion_at(sp, threshold).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PrAuc,
    RocAuc,
    PRocAuc,
    BalancedAccuracy,
    Precision,
    Recall,
    F1Max,
    Mcc,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::PrAuc,
        Metric::RocAuc,
        Metric::PRocAuc,
        Metric::BalancedAccuracy,
        Metric::Precision,
        Metric::Recall,
        Metric::F1Max,
        Metric::Mcc,
    ];

    /// The three threshold-free metrics the rankings focus on.
    pub const CURVE: [Metric; 3] = [Metric::PrAuc, Metric::RocAuc, Metric::PRocAuc];

    pub fn name(self) -> &'static str {
        match self {
            Metric::PrAuc => "pr_auc",
            Metric::RocAuc => "roc_auc",
            Metric::PRocAuc => "p_roc_auc",
            Metric::BalancedAccuracy => "balanced_accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1Max => "f1_max",
            Metric::Mcc => "mcc",
        }
    }

    /// Every metric here is a score: larger is better.
    pub fn higher_is_better(self) -> bool {
        true
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

/// All eight metrics of one scored test set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricScores {
    pub pr_auc: Option<f64>,
    pub roc_auc: Option<f64>,
    pub p_roc_auc: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1_max: Option<f64>,
    pub mcc: Option<f64>,
}

impl MetricScores {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::PrAuc => self.pr_auc,
            Metric::RocAuc => self.roc_auc,
            Metric::PRocAuc => self.p_roc_auc,
            Metric::BalancedAccuracy => self.balanced_accuracy,
            Metric::Precision => self.precision,
            Metric::Recall => self.recall,
            Metric::F1Max => self.f1_max,
            Metric::Mcc => self.mcc,
        }
    }

    pub fn set(&mut self, m: Metric, v: Option<f64>) {
        let slot = match m {
            Metric::PrAuc => &mut self.pr_auc,
            Metric::RocAuc => &mut self.roc_auc,
            Metric::PRocAuc => &mut self.p_roc_auc,
            Metric::BalancedAccuracy => &mut self.balanced_accuracy,
            Metric::Precision => &mut self.precision,
            Metric::Recall => &mut self.recall,
            Metric::F1Max => &mut self.f1_max,
            Metric::Mcc => &mut self.mcc,
        };
        *slot = v;
    }

    pub fn has_curve_metrics(&self) -> bool {
        Metric::CURVE.iter().all(|&m| self.get(m).is_some())
    }
}

/// Computes every metric. `fpr_cap` bounds the partial ROC area; threshold
/// metrics use [`DEFAULT_THRESHOLD`].
pub fn evaluate(sp: &ScoredPredictions, fpr_cap: f64) -> Result<MetricScores> {
    let s = scalar_metrics(sp, DEFAULT_THRESHOLD);
    Ok(MetricScores {
        pr_auc: Some(pr_auc(sp)?),
        roc_auc: Some(roc_auc(sp)?),
        p_roc_auc: Some(partial_roc_auc(sp, fpr_cap)?),
        balanced_accuracy: Some(s.balanced_accuracy),
        precision: Some(s.precision),
        recall: Some(s.recall),
        f1_max: Some(f1_max(sp)?),
        mcc: Some(s.mcc),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn sp(scores: &[f64], labels: &[u8]) -> ScoredPredictions {
        ScoredPredictions::new(
            scores.to_vec(),
            labels.iter().map(|&l| Class::from_bool(l == 1)).collect(),
        )
        .unwrap()
    }

    /// O(n²) pairwise probability oracle.
    fn pairwise_auc(s: &ScoredPredictions) -> f64 {
        let mut acc = 0.0;
        let mut pairs = 0.0;
        for (i, li) in s.labels().iter().enumerate() {
            if !li.is_minority() {
                continue;
            }
            for (j, lj) in s.labels().iter().enumerate() {
                if lj.is_minority() {
                    continue;
                }
                pairs += 1.0;
                let (a, b) = (s.scores()[i], s.scores()[j]);
                acc += if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 };
            }
        }
        acc / pairs
    }

    #[test]
    fn confusion_examples() {
        let s = sp(&[0.9, 0.4], &[1, 0]);
        let c = confusion_at(&s, -1.0);
        assert_eq!((c.fn_, c.tn), (0, 0));
        let c = confusion_at(&s, 2.0);
        assert_eq!((c.tp, c.fp), (0, 0));
        assert_eq!(
            confusion_at(&s, 0.5),
            ConfusionCounts { tp: 1, fp: 0, fn_: 0, tn: 1 }
        );
    }

    #[test]
    fn roc_examples() {
        assert_eq!(roc_auc(&sp(&[0.9, 0.8, 0.1], &[1, 1, 0])).unwrap(), 1.0);
        let s = sp(&[0.9, 0.8, 0.7, 0.6], &[0, 1, 0, 1]);
        assert_eq!(roc_auc(&s).unwrap(), 0.25);
        let flipped = sp(&[0.9, 0.8, 0.7, 0.6], &[1, 0, 1, 0]);
        assert_eq!(roc_auc(&flipped).unwrap(), 0.75);
        assert!(matches!(
            roc_auc(&sp(&[0.1, 0.2], &[1, 1])),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn roc_curve_endpoints() {
        let c = roc_curve(&sp(&[0.3, 0.3, 0.9, 0.1], &[1, 0, 0, 1])).unwrap();
        assert_eq!(c.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(c.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn pr_examples() {
        assert_eq!(pr_auc(&sp(&[0.9, 0.8, 0.1], &[1, 1, 0])).unwrap(), 1.0);
        let scores: Vec<f64> = (0..10).map(|i| 1.0 - i as f64 / 10.0).collect();
        let mut top = [0u8; 10];
        top[0] = 1;
        assert_eq!(pr_auc(&sp(&scores, &top)).unwrap(), 1.0);
        let mut bottom = [0u8; 10];
        bottom[9] = 1;
        assert!((pr_auc(&sp(&scores, &bottom)).unwrap() - 0.1).abs() < 1e-15);
        // One threshold: precision is the prevalence, recall jumps 0 -> 1.
        let flat = sp(&[0.5; 8], &[1, 0, 0, 1, 0, 0, 0, 0]);
        assert_eq!(pr_auc(&flat).unwrap(), 0.25);
        assert!(pr_auc(&sp(&[0.1, 0.2], &[0, 0])).is_err());
    }

    #[test]
    fn partial_examples() {
        let s = sp(&[0.9, 0.8, 0.7, 0.6, 0.5], &[0, 1, 0, 1, 1]);
        assert_eq!(partial_roc_auc(&s, 1.0).unwrap(), roc_auc(&s).unwrap());
        let perfect = sp(&[0.9, 0.8, 0.3, 0.2], &[1, 1, 0, 0]);
        for cap in [0.01, 0.3, 1.0] {
            assert_eq!(partial_roc_auc(&perfect, cap).unwrap(), 1.0);
        }
        assert!(partial_roc_auc(&s, 0.0).is_err());
        assert!(partial_roc_auc(&s, 1.5).is_err());
        assert!(partial_roc_auc(&sp(&[0.1], &[1]), 0.5).is_err());
    }

    #[test]
    fn partial_of_chance_scores_tends_to_half_cap() {
        // Score independent of label: the curve hugs TPR = FPR, whose area up
        // to alpha is alpha²/2, i.e. alpha/2 after normalisation.
        let mut rng = crate::rng::seeded(17);
        let n = 200_000;
        let scores: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
        let s = sp(&scores, &labels);
        for alpha in [0.1, 0.4] {
            let v = partial_roc_auc(&s, alpha).unwrap();
            assert!((v - alpha / 2.0).abs() < 0.01, "alpha {alpha}: {v}");
        }
    }

    #[test]
    fn scalar_examples() {
        let perfect = ScalarMetrics::from(ConfusionCounts { tp: 3, fp: 0, fn_: 0, tn: 5 });
        assert_eq!(
            perfect,
            ScalarMetrics { balanced_accuracy: 1.0, precision: 1.0, recall: 1.0, mcc: 1.0 }
        );
        let all_neg = ScalarMetrics::from(ConfusionCounts { tp: 0, fp: 0, fn_: 3, tn: 5 });
        assert_eq!(
            (all_neg.recall, all_neg.balanced_accuracy, all_neg.mcc, all_neg.precision),
            (0.0, 0.5, 0.0, 0.0)
        );
        let even = ScalarMetrics::from(ConfusionCounts { tp: 1, fp: 1, fn_: 1, tn: 1 });
        assert_eq!(
            even,
            ScalarMetrics { balanced_accuracy: 0.5, precision: 0.5, recall: 0.5, mcc: 0.0 }
        );
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1_max(&sp(&[0.9, 0.8, 0.1], &[1, 1, 0])).unwrap(), 1.0);
        // Single threshold: all predicted positive, F1 = 2p/(1+p).
        let flat = sp(&[0.3; 5], &[1, 0, 0, 0, 0]);
        let p: f64 = 0.2;
        assert!((f1_max(&flat).unwrap() - 2.0 * p / (1.0 + p)).abs() < 1e-15);
        let s = sp(&[0.9, 0.6, 0.55, 0.4, 0.2], &[0, 1, 0, 1, 0]);
        let c = confusion_at(&s, 0.5);
        assert!(f1_max(&s).unwrap() >= f1(c.tp, c.fp, c.fn_));
    }

    #[test]
    fn metric_names_roundtrip() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("accuracy".parse::<Metric>().is_err());
    }

    proptest! {
        #[test]
        fn roc_matches_pairwise_and_complement(seed: u64, n in 2usize..300, levels in 1u32..40) {
            let mut rng = crate::rng::seeded(seed);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 / levels as f64).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.3))).collect();
            labels[0] = 1;
            labels[1] = 0;
            let s = sp(&scores, &labels);
            let auc = roc_auc(&s).unwrap();
            prop_assert!((auc - pairwise_auc(&s)).abs() <= 1e-9);
            let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
            prop_assert!((auc + roc_auc(&sp(&scores, &flipped)).unwrap() - 1.0).abs() <= 1e-12);
            prop_assert!((partial_roc_auc(&s, 1.0).unwrap() - auc).abs() <= 1e-12);
            let a1 = partial_roc_area(&s, 0.2).unwrap();
            let a2 = partial_roc_area(&s, 0.6).unwrap();
            prop_assert!(a1 <= a2 + 1e-15);
        }

        #[test]
        fn curve_metrics_depend_on_ranks_only(seed: u64, n in 2usize..120) {
            let mut rng = crate::rng::seeded(seed);
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.4))).collect();
            labels[0] = 1;
            labels[1] = 0;
            let a = sp(&scores, &labels);
            let warped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + 7.0).collect();
            let b = sp(&warped, &labels);
            prop_assert_eq!(roc_auc(&a).unwrap(), roc_auc(&b).unwrap());
            prop_assert_eq!(pr_auc(&a).unwrap(), pr_auc(&b).unwrap());
            prop_assert_eq!(f1_max(&a).unwrap(), f1_max(&b).unwrap());
            prop_assert_eq!(partial_roc_auc(&a, 0.3).unwrap(), partial_roc_auc(&b, 0.3).unwrap());
        }
    }
}
