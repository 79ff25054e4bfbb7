use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::{Class, LabeledDataset};
use crate::error::Result;
use crate::rng;

/// Functional-margin slack used to flag SVM support points.
pub const SUPPORT_MARGIN_EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    Hinge,
    Logistic,
}

/// `score(x) = w·x + b`, with the logistic variant exposing the sigmoid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub loss: Loss,
    pub regularization: f64,
}

impl LinearScorer {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.intercept
    }

    /// Sigmoid of the decision value for logistic models, the raw decision
    /// value for hinge models.
    pub fn score(&self, x: &[f64]) -> f64 {
        match self.loss {
            Loss::Logistic => sigmoid(self.decision(x)),
            Loss::Hinge => self.decision(x),
        }
    }

    pub fn score_all(&self, d: &LabeledDataset) -> Vec<f64> {
        d.rows().map(|r| self.score(r)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SvmFit {
    pub model: LinearScorer,
    /// `y(w·x+b) <= 1 + SUPPORT_MARGIN_EPS` per training row.
    pub support: Vec<bool>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn sign(c: Class) -> f64 {
    if c.is_minority() {
        1.0
    } else {
        -1.0
    }
}

/// Linear soft-margin SVM on `λ/2‖w‖² + mean hinge`, `λ = 1/(C·n)`, trained by
/// shuffled stochastic subgradient steps with a `1/(λ(t + t0))` schedule and
/// Polyak averaging over the second half of training.
pub fn svm_fit(d: &LabeledDataset, reg_c: f64, epochs: usize, seed: u64) -> Result<SvmFit> {
    d.require_both_classes()?;
    let n = d.n_samples();
    let dim = d.n_features();
    let lambda = 1.0 / (reg_c * n as f64);
    // t0 = n makes the first epoch's step roughly C.
    let t0 = n as f64;
    let epochs = epochs.max(2);
    let mut rng = rng::seeded(seed);
    let mut order: Vec<usize> = (0..n).collect();

    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut avg_w = vec![0.0; dim];
    let mut avg_b = 0.0;
    let mut averaged = 0usize;
    let mut t = 0.0;
    for epoch in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1.0;
            let eta = 1.0 / (lambda * (t + t0));
            let x = d.row(i);
            let y = sign(d.label(i));
            let margin = y * (dot(&w, x) + b);
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += eta * y * xj;
                }
                b += eta * y;
            }
            if epoch >= epochs / 2 {
                averaged += 1;
                let a = 1.0 / averaged as f64;
                for (aw, wj) in avg_w.iter_mut().zip(&w) {
                    *aw += (wj - *aw) * a;
                }
                avg_b += (b - avg_b) * a;
            }
        }
    }
    let model = LinearScorer {
        weights: avg_w,
        intercept: avg_b,
        loss: Loss::Hinge,
        regularization: reg_c,
    };
    let support = (0..n)
        .map(|i| sign(d.label(i)) * model.decision(d.row(i)) <= 1.0 + SUPPORT_MARGIN_EPS)
        .collect();
    Ok(SvmFit { model, support })
}

/// Gradient of `mean logloss + λ/2‖w‖²` (intercept unpenalised), returned as
/// `(grad_w, grad_b, loss)`.
pub fn logistic_gradient(d: &LabeledDataset, w: &[f64], b: f64, lambda: f64) -> (Vec<f64>, f64, f64) {
    let n = d.n_samples() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    let mut loss = 0.0;
    for (x, &c) in d.rows().zip(d.labels()) {
        let z = dot(w, x) + b;
        let y = if c.is_minority() { 1.0 } else { 0.0 };
        let r = sigmoid(z) - y;
        for (g, xj) in gw.iter_mut().zip(x) {
            *g += r * xj;
        }
        gb += r;
        // log(1 + e^z) - y z, computed stably.
        loss += z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z;
    }
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + lambda * wj;
    }
    loss = loss / n + 0.5 * lambda * dot(w, w);
    (gw, gb / n, loss)
}

/// L2-regularized logistic regression by full-batch accelerated gradient
/// descent with adaptive restart; stops after `epochs` steps or once the
/// gradient norm drops below 1e-8. The seed only draws a tiny random starting
/// point; the objective is strictly convex so the optimum does not depend on it.
pub fn logistic_fit(d: &LabeledDataset, reg_lambda: f64, epochs: usize, seed: u64) -> Result<LinearScorer> {
    d.require_both_classes()?;
    let dim = d.n_features();
    let max_sq_norm = d.rows().map(|r| dot(r, r)).fold(0.0, f64::max);
    // Lipschitz constant of the gradient.
    let lipschitz = 0.25 * (max_sq_norm + 1.0) + reg_lambda;
    let step = 1.0 / lipschitz;

    let mut rng = rng::seeded(seed);
    let mut w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1e-3..1e-3)).collect();
    let mut b = 0.0;
    let (mut yw, mut yb) = (w.clone(), b);
    let mut momentum = 1.0f64;
    let mut prev_loss = f64::INFINITY;

    for _ in 0..epochs {
        let (gw, gb, _) = logistic_gradient(d, &yw, yb, reg_lambda);
        let gnorm = (dot(&gw, &gw) + gb * gb).sqrt();
        if gnorm < 1e-8 {
            w = yw;
            b = yb;
            break;
        }
        let new_w: Vec<f64> = yw.iter().zip(&gw).map(|(v, g)| v - step * g).collect();
        let new_b = yb - step * gb;
        let (_, _, loss) = logistic_gradient(d, &new_w, new_b, reg_lambda);
        if loss > prev_loss {
            // Restart momentum when the objective goes up.
            momentum = 1.0;
            yw.clone_from(&w);
            yb = b;
            prev_loss = f64::INFINITY;
            continue;
        }
        prev_loss = loss;
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        yw = new_w
            .iter()
            .zip(&w)
            .map(|(nw, ow)| nw + beta * (nw - ow))
            .collect();
        yb = new_b + beta * (new_b - b);
        w = new_w;
        b = new_b;
        momentum = next_momentum;
    }
    Ok(LinearScorer {
        weights: w,
        intercept: b,
        loss: Loss::Logistic,
        regularization: reg_lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(majority: &[Vec<f64>], minority: &[Vec<f64>]) -> LabeledDataset {
        LabeledDataset::from_classes(majority, minority).unwrap()
    }

    #[test]
    fn svm_separates_two_points() {
        let d = ds(&[vec![-1.0]], &[vec![1.0]]);
        let fit = svm_fit(&d, 1.0, 200, 1).unwrap();
        assert!(fit.model.weights[0] > 0.0);
        assert!(fit.model.decision(&[-1.0]) < 0.0);
        assert!(fit.model.decision(&[1.0]) > 0.0);
    }

    #[test]
    fn svm_symmetric_data_has_small_bias() {
        let maj: Vec<Vec<f64>> = (1..=10).map(|i| vec![-(i as f64) * 0.3]).collect();
        let min: Vec<Vec<f64>> = (1..=10).map(|i| vec![i as f64 * 0.3]).collect();
        let fit = svm_fit(&ds(&maj, &min), 1.0, 100, 5).unwrap();
        assert!(fit.model.intercept.abs() <= 0.1, "b = {}", fit.model.intercept);
    }

    #[test]
    fn svm_flags_coincident_points() {
        // The coincident pair has margins -b and b at any w: one is <= 0, and
        // with the mirrored layout |b| stays small so both are <= 1.
        let d = ds(&[vec![0.0], vec![-2.0], vec![-3.0]], &[vec![0.0], vec![2.0], vec![3.0]]);
        let fit = svm_fit(&d, 1.0, 100, 2).unwrap();
        assert!(fit.support[0], "majority copy flagged");
        assert!(fit.support[3], "minority copy flagged");
    }

    #[test]
    fn svm_flags_misclassified_points() {
        let maj: Vec<Vec<f64>> = (0..20).map(|i| vec![-1.0 - 0.1 * i as f64, 0.5]).collect();
        let mut min: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0 + 0.1 * i as f64, -0.5]).collect();
        min.push(vec![-1.5, 0.5]);
        let d = ds(&maj, &min);
        let fit = svm_fit(&d, 1.0, 50, 9).unwrap();
        for i in 0..d.n_samples() {
            if sign(d.label(i)) * fit.model.decision(d.row(i)) < 0.0 {
                assert!(fit.support[i]);
            }
        }
        assert!(fit.support[d.n_samples() - 1]);
    }

    #[test]
    fn logistic_intercept_only_recovers_prior() {
        // Zero features: the minimiser satisfies sigmoid(b) = prevalence.
        let labels = vec![Class::Minority, Class::Majority, Class::Majority, Class::Majority];
        let d = LabeledDataset::new(vec![], 0, labels).unwrap();
        let m = logistic_fit(&d, 1e-9, 2000, 0).unwrap();
        assert!((m.score(&[]) - 0.25).abs() < 1e-6, "{}", m.score(&[]));
    }

    #[test]
    fn logistic_separable_training_accuracy() {
        let maj: Vec<Vec<f64>> = (1..=8).map(|i| vec![-(i as f64) / 4.0]).collect();
        let min: Vec<Vec<f64>> = (1..=4).map(|i| vec![i as f64 / 4.0]).collect();
        let d = ds(&maj, &min);
        let m = logistic_fit(&d, 1e-3, 500, 0).unwrap();
        for (x, c) in d.rows().zip(d.labels()) {
            assert_eq!(m.score(x) >= 0.5, c.is_minority());
        }
    }

    #[test]
    fn logistic_symmetric_bias() {
        let maj: Vec<Vec<f64>> = (1..=6).map(|i| vec![-(i as f64) / 3.0, 0.2 * i as f64]).collect();
        let min: Vec<Vec<f64>> = (1..=6).map(|i| vec![i as f64 / 3.0, 0.2 * i as f64]).collect();
        let m = logistic_fit(&ds(&maj, &min), 1e-1, 500, 4).unwrap();
        assert!(m.intercept.abs() <= 0.1);
    }

    #[test]
    fn logistic_gradient_vanishes_at_solution() {
        let maj = vec![vec![0.0, 1.0], vec![1.0, 0.5], vec![-0.3, 0.2], vec![0.7, -1.0]];
        let min = vec![vec![0.9, 1.1], vec![0.2, -0.4], vec![1.5, 0.3]];
        let d = ds(&maj, &min);
        for lambda in [1e-3, 1e-1] {
            let m = logistic_fit(&d, lambda, 5000, 1).unwrap();
            let (gw, gb, _) = logistic_gradient(&d, &m.weights, m.intercept, lambda);
            let norm = (gw.iter().map(|g| g * g).sum::<f64>() + gb * gb).sqrt();
            assert!(norm <= 1e-3, "lambda {lambda}: |g| = {norm}");
        }
    }

    #[test]
    fn logistic_gradient_matches_finite_differences() {
        let d = ds(&[vec![0.3, -1.2], vec![1.0, 0.1]], &[vec![-0.5, 0.8]]);
        let (w, b, lambda) = (vec![0.4, -0.7], 0.2, 0.05);
        let (gw, gb, _) = logistic_gradient(&d, &w, b, lambda);
        let h = 1e-6;
        let f = |w: &[f64], b: f64| logistic_gradient(&d, w, b, lambda).2;
        for j in 0..2 {
            let mut wp = w.clone();
            wp[j] += h;
            let mut wm = w.clone();
            wm[j] -= h;
            let fd = (f(&wp, b) - f(&wm, b)) / (2.0 * h);
            assert!((fd - gw[j]).abs() < 1e-4);
        }
        let fd = (f(&w, b + h) - f(&w, b - h)) / (2.0 * h);
        assert!((fd - gb).abs() < 1e-4);
    }
}
