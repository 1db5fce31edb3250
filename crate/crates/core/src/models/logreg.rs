//! Multinomial (softmax) logistic regression trained by full-batch gradient
//! descent.
//!
//! Loss is mean cross-entropy plus `(λ/2)‖W‖²`; the bias is not penalized.
//! Weights start at zero, so training is a pure function of the inputs.
//!
//! With `adaptive` set (the default) the step size starts at the configured
//! learning rate, grows by 5% after every step that lowers the loss, and is
//! halved, with the step discarded, whenever the loss would rise. Without it
//! every step uses the configured rate.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::LabelDomain;
use crate::error::{Error, Result};
use crate::sparse::{SparseMatrix, SparseRow};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub lambda: f64,
    pub max_epochs: usize,
    /// Training stops once the loss changes by less than this between epochs.
    pub tolerance: f64,
    pub seed: u64,
    pub adaptive: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            lambda: 1e-4,
            max_epochs: 500,
            tolerance: 1e-6,
            seed: 0,
            adaptive: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "L2 penalty {} must be nonnegative",
                self.lambda
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::invalid("max epochs must be at least 1"));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(Error::invalid(format!(
                "tolerance {} must be nonnegative",
                self.tolerance
            )));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        format!(
            "lr={:?} lambda={:?} epochs={} tol={:?} seed={} adaptive={}",
            self.learning_rate,
            self.lambda,
            self.max_epochs,
            self.tolerance,
            self.seed,
            self.adaptive
        )
    }

    pub fn from_kv(s: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for pair in s.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("train config entry {pair:?}")))?;
            let bad = || Error::Format(format!("train config value {pair:?}"));
            match k {
                "lr" => cfg.learning_rate = v.parse().map_err(|_| bad())?,
                "lambda" => cfg.lambda = v.parse().map_err(|_| bad())?,
                "epochs" => cfg.max_epochs = v.parse().map_err(|_| bad())?,
                "tol" => cfg.tolerance = v.parse().map_err(|_| bad())?,
                "seed" => cfg.seed = v.parse().map_err(|_| bad())?,
                "adaptive" => cfg.adaptive = v.parse().map_err(|_| bad())?,
                _ => return Err(Error::Format(format!("unknown train config key {k:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRegModel {
    pub(crate) classes: Vec<String>,
    pub(crate) cols: usize,
    /// Row-major `classes × cols`.
    pub(crate) weights: Vec<f64>,
    pub(crate) bias: Vec<f64>,
    pub(crate) config: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
}

impl LogRegModel {
    /// All-zero parameters.
    pub fn zeros(classes: Vec<String>, cols: usize, config: TrainConfig) -> Self {
        let k = classes.len();
        LogRegModel {
            classes,
            cols,
            weights: vec![0.0; k * cols],
            bias: vec![0.0; k],
            config,
        }
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn weights(&self, class: usize) -> &[f64] {
        &self.weights[class * self.cols..(class + 1) * self.cols]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn predict_proba(&self, row: SparseRow<'_>) -> Vec<f64> {
        softmax(&logits(&self.weights, &self.bias, self.cols, row))
    }
}

fn logits(w: &[f64], b: &[f64], cols: usize, row: SparseRow<'_>) -> Vec<f64> {
    b.iter()
        .enumerate()
        .map(|(c, bc)| bc + row.dot_dense(&w[c * cols..(c + 1) * cols]))
        .collect()
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Index of the largest value; the lowest index wins ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Loss and its gradient with respect to the weights and the bias.
pub(crate) fn loss_and_gradient(
    x: &SparseMatrix,
    y: &[usize],
    k: usize,
    w: &[f64],
    b: &[f64],
    lambda: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let cols = x.cols();
    let n = x.rows().max(1) as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = vec![0.0; k];
    let mut loss = 0.0;
    for r in 0..x.rows() {
        let row = x.row(r);
        let z = logits(w, b, cols, row);
        loss += log_sum_exp(&z) - z[y[r]];
        let mut p = softmax(&z);
        p[y[r]] -= 1.0;
        for (c, pc) in p.iter().enumerate() {
            gb[c] += pc / n;
            for (j, v) in row.iter() {
                gw[c * cols + j] += pc * v / n;
            }
        }
    }
    loss /= n;
    loss += 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    for (g, wv) in gw.iter_mut().zip(w) {
        *g += lambda * wv;
    }
    (loss, gw, gb)
}

fn check_inputs(x: &SparseMatrix, y: &[usize], k: usize) -> Result<()> {
    if y.len() != x.rows() {
        return Err(Error::Dimension {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= k) {
        return Err(Error::invalid(format!(
            "label index {bad} outside {k} classes"
        )));
    }
    Ok(())
}

pub fn train_logreg(
    x: &SparseMatrix,
    y: &[usize],
    domain: &LabelDomain,
    cfg: &TrainConfig,
) -> Result<LogRegModel> {
    train_logreg_traced(x, y, domain, cfg).map(|(m, _)| m)
}

/// Like [`train_logreg`], also returning the loss before the first step and
/// after every accepted step.
pub fn train_logreg_traced(
    x: &SparseMatrix,
    y: &[usize],
    domain: &LabelDomain,
    cfg: &TrainConfig,
) -> Result<(LogRegModel, Vec<f64>)> {
    cfg.validate()?;
    let k = domain.len();
    check_inputs(x, y, k)?;
    let mut seen = vec![false; k];
    for &c in y {
        seen[c] = true;
    }
    if seen.iter().filter(|s| **s).count() < 2 {
        return Err(Error::invalid(
            "training labels contain fewer than two classes",
        ));
    }
    let mut model = LogRegModel::zeros(domain.labels().to_vec(), x.cols(), *cfg);
    let (mut loss, mut gw, mut gb) =
        loss_and_gradient(x, y, k, &model.weights, &model.bias, cfg.lambda);
    let mut history = vec![loss];
    let mut step = cfg.learning_rate;
    for epoch in 1..=cfg.max_epochs {
        let weights: Vec<f64> = model
            .weights
            .iter()
            .zip(&gw)
            .map(|(w, g)| w - step * g)
            .collect();
        let bias: Vec<f64> = model
            .bias
            .iter()
            .zip(&gb)
            .map(|(b, g)| b - step * g)
            .collect();
        let (next, next_gw, next_gb) = loss_and_gradient(x, y, k, &weights, &bias, cfg.lambda);
        if !next.is_finite() || weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
        if cfg.adaptive && next > loss {
            step *= 0.5;
            continue;
        }
        let delta = (loss - next).abs();
        (model.weights, model.bias) = (weights, bias);
        (loss, gw, gb) = (next, next_gw, next_gb);
        history.push(loss);
        if cfg.adaptive {
            step *= 1.05;
        }
        if delta < cfg.tolerance {
            break;
        }
    }
    Ok((model, history))
}

pub fn predict_logreg(model: &LogRegModel, x: &SparseMatrix) -> Result<Prediction> {
    if x.cols() != model.cols {
        return Err(Error::Dimension {
            expected: model.cols,
            actual: x.cols(),
        });
    }
    let probabilities: Vec<Vec<f64>> = (0..x.rows())
        .map(|r| model.predict_proba(x.row(r)))
        .collect();
    let labels = probabilities.iter().map(|p| argmax(p)).collect();
    Ok(Prediction {
        labels,
        probabilities,
    })
}

/// Largest relative difference between the analytic gradient and central
/// finite differences (step 1e-5), at a seeded random weight point.
pub fn gradient_check(x: &SparseMatrix, y: &[usize], k: usize, cfg: &TrainConfig) -> Result<f64> {
    gradient_check_with_step(x, y, k, cfg, 1e-5)
}

pub fn gradient_check_with_step(
    x: &SparseMatrix,
    y: &[usize],
    k: usize,
    cfg: &TrainConfig,
    h: f64,
) -> Result<f64> {
    check_inputs(x, y, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w: Vec<f64> = (0..k * x.cols())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let b: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (_, gw, gb) = loss_and_gradient(x, y, k, &w, &b, cfg.lambda);
    let loss_at = |w: &[f64], b: &[f64]| loss_and_gradient(x, y, k, w, b, cfg.lambda).0;
    let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
    let mut worst = 0.0f64;
    for i in 0..w.len() {
        let (mut plus, mut minus) = (w.clone(), w.clone());
        plus[i] += h;
        minus[i] -= h;
        let numeric = (loss_at(&plus, &b) - loss_at(&minus, &b)) / (2.0 * h);
        worst = worst.max(rel(gw[i], numeric));
    }
    for i in 0..b.len() {
        let (mut plus, mut minus) = (b.clone(), b.clone());
        plus[i] += h;
        minus[i] -= h;
        let numeric = (loss_at(&w, &plus) - loss_at(&w, &minus)) / (2.0 * h);
        worst = worst.max(rel(gb[i], numeric));
    }
    Ok(worst)
}
