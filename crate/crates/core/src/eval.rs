//! Confusion matrices, micro/macro precision-recall-F1 and accuracy.
//!
//! Zero denominators evaluate to 0. Macro F1 is the harmonic mean of macro
//! precision and macro recall, not the mean of per-class F1 scores.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelDomain;
use crate::error::{Error, Result};

/// Rows are actual labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(domain: &LabelDomain) -> Self {
        let n = domain.len();
        ConfusionMatrix {
            labels: domain.labels().to_vec(),
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::invalid(
                "confusion matrix must be square over its labels",
            ));
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual][predicted]
    }

    pub fn record(&mut self, actual: usize, predicted: usize) {
        self.counts[actual][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn tp(&self, l: usize) -> u64 {
        self.counts[l][l]
    }

    pub fn fp(&self, l: usize) -> u64 {
        (0..self.labels.len())
            .filter(|&a| a != l)
            .map(|a| self.counts[a][l])
            .sum()
    }

    pub fn fn_(&self, l: usize) -> u64 {
        (0..self.labels.len())
            .filter(|&p| p != l)
            .map(|p| self.counts[l][p])
            .sum()
    }

    pub fn support(&self, l: usize) -> u64 {
        self.counts[l].iter().sum()
    }

    /// Cell-wise sum of two matrices over the same labels.
    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::invalid(
                "cannot merge confusion matrices over different labels",
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

pub fn confusion(y: &[usize], y_hat: &[usize], domain: &LabelDomain) -> Result<ConfusionMatrix> {
    if y.len() != y_hat.len() {
        return Err(Error::Dimension {
            expected: y.len(),
            actual: y_hat.len(),
        });
    }
    let mut cm = ConfusionMatrix::zeros(domain);
    for (&a, &p) in y.iter().zip(y_hat) {
        if a >= domain.len() || p >= domain.len() {
            return Err(Error::invalid(format!(
                "label index {} outside {domain}",
                a.max(p)
            )));
        }
        cm.record(a, p);
    }
    Ok(cm)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn f1(p: f64, r: f64) -> f64 {
    ratio(2.0 * p * r, p + r)
}

/// Precision, recall and F1 over TP/FP/FN pooled across labels.
pub fn micro_metrics(cm: &ConfusionMatrix) -> (f64, f64, f64) {
    let n = cm.labels.len();
    let tp: u64 = (0..n).map(|l| cm.tp(l)).sum();
    let fp: u64 = (0..n).map(|l| cm.fp(l)).sum();
    let fn_: u64 = (0..n).map(|l| cm.fn_(l)).sum();
    let p = ratio(tp as f64, (tp + fp) as f64);
    let r = ratio(tp as f64, (tp + fn_) as f64);
    (p, r, f1(p, r))
}

fn per_class(cm: &ConfusionMatrix, l: usize) -> (f64, f64) {
    let tp = cm.tp(l) as f64;
    (
        ratio(tp, tp + cm.fp(l) as f64),
        ratio(tp, tp + cm.fn_(l) as f64),
    )
}

/// Unweighted means of per-class precision and recall; F1 from that pair.
pub fn macro_metrics(cm: &ConfusionMatrix) -> (f64, f64, f64) {
    let n = cm.labels.len();
    if n == 0 {
        return (0.0, 0.0, 0.0);
    }
    let (sp, sr) = (0..n)
        .map(|l| per_class(cm, l))
        .fold((0.0, 0.0), |(a, b), (p, r)| (a + p, b + r));
    let (p, r) = (sp / n as f64, sr / n as f64);
    (p, r, f1(p, r))
}

pub fn accuracy(cm: &ConfusionMatrix) -> f64 {
    let trace: u64 = (0..cm.labels.len()).map(|l| cm.tp(l)).sum();
    ratio(trace as f64, cm.total() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub p_micro: f64,
    pub r_micro: f64,
    pub f1_micro: f64,
    pub p_macro: f64,
    pub r_macro: f64,
    pub f1_macro: f64,
    pub per_class: Vec<ClassMetrics>,
}

impl MetricsReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> Self {
        let (p_micro, r_micro, f1_micro) = micro_metrics(cm);
        let (p_macro, r_macro, f1_macro) = macro_metrics(cm);
        let per_class = cm
            .labels
            .iter()
            .enumerate()
            .map(|(l, label)| {
                let (p, r) = per_class(cm, l);
                ClassMetrics {
                    label: label.clone(),
                    precision: p,
                    recall: r,
                    f1: f1(p, r),
                    support: cm.support(l),
                }
            })
            .collect();
        MetricsReport {
            accuracy: accuracy(cm),
            p_micro,
            r_micro,
            f1_micro,
            p_macro,
            r_macro,
            f1_macro,
            per_class,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("metrics report: {e}")))
    }

    /// Table of percentages with two decimals.
    pub fn to_text(&self) -> String {
        let pct = |v: f64| format!("{:.2}", 100.0 * v);
        let mut out = String::new();
        let _ = writeln!(out, "{:<10} {:>8} {:>8} {:>8}", "", "P", "R", "F1");
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>8} {:>8}",
            "micro",
            pct(self.p_micro),
            pct(self.r_micro),
            pct(self.f1_micro)
        );
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>8} {:>8}",
            "macro",
            pct(self.p_macro),
            pct(self.r_macro),
            pct(self.f1_macro)
        );
        let _ = writeln!(out, "accuracy {}", pct(self.accuracy));
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>8} {:>8} {:>8}",
            "class", "P", "R", "F1", "support"
        );
        for c in &self.per_class {
            let _ = writeln!(
                out,
                "{:<10} {:>8} {:>8} {:>8} {:>8}",
                c.label,
                pct(c.precision),
                pct(c.recall),
                pct(c.f1),
                c.support
            );
        }
        out
    }
}

/// Human-readable table and JSON record for a report.
pub fn render_report(r: &MetricsReport) -> (String, String) {
    (r.to_text(), r.to_json())
}
