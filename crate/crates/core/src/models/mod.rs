//! Classifiers: softmax logistic regression and multinomial naive Bayes,
//! behind a small pluggable interface, plus cross-validation.
//!
//! Model file format (text, one record per line):
//!
//! ```text
//! MODEL v1 <kind> <classes> <cols>
//! label <name>                 one per class, in class order
//! logreg:      config <train config>, bias <k values>, w <class> <cols values>
//! naive_bayes: alpha <a>, prior <k values>, loglik <class> <cols values>
//! ```
//!
//! Floats use the shortest representation that parses back exactly.

pub mod cv;
pub mod logreg;
pub mod naive_bayes;

use std::path::Path;

pub use cv::{cross_validate, stratified_kfold, CvReport, FoldPlan};
pub use logreg::{
    gradient_check, gradient_check_with_step, predict_logreg, train_logreg, train_logreg_traced,
    LogRegModel, Prediction, TrainConfig,
};
pub use naive_bayes::{predict_nb, train_nb, NaiveBayesModel, DEFAULT_ALPHA};

use crate::corpus::LabelDomain;
use crate::error::{Error, Result};
use crate::features::MatrixView;
use crate::preprocess::CleanCorpus;
use crate::sparse::SparseMatrix;
use crate::util;

pub trait Classifier: Send + Sync {
    fn name(&self) -> &'static str;

    /// Which feature matrix the classifier trains on.
    fn view(&self) -> MatrixView;

    fn fit(&self, x: &SparseMatrix, y: &[usize], domain: &LabelDomain) -> Result<Model>;
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LogisticRegression {
    pub config: TrainConfig,
}

impl Classifier for LogisticRegression {
    fn name(&self) -> &'static str {
        "logreg"
    }

    fn view(&self) -> MatrixView {
        MatrixView::Weighted
    }

    fn fit(&self, x: &SparseMatrix, y: &[usize], domain: &LabelDomain) -> Result<Model> {
        train_logreg(x, y, domain, &self.config).map(Model::LogReg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveBayes {
    pub alpha: f64,
}

impl Default for NaiveBayes {
    fn default() -> Self {
        NaiveBayes {
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl Classifier for NaiveBayes {
    fn name(&self) -> &'static str {
        "naive_bayes"
    }

    fn view(&self) -> MatrixView {
        MatrixView::Counts
    }

    fn fit(&self, x: &SparseMatrix, y: &[usize], domain: &LabelDomain) -> Result<Model> {
        train_nb(x, y, domain, self.alpha).map(Model::NaiveBayes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    LogReg(LogRegModel),
    NaiveBayes(NaiveBayesModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::LogReg(_) => "logreg",
            Model::NaiveBayes(_) => "naive_bayes",
        }
    }

    pub fn view(&self) -> MatrixView {
        match self {
            Model::LogReg(_) => MatrixView::Weighted,
            Model::NaiveBayes(_) => MatrixView::Counts,
        }
    }

    pub fn classes(&self) -> &[String] {
        match self {
            Model::LogReg(m) => m.classes(),
            Model::NaiveBayes(m) => m.classes(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Model::LogReg(m) => m.cols(),
            Model::NaiveBayes(m) => m.cols(),
        }
    }

    pub fn predict(&self, x: &SparseMatrix) -> Result<Vec<usize>> {
        match self {
            Model::LogReg(m) => predict_logreg(m, x).map(|p| p.labels),
            Model::NaiveBayes(m) => predict_nb(m, x),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "MODEL v1 {} {} {}\n",
            self.kind(),
            self.classes().len(),
            self.cols()
        );
        for label in self.classes() {
            out.push_str(&format!("label {label}\n"));
        }
        match self {
            Model::LogReg(m) => {
                out.push_str(&format!("config {}\n", m.config.to_kv()));
                out.push_str(&format!("bias {}\n", join_floats(&m.bias)));
                for c in 0..m.classes.len() {
                    out.push_str(&format!("w {c} {}\n", join_floats(m.weights(c))));
                }
            }
            Model::NaiveBayes(m) => {
                out.push_str(&format!("alpha {:?}\n", m.alpha));
                out.push_str(&format!("prior {}\n", join_floats(&m.log_prior)));
                for (c, ll) in m.log_likelihood.iter().enumerate() {
                    out.push_str(&format!("loglik {c} {}\n", join_floats(ll)));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Model> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let (kind, k, cols) = match header.split(' ').collect::<Vec<_>>().as_slice() {
            ["MODEL", "v1", kind, k, cols] => (
                kind.to_string(),
                k.parse::<usize>().map_err(|_| bad(header))?,
                cols.parse::<usize>().map_err(|_| bad(header))?,
            ),
            _ => return Err(bad(header)),
        };
        let mut classes = Vec::with_capacity(k);
        let mut rest: Vec<(&str, &str)> = Vec::new();
        for line in lines {
            let (tag, body) = line.split_once(' ').unwrap_or((line, ""));
            if tag == "label" {
                classes.push(body.to_owned());
            } else {
                rest.push((tag, body));
            }
        }
        if classes.len() != k {
            return Err(Error::Format(format!(
                "model announces {k} classes, lists {}",
                classes.len()
            )));
        }
        let field = |name: &str| -> Result<&str> {
            rest.iter()
                .find(|(t, _)| *t == name)
                .map(|(_, b)| *b)
                .ok_or_else(|| Error::Format(format!("model file lacks {name:?}")))
        };
        let class_rows = |name: &str| -> Result<Vec<Vec<f64>>> {
            let mut rows = vec![None; k];
            for (_, body) in rest.iter().filter(|(t, _)| *t == name) {
                let (c, values) = body.split_once(' ').unwrap_or((body, ""));
                let c: usize = c.parse().map_err(|_| bad(body))?;
                let values = parse_floats(values, cols)?;
                *rows.get_mut(c).ok_or_else(|| bad(body))? = Some(values);
            }
            rows.into_iter()
                .map(|r| r.ok_or_else(|| Error::Format(format!("model file lacks a {name:?} row"))))
                .collect()
        };
        match kind.as_str() {
            "logreg" => {
                let config = TrainConfig::from_kv(field("config")?)?;
                let bias = parse_floats(field("bias")?, k)?;
                let weights = class_rows("w")?.concat();
                Ok(Model::LogReg(LogRegModel {
                    classes,
                    cols,
                    weights,
                    bias,
                    config,
                }))
            }
            "naive_bayes" => {
                let alpha = field("alpha")?.parse().map_err(|_| bad("alpha"))?;
                let log_prior = parse_floats(field("prior")?, k)?;
                let log_likelihood = class_rows("loglik")?;
                Ok(Model::NaiveBayes(NaiveBayesModel {
                    classes,
                    alpha,
                    log_prior,
                    log_likelihood,
                }))
            }
            other => Err(Error::Format(format!("unknown model kind {other:?}"))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        util::write_atomic(path, self.to_text().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Model> {
        Model::from_text(&util::read_to_string(path)?)
    }
}

fn bad(context: &str) -> Error {
    Error::Format(format!("bad model record {context:?}"))
}

fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_floats(s: &str, expected: usize) -> Result<Vec<f64>> {
    let v = s
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| bad(t)))
        .collect::<Result<Vec<_>>>()?;
    if v.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} values, found {}",
            v.len()
        )));
    }
    Ok(v)
}

/// Class indices of a labeled corpus.
pub fn encode_labels(corpus: &CleanCorpus, domain: &LabelDomain) -> Result<Vec<usize>> {
    corpus
        .tweets()
        .iter()
        .map(|t| match &t.label {
            Some(l) => domain.encode(l),
            None => Err(Error::invalid(format!("tweet {:?} has no label", t.id))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (SparseMatrix, Vec<usize>, LabelDomain) {
        let x = SparseMatrix::from_dense(
            &[
                vec![1.0, 0.0, 2.0],
                vec![0.0, 1.0, 0.0],
                vec![3.0, 0.0, 0.0],
                vec![0.0, 2.0, 1.0],
            ],
            3,
        );
        (x, vec![0, 1, 0, 1], LabelDomain::binary())
    }

    #[test]
    fn model_files_round_trip() {
        let (x, y, d) = toy();
        let dir = tempfile::tempdir().unwrap();
        for clf in [
            &LogisticRegression::default() as &dyn Classifier,
            &NaiveBayes::default(),
        ] {
            let m = clf.fit(&x, &y, &d).unwrap();
            let path = dir.path().join(clf.name());
            m.save(&path).unwrap();
            let back = Model::load(&path).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.predict(&x).unwrap(), m.predict(&x).unwrap());
            assert!(m
                .to_text()
                .starts_with(&format!("MODEL v1 {} 2 3\n", clf.name())));
        }
    }

    #[test]
    fn truncated_model_file_is_rejected() {
        let (x, y, d) = toy();
        let text = NaiveBayes::default().fit(&x, &y, &d).unwrap().to_text();
        let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(Model::from_text(&cut).is_err());
        assert!(Model::from_text("MODEL v2 logreg 2 3").is_err());
    }
}
