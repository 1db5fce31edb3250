//! Multinomial naive Bayes over raw term counts with additive smoothing.

use crate::corpus::LabelDomain;
use crate::error::{Error, Result};
use crate::models::logreg::argmax;
use crate::sparse::{SparseMatrix, SparseRow};

pub const DEFAULT_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub(crate) classes: Vec<String>,
    pub(crate) alpha: f64,
    pub(crate) log_prior: Vec<f64>,
    /// `classes × cols` log term likelihoods.
    pub(crate) log_likelihood: Vec<Vec<f64>>,
}

impl NaiveBayesModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cols(&self) -> usize {
        self.log_likelihood.first().map_or(0, Vec::len)
    }

    pub fn log_prior(&self) -> &[f64] {
        &self.log_prior
    }

    pub fn log_likelihood(&self, class: usize) -> &[f64] {
        &self.log_likelihood[class]
    }

    /// `log P(c) + Σ_t count(t) · log P(t | c)` per class.
    pub fn joint_log_likelihood(&self, row: SparseRow<'_>) -> Vec<f64> {
        self.log_prior
            .iter()
            .zip(&self.log_likelihood)
            .map(|(prior, ll)| {
                if *prior == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                prior + row.dot_dense(ll)
            })
            .collect()
    }

    /// Normalized class posteriors per row.
    pub fn posteriors(&self, x: &SparseMatrix) -> Result<Vec<Vec<f64>>> {
        self.check_cols(x)?;
        Ok((0..x.rows())
            .map(|r| {
                let j = self.joint_log_likelihood(x.row(r));
                let m = j.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = j.iter().map(|v| (v - m).exp()).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|v| v / s).collect()
            })
            .collect())
    }

    fn check_cols(&self, x: &SparseMatrix) -> Result<()> {
        if x.cols() != self.cols() {
            return Err(Error::Dimension {
                expected: self.cols(),
                actual: x.cols(),
            });
        }
        Ok(())
    }
}

/// Fits class priors and smoothed term likelihoods from a count matrix.
pub fn train_nb(
    x: &SparseMatrix,
    y: &[usize],
    domain: &LabelDomain,
    alpha: f64,
) -> Result<NaiveBayesModel> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "smoothing alpha {alpha} must be positive"
        )));
    }
    if y.len() != x.rows() {
        return Err(Error::Dimension {
            expected: x.rows(),
            actual: y.len(),
        });
    }
    if x.rows() == 0 {
        return Err(Error::invalid("cannot train naive Bayes on zero rows"));
    }
    if x.has_negative() {
        return Err(Error::invalid("naive Bayes needs nonnegative counts"));
    }
    let k = domain.len();
    if let Some(&bad) = y.iter().find(|&&c| c >= k) {
        return Err(Error::invalid(format!(
            "label index {bad} outside {domain}"
        )));
    }
    let cols = x.cols();
    let mut counts = vec![vec![0.0; cols]; k];
    let mut class_docs = vec![0usize; k];
    for (r, &c) in y.iter().enumerate() {
        class_docs[c] += 1;
        for (j, v) in x.row(r).iter() {
            counts[c][j] += v;
        }
    }
    let n = y.len() as f64;
    let log_prior = class_docs.iter().map(|&d| (d as f64 / n).ln()).collect();
    let log_likelihood = counts
        .iter()
        .map(|row| {
            let denom = row.iter().sum::<f64>() + alpha * cols as f64;
            row.iter().map(|c| ((c + alpha) / denom).ln()).collect()
        })
        .collect();
    Ok(NaiveBayesModel {
        classes: domain.labels().to_vec(),
        alpha,
        log_prior,
        log_likelihood,
    })
}

pub fn predict_nb(model: &NaiveBayesModel, x: &SparseMatrix) -> Result<Vec<usize>> {
    model.check_cols(x)?;
    Ok((0..x.rows())
        .map(|r| argmax(&model.joint_log_likelihood(x.row(r))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rn() -> LabelDomain {
        LabelDomain::new("rn", ["R", "N"]).unwrap()
    }

    // columns: need, food, shelter, sunny, day
    fn toy() -> (SparseMatrix, Vec<usize>) {
        let x = SparseMatrix::from_dense(
            &[
                vec![1.0, 1.0, 0.0, 0.0, 0.0],
                vec![1.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0, 1.0],
            ],
            5,
        );
        (x, vec![0, 0, 1])
    }

    #[test]
    fn priors_and_unseen_terms() {
        let (x, y) = toy();
        let m = train_nb(&x, &y, &rn(), 1.0).unwrap();
        assert!((m.log_prior()[0] - (2.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((m.log_prior()[1] - (1.0f64 / 3.0).ln()).abs() < 1e-15);
        // class N never saw "need": 1 / (2 + 5)
        assert!((m.log_likelihood(1)[0] - (1.0f64 / 7.0).ln()).abs() < 1e-15);
        for c in 0..2 {
            let total: f64 = m.log_likelihood(c).iter().map(|v| v.exp()).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn prediction() {
        let (x, y) = toy();
        let m = train_nb(&x, &y, &rn(), 1.0).unwrap();
        let q = SparseMatrix::from_dense(&[vec![1.0, 1.0, 0.0, 0.0, 0.0], vec![0.0; 5]], 5);
        assert_eq!(predict_nb(&m, &q).unwrap(), vec![0, 0]);
        assert_eq!(predict_nb(&m, &q).unwrap(), predict_nb(&m, &q).unwrap());
        assert!(predict_nb(&m, &SparseMatrix::zeros(1, 4)).is_err());
        let post = m.posteriors(&q).unwrap();
        assert!((post[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let (x, y) = toy();
        assert!(train_nb(&x, &y, &rn(), 0.0).is_err());
        let neg = SparseMatrix::from_dense(&[vec![-1.0]], 1);
        assert!(train_nb(&neg, &[0], &rn(), 1.0).is_err());
    }

    #[test]
    fn absent_class_is_never_predicted() {
        let (x, _) = toy();
        let three = LabelDomain::new("t", ["R", "N", "X"]).unwrap();
        let m = train_nb(&x, &[0, 0, 1], &three, 1.0).unwrap();
        assert_eq!(m.log_prior()[2], f64::NEG_INFINITY);
        let q = SparseMatrix::zeros(1, 5);
        assert_eq!(predict_nb(&m, &q).unwrap(), vec![0]);
        assert_eq!(m.posteriors(&q).unwrap()[0][2], 0.0);
    }
}
