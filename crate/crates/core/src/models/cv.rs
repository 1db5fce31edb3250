//! Stratified k-fold partitioning and cross-validated evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::LabelDomain;
use crate::error::{Error, Result};
use crate::eval::{ConfusionMatrix, MetricsReport};
use crate::features::{FeatureConfig, Featurizer};
use crate::models::{encode_labels, Classifier};
use crate::preprocess::CleanCorpus;
use crate::rules::RuleMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    assignments: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Fold id of every row.
    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    /// `k seed` on the first line, then the fold of each row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.k, self.seed);
        for a in &self.assignments {
            out.push_str(&a.to_string());
            out.push('\n');
        }
        out
    }
}

/// Shuffles each class with a seeded generator, then deals its members to
/// the folds round-robin. The dealing position carries over from one class
/// to the next so that fold sizes stay balanced overall.
pub fn stratified_kfold(
    y: &[usize],
    domain: &LabelDomain,
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid(format!("fold count {k} must be at least 2")));
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); domain.len()];
    for (i, &c) in y.iter().enumerate() {
        members
            .get_mut(c)
            .ok_or_else(|| Error::invalid(format!("label index {c} outside {domain}")))?
            .push(i);
    }
    for (c, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < k {
            return Err(Error::invalid(format!(
                "class {:?} has {} members, fewer than {k} folds",
                domain.label(c),
                m.len()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = vec![0; y.len()];
    let mut next = 0;
    for m in &mut members {
        m.shuffle(&mut rng);
        for &i in m.iter() {
            assignments[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    /// Metrics over all held-out predictions pooled together.
    pub pooled: MetricsReport,
    pub confusion: ConfusionMatrix,
    pub folds: Vec<MetricsReport>,
    /// Held-out prediction for every corpus row.
    pub predictions: Vec<usize>,
    pub plan: FoldPlan,
}

/// k-fold evaluation in which every fold fits its own vocabulary and model
/// on the training split only.
pub fn cross_validate(
    classifier: &dyn Classifier,
    corpus: &CleanCorpus,
    rules: Option<&RuleMatrix>,
    domain: &LabelDomain,
    config: FeatureConfig,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    let y = encode_labels(corpus, domain)?;
    let plan = stratified_kfold(&y, domain, k, seed)?;
    let aligned = match rules {
        Some(r) if r.ids() == corpus.ids().as_slice() => Some(r.clone()),
        Some(r) => Some(r.select_ids(&corpus.ids())?),
        None => None,
    };
    let mut predictions = vec![0; y.len()];
    let mut confusion = ConfusionMatrix::zeros(domain);
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let (train, test) = (plan.train_indices(fold), plan.test_indices(fold));
        let train_corpus = corpus.select(&train);
        let test_corpus = corpus.select(&test);
        let featurizer = Featurizer::fit(&train_corpus, config)?;
        let rules_for = |idx: &[usize]| aligned.as_ref().map(|r| r.select(idx));
        let x_train =
            featurizer.transform(&train_corpus, rules_for(&train).as_ref(), classifier.view())?;
        let x_test =
            featurizer.transform(&test_corpus, rules_for(&test).as_ref(), classifier.view())?;
        let y_train: Vec<usize> = train.iter().map(|&i| y[i]).collect();
        let model = classifier.fit(&x_train.matrix, &y_train, domain)?;
        let predicted = model.predict(&x_test.matrix)?;
        let mut fold_cm = ConfusionMatrix::zeros(domain);
        for (&i, &p) in test.iter().zip(&predicted) {
            predictions[i] = p;
            fold_cm.record(y[i], p);
        }
        confusion.merge(&fold_cm)?;
        folds.push(MetricsReport::from_confusion(&fold_cm));
    }
    Ok(CvReport {
        pooled: MetricsReport::from_confusion(&confusion),
        confusion,
        folds,
        predictions,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_stratification() {
        let d = LabelDomain::new("ab", ["A", "B"]).unwrap();
        let y: Vec<usize> = [vec![0; 10], vec![1; 5]].concat();
        let plan = stratified_kfold(&y, &d, 5, 3).unwrap();
        for f in 0..5 {
            let t = plan.test_indices(f);
            assert_eq!(t.iter().filter(|&&i| y[i] == 0).count(), 2);
            assert_eq!(t.iter().filter(|&&i| y[i] == 1).count(), 1);
        }
        assert_eq!(plan, stratified_kfold(&y, &d, 5, 3).unwrap());
        let other = stratified_kfold(&y, &d, 5, 4).unwrap();
        assert_ne!(plan.assignments(), other.assignments());
    }

    #[test]
    fn small_class_is_named() {
        let d = LabelDomain::new("ab", ["A", "B"]).unwrap();
        let y = [vec![0; 10], vec![1; 3]].concat();
        let err = stratified_kfold(&y, &d, 5, 0).unwrap_err().to_string();
        assert!(err.contains("\"B\""), "{err}");
        assert!(stratified_kfold(&y, &d, 1, 0).is_err());
    }
}
