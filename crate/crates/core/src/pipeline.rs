//! The two-stage series: identify rweets, keep them, categorize them.
//!
//! Each stage owns a featurizer and a model trained on its own dataset: the
//! identifier on binary-labeled tweets, the categorizer on gold rweets with
//! a request type. At inference the categorizer sees whatever the identifier
//! predicted to be a rweet.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, LabelDomain, RWEET};
use crate::error::{Error, Result};
use crate::eval::{confusion, MetricsReport};
use crate::features::{
    load_matrix, save_matrix, FeatureConfig, FeatureMatrix, Featurizer, MatrixPaths, MatrixView,
};
use crate::models::{encode_labels, Classifier, Model};
use crate::preprocess::{run_pipeline, CleanCorpus, PipelineConfig, PreprocessReport};
use crate::rules::{rule_features, RuleMatrix};
use crate::util;

/// A dataset after cleaning, with rule features for the surviving tweets.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub corpus: CleanCorpus,
    /// Row-aligned with `corpus`; computed on the original text.
    pub rules: RuleMatrix,
    pub report: PreprocessReport,
}

pub fn prepare(d: &Dataset, pcfg: &PipelineConfig) -> Result<Prepared> {
    let (corpus, report) = run_pipeline(d, pcfg);
    let rules = rule_features(d).select_ids(&corpus.ids())?;
    Ok(Prepared {
        corpus,
        rules,
        report,
    })
}

/// Drops the rows predicted not to be rweets. Returns the remaining matrix
/// and the removed row indices, ascending.
pub fn filter_rweets<S: AsRef<str>>(
    x: &FeatureMatrix,
    predicted: &[S],
) -> Result<(FeatureMatrix, Vec<usize>)> {
    if predicted.len() != x.rows() {
        return Err(Error::Dimension {
            expected: x.rows(),
            actual: predicted.len(),
        });
    }
    let (keep, removed): (Vec<usize>, Vec<usize>) =
        (0..x.rows()).partition(|&i| predicted[i].as_ref() == RWEET);
    Ok((x.select_rows(&keep), removed))
}

/// Feature matrices keyed by [`Featurizer::matrix_key`], held in memory and
/// optionally mirrored to a directory.
#[derive(Debug, Default)]
pub struct FeatureCache {
    dir: Option<PathBuf>,
    memory: HashMap<String, FeatureMatrix>,
    recompute: bool,
    hits: usize,
    misses: usize,
}

impl FeatureCache {
    pub fn in_memory() -> Self {
        FeatureCache {
            recompute: true,
            ..FeatureCache::default()
        }
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Self {
        FeatureCache {
            dir: Some(dir.into()),
            recompute: true,
            ..FeatureCache::default()
        }
    }

    /// With recomputation disabled a missing entry is a stale-cache error.
    pub fn with_recompute(mut self, recompute: bool) -> Self {
        self.recompute = recompute;
        self
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    /// Number of matrices actually computed.
    pub fn misses(&self) -> usize {
        self.misses
    }

    pub fn stem(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(key))
    }

    /// Features of `corpus` under `featurizer`, from cache when present.
    pub fn features(
        &mut self,
        featurizer: &Featurizer,
        corpus: &CleanCorpus,
        rules: Option<&RuleMatrix>,
        view: MatrixView,
    ) -> Result<FeatureMatrix> {
        let key = featurizer.matrix_key(corpus, rules, view);
        if let Some(m) = self.memory.get(&key) {
            self.hits += 1;
            return Ok(m.clone());
        }
        if let Some(stem) = self.stem(&key) {
            if MatrixPaths::new(&stem).exist() {
                let m = load_matrix(&stem, *featurizer.config(), &key)?;
                self.hits += 1;
                self.memory.insert(key, m.clone());
                return Ok(m);
            }
        }
        if !self.recompute {
            return Err(Error::StaleCache {
                expected: key,
                found: "no matching entry".into(),
            });
        }
        let m = featurizer.transform(corpus, rules, view)?;
        self.misses += 1;
        if let Some(stem) = self.stem(&key) {
            std::fs::create_dir_all(self.dir.as_ref().expect("stem implies dir"))
                .map_err(|e| Error::io(&stem, e))?;
            save_matrix(&stem, &m)?;
        }
        self.memory.insert(key, m.clone());
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub featurizer: Featurizer,
    pub model: Model,
}

impl Stage {
    fn fit(
        p: &Prepared,
        domain: &LabelDomain,
        config: FeatureConfig,
        classifier: &dyn Classifier,
    ) -> Result<Stage> {
        let y = encode_labels(&p.corpus, domain)?;
        let featurizer = Featurizer::fit(&p.corpus, config)?;
        let x = featurizer.transform(&p.corpus, Some(&p.rules), classifier.view())?;
        let model = classifier.fit(&x.matrix, &y, domain)?;
        Ok(Stage { featurizer, model })
    }

    fn label(&self, i: usize) -> &str {
        &self.model.classes()[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagedClassifier {
    pub config: FeatureConfig,
    pub identifier: Stage,
    pub categorizer: Stage,
}

const MANIFEST: &str = "manifest";

impl StagedClassifier {
    pub fn digest(&self) -> String {
        self.config.digest()
    }

    /// Writes `manifest`, `identifier.{featurizer,model}` and
    /// `categorizer.{featurizer,model}` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = format!(
            "STAGED v1 {}\nconfig {}\n",
            self.digest(),
            self.config.to_kv()
        );
        for (name, stage) in [
            ("identifier", &self.identifier),
            ("categorizer", &self.categorizer),
        ] {
            manifest.push_str(&format!("{name} {}\n", stage.featurizer.digest()));
            util::write_atomic(
                &dir.join(format!("{name}.featurizer")),
                stage.featurizer.to_text().as_bytes(),
            )?;
            stage.model.save(&dir.join(format!("{name}.model")))?;
        }
        util::write_atomic(&dir.join(MANIFEST), manifest.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<StagedClassifier> {
        let manifest = util::read_to_string(&dir.join(MANIFEST))?;
        let mut lines = manifest.lines();
        let header = lines.next().unwrap_or_default();
        let digest = header
            .strip_prefix("STAGED v1 ")
            .ok_or_else(|| Error::Format(format!("bad staged manifest header {header:?}")))?;
        let mut entries = HashMap::new();
        for line in lines {
            let (k, v) = line.split_once(' ').unwrap_or((line, ""));
            entries.insert(k, v);
        }
        let entry = |k: &str| {
            entries
                .get(k)
                .copied()
                .ok_or_else(|| Error::Format(format!("staged manifest lacks {k:?}")))
        };
        let config = FeatureConfig::from_kv(entry("config")?)?;
        if config.digest() != digest {
            return Err(Error::StaleCache {
                expected: digest.to_owned(),
                found: config.digest(),
            });
        }
        let mut stages = Vec::new();
        for name in ["identifier", "categorizer"] {
            let featurizer = Featurizer::from_text(&util::read_to_string(
                &dir.join(format!("{name}.featurizer")),
            )?)?;
            let expected = entry(name)?;
            if featurizer.digest() != expected {
                return Err(Error::StaleCache {
                    expected: expected.to_owned(),
                    found: featurizer.digest(),
                });
            }
            if featurizer.config().digest() != digest {
                return Err(Error::StaleCache {
                    expected: digest.to_owned(),
                    found: featurizer.config().digest(),
                });
            }
            let model = Model::load(&dir.join(format!("{name}.model")))?;
            if model.cols() != featurizer.cols() {
                return Err(Error::Dimension {
                    expected: featurizer.cols(),
                    actual: model.cols(),
                });
            }
            stages.push(Stage { featurizer, model });
        }
        let categorizer = stages.pop().expect("two stages");
        let identifier = stages.pop().expect("two stages");
        if !identifier.model.classes().iter().any(|c| c == RWEET) {
            return Err(Error::invalid(format!(
                "identifier model has no {RWEET:?} class"
            )));
        }
        Ok(StagedClassifier {
            config,
            identifier,
            categorizer,
        })
    }
}

/// Trains the identifier on `d1` (binary labels) and the categorizer on `d2`
/// (request types), both under `config`.
pub fn train_staged(
    d1: &Dataset,
    d2: &Dataset,
    config: FeatureConfig,
    classifier: &dyn Classifier,
    pcfg: &PipelineConfig,
) -> Result<StagedClassifier> {
    if d1.domain().index_of(RWEET).is_none() {
        return Err(Error::invalid(format!(
            "identifier dataset domain {} lacks {RWEET:?}",
            d1.domain()
        )));
    }
    let identifier = Stage::fit(&prepare(d1, pcfg)?, d1.domain(), config, classifier)?;
    let categorizer = Stage::fit(&prepare(d2, pcfg)?, d2.domain(), config, classifier)?;
    Ok(StagedClassifier {
        config,
        identifier,
        categorizer,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorizedTweet {
    pub id: String,
    pub text: String,
    pub stage1: String,
    pub stage2: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SeriesOutput {
    pub tweets: Vec<CategorizedTweet>,
    pub report: PreprocessReport,
}

impl SeriesOutput {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.tweets {
            out.push_str(&serde_json::to_string(t).expect("tweet serializes"));
            out.push('\n');
        }
        out
    }

    pub fn rweets(&self) -> usize {
        self.tweets.iter().filter(|t| t.stage1 == RWEET).count()
    }
}

/// Cleans `d`, identifies rweets among the cleaned tweets, and categorizes
/// only those.
pub fn run_series(
    d: &Dataset,
    staged: &StagedClassifier,
    pcfg: &PipelineConfig,
    cache: &mut FeatureCache,
) -> Result<SeriesOutput> {
    let p = prepare(d, pcfg)?;
    let id_stage = &staged.identifier;
    let x_id = cache.features(
        &id_stage.featurizer,
        &p.corpus,
        Some(&p.rules),
        id_stage.model.view(),
    )?;
    let stage1: Vec<String> = id_stage
        .model
        .predict(&x_id.matrix)?
        .into_iter()
        .map(|i| id_stage.label(i).to_owned())
        .collect();

    let ct_stage = &staged.categorizer;
    let x_ct = cache.features(
        &ct_stage.featurizer,
        &p.corpus,
        Some(&p.rules),
        ct_stage.model.view(),
    )?;
    let (x_kept, _) = filter_rweets(&x_ct, &stage1)?;
    let stage2 = if x_kept.rows() > 0 {
        ct_stage.model.predict(&x_kept.matrix)?
    } else {
        Vec::new()
    };
    let mut categories: HashMap<&str, &str> = HashMap::new();
    for (id, &c) in x_kept.row_ids.iter().zip(&stage2) {
        categories.insert(id, ct_stage.label(c));
    }

    let tweets = p
        .corpus
        .tweets()
        .iter()
        .zip(stage1)
        .map(|(t, s1)| CategorizedTweet {
            id: t.id.clone(),
            text: d.get(&t.id).map(|r| r.text.clone()).unwrap_or_default(),
            stage2: categories.get(t.id.as_str()).map(|c| c.to_string()),
            stage1: s1,
        })
        .collect();
    Ok(SeriesOutput {
        tweets,
        report: p.report,
    })
}

/// Fits and predicts on the same tweets, as a literal reading of the series
/// does. Optimistic by construction; useful only for comparison.
pub fn resubstitution(
    p: &Prepared,
    domain: &LabelDomain,
    config: FeatureConfig,
    classifier: &dyn Classifier,
) -> Result<MetricsReport> {
    let y = encode_labels(&p.corpus, domain)?;
    let stage = Stage::fit(p, domain, config, classifier)?;
    let x = stage
        .featurizer
        .transform(&p.corpus, Some(&p.rules), classifier.view())?;
    let y_hat = stage.model.predict(&x.matrix)?;
    Ok(MetricsReport::from_confusion(&confusion(
        &y, &y_hat, domain,
    )?))
}
