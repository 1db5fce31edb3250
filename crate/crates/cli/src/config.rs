//! Flat `key = value` config files and the resolved run configuration.
//!
//! Flags always win over file values; file values win over built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rweet_core::corpus::LabelDomain;
use rweet_core::features::{FeatureConfig, NgramRange, Vectorizer};
use rweet_core::models::{Classifier, LogisticRegression, NaiveBayes, TrainConfig, DEFAULT_ALPHA};
use rweet_core::preprocess::PipelineConfig;
use rweet_core::util;

/// Missing or contradictory arguments that clap cannot see because they may
/// come from the config file. Exits like a clap usage error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const KEYS: &[&str] = &[
    "seed",
    "cache_dir",
    "input",
    "domain",
    "binary",
    "categorical",
    "model",
    "order",
    "english_threshold",
    "min_tokens",
    "combo",
    "vectorizer",
    "ngrams",
    "rules",
    "min_df",
    "max_df",
    "l2",
    "classifier",
    "lr",
    "lambda",
    "epochs",
    "tol",
    "adaptive",
    "alpha",
    "folds",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = util::read_to_string(path)?;
        Self::parse(&text).with_context(|| format!("config file {}", path.display()))
    }

    /// Blank lines and `#` comments are ignored; keys may not repeat.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!(rweet_core::Error::Malformed {
                    line: i + 1,
                    message: format!("expected key = value, got {line:?}"),
                });
            };
            let (k, v) = (k.trim().replace('-', "_"), v.trim().to_owned());
            if !KEYS.contains(&k.as_str()) {
                bail!(rweet_core::Error::Malformed {
                    line: i + 1,
                    message: format!("unknown key {k:?}"),
                });
            }
            if values.insert(k.clone(), v).is_some() {
                bail!(rweet_core::Error::Malformed {
                    line: i + 1,
                    message: format!("key {k:?} given twice"),
                });
            }
        }
        Ok(FileConfig { values })
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        debug_assert!(KEYS.contains(&key));
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| {
                    anyhow::Error::new(rweet_core::Error::Invalid(format!(
                        "config {key} = {v:?}: {e}"
                    )))
                })
            })
            .transpose()
    }

    /// `flag`, else the file's value, else `None`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn path(&self, flag: Option<&PathBuf>, key: &str) -> Result<PathBuf> {
        match self.pick(flag.cloned(), key)? {
            Some(p) => Ok(p),
            None => Err(UsageError(format!(
                "--{} is required (or set `{key}` in the config file)",
                key.replace('_', "-")
            ))
            .into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Binary,
    Categorical,
}

impl DomainArg {
    pub fn domain(self) -> LabelDomain {
        match self {
            DomainArg::Binary => LabelDomain::binary(),
            DomainArg::Categorical => LabelDomain::categorical(),
        }
    }
}

impl FromStr for DomainArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierKind {
    #[value(alias = "logreg")]
    Lr,
    #[value(alias = "naive-bayes", alias = "naive_bayes")]
    Nb,
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, false)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Lr => "lr",
            ClassifierKind::Nb => "nb",
        })
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Comma-separated preprocessing operations, in order.
    #[arg(long)]
    pub order: Option<String>,
    /// Minimum share of English evidence a tweet needs to be kept.
    #[arg(long)]
    pub english_threshold: Option<f64>,
    /// Tweets with fewer tokens after stopword removal are dropped.
    #[arg(long)]
    pub min_tokens: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct FeatureArgs {
    /// Feature combination 1-24 (tf/tf-idf × n-gram range × rule features).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=24), conflicts_with_all = ["vectorizer", "ngrams", "rules"])]
    pub combo: Option<u8>,
    /// `tf` or `tfidf`.
    #[arg(long)]
    pub vectorizer: Option<String>,
    /// N-gram range `lo-hi` with 1 <= lo <= hi <= 3.
    #[arg(long)]
    pub ngrams: Option<String>,
    /// Append the eighteen rule-match bits (`yes` or `no`).
    #[arg(long)]
    pub rules: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierKind>,
    /// Initial gradient-descent step size.
    #[arg(long)]
    pub lr: Option<f64>,
    /// L2 penalty on the weights.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Additive smoothing for naive Bayes.
    #[arg(long)]
    pub alpha: Option<f64>,
}

const DEFAULT_COMBO: usize = 10;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_FOLDS: usize = 5;

/// Everything a command needs beyond its input paths, after merging flags,
/// config file and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub features: FeatureConfig,
    pub classifier: ClassifierKind,
    pub train: TrainConfig,
    pub alpha: f64,
    pub folds: usize,
    pub seed: u64,
    pub cache_dir: PathBuf,
}

fn yes_no(v: &str) -> Result<bool> {
    match v {
        "yes" | "true" | "on" | "1" => Ok(true),
        "no" | "false" | "off" | "0" => Ok(false),
        other => bail!(rweet_core::Error::Invalid(format!(
            "expected yes or no, got {other:?}"
        ))),
    }
}

impl RunConfig {
    pub fn resolve(
        file: &FileConfig,
        seed: Option<u64>,
        cache_dir: Option<&PathBuf>,
        pipeline: &PipelineArgs,
        features: &FeatureArgs,
        model: &ModelArgs,
        folds: Option<usize>,
    ) -> Result<Self> {
        let seed = file.pick(seed, "seed")?.unwrap_or(DEFAULT_SEED);

        let mut pcfg = PipelineConfig::default();
        if let Some(order) = file.pick(pipeline.order.clone(), "order")? {
            pcfg = pcfg.with_order(&order)?;
        }
        if let Some(t) = file.pick(pipeline.english_threshold, "english_threshold")? {
            pcfg = pcfg.with_english_threshold(t)?;
        }
        if let Some(n) = file.pick(pipeline.min_tokens, "min_tokens")? {
            pcfg = pcfg.with_min_tokens(n)?;
        }

        // explicit fields refine a base combination; --combo alone replaces it
        let explicit =
            features.vectorizer.is_some() || features.ngrams.is_some() || features.rules.is_some();
        let combo = match features.combo {
            Some(n) => n as usize,
            None => file.get("combo")?.unwrap_or(DEFAULT_COMBO),
        };
        let mut fcfg = FeatureConfig::combo(combo)?;
        if features.combo.is_none() || explicit {
            if let Some(v) = file.pick(features.vectorizer.clone(), "vectorizer")? {
                fcfg.vectorizer = v.parse::<Vectorizer>()?;
            }
            if let Some(v) = file.pick(features.ngrams.clone(), "ngrams")? {
                fcfg.ngrams = v.parse::<NgramRange>()?;
            }
            if let Some(v) = file.pick(features.rules.clone(), "rules")? {
                fcfg.append_rules = yes_no(&v)?;
            }
        }
        if let Some(v) = file.get("min_df")? {
            fcfg.min_df = v;
        }
        if let Some(v) = file.get("max_df")? {
            fcfg.max_df = v;
        }
        if let Some(v) = file.get::<String>("l2")? {
            fcfg.l2_normalize = yes_no(&v)?;
        }
        fcfg.validate()?;

        let mut train = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        if let Some(v) = file.pick(model.lr, "lr")? {
            train.learning_rate = v;
        }
        if let Some(v) = file.pick(model.lambda, "lambda")? {
            train.lambda = v;
        }
        if let Some(v) = file.pick(model.epochs, "epochs")? {
            train.max_epochs = v;
        }
        if let Some(v) = file.get("tol")? {
            train.tolerance = v;
        }
        if let Some(v) = file.get("adaptive")? {
            train.adaptive = v;
        }
        train.validate()?;

        let alpha = file.pick(model.alpha, "alpha")?.unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha.is_finite()) {
            bail!(rweet_core::Error::Invalid(format!(
                "smoothing alpha {alpha} must be positive"
            )));
        }
        let folds = file.pick(folds, "folds")?.unwrap_or(DEFAULT_FOLDS);
        if folds < 2 {
            bail!(rweet_core::Error::Invalid(format!(
                "{folds} folds; need at least 2"
            )));
        }

        Ok(RunConfig {
            pipeline: pcfg,
            features: fcfg,
            classifier: file
                .pick(model.classifier, "classifier")?
                .unwrap_or(ClassifierKind::Lr),
            train,
            alpha,
            folds,
            seed,
            cache_dir: file
                .pick(cache_dir.cloned(), "cache_dir")?
                .unwrap_or_else(|| PathBuf::from(".rweet-cache")),
        })
    }

    pub fn classifier(&self) -> Box<dyn Classifier> {
        match self.classifier {
            ClassifierKind::Lr => Box::new(LogisticRegression { config: self.train }),
            ClassifierKind::Nb => Box::new(NaiveBayes { alpha: self.alpha }),
        }
    }

    /// Covers every setting that can change a result. The cache directory
    /// is deliberately left out.
    pub fn digest(&self) -> String {
        util::digest_parts([
            self.pipeline.digest(),
            self.features.digest(),
            self.classifier.to_string(),
            self.train.to_kv(),
            format!("{:?}", self.alpha),
            self.folds.to_string(),
            self.seed.to_string(),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(file: &str, features: FeatureArgs) -> Result<RunConfig> {
        RunConfig::resolve(
            &FileConfig::parse(file)?,
            None,
            None,
            &PipelineArgs::default(),
            &features,
            &ModelArgs::default(),
            None,
        )
    }

    #[test]
    fn parsing() {
        let f =
            FileConfig::parse("# comment\nseed = 7\n\ncache-dir = /tmp/x # trailing\n").unwrap();
        assert_eq!(f.get::<u64>("seed").unwrap(), Some(7));
        assert_eq!(
            f.get::<String>("cache_dir").unwrap().as_deref(),
            Some("/tmp/x")
        );
        assert!(FileConfig::parse("seed 7").is_err());
        assert!(FileConfig::parse("colour = red").is_err());
        assert!(FileConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(FileConfig::parse("seed = x")
            .unwrap()
            .get::<u64>("seed")
            .is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = FileConfig::parse("seed = 7\nfolds = 3").unwrap();
        assert_eq!(file.pick(Some(9u64), "seed").unwrap(), Some(9));
        assert_eq!(file.pick(None::<u64>, "seed").unwrap(), Some(7));
        let cfg = RunConfig::resolve(
            &file,
            Some(2),
            None,
            &Default::default(),
            &Default::default(),
            &Default::default(),
            Some(4),
        )
        .unwrap();
        assert_eq!((cfg.seed, cfg.folds, cfg.train.seed), (2, 4, 2));
    }

    #[test]
    fn feature_selection() {
        assert_eq!(
            resolve("", FeatureArgs::default()).unwrap().features,
            FeatureConfig::combo(10).unwrap()
        );
        assert_eq!(
            resolve("combo = 3", FeatureArgs::default())
                .unwrap()
                .features,
            FeatureConfig::combo(3).unwrap()
        );
        let flag = FeatureArgs {
            combo: Some(20),
            ..Default::default()
        };
        assert_eq!(
            resolve("combo = 3\nvectorizer = tf", flag)
                .unwrap()
                .features,
            FeatureConfig::combo(20).unwrap()
        );
        let explicit = FeatureArgs {
            vectorizer: Some("tfidf".into()),
            ngrams: Some("1-2".into()),
            rules: Some("yes".into()),
            ..Default::default()
        };
        assert_eq!(
            resolve("", explicit).unwrap().features,
            FeatureConfig::combo(22).unwrap()
        );
        assert!(resolve("combo = 25", FeatureArgs::default()).is_err());
        assert!(resolve("rules = maybe", FeatureArgs::default()).is_err());
    }

    #[test]
    fn digest_tracks_settings() {
        let a = resolve("", FeatureArgs::default()).unwrap();
        assert_eq!(
            a.digest(),
            resolve("", FeatureArgs::default()).unwrap().digest()
        );
        assert_eq!(
            a.digest(),
            resolve("cache_dir = elsewhere", FeatureArgs::default())
                .unwrap()
                .digest()
        );
        assert_ne!(
            a.digest(),
            resolve("seed = 2", FeatureArgs::default())
                .unwrap()
                .digest()
        );
        assert_ne!(
            a.digest(),
            resolve("classifier = nb", FeatureArgs::default())
                .unwrap()
                .digest()
        );
        assert_ne!(
            a.digest(),
            resolve("min_tokens = 3", FeatureArgs::default())
                .unwrap()
                .digest()
        );
    }
}
