//! `rweet`: preprocess, featurize, train, evaluate and run the two-stage
//! rweet series from the command line.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 validation, 4 stale cache.

mod config;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rweet_core::corpus::{dataset_stats, load_dataset, synth_corpus, Dataset};
use rweet_core::features::{Featurizer, MatrixView};
use rweet_core::models::cross_validate;
use rweet_core::pipeline::{
    prepare, resubstitution, run_series, train_staged, FeatureCache, StagedClassifier,
};
use rweet_core::preprocess::{clean_digest, load_clean, run_pipeline, save_clean, CleanCorpus};
use rweet_core::rules::{rule_features, RuleSet, PATTERN_SOURCES};
use rweet_core::{util, Error};
use serde_json::{Map, Value};

use config::{DomainArg, FeatureArgs, FileConfig, ModelArgs, PipelineArgs, RunConfig, UsageError};

#[derive(Debug, Parser)]
#[command(
    name = "rweet",
    version,
    about = "Identify help-request tweets and sort them by request type"
)]
struct Cli {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Where cleaned corpora and feature matrices are kept [default: .rweet-cache].
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled synthetic corpus as JSONL.
    Synth {
        #[arg(long, default_value_t = 600)]
        size: usize,
        #[arg(long, value_enum, default_value_t = DomainArg::Binary)]
        domain: DomainArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Clean a dataset and store the result in the cache.
    Preprocess {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        domain: Option<DomainArg>,
        /// Also write the cleaned corpus here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Build and cache the feature matrix of a cleaned dataset.
    Featurize {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        domain: Option<DomainArg>,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Match tweets against the request patterns.
    Rules {
        #[command(subcommand)]
        command: RulesCommand,
    },
    /// Train the identifier and the categorizer and save them together.
    Train {
        /// Tweets labeled rweet / not_rweet.
        #[arg(long)]
        binary: Option<PathBuf>,
        /// Rweets labeled with their request type.
        #[arg(long)]
        categorical: Option<PathBuf>,
        /// Model directory [default: <cache-dir>/models/<run digest>].
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Stratified k-fold evaluation of one classifier on one dataset.
    Evaluate {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        domain: Option<DomainArg>,
        #[arg(long)]
        folds: Option<usize>,
        /// Train and test on the same tweets instead (optimistic).
        #[arg(long)]
        resubstitution: bool,
        /// Also write the pooled report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        features: FeatureArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Identify and categorize the tweets of a dataset with a trained model.
    Series {
        /// Directory written by `train`.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Domain of any gold labels present in the input.
        #[arg(long, value_enum)]
        domain: Option<DomainArg>,
        /// JSONL output [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
}

#[derive(Debug, Subcommand)]
enum RulesCommand {
    /// Label each line of a JSONL or plain-text file.
    Classify {
        #[arg(long)]
        input: PathBuf,
        /// JSONL output [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the patterns, numbered.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Io { .. } | Error::NotFound(_) => 2,
                Error::StaleCache { .. } => 4,
                _ => 3,
            };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    3
}

struct Ctx {
    file: FileConfig,
    seed: Option<u64>,
    cache_dir: Option<PathBuf>,
    verbose: bool,
}

impl Ctx {
    fn run_config(
        &self,
        pipeline: &PipelineArgs,
        features: &FeatureArgs,
        model: &ModelArgs,
        folds: Option<usize>,
    ) -> Result<RunConfig> {
        let cfg = RunConfig::resolve(
            &self.file,
            self.seed,
            self.cache_dir.as_ref(),
            pipeline,
            features,
            model,
            folds,
        )?;
        self.note(format_args!(
            "run config {} ({})",
            cfg.digest(),
            cfg.features.to_kv()
        ));
        Ok(cfg)
    }

    fn dataset(
        &self,
        input: Option<&PathBuf>,
        domain: Option<DomainArg>,
        key: &str,
    ) -> Result<Dataset> {
        let path = self.file.path(input, key)?;
        let domain = self
            .file
            .pick(domain, "domain")?
            .unwrap_or(DomainArg::Binary);
        load_dataset(&path, domain.domain()).with_context(|| format!("loading {}", path.display()))
    }

    fn note(&self, msg: std::fmt::Arguments<'_>) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let ctx = Ctx {
        file,
        seed: cli.seed,
        cache_dir: cli.cache_dir,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Synth { size, domain, out } => cmd_synth(&ctx, size, domain, &out),
        Command::Preprocess {
            input,
            domain,
            out,
            pipeline,
        } => cmd_preprocess(&ctx, input.as_ref(), domain, out.as_deref(), &pipeline),
        Command::Featurize {
            input,
            domain,
            features,
            pipeline,
        } => cmd_featurize(&ctx, input.as_ref(), domain, &features, &pipeline),
        Command::Rules { command } => match command {
            RulesCommand::Classify { input, out } => cmd_rules(&input, out.as_deref()),
            RulesCommand::List => {
                let mut text = String::new();
                for (i, p) in PATTERN_SOURCES.iter().enumerate() {
                    text.push_str(&format!("{:>2} {p}\n", i + 1));
                }
                emit(None, &text)
            }
        },
        Command::Train {
            binary,
            categorical,
            out,
            features,
            model,
            pipeline,
        } => cmd_train(
            &ctx,
            binary.as_ref(),
            categorical.as_ref(),
            out,
            &features,
            &model,
            &pipeline,
        ),
        Command::Evaluate {
            input,
            domain,
            folds,
            resubstitution,
            json,
            features,
            model,
            pipeline,
        } => cmd_evaluate(
            &ctx,
            input.as_ref(),
            domain,
            folds,
            resubstitution,
            json.as_deref(),
            &features,
            &model,
            &pipeline,
        ),
        Command::Series {
            model,
            input,
            domain,
            out,
            pipeline,
        } => cmd_series(
            &ctx,
            model.as_ref(),
            input.as_ref(),
            domain,
            out.as_deref(),
            &pipeline,
        ),
    }
}

/// Writes `text` to `out`, or to stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => Ok(util::write_atomic(path, text.as_bytes())?),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn clean_path(cfg: &RunConfig, digest: &str) -> PathBuf {
    cfg.cache_dir.join("clean").join(format!("{digest}.clean"))
}

/// The cached cleaned corpus of `d`, computed and stored on a miss.
fn cached_clean(ctx: &Ctx, d: &Dataset, cfg: &RunConfig) -> Result<CleanCorpus> {
    let digest = clean_digest(d, &cfg.pipeline);
    let path = clean_path(cfg, &digest);
    if path.exists() {
        ctx.note(format_args!("clean corpus {}", path.display()));
        return load_clean(&path, &digest).with_context(|| format!("loading {}", path.display()));
    }
    eprintln!("clean corpus not cached; preprocessing");
    let (corpus, _) = run_pipeline(d, &cfg.pipeline);
    save_clean(&path, &corpus)?;
    Ok(corpus)
}

fn cmd_synth(ctx: &Ctx, size: usize, domain: DomainArg, out: &Path) -> Result<()> {
    let seed = ctx.file.pick(ctx.seed, "seed")?.unwrap_or(1);
    let d = synth_corpus(seed, size, &domain.domain())?;
    d.save(out)?;
    let stats = dataset_stats(&d);
    let mut text = format!("wrote {} tweets to {}\n", d.len(), out.display());
    for share in &stats.entries {
        text.push_str(&format!(
            "{:<12} {:>6} {:>7.2}%\n",
            share.label,
            share.count,
            100.0 * share.fraction
        ));
    }
    emit(None, &text)
}

fn cmd_preprocess(
    ctx: &Ctx,
    input: Option<&PathBuf>,
    domain: Option<DomainArg>,
    out: Option<&Path>,
    pipeline: &PipelineArgs,
) -> Result<()> {
    let cfg = ctx.run_config(
        pipeline,
        &FeatureArgs::default(),
        &ModelArgs::default(),
        None,
    )?;
    let d = ctx.dataset(input, domain, "input")?;
    let (corpus, report) = run_pipeline(&d, &cfg.pipeline);
    let path = clean_path(&cfg, corpus.digest());
    save_clean(&path, &corpus)?;
    if let Some(out) = out {
        save_clean(out, &corpus)?;
    }
    let mut text = format!("{report}\n");
    for w in &report.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    text.push_str(&format!("clean corpus {}\n", path.display()));
    emit(None, &text)
}

fn cmd_featurize(
    ctx: &Ctx,
    input: Option<&PathBuf>,
    domain: Option<DomainArg>,
    features: &FeatureArgs,
    pipeline: &PipelineArgs,
) -> Result<()> {
    let cfg = ctx.run_config(pipeline, features, &ModelArgs::default(), None)?;
    let d = ctx.dataset(input, domain, "input")?;
    let corpus = cached_clean(ctx, &d, &cfg)?;
    let rules = rule_features(&d).select_ids(&corpus.ids())?;
    // fitted on every row: fine for precomputation, not for held-out scores
    let featurizer = Featurizer::fit(&corpus, cfg.features)?;
    let mut cache = FeatureCache::on_disk(cfg.cache_dir.join("features"));
    let fm = cache.features(&featurizer, &corpus, Some(&rules), MatrixView::Weighted)?;
    let stem = cache.stem(&fm.key).expect("on-disk cache");
    let status = if cache.hits() > 0 {
        "cache hit"
    } else {
        "computed"
    };
    emit(
        None,
        &format!(
            "{status}: {} rows x {} cols, {} nonzeros ({})\nmatrix {}\nnote: vocabulary fitted on the full corpus; use for precomputation only\n",
            fm.rows(),
            fm.cols(),
            fm.matrix.nnz(),
            cfg.features.to_kv(),
            stem.display()
        ),
    )
}

/// Accepts JSONL records with a `text` field or plain text lines; plain
/// lines get their line number as id.
fn cmd_rules(input: &Path, out: Option<&Path>) -> Result<()> {
    let file = std::fs::File::open(input).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(input.to_owned()),
        _ => Error::Io {
            path: input.to_owned(),
            source: e,
        },
    })?;
    let rules = RuleSet::standard();
    let mut text = String::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", input.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut record = if line.trim_start().starts_with('{') {
            match serde_json::from_str::<Value>(&line) {
                Ok(Value::Object(map)) if map.get("text").is_some_and(Value::is_string) => map,
                _ => bail!(Error::Malformed {
                    line: i + 1,
                    message: "expected a JSON object with a string \"text\" field".into(),
                }),
            }
        } else {
            let mut map = Map::new();
            map.insert("id".into(), Value::from((i + 1).to_string()));
            map.insert("text".into(), Value::from(line.as_str()));
            map
        };
        let raw = record["text"].as_str().expect("checked above").to_owned();
        let matched = rules.match_tweet(&raw);
        record.insert(
            "rule_label".into(),
            Value::from(rules.classify(&raw).as_str()),
        );
        record.insert(
            "rule_bits".into(),
            Value::from(
                matched
                    .bits()
                    .iter()
                    .map(|&b| u8::from(b))
                    .collect::<Vec<_>>(),
            ),
        );
        text.push_str(&serde_json::to_string(&record)?);
        text.push('\n');
    }
    emit(out, &text)
}

fn cmd_train(
    ctx: &Ctx,
    binary: Option<&PathBuf>,
    categorical: Option<&PathBuf>,
    out: Option<PathBuf>,
    features: &FeatureArgs,
    model: &ModelArgs,
    pipeline: &PipelineArgs,
) -> Result<()> {
    let cfg = ctx.run_config(pipeline, features, model, None)?;
    let load = |flag: Option<&PathBuf>, key: &str, domain: DomainArg| -> Result<Dataset> {
        let path = ctx.file.path(flag, key)?;
        load_dataset(&path, domain.domain()).with_context(|| format!("loading {}", path.display()))
    };
    let d1 = load(binary, "binary", DomainArg::Binary)?;
    let d2 = load(categorical, "categorical", DomainArg::Categorical)?;
    let staged = train_staged(
        &d1,
        &d2,
        cfg.features,
        cfg.classifier().as_ref(),
        &cfg.pipeline,
    )?;
    let dir = match ctx.file.pick(out, "model")? {
        Some(dir) => dir,
        None => cfg.cache_dir.join("models").join(cfg.digest()),
    };
    staged.save(&dir)?;
    emit(
        None,
        &format!(
            "identifier: {} terms, categorizer: {} terms ({}, {})\nmodel {}\n",
            staged.identifier.featurizer.vocab().len(),
            staged.categorizer.featurizer.vocab().len(),
            cfg.classifier,
            cfg.features.to_kv(),
            dir.display()
        ),
    )
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    ctx: &Ctx,
    input: Option<&PathBuf>,
    domain: Option<DomainArg>,
    folds: Option<usize>,
    resub: bool,
    json: Option<&Path>,
    features: &FeatureArgs,
    model: &ModelArgs,
    pipeline: &PipelineArgs,
) -> Result<()> {
    let cfg = ctx.run_config(pipeline, features, model, folds)?;
    let d = ctx.dataset(input, domain, "input")?;
    let corpus = cached_clean(ctx, &d, &cfg)?;
    let rules = rule_features(&d).select_ids(&corpus.ids())?;
    let classifier = cfg.classifier();
    let mut text = format!(
        "classifier {} | {} | {} tweets\n",
        cfg.classifier,
        cfg.features.to_kv(),
        corpus.len()
    );
    let report = if resub {
        text.push_str("resubstitution (training tweets scored; optimistic)\n");
        let p = prepare(&d, &cfg.pipeline)?;
        resubstitution(&p, d.domain(), cfg.features, classifier.as_ref())?
    } else {
        let cv = cross_validate(
            classifier.as_ref(),
            &corpus,
            Some(&rules),
            d.domain(),
            cfg.features,
            cfg.folds,
            cfg.seed,
        )?;
        text.push_str(&format!(
            "stratified {}-fold, seed {}\n",
            cfg.folds, cfg.seed
        ));
        for (i, f) in cv.folds.iter().enumerate() {
            text.push_str(&format!(
                "fold {} accuracy {:.2}\n",
                i + 1,
                100.0 * f.accuracy
            ));
        }
        cv.pooled
    };
    text.push_str(&report.to_text());
    if let Some(path) = json {
        util::write_atomic(path, format!("{}\n", report.to_json()).as_bytes())?;
    }
    emit(None, &text)
}

fn cmd_series(
    ctx: &Ctx,
    model: Option<&PathBuf>,
    input: Option<&PathBuf>,
    domain: Option<DomainArg>,
    out: Option<&Path>,
    pipeline: &PipelineArgs,
) -> Result<()> {
    let cfg = ctx.run_config(
        pipeline,
        &FeatureArgs::default(),
        &ModelArgs::default(),
        None,
    )?;
    let dir = ctx.file.path(model, "model")?;
    let staged =
        StagedClassifier::load(&dir).with_context(|| format!("loading model {}", dir.display()))?;
    let d = ctx.dataset(input, domain, "input")?;
    let mut cache = FeatureCache::on_disk(cfg.cache_dir.join("features"));
    let output = run_series(&d, &staged, &cfg.pipeline, &mut cache)?;
    emit(out, &output.to_jsonl())?;
    let summary = format!(
        "{} tweets in, {} after cleaning, {} rweets; {} ({} hits, {} computed)",
        d.len(),
        output.tweets.len(),
        output.rweets(),
        if cache.misses() == 0 {
            "cache hit"
        } else {
            "cache miss"
        },
        cache.hits(),
        cache.misses()
    );
    // keep stdout clean when it carries the JSONL
    if out.is_some() {
        emit(None, &format!("{summary}\n"))
    } else {
        eprintln!("{summary}");
        Ok(())
    }
}
