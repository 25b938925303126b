//! End-to-end classification pipeline: split, featurize, cross-validate,
//! train, evaluate.
//!
//! The vocabulary is frozen over the training split only; test-time features
//! it has never seen are dropped. With `repeats > 1` the whole procedure runs
//! on re-splits seeded `split_seed + r` and the report carries per-repeat
//! results plus their means. Everything downstream of the manifest is
//! deterministic given the config.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::classifier::{
    self, cross_validate, evaluate, train, CvResult, EvalError, EvalReport, Hyperparams,
    LinearModel, TrainError, LAMBDA_GRID,
};
use crate::graph::{ClassTag, DatasetManifest, LoadError, LoadOptions, Prg};
use crate::kernel::{featurize, FeatureVector, KernelError, UnknownPolicy, Vocabulary};
use crate::relabel::{Mode, RelabelSequence, Relabeler};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub h: usize,
    pub mode: Mode,
    pub repeats: u32,
    pub seed: u64,
    pub epochs: u32,
    /// Regularization strengths tried by 5-fold cross-validation on the
    /// training split; a single-element grid skips the cross-validation.
    pub lambda_grid: Vec<f64>,
    pub folds: usize,
    pub load: LoadOptionsCopy,
}

/// Clonable mirror of [`LoadOptions`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptionsCopy {
    pub inject_default_context: bool,
}

impl From<LoadOptionsCopy> for LoadOptions {
    fn from(c: LoadOptionsCopy) -> LoadOptions {
        LoadOptions { inject_default_context: c.inject_default_context }
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            h: 2,
            mode: Mode::Contextual,
            repeats: 1,
            seed: 42,
            epochs: 20,
            lambda_grid: LAMBDA_GRID.to_vec(),
            folds: 5,
            load: LoadOptionsCopy::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RepeatOutcome {
    pub split_seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub chosen_lambda: f64,
    pub cv: Vec<CvResult>,
    pub report: EvalReport,
}

#[derive(Debug, Serialize)]
pub struct PipelineOutcome {
    pub mode: Mode,
    pub h: usize,
    pub vocab_hash: String,
    pub repeats: Vec<RepeatOutcome>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f_measure: f64,
    #[serde(skip)]
    pub model: LinearModel,
}

impl PipelineOutcome {
    pub fn write_report_json(&self, mut sink: impl Write) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("report serialization");
        sink.write_all(text.as_bytes())?;
        sink.write_all(b"\n")
    }

    /// Writes `model.json` and `report.json` under `dir`; returns their
    /// paths.
    pub fn write_artifacts(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let model_path = dir.join("model.json");
        self.model.write_json(std::io::BufWriter::new(std::fs::File::create(&model_path)?))?;
        let report_path = dir.join("report.json");
        self.write_report_json(std::io::BufWriter::new(std::fs::File::create(&report_path)?))?;
        Ok((model_path, report_path))
    }
}

/// Loads every manifest entry, in manifest order, relative to `base_dir`.
pub fn load_corpus(
    manifest: &DatasetManifest,
    base_dir: &Path,
    opts: &LoadOptions,
) -> Result<Vec<Prg>, PipelineError> {
    manifest
        .entries
        .iter()
        .map(|e| Prg::load_path(base_dir.join(&e.path), opts).map_err(PipelineError::from))
        .collect()
}

/// Runs the full pipeline for a manifest whose graphs are already loaded in
/// entry order.
pub fn run_pipeline(
    manifest: &DatasetManifest,
    corpus: &[Prg],
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome, PipelineError> {
    assert_eq!(manifest.entries.len(), corpus.len(), "corpus must match manifest");
    assert!(cfg.repeats >= 1, "need at least one repeat");
    assert!(!cfg.lambda_grid.is_empty(), "lambda grid is empty");

    let mut repeats = Vec::with_capacity(cfg.repeats as usize);
    let mut model = None;
    let mut vocab_hash = String::new();
    for r in 0..u64::from(cfg.repeats) {
        let split_seed = manifest.split_seed.wrapping_add(r);
        let (train_ids, test_ids) = classifier::split_with_seed(manifest, split_seed);

        let mut relabeler = Relabeler::new();
        let relabel = |relabeler: &mut Relabeler, ids: &[usize]| -> Vec<RelabelSequence> {
            ids.iter()
                .map(|&i| {
                    let id = manifest.entries[i].path.as_str();
                    match cfg.mode {
                        Mode::Wl => relabeler.wl_relabel(&corpus[i], id, cfg.h),
                        Mode::Contextual => relabeler.contextual_relabel(&corpus[i], id, cfg.h),
                    }
                })
                .collect()
        };

        let train_seqs = relabel(&mut relabeler, &train_ids);
        let vocab = Vocabulary::from_relabeler(&relabeler, cfg.mode);
        let test_seqs = relabel(&mut relabeler, &test_ids);

        let train_vecs: Vec<FeatureVector> = train_seqs
            .par_iter()
            .map(|s| featurize(s, &relabeler, &vocab, UnknownPolicy::Strict))
            .collect::<Result<_, _>>()?;
        let test_vecs: Vec<FeatureVector> = test_seqs
            .par_iter()
            .map(|s| featurize(s, &relabeler, &vocab, UnknownPolicy::Ignore))
            .collect::<Result<_, _>>()?;

        let train_samples: Vec<(&FeatureVector, ClassTag)> = train_vecs
            .iter()
            .zip(&train_ids)
            .map(|(v, &i)| (v, manifest.entries[i].class))
            .collect();
        let test_samples: Vec<(&FeatureVector, ClassTag)> = test_vecs
            .iter()
            .zip(&test_ids)
            .map(|(v, &i)| (v, manifest.entries[i].class))
            .collect();

        let hp = Hyperparams { lambda: cfg.lambda_grid[0], epochs: cfg.epochs, seed: cfg.seed };
        let (chosen_lambda, cv) = if cfg.lambda_grid.len() == 1 {
            (cfg.lambda_grid[0], Vec::new())
        } else {
            cross_validate(&train_samples, &cfg.lambda_grid, cfg.folds, &hp)?
        };
        let fitted = train(&train_samples, &Hyperparams { lambda: chosen_lambda, ..hp })?;
        let report = evaluate(&fitted, &test_samples)?;

        if r == 0 {
            vocab_hash = vocab.hash_hex();
            model = Some(fitted);
        }
        repeats.push(RepeatOutcome {
            split_seed,
            train_size: train_samples.len(),
            test_size: test_samples.len(),
            chosen_lambda,
            cv,
            report,
        });
    }

    let k = repeats.len() as f64;
    let mean = |f: fn(&EvalReport) -> f64| repeats.iter().map(|r| f(&r.report)).sum::<f64>() / k;
    Ok(PipelineOutcome {
        mode: cfg.mode,
        h: cfg.h,
        vocab_hash,
        mean_precision: mean(|r| r.precision),
        mean_recall: mean(|r| r.recall),
        mean_f_measure: mean(|r| r.f_measure),
        repeats,
        model: model.expect("at least one repeat"),
    })
}

/// Convenience entry point: reads the manifest, loads the corpus relative to
/// the manifest's directory, and runs the pipeline.
pub fn run_from_manifest_path(
    manifest_path: &Path,
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome, PipelineError> {
    let manifest = DatasetManifest::load_path(manifest_path)?;
    let base_dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let corpus = load_corpus(&manifest, base_dir, &cfg.load.into())?;
    run_pipeline(&manifest, &corpus, cfg)
}
