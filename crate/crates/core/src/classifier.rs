//! Linear max-margin classifier over explicit feature vectors.
//!
//! The trainer is a primal SVM: stochastic subgradient descent on the hinge
//! loss with L2 regularization (step size `1/(lambda * t)`, decaying weight
//! scale kept as a scalar factor). Training order is reshuffled every epoch
//! from a seeded generator, so the whole fit is deterministic given
//! `(training set order, seed)`. Scores above zero predict malicious; an
//! exact zero breaks toward benign.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ClassTag, DatasetManifest};
use crate::kernel::FeatureVector;

/// Regularization grid searched by 5-fold cross-validation.
pub const LAMBDA_GRID: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    /// L2 regularization strength; must be positive.
    pub lambda: f64,
    pub epochs: u32,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { lambda: 1e-4, epochs: 20, seed: 42 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrainError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set contains a single class")]
    SingleClassTraining,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("test set is empty")]
    EmptyTestSet,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PredictError {
    #[error("feature vector vocabulary does not match the model")]
    VocabularyMismatch,
}

/// Sparse linear model: weights over vocabulary indices plus a bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<(u32, f64)>,
    bias: f64,
    hyperparams: Hyperparams,
    vocab_hash: u64,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    bias: f64,
    weights: Vec<(u32, f64)>,
    hyperparams: Hyperparams,
    vocab_hash: String,
}

impl LinearModel {
    pub fn weights(&self) -> &[(u32, f64)] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyperparams
    }

    pub fn vocab_hash(&self) -> u64 {
        self.vocab_hash
    }

    /// Margin score `w . x + b`.
    pub fn score(&self, v: &FeatureVector) -> Result<f64, PredictError> {
        if v.vocab_hash() != self.vocab_hash {
            return Err(PredictError::VocabularyMismatch);
        }
        let (mut i, mut j) = (0, 0);
        let mut score = self.bias;
        let counts = v.counts();
        while i < self.weights.len() && j < counts.len() {
            let (wi, w) = self.weights[i];
            let (cj, c) = counts[j];
            match wi.cmp(&cj) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    score += w * f64::from(c);
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(score)
    }

    /// Predicted class with its margin score. Positive scores are malicious;
    /// a score of exactly zero is benign.
    pub fn predict(&self, v: &FeatureVector) -> Result<(ClassTag, f64), PredictError> {
        let score = self.score(v)?;
        let class = if score > 0.0 { ClassTag::Malicious } else { ClassTag::Benign };
        Ok((class, score))
    }

    pub fn write_json(&self, mut sink: impl Write) -> std::io::Result<()> {
        let doc = ModelDoc {
            bias: self.bias,
            weights: self.weights.clone(),
            hyperparams: self.hyperparams,
            vocab_hash: format!("{:016x}", self.vocab_hash),
        };
        let text = serde_json::to_string_pretty(&doc).expect("model serialization");
        sink.write_all(text.as_bytes())?;
        sink.write_all(b"\n")
    }

    pub fn read_json(mut source: impl Read) -> std::io::Result<LinearModel> {
        let mut buf = Vec::new();
        source.read_to_end(&mut buf)?;
        let doc: ModelDoc = serde_json::from_slice(&buf)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        let vocab_hash = u64::from_str_radix(&doc.vocab_hash, 16)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        Ok(LinearModel {
            weights: doc.weights,
            bias: doc.bias,
            hyperparams: doc.hyperparams,
            vocab_hash,
        })
    }
}

/// Confusion counts and the derived detection metrics (malicious is the
/// positive class). Zero denominators yield zero metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: u32,
    pub fp: u32,
    pub tn: u32,
    #[serde(rename = "fn")]
    pub fn_: u32,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl EvalReport {
    pub fn from_counts(tp: u32, fp: u32, tn: u32, fn_: u32) -> EvalReport {
        let ratio = |num: u32, den: u32| if den == 0 { 0.0 } else { f64::from(num) / f64::from(den) };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_measure = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        EvalReport { tp, fp, tn, fn_, precision, recall, f_measure }
    }

    pub fn total(&self) -> u32 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Fits the primal SVM. Deterministic given the sample order and
/// `hp.seed`; the returned model is never worse on the training set than the
/// all-zero model.
///
/// Internally the vectors are divided by the training set's root-mean-square
/// norm so the subgradient steps are well-scaled regardless of count
/// magnitudes, and the weights from the last half of the epochs are averaged
/// to damp the tail of the stochastic trajectory. Both transforms are folded
/// back into the stored weights, so [`LinearModel::score`] stays a plain
/// `w . x + b` over raw counts.
pub fn train(
    samples: &[(&FeatureVector, ClassTag)],
    hp: &Hyperparams,
) -> Result<LinearModel, TrainError> {
    if samples.is_empty() {
        return Err(TrainError::EmptyTrainingSet);
    }
    let has_mal = samples.iter().any(|&(_, c)| c == ClassTag::Malicious);
    let has_ben = samples.iter().any(|&(_, c)| c == ClassTag::Benign);
    if !(has_mal && has_ben) {
        return Err(TrainError::SingleClassTraining);
    }
    assert!(hp.lambda > 0.0, "lambda must be positive");
    let vocab_hash = samples[0].0.vocab_hash();
    assert!(
        samples.iter().all(|&(v, _)| v.vocab_hash() == vocab_hash),
        "training vectors must share one vocabulary"
    );

    let dim = samples
        .iter()
        .flat_map(|&(v, _)| v.counts().iter().map(|&(idx, _)| idx as usize + 1))
        .max()
        .unwrap_or(0);
    let mean_sq_norm = samples
        .iter()
        .map(|&(v, _)| {
            v.counts().iter().map(|&(_, c)| f64::from(c) * f64::from(c)).sum::<f64>()
        })
        .sum::<f64>()
        / samples.len() as f64;
    let input_scale = mean_sq_norm.sqrt().max(1e-12);

    let mut v = vec![0.0f64; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0f64;
    let mut t = 0u64;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);

    let avg_window = (hp.epochs / 2).max(1).min(hp.epochs.max(1));
    let mut snapshots = 0u32;
    let mut w_sum = vec![0.0f64; dim];
    let mut bias_sum = 0.0f64;

    for epoch in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &s in &order {
            let (x, class) = samples[s];
            let y = if class == ClassTag::Malicious { 1.0 } else { -1.0 };
            t += 1;
            let eta = 1.0 / (hp.lambda * t as f64);

            let mut dot = 0.0;
            for &(idx, c) in x.counts() {
                dot += v[idx as usize] * f64::from(c);
            }
            let violated = y * (scale * dot / input_scale + bias) < 1.0;

            scale *= 1.0 - eta * hp.lambda;
            if scale < 1e-9 {
                for w in &mut v {
                    *w *= scale;
                }
                scale = 1.0;
            }
            if violated {
                let coef = eta * y / (scale * input_scale);
                for &(idx, c) in x.counts() {
                    v[idx as usize] += coef * f64::from(c);
                }
                bias += eta * y;
            }
        }
        if epoch + avg_window >= hp.epochs {
            snapshots += 1;
            for (acc, &w) in w_sum.iter_mut().zip(&v) {
                *acc += w * scale;
            }
            bias_sum += bias;
        }
    }

    let (w_final, bias_final) = if snapshots > 0 {
        let k = f64::from(snapshots);
        (w_sum.iter().map(|w| w / k).collect::<Vec<_>>(), bias_sum / k)
    } else {
        (v.iter().map(|w| w * scale).collect(), bias)
    };
    let weights: Vec<(u32, f64)> = w_final
        .iter()
        .enumerate()
        .filter(|&(_, &w)| w != 0.0)
        .map(|(idx, &w)| (idx as u32, w / input_scale))
        .collect();
    let trained = LinearModel { weights, bias: bias_final, hyperparams: *hp, vocab_hash };
    let zero = LinearModel { weights: Vec::new(), bias: 0.0, hyperparams: *hp, vocab_hash };

    let accuracy = |m: &LinearModel| {
        samples
            .iter()
            .filter(|&&(x, class)| m.predict(x).expect("shared vocabulary").0 == class)
            .count()
    };
    if accuracy(&trained) >= accuracy(&zero) {
        Ok(trained)
    } else {
        Ok(zero)
    }
}

/// Confusion counts and metrics of `model` over a test set.
pub fn evaluate(
    model: &LinearModel,
    test: &[(&FeatureVector, ClassTag)],
) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0u32, 0u32, 0u32, 0u32);
    for &(x, actual) in test {
        let (predicted, _) = model.predict(x).expect("test vectors share the model vocabulary");
        match (predicted, actual) {
            (ClassTag::Malicious, ClassTag::Malicious) => tp += 1,
            (ClassTag::Malicious, ClassTag::Benign) => fp += 1,
            (ClassTag::Benign, ClassTag::Benign) => tn += 1,
            (ClassTag::Benign, ClassTag::Malicious) => fn_ += 1,
        }
    }
    Ok(EvalReport::from_counts(tp, fp, tn, fn_))
}

/// Deterministic stratified split of manifest entries into train/test index
/// lists using the manifest's own split seed.
pub fn split(manifest: &DatasetManifest) -> (Vec<usize>, Vec<usize>) {
    split_with_seed(manifest, manifest.split_seed)
}

/// Stratified split with an explicit seed (used for repeated re-splits).
///
/// The train side gets `floor(n * train_fraction)` entries overall; per-class
/// quotas are the class floors with the remainder assigned by largest
/// fractional part (ties to the earlier class). When a class has at least two
/// entries, both splits receive at least one of them.
pub fn split_with_seed(manifest: &DatasetManifest, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = [ClassTag::Malicious, ClassTag::Benign];
    let mut groups: Vec<Vec<usize>> = classes
        .iter()
        .map(|&c| {
            (0..manifest.entries.len())
                .filter(|&i| manifest.entries[i].class == c)
                .collect::<Vec<_>>()
        })
        .collect();
    for group in &mut groups {
        group.shuffle(&mut rng);
    }

    let n = manifest.entries.len();
    let f = manifest.train_fraction;
    let total_train = (n as f64 * f).floor() as usize;
    let mut quotas: Vec<usize> =
        groups.iter().map(|g| (g.len() as f64 * f).floor() as usize).collect();
    let mut remainder = total_train.saturating_sub(quotas.iter().sum::<usize>());
    let mut frac_order: Vec<usize> = (0..groups.len()).collect();
    frac_order.sort_by(|&a, &b| {
        let fa = groups[a].len() as f64 * f - quotas[a] as f64;
        let fb = groups[b].len() as f64 * f - quotas[b] as f64;
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &c in &frac_order {
        if remainder == 0 {
            break;
        }
        if quotas[c] < groups[c].len() {
            quotas[c] += 1;
            remainder -= 1;
        }
    }
    for (quota, group) in quotas.iter_mut().zip(&groups) {
        if group.len() >= 2 {
            *quota = (*quota).clamp(1, group.len() - 1);
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (group, &quota) in groups.iter().zip(&quotas) {
        train.extend_from_slice(&group[..quota]);
        test.extend_from_slice(&group[quota..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Mean cross-validated F-measure for one regularization strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambda: f64,
    pub mean_f_measure: f64,
}

/// 5-fold (or `folds`-fold) cross-validation over a lambda grid on the
/// training split only. Folds are stratified and seeded from `hp.seed`.
/// Returns per-lambda mean F plus the winning lambda (ties break toward the
/// earlier grid entry).
pub fn cross_validate(
    samples: &[(&FeatureVector, ClassTag)],
    grid: &[f64],
    folds: usize,
    hp: &Hyperparams,
) -> Result<(f64, Vec<CvResult>), TrainError> {
    assert!(folds >= 2, "need at least two folds");
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut fold_of = vec![0usize; samples.len()];
    for class in [ClassTag::Malicious, ClassTag::Benign] {
        let mut members: Vec<usize> = (0..samples.len())
            .filter(|&i| samples[i].1 == class)
            .collect();
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            fold_of[i] = pos % folds;
        }
    }

    let mut results = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let hp_l = Hyperparams { lambda, ..*hp };
        let mut f_sum = 0.0;
        let mut f_count = 0usize;
        for fold in 0..folds {
            let train_part: Vec<(&FeatureVector, ClassTag)> = samples
                .iter()
                .zip(&fold_of)
                .filter(|&(_, &f)| f != fold)
                .map(|(&s, _)| s)
                .collect();
            let held: Vec<(&FeatureVector, ClassTag)> = samples
                .iter()
                .zip(&fold_of)
                .filter(|&(_, &f)| f == fold)
                .map(|(&s, _)| s)
                .collect();
            if held.is_empty() {
                continue;
            }
            let model = train(&train_part, &hp_l)?;
            let report = evaluate(&model, &held).expect("held fold is non-empty");
            f_sum += report.f_measure;
            f_count += 1;
        }
        let mean = if f_count == 0 { 0.0 } else { f_sum / f_count as f64 };
        results.push(CvResult { lambda, mean_f_measure: mean });
    }
    let best = results
        .iter()
        .max_by(|a, b| {
            a.mean_f_measure
                .partial_cmp(&b.mean_f_measure)
                .unwrap()
                .then(b.lambda.partial_cmp(&a.lambda).unwrap())
        })
        .map(|r| r.lambda)
        .unwrap_or(hp.lambda);
    Ok((best, results))
}
