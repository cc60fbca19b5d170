//! Sentence classifiers: bag-of-words or TF-IDF features feeding an
//! L2-regularised logistic regression, or an external model behind the
//! adapter protocol.

mod features;
mod metrics;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapter::{AdapterClient, AdapterError};
use crate::corpus::LabeledExample;
use crate::rng;

pub use features::{featurize_bow, featurize_tfidf, fit_tfidf, tokenize, FeatureVector, Vocabulary};
pub use metrics::{Metrics, DEFAULT_THRESHOLD};

pub const MODEL_FORMAT: &str = "nspg-classifier";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("cannot fit features on an empty corpus")]
    EmptyCorpus,
    #[error("degenerate labels: training data must contain both classes")]
    DegenerateLabels,
    #[error("cannot evaluate on an empty set")]
    EmptySet,
    #[error("invalid hyperparameters: {0}")]
    Hyperparameters(String),
    #[error("model kind {0} has no built-in scorer")]
    NotBuiltIn(ModelKind),
    #[error("model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse model: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(
        "unsupported model format {format:?} version {version} (expected {MODEL_FORMAT:?} version {MODEL_VERSION})"
    )]
    Version { format: String, version: u32 },
    #[error("inconsistent model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "bow-logreg")]
    BowLogreg,
    #[serde(rename = "tfidf-logreg")]
    TfidfLogreg,
    #[serde(rename = "adapter")]
    Adapter,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::BowLogreg => "bow-logreg",
            ModelKind::TfidfLogreg => "tfidf-logreg",
            ModelKind::Adapter => "adapter",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bow" | "bow-logreg" => Ok(ModelKind::BowLogreg),
            "tfidf" | "tfidf-logreg" => Ok(ModelKind::TfidfLogreg),
            "adapter" => Ok(ModelKind::Adapter),
            _ => Err(format!(
                "unknown classifier kind {s:?} (expected bow-logreg, tfidf-logreg or adapter)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            learning_rate: 0.1,
            epochs: 300,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl Hyperparameters {
    fn validate(&self) -> Result<(), ClassifyError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ClassifyError::Hyperparameters(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(ClassifyError::Hyperparameters(format!(
                "L2 {} must be non-negative",
                self.l2
            )));
        }
        Ok(())
    }
}

/// A trained linear classifier, or a pointer to an external one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub vocabulary: Vocabulary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idf: Option<Vec<f64>>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparameters: Hyperparameters,
    /// Adapter endpoint for `adapter` models.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
}

/// Anything that maps sentence text to a property score in `[0, 1]`.
pub trait Scorer: Sync {
    fn score(&self, text: &str) -> Result<f64, ClassifyError>;
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl ClassifierModel {
    /// A model pointing at an external classifier.
    pub fn adapter(endpoint: &str) -> Self {
        ClassifierModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            kind: ModelKind::Adapter,
            vocabulary: Vocabulary::default(),
            idf: None,
            weights: Vec::new(),
            bias: 0.0,
            hyperparameters: Hyperparameters::default(),
            endpoint: Some(endpoint.to_string()),
        }
    }

    pub fn featurize(&self, text: &str) -> Result<FeatureVector, ClassifyError> {
        match (self.kind, &self.idf) {
            (ModelKind::BowLogreg, _) => Ok(featurize_bow(text, &self.vocabulary)),
            (ModelKind::TfidfLogreg, Some(idf)) => Ok(featurize_tfidf(text, &self.vocabulary, idf)),
            (ModelKind::TfidfLogreg, None) => Err(ClassifyError::Invalid("tfidf model without idf".into())),
            (ModelKind::Adapter, _) => Err(ClassifyError::NotBuiltIn(self.kind)),
        }
    }

    /// Linear score before the sigmoid.
    pub fn decision(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    /// Sigmoid of the linear score.
    pub fn predict(&self, text: &str) -> Result<f64, ClassifyError> {
        Ok(sigmoid(self.decision(&self.featurize(text)?)))
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        if self.format != MODEL_FORMAT || self.version != MODEL_VERSION {
            return Err(ClassifyError::Version {
                format: self.format.clone(),
                version: self.version,
            });
        }
        let bad = |m: String| Err(ClassifyError::Invalid(m));
        match self.kind {
            ModelKind::Adapter => {
                if self.endpoint.is_none() {
                    return bad("adapter model without endpoint".into());
                }
            }
            kind => {
                if self.weights.len() != self.vocabulary.len() {
                    return bad(format!(
                        "{} weights for {} vocabulary terms",
                        self.weights.len(),
                        self.vocabulary.len()
                    ));
                }
                match (&self.idf, kind) {
                    (Some(idf), ModelKind::TfidfLogreg) if idf.len() != self.vocabulary.len() => {
                        return bad(format!("{} idf values for {} terms", idf.len(), self.vocabulary.len()))
                    }
                    (None, ModelKind::TfidfLogreg) => return bad("tfidf model without idf".into()),
                    (Some(_), ModelKind::BowLogreg) => return bad("bow model with idf".into()),
                    _ => {}
                }
                let finite = self
                    .weights
                    .iter()
                    .chain(self.idf.iter().flatten())
                    .all(|v| v.is_finite());
                if !finite || !self.bias.is_finite() {
                    return bad("non-finite parameter".into());
                }
            }
        }
        Ok(())
    }
}

impl Scorer for ClassifierModel {
    fn score(&self, text: &str) -> Result<f64, ClassifyError> {
        self.predict(text)
    }
}

/// Scores by asking an external model.
pub struct AdapterScorer {
    client: AdapterClient,
}

impl AdapterScorer {
    pub fn new(client: AdapterClient) -> Self {
        AdapterScorer { client }
    }
}

impl Scorer for AdapterScorer {
    fn score(&self, text: &str) -> Result<f64, ClassifyError> {
        Ok(self.client.classify(text)?)
    }
}

/// Scores 1 for sentences labeled positive and 0 for those labeled negative.
/// Unknown sentences are an error.
#[derive(Debug, Clone, Default)]
pub struct LabelOracle {
    labels: std::collections::HashMap<String, u8>,
}

impl LabelOracle {
    pub fn new(examples: &[LabeledExample]) -> Result<Self, ClassifyError> {
        let mut labels = std::collections::HashMap::new();
        for e in examples {
            if let Some(prev) = labels.insert(e.record.text.clone(), e.label) {
                if prev != e.label {
                    return Err(ClassifyError::Invalid(format!(
                        "sentence {:?} carries both labels",
                        e.record.text
                    )));
                }
            }
        }
        Ok(LabelOracle { labels })
    }
}

impl Scorer for LabelOracle {
    fn score(&self, text: &str) -> Result<f64, ClassifyError> {
        self.labels
            .get(text)
            .map(|&l| f64::from(l))
            .ok_or_else(|| ClassifyError::Invalid(format!("no label for sentence {text:?}")))
    }
}

/// Mean logistic loss plus `l2 / 2 * |w|^2` (bias unregularised).
fn loss(xs: &[FeatureVector], ys: &[f64], w: &[f64], b: f64, l2: f64) -> f64 {
    let n = xs.len() as f64;
    let data: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = x.dot(w) + b;
            softplus(z) - y * z
        })
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

/// Trained model together with the loss after each epoch (index 0 is the
/// loss of the zero-initialised model).
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ClassifierModel,
    pub losses: Vec<f64>,
}

/// Full-batch gradient descent from zero weights.
pub fn train_logreg(
    examples: &[LabeledExample],
    kind: ModelKind,
    hp: Hyperparameters,
) -> Result<TrainOutcome, ClassifyError> {
    hp.validate()?;
    if kind == ModelKind::Adapter {
        return Err(ClassifyError::NotBuiltIn(kind));
    }
    let has_pos = examples.iter().any(|e| e.label == 1);
    let has_neg = examples.iter().any(|e| e.label == 0);
    if !(has_pos && has_neg) {
        return Err(ClassifyError::DegenerateLabels);
    }
    let texts: Vec<&str> = examples.iter().map(|e| e.record.text.as_str()).collect();
    let (vocabulary, idf) = match kind {
        ModelKind::TfidfLogreg => {
            let (v, idf) = fit_tfidf(&texts)?;
            (v, Some(idf))
        }
        _ => (Vocabulary::build(&texts), None),
    };
    let mut model = ClassifierModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        kind,
        weights: vec![0.0; vocabulary.len()],
        vocabulary,
        idf,
        bias: 0.0,
        hyperparameters: hp,
        endpoint: None,
    };
    let xs: Vec<FeatureVector> = texts.iter().map(|t| model.featurize(t)).collect::<Result<_, _>>()?;
    let ys: Vec<f64> = examples.iter().map(|e| f64::from(e.label)).collect();
    let n = xs.len() as f64;

    let mut losses = Vec::with_capacity(hp.epochs + 1);
    losses.push(loss(&xs, &ys, &model.weights, model.bias, hp.l2));
    let mut grad = vec![0.0; model.weights.len()];
    for _ in 0..hp.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (x, &y) in xs.iter().zip(&ys) {
            let err = sigmoid(model.decision(x)) - y;
            for &(i, v) in &x.entries {
                grad[i] += err * v;
            }
            grad_b += err;
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= hp.learning_rate * (g / n + hp.l2 * *w);
        }
        model.bias -= hp.learning_rate * grad_b / n;
        losses.push(loss(&xs, &ys, &model.weights, model.bias, hp.l2));
    }
    Ok(TrainOutcome { model, losses })
}

/// Scores in input order.
pub fn score_all(scorer: &dyn Scorer, texts: &[&str]) -> Result<Vec<f64>, ClassifyError> {
    texts.par_iter().map(|t| scorer.score(t)).collect()
}

/// Confusion counts with "positive iff score > threshold".
pub fn evaluate(scorer: &dyn Scorer, set: &[LabeledExample], threshold: f64) -> Result<Metrics, ClassifyError> {
    if set.is_empty() {
        return Err(ClassifyError::EmptySet);
    }
    let texts: Vec<&str> = set.iter().map(|e| e.record.text.as_str()).collect();
    let scores = score_all(scorer, &texts)?;
    let labels: Vec<u8> = set.iter().map(|e| e.label).collect();
    Ok(Metrics::from_scores(&scores, &labels, threshold))
}

pub fn model_to_json(model: &ClassifierModel) -> Result<String, ClassifyError> {
    model.validate()?;
    Ok(serde_json::to_string_pretty(model)? + "\n")
}

pub fn model_from_json(text: &str) -> Result<ClassifierModel, ClassifyError> {
    #[derive(Deserialize)]
    struct Header {
        format: String,
        version: u32,
    }
    let header: Header = serde_json::from_str(text)?;
    if header.format != MODEL_FORMAT || header.version != MODEL_VERSION {
        return Err(ClassifyError::Version {
            format: header.format,
            version: header.version,
        });
    }
    let model: ClassifierModel = serde_json::from_str(text)?;
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &ClassifierModel, path: &Path) -> Result<(), ClassifyError> {
    let json = model_to_json(model)?;
    std::fs::write(path, json).map_err(|source| ClassifyError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<ClassifierModel, ClassifyError> {
    let text = std::fs::read_to_string(path).map_err(|source| ClassifyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    model_from_json(&text)
}

/// Stratified k-fold assignment: fold index per example.
pub fn stratified_folds(labels: &[u8], k: usize, seed: u64) -> Vec<usize> {
    let mut folds = vec![0; labels.len()];
    let mut rng = rng::seeded(seed);
    let mut offset = 0;
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..labels.len())
            .filter(|&i| (labels[i] == 1) == (class == 1))
            .collect();
        idx.shuffle(&mut rng);
        for (j, i) in idx.into_iter().enumerate() {
            folds[i] = (j + offset) % k;
        }
        offset += labels.iter().filter(|&&l| (l == 1) == (class == 1)).count();
    }
    folds
}

/// Per-fold validation metrics of k-fold cross-validation.
pub fn cross_validate(
    examples: &[LabeledExample],
    kind: ModelKind,
    hp: Hyperparameters,
    k: usize,
    seed: u64,
) -> Result<Vec<Metrics>, ClassifyError> {
    if k < 2 || examples.len() < k {
        return Err(ClassifyError::Hyperparameters(format!(
            "cannot run {k}-fold validation on {} examples",
            examples.len()
        )));
    }
    let labels: Vec<u8> = examples.iter().map(|e| e.label).collect();
    let folds = stratified_folds(&labels, k, seed);
    (0..k)
        .map(|f| {
            let (test, train): (Vec<_>, Vec<_>) = examples.iter().zip(&folds).partition(|(_, &fold)| fold == f);
            let train: Vec<LabeledExample> = train.into_iter().map(|(e, _)| e.clone()).collect();
            let test: Vec<LabeledExample> = test.into_iter().map(|(e, _)| e.clone()).collect();
            let model = train_logreg(&train, kind, hp)?.model;
            evaluate(&model, &test, DEFAULT_THRESHOLD)
        })
        .collect()
}

/// Share of the most frequent label.
pub fn majority_rate(examples: &[LabeledExample]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let pos = examples.iter().filter(|e| e.label == 1).count();
    pos.max(examples.len() - pos) as f64 / examples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentenceRecord;

    fn ex(i: usize, text: &str, label: u8) -> LabeledExample {
        LabeledExample::new(SentenceRecord::new(format!("t#{i}"), "t", "", text), label).unwrap()
    }

    pub(crate) fn separable() -> Vec<LabeledExample> {
        let pos = [
            "the key must be locked",
            "the key must be wiped",
            "access must be denied",
            "the debug port must be locked",
        ];
        let neg = [
            "the block has two ports",
            "the clock runs at 100 MHz",
            "the block has a FIFO",
            "the manual describes the ports",
        ];
        pos.iter()
            .map(|t| (t, 1))
            .chain(neg.iter().map(|t| (t, 0)))
            .enumerate()
            .map(|(i, (t, l))| ex(i, t, l))
            .collect()
    }

    #[test]
    fn separable_fixture_is_learned() {
        let data = separable();
        for kind in [ModelKind::BowLogreg, ModelKind::TfidfLogreg] {
            let out = train_logreg(&data, kind, Hyperparameters::default()).unwrap();
            let m = evaluate(&out.model, &data, DEFAULT_THRESHOLD).unwrap();
            assert_eq!(m.accuracy, 1.0, "{kind}");
            for w in out.losses.windows(2) {
                assert!(w[1] <= w[0] + 1e-15);
            }
        }
    }

    #[test]
    fn zero_epochs_give_half() {
        let hp = Hyperparameters {
            epochs: 0,
            ..Default::default()
        };
        let out = train_logreg(&separable(), ModelKind::BowLogreg, hp).unwrap();
        assert!(out.model.weights.iter().all(|&w| w == 0.0));
        assert_eq!(out.model.predict("the key must be locked").unwrap(), 0.5);
        let m = evaluate(&out.model, &separable(), 0.5).unwrap();
        assert_eq!(m.tp + m.fp, 0);
    }

    #[test]
    fn single_class_is_rejected() {
        let data: Vec<_> = separable().into_iter().filter(|e| e.label == 1).collect();
        let err = train_logreg(&data, ModelKind::BowLogreg, Hyperparameters::default()).unwrap_err();
        assert!(err.to_string().contains("degenerate labels"));
        assert!(matches!(
            evaluate(&ClassifierModel::adapter("tcp://x:1"), &[], 0.5),
            Err(ClassifyError::EmptySet)
        ));
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let model = train_logreg(&separable(), ModelKind::TfidfLogreg, Hyperparameters::default())
            .unwrap()
            .model;
        let json = model_to_json(&model).unwrap();
        let back = model_from_json(&json).unwrap();
        assert_eq!(back, model);
        for (a, b) in back.weights.iter().zip(&model.weights) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(matches!(
            model_from_json(&json[..json.len() / 2]),
            Err(ClassifyError::Parse(_))
        ));
        let bumped = json.replacen("\"version\": 1", "\"version\": 2", 1);
        assert!(matches!(model_from_json(&bumped), Err(ClassifyError::Version { .. })));
    }

    #[test]
    fn folds_are_stratified() {
        let labels = [1, 1, 1, 1, 0, 0, 0, 0, 0, 0];
        let folds = stratified_folds(&labels, 2, 3);
        for f in 0..2 {
            let pos = (0..10).filter(|&i| folds[i] == f && labels[i] == 1).count();
            assert_eq!(pos, 2);
        }
    }
}
