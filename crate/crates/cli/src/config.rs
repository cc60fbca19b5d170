//! Run configuration, read from a TOML file.
//!
//! ```toml
//! seed = 7
//! min_words = 10
//! threshold = 0.5
//! sim_threshold = 0.5
//! variant = "mot"
//! conjunctions = ["when", "if", "to", "while", "before", "after", "until", "unless", "upon", "once", "whenever"]
//!
//! [lexicon]
//! synonyms = "lexicon/synonyms.tsv"
//! adverbs = "lexicon/adverbs.txt"
//! conjunctions = "lexicon/conjunctions.txt"
//!
//! [classifier]
//! kind = "tfidf-logreg"
//! learning_rate = 0.1
//! epochs = 300
//! l2 = 0.0001
//!
//! [adapter]
//! endpoint = "tcp://127.0.0.1:7000"
//! timeout_secs = 30
//!
//! [augment]
//! ops = ["RS", "RD", "SR", "RI"]
//! multiplicity = 1
//!
//! [assertgen]
//! clock = "clk"
//! reset = "rst"
//! ```
//!
//! Relative paths resolve against the directory holding the file. Every key
//! is optional; command-line flags take precedence.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use nspg_core::adapter::{Endpoint, DEFAULT_TIMEOUT};
use nspg_core::classify::{Hyperparameters, ModelKind};
use nspg_core::lexicon::{ConjunctionSet, Lexicon, LexiconPaths};

pub const ADAPTER_ENV: &str = "NSPG_ADAPTER";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub min_words: Option<usize>,
    pub threshold: Option<f64>,
    pub sim_threshold: Option<f64>,
    pub variant: Option<String>,
    pub conjunctions: Option<Vec<String>>,
    #[serde(default)]
    pub lexicon: LexiconSection,
    #[serde(default)]
    pub classifier: ClassifierSection,
    #[serde(default)]
    pub adapter: AdapterSection,
    #[serde(default)]
    pub augment: AugmentSection,
    #[serde(default)]
    pub assertgen: AssertgenSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconSection {
    pub synonyms: Option<PathBuf>,
    pub adverbs: Option<PathBuf>,
    pub conjunctions: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSection {
    pub kind: Option<String>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub l2: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdapterSection {
    pub endpoint: Option<String>,
    pub timeout_secs: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    pub ops: Option<Vec<String>>,
    pub multiplicity: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssertgenSection {
    pub clock: Option<String>,
    pub reset: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.lexicon.synonyms,
            &mut cfg.lexicon.adverbs,
            &mut cfg.lexicon.conjunctions,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.is_file() {
                bail!(
                    "config {}: referenced file {} does not exist",
                    path.display(),
                    p.display()
                );
            }
        }
        if cfg.conjunctions.is_some() && cfg.lexicon.conjunctions.is_some() {
            bail!(
                "config {}: set either conjunctions or lexicon.conjunctions, not both",
                path.display()
            );
        }
        Ok(cfg)
    }

    pub fn lexicon(&self) -> Result<Lexicon> {
        let paths = LexiconPaths {
            synonyms: self.lexicon.synonyms.clone(),
            adverbs: self.lexicon.adverbs.clone(),
            conjunctions: self.lexicon.conjunctions.clone(),
        };
        let lex = match &self.conjunctions {
            Some(words) => Lexicon::load_with_conjunctions(&paths, ConjunctionSet::new(words)?)?,
            None => Lexicon::load(&paths)?,
        };
        Ok(lex)
    }

    /// Randomized steps refuse to run without an explicit seed.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        match flag.or(self.seed) {
            Some(s) => Ok(s),
            None => bail!("a seed is required: pass --seed or set seed in the config"),
        }
    }

    pub fn hyperparameters(&self, seed: u64) -> Hyperparameters {
        let d = Hyperparameters::default();
        Hyperparameters {
            learning_rate: self.classifier.learning_rate.unwrap_or(d.learning_rate),
            epochs: self.classifier.epochs.unwrap_or(d.epochs),
            l2: self.classifier.l2.unwrap_or(d.l2),
            seed,
        }
    }

    pub fn kind(&self) -> Result<Option<ModelKind>> {
        self.classifier
            .kind
            .as_deref()
            .map(|k| k.parse::<ModelKind>().map_err(anyhow::Error::msg))
            .transpose()
    }

    /// Flag, then `NSPG_ADAPTER`, then the config file.
    pub fn adapter_endpoint(&self, flag: Option<&str>) -> Result<Option<Endpoint>> {
        let env = std::env::var(ADAPTER_ENV).ok().filter(|s| !s.trim().is_empty());
        let chosen = flag
            .map(str::to_string)
            .or(env)
            .or_else(|| self.adapter.endpoint.clone());
        chosen
            .map(|s| {
                s.parse::<Endpoint>()
                    .map_err(|e| anyhow::anyhow!("bad adapter endpoint: {e}"))
            })
            .transpose()
    }

    pub fn adapter_timeout(&self) -> Result<Duration> {
        match self.adapter.timeout_secs {
            None => Ok(DEFAULT_TIMEOUT),
            Some(s) if s.is_finite() && s > 0.0 => Ok(Duration::from_secs_f64(s)),
            Some(s) => bail!("adapter timeout {s} must be positive"),
        }
    }
}
