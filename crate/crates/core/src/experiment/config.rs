use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::instances::InstanceSpec;
use crate::eea::TailModel;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Algorithm {
    Pea,
    PeaModified,
    Aea,
    Oea,
    Eea,
    #[serde(rename = "eea_stage1log")]
    #[value(name = "eea_stage1log")]
    EeaStage1Log,
    OneAncilla,
    DirectSample,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pea => "pea",
            Algorithm::PeaModified => "pea_modified",
            Algorithm::Aea => "aea",
            Algorithm::Oea => "oea",
            Algorithm::Eea => "eea",
            Algorithm::EeaStage1Log => "eea_stage1log",
            Algorithm::OneAncilla => "one_ancilla",
            Algorithm::DirectSample => "direct_sample",
        }
    }

    /// Whether the algorithm works from an evolution oracle rather than a unitary.
    pub fn needs_hamiltonian(self) -> bool {
        matches!(self, Algorithm::Eea | Algorithm::EeaStage1Log | Algorithm::DirectSample)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

/// `[experiment]` section.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    algorithm: Option<Algorithm>,
    p: Option<f64>,
    c: Option<f64>,
    #[serde(rename = "K", alias = "k")]
    k: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    sweep: Option<Vec<f64>>,
    workers: Option<usize>,
    samples: Option<usize>,
    suppress_overlap: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    experiment: ExperimentSection,
    #[serde(default)]
    instance: InstanceSpec,
    tail: Option<TailModel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub instance: InstanceSpec,
    /// Directory that relative instance paths are resolved against.
    pub base_dir: PathBuf,
    pub p: f64,
    pub c: f64,
    pub k: Option<usize>,
    pub tail: Option<TailModel>,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<Vec<f64>>,
    pub workers: usize,
    /// Sample count for the sampling baselines; derived from `p` when absent.
    pub samples: Option<usize>,
    pub suppress_overlap: bool,
    /// Record wall-clock time per trial. Off by default so output is reproducible.
    pub wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Oea,
            instance: InstanceSpec::default(),
            base_dir: PathBuf::from("."),
            p: 0.05,
            c: 0.9,
            k: None,
            tail: None,
            trials: 100,
            seed: 0,
            sweep: None,
            workers: 1,
            samples: None,
            suppress_overlap: false,
            wall_time: false,
        }
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    /// Parses a TOML config. Keys absent from the file keep their defaults;
    /// an `algorithm` key is required unless `fallback_algorithm` is given.
    pub fn from_toml_str(text: &str, base_dir: &Path, fallback_algorithm: Option<Algorithm>) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
            message: e.message().to_string(),
        })?;
        let defaults = Self::default();
        let ex = file.experiment;
        let algorithm = ex
            .algorithm
            .or(fallback_algorithm)
            .ok_or_else(|| Error::Config("no algorithm given".into()))?;
        Ok(Self {
            algorithm,
            instance: file.instance,
            base_dir: base_dir.to_path_buf(),
            p: ex.p.unwrap_or(defaults.p),
            c: ex.c.unwrap_or(defaults.c),
            k: ex.k,
            tail: file.tail,
            trials: ex.trials.unwrap_or(defaults.trials),
            seed: ex.seed.unwrap_or(defaults.seed),
            sweep: ex.sweep,
            workers: ex.workers.unwrap_or(defaults.workers),
            samples: ex.samples,
            suppress_overlap: ex.suppress_overlap.unwrap_or(false),
            wall_time: false,
        })
    }

    pub fn load(path: &Path, fallback_algorithm: Option<Algorithm>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base, fallback_algorithm)
    }

    /// Precisions to run: the sweep list, or `p` alone.
    pub fn precisions(&self) -> Vec<f64> {
        self.sweep.clone().unwrap_or_else(|| vec![self.p])
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.precisions() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Config(format!("p = {p} outside (0, 1]")));
            }
        }
        if self.sweep.as_ref().is_some_and(|s| s.is_empty()) {
            return Err(Error::Config("sweep list is empty".into()));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::Config(format!("c = {} outside (0, 1)", self.c)));
        }
        if self.k == Some(0) {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.samples.is_some_and(|n| n < 2) {
            return Err(Error::Config("samples must be at least 2".into()));
        }
        if let Some(tail) = &self.tail {
            tail.validate().map_err(|e| Error::Config(format!("tail: {e}")))?;
        }
        Ok(())
    }
}
