use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adapt::{Ablation, AdaptConfig};
use crate::error::{Error, Result};
use crate::geometry::SamplingParams;
use crate::model::ModelConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source_train: usize,
    pub target_train: usize,
    pub target_test: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source_train: 3,
            target_train: 20,
            target_test: 8,
        }
    }
}

/// RMSProp without momentum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimConfig {
    pub lr: f64,
    pub rho: f64,
    pub eps: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            lr: 1e-3,
            rho: 0.99,
            eps: 1e-8,
        }
    }
}

/// Meshes drawn per domain per step; each contributes `sampling.n` points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    pub meshes_per_domain: usize,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig { meshes_per_domain: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PretrainConfig {
    pub max_epochs: usize,
    pub steps_per_epoch: usize,
    pub target_accuracy: f64,
    /// Held-out labelled points per source mesh used for the stopping rule.
    pub holdout_points: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        PretrainConfig {
            max_epochs: 200,
            steps_per_epoch: 8,
            target_accuracy: 0.9,
            holdout_points: 512,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptLoopConfig {
    pub epochs: usize,
    pub steps_per_epoch: usize,
    /// The target point pool is redrawn every this many epochs.
    pub pool_resample_every: usize,
    /// Labelled source points per mesh searched for neighbours.
    pub reference_points: usize,
    /// Grid resolution of the per-epoch monitoring reconstruction; 0 disables it.
    pub monitor_grid: usize,
}

impl Default for AdaptLoopConfig {
    fn default() -> Self {
        AdaptLoopConfig {
            epochs: 90,
            steps_per_epoch: 2,
            pool_resample_every: 10,
            reference_points: 512,
            monitor_grid: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub grid: usize,
    pub samples: usize,
    pub min_fraction: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            grid: 64,
            samples: 10_000,
            min_fraction: crate::surface::DEFAULT_MIN_FRACTION,
        }
    }
}

/// Everything that determines a run. Serialized next to every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Adaptation variants run by `experiment`, by ablation name (`full`,
    /// `no_mmd`, ...).
    pub variants: Vec<String>,
    pub output_dir: Option<PathBuf>,
    pub data: DataConfig,
    pub sampling: SamplingParams,
    pub batch: BatchConfig,
    pub model: ModelConfig,
    pub adapt: AdaptConfig,
    pub optim: OptimConfig,
    pub pretrain: PretrainConfig,
    pub adaptation: AdaptLoopConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            variants: vec!["full".into()],
            output_dir: None,
            data: DataConfig::default(),
            sampling: SamplingParams {
                n: 128,
                ..SamplingParams::default()
            },
            batch: BatchConfig::default(),
            model: ModelConfig::default(),
            adapt: AdaptConfig::default(),
            optim: OptimConfig::default(),
            pretrain: PretrainConfig::default(),
            adaptation: AdaptLoopConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let d = &self.data;
        if d.source_train == 0 || d.target_train == 0 || d.target_test == 0 {
            return Err(Error::Config("dataset sizes must be positive".into()));
        }
        if self.batch.meshes_per_domain == 0 || self.sampling.n == 0 {
            return Err(Error::Config("batches must contain points".into()));
        }
        if self.batch.meshes_per_domain > d.target_train {
            return Err(Error::Config("more target meshes per step than target meshes".into()));
        }
        if self.adapt.k == 0 || self.adapt.k > self.adaptation.reference_points * d.source_train {
            return Err(Error::Config("K must be in 1..=source reference points".into()));
        }
        if self.adaptation.pool_resample_every == 0 {
            return Err(Error::Config("pool_resample_every must be positive".into()));
        }
        if self.eval.grid < 16 {
            return Err(Error::Config("evaluation grid must be at least 16".into()));
        }
        for v in &self.variants {
            Ablation::from_name(v)?;
        }
        Ok(())
    }

    /// Adaptation settings of the named variant.
    pub fn variant(&self, name: &str) -> Result<AdaptConfig> {
        Ok(AdaptConfig {
            ablation: Ablation::from_name(name)?,
            ..self.adapt.clone()
        })
    }
}
