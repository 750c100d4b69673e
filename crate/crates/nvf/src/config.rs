//! Training configuration file.

use std::fs;
use std::path::Path;

use nvf_core::encoding::{EncoderKind, HashGridConfig};
use nvf_core::neural::AdamConfig;
use nvf_core::trainer::{InputLayout, ModelConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Encoder {
    Vertex,
    Hashgrid,
}

impl From<Encoder> for EncoderKind {
    fn from(e: Encoder) -> Self {
        match e {
            Encoder::Vertex => EncoderKind::Vertex,
            Encoder::Hashgrid => EncoderKind::HashGrid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HashGridSpec {
    pub levels: u32,
    pub base_resolution: u32,
    pub per_level_scale: f64,
    pub features_per_level: u32,
    pub table_size_log2: u32,
}

impl Default for HashGridSpec {
    fn default() -> Self {
        HashGridConfig::default().into()
    }
}

impl From<HashGridConfig> for HashGridSpec {
    fn from(c: HashGridConfig) -> Self {
        HashGridSpec {
            levels: c.levels,
            base_resolution: c.base_resolution,
            per_level_scale: c.per_level_scale,
            features_per_level: c.features_per_level,
            table_size_log2: c.table_size_log2,
        }
    }
}

impl From<HashGridSpec> for HashGridConfig {
    fn from(c: HashGridSpec) -> Self {
        HashGridConfig {
            levels: c.levels,
            base_resolution: c.base_resolution,
            per_level_scale: c.per_level_scale,
            features_per_level: c.features_per_level,
            table_size_log2: c.table_size_log2,
        }
    }
}

/// Every training option; absent keys take their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingFile {
    pub total_steps: u64,
    pub batch_size: usize,
    pub m0: u32,
    pub adaptive_lod: bool,
    pub lod_cap_ratio: f64,
    pub alpha: f64,
    pub seed: u64,
    pub detach_rhs: bool,
    pub relative_loss: bool,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub lr_decay: f64,
    pub chunk_rows: usize,
    pub encoder: Encoder,
    pub feature_width: usize,
    pub hash_grid: HashGridSpec,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub sh_degree: u32,
    pub oneblob_bins: usize,
    /// Steps per row of the loss log.
    pub log_interval: u64,
}

impl Default for TrainingFile {
    fn default() -> Self {
        let t = TrainConfig::default();
        let m = ModelConfig::default();
        TrainingFile {
            total_steps: t.total_steps,
            batch_size: t.batch_size,
            m0: t.m0,
            adaptive_lod: t.adaptive_lod,
            lod_cap_ratio: t.lod_cap_ratio,
            alpha: t.alpha,
            seed: t.seed,
            detach_rhs: t.detach_rhs,
            relative_loss: t.relative_loss,
            learning_rate: t.adam.learning_rate,
            beta1: t.adam.beta1,
            beta2: t.adam.beta2,
            epsilon: t.adam.epsilon,
            lr_decay: t.adam.decay,
            chunk_rows: t.chunk_rows,
            encoder: Encoder::Vertex,
            feature_width: m.feature_width,
            hash_grid: m.hash_grid.into(),
            hidden_width: m.hidden_width,
            hidden_layers: m.hidden_layers,
            sh_degree: m.inputs.sh_degree,
            oneblob_bins: m.inputs.oneblob_bins,
            log_interval: 50,
        }
    }
}

impl TrainingFile {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            total_steps: self.total_steps,
            batch_size: self.batch_size,
            m0: self.m0,
            adaptive_lod: self.adaptive_lod,
            lod_cap_ratio: self.lod_cap_ratio,
            alpha: self.alpha,
            seed: self.seed,
            detach_rhs: self.detach_rhs,
            relative_loss: self.relative_loss,
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: self.epsilon,
                decay: self.lr_decay,
            },
            chunk_rows: self.chunk_rows,
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            encoder: self.encoder.into(),
            feature_width: self.feature_width,
            hash_grid: self.hash_grid.into(),
            hidden_width: self.hidden_width,
            hidden_layers: self.hidden_layers,
            inputs: InputLayout {
                sh_degree: self.sh_degree,
                oneblob_bins: self.oneblob_bins,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.train_config().validate()?;
        let m = self.model_config();
        m.inputs.validate()?;
        if m.encoder == EncoderKind::HashGrid {
            m.hash_grid.validate()?;
        }
        if self.feature_width == 0 || self.hidden_width == 0 {
            return Err(Error::Invalid("feature_width and hidden_width must be >= 1".into()));
        }
        if self.log_interval == 0 {
            return Err(Error::Invalid("log_interval must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn parse_training(text: &str, path: &Path) -> Result<TrainingFile> {
    let file: TrainingFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.validate()?;
    Ok(file)
}

pub fn load_training(path: &Path) -> Result<TrainingFile> {
    parse_training(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?, path)
}
