//! Unsupervised domain adaptation: feature alignment, source supervision,
//! neighbourhood pseudo-labels and a diversity term.
//!
//! Source points carry occupancy labels; target points are positions only,
//! so the type system keeps target ground truth out of every loss.

mod check;
mod losses;
mod pseudo;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use losses::{
    forward_batch, loss_mi, loss_mi_values, loss_sim, loss_source, loss_target, median_bandwidth, mmd_layer,
    total_loss, view_features, BatchForward, LossReport,
};
pub use check::{check_batch, check_model_config, gradcheck_losses, TermCheck};
pub use pseudo::{aggregate_neighbours, knn_indices, reweight, update_pseudo_labels, PseudoLabelState};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::raster::RasterInput;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourcePoint {
    pub position: Vec3,
    pub label: u8,
}

/// A target query point. There is deliberately no label field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetPoint {
    pub position: Vec3,
}

/// Points queried against a single rendered view.
#[derive(Clone, Debug)]
pub struct View<P> {
    pub raster: Arc<RasterInput>,
    pub points: Vec<P>,
}

#[derive(Clone, Debug)]
pub struct DomainBatch {
    pub source: Vec<View<SourcePoint>>,
    pub target: Vec<View<TargetPoint>>,
}

impl DomainBatch {
    pub fn n_source(&self) -> usize {
        self.source.iter().map(|v| v.points.len()).sum()
    }

    pub fn n_target(&self) -> usize {
        self.target.iter().map(|v| v.points.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_source() == 0 || self.n_target() == 0 {
            return Err(Error::InvalidArgument("batch needs source and target points".into()));
        }
        if let Some(p) = self.source.iter().flat_map(|v| &v.points).find(|p| p.label > 1) {
            return Err(Error::InvalidArgument(format!("source label {} not in {{0,1}}", p.label)));
        }
        Ok(())
    }

    pub fn source_labels(&self) -> Vec<f64> {
        self.source
            .iter()
            .flat_map(|v| v.points.iter().map(|p| p.label as f64))
            .collect()
    }
}

/// Linear ramp `clamp((epoch - start_epoch) / epoch_total, 0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    pub start_epoch: usize,
    pub epoch_total: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            start_epoch: 30,
            epoch_total: 60,
        }
    }
}

impl Schedule {
    pub fn ramp(&self, epoch: usize) -> f64 {
        if self.epoch_total == 0 {
            return if epoch >= self.start_epoch { 1.0 } else { 0.0 };
        }
        ((epoch as f64 - self.start_epoch as f64) / self.epoch_total as f64).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub w1: f64,
    pub w2: f64,
    pub schedule: Schedule,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            w1: 5.0,
            w2: 2.0,
            schedule: Schedule::default(),
        }
    }
}

impl LossWeights {
    /// `(w3, w4)` at `epoch`.
    pub fn scheduled(&self, epoch: usize) -> (f64, f64) {
        let m = self.schedule.ramp(epoch);
        (m, m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "policy", content = "value")]
pub enum Bandwidth {
    Median,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ablation {
    pub no_mmd: bool,
    pub no_source: bool,
    pub no_target: bool,
    pub no_mi: bool,
    pub no_multilevel: bool,
    pub no_rescale: bool,
}

impl Ablation {
    pub fn none() -> Self {
        Ablation::default()
    }

    /// Parses one of `full`, `no_mmd`, `no_source`, `no_target`, `no_mi`,
    /// `no_multilevel`, `no_rescale`.
    pub fn from_name(name: &str) -> Result<Self> {
        let mut a = Ablation::default();
        match name {
            "full" => {}
            "no_mmd" => a.no_mmd = true,
            "no_source" => a.no_source = true,
            "no_target" => a.no_target = true,
            "no_mi" => a.no_mi = true,
            "no_multilevel" => a.no_multilevel = true,
            "no_rescale" => a.no_rescale = true,
            other => return Err(Error::Config(format!("unknown ablation '{other}'"))),
        }
        Ok(a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptConfig {
    pub weights: LossWeights,
    pub k: usize,
    pub depth_scale: f64,
    pub bandwidth: Bandwidth,
    pub ablation: Ablation,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            weights: LossWeights::default(),
            k: 8,
            depth_scale: 256.0,
            bandwidth: Bandwidth::Median,
            ablation: Ablation::none(),
        }
    }
}

impl AdaptConfig {
    pub fn effective_depth_scale(&self) -> f64 {
        if self.ablation.no_rescale {
            1.0
        } else {
            self.depth_scale
        }
    }

    /// Feature levels that take part in alignment and prediction.
    pub fn levels(&self, total: usize) -> Vec<usize> {
        if self.ablation.no_multilevel {
            vec![total - 1]
        } else {
            (0..total).collect()
        }
    }
}
