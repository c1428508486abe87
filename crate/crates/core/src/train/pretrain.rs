use rand::seq::IndexedRandom;

use crate::adapt::{loss_source, view_features, SourcePoint, View};
use crate::autodiff::Graph;
use crate::error::{Error, Result};
use crate::model::OccupancyModel;
use crate::rng::{derive_seed, seeded};

use super::data::{Dataset, SourceShape};
use super::log::PretrainEpoch;
use super::optim::RmsProp;
use super::{stream, RunConfig};

#[derive(Clone, Debug)]
pub struct PretrainOutcome {
    pub model: OccupancyModel,
    pub log: Vec<PretrainEpoch>,
    /// Whether the accuracy target was met before the epoch cap.
    pub converged: bool,
}

/// Fixed held-out labelled points on the source meshes.
pub fn source_holdout(cfg: &RunConfig, data: &Dataset) -> Result<Vec<View<SourcePoint>>> {
    source_holdout_views(cfg, &data.source)
}

pub(super) fn source_holdout_views(cfg: &RunConfig, shapes: &[SourceShape]) -> Result<Vec<View<SourcePoint>>> {
    let params = crate::geometry::SamplingParams {
        n: cfg.pretrain.holdout_points,
        ..cfg.sampling.clone()
    };
    shapes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(View {
                raster: s.raster.clone(),
                points: s.sample(&params, derive_seed(cfg.seed, stream::HOLDOUT, i as u64))?,
            })
        })
        .collect()
}

/// Fraction of points whose fused prediction falls on the labelled side of 0.5.
pub fn accuracy(model: &OccupancyModel, views: &[View<SourcePoint>], levels: &[usize]) -> Result<f64> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for v in views {
        let stack = model.encode(&v.raster)?;
        let pts: Vec<_> = v.points.iter().map(|p| p.position).collect();
        let preds = model.predict_with_stack(&stack, levels, &pts)?;
        for (p, q) in preds.iter().zip(&v.points) {
            hits += ((p.fused > 0.5) == (q.label == 1)) as usize;
        }
        total += v.points.len();
    }
    Ok(hits as f64 / total.max(1) as f64)
}

/// Labelled source batch: `meshes_per_domain` meshes drawn with replacement,
/// `sampling.n` fresh points each.
pub fn source_batch(cfg: &RunConfig, shapes: &[SourceShape], seed: u64) -> Result<Vec<View<SourcePoint>>> {
    let mut rng = seeded(seed);
    (0..cfg.batch.meshes_per_domain)
        .map(|slot| {
            let s = shapes.choose(&mut rng).expect("non-empty source set");
            Ok(View {
                raster: s.raster.clone(),
                points: s.sample(&cfg.sampling, derive_seed(seed, 1, slot as u64))?,
            })
        })
        .collect()
}

/// Minimises the source loss until held-out accuracy reaches the target or
/// the epoch cap is hit.
pub fn pretrain_source(cfg: &RunConfig, data: &Dataset) -> Result<PretrainOutcome> {
    let mut model = OccupancyModel::new(cfg.model.clone(), derive_seed(cfg.seed, stream::INIT, 0))?;
    let levels = model.all_levels();
    let holdout = source_holdout(cfg, data)?;
    let mut opt = RmsProp::new(cfg.optim.clone());
    let mut log = Vec::new();
    let mut converged = false;
    for epoch in 0..cfg.pretrain.max_epochs {
        let mut loss_sum = 0.0;
        for step in 0..cfg.pretrain.steps_per_epoch {
            let seed = derive_seed(cfg.seed, stream::PRETRAIN_BATCH, (epoch * cfg.pretrain.steps_per_epoch + step) as u64);
            let views = source_batch(cfg, &data.source, seed)?;
            let labels: Vec<f64> = views.iter().flat_map(|v| v.points.iter().map(|p| p.label as f64)).collect();
            let mut g = Graph::new();
            let feats = view_features(&mut g, &model, &views, &levels, |p| p.position)?;
            let outs = feats.iter().map(|&f| model.decode_in(&mut g, f)).collect::<Result<Vec<_>>>()?;
            let loss = loss_source(&mut g, &outs, &labels)?;
            let value = g.scalar_value(loss);
            if !value.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    reason: format!("source loss {value}"),
                });
            }
            g.backward(loss, model.params_mut())?;
            opt.step(model.params_mut());
            loss_sum += value;
        }
        let acc = accuracy(&model, &holdout, &levels)?;
        log.push(PretrainEpoch {
            epoch,
            loss: loss_sum / cfg.pretrain.steps_per_epoch.max(1) as f64,
            accuracy: acc,
        });
        if acc >= cfg.pretrain.target_accuracy {
            converged = true;
            break;
        }
    }
    Ok(PretrainOutcome { model, log, converged })
}
