use rand::seq::index::sample;

use crate::adapt::{
    aggregate_neighbours, total_loss, update_pseudo_labels, view_features, AdaptConfig, DomainBatch, LossReport,
    PseudoLabelState, SourcePoint, TargetPoint, View,
};
use crate::autodiff::Graph;
use crate::error::{Error, Result};
use crate::geometry::SamplingParams;
use crate::model::OccupancyModel;
use crate::rng::{derive_seed, seeded};

use super::data::{SourceShape, TargetShape};
use super::log::{EpochLog, TrainLog};
use super::optim::RmsProp;
use super::pretrain::{accuracy, source_batch, source_holdout_views};
use super::{stream, RunConfig};

#[derive(Clone, Debug)]
pub struct AdaptOutcome {
    pub model: OccupancyModel,
    pub log: TrainLog,
}

struct Step {
    batch: DomainBatch,
    pool_index: Vec<usize>,
}

fn epoch_steps(
    cfg: &RunConfig,
    epoch: usize,
    sources: &[SourceShape],
    targets: &[TargetShape],
    pool: &[Vec<TargetPoint>],
) -> Result<Vec<Step>> {
    let spe = cfg.adaptation.steps_per_epoch;
    let per_mesh = pool[0].len();
    (0..spe)
        .map(|step| {
            let k = (epoch * spe + step) as u64;
            let source = source_batch(cfg, sources, derive_seed(cfg.seed, stream::ADAPT_SOURCE, k))?;
            let mut rng = seeded(derive_seed(cfg.seed, stream::ADAPT_TARGET, k));
            let chosen = sample(&mut rng, targets.len(), cfg.batch.meshes_per_domain).into_vec();
            let target = chosen
                .iter()
                .map(|&i| View {
                    raster: targets[i].raster().clone(),
                    points: pool[i].clone(),
                })
                .collect();
            let pool_index = chosen.iter().flat_map(|&i| (0..per_mesh).map(move |j| i * per_mesh + j)).collect();
            Ok(Step {
                batch: DomainBatch { source, target },
                pool_index,
            })
        })
        .collect()
}

/// `[layer][pool point]` values.
type PerLayer = Vec<Vec<f64>>;

/// Per-layer predictions on the whole target pool and their source
/// neighbourhood aggregates.
fn neighbourhood(
    model: &OccupancyModel,
    levels: &[usize],
    targets: &[TargetShape],
    pool: &[Vec<TargetPoint>],
    reference: &[View<SourcePoint>],
    cfg: &AdaptConfig,
) -> Result<(PerLayer, PerLayer)> {
    let mut g = Graph::new();
    let target_views: Vec<View<TargetPoint>> = targets
        .iter()
        .zip(pool)
        .map(|(t, p)| View {
            raster: t.raster().clone(),
            points: p.clone(),
        })
        .collect();
    let tf = view_features(&mut g, model, &target_views, levels, |p| p.position)?;
    let sf = view_features(&mut g, model, reference, levels, |p| p.position)?;
    let labels: Vec<f64> = reference.iter().flat_map(|v| v.points.iter().map(|p| p.label as f64)).collect();
    let mut preds = Vec::with_capacity(levels.len());
    let mut aggs = Vec::with_capacity(levels.len());
    for (&t, &s) in tf.iter().zip(&sf) {
        let o = model.decode_in(&mut g, t)?;
        preds.push(g.value(o).data().to_vec());
        aggs.push(aggregate_neighbours(
            g.value(t),
            g.value(s),
            &labels,
            cfg.k,
            cfg.effective_depth_scale(),
        )?);
    }
    Ok((preds, aggs))
}

#[derive(Default)]
struct TermMeans {
    n: usize,
    total: f64,
    sums: [Option<f64>; 4],
}

impl TermMeans {
    fn add(&mut self, r: &LossReport) {
        self.n += 1;
        self.total += r.total;
        for (acc, v) in self.sums.iter_mut().zip([r.sim, r.source, r.target, r.mi]) {
            if let Some(v) = v {
                *acc = Some(acc.unwrap_or(0.0) + v);
            }
        }
    }

    fn mean(&self, i: usize) -> Option<f64> {
        self.sums[i].map(|s| s / self.n as f64)
    }
}

/// Adapts `pretrained` to the target family. Only source shapes and the
/// label-free target training shapes are visible here. `monitor` is called
/// after every epoch with the current model and active levels; its value is
/// logged as `monitor_cd`.
pub fn adapt<M>(
    cfg: &RunConfig,
    sources: &[SourceShape],
    targets: &[TargetShape],
    pretrained: &OccupancyModel,
    variant: &AdaptConfig,
    mut monitor: M,
) -> Result<AdaptOutcome>
where
    M: FnMut(&OccupancyModel, &[usize]) -> Result<Option<f64>>,
{
    if targets.len() < cfg.batch.meshes_per_domain {
        return Err(Error::Config("not enough target meshes for a batch".into()));
    }
    let mut model = pretrained.clone();
    let levels = variant.levels(model.config().levels);
    let holdout = source_holdout_views(cfg, sources)?;
    let use_target = !variant.ablation.no_target;
    let ref_params = SamplingParams {
        n: cfg.adaptation.reference_points,
        ..cfg.sampling.clone()
    };
    let mut opt = RmsProp::new(cfg.optim.clone());
    let mut state = PseudoLabelState::default();
    let mut pool: Vec<Vec<TargetPoint>> = Vec::new();
    let mut reference: Vec<View<SourcePoint>> = Vec::new();
    let mut log = TrainLog::default();
    for epoch in 0..cfg.adaptation.epochs {
        if epoch % cfg.adaptation.pool_resample_every == 0 {
            let round = (epoch / cfg.adaptation.pool_resample_every) as u64;
            pool = targets
                .iter()
                .enumerate()
                .map(|(i, t)| t.sample(&cfg.sampling, derive_seed(cfg.seed, stream::POOL, round << 16 | i as u64)))
                .collect::<Result<_>>()?;
            reference = sources
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    Ok(View {
                        raster: s.raster.clone(),
                        points: s.sample(&ref_params, derive_seed(cfg.seed, stream::REFERENCE, round << 16 | i as u64))?,
                    })
                })
                .collect::<Result<_>>()?;
        }
        let steps = epoch_steps(cfg, epoch, sources, targets, &pool)?;
        if use_target {
            let (preds, aggs) = neighbourhood(&model, &levels, targets, &pool, &reference, variant)?;
            update_pseudo_labels(&mut state, &preds, &aggs, epoch, &variant.weights.schedule)?;
        }
        let mut means = TermMeans::default();
        let mut last = LossReport::default();
        for step in &steps {
            let pseudo = if use_target { Some(state.gather(&step.pool_index)?) } else { None };
            let mut g = Graph::new();
            let (loss, report) = total_loss(&mut g, &model, &step.batch, pseudo.as_deref(), epoch, variant)?;
            if !report.total.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    reason: format!("{report:?}"),
                });
            }
            g.backward(loss, model.params_mut())?;
            opt.step(model.params_mut());
            means.add(&report);
            last = report;
        }
        let monitor_cd = monitor(&model, &levels)?;
        log.epochs.push(EpochLog {
            epoch,
            total: means.total / means.n.max(1) as f64,
            sim: means.mean(0),
            source: means.mean(1),
            target: means.mean(2),
            mi: means.mean(3),
            w3: last.w3,
            w4: last.w4,
            m: if use_target { state.momentum } else { variant.weights.schedule.ramp(epoch) },
            source_accuracy: accuracy(&model, &holdout, &levels)?,
            monitor_cd,
        });
    }
    Ok(AdaptOutcome { model, log })
}
