use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::losses::{loss_mi, loss_sim, loss_source, loss_target, total_loss};
use super::{AdaptConfig, Bandwidth, DomainBatch, SourcePoint, TargetPoint, View};
use crate::autodiff::{grad_check, GradCheckOptions, GradCheckReport, ParamStore, Tensor};
use crate::error::Result;
use crate::geometry::primitives::icosphere;
use crate::geometry::Vec3;
use crate::model::{ModelConfig, OccupancyModel};
use crate::raster::rasterize;

/// Gradient-check result for one loss term.
#[derive(Clone, Debug)]
pub struct TermCheck {
    pub term: &'static str,
    pub seed: u64,
    pub report: GradCheckReport,
}

/// Bandwidth held fixed during checks so the finite differences do not see
/// it move.
const CHECK_SIGMA: f64 = 1.3;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Result<Tensor> {
    Tensor::new(vec![n, d], (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn probs(rng: &mut ChaCha8Rng, n: usize) -> Result<Tensor> {
    Tensor::new(vec![n, 1], (0..n).map(|_| rng.random_range(0.02..0.98)).collect())
}

pub fn check_model_config() -> ModelConfig {
    ModelConfig {
        channels: 3,
        levels: 2,
        hidden: vec![6],
        raster_resolution: 16,
        leaky_slope: 0.01,
    }
}

/// Two ellipsoid views with `n` random source and target points.
pub fn check_batch(seed: u64, n: usize) -> Result<DomainBatch> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = icosphere(2);
    a.transform(|p| p * 0.35);
    let mut b = icosphere(2);
    b.transform(|p| Vec3::new(p.x * 0.2, p.y * 0.4, p.z * 0.3));
    let ra = Arc::new(rasterize(&a, 16)?);
    let rb = Arc::new(rasterize(&b, 16)?);
    let mut pt = || Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
    let source = (0..n)
        .map(|i| SourcePoint {
            position: pt(),
            label: (i % 2) as u8,
        })
        .collect();
    let target = (0..n).map(|_| TargetPoint { position: pt() }).collect();
    Ok(DomainBatch {
        source: vec![View { raster: ra, points: source }],
        target: vec![View { raster: rb, points: target }],
    })
}

/// Checks each loss term on random 16-point feature batches and the weighted
/// total through a small model, all for one seed.
pub fn gradcheck_losses(seed: u64) -> Result<Vec<TermCheck>> {
    let n = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    let s = store.add("s", random_matrix(&mut rng, n, 5)?)?;
    let t = store.add("t", random_matrix(&mut rng, n, 5)?)?;
    let o_s = store.add("o_s", probs(&mut rng, n)?)?;
    let o_t = store.add("o_t", probs(&mut rng, n)?)?;
    let labels: Vec<f64> = (0..n).map(|_| rng.random_bool(0.5) as u8 as f64).collect();
    let pseudo: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let opts = GradCheckOptions {
        seed,
        ..Default::default()
    };
    let mut out = Vec::new();
    let mut push = |term, report| out.push(TermCheck { term, seed, report });

    let r = grad_check(&mut store.clone(), &opts, |g, st| {
        let (a, b) = (g.param(st, s), g.param(st, t));
        loss_sim(g, &[a], &[b], Bandwidth::Fixed(CHECK_SIGMA))
    })?;
    push("mmd", r);
    let r = grad_check(&mut store.clone(), &opts, |g, st| {
        let o = g.param(st, o_s);
        loss_source(g, &[o], &labels)
    })?;
    push("source", r);
    let r = grad_check(&mut store.clone(), &opts, |g, st| {
        let o = g.param(st, o_t);
        loss_target(g, &[o], std::slice::from_ref(&pseudo))
    })?;
    push("target", r);
    let r = grad_check(&mut store.clone(), &opts, |g, st| {
        let o = g.param(st, o_t);
        loss_mi(g, &[o])
    })?;
    push("mi", r);

    let model = OccupancyModel::new(check_model_config(), seed)?;
    let batch = check_batch(seed, n)?;
    let cfg = AdaptConfig {
        bandwidth: Bandwidth::Fixed(1.0),
        ..AdaptConfig::default()
    };
    let pseudo_layers = vec![pseudo.clone(); 2];
    let mut params = model.params().clone();
    let opts = GradCheckOptions {
        seed,
        coords_per_param: Some(6),
        ..Default::default()
    };
    let r = grad_check(&mut params, &opts, |g, st| {
        let m = model.with_params(st)?;
        Ok(total_loss(g, &m, &batch, Some(&pseudo_layers), 70, &cfg)?.0)
    })?;
    push("total", r);
    Ok(out)
}
