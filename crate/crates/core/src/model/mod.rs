//! Pixel-aligned implicit occupancy network.
//!
//! A four-stage convolutional encoder turns the `(mask, depth)` raster into
//! a stack of feature grids. A query point is projected into each grid,
//! bilinearly sampled and concatenated with its depth; one shared MLP decoder
//! maps every level's feature to an occupancy probability. The fused
//! prediction is the mean over the active levels.

mod align;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub use align::{bilinear_taps, PixelAlignedFeature};

use crate::autodiff::{Graph, ParamId, ParamStore, Tensor, Var};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::raster::RasterInput;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Feature channels per level.
    pub channels: usize,
    /// Number of encoder stages (= feature levels).
    pub levels: usize,
    /// Hidden widths of the decoder MLP.
    pub hidden: Vec<usize>,
    pub raster_resolution: usize,
    pub leaky_slope: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            channels: 16,
            levels: 4,
            hidden: vec![128, 64],
            raster_resolution: 64,
            leaky_slope: 0.01,
        }
    }
}

impl ModelConfig {
    pub fn feature_dim(&self) -> usize {
        self.channels + 1
    }

    pub fn level_resolution(&self) -> usize {
        self.raster_resolution / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.channels == 0 {
            return Err(Error::Config("levels and channels must be positive".into()));
        }
        if self.raster_resolution < 16 || !self.raster_resolution.is_multiple_of(2) {
            return Err(Error::Config("raster resolution must be even and at least 16".into()));
        }
        Ok(())
    }
}

/// Per-level feature grids of one raster, each `C×H×W`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStack {
    pub levels: Vec<Tensor>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyPrediction {
    pub per_layer: Vec<f64>,
    pub fused: f64,
}

#[derive(Clone, Debug)]
pub struct OccupancyModel {
    config: ModelConfig,
    store: ParamStore,
    conv_w: Vec<ParamId>,
    conv_b: Vec<ParamId>,
    dec_w: Vec<ParamId>,
    dec_b: Vec<ParamId>,
}

fn fan_in_init(rng: &mut ChaCha8Rng, shape: &[usize], fan_in: usize, gain: f64) -> Tensor {
    let std = gain / (fan_in as f64).sqrt();
    let normal = Normal::new(0.0, std).expect("finite std");
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| normal.sample(rng)).collect()).expect("shape")
}

impl OccupancyModel {
    /// Fan-in scaled normal weights (gain √2 before rectifiers, 1 otherwise)
    /// and zero biases.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let c = config.channels;
        let mut conv_w = Vec::new();
        let mut conv_b = Vec::new();
        for l in 0..config.levels {
            let cin = if l == 0 { 2 } else { c };
            let w = fan_in_init(&mut rng, &[c, cin, 3, 3], cin * 9, 1.0);
            conv_w.push(store.add(format!("encoder.conv{l}.weight"), w)?);
            conv_b.push(store.add(format!("encoder.conv{l}.bias"), Tensor::zeros(&[c]))?);
        }
        let mut dims = vec![config.feature_dim()];
        dims.extend_from_slice(&config.hidden);
        dims.push(1);
        let mut dec_w = Vec::new();
        let mut dec_b = Vec::new();
        for k in 0..dims.len() - 1 {
            let gain = if k + 2 < dims.len() { 2f64.sqrt() } else { 1.0 };
            let w = fan_in_init(&mut rng, &[dims[k], dims[k + 1]], dims[k], gain);
            dec_w.push(store.add(format!("decoder.fc{k}.weight"), w)?);
            dec_b.push(store.add(format!("decoder.fc{k}.bias"), Tensor::zeros(&[dims[k + 1]]))?);
        }
        Ok(OccupancyModel {
            config,
            store,
            conv_w,
            conv_b,
            dec_w,
            dec_b,
        })
    }

    /// Rebuilds a model from stored parameters, checking names and shapes.
    pub fn from_params(config: ModelConfig, params: &ParamStore) -> Result<Self> {
        let mut m = OccupancyModel::new(config, 0)?;
        m.store.load_values_from(params)?;
        Ok(m)
    }

    /// Copy of this model carrying the values of `params`.
    pub fn with_params(&self, params: &ParamStore) -> Result<Self> {
        let mut m = self.clone();
        m.store.load_values_from(params)?;
        Ok(m)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn encoder_params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.conv_w.iter().chain(&self.conv_b).copied()
    }

    pub fn decoder_params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.dec_w.iter().chain(&self.dec_b).copied()
    }

    /// Sets every decoder weight and bias to zero (output 0.5 everywhere).
    pub fn zero_decoder(&mut self) {
        let ids: Vec<ParamId> = self.decoder_params().collect();
        for id in ids {
            self.store.get_mut(id).value.data_mut().fill(0.0);
        }
    }

    pub fn all_levels(&self) -> Vec<usize> {
        (0..self.config.levels).collect()
    }

    /// Encoder forward pass recorded on `g`; returns one node per level.
    pub fn encode_in(&self, g: &mut Graph, raster: &RasterInput) -> Result<Vec<Var>> {
        if raster.resolution() != self.config.raster_resolution {
            return Err(Error::InvalidArgument(format!(
                "raster resolution {} does not match model resolution {}",
                raster.resolution(),
                self.config.raster_resolution
            )));
        }
        let mut x = g.constant(raster.to_tensor());
        let mut levels = Vec::with_capacity(self.config.levels);
        for l in 0..self.config.levels {
            let w = g.param(&self.store, self.conv_w[l]);
            let b = g.param(&self.store, self.conv_b[l]);
            let h = g.conv3x3(x, w, b)?;
            let h = g.tanh(h);
            x = if l == 0 { g.avg_pool2(h)? } else { h };
            levels.push(x);
        }
        Ok(levels)
    }

    /// Pixel-aligned features (`n×(C+1)`) of `points` for each requested level.
    pub fn features_in(&self, g: &mut Graph, level_vars: &[Var], levels: &[usize], points: &[Vec3]) -> Result<Vec<Var>> {
        let r = self.config.raster_resolution;
        let z: Vec<f64> = points.iter().map(|p| crate::raster::project(p, r).z).collect();
        let zcol = g.constant(Tensor::new(vec![points.len(), 1], z)?);
        let mut out = Vec::with_capacity(levels.len());
        for &l in levels {
            let grid = level_vars[l];
            let shape = g.value(grid).shape().to_vec();
            let taps = points
                .iter()
                .map(|p| bilinear_taps(p, r, shape[1], shape[2]))
                .collect::<Vec<_>>();
            let sampled = g.bilinear(grid, std::rc::Rc::new(taps))?;
            out.push(g.concat_cols(&[sampled, zcol])?);
        }
        Ok(out)
    }

    /// Shared decoder on a feature matrix `n×(C+1)`; returns `n×1` probabilities.
    pub fn decode_in(&self, g: &mut Graph, features: Var) -> Result<Var> {
        let mut h = features;
        let last = self.dec_w.len() - 1;
        for k in 0..=last {
            let w = g.param(&self.store, self.dec_w[k]);
            let b = g.param(&self.store, self.dec_b[k]);
            h = g.affine(h, w, b)?;
            h = if k < last {
                g.leaky_relu(h, self.config.leaky_slope)
            } else {
                g.sigmoid(h)
            };
        }
        Ok(h)
    }

    pub fn encode(&self, raster: &RasterInput) -> Result<FeatureStack> {
        let mut g = Graph::new();
        let vars = self.encode_in(&mut g, raster)?;
        Ok(FeatureStack {
            levels: vars.iter().map(|&v| g.value(v).clone()).collect(),
        })
    }

    pub fn pixel_align(&self, stack: &FeatureStack, p: &Vec3) -> PixelAlignedFeature {
        align::pixel_align(stack, p, self.config.raster_resolution)
    }

    /// Decoder on a single feature vector.
    pub fn decode(&self, feature: &[f64]) -> Result<f64> {
        let mut g = Graph::new();
        let f = g.constant(Tensor::new(vec![1, feature.len()], feature.to_vec())?);
        let out = self.decode_in(&mut g, f)?;
        Ok(g.value(out).data()[0])
    }

    /// Batched prediction from a precomputed stack; `levels` selects the
    /// layers that are decoded and fused.
    pub fn predict_with_stack(&self, stack: &FeatureStack, levels: &[usize], points: &[Vec3]) -> Result<Vec<OccupancyPrediction>> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("no levels selected".into()));
        }
        let mut g = Graph::new();
        let vars: Vec<Var> = stack.levels.iter().map(|t| g.constant(t.clone())).collect();
        let feats = self.features_in(&mut g, &vars, levels, points)?;
        let mut per_level = Vec::with_capacity(levels.len());
        for f in feats {
            let o = self.decode_in(&mut g, f)?;
            per_level.push(o);
        }
        Ok((0..points.len())
            .map(|i| {
                let per_layer: Vec<f64> = per_level.iter().map(|&o| g.value(o).data()[i]).collect();
                let fused = per_layer.iter().sum::<f64>() / per_layer.len() as f64;
                OccupancyPrediction { per_layer, fused }
            })
            .collect())
    }

    pub fn predict(&self, raster: &RasterInput, p: &Vec3) -> Result<OccupancyPrediction> {
        let stack = self.encode(raster)?;
        let levels = self.all_levels();
        Ok(self.predict_with_stack(&stack, &levels, std::slice::from_ref(p))?.remove(0))
    }
}

#[cfg(test)]
mod tests;
