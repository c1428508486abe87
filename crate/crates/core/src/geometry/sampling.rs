use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::mesh::{TriMesh, Vec3};
use super::winding::occupancy;
use crate::error::{Error, Result};

/// Near-surface plus uniform sampling mix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub n: usize,
    /// Standard deviation of the isotropic jitter applied to surface samples.
    pub sigma: f64,
    /// Fraction of points drawn uniformly in the unit box.
    pub uniform_ratio: f64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            n: 512,
            sigma: 0.05,
            uniform_ratio: 1.0 / 16.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryPoint {
    pub position: Vec3,
    /// Ground-truth occupancy; present only for source-domain samples.
    pub label: Option<u8>,
}

pub fn clamp_to_unit_box(p: Vec3) -> Vec3 {
    p.map(|c| c.clamp(-0.5, 0.5))
}

/// Sample positions only (no labels are computed).
pub fn sample_positions(mesh: &TriMesh, params: &SamplingParams, seed: u64) -> Result<Vec<Vec3>> {
    if params.n == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    if !(0.0..=1.0).contains(&params.uniform_ratio) {
        return Err(Error::InvalidArgument(format!(
            "uniform_ratio {} outside [0, 1]",
            params.uniform_ratio
        )));
    }
    if !(params.sigma >= 0.0) {
        return Err(Error::InvalidArgument("sigma must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_uniform = ((params.n as f64) * params.uniform_ratio).ceil() as usize;
    let n_uniform = n_uniform.min(params.n);
    let mut out = Vec::with_capacity(params.n);
    for _ in 0..n_uniform {
        out.push(Vec3::new(
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
            rng.random::<f64>() - 0.5,
        ));
    }
    let n_surface = params.n - n_uniform;
    if n_surface > 0 {
        let noise = Normal::new(0.0, params.sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        for p in mesh.sample_surface(n_surface, &mut rng)? {
            let jitter = Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng));
            out.push(clamp_to_unit_box(p + jitter));
        }
    }
    Ok(out)
}

/// Draws `n` query points; labels follow the winding-number occupancy when
/// `labeled` is set (source domain) and are absent otherwise.
pub fn sample_points(mesh: &TriMesh, params: &SamplingParams, seed: u64, labeled: bool) -> Result<Vec<QueryPoint>> {
    Ok(sample_positions(mesh, params, seed)?
        .into_iter()
        .map(|position| QueryPoint {
            position,
            label: labeled.then(|| occupancy(mesh, &position)),
        })
        .collect())
}
