//! Point-to-surface and Chamfer distances between meshes.
//!
//! Both metrics use unsquared Euclidean distances on area-weighted surface
//! samples, so they share the unit-box length scale.

mod bvh;
mod kdtree;

use std::fmt::Write as _;

pub use bvh::{closest_point_on_triangle, point_triangle_sq_dist, TriangleBvh};
pub use kdtree::KdTree;

use crate::error::{Error, Result};
use crate::geometry::{TriMesh, Vec3};
use crate::rng::seeded;

pub const DEFAULT_SAMPLES: usize = 10_000;
pub const MIN_SAMPLES: usize = 1000;
pub const DISTANCE_CONVENTION: &str = "unsquared";

/// Mean distance from `points` to the nearest triangle of `reference`.
pub fn point_to_surface(points: &[Vec3], reference: &TriMesh) -> Result<f64> {
    if points.is_empty() || reference.is_empty() {
        return Err(Error::InvalidArgument("point-to-surface needs points and a reference mesh".into()));
    }
    let bvh = TriangleBvh::new(reference);
    let total: f64 = points.iter().map(|p| bvh.nearest_sq_dist(p).sqrt()).sum();
    Ok(total / points.len() as f64)
}

fn surface_samples(mesh: &TriMesh, n: usize, seed: u64) -> Result<Vec<Vec3>> {
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("{n} samples, at least {MIN_SAMPLES} required")));
    }
    if mesh.is_empty() {
        return Err(Error::EmptySurface);
    }
    mesh.sample_surface(n, &mut seeded(seed))
}

/// P2S of `recon` against `reference` using `n` samples on `recon`.
pub fn p2s(recon: &TriMesh, reference: &TriMesh, n: usize, seed: u64) -> Result<f64> {
    point_to_surface(&surface_samples(recon, n, seed)?, reference)
}

/// `mean_a min_b |a - b| + mean_b min_a |a - b|` over two point sets.
pub fn chamfer_points(a: &[Vec3], b: &[Vec3]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("chamfer distance of an empty point set".into()));
    }
    let one_way = |from: &[Vec3], to: &[Vec3]| {
        let tree = KdTree::new(to);
        from.iter().map(|p| tree.nearest_sq_dist(p).sqrt()).sum::<f64>() / from.len() as f64
    };
    Ok(one_way(a, b) + one_way(b, a))
}

/// Chamfer distance on `n` samples per mesh. Each mesh is sampled with the
/// same `seed`, so the value does not depend on argument order.
pub fn chamfer(a: &TriMesh, b: &TriMesh, n: usize, seed: u64) -> Result<f64> {
    chamfer_points(&surface_samples(a, n, seed)?, &surface_samples(b, n, seed)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshScore {
    pub name: String,
    pub p2s: f64,
    pub cd: f64,
}

/// Scores of a set of reconstructions; `p2s` and `cd` are the per-mesh means.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub p2s: f64,
    pub cd: f64,
    pub per_mesh: Vec<MeshScore>,
    pub samples: usize,
    pub seed: u64,
    pub convention: &'static str,
}

impl EvalReport {
    pub fn new(per_mesh: Vec<MeshScore>, samples: usize, seed: u64) -> Result<Self> {
        if per_mesh.is_empty() {
            return Err(Error::InvalidArgument("no meshes evaluated".into()));
        }
        let n = per_mesh.len() as f64;
        Ok(EvalReport {
            p2s: per_mesh.iter().map(|s| s.p2s).sum::<f64>() / n,
            cd: per_mesh.iter().map(|s| s.cd).sum::<f64>() / n,
            per_mesh,
            samples,
            seed,
            convention: DISTANCE_CONVENTION,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("mesh,p2s,cd\n");
        for m in &self.per_mesh {
            let _ = writeln!(s, "{},{:.6},{:.6}", m.name, m.p2s, m.cd);
        }
        let _ = writeln!(s, "mean,{:.6},{:.6}", self.p2s, self.cd);
        s
    }
}

/// Scores one reconstruction against its ground truth.
pub fn score_mesh(name: &str, recon: &TriMesh, reference: &TriMesh, samples: usize, seed: u64) -> Result<MeshScore> {
    Ok(MeshScore {
        name: name.to_string(),
        p2s: p2s(recon, reference, samples, seed)?,
        cd: chamfer(recon, reference, samples, seed)?,
    })
}

#[cfg(test)]
mod tests;
