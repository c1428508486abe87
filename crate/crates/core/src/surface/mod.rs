//! Occupancy grids, marching cubes and mesh cleanup.

mod tables;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{TriMesh, Vec3};
use crate::model::{FeatureStack, OccupancyModel};
use crate::raster::RasterInput;

pub use tables::case_table;

pub const ISO_LEVEL: f64 = 0.5;
pub const DEFAULT_MIN_FRACTION: f64 = 0.05;

/// `G³` samples on the lattice `-0.5 + i/(G-1)` of the unit box, stored
/// x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    resolution: usize,
    values: Vec<f64>,
}

impl OccupancyGrid {
    pub fn new(resolution: usize, values: Vec<f64>) -> Result<Self> {
        if resolution < 2 || values.len() != resolution.pow(3) {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of resolution {resolution}",
                values.len()
            )));
        }
        Ok(OccupancyGrid { resolution, values })
    }

    /// Evaluates `f` at every lattice point.
    pub fn from_fn(resolution: usize, f: impl Fn(&Vec3) -> f64) -> Result<Self> {
        let values = (0..resolution.pow(3))
            .map(|i| f(&lattice_point(resolution, i)))
            .collect();
        OccupancyGrid::new(resolution, values)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.resolution - 1) as f64
    }

    pub fn at(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        let g = self.resolution;
        self.values[(iz * g + iy) * g + ix]
    }

    pub fn point(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        let g = self.resolution;
        lattice_point(g, (iz * g + iy) * g + ix)
    }
}

fn lattice_point(g: usize, i: usize) -> Vec3 {
    let h = 1.0 / (g - 1) as f64;
    let (ix, iy, iz) = (i % g, (i / g) % g, i / (g * g));
    Vec3::new(-0.5 + ix as f64 * h, -0.5 + iy as f64 * h, -0.5 + iz as f64 * h)
}

const GRID_CHUNK: usize = 4096;

/// Fused predictions over the `G³` lattice, decoded in batches from a
/// single encoder pass.
pub fn sample_grid(model: &OccupancyModel, input: &RasterInput, resolution: usize, levels: &[usize]) -> Result<OccupancyGrid> {
    let stack = model.encode(input)?;
    sample_grid_from_stack(model, &stack, resolution, levels)
}

pub fn sample_grid_from_stack(
    model: &OccupancyModel,
    stack: &FeatureStack,
    resolution: usize,
    levels: &[usize],
) -> Result<OccupancyGrid> {
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!("grid resolution {resolution} below 16")));
    }
    let n = resolution.pow(3);
    let mut values = Vec::with_capacity(n);
    let mut pts = Vec::with_capacity(GRID_CHUNK);
    for start in (0..n).step_by(GRID_CHUNK) {
        pts.clear();
        pts.extend((start..(start + GRID_CHUNK).min(n)).map(|i| lattice_point(resolution, i)));
        values.extend(model.predict_with_stack(stack, levels, &pts)?.into_iter().map(|p| p.fused));
    }
    OccupancyGrid::new(resolution, values)
}

/// Extracts the `iso` level set. Values strictly above `iso` are inside.
/// The grid is surrounded by a layer of zeros so that shapes touching the
/// box boundary still produce closed surfaces.
pub fn marching_cubes(grid: &OccupancyGrid, iso: f64) -> Result<TriMesh> {
    if !(iso > 0.0 && iso < 1.0) {
        return Err(Error::InvalidArgument(format!("iso level {iso} outside (0, 1)")));
    }
    let g = grid.resolution as isize;
    let h = grid.spacing();
    let value = |i: isize, j: isize, k: isize| -> f64 {
        if i < 0 || j < 0 || k < 0 || i >= g || j >= g || k >= g {
            0.0
        } else {
            grid.at(i as usize, j as usize, k as usize)
        }
    };
    let coord = |i: isize| -0.5 + i as f64 * h;
    let table = case_table();
    let p = (g + 2) as usize;
    let mut vertex_of: HashMap<usize, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut corner_vals = [0.0; 8];
    for k in -1..g {
        for j in -1..g {
            for i in -1..g {
                let mut cfg = 0usize;
                for (c, v) in corner_vals.iter_mut().enumerate() {
                    let [dx, dy, dz] = tables::corner_offset(c);
                    *v = value(i + dx as isize, j + dy as isize, k + dz as isize);
                    if *v > iso {
                        cfg |= 1 << c;
                    }
                }
                let polys = &table[cfg];
                if polys.is_empty() {
                    continue;
                }
                let mut edge_vertex = [usize::MAX; 12];
                for poly in polys {
                    for &e in &poly.edges {
                        let e = e as usize;
                        if edge_vertex[e] != usize::MAX {
                            continue;
                        }
                        let (a, b) = tables::EDGES[e];
                        let oa = tables::corner_offset(a);
                        let axis = (0..3).find(|&d| tables::corner_offset(b)[d] != oa[d]).expect("axis");
                        let (li, lj, lk) = (i + oa[0] as isize, j + oa[1] as isize, k + oa[2] as isize);
                        let key = ((axis * p + (lk + 1) as usize) * p + (lj + 1) as usize) * p + (li + 1) as usize;
                        edge_vertex[e] = *vertex_of.entry(key).or_insert_with(|| {
                            let (va, vb) = (corner_vals[a], corner_vals[b]);
                            let t = ((iso - va) / (vb - va)).clamp(0.0, 1.0);
                            let mut pos = Vec3::new(coord(li), coord(lj), coord(lk));
                            pos[axis] += t * h;
                            vertices.push(pos);
                            vertices.len() - 1
                        });
                    }
                    let mut centroid = usize::MAX;
                    if poly.triangles.iter().flatten().any(|&e| e == tables::CENTROID) {
                        let sum: Vec3 = poly.edges.iter().map(|&e| vertices[edge_vertex[e as usize]]).sum();
                        vertices.push(sum / poly.edges.len() as f64);
                        centroid = vertices.len() - 1;
                    }
                    for tri in &poly.triangles {
                        faces.push(tri.map(|e| if e == tables::CENTROID { centroid } else { edge_vertex[e as usize] }));
                    }
                }
            }
        }
    }
    if faces.is_empty() {
        return Err(Error::EmptySurface);
    }
    TriMesh::new(vertices, faces)
}

/// Drops connected components smaller than `min_fraction` of the largest
/// (by face count), then centers the result and scales its longest side to 1.
pub fn postprocess(mesh: &TriMesh, min_fraction: f64) -> Result<TriMesh> {
    if mesh.is_empty() {
        return Err(Error::EmptySurface);
    }
    let (comp, count) = mesh.face_components();
    let mut sizes = vec![0usize; count];
    for &c in &comp {
        sizes[c] += 1;
    }
    let largest = *sizes.iter().max().expect("non-empty");
    let threshold = min_fraction * largest as f64;
    let mut out = mesh.select_faces(|f| sizes[comp[f]] as f64 >= threshold);
    out.normalize()?;
    Ok(out)
}

#[cfg(test)]
mod tests;
