//! Orthographic mask + depth rendering from the fixed frontal camera.
//!
//! The camera looks along +z; pixel `(ix, iy)` covers
//! `x ∈ [-0.5 + ix/R, -0.5 + (ix+1)/R)` and likewise for `y`. Depth is the
//! smallest surface `z` along the pixel-center ray, remapped to `z + 0.5`.

use std::io::Write as _;
use std::path::Path;

use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::geometry::{TriMesh, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub struct RasterInput {
    resolution: usize,
    mask: Vec<f64>,
    depth: Vec<f64>,
}

/// Continuous pixel coordinates and remapped depth of a 3-D point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub z: f64,
}

pub const DEFAULT_RESOLUTION: usize = 64;

/// Maps `p` in the unit box to pixel coordinates and `[0, 1]` depth.
pub fn project(p: &Vec3, resolution: usize) -> Projection {
    let r = resolution as f64;
    Projection {
        u: (p.x + 0.5) * r,
        v: (p.y + 0.5) * r,
        z: p.z + 0.5,
    }
}

impl RasterInput {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn mask_at(&self, ix: usize, iy: usize) -> f64 {
        self.mask[iy * self.resolution + ix]
    }

    pub fn depth_at(&self, ix: usize, iy: usize) -> f64 {
        self.depth[iy * self.resolution + ix]
    }

    pub fn coverage(&self) -> usize {
        self.mask.iter().filter(|&&m| m > 0.0).count()
    }

    /// Two-channel `(mask, depth)` tensor of shape `2×R×R`.
    pub fn to_tensor(&self) -> Tensor {
        let mut data = Vec::with_capacity(2 * self.mask.len());
        data.extend_from_slice(&self.mask);
        data.extend_from_slice(&self.depth);
        Tensor::new(vec![2, self.resolution, self.resolution], data).expect("raster shape")
    }

    /// Writes mask and depth as 8-bit binary PGM images (row 0 at the top
    /// corresponds to the largest y).
    pub fn write_pgm(&self, mask_path: &Path, depth_path: &Path) -> Result<()> {
        write_pgm(mask_path, &self.mask, self.resolution)?;
        write_pgm(depth_path, &self.depth, self.resolution)
    }
}

fn write_pgm(path: &Path, values: &[f64], r: usize) -> Result<()> {
    let mut bytes = format!("P5\n{r} {r}\n255\n").into_bytes();
    for iy in (0..r).rev() {
        for ix in 0..r {
            bytes.push((values[iy * r + ix].clamp(0.0, 1.0) * 255.0).round() as u8);
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// Renders the mesh silhouette and nearest-surface depth.
pub fn rasterize(mesh: &TriMesh, resolution: usize) -> Result<RasterInput> {
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!(
            "raster resolution {resolution} below minimum 16"
        )));
    }
    let r = resolution;
    let mut zbuf = vec![f64::INFINITY; r * r];
    for [a, b, c] in mesh.triangles() {
        let pa = project(&a, r);
        let pb = project(&b, r);
        let pc = project(&c, r);
        let area = (pb.u - pa.u) * (pc.v - pa.v) - (pc.u - pa.u) * (pb.v - pa.v);
        if area.abs() < 1e-14 {
            continue;
        }
        let umin = pa.u.min(pb.u).min(pc.u);
        let umax = pa.u.max(pb.u).max(pc.u);
        let vmin = pa.v.min(pb.v).min(pc.v);
        let vmax = pa.v.max(pb.v).max(pc.v);
        // pixel centers at i + 0.5
        let ix0 = (umin - 0.5).ceil().max(0.0) as usize;
        let iy0 = (vmin - 0.5).ceil().max(0.0) as usize;
        let ix1 = ((umax - 0.5).floor()).min(r as f64 - 1.0);
        let iy1 = ((vmax - 0.5).floor()).min(r as f64 - 1.0);
        if ix1 < 0.0 || iy1 < 0.0 {
            continue;
        }
        let (ix1, iy1) = (ix1 as usize, iy1 as usize);
        let tol = 1e-12 * area.abs();
        for iy in iy0..=iy1 {
            let y = iy as f64 + 0.5;
            for ix in ix0..=ix1 {
                let x = ix as f64 + 0.5;
                let w0 = (pb.u - x) * (pc.v - y) - (pc.u - x) * (pb.v - y);
                let w1 = (pc.u - x) * (pa.v - y) - (pa.u - x) * (pc.v - y);
                let w2 = (pa.u - x) * (pb.v - y) - (pb.u - x) * (pa.v - y);
                let inside = if area > 0.0 {
                    w0 >= -tol && w1 >= -tol && w2 >= -tol
                } else {
                    w0 <= tol && w1 <= tol && w2 <= tol
                };
                if !inside {
                    continue;
                }
                let z = (w0 * pa.z + w1 * pb.z + w2 * pc.z) / area;
                let slot = &mut zbuf[iy * r + ix];
                if z < *slot {
                    *slot = z;
                }
            }
        }
    }
    let mut mask = vec![0.0; r * r];
    let mut depth = vec![0.0; r * r];
    let mut any = false;
    for (i, &z) in zbuf.iter().enumerate() {
        if z.is_finite() {
            mask[i] = 1.0;
            depth[i] = z.clamp(0.0, 1.0);
            any = true;
        }
    }
    if !any {
        return Err(Error::EmptySilhouette);
    }
    Ok(RasterInput {
        resolution: r,
        mask,
        depth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::{box_mesh, icosphere};

    #[test]
    fn unit_cube_fills_the_frame() {
        let cube = box_mesh(Vec3::zeros(), Vec3::repeat(0.5));
        let r = rasterize(&cube, 64).unwrap();
        assert_eq!(r.coverage(), 64 * 64);
        let d0 = r.depth_at(10, 10);
        assert!(r.depth().iter().all(|&d| (d - d0).abs() < 1e-12));
    }

    #[test]
    fn inner_cube_depth_is_front_face() {
        let cube = box_mesh(Vec3::zeros(), Vec3::repeat(0.25));
        let r = rasterize(&cube, 64).unwrap();
        assert_eq!(r.coverage(), 32 * 32);
        assert!((r.depth_at(32, 32) - 0.25).abs() < 1e-12);
        for (m, d) in r.mask().iter().zip(r.depth()) {
            assert!(*d == 0.0 || *m == 1.0);
        }
    }

    #[test]
    fn sphere_silhouette_area() {
        let mut s = icosphere(5);
        s.transform(|p| p * 0.4);
        let r = rasterize(&s, 256).unwrap();
        let frac = r.coverage() as f64 / (256.0 * 256.0);
        let expected = std::f64::consts::PI * 0.16;
        assert!((frac / expected - 1.0).abs() < 0.02, "{frac} vs {expected}");
    }

    #[test]
    fn out_of_view_mesh_errors() {
        let cube = box_mesh(Vec3::new(3.0, 0.0, 0.0), Vec3::repeat(0.2));
        assert!(matches!(rasterize(&cube, 32), Err(Error::EmptySilhouette)));
        let cube = box_mesh(Vec3::zeros(), Vec3::repeat(0.2));
        assert!(rasterize(&cube, 8).is_err());
    }

    #[test]
    fn projection_examples() {
        assert_eq!(project(&Vec3::zeros(), 64), Projection { u: 32.0, v: 32.0, z: 0.5 });
        assert_eq!(project(&Vec3::repeat(-0.5), 64), Projection { u: 0.0, v: 0.0, z: 0.0 });
    }

    #[test]
    fn deterministic() {
        let s = icosphere(2);
        let mut s2 = s.clone();
        s2.transform(|p| p * 0.3);
        assert_eq!(rasterize(&s2, 64).unwrap(), rasterize(&s2, 64).unwrap());
    }
}
