use std::collections::HashMap;

use nalgebra::Vector3;
use rand::Rng;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Indexed triangle surface.
#[derive(Clone, Debug, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    /// Squared distance from `p` to the box (0 inside).
    pub fn sq_dist(&self, p: &Vec3) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let v = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d += v * v;
        }
        d
    }
}

/// Similarity transform `p ↦ (p - center) * scale` applied by normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub center: Vec3,
    pub scale: f64,
}

impl Normalization {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        (p - self.center) * self.scale
    }
}

impl TriMesh {
    /// Builds a mesh, rejecting out-of-range indices.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i >= n)) {
            return Err(Error::Mesh(format!(
                "face {f:?} references a vertex beyond {n}"
            )));
        }
        Ok(TriMesh { vertices, faces })
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangles(&self) -> impl Iterator<Item = [Vec3; 3]> + '_ {
        (0..self.faces.len()).map(move |f| self.triangle(f))
    }

    pub fn bbox(&self) -> Aabb {
        let mut b = Aabb::empty();
        for v in &self.vertices {
            b.grow(v);
        }
        b
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangle(f);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Signed volume by the divergence theorem (positive for outward-facing
    /// counter-clockwise faces).
    pub fn signed_volume(&self) -> f64 {
        self.triangles()
            .map(|[a, b, c]| a.dot(&b.cross(&c)) / 6.0)
            .sum()
    }

    pub fn transform(&mut self, f: impl Fn(&Vec3) -> Vec3) {
        for v in &mut self.vertices {
            *v = f(v);
        }
    }

    /// Appends the faces and vertices of `other` as a disjoint part.
    pub fn append(&mut self, other: &TriMesh) {
        let off = self.vertices.len();
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|f| [f[0] + off, f[1] + off, f[2] + off]));
    }

    /// Removes faces with repeated indices or (near-)zero area and drops
    /// unreferenced vertices. Returns the number of faces removed.
    pub fn remove_degenerate(&mut self) -> usize {
        let diag = self.bbox().extent().norm().max(f64::MIN_POSITIVE);
        let min_area = 1e-14 * diag * diag;
        let before = self.faces.len();
        let keep: Vec<[usize; 3]> = self
            .faces
            .iter()
            .enumerate()
            .filter(|(i, f)| {
                f[0] != f[1] && f[1] != f[2] && f[0] != f[2] && self.face_area(*i) > min_area
            })
            .map(|(_, f)| *f)
            .collect();
        self.faces = keep;
        self.compact_vertices();
        before - self.faces.len()
    }

    /// Drops vertices not referenced by any face, preserving order.
    pub fn compact_vertices(&mut self) {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &i in f {
                used[i] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut out = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if used[i] {
                remap[i] = out.len();
                out.push(*v);
            }
        }
        for f in &mut self.faces {
            for i in f.iter_mut() {
                *i = remap[*i];
            }
        }
        self.vertices = out;
    }

    /// Number of faces incident to each undirected edge.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Every edge is shared by exactly two faces.
    pub fn is_watertight(&self) -> bool {
        !self.faces.is_empty() && self.edge_counts().values().all(|&c| c == 2)
    }

    pub fn has_nonmanifold_edges(&self) -> bool {
        self.edge_counts().values().any(|&c| c > 2)
    }

    /// Component id per face, grouping faces that share a vertex. Ids are
    /// assigned in order of first face.
    pub fn face_components(&self) -> (Vec<usize>, usize) {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for f in &self.faces {
            for &v in &f[1..] {
                let r0 = find(&mut parent, f[0]);
                let r = find(&mut parent, v);
                if r != r0 {
                    let (lo, hi) = (r0.min(r), r0.max(r));
                    parent[hi] = lo;
                }
            }
        }
        let mut ids = HashMap::new();
        let mut out = Vec::with_capacity(self.faces.len());
        for f in &self.faces {
            let root = find(&mut parent, f[0]);
            let next = ids.len();
            out.push(*ids.entry(root).or_insert(next));
        }
        (out, ids.len())
    }

    /// Mesh made of the faces whose flag is set.
    pub fn select_faces(&self, keep: impl Fn(usize) -> bool) -> TriMesh {
        let faces = (0..self.faces.len()).filter(|&f| keep(f)).map(|f| self.faces[f]).collect();
        let mut m = TriMesh {
            vertices: self.vertices.clone(),
            faces,
        };
        m.compact_vertices();
        m
    }

    /// Centers the bounding box at the origin and scales its longest side to 1.
    pub fn normalize(&mut self) -> Result<Normalization> {
        let t = self.normalization()?;
        self.transform(|p| t.apply(p));
        Ok(t)
    }

    pub fn normalization(&self) -> Result<Normalization> {
        if self.vertices.is_empty() {
            return Err(Error::Mesh("cannot normalize an empty mesh".into()));
        }
        let b = self.bbox();
        let longest = b.extent().max();
        if !(longest > 0.0) || !longest.is_finite() {
            return Err(Error::Mesh("mesh has zero or non-finite extent".into()));
        }
        Ok(Normalization {
            center: b.center(),
            scale: 1.0 / longest,
        })
    }

    /// Area-weighted uniform samples on the surface.
    pub fn sample_surface<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<Vec3>> {
        if self.faces.is_empty() {
            return Err(Error::Mesh("cannot sample an empty mesh".into()));
        }
        let mut cdf = Vec::with_capacity(self.faces.len());
        let mut acc = 0.0;
        for f in 0..self.faces.len() {
            acc += self.face_area(f);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Mesh("mesh has zero surface area".into()));
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let r = rng.random::<f64>() * acc;
            let f = cdf.partition_point(|&c| c < r).min(self.faces.len() - 1);
            let [a, b, c] = self.triangle(f);
            let (mut u, mut v) = (rng.random::<f64>(), rng.random::<f64>());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            out.push(a + (b - a) * u + (c - a) * v);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::box_mesh;

    #[test]
    fn unit_cube_properties() {
        let m = box_mesh(Vec3::zeros(), Vec3::repeat(0.5));
        assert_eq!(m.vertices.len(), 8);
        assert_eq!(m.faces.len(), 12);
        assert!(m.is_watertight());
        assert!((m.signed_volume() - 1.0).abs() < 1e-12);
        assert!((m.area() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_faces_are_removed() {
        let mut m = box_mesh(Vec3::zeros(), Vec3::repeat(0.5));
        m.faces.push([0, 0, 1]);
        m.vertices.push(Vec3::new(3.0, 3.0, 3.0));
        m.vertices.push(Vec3::new(3.0, 3.0, 3.0));
        m.vertices.push(Vec3::new(3.0, 3.0, 3.0));
        m.faces.push([8, 9, 10]);
        assert_eq!(m.remove_degenerate(), 2);
        assert_eq!(m.faces.len(), 12);
        assert_eq!(m.vertices.len(), 8);
    }

    #[test]
    fn normalization_fits_unit_box() {
        let mut m = box_mesh(Vec3::new(3.0, -1.0, 2.0), Vec3::new(2.0, 0.5, 1.0));
        m.normalize().unwrap();
        let b = m.bbox();
        assert!((b.max.x - 0.5).abs() < 1e-12 && (b.min.x + 0.5).abs() < 1e-12);
        assert!(b.center().norm() < 1e-12);
        assert!(b.extent().y < 1.0);
    }

    #[test]
    fn components_of_disjoint_parts() {
        let mut m = box_mesh(Vec3::zeros(), Vec3::repeat(0.1));
        m.append(&box_mesh(Vec3::new(1.0, 0.0, 0.0), Vec3::repeat(0.1)));
        let (_, n) = m.face_components();
        assert_eq!(n, 2);
    }
}
