//! Closed, outward-oriented primitive meshes.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::mesh::{TriMesh, Vec3};

/// Axis-aligned box with the given center and half extents.
pub fn box_mesh(center: Vec3, half: Vec3) -> TriMesh {
    let mut vertices = Vec::with_capacity(8);
    for i in 0..8 {
        let s = Vec3::new(
            if i & 1 == 0 { -1.0 } else { 1.0 },
            if i & 2 == 0 { -1.0 } else { 1.0 },
            if i & 4 == 0 { -1.0 } else { 1.0 },
        );
        vertices.push(center + half.component_mul(&s));
    }
    let faces = vec![
        [0, 2, 1], [1, 2, 3], // -z
        [4, 5, 6], [5, 7, 6], // +z
        [0, 1, 4], [1, 5, 4], // -y
        [2, 6, 3], [3, 6, 7], // +y
        [0, 4, 2], [2, 4, 6], // -x
        [1, 3, 5], [3, 7, 5], // +x
    ];
    TriMesh { vertices, faces }
}

/// Latitude/longitude tessellated ellipsoid.
pub fn ellipsoid(center: Vec3, radii: Vec3, segments: usize, rings: usize) -> TriMesh {
    let mut vertices = vec![center + Vec3::new(0.0, radii.y, 0.0)];
    for r in 1..rings {
        let theta = PI * r as f64 / rings as f64;
        for s in 0..segments {
            let phi = 2.0 * PI * s as f64 / segments as f64;
            let dir = Vec3::new(theta.sin() * phi.cos(), theta.cos(), theta.sin() * phi.sin());
            vertices.push(center + dir.component_mul(&radii));
        }
    }
    vertices.push(center - Vec3::new(0.0, radii.y, 0.0));
    let bottom = vertices.len() - 1;
    let ring = |r: usize, s: usize| 1 + (r - 1) * segments + s % segments;
    let mut faces = Vec::new();
    for s in 0..segments {
        faces.push([0, ring(1, s + 1), ring(1, s)]);
    }
    for r in 1..rings - 1 {
        for s in 0..segments {
            let (a, b) = (ring(r, s), ring(r, s + 1));
            let (c, d) = (ring(r + 1, s), ring(r + 1, s + 1));
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    for s in 0..segments {
        faces.push([bottom, ring(rings - 1, s), ring(rings - 1, s + 1)]);
    }
    TriMesh { vertices, faces }
}

/// Vertical (y-axis) closed cylinder standing on `base`.
pub fn cylinder(base: Vec3, radius: f64, height: f64, sides: usize) -> TriMesh {
    let mut vertices = Vec::with_capacity(2 * sides + 2);
    for level in [0.0, height] {
        for s in 0..sides {
            let phi = 2.0 * PI * s as f64 / sides as f64;
            vertices.push(base + Vec3::new(radius * phi.cos(), level, radius * phi.sin()));
        }
    }
    vertices.push(base);
    vertices.push(base + Vec3::new(0.0, height, 0.0));
    let (cb, ct) = (2 * sides, 2 * sides + 1);
    let mut faces = Vec::with_capacity(4 * sides);
    for s in 0..sides {
        let n = (s + 1) % sides;
        let (b0, b1, t0, t1) = (s, n, sides + s, sides + n);
        faces.push([b0, t1, b1]);
        faces.push([b0, t0, t1]);
        faces.push([cb, b0, b1]);
        faces.push([ct, t1, t0]);
    }
    TriMesh { vertices, faces }
}

/// Unit-radius icosphere centered at the origin.
pub fn icosphere(subdivisions: usize) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = [
        (-1.0, t, 0.0), (1.0, t, 0.0), (-1.0, -t, 0.0), (1.0, -t, 0.0),
        (0.0, -1.0, t), (0.0, 1.0, t), (0.0, -1.0, -t), (0.0, 1.0, -t),
        (t, 0.0, -1.0), (t, 0.0, 1.0), (-t, 0.0, -1.0), (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh { vertices, faces }
}
