//! Marching-cubes case table built from face rules.
//!
//! Corner `i` sits at `(i & 1, (i >> 1) & 1, (i >> 2) & 1)`. On every cube
//! face, crossings are paired so that each inside corner is cut off on its
//! own (diagonal inside corners never connect across a face). Because two
//! cubes sharing a face see the same corner values, they produce the same
//! face segments and the extracted surface closes up.

use std::sync::OnceLock;

pub const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

pub fn corner_offset(c: usize) -> [usize; 3] {
    [c & 1, (c >> 1) & 1, (c >> 2) & 1]
}

fn edge_index(a: usize, b: usize) -> usize {
    let key = (a.min(b), a.max(b));
    EDGES.iter().position(|&e| e == key).expect("cube edge")
}

/// The six faces, corners listed counter-clockwise seen from outside.
fn faces() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in 0..2 {
            let corner = |du: usize, dv: usize| (side << axis) | (du << u) | (dv << v);
            let mut q = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
            if side == 0 {
                q.reverse();
            }
            out.push(q);
        }
    }
    out
}

fn loops(config: usize) -> Vec<Vec<usize>> {
    let inside = |c: usize| config >> c & 1 == 1;
    let mut next = [usize::MAX; 12];
    for q in faces() {
        for i in 0..4 {
            let (a, b) = (q[i], q[(i + 1) % 4]);
            if !(inside(a) && !inside(b)) {
                continue;
            }
            // walk back over the run of inside corners to the entry edge
            let mut j = i;
            while inside(q[j]) {
                j = (j + 3) % 4;
            }
            next[edge_index(a, b)] = edge_index(q[j], q[(j + 1) % 4]);
        }
    }
    let mut seen = [false; 12];
    let mut out = Vec::new();
    for start in 0..12 {
        if next[start] == usize::MAX || seen[start] {
            continue;
        }
        let mut poly = Vec::new();
        let mut e = start;
        while !seen[e] {
            seen[e] = true;
            poly.push(e);
            e = next[e];
        }
        out.push(poly);
    }
    out
}

fn midpoint(e: usize) -> [f64; 3] {
    let (a, b) = EDGES[e];
    let (pa, pb) = (corner_offset(a), corner_offset(b));
    [0, 1, 2].map(|k| (pa[k] + pb[k]) as f64 / 2.0)
}

/// Marker for the centroid of the current polygon in a triangle entry.
pub const CENTROID: u8 = 12;

/// One polygon of a case: its cube edges in order and a triangulation that
/// refers to those edges or to [`CENTROID`].
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    pub edges: Vec<u8>,
    pub triangles: Vec<[u8; 3]>,
}

fn share_face(a: usize, b: usize) -> bool {
    let (ea, eb) = (EDGES[a], EDGES[b]);
    faces()
        .iter()
        .any(|q| [ea.0, ea.1, eb.0, eb.1].iter().all(|c| q.contains(c)))
}

/// Fan triangulation whose diagonals never run along a cube face, so that
/// neighbouring cells cannot emit the same interior edge. Falls back to a
/// centroid fan when no such apex exists.
fn triangulate(poly: &[usize], flip: bool) -> Vec<[u8; 3]> {
    let n = poly.len();
    let orient = |a: u8, b: u8, c: u8| if flip { [a, c, b] } else { [a, b, c] };
    let apex = (0..n).find(|&s| (2..n - 1).all(|k| !share_face(poly[s], poly[(s + k) % n])));
    match apex {
        Some(s) => (1..n - 1)
            .map(|k| orient(poly[s] as u8, poly[(s + k) % n] as u8, poly[(s + k + 1) % n] as u8))
            .collect(),
        None => (0..n)
            .map(|k| orient(CENTROID, poly[k] as u8, poly[(k + 1) % n] as u8))
            .collect(),
    }
}

fn build() -> Vec<Vec<Polygon>> {
    // pick the winding that points the corner-0 cap away from corner 0
    let probe = &loops(1)[0];
    let [a, b, c] = [probe[0], probe[1], probe[2]].map(midpoint);
    let n = [
        (b[1] - a[1]) * (c[2] - a[2]) - (b[2] - a[2]) * (c[1] - a[1]),
        (b[2] - a[2]) * (c[0] - a[0]) - (b[0] - a[0]) * (c[2] - a[2]),
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]),
    ];
    let flip = n[0] + n[1] + n[2] < 0.0;
    (0..256)
        .map(|cfg| {
            loops(cfg)
                .iter()
                .map(|p| Polygon {
                    edges: p.iter().map(|&e| e as u8).collect(),
                    triangles: triangulate(p, flip),
                })
                .collect()
        })
        .collect()
}

/// Polygons for each of the 256 corner configurations.
pub fn case_table() -> &'static [Vec<Polygon>] {
    static TABLE: OnceLock<Vec<Vec<Polygon>>> = OnceLock::new();
    TABLE.get_or_init(build)
}
