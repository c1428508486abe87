//! Inside/outside classification by the generalized winding number.

use super::mesh::{TriMesh, Vec3};

/// Generalized winding number of `mesh` at `p`: the sum of signed solid
/// angles subtended by each triangle, divided by 4π.
pub fn winding_number(mesh: &TriMesh, p: &Vec3) -> f64 {
    let mut total = 0.0;
    for [a, b, c] in mesh.triangles() {
        total += solid_angle(&(a - p), &(b - p), &(c - p));
    }
    total / (4.0 * std::f64::consts::PI)
}

/// Signed solid angle of a triangle seen from the origin
/// (Van Oosterom–Strackee).
fn solid_angle(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
    let det = a.dot(&b.cross(c));
    let denom = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    2.0 * det.atan2(denom)
}

/// Occupancy label: 1 iff the winding number at `p` is at least 0.5.
pub fn occupancy(mesh: &TriMesh, p: &Vec3) -> u8 {
    u8::from(winding_number(mesh, p) >= 0.5)
}
