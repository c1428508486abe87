//! Meshes, the inside/outside oracle, point sampling and the synthetic
//! shape families.

mod io;
mod mesh;
pub mod primitives;
mod sampling;
mod synthetic;
mod winding;

pub use io::{load_mesh, parse_obj, parse_ply, read_mesh, save_mesh, to_obj_string, to_ply_string, MeshFormat};
pub use mesh::{Aabb, Normalization, TriMesh, Vec3};
pub use sampling::{clamp_to_unit_box, sample_points, sample_positions, QueryPoint, SamplingParams};
pub use synthetic::{make_synthetic_dataset, make_synthetic_shape, synthetic_shape_seed, Family, SyntheticShape};
pub use winding::{occupancy, winding_number};
