use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::primitives::{box_mesh, icosphere};
use crate::model::ModelConfig;
use crate::raster::rasterize;

fn sphere_grid(g: usize, r: f64) -> OccupancyGrid {
    OccupancyGrid::from_fn(g, |p| if p.norm() < r { 1.0 } else { 0.0 }).unwrap()
}

/// Occupancy that is 1 inside radius `r` and 0 outside, with a linear ramp
/// one cell wide across the sphere so edge interpolation is meaningful.
fn ramped_sphere_grid(g: usize, r: f64) -> OccupancyGrid {
    let h = 1.0 / (g - 1) as f64;
    OccupancyGrid::from_fn(g, |p| (0.5 + (r - p.norm()) / h).clamp(0.0, 1.0)).unwrap()
}

#[test]
fn sphere_area_volume_and_topology() {
    let area = 4.0 * PI * 0.16;
    let vol = 4.0 / 3.0 * PI * 0.064;
    let mesh = marching_cubes(&ramped_sphere_grid(128, 0.4), ISO_LEVEL).unwrap();
    assert!((mesh.area() / area - 1.0).abs() < 0.03, "area {} vs {area}", mesh.area());
    assert!((mesh.signed_volume() / vol - 1.0).abs() < 0.02, "volume {} vs {vol}", mesh.signed_volume());
    assert!(mesh.is_watertight());

    // a hard 0/1 field gives a chamfered staircase: the volume holds, the area
    // overshoots by several percent
    let mesh = marching_cubes(&sphere_grid(128, 0.4), ISO_LEVEL).unwrap();
    assert!((mesh.signed_volume() / vol - 1.0).abs() < 0.02, "volume {} vs {vol}", mesh.signed_volume());
    assert!(mesh.is_watertight());
}

#[test]
fn vertices_lie_near_the_true_surface() {
    for g in [32, 64, 128] {
        let grid = sphere_grid(g, 0.3);
        let diag = grid.spacing() * 3f64.sqrt();
        let mesh = marching_cubes(&grid, ISO_LEVEL).unwrap();
        assert!(mesh.vertices.iter().all(|v| (v.norm() - 0.3).abs() <= diag));
        assert!(mesh.is_watertight());
        assert!(mesh.signed_volume() > 0.0);

        let grid = OccupancyGrid::from_fn(g, |p| (p.abs().max() < 0.3) as u8 as f64).unwrap();
        let mesh = marching_cubes(&grid, ISO_LEVEL).unwrap();
        assert!(mesh.vertices.iter().all(|v| (v.abs().max() - 0.3).abs() <= diag));
        assert!(mesh.is_watertight());
    }
}

#[test]
fn boundary_touching_solid_is_closed() {
    let grid = OccupancyGrid::from_fn(16, |_| 1.0).unwrap();
    let mesh = marching_cubes(&grid, ISO_LEVEL).unwrap();
    assert!(mesh.is_watertight());
    assert!(mesh.signed_volume() > 0.9);
}

#[test]
fn random_grids_are_watertight() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let values = (0..16usize.pow(3)).map(|_| rng.random::<f64>()).collect();
        let grid = OccupancyGrid::new(16, values).unwrap();
        let mesh = marching_cubes(&grid, ISO_LEVEL).unwrap();
        assert!(!mesh.has_nonmanifold_edges());
        assert!(mesh.edge_counts().values().all(|&c| c == 2));
    }
}

#[test]
fn constant_grid_has_no_surface() {
    let grid = OccupancyGrid::from_fn(16, |_| 0.2).unwrap();
    assert!(matches!(marching_cubes(&grid, ISO_LEVEL), Err(Error::EmptySurface)));
    assert!(marching_cubes(&grid, 1.0).is_err());
}

#[test]
fn extraction_is_deterministic() {
    let grid = OccupancyGrid::from_fn(24, |p| 0.5 + 0.3 * (6.0 * p.x).sin() * (5.0 * p.y).cos() - p.z).unwrap();
    assert_eq!(marching_cubes(&grid, 0.5).unwrap(), marching_cubes(&grid, 0.5).unwrap());
}

#[test]
fn postprocess_drops_floaters_and_rescales() {
    let mut sphere = icosphere(3);
    sphere.transform(|p| p * 0.3);
    let mut floater = TriMesh::new(
        vec![
            Vec3::new(0.45, 0.45, 0.45),
            Vec3::new(0.48, 0.45, 0.45),
            Vec3::new(0.45, 0.48, 0.45),
            Vec3::new(0.45, 0.45, 0.48),
        ],
        vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
    )
    .unwrap();
    floater.transform(|p| *p);
    let mut both = sphere.clone();
    both.append(&floater);
    let out = postprocess(&both, DEFAULT_MIN_FRACTION).unwrap();
    assert_eq!(out.faces.len(), sphere.faces.len());
    let b = out.bbox();
    assert!((b.extent().max() - 1.0).abs() < 1e-12);
    assert!(b.center().norm() < 1e-12);
    assert!(b.min.iter().all(|&v| v >= -0.5 - 1e-12) && b.max.iter().all(|&v| v <= 0.5 + 1e-12));

    let mut expected = sphere.clone();
    expected.normalize().unwrap();
    assert_eq!(postprocess(&sphere, DEFAULT_MIN_FRACTION).unwrap(), expected);
    let again = postprocess(&out, DEFAULT_MIN_FRACTION).unwrap();
    for (a, b) in again.vertices.iter().zip(&out.vertices) {
        assert!((a - b).norm() < 1e-12);
    }
}

fn tiny_model() -> OccupancyModel {
    let cfg = ModelConfig {
        channels: 4,
        levels: 2,
        hidden: vec![8],
        raster_resolution: 32,
        leaky_slope: 0.01,
    };
    OccupancyModel::new(cfg, 9).unwrap()
}

#[test]
fn zero_decoder_grid_is_constant() {
    let mut m = tiny_model();
    m.zero_decoder();
    let r = rasterize(&box_mesh(Vec3::zeros(), Vec3::repeat(0.3)), 32).unwrap();
    let grid = sample_grid(&m, &r, 16, &m.all_levels()).unwrap();
    assert!(grid.values().iter().all(|&v| v == 0.5));
    assert!(sample_grid(&m, &r, 8, &m.all_levels()).is_err());
}

#[test]
fn grid_matches_point_predictions() {
    let m = tiny_model();
    let r = rasterize(&box_mesh(Vec3::zeros(), Vec3::repeat(0.3)), 32).unwrap();
    let grid = sample_grid(&m, &r, 20, &m.all_levels()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (i, j, k) = (rng.random_range(0..20), rng.random_range(0..20), rng.random_range(0..20));
        let p = m.predict(&r, &grid.point(i, j, k)).unwrap();
        assert_eq!(p.fused, grid.at(i, j, k));
    }
}

