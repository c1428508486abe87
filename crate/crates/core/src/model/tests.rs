use super::*;
use crate::geometry::primitives::{box_mesh, icosphere};
use crate::raster::rasterize;

fn sphere_raster() -> RasterInput {
    let mut s = icosphere(3);
    s.transform(|p| p * 0.35);
    rasterize(&s, 64).unwrap()
}

#[test]
fn encoder_level_shapes() {
    let m = OccupancyModel::new(ModelConfig::default(), 1).unwrap();
    let stack = m.encode(&sphere_raster()).unwrap();
    assert_eq!(stack.levels.len(), 4);
    for t in &stack.levels {
        assert_eq!(t.shape(), &[16, 32, 32]);
    }
}

#[test]
fn feature_dimension_is_channels_plus_depth() {
    let m = OccupancyModel::new(ModelConfig::default(), 1).unwrap();
    let stack = m.encode(&sphere_raster()).unwrap();
    let f = m.pixel_align(&stack, &Vec3::new(0.1, -0.2, 0.3));
    assert_eq!(f.levels.len(), 4);
    for l in &f.levels {
        assert_eq!(l.len(), 17);
        assert_eq!(l[16], 0.8);
    }
}

#[test]
fn grid_center_reproduces_value() {
    // level grid 32×32 over raster 64: cell (i, j) center at pixel 2i+1
    let m = OccupancyModel::new(ModelConfig::default(), 2).unwrap();
    let stack = m.encode(&sphere_raster()).unwrap();
    for &(i, j) in &[(0usize, 0usize), (5, 17), (31, 31), (12, 30)] {
        let p = Vec3::new((2 * i + 1) as f64 / 64.0 - 0.5, (2 * j + 1) as f64 / 64.0 - 0.5, 0.0);
        let f = m.pixel_align(&stack, &p);
        for (l, t) in stack.levels.iter().enumerate() {
            for c in 0..16 {
                assert_eq!(f.levels[l][c], t.data()[c * 1024 + j * 32 + i]);
            }
        }
    }
}

#[test]
fn zero_decoder_outputs_half() {
    let mut m = OccupancyModel::new(ModelConfig::default(), 3).unwrap();
    m.zero_decoder();
    let p = m.predict(&sphere_raster(), &Vec3::new(0.0, 0.1, 0.0)).unwrap();
    assert!(p.per_layer.iter().all(|&o| o == 0.5));
    assert_eq!(p.fused, 0.5);
}

#[test]
fn predictions_are_probabilities() {
    let m = OccupancyModel::new(ModelConfig::default(), 4).unwrap();
    let r = sphere_raster();
    let stack = m.encode(&r).unwrap();
    let pts: Vec<Vec3> = (0..50).map(|i| Vec3::new(i as f64 / 50.0 - 0.5, 0.1, -0.2)).collect();
    for p in m.predict_with_stack(&stack, &m.all_levels(), &pts).unwrap() {
        assert!(p.per_layer.iter().all(|&o| (0.0..=1.0).contains(&o)));
        let mean = p.per_layer.iter().sum::<f64>() / 4.0;
        assert!((p.fused - mean).abs() < 1e-15);
    }
}

#[test]
fn batched_matches_single_point() {
    let m = OccupancyModel::new(ModelConfig::default(), 5).unwrap();
    let r = sphere_raster();
    let stack = m.encode(&r).unwrap();
    let pts: Vec<Vec3> = (0..20)
        .map(|i| Vec3::new(0.03 * i as f64 - 0.3, 0.2 - 0.02 * i as f64, 0.01 * i as f64))
        .collect();
    let batch = m.predict_with_stack(&stack, &m.all_levels(), &pts).unwrap();
    for (p, b) in pts.iter().zip(&batch) {
        assert_eq!(&m.predict(&r, p).unwrap(), b);
        let f = m.pixel_align(&stack, p);
        for (l, feat) in f.levels.iter().enumerate() {
            assert_eq!(m.decode(feat).unwrap(), b.per_layer[l]);
        }
    }
}

#[test]
fn initialization_is_seeded() {
    let a = OccupancyModel::new(ModelConfig::default(), 7).unwrap();
    let b = OccupancyModel::new(ModelConfig::default(), 7).unwrap();
    let c = OccupancyModel::new(ModelConfig::default(), 8).unwrap();
    assert_eq!(a.params().flatten(), b.params().flatten());
    assert_ne!(a.params().flatten(), c.params().flatten());
    for id in a.encoder_params().chain(a.decoder_params()) {
        let p = a.params().get(id);
        if p.name.ends_with("bias") {
            assert!(p.value.data().iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn wrong_resolution_rejected() {
    let m = OccupancyModel::new(ModelConfig::default(), 1).unwrap();
    let cube = box_mesh(Vec3::zeros(), Vec3::repeat(0.2));
    let r = rasterize(&cube, 32).unwrap();
    assert!(m.encode(&r).is_err());
}
