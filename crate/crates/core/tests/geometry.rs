mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uda_recon::geometry::primitives::icosphere;
use uda_recon::geometry::{make_synthetic_shape, occupancy, synthetic_shape_seed, Family, TriMesh, Vec3};

use common::ray_parity_inside;

fn random_box_point(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))
}

#[test]
fn winding_occupancy_agrees_with_ray_parity_on_icosphere() {
    let mut sphere = icosphere(3);
    sphere.transform(|p| p * 0.4);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 10_000;
    let agree = (0..n)
        .filter(|_| {
            let p = random_box_point(&mut rng);
            (occupancy(&sphere, &p) == 1) == ray_parity_inside(&sphere, &p)
        })
        .count();
    assert!(agree as f64 / n as f64 >= 0.999, "{agree}/{n}");
}

#[test]
fn winding_occupancy_agrees_with_ray_parity_on_synthetic_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for fam in [Family::Source, Family::Target] {
        let shape = make_synthetic_shape(fam, synthetic_shape_seed(fam, 0, 1)).unwrap();
        let agree = (0..2000)
            .filter(|_| {
                let p = random_box_point(&mut rng);
                (occupancy(&shape.mesh, &p) == 1) == ray_parity_inside(&shape.mesh, &p)
            })
            .count();
        assert!(agree >= 1998, "{fam:?}: {agree}");
    }
}

/// Connected components of the faces whose centroid lies in the slab.
fn slab_components(mesh: &TriMesh, y_max: f64) -> usize {
    let slab = mesh.select_faces(|f| {
        let [a, b, c] = mesh.triangle(f);
        (a.y + b.y + c.y) / 3.0 < y_max
    });
    slab.face_components().1
}

#[test]
fn families_differ_in_their_support() {
    for i in 0..10 {
        let src = make_synthetic_shape(Family::Source, synthetic_shape_seed(Family::Source, 3, i)).unwrap();
        let tgt = make_synthetic_shape(Family::Target, synthetic_shape_seed(Family::Target, 3, i)).unwrap();
        for (shape, parts, slab) in [(&src, 3, 2), (&tgt, 2, 1)] {
            let bb = shape.mesh.bbox();
            let y_cut = bb.min.y + 0.2 * (bb.max.y - bb.min.y);
            assert_eq!(shape.mesh.face_components().1, parts, "{:?} {i}", shape.family);
            assert_eq!(slab_components(&shape.mesh, y_cut), slab, "{:?} {i}", shape.family);
        }
    }
}

#[test]
fn monte_carlo_volume_matches_analytic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for fam in [Family::Source, Family::Target] {
        let shape = make_synthetic_shape(fam, synthetic_shape_seed(fam, 5, 0)).unwrap();
        let n = 40_000;
        let inside = (0..n).filter(|_| ray_parity_inside(&shape.mesh, &random_box_point(&mut rng))).count();
        let estimate = inside as f64 / n as f64;
        let rel = estimate / shape.analytic_volume - 1.0;
        assert!(rel.abs() < 0.02, "{fam:?}: estimate {estimate} analytic {}", shape.analytic_volume);
    }
}

#[test]
fn shapes_are_normalized_and_closed() {
    for fam in [Family::Source, Family::Target] {
        for i in 0..5 {
            let m = make_synthetic_shape(fam, synthetic_shape_seed(fam, 9, i)).unwrap().mesh;
            let e = m.bbox().extent();
            assert!((e.max() - 1.0).abs() < 1e-12);
            assert!(m.bbox().center().norm() < 1e-12);
            assert!(m.is_watertight());
            assert!(m.signed_volume() > 0.0);
        }
    }
}
