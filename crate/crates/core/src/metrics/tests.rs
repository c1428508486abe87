use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::primitives::{box_mesh, icosphere};

fn brute_force_sq(p: &Vec3, mesh: &TriMesh) -> f64 {
    mesh.triangles()
        .map(|t| point_triangle_sq_dist(p, &t))
        .fold(f64::INFINITY, f64::min)
}

fn random_point(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    Vec3::new(rng.random_range(-r..r), rng.random_range(-r..r), rng.random_range(-r..r))
}

#[test]
fn closest_point_regions() {
    let (a, b, c) = (Vec3::zeros(), Vec3::x(), Vec3::y());
    let q = closest_point_on_triangle(&Vec3::new(0.2, 0.2, 1.0), &a, &b, &c);
    assert!((q - Vec3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
    assert_eq!(closest_point_on_triangle(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c), a);
    assert_eq!(closest_point_on_triangle(&Vec3::new(2.0, -0.5, 0.0), &a, &b, &c), b);
    assert_eq!(closest_point_on_triangle(&Vec3::new(0.5, -1.0, 0.0), &a, &b, &c), Vec3::new(0.5, 0.0, 0.0));
    let q = closest_point_on_triangle(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c);
    assert!((q - Vec3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
}

#[test]
fn closest_point_is_minimal_against_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let t = [random_point(&mut rng, 1.0), random_point(&mut rng, 1.0), random_point(&mut rng, 1.0)];
        let p = random_point(&mut rng, 1.5);
        let d = point_triangle_sq_dist(&p, &t).sqrt();
        let mut best = f64::INFINITY;
        let n = 200;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
                let q = t[0] + (t[1] - t[0]) * u + (t[2] - t[0]) * v;
                best = best.min((p - q).norm());
            }
        }
        assert!(d <= best + 1e-12 && best - d < 0.02, "{d} vs {best}");
    }
}

#[test]
fn bvh_matches_exhaustive_scan() {
    let mut mesh = icosphere(3);
    mesh.transform(|p| Vec3::new(p.x * 0.4, p.y * 0.25, p.z * 0.3));
    let bvh = TriangleBvh::new(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let p = random_point(&mut rng, 0.6);
        assert_eq!(bvh.nearest_sq_dist(&p), brute_force_sq(&p, &mesh));
    }
}

#[test]
fn kdtree_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<Vec3> = (0..500).map(|_| random_point(&mut rng, 0.5)).collect();
    let tree = KdTree::new(&pts);
    for _ in 0..200 {
        let q = random_point(&mut rng, 0.7);
        let brute = pts.iter().map(|p| (p - q).norm_squared()).fold(f64::INFINITY, f64::min);
        assert_eq!(tree.nearest_sq_dist(&q), brute);
    }
}

#[test]
fn mesh_against_itself_is_zero() {
    let s = icosphere(2);
    assert!(p2s(&s, &s, 2000, 4).unwrap() < 1e-9);
    assert_eq!(chamfer(&s, &s, 2000, 4).unwrap(), 0.0);
}

#[test]
fn inflated_cube_offset() {
    let cube = box_mesh(Vec3::zeros(), Vec3::repeat(0.4));
    let big = box_mesh(Vec3::zeros(), Vec3::repeat(0.41));
    let d = p2s(&big, &cube, 5000, 5).unwrap();
    assert!((d / 0.01 - 1.0).abs() < 0.1, "{d}");
}

#[test]
fn shifted_spheres_are_symmetric_and_bounded() {
    let a = icosphere(3);
    let mut b = a.clone();
    b.transform(|p| p + Vec3::new(0.1, 0.0, 0.0));
    let ab = chamfer(&a, &b, 3000, 6).unwrap();
    let ba = chamfer(&b, &a, 3000, 6).unwrap();
    assert_eq!(ab, ba);
    assert!(ab > 0.0 && ab < 0.2, "{ab}");
}

#[test]
fn chamfer_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a: Vec<Vec3> = (0..200).map(|_| random_point(&mut rng, 0.5)).collect();
    let b: Vec<Vec3> = (0..200).map(|_| random_point(&mut rng, 0.5)).collect();
    let one = |x: &[Vec3], y: &[Vec3]| {
        let mut s = 0.0;
        for p in x {
            let mut m = f64::INFINITY;
            for q in y {
                m = m.min((p - q).norm_squared());
            }
            s += m.sqrt();
        }
        s / x.len() as f64
    };
    assert_eq!(chamfer_points(&a, &b).unwrap(), one(&a, &b) + one(&b, &a));
}

#[test]
fn rigid_motion_invariance() {
    let a = icosphere(2);
    let mut b = a.clone();
    b.transform(|p| Vec3::new(p.x * 1.1, p.y, p.z * 0.9));
    let rot = nalgebra::Rotation3::from_euler_angles(0.3, -0.2, 0.7);
    let t = Vec3::new(0.2, -0.1, 0.05);
    let (mut a2, mut b2) = (a.clone(), b.clone());
    a2.transform(|p| rot * p + t);
    b2.transform(|p| rot * p + t);
    let (x, y) = (p2s(&b, &a, 2000, 8).unwrap(), p2s(&b2, &a2, 2000, 8).unwrap());
    assert!((x - y).abs() < 1e-9);
    let (x, y) = (chamfer(&b, &a, 2000, 8).unwrap(), chamfer(&b2, &a2, 2000, 8).unwrap());
    assert!((x - y).abs() < 1e-9);
}

#[test]
fn metrics_shrink_with_noise() {
    let clean = icosphere(3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dirs: Vec<Vec3> = clean.vertices.iter().map(|_| random_point(&mut rng, 1.0)).collect();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for amp in [0.05, 0.02, 0.01] {
        let mut noisy = clean.clone();
        for (v, d) in noisy.vertices.iter_mut().zip(&dirs) {
            *v += d * amp;
        }
        let cur = (p2s(&noisy, &clean, 3000, 10).unwrap(), chamfer(&noisy, &clean, 3000, 10).unwrap());
        assert!(cur.0 < last.0 && cur.1 < last.1, "{amp}: {cur:?} vs {last:?}");
        last = cur;
    }
}

#[test]
fn argument_checks() {
    let s = icosphere(1);
    let empty = TriMesh::new(vec![], vec![]).unwrap();
    assert!(p2s(&s, &s, 10, 0).is_err());
    assert!(chamfer(&s, &empty, 2000, 0).is_err());
    assert!(point_to_surface(&[], &s).is_err());
    assert!(EvalReport::new(vec![], 10, 0).is_err());
    let r = EvalReport::new(
        vec![
            MeshScore { name: "a".into(), p2s: 0.1, cd: 0.2 },
            MeshScore { name: "b".into(), p2s: 0.3, cd: 0.4 },
        ],
        2000,
        1,
    )
    .unwrap();
    assert!((r.p2s - 0.2).abs() < 1e-15 && (r.cd - 0.3).abs() < 1e-15);
    assert!(r.to_csv().ends_with("mean,0.200000,0.300000\n"));
}
