//! Independent reference implementations used by the integration and
//! acceptance tests. They favour obviousness over speed.
#![allow(dead_code)]

use uda_recon::geometry::{TriMesh, Vec3};
use uda_recon::model::ModelConfig;
use uda_recon::train::{DataConfig, RunConfig};

/// Inside test by ray parity: count crossings of a ray with an irrational
/// direction so that it almost surely misses edges and vertices.
pub fn ray_parity_inside(mesh: &TriMesh, p: &Vec3) -> bool {
    let dir = Vec3::new(0.572_341_9, 0.331_972_4, 0.749_113_7).normalize();
    let mut hits = 0;
    for [a, b, c] in mesh.triangles() {
        let e1 = b - a;
        let e2 = c - a;
        let h = dir.cross(&e2);
        let det = e1.dot(&h);
        if det.abs() < 1e-14 {
            continue;
        }
        let inv = 1.0 / det;
        let s = p - a;
        let u = s.dot(&h) * inv;
        if !(0.0..=1.0).contains(&u) {
            continue;
        }
        let q = s.cross(&e1);
        let v = dir.dot(&q) * inv;
        if v < 0.0 || u + v > 1.0 {
            continue;
        }
        if e2.dot(&q) * inv > 0.0 {
            hits += 1;
        }
    }
    hits % 2 == 1
}

fn segment_sq_dist(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm_squared()
}

/// Point-triangle squared distance by plane projection: the projection if it
/// lands inside the triangle, otherwise the nearest of the three edges.
pub fn point_triangle_sq_dist_oracle(p: &Vec3, tri: &[Vec3; 3]) -> f64 {
    let [a, b, c] = tri;
    let n = (b - a).cross(&(c - a));
    let nn = n.norm_squared();
    if nn > 0.0 {
        let d = (p - a).dot(&n) / nn;
        let q = p - n * d;
        let inside = [(a, b), (b, c), (c, a)].iter().all(|(u, v)| (*v - *u).cross(&(q - *u)).dot(&n) >= 0.0);
        if inside {
            return (p - q).norm_squared();
        }
    }
    segment_sq_dist(p, a, b).min(segment_sq_dist(p, b, c)).min(segment_sq_dist(p, c, a))
}

/// Mean unsquared distance from `points` to the mesh, scanning all triangles.
pub fn p2s_double_loop(points: &[Vec3], mesh: &TriMesh) -> f64 {
    let tris: Vec<[Vec3; 3]> = mesh.triangles().collect();
    let total: f64 = points
        .iter()
        .map(|p| {
            tris.iter()
                .map(|t| point_triangle_sq_dist_oracle(p, t))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    total / points.len() as f64
}

fn one_way(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .map(|p| b.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min).sqrt())
        .sum::<f64>()
        / a.len() as f64
}

/// Symmetric Chamfer distance: sum of the two mean nearest-neighbour
/// distances, by exhaustive scan.
pub fn chamfer_double_loop(a: &[Vec3], b: &[Vec3]) -> f64 {
    one_way(a, b) + one_way(b, a)
}

/// Nearest `k` rows of `refs` to `query` by full sort on (distance, index).
pub fn knn_full_sort(query: &[f64], refs: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = refs
        .iter()
        .enumerate()
        .map(|(j, r)| (query.iter().zip(r).map(|(x, y)| (x - y).powi(2)).sum(), j))
        .collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    all.into_iter().take(k).map(|(_, j)| j).collect()
}

/// `clamp((epoch - 30) / 60, 0, 1)`.
pub fn ramp_oracle(epoch: usize) -> f64 {
    ((epoch as f64 - 30.0) / 60.0).clamp(0.0, 1.0)
}

/// Reduced run for tests that need a trained model quickly.
pub fn small_config(seed: u64) -> RunConfig {
    let mut c = RunConfig {
        seed,
        ..RunConfig::default()
    };
    c.data = DataConfig {
        source_train: 3,
        target_train: 6,
        target_test: 2,
    };
    c.model = ModelConfig {
        channels: 6,
        levels: 2,
        hidden: vec![24, 12],
        raster_resolution: 32,
        leaky_slope: 0.01,
    };
    c.sampling.n = 96;
    c.batch.meshes_per_domain = 3;
    c.pretrain.max_epochs = 40;
    c.pretrain.holdout_points = 256;
    c.adaptation.epochs = 8;
    c.adaptation.reference_points = 128;
    c.adapt.weights.schedule.start_epoch = 2;
    c.adapt.weights.schedule.epoch_total = 4;
    c.eval.grid = 32;
    c.eval.samples = 2000;
    c
}

/// Source files on the adaptation path.
pub const ADAPTATION_SOURCES: [(&str, &str); 4] = [
    ("train/adaptation.rs", include_str!("../../src/train/adaptation.rs")),
    ("adapt/losses.rs", include_str!("../../src/adapt/losses.rs")),
    ("adapt/pseudo.rs", include_str!("../../src/adapt/pseudo.rs")),
    ("adapt/mod.rs", include_str!("../../src/adapt/mod.rs")),
];

/// Identifiers that would give access to target ground truth.
const GROUND_TRUTH: [&str; 6] = ["occupancy", "winding_number", "sample_points", "target_test", "TestShape", "mesh"];

fn is_ident(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Code lines (comments excluded) of the adaptation path that mention a
/// ground-truth identifier as a whole word.
pub fn ground_truth_mentions() -> Vec<String> {
    let mut hits = Vec::new();
    for (file, src) in ADAPTATION_SOURCES {
        for line in src.lines().map(str::trim).filter(|l| !l.starts_with("//")) {
            let code = line.split("//").next().unwrap_or("");
            for word in code.split(|c: char| !is_ident(c)) {
                if GROUND_TRUTH.contains(&word) {
                    hits.push(format!("{file}: {line}"));
                }
            }
        }
    }
    hits
}

/// Whether `TargetShape` keeps its mesh private.
pub fn target_mesh_is_private() -> bool {
    let src = include_str!("../../src/train/data.rs");
    let Some(start) = src.find("pub struct TargetShape") else {
        return false;
    };
    let body = &src[start..start + src[start..].find('}').unwrap_or(0)];
    body.contains("mesh") && !body.contains("pub mesh") && !src.contains("pub fn mesh(")
}
