//! Procedural source ("biped") and target ("pedestal") shape families.
//!
//! Both families share the same torso distribution. Source shapes stand on
//! two separate leg cylinders; target shapes sit on a single box pedestal.
//! Every part is a separately closed surface with a small vertical gap, so
//! the exact volume is the sum of the part volumes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mesh::{TriMesh, Vec3};
use super::primitives::{box_mesh, cylinder, ellipsoid};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Source,
    Target,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Source => "source",
            Family::Target => "target",
        }
    }

    fn stream(self) -> u64 {
        match self {
            Family::Source => 0x5_0c3,
            Family::Target => 0x7_a46,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "source" => Ok(Family::Source),
            "target" => Ok(Family::Target),
            other => Err(Error::InvalidArgument(format!("unknown family {other}"))),
        }
    }
}

const GAP: f64 = 0.03;
const TORSO_SEGMENTS: usize = 48;
const TORSO_RINGS: usize = 24;
const LEG_SIDES: usize = 32;

#[derive(Clone, Debug)]
pub struct SyntheticShape {
    pub family: Family,
    /// Normalized mesh.
    pub mesh: TriMesh,
    /// Volume of the ideal (untessellated) solid after normalization.
    pub analytic_volume: f64,
    /// Height (normalized y) of the torso center.
    pub torso_center_y: f64,
}

/// One shape of `family`, fully determined by `seed`.
pub fn make_synthetic_shape(family: Family, seed: u64) -> Result<SyntheticShape> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii = Vec3::new(
        rng.random_range(0.16..0.22),
        rng.random_range(0.24..0.30),
        rng.random_range(0.11..0.15),
    );
    let mut mesh = ellipsoid(Vec3::zeros(), radii, TORSO_SEGMENTS, TORSO_RINGS);
    let mut volume = 4.0 / 3.0 * PI * radii.x * radii.y * radii.z;
    let support_top = -radii.y - GAP;
    match family {
        Family::Source => {
            let r = rng.random_range(0.05..0.065);
            let h = rng.random_range(0.40..0.50);
            let dx = rng.random_range(0.085..0.11);
            for side in [-1.0, 1.0] {
                let base = Vec3::new(side * dx, support_top - h, 0.0);
                mesh.append(&cylinder(base, r, h, LEG_SIDES));
                volume += PI * r * r * h;
            }
        }
        Family::Target => {
            let half = Vec3::new(
                rng.random_range(0.17..0.24),
                rng.random_range(0.18..0.25),
                rng.random_range(0.12..0.20),
            );
            let center = Vec3::new(0.0, support_top - half.y, 0.0);
            mesh.append(&box_mesh(center, half));
            volume += 8.0 * half.x * half.y * half.z;
        }
    }
    let t = mesh.normalize()?;
    Ok(SyntheticShape {
        family,
        mesh,
        analytic_volume: volume * t.scale.powi(3),
        torso_center_y: t.apply(&Vec3::zeros()).y,
    })
}

/// Shape `index` of the family stream rooted at `seed`.
pub fn synthetic_shape_seed(family: Family, seed: u64, index: usize) -> u64 {
    derive_seed(seed, family.stream(), index as u64)
}

pub fn make_synthetic_dataset(family: Family, count: usize, seed: u64) -> Result<Vec<TriMesh>> {
    if count == 0 {
        return Err(Error::InvalidArgument("dataset count must be positive".into()));
    }
    (0..count)
        .map(|i| make_synthetic_shape(family, synthetic_shape_seed(family, seed, i)).map(|s| s.mesh))
        .collect()
}
