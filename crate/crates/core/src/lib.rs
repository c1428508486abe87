//! Single-view implicit occupancy reconstruction with unsupervised domain
//! adaptation.
//!
//! A small pixel-aligned occupancy network is pretrained on a labelled
//! source shape family and then adapted to an unlabelled target family using
//! multi-level MMD alignment, source supervision, nearest-neighbour pseudo
//! labels and a mutual-information diversity term. Surfaces are extracted with
//! marching cubes and scored with point-to-surface and Chamfer distances.

pub mod adapt;
pub mod autodiff;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod model;
pub mod raster;
pub mod rng;
pub mod surface;
pub mod train;

pub use error::{Error, Result};
