use crate::error::{Error, Result};
use crate::geometry::TriMesh;
use crate::model::OccupancyModel;
use crate::raster::RasterInput;
use crate::surface::{marching_cubes, postprocess, sample_grid, ISO_LEVEL};

/// Outcome of one extraction: either a mesh or the reason it failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub mesh: Option<TriMesh>,
    pub failure: Option<String>,
}

impl Reconstruction {
    pub fn failed(&self) -> bool {
        self.mesh.is_none()
    }
}

/// Raster to occupancy grid to post-processed mesh. An empty iso-surface is
/// not an error here but a failure flag on the result.
pub fn reconstruct(
    model: &OccupancyModel,
    levels: &[usize],
    raster: &RasterInput,
    grid: usize,
    min_fraction: f64,
) -> Result<Reconstruction> {
    let values = sample_grid(model, raster, grid, levels)?;
    let extracted = marching_cubes(&values, ISO_LEVEL).and_then(|m| postprocess(&m, min_fraction));
    match extracted {
        Ok(mesh) => Ok(Reconstruction {
            mesh: Some(mesh),
            failure: None,
        }),
        Err(Error::EmptySurface) => Ok(Reconstruction {
            mesh: None,
            failure: Some("empty surface after filtering".into()),
        }),
        Err(e) => Err(e),
    }
}
