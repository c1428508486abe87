use std::path::Path;
use std::sync::Arc;

use crate::adapt::{SourcePoint, TargetPoint};
use crate::error::{Error, Result};
use crate::geometry::{make_synthetic_dataset, sample_points, sample_positions, save_mesh, Family, SamplingParams, TriMesh};
use crate::raster::{rasterize, RasterInput};

use super::RunConfig;

/// Labelled source-domain shape.
#[derive(Clone, Debug)]
pub struct SourceShape {
    pub name: String,
    pub mesh: TriMesh,
    pub raster: Arc<RasterInput>,
}

impl SourceShape {
    pub fn sample(&self, params: &SamplingParams, seed: u64) -> Result<Vec<SourcePoint>> {
        sample_points(&self.mesh, params, seed, true)?
            .into_iter()
            .map(|q| {
                let label = q.label.ok_or_else(|| Error::LabelAccess("source point without label".into()))?;
                Ok(SourcePoint {
                    position: q.position,
                    label,
                })
            })
            .collect()
    }
}

/// Target-domain training shape. The geometry is only used to place query
/// points; nothing here can compute an occupancy label.
#[derive(Clone, Debug)]
pub struct TargetShape {
    name: String,
    mesh: TriMesh,
    raster: Arc<RasterInput>,
}

impl TargetShape {
    pub fn new(name: String, mesh: TriMesh, resolution: usize) -> Result<Self> {
        let raster = Arc::new(rasterize(&mesh, resolution)?);
        Ok(TargetShape { name, mesh, raster })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn raster(&self) -> &Arc<RasterInput> {
        &self.raster
    }

    pub fn sample(&self, params: &SamplingParams, seed: u64) -> Result<Vec<TargetPoint>> {
        Ok(sample_positions(&self.mesh, params, seed)?
            .into_iter()
            .map(|position| TargetPoint { position })
            .collect())
    }
}

/// Held-out target shape with its ground truth, used only for evaluation.
#[derive(Clone, Debug)]
pub struct TestShape {
    pub name: String,
    pub mesh: TriMesh,
    pub raster: Arc<RasterInput>,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub source: Vec<SourceShape>,
    pub target_train: Vec<TargetShape>,
    pub target_test: Vec<TestShape>,
}

impl Dataset {
    /// Synthetic source and target families from the run seed. Target train
    /// and test shapes come from one stream: the first `target_train` are
    /// for training, the rest for testing.
    pub fn generate(cfg: &RunConfig) -> Result<Self> {
        let r = cfg.model.raster_resolution;
        let d = &cfg.data;
        let source = make_synthetic_dataset(Family::Source, d.source_train, cfg.seed)?
            .into_iter()
            .enumerate()
            .map(|(i, mesh)| {
                Ok(SourceShape {
                    name: format!("source_{i:02}"),
                    raster: Arc::new(rasterize(&mesh, r)?),
                    mesh,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut targets = make_synthetic_dataset(Family::Target, d.target_train + d.target_test, cfg.seed)?;
        let test_meshes = targets.split_off(d.target_train);
        let target_train = targets
            .into_iter()
            .enumerate()
            .map(|(i, mesh)| TargetShape::new(format!("target_train_{i:02}"), mesh, r))
            .collect::<Result<Vec<_>>>()?;
        let target_test = test_meshes
            .into_iter()
            .enumerate()
            .map(|(i, mesh)| {
                Ok(TestShape {
                    name: format!("target_test_{i:02}"),
                    raster: Arc::new(rasterize(&mesh, r)?),
                    mesh,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            source,
            target_train,
            target_test,
        })
    }

    /// Writes every mesh as OBJ, optionally with mask/depth PGM images.
    pub fn write(&self, dir: &Path, with_rasters: bool) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let items = self
            .source
            .iter()
            .map(|s| (&s.name, &s.mesh, &s.raster))
            .chain(self.target_train.iter().map(|t| (&t.name, &t.mesh, &t.raster)))
            .chain(self.target_test.iter().map(|t| (&t.name, &t.mesh, &t.raster)));
        for (name, mesh, raster) in items {
            save_mesh(mesh, &dir.join(format!("{name}.obj")))?;
            if with_rasters {
                raster.write_pgm(&dir.join(format!("{name}_mask.pgm")), &dir.join(format!("{name}_depth.pgm")))?;
            }
        }
        Ok(())
    }
}
