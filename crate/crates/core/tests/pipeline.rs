mod common;

use std::sync::OnceLock;

use uda_recon::autodiff::ParamStore;
use uda_recon::metrics::chamfer;
use uda_recon::model::OccupancyModel;
use uda_recon::train::{pretrain_source, reconstruct, Dataset, RunConfig};

fn trained() -> &'static (RunConfig, Dataset, OccupancyModel) {
    static CELL: OnceLock<(RunConfig, Dataset, OccupancyModel)> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = common::small_config(2);
        let data = Dataset::generate(&cfg).unwrap();
        let model = pretrain_source(&cfg, &data).unwrap().model;
        (cfg, data, model)
    })
}

#[test]
fn trained_model_gives_watertight_or_flagged_meshes() {
    let (cfg, data, model) = trained();
    for t in &data.target_test {
        let r = reconstruct(model, &model.all_levels(), &t.raster, cfg.eval.grid, cfg.eval.min_fraction).unwrap();
        match (&r.mesh, &r.failure) {
            (Some(m), None) => {
                assert!(m.is_watertight(), "{}", t.name);
                assert!((m.bbox().extent().max() - 1.0).abs() < 1e-9);
            }
            (None, Some(_)) => {}
            other => panic!("inconsistent reconstruction {other:?}"),
        }
    }
}

#[test]
fn extraction_is_consistent_across_grid_resolutions() {
    let (cfg, data, model) = trained();
    let t = &data.target_test[0];
    let levels = model.all_levels();
    let coarse = reconstruct(model, &levels, &t.raster, 32, cfg.eval.min_fraction).unwrap();
    let fine = reconstruct(model, &levels, &t.raster, 128, cfg.eval.min_fraction).unwrap();
    let (a, b) = (coarse.mesh.expect("coarse surface"), fine.mesh.expect("fine surface"));
    let cd = chamfer(&a, &b, 10_000, 0).unwrap();
    assert!(cd < 0.05, "CD between G=32 and G=128 extractions: {cd}");
}

#[test]
fn untrained_constant_model_is_flagged() {
    let (cfg, data, _) = trained();
    let mut model = OccupancyModel::new(cfg.model.clone(), 0).unwrap();
    model.zero_decoder();
    let r = reconstruct(&model, &model.all_levels(), &data.target_test[0].raster, 32, 0.05).unwrap();
    assert!(r.mesh.is_none());
    assert!(r.failure.is_some());
}

#[test]
fn checkpoint_round_trip_reproduces_mesh() {
    let (cfg, data, model) = trained();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    model.params().save(&path).unwrap();
    let loaded = OccupancyModel::from_params(cfg.model.clone(), &ParamStore::load(&path).unwrap()).unwrap();
    let t = &data.target_test[1];
    let levels = model.all_levels();
    let a = reconstruct(model, &levels, &t.raster, 32, 0.05).unwrap();
    let b = reconstruct(&loaded, &levels, &t.raster, 32, 0.05).unwrap();
    assert_eq!(a, b);
}
