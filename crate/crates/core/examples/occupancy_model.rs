//! Builds the occupancy network, encodes one rendering and queries a few
//! points, showing per-level and fused predictions.

use uda_recon::geometry::{make_synthetic_shape, synthetic_shape_seed, Family, Vec3};
use uda_recon::model::{ModelConfig, OccupancyModel};
use uda_recon::raster::rasterize;

fn main() -> uda_recon::Result<()> {
    let config = ModelConfig::default();
    let model = OccupancyModel::new(config.clone(), 7)?;
    let n_params: usize = model.params().ids().map(|id| model.params().get(id).value.len()).sum();
    println!("{} levels, feature dim {}, {} parameters", config.levels, config.feature_dim(), n_params);

    let shape = make_synthetic_shape(Family::Source, synthetic_shape_seed(Family::Source, 0, 0))?;
    let raster = rasterize(&shape.mesh, config.raster_resolution)?;
    let stack = model.encode(&raster)?;
    for (l, t) in stack.levels.iter().enumerate() {
        println!("level {l}: {:?}", t.shape());
    }
    let points = [Vec3::new(0.0, 0.1, 0.0), Vec3::new(0.4, 0.4, 0.0), Vec3::new(0.05, -0.35, 0.0)];
    for (p, pred) in points.iter().zip(model.predict_with_stack(&stack, &model.all_levels(), &points)?) {
        let layers: Vec<String> = pred.per_layer.iter().map(|v| format!("{v:.3}")).collect();
        println!("{:>6.2?} -> layers [{}] fused {:.3}", p.as_slice(), layers.join(", "), pred.fused);
    }
    Ok(())
}
