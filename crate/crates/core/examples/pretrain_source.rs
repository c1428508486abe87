//! Pretrains a reduced-size model on the labelled source family and
//! reconstructs one held-out target shape with it.
//!
//!     cargo run --release --example pretrain_source

use uda_recon::metrics::chamfer;
use uda_recon::train::{pretrain_source, reconstruct, Dataset, RunConfig};

fn main() -> uda_recon::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.model.channels = 8;
    cfg.model.hidden = vec![32, 16];
    cfg.pretrain.max_epochs = 60;
    cfg.eval.grid = 32;
    let data = Dataset::generate(&cfg)?;
    let pre = pretrain_source(&cfg, &data)?;
    for e in pre.log.iter().step_by(5) {
        println!("epoch {:>3}  loss {:.4}  held-out accuracy {:.3}", e.epoch, e.loss, e.accuracy);
    }
    println!("converged: {}", pre.converged);
    let test = &data.target_test[0];
    let r = reconstruct(&pre.model, &pre.model.all_levels(), &test.raster, cfg.eval.grid, cfg.eval.min_fraction)?;
    match r.mesh {
        Some(m) => println!("{}: {} faces, CD {:.4}", test.name, m.faces.len(), chamfer(&m, &test.mesh, 2000, 0)?),
        None => println!("{}: ‡ {}", test.name, r.failure.unwrap_or_default()),
    }
    Ok(())
}
