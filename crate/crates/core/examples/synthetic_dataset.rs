//! Generates a few shapes of both synthetic families and writes them, with
//! their mask and depth renderings, to a directory.
//!
//!     cargo run --example synthetic_dataset -- /tmp/shapes

use std::path::PathBuf;

use uda_recon::geometry::{make_synthetic_shape, save_mesh, synthetic_shape_seed, Family};
use uda_recon::raster::rasterize;

fn main() -> uda_recon::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("uda_shapes"));
    std::fs::create_dir_all(&out).map_err(|e| uda_recon::Error::io(&out, e))?;
    for family in [Family::Source, Family::Target] {
        for i in 0..3 {
            let shape = make_synthetic_shape(family, synthetic_shape_seed(family, 0, i))?;
            let m = &shape.mesh;
            let name = format!("{}_{i}", family.as_str());
            save_mesh(m, &out.join(format!("{name}.obj")))?;
            let raster = rasterize(m, 64)?;
            raster.write_pgm(&out.join(format!("{name}_mask.pgm")), &out.join(format!("{name}_depth.pgm")))?;
            println!(
                "{name:<9} faces {:>5}  volume {:.4} (analytic {:.4})  watertight {}  silhouette px {}",
                m.faces.len(),
                m.signed_volume(),
                shape.analytic_volume,
                m.is_watertight(),
                raster.coverage()
            );
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}
