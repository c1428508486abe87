//! Extracts an analytic sphere at several grid resolutions and writes the
//! finest one as OBJ.

use std::f64::consts::PI;

use uda_recon::geometry::save_mesh;
use uda_recon::surface::{marching_cubes, postprocess, OccupancyGrid, ISO_LEVEL};

fn main() -> uda_recon::Result<()> {
    let r = 0.35;
    println!("   G   faces    area (exact {:.4})  volume (exact {:.4})  watertight", 4.0 * PI * r * r, 4.0 / 3.0 * PI * r.powi(3));
    let mut last = None;
    for g in [16, 32, 64, 128] {
        let grid = OccupancyGrid::from_fn(g, |p| (0.5 + (r - p.norm()) * (g - 1) as f64).clamp(0.0, 1.0))?;
        let mesh = marching_cubes(&grid, ISO_LEVEL)?;
        println!(
            "{g:>4}  {:>6}    {:.4}              {:.4}               {}",
            mesh.faces.len(),
            mesh.area(),
            mesh.signed_volume(),
            mesh.is_watertight()
        );
        last = Some(mesh);
    }
    let mesh = postprocess(&last.expect("ran"), 0.05)?;
    let path = std::env::temp_dir().join("sphere_g128.obj");
    save_mesh(&mesh, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
