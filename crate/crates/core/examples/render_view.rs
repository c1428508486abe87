//! Renders a target-family shape orthographically and prints the mask and a
//! coarse depth map as text.

use uda_recon::geometry::{make_synthetic_shape, synthetic_shape_seed, Family};
use uda_recon::raster::rasterize;

fn main() -> uda_recon::Result<()> {
    let shape = make_synthetic_shape(Family::Target, synthetic_shape_seed(Family::Target, 0, 0))?;
    let r = 32;
    let raster = rasterize(&shape.mesh, r)?;
    let ramp = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    println!("mask{:>width$}depth (darker is nearer)", "", width = r - 2);
    for y in (0..r).rev() {
        let mask: String = (0..r).map(|x| if raster.mask_at(x, y) > 0.0 { '#' } else { '.' }).collect();
        let depth: String = (0..r)
            .map(|x| {
                if raster.mask_at(x, y) == 0.0 {
                    ' '
                } else {
                    let d = raster.depth_at(x, y).clamp(0.0, 1.0);
                    ramp[((1.0 - d) * 9.0).round() as usize]
                }
            })
            .collect();
        println!("{mask}  {depth}");
    }
    println!("covered pixels: {}", raster.coverage());
    Ok(())
}
