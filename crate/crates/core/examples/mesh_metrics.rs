//! Point-to-surface and Chamfer distances between a sphere and perturbed
//! copies of it.

use uda_recon::geometry::primitives::icosphere;
use uda_recon::metrics::{chamfer, p2s, DEFAULT_SAMPLES, DISTANCE_CONVENTION};

fn main() -> uda_recon::Result<()> {
    let mut reference = icosphere(4);
    reference.transform(|p| p * 0.4);
    println!("distances are {DISTANCE_CONVENTION}");
    println!("change              P2S       CD");
    for (label, f) in [
        ("identical", 1.0),
        ("scaled 1.01", 1.01),
        ("scaled 1.05", 1.05),
        ("scaled 0.90", 0.90),
    ] {
        let mut m = reference.clone();
        m.transform(|p| p * f);
        println!(
            "{label:<16} {:.5}  {:.5}",
            p2s(&m, &reference, DEFAULT_SAMPLES, 0)?,
            chamfer(&m, &reference, DEFAULT_SAMPLES, 0)?
        );
    }
    Ok(())
}
