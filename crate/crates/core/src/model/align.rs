use super::FeatureStack;
use crate::autodiff::{bilinear_forward, Taps};
use crate::geometry::Vec3;
use crate::raster::project;

/// Per-level feature vectors: `C` sampled channels followed by the depth.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelAlignedFeature {
    pub levels: Vec<Vec<f64>>,
}

/// Bilinear taps of point `p` on an `h×w` grid covering the raster of
/// resolution `r`. Grid cell centers sit at half-integer positions;
/// coordinates are clamped to the grid.
pub fn bilinear_taps(p: &Vec3, r: usize, h: usize, w: usize) -> Taps {
    let proj = project(p, r);
    let x = (proj.u * w as f64 / r as f64 - 0.5).clamp(0.0, (w - 1) as f64);
    let y = (proj.v * h as f64 / r as f64 - 0.5).clamp(0.0, (h - 1) as f64);
    let x0 = (x.floor() as usize).min(w.saturating_sub(2));
    let y0 = (y.floor() as usize).min(h.saturating_sub(2));
    let (tx, ty) = (x - x0 as f64, y - y0 as f64);
    [
        (y0 * w + x0, (1.0 - tx) * (1.0 - ty)),
        (y0 * w + x0 + 1, tx * (1.0 - ty)),
        ((y0 + 1) * w + x0, (1.0 - tx) * ty),
        ((y0 + 1) * w + x0 + 1, tx * ty),
    ]
}

pub(super) fn pixel_align(stack: &FeatureStack, p: &Vec3, r: usize) -> PixelAlignedFeature {
    let z = project(p, r).z;
    let levels = stack
        .levels
        .iter()
        .map(|t| {
            let (c, h, w) = (t.shape()[0], t.shape()[1], t.shape()[2]);
            let taps = bilinear_taps(p, r, h, w);
            let mut f = bilinear_forward(t.data(), c, h * w, &[taps]);
            f.push(z);
            f
        })
        .collect();
    PixelAlignedFeature { levels }
}
