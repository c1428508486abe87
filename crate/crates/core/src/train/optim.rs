use crate::autodiff::{ParamStore, Tensor};

use super::OptimConfig;

/// RMSProp with a bias-corrected second moment:
/// `v ← ρ·v + (1−ρ)·g²`, `θ ← θ − lr·g / (√(v / (1−ρᵗ)) + ε)`.
/// Frozen parameters are skipped.
#[derive(Clone, Debug)]
pub struct RmsProp {
    cfg: OptimConfig,
    sq: Vec<Option<Tensor>>,
    t: i32,
}

impl RmsProp {
    pub fn new(cfg: OptimConfig) -> Self {
        RmsProp { cfg, sq: Vec::new(), t: 0 }
    }

    /// Applies the accumulated gradients, then clears them.
    pub fn step(&mut self, store: &mut ParamStore) {
        let ids: Vec<_> = store.ids().collect();
        if self.sq.len() < ids.len() {
            self.sq.resize(ids.len(), None);
        }
        let OptimConfig { lr, rho, eps } = self.cfg;
        self.t += 1;
        let correction = 1.0 - rho.powi(self.t);
        for id in ids {
            let p = store.get_mut(id);
            if !p.trainable {
                continue;
            }
            let v = self.sq[id.index()].get_or_insert_with(|| Tensor::zeros(p.value.shape()));
            let g = p.grad.data();
            for ((w, s), &g) in p.value.data_mut().iter_mut().zip(v.data_mut()).zip(g) {
                *s = rho * *s + (1.0 - rho) * g * g;
                *w -= lr * g / ((*s / correction).sqrt() + eps);
            }
        }
        store.zero_grad();
    }
}
