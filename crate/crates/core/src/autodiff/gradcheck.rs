use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{Graph, Var};
use super::params::{ParamId, ParamStore};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GradCheckOptions {
    pub step: f64,
    /// Upper bound on coordinates probed per parameter; `None` probes all.
    pub coords_per_param: Option<usize>,
    pub seed: u64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            step: 1e-4,
            coords_per_param: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: Option<String>,
    pub coords_checked: usize,
    pub value: f64,
}

/// Compares reverse-mode gradients against central differences.
///
/// `f` must build the scalar objective from the current parameter values and
/// be deterministic. The error for each coordinate is
/// `|analytic - numeric| / max(1, |numeric|)`.
pub fn grad_check<F>(store: &mut ParamStore, opts: &GradCheckOptions, mut f: F) -> Result<GradCheckReport>
where
    F: FnMut(&mut Graph, &ParamStore) -> Result<Var>,
{
    let mut analytic_store = store.clone();
    analytic_store.zero_grad();
    let value = {
        let mut g = Graph::new();
        let root = f(&mut g, &analytic_store)?;
        g.backward(root, &mut analytic_store)?;
        g.scalar_value(root)
    };
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("objective = {value}")));
    }

    let mut eval = |store: &ParamStore| -> Result<f64> {
        let mut g = Graph::new();
        let root = f(&mut g, store)?;
        let v = g.scalar_value(root);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("objective = {v}")));
        }
        Ok(v)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ids: Vec<ParamId> = store.ids().collect();
    let mut max_rel = 0.0f64;
    let mut worst = None;
    let mut checked = 0;
    for id in ids {
        let n = store.get(id).value.len();
        let coords: Vec<usize> = match opts.coords_per_param {
            Some(k) if k < n => sample(&mut rng, n, k).into_vec(),
            _ => (0..n).collect(),
        };
        for c in coords {
            let analytic = analytic_store.get(id).grad.data()[c];
            if !analytic.is_finite() {
                return Err(Error::NonFinite(format!(
                    "analytic gradient of {}[{c}]",
                    store.get(id).name
                )));
            }
            let orig = store.get(id).value.data()[c];
            store.get_mut(id).value.data_mut()[c] = orig + opts.step;
            let plus = eval(store);
            store.get_mut(id).value.data_mut()[c] = orig - opts.step;
            let minus = eval(store);
            store.get_mut(id).value.data_mut()[c] = orig;
            let numeric = (plus? - minus?) / (2.0 * opts.step);
            let rel = (analytic - numeric).abs() / numeric.abs().max(1.0);
            if rel > max_rel {
                max_rel = rel;
                worst = Some(format!("{}[{c}]", store.get(id).name));
            }
            checked += 1;
        }
    }
    Ok(GradCheckReport {
        max_rel_error: max_rel,
        worst_param: worst,
        coords_checked: checked,
        value,
    })
}
