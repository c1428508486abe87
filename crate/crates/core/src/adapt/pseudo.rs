use super::Schedule;
use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Copy of `f` with the trailing depth component multiplied by `lambda`.
pub fn reweight(f: &[f64], lambda: f64) -> Vec<f64> {
    let mut out = f.to_vec();
    if let Some(z) = out.last_mut() {
        *z *= lambda;
    }
    out
}

/// Indices of the `k` rows of `refs` (`m×d`) closest to `query`, nearest
/// first; equal distances go to the lower index.
pub fn knn_indices(query: &[f64], refs: &[f64], d: usize, k: usize) -> Vec<usize> {
    let m = refs.len() / d;
    let mut cand: Vec<(f64, usize)> = (0..m)
        .map(|j| {
            let r = &refs[j * d..(j + 1) * d];
            (query.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum(), j)
        })
        .collect();
    let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = k.min(m);
    if k < m {
        cand.select_nth_unstable_by(k, by_key);
        cand.truncate(k);
    }
    cand.sort_unstable_by(by_key);
    cand.into_iter().map(|(_, j)| j).collect()
}

fn reweight_rows(t: &Tensor, lambda: f64) -> Result<(Vec<f64>, usize)> {
    let (n, d) = t.dims2()?;
    let mut data = t.data().to_vec();
    if d > 0 {
        for i in 0..n {
            data[i * d + d - 1] *= lambda;
        }
    }
    Ok((data, d))
}

/// Mean source label of each target row's `k` nearest source rows, measured
/// on depth-reweighted features.
pub fn aggregate_neighbours(target: &Tensor, source: &Tensor, labels: &[f64], k: usize, lambda: f64) -> Result<Vec<f64>> {
    let (m, d) = source.dims2()?;
    let (_, dt) = target.dims2()?;
    if d != dt {
        return Err(Error::Shape {
            op: "aggregate_neighbours",
            left: target.shape().to_vec(),
            right: source.shape().to_vec(),
        });
    }
    if labels.len() != m {
        return Err(Error::LabelAccess(format!("{} labels for {m} source rows", labels.len())));
    }
    if k == 0 || k > m {
        return Err(Error::InvalidArgument(format!("K = {k} with {m} source points")));
    }
    let (src, _) = reweight_rows(source, lambda)?;
    let (tgt, _) = reweight_rows(target, lambda)?;
    Ok(tgt
        .chunks(d)
        .map(|q| {
            let idx = knn_indices(q, &src, d, k);
            idx.iter().map(|&j| labels[j]).sum::<f64>() / k as f64
        })
        .collect())
}

/// Per-layer pseudo-labels of a target point pool.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PseudoLabelState {
    /// `labels[layer][point]`
    pub labels: Vec<Vec<f64>>,
    pub epoch: usize,
    pub momentum: f64,
}

impl PseudoLabelState {
    pub fn layers(&self) -> usize {
        self.labels.len()
    }

    pub fn points(&self) -> usize {
        self.labels.first().map_or(0, Vec::len)
    }

    /// Per-layer labels of the given pool indices.
    pub fn gather(&self, idx: &[usize]) -> Result<Vec<Vec<f64>>> {
        self.labels
            .iter()
            .map(|layer| {
                idx.iter()
                    .map(|&i| {
                        layer
                            .get(i)
                            .copied()
                            .ok_or_else(|| Error::LabelAccess(format!("no pseudo-label for point {i}")))
                    })
                    .collect()
            })
            .collect()
    }
}

/// Replaces the pseudo-labels with `m·o + (1 − m)·ŷ`, where `ŷ` is the
/// neighbourhood aggregate and `m` the ramp at `epoch`.
pub fn update_pseudo_labels(
    state: &mut PseudoLabelState,
    predictions: &[Vec<f64>],
    aggregates: &[Vec<f64>],
    epoch: usize,
    schedule: &Schedule,
) -> Result<()> {
    if predictions.len() != aggregates.len() || predictions.iter().zip(aggregates).any(|(o, a)| o.len() != a.len()) {
        return Err(Error::InvalidArgument("predictions and aggregates are not aligned".into()));
    }
    let m = schedule.ramp(epoch);
    state.labels = predictions
        .iter()
        .zip(aggregates)
        .map(|(o, a)| {
            o.iter()
                .zip(a)
                .map(|(&o, &a)| (m * o + (1.0 - m) * a).clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    state.epoch = epoch;
    state.momentum = m;
    Ok(())
}
