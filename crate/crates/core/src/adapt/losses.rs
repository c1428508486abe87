use super::{AdaptConfig, Bandwidth, DomainBatch};
use crate::autodiff::{pairwise_sq_dist, Graph, Tensor, Var};
use crate::error::{Error, Result};
use crate::model::OccupancyModel;

/// Per-level features and decoder outputs of one batch. Index `i` of every
/// vector corresponds to `levels[i]`.
#[derive(Clone, Debug)]
pub struct BatchForward {
    pub levels: Vec<usize>,
    pub source_features: Vec<Var>,
    pub target_features: Vec<Var>,
    pub source_out: Vec<Var>,
    pub target_out: Vec<Var>,
}

/// Raw loss terms of one evaluation; `None` for terms that were skipped.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossReport {
    pub sim: Option<f64>,
    pub source: Option<f64>,
    pub target: Option<f64>,
    pub mi: Option<f64>,
    pub w3: f64,
    pub w4: f64,
    pub total: f64,
}

/// Pixel-aligned features of every point of `views`, stacked per level.
pub fn view_features<P>(
    g: &mut Graph,
    model: &OccupancyModel,
    views: &[super::View<P>],
    levels: &[usize],
    pos: impl Fn(&P) -> crate::geometry::Vec3,
) -> Result<Vec<Var>> {
    let mut per_level: Vec<Vec<Var>> = vec![Vec::new(); levels.len()];
    for view in views.iter().filter(|v| !v.points.is_empty()) {
        let grids = model.encode_in(g, &view.raster)?;
        let pts: Vec<_> = view.points.iter().map(&pos).collect();
        for (i, f) in model.features_in(g, &grids, levels, &pts)?.into_iter().enumerate() {
            per_level[i].push(f);
        }
    }
    per_level
        .iter()
        .map(|parts| if parts.len() == 1 { Ok(parts[0]) } else { g.concat_rows(parts) })
        .collect()
}

pub fn forward_batch(g: &mut Graph, model: &OccupancyModel, batch: &DomainBatch, levels: &[usize]) -> Result<BatchForward> {
    batch.validate()?;
    let source_features = view_features(g, model, &batch.source, levels, |p| p.position)?;
    let target_features = view_features(g, model, &batch.target, levels, |p| p.position)?;
    let source_out = source_features
        .iter()
        .map(|&f| model.decode_in(g, f))
        .collect::<Result<Vec<_>>>()?;
    let target_out = target_features
        .iter()
        .map(|&f| model.decode_in(g, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(BatchForward {
        levels: levels.to_vec(),
        source_features,
        target_features,
        source_out,
        target_out,
    })
}

/// Biased squared MMD with a Gaussian kernel of bandwidth `sigma`.
pub fn mmd_layer(g: &mut Graph, s: Var, t: Var, sigma: f64) -> Result<Var> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("bandwidth {sigma} must be positive")));
    }
    if g.value(s).is_empty() || g.value(t).is_empty() {
        return Err(Error::InvalidArgument("MMD of an empty set".into()));
    }
    let c = -1.0 / (2.0 * sigma * sigma);
    let mut kernel_mean = |a: Var, b: Var| -> Result<Var> {
        let d = g.pairwise_sq_dist(a, b)?;
        let e = g.scale(d, c);
        let k = g.exp(e);
        g.mean(k)
    };
    let kss = kernel_mean(s, s)?;
    let ktt = kernel_mean(t, t)?;
    let kst = kernel_mean(s, t)?;
    let within = g.add(kss, ktt)?;
    let cross = g.scale(kst, 2.0);
    g.sub(within, cross)
}

/// Median pairwise Euclidean distance over the rows of both sets.
pub fn median_bandwidth(s: &Tensor, t: &Tensor) -> Result<f64> {
    let (ns, d) = s.dims2()?;
    let (nt, dt) = t.dims2()?;
    if d != dt {
        return Err(Error::Shape {
            op: "median_bandwidth",
            left: s.shape().to_vec(),
            right: t.shape().to_vec(),
        });
    }
    let n = ns + nt;
    let mut rows = Vec::with_capacity(n * d);
    rows.extend_from_slice(s.data());
    rows.extend_from_slice(t.data());
    let all = pairwise_sq_dist(&rows, &rows, n, n, d);
    let mut pairs: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| all[i * n + j])
        .collect();
    if pairs.is_empty() {
        return Ok(1.0);
    }
    let mid = (pairs.len() - 1) / 2;
    let (_, m, _) = pairs.select_nth_unstable_by(mid, f64::total_cmp);
    let m = m.sqrt();
    Ok(if m > 1e-12 { m } else { 1.0 })
}

pub fn loss_sim(g: &mut Graph, source: &[Var], target: &[Var], bandwidth: Bandwidth) -> Result<Var> {
    if source.is_empty() || source.len() != target.len() {
        return Err(Error::InvalidArgument("source and target need the same non-zero layer count".into()));
    }
    let mut acc: Option<Var> = None;
    for (&s, &t) in source.iter().zip(target) {
        let sigma = match bandwidth {
            Bandwidth::Median => median_bandwidth(g.value(s), g.value(t))?,
            Bandwidth::Fixed(v) => v,
        };
        let m = mmd_layer(g, s, t, sigma)?;
        acc = Some(match acc {
            None => m,
            Some(a) => g.add(a, m)?,
        });
    }
    Ok(g.scale(acc.expect("non-empty"), 1.0 / source.len() as f64))
}

fn layered_mse(g: &mut Graph, outs: &[Var], targets: &[&[f64]]) -> Result<Var> {
    if outs.is_empty() {
        return Err(Error::InvalidArgument("no layers".into()));
    }
    let mut acc: Option<Var> = None;
    for (&o, y) in outs.iter().zip(targets) {
        let n = g.value(o).len();
        if y.len() != n {
            return Err(Error::LabelAccess(format!("{} labels for {n} predictions", y.len())));
        }
        let yv = g.constant(Tensor::new(g.value(o).shape().to_vec(), y.to_vec())?);
        let d = g.sub(o, yv)?;
        let sq = g.mul(d, d)?;
        let m = g.mean(sq)?;
        acc = Some(match acc {
            None => m,
            Some(a) => g.add(a, m)?,
        });
    }
    Ok(g.scale(acc.expect("non-empty"), 1.0 / outs.len() as f64))
}

/// Mean squared error of every layer's source predictions against the labels.
pub fn loss_source(g: &mut Graph, outs: &[Var], labels: &[f64]) -> Result<Var> {
    let targets = vec![labels; outs.len()];
    layered_mse(g, outs, &targets)
}

/// Mean squared error against gradient-free per-layer pseudo-labels.
pub fn loss_target(g: &mut Graph, outs: &[Var], pseudo: &[Vec<f64>]) -> Result<Var> {
    if pseudo.len() != outs.len() {
        return Err(Error::LabelAccess(format!(
            "pseudo-labels for {} layers, predictions for {}",
            pseudo.len(),
            outs.len()
        )));
    }
    let targets: Vec<&[f64]> = pseudo.iter().map(Vec::as_slice).collect();
    layered_mse(g, outs, &targets)
}

fn binary_entropy(g: &mut Graph, x: Var) -> Result<Var> {
    let lx = g.log(x);
    let a = g.mul(x, lx)?;
    let omx = g.one_minus(x);
    let lomx = g.log(omx);
    let b = g.mul(omx, lomx)?;
    let s = g.add(a, b)?;
    Ok(g.scale(s, -1.0))
}

/// Entropy of the mean prediction minus the mean prediction entropy,
/// averaged over layers.
pub fn loss_mi(g: &mut Graph, outs: &[Var]) -> Result<Var> {
    if outs.is_empty() {
        return Err(Error::InvalidArgument("no layers".into()));
    }
    let mut acc: Option<Var> = None;
    for &o in outs {
        let pbar = g.mean(o)?;
        let h_marginal = binary_entropy(g, pbar)?;
        let h = binary_entropy(g, o)?;
        let h_cond = g.mean(h)?;
        let mi = g.sub(h_marginal, h_cond)?;
        acc = Some(match acc {
            None => mi,
            Some(a) => g.add(a, mi)?,
        });
    }
    Ok(g.scale(acc.expect("non-empty"), 1.0 / outs.len() as f64))
}

/// Graph-free evaluation of [`loss_mi`] on per-layer prediction vectors.
pub fn loss_mi_values(per_layer: &[Vec<f64>]) -> Result<f64> {
    let mut g = Graph::new();
    let outs = per_layer
        .iter()
        .map(|p| Ok(g.constant(Tensor::new(vec![p.len(), 1], p.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    let v = loss_mi(&mut g, &outs)?;
    Ok(g.scalar_value(v))
}

/// Weighted sum `w1·L_sim + w2·L_source + w3·L_target − w4·L_mi` with the
/// ramped `w3`, `w4`. Terms that are ablated or carry zero weight are not
/// evaluated. `pseudo` is required once `w3 > 0`.
pub fn total_loss(
    g: &mut Graph,
    model: &OccupancyModel,
    batch: &DomainBatch,
    pseudo: Option<&[Vec<f64>]>,
    epoch: usize,
    cfg: &AdaptConfig,
) -> Result<(Var, LossReport)> {
    let levels = cfg.levels(model.config().levels);
    let fw = forward_batch(g, model, batch, &levels)?;
    let w = &cfg.weights;
    let ab = &cfg.ablation;
    let (w3, w4) = w.scheduled(epoch);
    let mut report = LossReport {
        w3,
        w4,
        ..LossReport::default()
    };
    let mut terms = Vec::new();
    if !ab.no_mmd && w.w1 != 0.0 {
        let v = loss_sim(g, &fw.source_features, &fw.target_features, cfg.bandwidth)?;
        report.sim = Some(g.scalar_value(v));
        terms.push(g.scale(v, w.w1));
    }
    if !ab.no_source && w.w2 != 0.0 {
        let v = loss_source(g, &fw.source_out, &batch.source_labels())?;
        report.source = Some(g.scalar_value(v));
        terms.push(g.scale(v, w.w2));
    }
    if !ab.no_target && w3 > 0.0 {
        let pseudo = pseudo.ok_or_else(|| Error::LabelAccess("pseudo-labels required".into()))?;
        let v = loss_target(g, &fw.target_out, pseudo)?;
        report.target = Some(g.scalar_value(v));
        terms.push(g.scale(v, w3));
    }
    if !ab.no_mi && w4 > 0.0 {
        let v = loss_mi(g, &fw.target_out)?;
        report.mi = Some(g.scalar_value(v));
        terms.push(g.scale(v, -w4));
    }
    let mut total = match terms.first() {
        Some(&t) => t,
        None => g.scalar(0.0),
    };
    for &t in terms.iter().skip(1) {
        total = g.add(total, t)?;
    }
    report.total = g.scalar_value(total);
    Ok((total, report))
}
