use std::collections::HashMap;
use std::rc::Rc;

use super::params::{ParamId, ParamStore};
use super::tensor::{gemm_acc, gemm_nt_acc, gemm_tn_acc, Tensor};
use crate::error::{Error, Result};

/// Lower bound applied inside `log` so entropies stay finite at saturated inputs.
pub const LOG_EPS: f64 = 1e-12;

/// Handle to a node in a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Bilinear taps for one sample: four (flat grid index, weight) pairs.
pub type Taps = [(usize, f64); 4];

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Param,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    Affine(Var, Var, Var),
    LeakyRelu(Var, f64),
    Tanh(Var),
    Sigmoid(Var),
    Log(Var),
    Exp(Var),
    Sum(Var),
    Mean(Var),
    SqNorm(Var),
    ConcatCols(Vec<Var>),
    ConcatRows(Vec<Var>),
    GatherRows(Var, Rc<Vec<usize>>),
    Conv3x3(Var, Var, Var),
    AvgPool2(Var),
    Bilinear(Var, Rc<Vec<Taps>>),
    PairwiseSqDist(Var, Var),
    Reshape(Var),
}

/// A node of the computation graph: forward value, accumulated gradient and
/// the operation that produced it.
#[derive(Clone, Debug)]
pub struct DiffValue {
    data: Tensor,
    grad: Option<Tensor>,
    op: Op,
}

impl DiffValue {
    pub fn data(&self) -> &Tensor {
        &self.data
    }

    pub fn grad(&self) -> Option<&Tensor> {
        self.grad.as_ref()
    }
}

/// Define-by-run tape. Nodes are appended in creation order, which is a
/// valid topological order for the reverse sweep.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<DiffValue>,
    params: HashMap<ParamId, Var>,
}

fn shape_err(op: &'static str, a: &Tensor, b: &Tensor) -> Error {
    Error::Shape {
        op,
        left: a.shape().to_vec(),
        right: b.shape().to_vec(),
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, data: Tensor, op: Op) -> Var {
        self.nodes.push(DiffValue {
            data,
            grad: None,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn node(&self, v: Var) -> &DiffValue {
        &self.nodes[v.0]
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].data
    }

    pub fn scalar_value(&self, v: Var) -> f64 {
        self.nodes[v.0].data.item()
    }

    pub fn grad(&self, v: Var) -> Option<&Tensor> {
        self.nodes[v.0].grad.as_ref()
    }

    /// Constant input (receives a gradient but is not trained).
    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf)
    }

    pub fn scalar(&mut self, v: f64) -> Var {
        self.constant(Tensor::scalar(v))
    }

    /// Leaf bound to a stored parameter. Repeated calls return the same node.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        if let Some(&v) = self.params.get(&id) {
            return v;
        }
        let v = self.push(store.get(id).value.clone(), Op::Param);
        self.params.insert(id, v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (m, k) = ta.dims2()?;
        let (k2, n) = tb.dims2()?;
        if k != k2 {
            return Err(shape_err("matmul", ta, tb));
        }
        let mut out = vec![0.0; m * n];
        gemm_acc(ta.data(), tb.data(), m, k, n, &mut out);
        Ok(self.push(Tensor::new(vec![m, n], out)?, Op::MatMul(a, b)))
    }

    fn zip_same(&mut self, a: Var, b: Var, name: &'static str, f: fn(f64, f64) -> f64) -> Result<Tensor> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(shape_err(name, ta, tb));
        }
        let data = ta.data().iter().zip(tb.data()).map(|(&x, &y)| f(x, y)).collect();
        Tensor::new(ta.shape().to_vec(), data)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip_same(a, b, "add", |x, y| x + y)?;
        Ok(self.push(t, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip_same(a, b, "sub", |x, y| x - y)?;
        Ok(self.push(t, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let t = self.zip_same(a, b, "mul", |x, y| x * y)?;
        Ok(self.push(t, Op::Mul(a, b)))
    }

    /// `a[i, j] + row[j]` for `a: n×m`, `row: m`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (ta, tr) = (self.value(a), self.value(row));
        let (n, m) = ta.dims2()?;
        if tr.len() != m {
            return Err(shape_err("add_row", ta, tr));
        }
        let mut data = ta.data().to_vec();
        for i in 0..n {
            for (o, r) in data[i * m..(i + 1) * m].iter_mut().zip(tr.data()) {
                *o += r;
            }
        }
        let t = Tensor::new(vec![n, m], data)?;
        Ok(self.push(t, Op::AddRow(a, row)))
    }

    fn map(&mut self, a: Var, f: impl Fn(f64) -> f64) -> Tensor {
        let ta = self.value(a);
        let data = ta.data().iter().map(|&x| f(x)).collect();
        Tensor::new(ta.shape().to_vec(), data).expect("same length")
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let t = self.map(a, |x| x * s);
        self.push(t, Op::Scale(a, s))
    }

    pub fn add_scalar(&mut self, a: Var, s: f64) -> Var {
        let t = self.map(a, |x| x + s);
        self.push(t, Op::AddScalar(a))
    }

    /// `1 - a`
    pub fn one_minus(&mut self, a: Var) -> Var {
        let neg = self.scale(a, -1.0);
        self.add_scalar(neg, 1.0)
    }

    /// Fully connected layer `x · w + b` with `x: n×in`, `w: in×out`, `b: out`.
    pub fn affine(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (tx, tw, tb) = (self.value(x), self.value(w), self.value(b));
        let (n, din) = tx.dims2()?;
        let (din2, dout) = tw.dims2()?;
        if din != din2 {
            return Err(shape_err("affine", tx, tw));
        }
        if tb.len() != dout {
            return Err(shape_err("affine", tw, tb));
        }
        let mut out = Vec::with_capacity(n * dout);
        for _ in 0..n {
            out.extend_from_slice(tb.data());
        }
        gemm_acc(tx.data(), tw.data(), n, din, dout, &mut out);
        let t = Tensor::new(vec![n, dout], out)?;
        Ok(self.push(t, Op::Affine(x, w, b)))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let t = self.map(a, |x| if x > 0.0 { x } else { slope * x });
        self.push(t, Op::LeakyRelu(a, slope))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let t = self.map(a, f64::tanh);
        self.push(t, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let t = self.map(a, sigmoid);
        self.push(t, Op::Sigmoid(a))
    }

    /// Natural log guarded as `ln(max(x, LOG_EPS))`.
    pub fn log(&mut self, a: Var) -> Var {
        let t = self.map(a, |x| x.max(LOG_EPS).ln());
        self.push(t, Op::Log(a))
    }

    pub fn exp(&mut self, a: Var) -> Var {
        let t = self.map(a, f64::exp);
        self.push(t, Op::Exp(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        let ta = self.value(a);
        if ta.is_empty() {
            return Err(Error::InvalidArgument("mean of empty tensor".into()));
        }
        let s: f64 = ta.data().iter().sum::<f64>() / ta.len() as f64;
        Ok(self.push(Tensor::scalar(s), Op::Mean(a)))
    }

    pub fn sq_norm(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().map(|x| x * x).sum();
        self.push(Tensor::scalar(s), Op::SqNorm(a))
    }

    /// Horizontal concatenation of 2-D tensors with equal row counts.
    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let first = self.value(parts[0]);
        let (rows, _) = first.dims2()?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let t = self.value(p);
            let (r, c) = t.dims2()?;
            if r != rows {
                return Err(shape_err("concat_cols", first, t));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(rows * total);
        for i in 0..rows {
            for (&p, &w) in parts.iter().zip(&widths) {
                out.extend_from_slice(&self.value(p).data()[i * w..(i + 1) * w]);
            }
        }
        let t = Tensor::new(vec![rows, total], out)?;
        Ok(self.push(t, Op::ConcatCols(parts.to_vec())))
    }

    /// Vertical concatenation of 2-D tensors with equal column counts.
    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let first = self.value(parts[0]);
        let (_, cols) = first.dims2()?;
        let mut rows = 0;
        let mut out = Vec::new();
        for &p in parts {
            let t = self.value(p);
            let (r, c) = t.dims2()?;
            if c != cols {
                return Err(shape_err("concat_rows", first, t));
            }
            rows += r;
            out.extend_from_slice(t.data());
        }
        let t = Tensor::new(vec![rows, cols], out)?;
        Ok(self.push(t, Op::ConcatRows(parts.to_vec())))
    }

    /// Indexed row selection from a 2-D tensor.
    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Result<Var> {
        let ta = self.value(a);
        let (n, m) = ta.dims2()?;
        let mut out = Vec::with_capacity(idx.len() * m);
        for &i in idx {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "gather index {i} out of range for {n} rows"
                )));
            }
            out.extend_from_slice(&ta.data()[i * m..(i + 1) * m]);
        }
        let t = Tensor::new(vec![idx.len(), m], out)?;
        Ok(self.push(t, Op::GatherRows(a, Rc::new(idx.to_vec()))))
    }

    pub fn reshape(&mut self, a: Var, shape: Vec<usize>) -> Result<Var> {
        let t = self.value(a).clone().reshaped(shape)?;
        Ok(self.push(t, Op::Reshape(a)))
    }

    /// 3×3 convolution with zero padding 1: `x: Cin×H×W`, `w: Cout×Cin×3×3`, `b: Cout`.
    pub fn conv3x3(&mut self, x: Var, w: Var, b: Var) -> Result<Var> {
        let (tx, tw, tb) = (self.value(x), self.value(w), self.value(b));
        let (cin, h, wd) = match tx.shape() {
            &[c, h, w] => (c, h, w),
            _ => return Err(shape_err("conv3x3", tx, tw)),
        };
        let cout = match tw.shape() {
            &[co, ci, 3, 3] if ci == cin => co,
            _ => return Err(shape_err("conv3x3", tx, tw)),
        };
        if tb.len() != cout {
            return Err(shape_err("conv3x3", tw, tb));
        }
        let out = conv3x3_forward(tx.data(), tw.data(), tb.data(), cin, cout, h, wd);
        let t = Tensor::new(vec![cout, h, wd], out)?;
        Ok(self.push(t, Op::Conv3x3(x, w, b)))
    }

    /// 2× average pooling over the two trailing axes of `C×H×W`.
    pub fn avg_pool2(&mut self, x: Var) -> Result<Var> {
        let tx = self.value(x);
        let (c, h, w) = match tx.shape() {
            &[c, h, w] if h % 2 == 0 && w % 2 == 0 => (c, h, w),
            _ => {
                return Err(Error::Shape {
                    op: "avg_pool2",
                    left: tx.shape().to_vec(),
                    right: vec![0, 2, 2],
                })
            }
        };
        let out = avg_pool2_forward(tx.data(), c, h, w);
        let t = Tensor::new(vec![c, h / 2, w / 2], out)?;
        Ok(self.push(t, Op::AvgPool2(x)))
    }

    /// Weighted 4-tap sampling of a `C×H×W` grid; output is `n×C`.
    pub fn bilinear(&mut self, grid: Var, taps: Rc<Vec<Taps>>) -> Result<Var> {
        let tg = self.value(grid);
        let (c, h, w) = match tg.shape() {
            &[c, h, w] => (c, h, w),
            other => {
                return Err(Error::Shape {
                    op: "bilinear",
                    left: other.to_vec(),
                    right: vec![0, 0, 0],
                })
            }
        };
        if taps.iter().flatten().any(|&(i, _)| i >= h * w) {
            return Err(Error::InvalidArgument("bilinear tap out of range".into()));
        }
        let out = bilinear_forward(tg.data(), c, h * w, &taps);
        let t = Tensor::new(vec![taps.len(), c], out)?;
        Ok(self.push(t, Op::Bilinear(grid, taps)))
    }

    /// Squared Euclidean distances between rows: `a: n×d`, `b: m×d` → `n×m`.
    pub fn pairwise_sq_dist(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        let (n, d) = ta.dims2()?;
        let (m, d2) = tb.dims2()?;
        if d != d2 {
            return Err(shape_err("pairwise_sq_dist", ta, tb));
        }
        let out = pairwise_sq_dist(ta.data(), tb.data(), n, m, d);
        let t = Tensor::new(vec![n, m], out)?;
        Ok(self.push(t, Op::PairwiseSqDist(a, b)))
    }

    /// Reverse sweep from a scalar root. Node gradients are recomputed from
    /// scratch; parameter gradients are added into `store`.
    pub fn backward(&mut self, root: Var, store: &mut ParamStore) -> Result<()> {
        self.backward_nodes(root)?;
        for (&pid, &v) in &self.params {
            if let Some(g) = &self.nodes[v.0].grad {
                store.get_mut(pid).grad.add_assign(g);
            }
        }
        Ok(())
    }

    /// Reverse sweep that only fills node gradients.
    pub fn backward_nodes(&mut self, root: Var) -> Result<()> {
        let rt = &self.nodes[root.0].data;
        if !rt.is_scalar() {
            return Err(Error::NonScalarRoot(rt.shape().to_vec()));
        }
        let seed = Tensor::full(rt.shape(), 1.0);
        for n in &mut self.nodes {
            n.grad = None;
        }
        self.nodes[root.0].grad = Some(seed);
        for i in (0..=root.0).rev() {
            let Some(g) = self.nodes[i].grad.take() else {
                continue;
            };
            let contributions = self.local_grads(i, &g)?;
            self.nodes[i].grad = Some(g);
            for (v, t) in contributions {
                match &mut self.nodes[v.0].grad {
                    Some(acc) => acc.add_assign(&t),
                    slot @ None => *slot = Some(t),
                }
            }
        }
        Ok(())
    }

    fn local_grads(&self, i: usize, g: &Tensor) -> Result<Vec<(Var, Tensor)>> {
        let node = &self.nodes[i];
        let out = &node.data;
        let like = |v: Var, data: Vec<f64>| -> Tensor {
            Tensor::new(self.value(v).shape().to_vec(), data).expect("gradient shape")
        };
        let unary = |a: Var, f: &dyn Fn(f64, f64, f64) -> f64| -> Vec<(Var, Tensor)> {
            let x = self.value(a).data();
            let data = x
                .iter()
                .zip(out.data())
                .zip(g.data())
                .map(|((&x, &y), &gv)| f(x, y, gv))
                .collect();
            vec![(a, like(a, data))]
        };
        let gs = g.data();
        let res = match &node.op {
            Op::Leaf | Op::Param => vec![],
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let (m, k) = ta.dims2()?;
                let (_, n) = tb.dims2()?;
                let mut da = vec![0.0; m * k];
                gemm_nt_acc(gs, tb.data(), m, n, k, &mut da);
                let mut db = vec![0.0; k * n];
                gemm_tn_acc(ta.data(), gs, m, k, n, &mut db);
                vec![(*a, like(*a, da)), (*b, like(*b, db))]
            }
            Op::Add(a, b) => vec![(*a, g.clone()), (*b, g.clone())],
            Op::Sub(a, b) => vec![
                (*a, g.clone()),
                (*b, like(*b, gs.iter().map(|v| -v).collect())),
            ],
            Op::Mul(a, b) => {
                let (xa, xb) = (self.value(*a).data(), self.value(*b).data());
                let da = gs.iter().zip(xb).map(|(g, y)| g * y).collect();
                let db = gs.iter().zip(xa).map(|(g, x)| g * x).collect();
                vec![(*a, like(*a, da)), (*b, like(*b, db))]
            }
            Op::AddRow(a, row) => {
                let m = self.value(*row).len();
                let mut dr = vec![0.0; m];
                for chunk in gs.chunks(m) {
                    for (d, v) in dr.iter_mut().zip(chunk) {
                        *d += v;
                    }
                }
                vec![(*a, g.clone()), (*row, like(*row, dr))]
            }
            Op::Scale(a, s) => vec![(*a, like(*a, gs.iter().map(|v| v * s).collect()))],
            Op::AddScalar(a) => vec![(*a, g.clone())],
            Op::Affine(x, w, b) => {
                let (tx, tw) = (self.value(*x), self.value(*w));
                let (n, din) = tx.dims2()?;
                let (_, dout) = tw.dims2()?;
                let mut dx = vec![0.0; n * din];
                gemm_nt_acc(gs, tw.data(), n, dout, din, &mut dx);
                let mut dw = vec![0.0; din * dout];
                gemm_tn_acc(tx.data(), gs, n, din, dout, &mut dw);
                let mut db = vec![0.0; dout];
                for chunk in gs.chunks(dout) {
                    for (d, v) in db.iter_mut().zip(chunk) {
                        *d += v;
                    }
                }
                vec![(*x, like(*x, dx)), (*w, like(*w, dw)), (*b, like(*b, db))]
            }
            Op::LeakyRelu(a, slope) => {
                let s = *slope;
                unary(*a, &|x, _, g| if x > 0.0 { g } else { s * g })
            }
            Op::Tanh(a) => unary(*a, &|_, y, g| g * (1.0 - y * y)),
            Op::Sigmoid(a) => unary(*a, &|_, y, g| g * y * (1.0 - y)),
            Op::Log(a) => unary(*a, &|x, _, g| if x > LOG_EPS { g / x } else { 0.0 }),
            Op::Exp(a) => unary(*a, &|_, y, g| g * y),
            Op::Sum(a) => {
                let n = self.value(*a).len();
                vec![(*a, like(*a, vec![gs[0]; n]))]
            }
            Op::Mean(a) => {
                let n = self.value(*a).len();
                vec![(*a, like(*a, vec![gs[0] / n as f64; n]))]
            }
            Op::SqNorm(a) => {
                let d = self.value(*a).data().iter().map(|x| 2.0 * x * gs[0]).collect();
                vec![(*a, like(*a, d))]
            }
            Op::ConcatCols(parts) => {
                let (rows, total) = out.dims2()?;
                let mut offset = 0;
                let mut res = Vec::with_capacity(parts.len());
                for &p in parts {
                    let (_, w) = self.value(p).dims2()?;
                    let mut d = Vec::with_capacity(rows * w);
                    for r in 0..rows {
                        d.extend_from_slice(&gs[r * total + offset..r * total + offset + w]);
                    }
                    offset += w;
                    res.push((p, like(p, d)));
                }
                res
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                let mut res = Vec::with_capacity(parts.len());
                for &p in parts {
                    let n = self.value(p).len();
                    res.push((p, like(p, gs[offset..offset + n].to_vec())));
                    offset += n;
                }
                res
            }
            Op::GatherRows(a, idx) => {
                let ta = self.value(*a);
                let (_, m) = ta.dims2()?;
                let mut d = vec![0.0; ta.len()];
                for (r, &src) in idx.iter().enumerate() {
                    for j in 0..m {
                        d[src * m + j] += gs[r * m + j];
                    }
                }
                vec![(*a, like(*a, d))]
            }
            Op::Reshape(a) => vec![(*a, like(*a, gs.to_vec()))],
            Op::Conv3x3(x, w, b) => {
                let (tx, tw) = (self.value(*x), self.value(*w));
                let (cin, h, wd) = (tx.shape()[0], tx.shape()[1], tx.shape()[2]);
                let cout = tw.shape()[0];
                let (dx, dw, db) = conv3x3_backward(tx.data(), tw.data(), gs, cin, cout, h, wd);
                vec![(*x, like(*x, dx)), (*w, like(*w, dw)), (*b, like(*b, db))]
            }
            Op::AvgPool2(x) => {
                let tx = self.value(*x);
                let (c, h, w) = (tx.shape()[0], tx.shape()[1], tx.shape()[2]);
                let (ho, wo) = (h / 2, w / 2);
                let mut d = vec![0.0; c * h * w];
                for ch in 0..c {
                    for y in 0..h {
                        for xx in 0..w {
                            d[(ch * h + y) * w + xx] = 0.25 * gs[(ch * ho + y / 2) * wo + xx / 2];
                        }
                    }
                }
                vec![(*x, like(*x, d))]
            }
            Op::Bilinear(grid, taps) => {
                let tg = self.value(*grid);
                let (c, hw) = (tg.shape()[0], tg.shape()[1] * tg.shape()[2]);
                let mut d = vec![0.0; c * hw];
                for (s, sample) in taps.iter().enumerate() {
                    let grow = &gs[s * c..(s + 1) * c];
                    for &(idx, wt) in sample {
                        if wt == 0.0 {
                            continue;
                        }
                        for (ch, gv) in grow.iter().enumerate() {
                            d[ch * hw + idx] += wt * gv;
                        }
                    }
                }
                vec![(*grid, like(*grid, d))]
            }
            Op::PairwiseSqDist(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let (n, d) = ta.dims2()?;
                let (m, _) = tb.dims2()?;
                let (xa, xb) = (ta.data(), tb.data());
                let mut da = vec![0.0; n * d];
                let mut dbv = vec![0.0; m * d];
                for i in 0..n {
                    let ai = &xa[i * d..(i + 1) * d];
                    let grow = &gs[i * m..(i + 1) * m];
                    for (j, &gij) in grow.iter().enumerate() {
                        if gij == 0.0 {
                            continue;
                        }
                        let bj = &xb[j * d..(j + 1) * d];
                        let two_g = 2.0 * gij;
                        for c in 0..d {
                            let diff = two_g * (ai[c] - bj[c]);
                            da[i * d + c] += diff;
                            dbv[j * d + c] -= diff;
                        }
                    }
                }
                vec![(*a, like(*a, da)), (*b, like(*b, dbv))]
            }
        };
        Ok(res)
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        slope * x
    }
}

pub(crate) fn conv3x3_forward(
    x: &[f64],
    w: &[f64],
    b: &[f64],
    cin: usize,
    cout: usize,
    h: usize,
    wd: usize,
) -> Vec<f64> {
    let mut out = vec![0.0; cout * h * wd];
    for co in 0..cout {
        let plane = &mut out[co * h * wd..(co + 1) * h * wd];
        plane.fill(b[co]);
        for ci in 0..cin {
            let src = &x[ci * h * wd..(ci + 1) * h * wd];
            for ky in 0..3 {
                for kx in 0..3 {
                    let wv = w[((co * cin + ci) * 3 + ky) * 3 + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    let (x0, x1) = (1usize.saturating_sub(kx), (wd + 1 - kx).min(wd));
                    for y in 0..h {
                        let sy = y + ky;
                        if sy < 1 || sy > h {
                            continue;
                        }
                        let srow = &src[(sy - 1) * wd..sy * wd];
                        let orow = &mut plane[y * wd..(y + 1) * wd];
                        for xx in x0..x1 {
                            orow[xx] += wv * srow[xx + kx - 1];
                        }
                    }
                }
            }
        }
    }
    out
}

fn conv3x3_backward(
    x: &[f64],
    w: &[f64],
    g: &[f64],
    cin: usize,
    cout: usize,
    h: usize,
    wd: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut dx = vec![0.0; cin * h * wd];
    let mut dw = vec![0.0; cout * cin * 9];
    let mut db = vec![0.0; cout];
    for co in 0..cout {
        let gplane = &g[co * h * wd..(co + 1) * h * wd];
        db[co] = gplane.iter().sum();
        for ci in 0..cin {
            let src = &x[ci * h * wd..(ci + 1) * h * wd];
            let dsrc = &mut dx[ci * h * wd..(ci + 1) * h * wd];
            for ky in 0..3 {
                for kx in 0..3 {
                    let widx = ((co * cin + ci) * 3 + ky) * 3 + kx;
                    let wv = w[widx];
                    let (x0, x1) = (1usize.saturating_sub(kx), (wd + 1 - kx).min(wd));
                    let mut acc = 0.0;
                    for y in 0..h {
                        let sy = y + ky;
                        if sy < 1 || sy > h {
                            continue;
                        }
                        let grow = &gplane[y * wd..(y + 1) * wd];
                        let srow = &src[(sy - 1) * wd..sy * wd];
                        let drow = &mut dsrc[(sy - 1) * wd..sy * wd];
                        for xx in x0..x1 {
                            acc += grow[xx] * srow[xx + kx - 1];
                            drow[xx + kx - 1] += wv * grow[xx];
                        }
                    }
                    dw[widx] += acc;
                }
            }
        }
    }
    (dx, dw, db)
}

pub(crate) fn avg_pool2_forward(x: &[f64], c: usize, h: usize, w: usize) -> Vec<f64> {
    let (ho, wo) = (h / 2, w / 2);
    let mut out = vec![0.0; c * ho * wo];
    for ch in 0..c {
        for y in 0..ho {
            for xx in 0..wo {
                let base = ch * h * w;
                let s = x[base + (2 * y) * w + 2 * xx]
                    + x[base + (2 * y) * w + 2 * xx + 1]
                    + x[base + (2 * y + 1) * w + 2 * xx]
                    + x[base + (2 * y + 1) * w + 2 * xx + 1];
                out[(ch * ho + y) * wo + xx] = 0.25 * s;
            }
        }
    }
    out
}

pub(crate) fn bilinear_forward(grid: &[f64], c: usize, hw: usize, taps: &[Taps]) -> Vec<f64> {
    let mut out = vec![0.0; taps.len() * c];
    for (s, sample) in taps.iter().enumerate() {
        let orow = &mut out[s * c..(s + 1) * c];
        for (ch, o) in orow.iter_mut().enumerate() {
            let plane = &grid[ch * hw..(ch + 1) * hw];
            *o = sample.iter().map(|&(idx, wt)| wt * plane[idx]).sum();
        }
    }
    out
}

pub(crate) fn pairwise_sq_dist(a: &[f64], b: &[f64], n: usize, m: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let ai = &a[i * d..(i + 1) * d];
        for j in 0..m {
            let bj = &b[j * d..(j + 1) * d];
            out[i * m + j] = ai.iter().zip(bj).map(|(x, y)| (x - y) * (x - y)).sum();
        }
    }
    out
}
