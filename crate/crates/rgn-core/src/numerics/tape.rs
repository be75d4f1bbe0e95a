//! Wengert-tape reverse-mode differentiation over [`Tensor`] values.
//!
//! A [`Tape`] records every operation of one forward pass in topological
//! order; [`Tape::backward`] replays the records once, in reverse, and
//! accumulates gradients into the bound [`ParameterStore`]. The op set is
//! exactly what the reasoning graphs need — no broadcasting beyond
//! [`Tape::broadcast_rows`], no higher-order derivatives.

use crate::error::{Error, Result};
use crate::numerics::params::ParameterStore;
use crate::numerics::scalar::{self, Real};
use crate::numerics::tensor::Tensor;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValueId(usize);

/// Pooling flavor shared by the models' INIT/AGGRE choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoolKind {
    Max,
    Avg,
}

impl PoolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PoolKind::Max => "max",
            PoolKind::Avg => "avg",
        }
    }
}

impl std::str::FromStr for PoolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(PoolKind::Max),
            "avg" => Ok(PoolKind::Avg),
            other => Err(Error::config(format!(
                "unknown pool kind '{other}' (want max|avg)"
            ))),
        }
    }
}

#[derive(Debug)]
enum Op<T> {
    Leaf,
    MatMul,
    Relu,
    Sigmoid,
    Tanh,
    Concat { axis: usize },
    Pool { kind: PoolKind },
    Softmax,
    Cosine,
    BceWithLogit { label: bool },
    Add,
    Scale,
    ScaleConst { c: T },
    Sum,
    Mean,
    Reshape,
    BroadcastRows,
    SliceRows { start: usize },
}

#[derive(Debug)]
struct Node<T> {
    op: Op<T>,
    inputs: Vec<ValueId>,
    value: Tensor<T>,
    requires_grad: bool,
    /// Slot in the bound parameter store, for parameter leaves.
    param_slot: Option<usize>,
}

/// Recording tape for a single forward/backward pass. Single-threaded by
/// contract; parallelism happens across independent tapes.
#[derive(Debug, Default)]
pub struct Tape<T> {
    nodes: Vec<Node<T>>,
    grads: Vec<Option<Vec<T>>>,
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::new(),
            grads: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, op: Op<T>, inputs: Vec<ValueId>, value: Tensor<T>) -> ValueId {
        let requires_grad = inputs.iter().any(|&i| self.nodes[i.0].requires_grad);
        self.nodes.push(Node {
            op,
            inputs,
            value,
            requires_grad,
            param_slot: None,
        });
        ValueId(self.nodes.len() - 1)
    }

    /// Record an untracked input value.
    pub fn constant(&mut self, value: Tensor<T>) -> ValueId {
        self.nodes.push(Node {
            op: Op::Leaf,
            inputs: vec![],
            value,
            requires_grad: false,
            param_slot: None,
        });
        ValueId(self.nodes.len() - 1)
    }

    /// Record a leaf honoring the tensor's own `requires_grad` flag.
    pub fn var(&mut self, value: Tensor<T>) -> ValueId {
        let requires_grad = value.requires_grad();
        self.nodes.push(Node {
            op: Op::Leaf,
            inputs: vec![],
            value,
            requires_grad,
            param_slot: None,
        });
        ValueId(self.nodes.len() - 1)
    }

    /// Record a named parameter from `store` as a tracked leaf.
    pub fn param(&mut self, store: &ParameterStore<T>, name: &str) -> Result<ValueId> {
        let slot = store.slot_of(name)?;
        let value = store.by_slot(slot).clone();
        self.nodes.push(Node {
            op: Op::Leaf,
            inputs: vec![],
            value,
            requires_grad: true,
            param_slot: Some(slot),
        });
        Ok(ValueId(self.nodes.len() - 1))
    }

    pub fn value(&self, id: ValueId) -> &Tensor<T> {
        &self.nodes[id.0].value
    }

    /// Gradient of a node after [`Tape::backward`]; `None` if unreached.
    pub fn grad(&self, id: ValueId) -> Option<&[T]> {
        self.grads.get(id.0).and_then(|g| g.as_deref())
    }

    // ── forward ops ─────────────────────────────────────────────────────

    pub fn matmul(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.rank() != 2 || tb.rank() != 2 || ta.shape()[1] != tb.shape()[0] {
            return Err(Error::shape(format!(
                "matmul: incompatible shapes {:?} x {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let (r, c, k) = (ta.shape()[0], ta.shape()[1], tb.shape()[1]);
        let mut out = vec![T::zero(); r * k];
        let (da, db) = (ta.data(), tb.data());
        for i in 0..r {
            for j in 0..k {
                let mut acc = T::zero();
                for p in 0..c {
                    acc += da[i * c + p] * db[p * k + j];
                }
                out[i * k + j] = acc;
            }
        }
        Ok(self.push(Op::MatMul, vec![a, b], Tensor::new(out, vec![r, k])?))
    }

    pub fn relu(&mut self, x: ValueId) -> ValueId {
        let out: Vec<T> = self
            .value(x)
            .data()
            .iter()
            .map(|&v| if v > T::zero() { v } else { T::zero() })
            .collect();
        let shape = self.value(x).shape().to_vec();
        self.push(Op::Relu, vec![x], Tensor::new(out, shape).unwrap())
    }

    pub fn sigmoid(&mut self, x: ValueId) -> ValueId {
        let out: Vec<T> = self
            .value(x)
            .data()
            .iter()
            .map(|&v| scalar::sigmoid(v))
            .collect();
        let shape = self.value(x).shape().to_vec();
        self.push(Op::Sigmoid, vec![x], Tensor::new(out, shape).unwrap())
    }

    pub fn tanh(&mut self, x: ValueId) -> ValueId {
        let out: Vec<T> = self.value(x).data().iter().map(|&v| v.tanh()).collect();
        let shape = self.value(x).shape().to_vec();
        self.push(Op::Tanh, vec![x], Tensor::new(out, shape).unwrap())
    }

    /// Contiguous concatenation along `axis`. All parts must agree on every
    /// other extent.
    pub fn concat(&mut self, parts: &[ValueId], axis: usize) -> Result<ValueId> {
        let first = *parts
            .first()
            .ok_or_else(|| Error::shape("concat: empty part list"))?;
        let rank = self.value(first).rank();
        if axis >= rank {
            return Err(Error::shape(format!(
                "concat: axis {axis} out of range for rank {rank}"
            )));
        }
        let mut out_shape = self.value(first).shape().to_vec();
        out_shape[axis] = 0;
        for &p in parts {
            let s = self.value(p).shape();
            if s.len() != rank
                || s.iter()
                    .zip(&out_shape)
                    .enumerate()
                    .any(|(i, (a, b))| i != axis && a != b)
            {
                return Err(Error::shape(format!(
                    "concat: part shape {:?} incompatible with {:?} along axis {axis}",
                    s, out_shape
                )));
            }
            out_shape[axis] += s[axis];
        }

        // Row-major copy: iterate outer blocks, append each part's slice.
        let outer: usize = out_shape[..axis].iter().product();
        let inner: usize = out_shape[axis + 1..].iter().product();
        let mut out = Vec::with_capacity(out_shape.iter().product());
        for block in 0..outer {
            for &p in parts {
                let t = self.value(p);
                let e = t.shape()[axis];
                let stride = e * inner;
                out.extend_from_slice(&t.data()[block * stride..(block + 1) * stride]);
            }
        }
        Ok(self.push(
            Op::Concat { axis },
            parts.to_vec(),
            Tensor::new(out, out_shape)?,
        ))
    }

    /// Elementwise max/mean over the rows of an `n x f` matrix, producing a
    /// length-`f` vector. Empty input is a topology bug upstream.
    pub fn pool(&mut self, kind: PoolKind, x: ValueId) -> Result<ValueId> {
        let t = self.value(x);
        if t.rank() != 2 {
            return Err(Error::shape(format!(
                "pool: expected rank-2 input, got {:?}",
                t.shape()
            )));
        }
        let (n, f) = (t.shape()[0], t.shape()[1]);
        if n == 0 {
            return Err(Error::shape("pool: empty input set"));
        }
        let data = t.data();
        let mut out = vec![T::zero(); f];
        match kind {
            PoolKind::Max => {
                for j in 0..f {
                    let mut best = data[j];
                    for i in 1..n {
                        let v = data[i * f + j];
                        if v > best {
                            best = v;
                        }
                    }
                    out[j] = best;
                }
            }
            PoolKind::Avg => {
                let inv = T::one() / T::from_usize(n);
                for j in 0..f {
                    let mut acc = T::zero();
                    for i in 0..n {
                        acc += data[i * f + j];
                    }
                    out[j] = acc * inv;
                }
            }
        }
        Ok(self.push(Op::Pool { kind }, vec![x], Tensor::new(out, vec![f])?))
    }

    /// Shift-stable softmax over all elements (shape preserved).
    pub fn softmax(&mut self, x: ValueId) -> Result<ValueId> {
        let t = self.value(x);
        if t.numel() == 0 {
            return Err(Error::shape("softmax: empty input"));
        }
        let max = t.data().iter().cloned().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = t.data().iter().map(|&v| (v - max).exp()).collect();
        let total = exps.iter().fold(T::zero(), |a, &b| a + b);
        let out: Vec<T> = exps.iter().map(|&e| e / total).collect();
        let shape = t.shape().to_vec();
        Ok(self.push(Op::Softmax, vec![x], Tensor::new(out, shape)?))
    }

    /// Cosine similarity of two equal-length values (flattened), as a scalar.
    pub fn cosine(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.numel() != tb.numel() {
            return Err(Error::shape(format!(
                "cosine: length mismatch {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let c = scalar::cosine(ta.data(), tb.data());
        Ok(self.push(Op::Cosine, vec![a, b], Tensor::scalar(c)))
    }

    /// Binary cross-entropy on a raw logit, in log-sum-exp form:
    /// `max(z,0) - z*y + ln(1 + exp(-|z|))`.
    pub fn bce_with_logit(&mut self, logit: ValueId, label: bool) -> Result<ValueId> {
        let z = self.value(logit).item()?;
        let y = if label { T::one() } else { T::zero() };
        let loss = z.max(T::zero()) - z * y + (T::one() + (-z.abs()).exp()).ln();
        Ok(self.push(
            Op::BceWithLogit { label },
            vec![logit],
            Tensor::scalar(loss),
        ))
    }

    pub fn add(&mut self, a: ValueId, b: ValueId) -> Result<ValueId> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(Error::shape(format!(
                "add: shape mismatch {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        let out: Vec<T> = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(&x, &y)| x + y)
            .collect();
        let shape = ta.shape().to_vec();
        Ok(self.push(Op::Add, vec![a, b], Tensor::new(out, shape)?))
    }

    /// Multiply by a recorded scalar value: `s * x`.
    pub fn scale(&mut self, s: ValueId, x: ValueId) -> Result<ValueId> {
        let sv = self.value(s).item()?;
        let out: Vec<T> = self.value(x).data().iter().map(|&v| sv * v).collect();
        let shape = self.value(x).shape().to_vec();
        Ok(self.push(Op::Scale, vec![s, x], Tensor::new(out, shape)?))
    }

    /// Multiply by a compile-time constant (not differentiated through).
    pub fn scale_const(&mut self, x: ValueId, c: T) -> ValueId {
        let out: Vec<T> = self.value(x).data().iter().map(|&v| c * v).collect();
        let shape = self.value(x).shape().to_vec();
        self.push(
            Op::ScaleConst { c },
            vec![x],
            Tensor::new(out, shape).unwrap(),
        )
    }

    pub fn sum(&mut self, x: ValueId) -> ValueId {
        let s = self.value(x).data().iter().fold(T::zero(), |a, &b| a + b);
        self.push(Op::Sum, vec![x], Tensor::scalar(s))
    }

    pub fn mean(&mut self, x: ValueId) -> ValueId {
        let t = self.value(x);
        let s = t.data().iter().fold(T::zero(), |a, &b| a + b) / T::from_usize(t.numel());
        self.push(Op::Mean, vec![x], Tensor::scalar(s))
    }

    pub fn reshape(&mut self, x: ValueId, shape: &[usize]) -> Result<ValueId> {
        let t = self.value(x);
        if shape.iter().product::<usize>() != t.numel() {
            return Err(Error::shape(format!(
                "reshape: {:?} -> {:?} changes element count",
                t.shape(),
                shape
            )));
        }
        let value = Tensor::new(t.data().to_vec(), shape.to_vec())?;
        Ok(self.push(Op::Reshape, vec![x], value))
    }

    /// Tile a single row (`1 x f` or `[f]`) into an `n x f` matrix.
    pub fn broadcast_rows(&mut self, x: ValueId, n: usize) -> Result<ValueId> {
        let t = self.value(x);
        let f = match t.shape() {
            [f] => *f,
            [1, f] => *f,
            other => {
                return Err(Error::shape(format!(
                    "broadcast_rows: expected a row, got {other:?}"
                )))
            }
        };
        let mut out = Vec::with_capacity(n * f);
        for _ in 0..n {
            out.extend_from_slice(t.data());
        }
        Ok(self.push(Op::BroadcastRows, vec![x], Tensor::new(out, vec![n, f])?))
    }

    /// Contiguous row range `[start, start+len)` of a rank-2 tensor.
    pub fn slice_rows(&mut self, x: ValueId, start: usize, len: usize) -> Result<ValueId> {
        let t = self.value(x);
        if t.rank() != 2 {
            return Err(Error::shape(format!(
                "slice_rows: expected rank-2, got {:?}",
                t.shape()
            )));
        }
        let (n, f) = (t.shape()[0], t.shape()[1]);
        if len == 0 || start + len > n {
            return Err(Error::shape(format!(
                "slice_rows: range {start}..{} out of bounds for {n} rows",
                start + len
            )));
        }
        let out = t.data()[start * f..(start + len) * f].to_vec();
        Ok(self.push(
            Op::SliceRows { start },
            vec![x],
            Tensor::new(out, vec![len, f])?,
        ))
    }

    /// One row of a rank-2 tensor, as `1 x f`.
    pub fn row(&mut self, x: ValueId, i: usize) -> Result<ValueId> {
        self.slice_rows(x, i, 1)
    }

    // ── backward ────────────────────────────────────────────────────────

    /// Reverse sweep from a scalar `loss`, leaving per-node gradients
    /// readable through [`Tape::grad`].
    pub fn backward_nodes(&mut self, loss: ValueId) -> Result<()> {
        if self.value(loss).numel() != 1 {
            return Err(Error::shape(format!(
                "backward: loss must be scalar, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        self.grads = vec![None; self.nodes.len()];
        self.grads[loss.0] = Some(vec![T::one()]);

        for i in (0..self.nodes.len()).rev() {
            if self.grads[i].is_none() || !self.nodes[i].requires_grad {
                continue;
            }
            let dy = self.grads[i].take().unwrap();
            self.propagate(i, &dy);
            self.grads[i] = Some(dy);
        }
        Ok(())
    }

    /// Full backward pass: node gradients plus accumulation into `store`.
    /// Every parameter ends up with an allocated gradient; parameters not
    /// reached from `loss` hold zeros.
    pub fn backward(&mut self, loss: ValueId, store: &mut ParameterStore<T>) -> Result<()> {
        self.backward_nodes(loss)?;
        for t in store.tensors_mut() {
            t.ensure_grad();
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let (Some(slot), Some(g)) = (node.param_slot, self.grads[i].as_ref()) {
                store.by_slot_mut(slot).accumulate_grad(g);
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, id: ValueId, delta: &[T]) {
        if !self.nodes[id.0].requires_grad {
            return;
        }
        let slot =
            self.grads[id.0].get_or_insert_with(|| vec![T::zero(); self.nodes[id.0].value.numel()]);
        for (g, &d) in slot.iter_mut().zip(delta) {
            *g += d;
        }
    }

    fn propagate(&mut self, i: usize, dy: &[T]) {
        // Inputs are copied out up front so `accumulate` can borrow mutably.
        let inputs = self.nodes[i].inputs.clone();
        match &self.nodes[i].op {
            Op::Leaf => {}
            Op::MatMul => {
                let (a, b) = (inputs[0], inputs[1]);
                let ta = &self.nodes[a.0].value;
                let tb = &self.nodes[b.0].value;
                let (r, c, k) = (ta.shape()[0], ta.shape()[1], tb.shape()[1]);
                let (da, db) = (ta.data(), tb.data());
                // dA = dY * B^T
                let mut ga = vec![T::zero(); r * c];
                for ii in 0..r {
                    for p in 0..c {
                        let mut acc = T::zero();
                        for j in 0..k {
                            acc += dy[ii * k + j] * db[p * k + j];
                        }
                        ga[ii * c + p] = acc;
                    }
                }
                // dB = A^T * dY
                let mut gb = vec![T::zero(); c * k];
                for p in 0..c {
                    for j in 0..k {
                        let mut acc = T::zero();
                        for ii in 0..r {
                            acc += da[ii * c + p] * dy[ii * k + j];
                        }
                        gb[p * k + j] = acc;
                    }
                }
                self.accumulate(a, &ga);
                self.accumulate(b, &gb);
            }
            Op::Relu => {
                let x = inputs[0];
                let gx: Vec<T> = self.nodes[x.0]
                    .value
                    .data()
                    .iter()
                    .zip(dy)
                    .map(|(&v, &d)| if v > T::zero() { d } else { T::zero() })
                    .collect();
                self.accumulate(x, &gx);
            }
            Op::Sigmoid => {
                let x = inputs[0];
                let y = self.nodes[i].value.data();
                let gx: Vec<T> = y
                    .iter()
                    .zip(dy)
                    .map(|(&s, &d)| d * s * (T::one() - s))
                    .collect();
                self.accumulate(x, &gx);
            }
            Op::Tanh => {
                let x = inputs[0];
                let y = self.nodes[i].value.data();
                let gx: Vec<T> = y
                    .iter()
                    .zip(dy)
                    .map(|(&t, &d)| d * (T::one() - t * t))
                    .collect();
                self.accumulate(x, &gx);
            }
            Op::Concat { axis } => {
                let axis = *axis;
                let out_shape = self.nodes[i].value.shape().to_vec();
                let outer: usize = out_shape[..axis].iter().product();
                let inner: usize = out_shape[axis + 1..].iter().product();
                let out_stride = out_shape[axis] * inner;
                let mut offset = 0;
                for &p in &inputs {
                    let e = self.nodes[p.0].value.shape()[axis];
                    let stride = e * inner;
                    let mut gp = vec![T::zero(); self.nodes[p.0].value.numel()];
                    for block in 0..outer {
                        let src = block * out_stride + offset;
                        gp[block * stride..(block + 1) * stride]
                            .copy_from_slice(&dy[src..src + stride]);
                    }
                    offset += stride;
                    self.accumulate(p, &gp);
                }
            }
            Op::Pool { kind } => {
                let kind = *kind;
                let x = inputs[0];
                let t = &self.nodes[x.0].value;
                let (n, f) = (t.shape()[0], t.shape()[1]);
                let mut gx = vec![T::zero(); n * f];
                match kind {
                    PoolKind::Max => {
                        // Ties route to the lowest row index.
                        let data = t.data();
                        for j in 0..f {
                            let mut arg = 0;
                            let mut best = data[j];
                            for ii in 1..n {
                                let v = data[ii * f + j];
                                if v > best {
                                    best = v;
                                    arg = ii;
                                }
                            }
                            gx[arg * f + j] = dy[j];
                        }
                    }
                    PoolKind::Avg => {
                        let inv = T::one() / T::from_usize(n);
                        for ii in 0..n {
                            for j in 0..f {
                                gx[ii * f + j] = dy[j] * inv;
                            }
                        }
                    }
                }
                self.accumulate(x, &gx);
            }
            Op::Softmax => {
                let x = inputs[0];
                let y = self.nodes[i].value.data();
                let dot = y
                    .iter()
                    .zip(dy)
                    .fold(T::zero(), |acc, (&yi, &di)| acc + yi * di);
                let gx: Vec<T> = y.iter().zip(dy).map(|(&yi, &di)| yi * (di - dot)).collect();
                self.accumulate(x, &gx);
            }
            Op::Cosine => {
                let (a, b) = (inputs[0], inputs[1]);
                let va = self.nodes[a.0].value.data();
                let vb = self.nodes[b.0].value.data();
                let d = dy[0];
                let mut dot = T::zero();
                let mut na2 = T::zero();
                let mut nb2 = T::zero();
                for (&x, &y) in va.iter().zip(vb) {
                    dot += x * y;
                    na2 += x * x;
                    nb2 += y * y;
                }
                let na = na2.sqrt();
                let nb = nb2.sqrt();
                let floor = T::from_f64(1e-12);
                if na < floor || nb < floor {
                    // Output was clamped to the constant 0; no gradient flows.
                    return;
                }
                let c = dot / (na * nb);
                let ga: Vec<T> = va
                    .iter()
                    .zip(vb)
                    .map(|(&x, &y)| d * (y / (na * nb) - c * x / na2))
                    .collect();
                let gb: Vec<T> = va
                    .iter()
                    .zip(vb)
                    .map(|(&x, &y)| d * (x / (na * nb) - c * y / nb2))
                    .collect();
                self.accumulate(a, &ga);
                self.accumulate(b, &gb);
            }
            Op::BceWithLogit { label } => {
                let y = if *label { T::one() } else { T::zero() };
                let x = inputs[0];
                let z = self.nodes[x.0].value.data()[0];
                let gx = [dy[0] * (scalar::sigmoid(z) - y)];
                self.accumulate(x, &gx);
            }
            Op::Add => {
                self.accumulate(inputs[0], dy);
                self.accumulate(inputs[1], dy);
            }
            Op::Scale => {
                let (s, x) = (inputs[0], inputs[1]);
                let sv = self.nodes[s.0].value.data()[0];
                let xv = self.nodes[x.0].value.data();
                let gs = [xv
                    .iter()
                    .zip(dy)
                    .fold(T::zero(), |acc, (&v, &d)| acc + v * d)];
                let gx: Vec<T> = dy.iter().map(|&d| d * sv).collect();
                self.accumulate(s, &gs);
                self.accumulate(x, &gx);
            }
            Op::ScaleConst { c } => {
                let c = *c;
                let gx: Vec<T> = dy.iter().map(|&d| d * c).collect();
                self.accumulate(inputs[0], &gx);
            }
            Op::Sum => {
                let x = inputs[0];
                let gx = vec![dy[0]; self.nodes[x.0].value.numel()];
                self.accumulate(x, &gx);
            }
            Op::Mean => {
                let x = inputs[0];
                let n = self.nodes[x.0].value.numel();
                let gx = vec![dy[0] / T::from_usize(n); n];
                self.accumulate(x, &gx);
            }
            Op::Reshape => {
                self.accumulate(inputs[0], dy);
            }
            Op::BroadcastRows => {
                let x = inputs[0];
                let f = self.nodes[x.0].value.numel();
                let mut gx = vec![T::zero(); f];
                for (idx, &d) in dy.iter().enumerate() {
                    gx[idx % f] += d;
                }
                self.accumulate(x, &gx);
            }
            Op::SliceRows { start } => {
                let start = *start;
                let x = inputs[0];
                let f = self.nodes[x.0].value.shape()[1];
                let mut gx = vec![T::zero(); self.nodes[x.0].value.numel()];
                gx[start * f..start * f + dy.len()].copy_from_slice(dy);
                self.accumulate(x, &gx);
            }
        }
    }
}
