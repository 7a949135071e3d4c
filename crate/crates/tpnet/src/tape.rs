//! Reverse-mode automatic differentiation over a linear tape.
//!
//! Ops are recorded in execution order, which is already a topological order
//! of the computation graph, so the backward pass is a single reverse sweep.
//! `backward` returns the gradients as a separate object instead of mutating
//! the tape; independent losses on one tape therefore cannot contaminate
//! each other.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VarId(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    Add(VarId, VarId),
    Sub(VarId, VarId),
    Mul(VarId, VarId),
    Scale(VarId, f64),
    AddScalar(VarId),
    Matmul(VarId, VarId),
    Concat(Vec<VarId>),
    Slice(VarId, usize, usize),
    Tanh(VarId),
    Sigmoid(VarId),
    Relu(VarId),
    Log(VarId),
    ClampMin(VarId, f64),
    Sum(VarId),
    Mean(VarId),
    MeanSqError(VarId, VarId),
    Stack(Vec<VarId>),
    MaxPool(Vec<VarId>),
    /// Fused gated-recurrence step; the node value is `[h'; c']`.
    LstmStep {
        w_x: VarId,
        w_h: VarId,
        b: VarId,
        h: VarId,
        c: VarId,
        x: VarId,
    },
}

/// Gate pre-activations and activations of one recurrence step, shared by
/// the forward op and its backward pass (which recomputes them instead of
/// storing them).
struct LstmGates {
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    c_next: Vec<f64>,
}

fn lstm_gates(
    w_x: &Tensor,
    w_h: &Tensor,
    b: &Tensor,
    h: &Tensor,
    c: &Tensor,
    x: &Tensor,
) -> LstmGates {
    let hidden = h.numel();
    let input = x.numel();
    let mut pre = b.data().to_vec();
    for r in 0..4 * hidden {
        let wx_row = &w_x.data()[r * input..(r + 1) * input];
        let wh_row = &w_h.data()[r * hidden..(r + 1) * hidden];
        let mut s = 0.0;
        for (w, v) in wx_row.iter().zip(x.data()) {
            s += w * v;
        }
        for (w, v) in wh_row.iter().zip(h.data()) {
            s += w * v;
        }
        pre[r] += s;
    }
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let i: Vec<f64> = pre[..hidden].iter().map(|&v| sig(v)).collect();
    let f: Vec<f64> = pre[hidden..2 * hidden].iter().map(|&v| sig(v)).collect();
    let g: Vec<f64> = pre[2 * hidden..3 * hidden].iter().map(|&v| v.tanh()).collect();
    let o: Vec<f64> = pre[3 * hidden..].iter().map(|&v| sig(v)).collect();
    let c_next: Vec<f64> = (0..hidden)
        .map(|j| f[j] * c.data()[j] + i[j] * g[j])
        .collect();
    LstmGates { i, f, g, o, c_next }
}

struct Node {
    value: Tensor,
    op: Op,
}

/// Gradients produced by one backward pass, indexed by [`VarId`].
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `id`; zero-filled when the
    /// variable did not contribute to the loss.
    pub fn get(&self, id: VarId, tape: &Tape) -> Tensor {
        match &self.grads[id.0] {
            Some(g) => g.clone(),
            None => Tensor::zeros_like(tape.value(id)),
        }
    }

    pub fn get_opt(&self, id: VarId) -> Option<&Tensor> {
        self.grads[id.0].as_ref()
    }
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, id: VarId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: Op) -> Result<VarId> {
        if !value.is_finite() {
            return Err(Error::NumericError(format!(
                "non-finite value produced by {:?}",
                op_name(&op)
            )));
        }
        self.nodes.push(Node { value, op });
        Ok(VarId(self.nodes.len() - 1))
    }

    /// Records an input value (parameter or constant).
    pub fn leaf(&mut self, value: Tensor) -> Result<VarId> {
        self.push(value, Op::Leaf)
    }

    pub fn scalar(&mut self, v: f64) -> Result<VarId> {
        self.leaf(Tensor::scalar(v))
    }

    fn same_shape(&self, a: VarId, b: VarId, what: &str) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::ShapeError(format!(
                "{what}: {:?} vs {:?}",
                self.value(a).shape(),
                self.value(b).shape()
            )));
        }
        Ok(())
    }

    pub fn add(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.same_shape(a, b, "add")?;
        let data = zip_map(self.value(a), self.value(b), |x, y| x + y);
        self.push(data, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.same_shape(a, b, "sub")?;
        let data = zip_map(self.value(a), self.value(b), |x, y| x - y);
        self.push(data, Op::Sub(a, b))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.same_shape(a, b, "mul")?;
        let data = zip_map(self.value(a), self.value(b), |x, y| x * y);
        self.push(data, Op::Mul(a, b))
    }

    pub fn scale(&mut self, a: VarId, s: f64) -> Result<VarId> {
        let data = map(self.value(a), |x| x * s);
        self.push(data, Op::Scale(a, s))
    }

    pub fn add_scalar(&mut self, a: VarId, s: f64) -> Result<VarId> {
        let data = map(self.value(a), |x| x + s);
        self.push(data, Op::AddScalar(a))
    }

    /// Matrix product. Accepts `[m,k] x [k,n] -> [m,n]` and the
    /// matrix-vector form `[m,k] x [k] -> [m]`.
    pub fn matmul(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        let (av, bv) = (self.value(a), self.value(b));
        let out = match (av.shape(), bv.shape()) {
            ([m, k], [k2, n]) if k == k2 => {
                let (m, k, n) = (*m, *k, *n);
                let mut data = vec![0.0; m * n];
                for i in 0..m {
                    for p in 0..k {
                        let x = av.data()[i * k + p];
                        for j in 0..n {
                            data[i * n + j] += x * bv.data()[p * n + j];
                        }
                    }
                }
                Tensor::matrix(m, n, data)?
            }
            ([m, k], [k2]) if k == k2 => {
                let (m, k) = (*m, *k);
                let mut data = vec![0.0; m];
                for i in 0..m {
                    let row = &av.data()[i * k..(i + 1) * k];
                    data[i] = row.iter().zip(bv.data()).map(|(x, y)| x * y).sum();
                }
                Tensor::vector(data)
            }
            (sa, sb) => {
                return Err(Error::ShapeError(format!(
                    "matmul: incompatible shapes {sa:?} x {sb:?}"
                )))
            }
        };
        self.push(out, Op::Matmul(a, b))
    }

    /// Concatenates 1-D tensors into one vector.
    pub fn concat(&mut self, parts: &[VarId]) -> Result<VarId> {
        if parts.is_empty() {
            return Err(Error::EmptySequence);
        }
        let mut data = Vec::new();
        for &p in parts {
            let v = self.value(p);
            if v.shape().len() > 1 {
                return Err(Error::ShapeError(format!(
                    "concat expects vectors, got {:?}",
                    v.shape()
                )));
            }
            data.extend_from_slice(v.data());
        }
        self.push(Tensor::vector(data), Op::Concat(parts.to_vec()))
    }

    /// Slice `[start, start+len)` of a vector.
    pub fn slice(&mut self, a: VarId, start: usize, len: usize) -> Result<VarId> {
        let v = self.value(a);
        if v.shape().len() > 1 || start + len > v.numel() {
            return Err(Error::ShapeError(format!(
                "slice [{start}, {}) of shape {:?}",
                start + len,
                v.shape()
            )));
        }
        let data = v.data()[start..start + len].to_vec();
        self.push(Tensor::vector(data), Op::Slice(a, start, len))
    }

    pub fn tanh(&mut self, a: VarId) -> Result<VarId> {
        let data = map(self.value(a), f64::tanh);
        self.push(data, Op::Tanh(a))
    }

    pub fn sigmoid(&mut self, a: VarId) -> Result<VarId> {
        let data = map(self.value(a), |x| 1.0 / (1.0 + (-x).exp()));
        self.push(data, Op::Sigmoid(a))
    }

    pub fn relu(&mut self, a: VarId) -> Result<VarId> {
        let data = map(self.value(a), |x| x.max(0.0));
        self.push(data, Op::Relu(a))
    }

    /// Natural log; the input must be strictly positive (clamp first when a
    /// value can underflow to zero).
    pub fn log(&mut self, a: VarId) -> Result<VarId> {
        let data = map(self.value(a), f64::ln);
        self.push(data, Op::Log(a))
    }

    pub fn clamp_min(&mut self, a: VarId, lo: f64) -> Result<VarId> {
        let data = map(self.value(a), |x| x.max(lo));
        self.push(data, Op::ClampMin(a, lo))
    }

    pub fn sum(&mut self, a: VarId) -> Result<VarId> {
        let s = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(s), Op::Sum(a))
    }

    pub fn mean(&mut self, a: VarId) -> Result<VarId> {
        let v = self.value(a);
        let s: f64 = v.data().iter().sum();
        let m = s / v.numel() as f64;
        self.push(Tensor::scalar(m), Op::Mean(a))
    }

    /// Mean of elementwise squared differences.
    pub fn mean_sq_error(&mut self, a: VarId, b: VarId) -> Result<VarId> {
        self.same_shape(a, b, "mean_sq_error")?;
        let (av, bv) = (self.value(a), self.value(b));
        let s: f64 = av
            .data()
            .iter()
            .zip(bv.data())
            .map(|(x, y)| (x - y) * (x - y))
            .sum();
        let m = s / av.numel() as f64;
        self.push(Tensor::scalar(m), Op::MeanSqError(a, b))
    }

    /// Stacks equal-length vectors into a `[n, m]` matrix.
    pub fn stack(&mut self, parts: &[VarId]) -> Result<VarId> {
        if parts.is_empty() {
            return Err(Error::EmptySequence);
        }
        let m = self.value(parts[0]).numel();
        let mut data = Vec::with_capacity(parts.len() * m);
        for &p in parts {
            let v = self.value(p);
            if v.shape().len() != 1 || v.numel() != m {
                return Err(Error::ShapeError(format!(
                    "stack expects vectors of length {m}, got {:?}",
                    v.shape()
                )));
            }
            data.extend_from_slice(v.data());
        }
        self.push(Tensor::matrix(parts.len(), m, data)?, Op::Stack(parts.to_vec()))
    }

    /// Elementwise maximum over equal-shaped inputs (permutation-invariant
    /// pooling). The gradient routes to the first input attaining each
    /// maximum.
    pub fn elementwise_max(&mut self, parts: &[VarId]) -> Result<VarId> {
        if parts.is_empty() {
            return Err(Error::EmptySequence);
        }
        for &p in &parts[1..] {
            self.same_shape(parts[0], p, "elementwise_max")?;
        }
        let mut data = self.value(parts[0]).data().to_vec();
        for &p in &parts[1..] {
            for (d, &v) in data.iter_mut().zip(self.value(p).data()) {
                if v > *d {
                    *d = v;
                }
            }
        }
        let shape = self.value(parts[0]).shape().to_vec();
        self.push(Tensor::new(shape, data)?, Op::MaxPool(parts.to_vec()))
    }

    /// One fused gated-recurrence step (sigmoid gates, tanh candidate,
    /// gate order input/forget/cell/output). Returns `(h', c')`.
    pub fn lstm_step(
        &mut self,
        w_x: VarId,
        w_h: VarId,
        b: VarId,
        h: VarId,
        c: VarId,
        x: VarId,
    ) -> Result<(VarId, VarId)> {
        let hidden = self.value(h).numel();
        let input = self.value(x).numel();
        let ok = self.value(w_x).shape() == [4 * hidden, input]
            && self.value(w_h).shape() == [4 * hidden, hidden]
            && self.value(b).numel() == 4 * hidden
            && self.value(c).numel() == hidden;
        if !ok {
            return Err(Error::ShapeError(format!(
                "lstm_step: w_x {:?}, w_h {:?}, b {:?}, h {:?}, c {:?}, x {:?}",
                self.value(w_x).shape(),
                self.value(w_h).shape(),
                self.value(b).shape(),
                self.value(h).shape(),
                self.value(c).shape(),
                self.value(x).shape()
            )));
        }
        let gates = lstm_gates(
            self.value(w_x),
            self.value(w_h),
            self.value(b),
            self.value(h),
            self.value(c),
            self.value(x),
        );
        let mut combined = Vec::with_capacity(2 * hidden);
        for j in 0..hidden {
            combined.push(gates.o[j] * gates.c_next[j].tanh());
        }
        combined.extend_from_slice(&gates.c_next);
        let node = self.push(
            Tensor::vector(combined),
            Op::LstmStep {
                w_x,
                w_h,
                b,
                h,
                c,
                x,
            },
        )?;
        let h_next = self.slice(node, 0, hidden)?;
        let c_next = self.slice(node, hidden, hidden)?;
        Ok((h_next, c_next))
    }

    /// Reverse sweep from a scalar loss. Returns exact gradients for every
    /// variable that contributes to the loss; the rest read back as zero.
    pub fn backward(&self, loss: VarId) -> Result<Gradients> {
        if !self.value(loss).is_scalar() {
            return Err(Error::ShapeError(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, i: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let accum = |grads: &mut [Option<Tensor>], id: VarId, update: &dyn Fn(&mut [f64])| {
            let slot = &mut grads[id.0];
            if slot.is_none() {
                *slot = Some(Tensor::zeros_like(&self.nodes[id.0].value));
            }
            update(slot.as_mut().unwrap().data_mut());
        };

        match &self.nodes[i].op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                accum(grads, *a, &|d| add_into(d, g.data(), 1.0));
                accum(grads, *b, &|d| add_into(d, g.data(), 1.0));
            }
            Op::Sub(a, b) => {
                accum(grads, *a, &|d| add_into(d, g.data(), 1.0));
                accum(grads, *b, &|d| add_into(d, g.data(), -1.0));
            }
            Op::Mul(a, b) => {
                let (av, bv) = (self.value(*a).clone(), self.value(*b).clone());
                accum(grads, *a, &|d| {
                    for ((d, g), b) in d.iter_mut().zip(g.data()).zip(bv.data()) {
                        *d += g * b;
                    }
                });
                accum(grads, *b, &|d| {
                    for ((d, g), a) in d.iter_mut().zip(g.data()).zip(av.data()) {
                        *d += g * a;
                    }
                });
            }
            Op::Scale(a, s) => {
                accum(grads, *a, &|d| add_into(d, g.data(), *s));
            }
            Op::AddScalar(a) => {
                accum(grads, *a, &|d| add_into(d, g.data(), 1.0));
            }
            Op::Matmul(a, b) => {
                let av = self.value(*a);
                let bv = self.value(*b);
                match (av.shape(), bv.shape()) {
                    ([m, k], [_, n]) if bv.shape().len() == 2 => {
                        let (m, k, n) = (*m, *k, *n);
                        // dA = g . B^T
                        accum(grads, *a, &|d| {
                            for i in 0..m {
                                for p in 0..k {
                                    let mut s = 0.0;
                                    for j in 0..n {
                                        s += g.data()[i * n + j] * bv.data()[p * n + j];
                                    }
                                    d[i * k + p] += s;
                                }
                            }
                        });
                        // dB = A^T . g
                        accum(grads, *b, &|d| {
                            for p in 0..k {
                                for j in 0..n {
                                    let mut s = 0.0;
                                    for i in 0..m {
                                        s += av.data()[i * k + p] * g.data()[i * n + j];
                                    }
                                    d[p * n + j] += s;
                                }
                            }
                        });
                    }
                    ([m, k], [_]) => {
                        let (m, k) = (*m, *k);
                        // dA = outer(g, b)
                        accum(grads, *a, &|d| {
                            for i in 0..m {
                                for p in 0..k {
                                    d[i * k + p] += g.data()[i] * bv.data()[p];
                                }
                            }
                        });
                        // db = A^T . g
                        accum(grads, *b, &|d| {
                            for p in 0..k {
                                let mut s = 0.0;
                                for i in 0..m {
                                    s += av.data()[i * k + p] * g.data()[i];
                                }
                                d[p] += s;
                            }
                        });
                    }
                    _ => unreachable!("matmul recorded with unsupported shapes"),
                }
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = self.value(p).numel();
                    let gs = g.data()[offset..offset + len].to_vec();
                    accum(grads, p, &|d| add_into(d, &gs, 1.0));
                    offset += len;
                }
            }
            Op::Slice(a, start, len) => {
                let (start, len) = (*start, *len);
                accum(grads, *a, &|d| {
                    add_into(&mut d[start..start + len], g.data(), 1.0)
                });
            }
            Op::Tanh(a) => {
                let y = &self.nodes[i].value;
                accum(grads, *a, &|d| {
                    for ((d, g), y) in d.iter_mut().zip(g.data()).zip(y.data()) {
                        *d += g * (1.0 - y * y);
                    }
                });
            }
            Op::Sigmoid(a) => {
                let y = &self.nodes[i].value;
                accum(grads, *a, &|d| {
                    for ((d, g), y) in d.iter_mut().zip(g.data()).zip(y.data()) {
                        *d += g * y * (1.0 - y);
                    }
                });
            }
            Op::Relu(a) => {
                let x = self.value(*a);
                accum(grads, *a, &|d| {
                    for ((d, g), x) in d.iter_mut().zip(g.data()).zip(x.data()) {
                        if *x > 0.0 {
                            *d += g;
                        }
                    }
                });
            }
            Op::Log(a) => {
                let x = self.value(*a);
                accum(grads, *a, &|d| {
                    for ((d, g), x) in d.iter_mut().zip(g.data()).zip(x.data()) {
                        *d += g / x;
                    }
                });
            }
            Op::ClampMin(a, lo) => {
                let x = self.value(*a);
                let lo = *lo;
                accum(grads, *a, &|d| {
                    for ((d, g), x) in d.iter_mut().zip(g.data()).zip(x.data()) {
                        if *x > lo {
                            *d += g;
                        }
                    }
                });
            }
            Op::Sum(a) => {
                let gv = g.item();
                accum(grads, *a, &|d| {
                    for d in d.iter_mut() {
                        *d += gv;
                    }
                });
            }
            Op::Mean(a) => {
                let n = self.value(*a).numel() as f64;
                let gv = g.item() / n;
                accum(grads, *a, &|d| {
                    for d in d.iter_mut() {
                        *d += gv;
                    }
                });
            }
            Op::MeanSqError(a, b) => {
                let av = self.value(*a).clone();
                let bv = self.value(*b).clone();
                let n = av.numel() as f64;
                let gv = g.item();
                accum(grads, *a, &|d| {
                    for ((d, x), y) in d.iter_mut().zip(av.data()).zip(bv.data()) {
                        *d += gv * 2.0 * (x - y) / n;
                    }
                });
                accum(grads, *b, &|d| {
                    for ((d, x), y) in d.iter_mut().zip(av.data()).zip(bv.data()) {
                        *d -= gv * 2.0 * (x - y) / n;
                    }
                });
            }
            Op::Stack(parts) => {
                let m = self.value(parts[0]).numel();
                for (row, &p) in parts.iter().enumerate() {
                    let gs = g.data()[row * m..(row + 1) * m].to_vec();
                    accum(grads, p, &|d| add_into(d, &gs, 1.0));
                }
            }
            Op::MaxPool(parts) => {
                let y = &self.nodes[i].value;
                // First-attaining input takes the gradient for each slot.
                let numel = y.numel();
                let mut taken = vec![false; numel];
                for &p in parts {
                    let pv = self.value(p);
                    let winners: Vec<usize> = (0..numel)
                        .filter(|&j| !taken[j] && pv.data()[j] == y.data()[j])
                        .collect();
                    for &j in &winners {
                        taken[j] = true;
                    }
                    if !winners.is_empty() {
                        accum(grads, p, &|d| {
                            for &j in &winners {
                                d[j] += g.data()[j];
                            }
                        });
                    }
                }
            }
            Op::LstmStep {
                w_x,
                w_h,
                b,
                h,
                c,
                x,
            } => {
                let hv = self.value(*h);
                let cv = self.value(*c);
                let xv = self.value(*x);
                let hidden = hv.numel();
                let input = xv.numel();
                let gates = lstm_gates(
                    self.value(*w_x),
                    self.value(*w_h),
                    self.value(*b),
                    hv,
                    cv,
                    xv,
                );

                // Incoming grad covers [h'; c'].
                let gh = &g.data()[..hidden];
                let gc_out = &g.data()[hidden..];
                let mut ds = vec![0.0; 4 * hidden];
                let mut dc_in = vec![0.0; hidden];
                for j in 0..hidden {
                    let tc = gates.c_next[j].tanh();
                    let d_o = gh[j] * tc;
                    let dc = gc_out[j] + gh[j] * gates.o[j] * (1.0 - tc * tc);
                    let d_i = dc * gates.g[j];
                    let d_f = dc * cv.data()[j];
                    let d_g = dc * gates.i[j];
                    dc_in[j] = dc * gates.f[j];
                    ds[j] = d_i * gates.i[j] * (1.0 - gates.i[j]);
                    ds[hidden + j] = d_f * gates.f[j] * (1.0 - gates.f[j]);
                    ds[2 * hidden + j] = d_g * (1.0 - gates.g[j] * gates.g[j]);
                    ds[3 * hidden + j] = d_o * gates.o[j] * (1.0 - gates.o[j]);
                }

                accum(grads, *b, &|d| add_into(d, &ds, 1.0));
                accum(grads, *c, &|d| add_into(d, &dc_in, 1.0));
                let wx_v = self.value(*w_x);
                let wh_v = self.value(*w_h);
                accum(grads, *w_x, &|d| {
                    for r in 0..4 * hidden {
                        for p in 0..input {
                            d[r * input + p] += ds[r] * xv.data()[p];
                        }
                    }
                });
                accum(grads, *w_h, &|d| {
                    for r in 0..4 * hidden {
                        for p in 0..hidden {
                            d[r * hidden + p] += ds[r] * hv.data()[p];
                        }
                    }
                });
                accum(grads, *x, &|d| {
                    for r in 0..4 * hidden {
                        let row = &wx_v.data()[r * input..(r + 1) * input];
                        for (dp, w) in d.iter_mut().zip(row) {
                            *dp += ds[r] * w;
                        }
                    }
                });
                accum(grads, *h, &|d| {
                    for r in 0..4 * hidden {
                        let row = &wh_v.data()[r * hidden..(r + 1) * hidden];
                        for (dp, w) in d.iter_mut().zip(row) {
                            *dp += ds[r] * w;
                        }
                    }
                });
            }
        }
    }
}

fn op_name(op: &Op) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::Add(..) => "add",
        Op::Sub(..) => "sub",
        Op::Mul(..) => "mul",
        Op::Scale(..) => "scale",
        Op::AddScalar(..) => "add_scalar",
        Op::Matmul(..) => "matmul",
        Op::Concat(..) => "concat",
        Op::Slice(..) => "slice",
        Op::Tanh(..) => "tanh",
        Op::Sigmoid(..) => "sigmoid",
        Op::Relu(..) => "relu",
        Op::Log(..) => "log",
        Op::ClampMin(..) => "clamp_min",
        Op::Sum(..) => "sum",
        Op::Mean(..) => "mean",
        Op::MeanSqError(..) => "mean_sq_error",
        Op::Stack(..) => "stack",
        Op::MaxPool(..) => "elementwise_max",
        Op::LstmStep { .. } => "lstm_step",
    }
}

fn map(t: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor::new(t.shape().to_vec(), t.data().iter().map(|&x| f(x)).collect()).unwrap()
}

fn zip_map(a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    Tensor::new(
        a.shape().to_vec(),
        a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect(),
    )
    .unwrap()
}

fn add_into(dst: &mut [f64], src: &[f64], scale: f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s * scale;
    }
}
