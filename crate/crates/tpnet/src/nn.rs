//! Neural primitives: multi-layer perceptrons, a gated recurrent (LSTM)
//! cell, and the 1x1 channel-mixing stack used by the fusion network.
//!
//! Parameter structs own plain tensors; `bind` registers them on a tape and
//! returns lightweight handles whose `forward`/`step` methods record the
//! differentiable computation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Relu,
    Tanh,
    Sigmoid,
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub w: Tensor,
    pub b: Tensor,
    pub act: Activation,
}

/// A stack of affine layers with per-layer activations.
#[derive(Clone, Debug)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
}

impl MlpParams {
    /// `dims = [in, h1, ..., out]`; one activation per layer. Weights are
    /// uniform in `(-1/sqrt(fan_in), 1/sqrt(fan_in))`, biases zero.
    pub fn new<R: Rng>(dims: &[usize], acts: &[Activation], rng: &mut R) -> Self {
        assert_eq!(dims.len() - 1, acts.len(), "one activation per layer");
        let layers = dims
            .windows(2)
            .zip(acts)
            .map(|(d, &act)| {
                let bound = 1.0 / (d[0] as f64).sqrt();
                Layer {
                    w: Tensor::uniform(vec![d[1], d[0]], bound, rng),
                    b: Tensor::zeros(vec![d[1]]),
                    act,
                }
            })
            .collect();
        MlpParams { layers }
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].w.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().unwrap().w.rows()
    }

    pub fn bind(&self, tape: &mut Tape) -> Result<MlpVars> {
        let mut bound = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            bound.push((
                tape.leaf(layer.w.clone())?,
                tape.leaf(layer.b.clone())?,
                layer.act,
            ));
        }
        Ok(MlpVars { layers: bound })
    }

    pub fn named(&self, prefix: &str) -> Vec<(String, &Tensor)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| {
                [
                    (format!("{prefix}.l{i}.w"), &l.w),
                    (format!("{prefix}.l{i}.b"), &l.b),
                ]
            })
            .collect()
    }

    pub fn named_mut(&mut self, prefix: &str) -> Vec<(String, &mut Tensor)> {
        self.layers
            .iter_mut()
            .enumerate()
            .flat_map(|(i, l)| {
                let Layer { w, b, .. } = l;
                [(format!("{prefix}.l{i}.w"), w), (format!("{prefix}.l{i}.b"), b)]
            })
            .collect()
    }
}

pub struct MlpVars {
    layers: Vec<(VarId, VarId, Activation)>,
}

impl MlpVars {
    pub fn forward(&self, tape: &mut Tape, x: VarId) -> Result<VarId> {
        let mut h = x;
        for &(w, b, act) in &self.layers {
            let z = tape.matmul(w, h)?;
            let z = tape.add(z, b)?;
            h = match act {
                Activation::Linear => z,
                Activation::Relu => tape.relu(z)?,
                Activation::Tanh => tape.tanh(z)?,
                Activation::Sigmoid => tape.sigmoid(z)?,
            };
        }
        Ok(h)
    }

    /// Binding order mirrors [`MlpParams::visit`], so gradients can be read
    /// back positionally.
    pub fn var_ids(&self) -> Vec<VarId> {
        self.layers.iter().flat_map(|&(w, b, _)| [w, b]).collect()
    }
}

/// Gated recurrent cell parameters. Gate blocks are ordered
/// (input, forget, cell, output) along the `4H` axis.
#[derive(Clone, Debug)]
pub struct LstmParams {
    /// Input-to-gates weights, `[4H, I]`.
    pub w_x: Tensor,
    /// Hidden-to-gates weights, `[4H, H]`.
    pub w_h: Tensor,
    /// Gate biases, `[4H]`.
    pub b: Tensor,
    pub hidden: usize,
}

impl LstmParams {
    /// The forget-gate bias starts at +1 so early training does not flush
    /// the cell state.
    pub fn new<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut b = Tensor::zeros(vec![4 * hidden]);
        for v in &mut b.data_mut()[hidden..2 * hidden] {
            *v = 1.0;
        }
        LstmParams {
            w_x: Tensor::uniform(vec![4 * hidden, input], bound, rng),
            w_h: Tensor::uniform(vec![4 * hidden, hidden], bound, rng),
            b,
            hidden,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.cols()
    }

    pub fn bind(&self, tape: &mut Tape) -> Result<LstmVars> {
        Ok(LstmVars {
            w_x: tape.leaf(self.w_x.clone())?,
            w_h: tape.leaf(self.w_h.clone())?,
            b: tape.leaf(self.b.clone())?,
            hidden: self.hidden,
        })
    }

    pub fn named(&self, prefix: &str) -> Vec<(String, &Tensor)> {
        vec![
            (format!("{prefix}.w_x"), &self.w_x),
            (format!("{prefix}.w_h"), &self.w_h),
            (format!("{prefix}.b"), &self.b),
        ]
    }

    pub fn named_mut(&mut self, prefix: &str) -> Vec<(String, &mut Tensor)> {
        vec![
            (format!("{prefix}.w_x"), &mut self.w_x),
            (format!("{prefix}.w_h"), &mut self.w_h),
            (format!("{prefix}.b"), &mut self.b),
        ]
    }
}

pub struct LstmVars {
    w_x: VarId,
    w_h: VarId,
    b: VarId,
    hidden: usize,
}

impl LstmVars {
    pub fn zero_state(&self, tape: &mut Tape) -> Result<(VarId, VarId)> {
        let h = tape.leaf(Tensor::zeros(vec![self.hidden]))?;
        let c = tape.leaf(Tensor::zeros(vec![self.hidden]))?;
        Ok((h, c))
    }

    /// One recurrence step: sigmoid gates, tanh candidate.
    pub fn step(&self, tape: &mut Tape, h: VarId, c: VarId, x: VarId) -> Result<(VarId, VarId)> {
        tape.lstm_step(self.w_x, self.w_h, self.b, h, c, x)
    }

    pub fn var_ids(&self) -> Vec<VarId> {
        vec![self.w_x, self.w_h, self.b]
    }
}

/// One recurrence step on plain tensors.
pub fn lstm_step(p: &LstmParams, h: &Tensor, c: &Tensor, x: &Tensor) -> Result<(Tensor, Tensor)> {
    if h.numel() != p.hidden || c.numel() != p.hidden || x.numel() != p.input_dim() {
        return Err(Error::ShapeError(format!(
            "lstm_step: h {:?}, c {:?}, x {:?} vs hidden {} input {}",
            h.shape(),
            c.shape(),
            x.shape(),
            p.hidden,
            p.input_dim()
        )));
    }
    let mut tape = Tape::new();
    let vars = p.bind(&mut tape)?;
    let hv = tape.leaf(h.clone())?;
    let cv = tape.leaf(c.clone())?;
    let xv = tape.leaf(x.clone())?;
    let (h2, c2) = vars.step(&mut tape, hv, cv, xv)?;
    Ok((tape.value(h2).clone(), tape.value(c2).clone()))
}

/// Parameters of the three 1x1 channel-mixing layers (channels `L -> 8 ->
/// 4 -> 1`, rectified between layers, linear output). The same stack is
/// shared across time steps and across the two coordinate planes.
#[derive(Clone, Debug)]
pub struct ChannelMixParams {
    pub mlp: MlpParams,
}

impl ChannelMixParams {
    pub fn new<R: Rng>(in_channels: usize, rng: &mut R) -> Self {
        ChannelMixParams {
            mlp: MlpParams::new(
                &[in_channels, 8, 4, 1],
                &[Activation::Relu, Activation::Relu, Activation::Linear],
                rng,
            ),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.mlp.in_dim()
    }

    pub fn bind(&self, tape: &mut Tape) -> Result<MlpVars> {
        self.mlp.bind(tape)
    }

    pub fn named(&self, prefix: &str) -> Vec<(String, &Tensor)> {
        self.mlp.named(prefix)
    }

    pub fn named_mut(&mut self, prefix: &str) -> Vec<(String, &mut Tensor)> {
        self.mlp.named_mut(prefix)
    }
}

/// Mixes an `[L, t]` channel plane down to a length-`t` sequence. Kernel
/// size is 1: each output step depends only on the input channels at that
/// step.
pub fn channel_mix_forward(p: &ChannelMixParams, x: &Tensor) -> Result<Tensor> {
    if x.shape().len() != 2 || x.rows() != p.in_channels() {
        return Err(Error::ShapeError(format!(
            "channel_mix_forward: input {:?}, expected [{}, t]",
            x.shape(),
            p.in_channels()
        )));
    }
    let (l, t) = (x.rows(), x.cols());
    let mut tape = Tape::new();
    let vars = p.bind(&mut tape)?;
    let mut out = Vec::with_capacity(t);
    for j in 0..t {
        let col: Vec<f64> = (0..l).map(|ch| x.data()[ch * t + j]).collect();
        let v = tape.leaf(Tensor::vector(col))?;
        let y = vars.forward(&mut tape, v)?;
        out.push(tape.value(y).item());
    }
    Ok(Tensor::vector(out))
}
