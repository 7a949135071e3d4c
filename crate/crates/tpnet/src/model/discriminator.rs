//! The trajectory discriminator: embeds the concatenated observed+future
//! trajectory as displacements, runs a recurrent cell over all steps, and
//! scores the last hidden state through an MLP ending in a sigmoid.

use rand::Rng;

use super::ModelDims;
use crate::data::to_displacements;
use crate::error::{Error, Result};
use crate::nn::{Activation, LstmParams, LstmVars, MlpParams, MlpVars};
use crate::point::Point;
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;

#[derive(Clone, Debug)]
pub struct DiscriminatorParams {
    pub t_obs: usize,
    pub t_pred: usize,
    pub embed: MlpParams,
    pub cell: LstmParams,
    pub score: MlpParams,
}

impl DiscriminatorParams {
    pub fn new<R: Rng>(dims: ModelDims, t_obs: usize, t_pred: usize, rng: &mut R) -> Self {
        DiscriminatorParams {
            t_obs,
            t_pred,
            embed: MlpParams::new(&[2, dims.embed], &[Activation::Linear], rng),
            cell: LstmParams::new(dims.embed, dims.hidden, rng),
            score: MlpParams::new(
                &[dims.hidden, dims.embed, 1],
                &[Activation::Relu, Activation::Linear],
                rng,
            ),
        }
    }

    pub fn named(&self) -> Vec<(String, &Tensor)> {
        let mut v = Vec::new();
        v.extend(self.embed.named("embed"));
        v.extend(self.cell.named("cell"));
        v.extend(self.score.named("score"));
        v
    }

    pub fn named_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut v = Vec::new();
        v.extend(self.embed.named_mut("embed"));
        v.extend(self.cell.named_mut("cell"));
        v.extend(self.score.named_mut("score"));
        v
    }

    pub fn param_count(&self) -> usize {
        self.named().iter().map(|(_, t)| t.numel()).sum()
    }

    pub fn bind(&self, tape: &mut Tape) -> Result<DiscriminatorVars> {
        Ok(DiscriminatorVars {
            t_obs: self.t_obs,
            t_pred: self.t_pred,
            embed: self.embed.bind(tape)?,
            cell: self.cell.bind(tape)?,
            score: self.score.bind(tape)?,
        })
    }
}

/// A future trajectory can be ground truth (plain points) or generator
/// output still attached to the tape.
pub enum FutureInput<'a> {
    Real(&'a [Point]),
    Fake(&'a [VarId]),
}

impl FutureInput<'_> {
    fn len(&self) -> usize {
        match self {
            FutureInput::Real(p) => p.len(),
            FutureInput::Fake(v) => v.len(),
        }
    }
}

pub struct DiscriminatorVars {
    t_obs: usize,
    t_pred: usize,
    embed: MlpVars,
    cell: LstmVars,
    score: MlpVars,
}

impl DiscriminatorVars {
    /// Scores one pedestrian's full window. Returns a `[1]`-shaped variable
    /// strictly inside (0, 1).
    pub fn score(
        &self,
        tape: &mut Tape,
        observed: &[Point],
        future: FutureInput<'_>,
    ) -> Result<VarId> {
        if observed.len() != self.t_obs || future.len() != self.t_pred {
            return Err(Error::ShapeError(format!(
                "discriminator window: observed {} (want {}), future {} (want {})",
                observed.len(),
                self.t_obs,
                future.len(),
                self.t_pred
            )));
        }

        // Displacement inputs over the whole 20-step window. The observed
        // part is constant; the fake part stays differentiable.
        let mut steps: Vec<VarId> = Vec::with_capacity(self.t_obs + self.t_pred);
        for d in to_displacements(observed)? {
            steps.push(tape.leaf(Tensor::vector(vec![d.x, d.y]))?);
        }
        let last_obs = tape.leaf(Tensor::vector(vec![
            observed[self.t_obs - 1].x,
            observed[self.t_obs - 1].y,
        ]))?;
        match future {
            FutureInput::Real(points) => {
                let mut prev = observed[self.t_obs - 1];
                for p in points {
                    let d = *p - prev;
                    steps.push(tape.leaf(Tensor::vector(vec![d.x, d.y]))?);
                    prev = *p;
                }
            }
            FutureInput::Fake(vars) => {
                let mut prev = last_obs;
                for &p in vars {
                    steps.push(tape.sub(p, prev)?);
                    prev = p;
                }
            }
        }

        let (mut h, mut c) = self.cell.zero_state(tape)?;
        for x in steps {
            let e = self.embed.forward(tape, x)?;
            (h, c) = self.cell.step(tape, h, c, e)?;
        }
        let logit = self.score.forward(tape, h)?;
        tape.sigmoid(logit)
    }

    pub fn var_ids(&self) -> Vec<VarId> {
        let mut v = Vec::new();
        v.extend(self.embed.var_ids());
        v.extend(self.cell.var_ids());
        v.extend(self.score.var_ids());
        v
    }
}

/// Scores a plain (observed, future) pair on a throwaway tape.
pub fn discriminate(
    d: &DiscriminatorParams,
    observed: &[Point],
    future: &[Point],
) -> Result<f64> {
    let mut tape = Tape::new();
    let vars = d.bind(&mut tape)?;
    let s = vars.score(&mut tape, observed, FutureInput::Real(future))?;
    Ok(tape.value(s).data()[0])
}
