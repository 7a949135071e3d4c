//! The pyramid generator: shared-parameter encoding of every scale, social
//! pooling, noise conditioning, per-scale decoding, coarse-to-fine fusion
//! and the final channel-mixing head.
//!
//! All learning happens on displacement coordinates. Decoded positions are
//! absolute (each scale accumulates from its own last observed point), the
//! channel-mixing head sees coordinates relative to the native last observed
//! point, and that origin is re-added at the very end; translating a scene
//! therefore translates the prediction.

use rand::Rng;

use super::GeneratorConfig;
use crate::data::{to_displacements, Scene};
use crate::error::{Error, Result};
use crate::nn::{Activation, ChannelMixParams, LstmParams, MlpParams, MlpVars, LstmVars};
use crate::point::Point;
use crate::pyramid::{build_pyramid, resample_weights, Pyramid};
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;

/// All learnable generator parameters.
#[derive(Clone, Debug)]
pub struct GeneratorParams {
    pub cfg: GeneratorConfig,
    /// Position embedding on the encoder side.
    pub embed_obs: MlpParams,
    /// Recurrent cell shared across pedestrians and scales.
    pub enc_cell: LstmParams,
    /// Relative-position embedding inside the pooling module.
    pub pool_embed: MlpParams,
    /// Per-neighbor pooling network before the elementwise max.
    pub pool_mlp: MlpParams,
    /// Projects (hidden, pool, noise) down to the decoder state width.
    pub state_proj: MlpParams,
    /// Position embedding on the decoder side.
    pub embed_dec: MlpParams,
    /// Decoder recurrent cell shared across scales.
    pub dec_cell: LstmParams,
    /// Reads a 2-d displacement out of the decoder state.
    pub out: MlpParams,
    /// 1x1 channel-mixing stack of the fusion head.
    pub fusion: ChannelMixParams,
}

impl GeneratorParams {
    pub fn new<R: Rng>(cfg: GeneratorConfig, rng: &mut R) -> Self {
        let d = cfg.dims;
        GeneratorParams {
            cfg,
            embed_obs: MlpParams::new(&[2, d.embed], &[Activation::Linear], rng),
            enc_cell: LstmParams::new(d.embed, d.hidden, rng),
            pool_embed: MlpParams::new(&[2, d.embed], &[Activation::Linear], rng),
            pool_mlp: MlpParams::new(
                &[d.hidden + d.embed, d.pool_hidden, d.pool],
                &[Activation::Relu, Activation::Relu],
                rng,
            ),
            state_proj: MlpParams::new(
                &[d.hidden + d.pool + d.noise, d.hidden],
                &[Activation::Linear],
                rng,
            ),
            embed_dec: MlpParams::new(&[2, d.embed], &[Activation::Linear], rng),
            dec_cell: LstmParams::new(d.embed, d.hidden, rng),
            out: MlpParams::new(&[d.hidden, 2], &[Activation::Linear], rng),
            fusion: ChannelMixParams::new(cfg.pyramid.levels, rng),
        }
    }

    pub fn named(&self) -> Vec<(String, &Tensor)> {
        let mut v = Vec::new();
        v.extend(self.embed_obs.named("embed_obs"));
        v.extend(self.enc_cell.named("enc_cell"));
        v.extend(self.pool_embed.named("pool_embed"));
        v.extend(self.pool_mlp.named("pool_mlp"));
        v.extend(self.state_proj.named("state_proj"));
        v.extend(self.embed_dec.named("embed_dec"));
        v.extend(self.dec_cell.named("dec_cell"));
        v.extend(self.out.named("out"));
        v.extend(self.fusion.named("fusion"));
        v
    }

    pub fn named_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut v = Vec::new();
        v.extend(self.embed_obs.named_mut("embed_obs"));
        v.extend(self.enc_cell.named_mut("enc_cell"));
        v.extend(self.pool_embed.named_mut("pool_embed"));
        v.extend(self.pool_mlp.named_mut("pool_mlp"));
        v.extend(self.state_proj.named_mut("state_proj"));
        v.extend(self.embed_dec.named_mut("embed_dec"));
        v.extend(self.dec_cell.named_mut("dec_cell"));
        v.extend(self.out.named_mut("out"));
        v.extend(self.fusion.named_mut("fusion"));
        v
    }

    /// Total scalar parameter count.
    pub fn param_count(&self) -> usize {
        self.named().iter().map(|(_, t)| t.numel()).sum()
    }

    pub fn bind(&self, tape: &mut Tape) -> Result<GeneratorVars> {
        Ok(GeneratorVars {
            cfg: self.cfg,
            embed_obs: self.embed_obs.bind(tape)?,
            enc_cell: self.enc_cell.bind(tape)?,
            pool_embed: self.pool_embed.bind(tape)?,
            pool_mlp: self.pool_mlp.bind(tape)?,
            state_proj: self.state_proj.bind(tape)?,
            embed_dec: self.embed_dec.bind(tape)?,
            dec_cell: self.dec_cell.bind(tape)?,
            out: self.out.bind(tape)?,
            fusion: self.fusion.bind(tape)?,
        })
    }
}

/// Tape-bound generator; the var-id order mirrors [`GeneratorParams::named`].
pub struct GeneratorVars {
    pub cfg: GeneratorConfig,
    embed_obs: MlpVars,
    enc_cell: LstmVars,
    pool_embed: MlpVars,
    pool_mlp: MlpVars,
    state_proj: MlpVars,
    embed_dec: MlpVars,
    dec_cell: LstmVars,
    out: MlpVars,
    fusion: MlpVars,
}

/// Encoder outputs per pedestrian and scale, plus the per-scale anchor
/// points needed by pooling and decoding.
pub struct SceneEncoding {
    /// Final hidden state, `[ped][scale]`.
    pub h: Vec<Vec<VarId>>,
    /// Final cell state, `[ped][scale]`.
    pub c: Vec<Vec<VarId>>,
    /// Last observed absolute position of each scale.
    pub last_abs: Vec<Vec<Point>>,
    /// Last observed displacement of each scale.
    pub last_disp: Vec<Vec<Point>>,
}

/// Differentiable outputs of one generator pass over a scene.
pub struct GeneratedScene {
    /// Post-fusion absolute positions, `[ped][scale][step]`, 2-d vars.
    pub fused: Vec<Vec<Vec<VarId>>>,
    /// Final predicted trajectory, `[ped][step]`, 2-d vars.
    pub y_hat: Vec<Vec<VarId>>,
}

impl GeneratedScene {
    pub fn y_hat_points(&self, tape: &Tape) -> Vec<Vec<Point>> {
        self.y_hat
            .iter()
            .map(|traj| traj.iter().map(|&v| var_point(tape, v)).collect())
            .collect()
    }

    pub fn fused_points(&self, tape: &Tape) -> Vec<Vec<Vec<Point>>> {
        self.fused
            .iter()
            .map(|scales| {
                scales
                    .iter()
                    .map(|seq| seq.iter().map(|&v| var_point(tape, v)).collect())
                    .collect()
            })
            .collect()
    }
}

fn var_point(tape: &Tape, v: VarId) -> Point {
    let d = tape.value(v).data();
    Point::new(d[0], d[1])
}

fn point_leaf(tape: &mut Tape, p: Point) -> Result<VarId> {
    tape.leaf(Tensor::vector(vec![p.x, p.y]))
}

impl GeneratorVars {
    /// Encodes every scale of every pedestrian with the one shared cell,
    /// consuming zero-prefixed displacement sequences.
    pub fn encode(&self, tape: &mut Tape, pyramids: &[Pyramid]) -> Result<SceneEncoding> {
        if pyramids.is_empty() {
            return Err(Error::EmptyScene);
        }
        let mut enc = SceneEncoding {
            h: Vec::with_capacity(pyramids.len()),
            c: Vec::with_capacity(pyramids.len()),
            last_abs: Vec::with_capacity(pyramids.len()),
            last_disp: Vec::with_capacity(pyramids.len()),
        };
        for pyr in pyramids {
            let mut hs = Vec::with_capacity(pyr.scales.len());
            let mut cs = Vec::with_capacity(pyr.scales.len());
            let mut abs = Vec::with_capacity(pyr.scales.len());
            let mut disp = Vec::with_capacity(pyr.scales.len());
            for scale in &pyr.scales {
                let d = to_displacements(scale)?;
                let (mut h, mut c) = self.enc_cell.zero_state(tape)?;
                for step in &d {
                    let x = point_leaf(tape, *step)?;
                    let e = self.embed_obs.forward(tape, x)?;
                    (h, c) = self.enc_cell.step(tape, h, c, e)?;
                }
                hs.push(h);
                cs.push(c);
                abs.push(*scale.last().unwrap());
                disp.push(*d.last().unwrap());
            }
            enc.h.push(hs);
            enc.c.push(cs);
            enc.last_abs.push(abs);
            enc.last_disp.push(disp);
        }
        Ok(enc)
    }

    /// Permutation-invariant social pooling, computed per scale from that
    /// scale's own final observed positions. Every pedestrian (including
    /// the target itself) contributes one candidate vector; the pool is the
    /// elementwise max.
    pub fn pool_social(&self, tape: &mut Tape, enc: &SceneEncoding) -> Result<Vec<Vec<VarId>>> {
        let n = enc.h.len();
        let levels = enc.h[0].len();
        let mut pools = vec![Vec::with_capacity(levels); n];
        for level in 0..levels {
            for i in 0..n {
                let mut candidates = Vec::with_capacity(n);
                for j in 0..n {
                    let rel = enc.last_abs[j][level] - enc.last_abs[i][level];
                    let r = point_leaf(tape, rel)?;
                    let e = self.pool_embed.forward(tape, r)?;
                    let cat = tape.concat(&[enc.h[j][level], e])?;
                    candidates.push(self.pool_mlp.forward(tape, cat)?);
                }
                pools[i].push(tape.elementwise_max(&candidates)?);
            }
        }
        Ok(pools)
    }

    /// Rolls one scale forward for `steps` steps. The decoder state starts
    /// from the projected (hidden, pool, noise) concatenation; displacements
    /// accumulate onto the scale's last observed position.
    #[allow(clippy::too_many_arguments)]
    pub fn decode_scale(
        &self,
        tape: &mut Tape,
        h: VarId,
        c: VarId,
        pool: VarId,
        z: VarId,
        start_abs: Point,
        start_disp: Point,
        steps: usize,
    ) -> Result<Vec<VarId>> {
        if steps == 0 {
            return Err(Error::InvalidLength("decode_scale needs steps >= 1".into()));
        }
        let init = tape.concat(&[h, pool, z])?;
        let mut h = self.state_proj.forward(tape, init)?;
        let mut c = c;
        let mut d_prev = point_leaf(tape, start_disp)?;
        let mut p_prev = point_leaf(tape, start_abs)?;
        let mut out = Vec::with_capacity(steps);
        for _ in 0..steps {
            let e = self.embed_dec.forward(tape, d_prev)?;
            (h, c) = self.dec_cell.step(tape, h, c, e)?;
            let d = self.out.forward(tape, h)?;
            let p = tape.add(p_prev, d)?;
            out.push(p);
            d_prev = d;
            p_prev = p;
        }
        Ok(out)
    }

    /// Full generator pass: pyramids, shared encoding, pooling, per-scale
    /// decoding, coarse-to-fine fusion, de-pyramid resampling and channel
    /// mixing. `noise` holds one vector per scene, or one per pedestrian
    /// when the config says so.
    pub fn generate(
        &self,
        tape: &mut Tape,
        scene: &Scene,
        noise: &[Tensor],
    ) -> Result<GeneratedScene> {
        let n = scene.num_peds();
        if n == 0 {
            return Err(Error::EmptyScene);
        }
        let cfg = &self.cfg;
        let expected_noise = if cfg.noise_per_ped { n } else { 1 };
        if noise.len() != expected_noise {
            return Err(Error::ShapeError(format!(
                "expected {expected_noise} noise vectors, got {}",
                noise.len()
            )));
        }
        for z in noise {
            if z.numel() != cfg.dims.noise {
                return Err(Error::ShapeError(format!(
                    "noise length {} != {}",
                    z.numel(),
                    cfg.dims.noise
                )));
            }
        }

        let pyramids: Vec<Pyramid> = scene
            .trajectories
            .iter()
            .enumerate()
            .map(|(i, _)| build_pyramid(scene.observed(i), &cfg.pyramid))
            .collect::<Result<_>>()?;

        let enc = self.encode(tape, &pyramids)?;
        let pools = self.pool_social(tape, &enc)?;
        let z_vars: Vec<VarId> = noise
            .iter()
            .map(|z| tape.leaf(z.clone()))
            .collect::<Result<_>>()?;

        let target_lengths = cfg.pyramid.target_lengths();
        let levels = cfg.pyramid.levels;
        let t_pred = cfg.pyramid.t_pred;

        let mut fused_all = Vec::with_capacity(n);
        let mut y_hat_all = Vec::with_capacity(n);
        for i in 0..n {
            let z = z_vars[if cfg.noise_per_ped { i } else { 0 }];

            // Decode every scale, then fuse top-down in place.
            let mut scales: Vec<Vec<VarId>> = Vec::with_capacity(levels);
            for level in 0..levels {
                scales.push(self.decode_scale(
                    tape,
                    enc.h[i][level],
                    enc.c[i][level],
                    pools[i][level],
                    z,
                    enc.last_abs[i][level],
                    enc.last_disp[i][level],
                    target_lengths[level],
                )?);
            }
            for level in 1..levels {
                let up = resample_vars(tape, &scales[level - 1], scales[level].len())?;
                for (t, u) in up.into_iter().enumerate() {
                    let s = tape.add(scales[level][t], u)?;
                    scales[level][t] = tape.scale(s, 0.5)?;
                }
            }

            // De-pyramid onto t_pred steps, drop to coordinates relative to
            // the native last observed point, mix channels per step.
            let origin = *scene.observed(i).last().unwrap();
            let origin_var = point_leaf(tape, origin)?;
            let mut rel: Vec<Vec<VarId>> = Vec::with_capacity(levels);
            for seq in &scales {
                let res = resample_vars(tape, seq, t_pred)?;
                let r = res
                    .into_iter()
                    .map(|p| tape.sub(p, origin_var))
                    .collect::<Result<Vec<_>>>()?;
                rel.push(r);
            }

            let mut y_hat = Vec::with_capacity(t_pred);
            for t in 0..t_pred {
                let mut coords = Vec::with_capacity(2);
                for coord in 0..2 {
                    let parts: Vec<VarId> = rel
                        .iter()
                        .map(|scale| tape.slice(scale[t], coord, 1))
                        .collect::<Result<_>>()?;
                    let chan = tape.concat(&parts)?;
                    coords.push(self.fusion.forward(tape, chan)?);
                }
                let rel_t = tape.concat(&coords)?;
                y_hat.push(tape.add(rel_t, origin_var)?);
            }

            fused_all.push(scales);
            y_hat_all.push(y_hat);
        }

        Ok(GeneratedScene {
            fused: fused_all,
            y_hat: y_hat_all,
        })
    }

    pub fn var_ids(&self) -> Vec<VarId> {
        let mut v = Vec::new();
        v.extend(self.embed_obs.var_ids());
        v.extend(self.enc_cell.var_ids());
        v.extend(self.pool_embed.var_ids());
        v.extend(self.pool_mlp.var_ids());
        v.extend(self.state_proj.var_ids());
        v.extend(self.embed_dec.var_ids());
        v.extend(self.dec_cell.var_ids());
        v.extend(self.out.var_ids());
        v.extend(self.fusion.var_ids());
        v
    }
}

/// Mirrors `pyramid::resample_to_length` over tape variables, reusing the
/// exact interpolation weights so the data path and the differentiable path
/// agree bit for bit.
pub(crate) fn resample_vars(
    tape: &mut Tape,
    seq: &[VarId],
    target_len: usize,
) -> Result<Vec<VarId>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if target_len == 0 {
        return Err(Error::InvalidLength("resample target length 0".into()));
    }
    let weights = resample_weights(seq.len(), target_len);
    let mut out = Vec::with_capacity(target_len);
    for (i0, w) in weights {
        if w == 0.0 {
            out.push(seq[i0]);
        } else {
            let a = tape.scale(seq[i0], 1.0 - w)?;
            let b = tape.scale(seq[i0 + 1], w)?;
            out.push(tape.add(a, b)?);
        }
    }
    Ok(out)
}
