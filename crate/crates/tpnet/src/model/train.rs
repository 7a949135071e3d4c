//! Alternating adversarial training with reproducible RNG streams.
//!
//! Every random draw comes from a stream derived from (seed, epoch, batch)
//! through a splitmix hash, so a run is bitwise reproducible and a resumed
//! checkpoint re-derives exactly the noise it would have seen in a
//! continuous run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::discriminator::DiscriminatorParams;
use super::generator::GeneratorParams;
use super::loss::{discriminator_loss, generator_adv_loss, loss_final, loss_multi_supervision};
use super::GeneratorConfig;
use crate::adam::{AdamConfig, AdamState};
use crate::checkpoint::Checkpoint;
use crate::data::Scene;
use crate::error::{Error, Result};
use crate::pyramid::{build_pyramid, Pyramid, PyramidConfig};
use crate::tape::Tape;
use crate::tensor::Tensor;

const SHUFFLE_TAG: u64 = 0xFFFF_FFFF_FFFF_0001;
const INIT_TAG_GEN: u64 = 0xFFFF_FFFF_FFFF_0002;
const INIT_TAG_DIS: u64 = 0xFFFF_FFFF_FFFF_0003;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainOptions {
    /// Additional epochs to run (on top of whatever the state has seen).
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_g: f64,
    pub lr_d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Multiplier on the multi-supervision term (0 disables it).
    pub multi_supervision_weight: f64,
    /// Use the literal min-max generator term instead of the
    /// non-saturating one.
    pub literal_adversarial: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 400,
            batch_size: 64,
            lr_g: 1e-4,
            lr_d: 2e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
            multi_supervision_weight: 1.0,
            literal_adversarial: false,
        }
    }
}

/// Per-epoch loss trace entry (batch means). The multi-supervision column
/// records the weighted contribution to the objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: u64,
    pub l_adv_g: f64,
    pub l_adv_d: f64,
    pub l_s: f64,
    pub l_f: f64,
}

impl EpochRecord {
    pub fn csv_header() -> &'static str {
        "epoch,l_adv_g,l_adv_d,l_s,l_f"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.epoch, self.l_adv_g, self.l_adv_d, self.l_s, self.l_f
        )
    }
}

/// Everything that evolves during training.
pub struct TrainerState {
    pub gen: GeneratorParams,
    pub dis: DiscriminatorParams,
    pub adam_g: AdamState,
    pub adam_d: AdamState,
    /// Epochs completed so far.
    pub epoch: u64,
    pub seed: u64,
}

impl TrainerState {
    pub fn init(cfg: GeneratorConfig, opts: &TrainOptions, seed: u64) -> Self {
        let gen = GeneratorParams::new(cfg, &mut stream_rng(seed, INIT_TAG_GEN, 0));
        let dis = DiscriminatorParams::new(
            cfg.dims,
            cfg.pyramid.t_obs,
            cfg.pyramid.t_pred,
            &mut stream_rng(seed, INIT_TAG_DIS, 0),
        );
        let adam_g = AdamState::new(
            AdamConfig {
                lr: opts.lr_g,
                beta1: opts.beta1,
                beta2: opts.beta2,
                eps: opts.eps,
                weight_decay: opts.weight_decay,
            },
            &gen.named().iter().map(|(_, t)| *t).collect::<Vec<_>>(),
        );
        let adam_d = AdamState::new(
            AdamConfig {
                lr: opts.lr_d,
                beta1: opts.beta1,
                beta2: opts.beta2,
                eps: opts.eps,
                weight_decay: opts.weight_decay,
            },
            &dis.named().iter().map(|(_, t)| *t).collect::<Vec<_>>(),
        );
        TrainerState {
            gen,
            dis,
            adam_g,
            adam_d,
            epoch: 0,
            seed,
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let cfg = self.gen.cfg;
        let mut meta = vec![
            ("epoch".to_string(), self.epoch),
            ("seed".to_string(), self.seed),
            ("cfg.levels".to_string(), cfg.pyramid.levels as u64),
            ("cfg.native".to_string(), cfg.pyramid.native as u64),
            ("cfg.t_obs".to_string(), cfg.pyramid.t_obs as u64),
            ("cfg.t_pred".to_string(), cfg.pyramid.t_pred as u64),
            ("cfg.embed".to_string(), cfg.dims.embed as u64),
            ("cfg.hidden".to_string(), cfg.dims.hidden as u64),
            ("cfg.noise".to_string(), cfg.dims.noise as u64),
            ("cfg.pool".to_string(), cfg.dims.pool as u64),
            ("cfg.pool_hidden".to_string(), cfg.dims.pool_hidden as u64),
            ("cfg.noise_per_ped".to_string(), cfg.noise_per_ped as u64),
            ("adam_g.step".to_string(), self.adam_g.step),
            ("adam_d.step".to_string(), self.adam_d.step),
        ];
        for (tag, a) in [("adam_g", &self.adam_g), ("adam_d", &self.adam_d)] {
            meta.push((format!("{tag}.lr.bits"), a.config.lr.to_bits()));
            meta.push((format!("{tag}.beta1.bits"), a.config.beta1.to_bits()));
            meta.push((format!("{tag}.beta2.bits"), a.config.beta2.to_bits()));
            meta.push((format!("{tag}.eps.bits"), a.config.eps.to_bits()));
            meta.push((format!("{tag}.wd.bits"), a.config.weight_decay.to_bits()));
        }

        let mut tensors = Vec::new();
        for (name, t) in self.gen.named() {
            tensors.push((format!("gen.{name}"), t.clone()));
        }
        for (name, t) in self.dis.named() {
            tensors.push((format!("dis.{name}"), t.clone()));
        }
        for ((name, _), (m, v)) in self
            .gen
            .named()
            .iter()
            .zip(self.adam_g.m.iter().zip(self.adam_g.v.iter()))
        {
            tensors.push((format!("adam_g.m.{name}"), m.clone()));
            tensors.push((format!("adam_g.v.{name}"), v.clone()));
        }
        for ((name, _), (m, v)) in self
            .dis
            .named()
            .iter()
            .zip(self.adam_d.m.iter().zip(self.adam_d.v.iter()))
        {
            tensors.push((format!("adam_d.m.{name}"), m.clone()));
            tensors.push((format!("adam_d.v.{name}"), v.clone()));
        }
        Checkpoint { meta, tensors }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let pyramid = PyramidConfig::new(
            ck.require_meta("cfg.levels")? as usize,
            ck.require_meta("cfg.native")? as usize,
            ck.require_meta("cfg.t_obs")? as usize,
            ck.require_meta("cfg.t_pred")? as usize,
        )
        .map_err(|e| Error::CheckpointError(format!("bad stored config: {e}")))?;
        let cfg = GeneratorConfig {
            pyramid,
            dims: super::ModelDims {
                embed: ck.require_meta("cfg.embed")? as usize,
                hidden: ck.require_meta("cfg.hidden")? as usize,
                noise: ck.require_meta("cfg.noise")? as usize,
                pool: ck.require_meta("cfg.pool")? as usize,
                pool_hidden: ck.require_meta("cfg.pool_hidden")? as usize,
            },
            noise_per_ped: ck.require_meta("cfg.noise_per_ped")? != 0,
        };
        let seed = ck.require_meta("seed")?;
        let epoch = ck.require_meta("epoch")?;

        let mut gen = GeneratorParams::new(cfg, &mut ChaCha8Rng::seed_from_u64(0));
        for (name, t) in gen.named_mut() {
            let stored = ck.require_tensor(&format!("gen.{name}"))?;
            if stored.shape() != t.shape() {
                return Err(Error::CheckpointError(format!(
                    "shape mismatch for gen.{name}: {:?} vs {:?}",
                    stored.shape(),
                    t.shape()
                )));
            }
            *t = stored.clone();
        }
        let mut dis = DiscriminatorParams::new(
            cfg.dims,
            cfg.pyramid.t_obs,
            cfg.pyramid.t_pred,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        for (name, t) in dis.named_mut() {
            let stored = ck.require_tensor(&format!("dis.{name}"))?;
            if stored.shape() != t.shape() {
                return Err(Error::CheckpointError(format!(
                    "shape mismatch for dis.{name}: {:?} vs {:?}",
                    stored.shape(),
                    t.shape()
                )));
            }
            *t = stored.clone();
        }

        let adam_cfg = |tag: &str| -> Result<AdamConfig> {
            Ok(AdamConfig {
                lr: f64::from_bits(ck.require_meta(&format!("{tag}.lr.bits"))?),
                beta1: f64::from_bits(ck.require_meta(&format!("{tag}.beta1.bits"))?),
                beta2: f64::from_bits(ck.require_meta(&format!("{tag}.beta2.bits"))?),
                eps: f64::from_bits(ck.require_meta(&format!("{tag}.eps.bits"))?),
                weight_decay: f64::from_bits(ck.require_meta(&format!("{tag}.wd.bits"))?),
            })
        };
        let mut adam_g = AdamState::new(
            adam_cfg("adam_g")?,
            &gen.named().iter().map(|(_, t)| *t).collect::<Vec<_>>(),
        );
        adam_g.step = ck.require_meta("adam_g.step")?;
        for (i, (name, _)) in gen.named().iter().enumerate() {
            adam_g.m[i] = ck.require_tensor(&format!("adam_g.m.{name}"))?.clone();
            adam_g.v[i] = ck.require_tensor(&format!("adam_g.v.{name}"))?.clone();
        }
        let mut adam_d = AdamState::new(
            adam_cfg("adam_d")?,
            &dis.named().iter().map(|(_, t)| *t).collect::<Vec<_>>(),
        );
        adam_d.step = ck.require_meta("adam_d.step")?;
        for (i, (name, _)) in dis.named().iter().enumerate() {
            adam_d.m[i] = ck.require_tensor(&format!("adam_d.m.{name}"))?.clone();
            adam_d.v[i] = ck.require_tensor(&format!("adam_d.v.{name}"))?.clone();
        }

        Ok(TrainerState {
            gen,
            dis,
            adam_g,
            adam_d,
            epoch,
            seed,
        })
    }
}

/// A ChaCha stream keyed by (seed, a, b) through splitmix rounds.
pub fn stream_rng(seed: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mixed = splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
    ChaCha8Rng::seed_from_u64(mixed)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Standard-normal noise vector of length `dim`.
pub fn sample_noise<R: Rng>(dim: usize, rng: &mut R) -> Tensor {
    Tensor::vector((0..dim).map(|_| rng.sample(StandardNormal)).collect())
}

fn draw_scene_noise<R: Rng>(gen: &GeneratorParams, scene: &Scene, rng: &mut R) -> Vec<Tensor> {
    let count = if gen.cfg.noise_per_ped {
        scene.num_peds()
    } else {
        1
    };
    (0..count)
        .map(|_| sample_noise(gen.cfg.dims.noise, rng))
        .collect()
}

/// Runs `opts.epochs` epochs of alternating updates: per batch, one
/// discriminator step (on its own freshly generated fakes) followed by one
/// generator step on `L_adv + w_s L_s + L_f` against the updated
/// discriminator. `on_epoch` fires after each epoch with the live state;
/// training aborts on the first non-finite loss with the state of the last
/// completed batch intact.
pub fn train(
    state: &mut TrainerState,
    scenes: &[Scene],
    opts: &TrainOptions,
    mut on_epoch: impl FnMut(&TrainerState, &EpochRecord) -> Result<()>,
) -> Result<Vec<EpochRecord>> {
    if scenes.is_empty() {
        return Err(Error::EmptyScene);
    }
    if opts.batch_size == 0 {
        return Err(Error::ConfigError("batch size must be >= 1".into()));
    }

    // Target pyramids and futures never change; build them once per scene.
    let target_pyramids: Vec<Vec<Pyramid>> = scenes
        .iter()
        .map(|s| {
            (0..s.num_peds())
                .map(|i| build_pyramid(s.future(i), &state.gen.cfg.pyramid))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let futures: Vec<Vec<Vec<crate::point::Point>>> =
        scenes.iter().map(|s| s.futures()).collect();
    let scale_weights = state.gen.cfg.pyramid.scale_weights();

    let mut records = Vec::with_capacity(opts.epochs);
    for _ in 0..opts.epochs {
        let epoch = state.epoch;
        let mut order: Vec<usize> = (0..scenes.len()).collect();
        shuffle(&mut order, &mut stream_rng(state.seed, SHUFFLE_TAG, epoch));

        let mut sums = [0.0f64; 4];
        let mut batches = 0usize;
        for (batch_idx, batch) in order.chunks(opts.batch_size).enumerate() {
            let mut rng = stream_rng(state.seed, epoch, batch_idx as u64);

            // Discriminator step: fakes are generated on a scratch tape and
            // enter as constants, so backward never wanders into the
            // generator graph.
            let mut tape = Tape::new();
            let dis_vars = state.dis.bind(&mut tape)?;
            let mut d_total = None;
            for &si in batch {
                let scene = &scenes[si];
                let noise = draw_scene_noise(&state.gen, scene, &mut rng);
                let mut scratch = Tape::new();
                let gen_scratch = state.gen.bind(&mut scratch)?;
                let fake_pts = gen_scratch
                    .generate(&mut scratch, scene, &noise)?
                    .y_hat_points(&scratch);
                let dl = discriminator_loss(&mut tape, &dis_vars, scene, &fake_pts)?;
                d_total = Some(match d_total {
                    Some(acc) => tape.add(acc, dl)?,
                    None => dl,
                });
            }
            let d_loss = tape.scale(d_total.unwrap(), 1.0 / batch.len() as f64)?;
            let grads = tape.backward(d_loss)?;
            let d_grads: Vec<Tensor> = dis_vars
                .var_ids()
                .iter()
                .map(|&id| grads.get(id, &tape))
                .collect();
            let mut d_named = state.dis.named_mut();
            let mut d_params: Vec<&mut Tensor> =
                d_named.iter_mut().map(|(_, t)| &mut **t).collect();
            state.adam_d.step(&mut d_params, &d_grads)?;
            let d_loss_value = tape.value(d_loss).item();

            // Generator step against the updated discriminator.
            let mut tape = Tape::new();
            let gen_vars = state.gen.bind(&mut tape)?;
            let dis_vars = state.dis.bind(&mut tape)?;
            let mut g_adv_total = None;
            let mut l_s_total = None;
            let mut l_f_total = None;
            for &si in batch {
                let scene = &scenes[si];
                let noise = draw_scene_noise(&state.gen, scene, &mut rng);
                let fake = gen_vars.generate(&mut tape, scene, &noise)?;
                let adv = generator_adv_loss(
                    &mut tape,
                    &dis_vars,
                    scene,
                    &fake,
                    opts.literal_adversarial,
                )?;
                let ls_raw =
                    loss_multi_supervision(&mut tape, &fake, &target_pyramids[si], &scale_weights)?;
                let ls = tape.scale(ls_raw, opts.multi_supervision_weight)?;
                let lf = loss_final(&mut tape, &fake, &futures[si])?;
                g_adv_total = acc_add(&mut tape, g_adv_total, adv)?;
                l_s_total = acc_add(&mut tape, l_s_total, ls)?;
                l_f_total = acc_add(&mut tape, l_f_total, lf)?;
            }
            let inv = 1.0 / batch.len() as f64;
            let g_adv = tape.scale(g_adv_total.unwrap(), inv)?;
            let l_s = tape.scale(l_s_total.unwrap(), inv)?;
            let l_f = tape.scale(l_f_total.unwrap(), inv)?;
            let partial = tape.add(g_adv, l_s)?;
            let g_loss = tape.add(partial, l_f)?;
            let grads = tape.backward(g_loss)?;
            let g_grads: Vec<Tensor> = gen_vars
                .var_ids()
                .iter()
                .map(|&id| grads.get(id, &tape))
                .collect();
            let mut g_named = state.gen.named_mut();
            let mut g_params: Vec<&mut Tensor> =
                g_named.iter_mut().map(|(_, t)| &mut **t).collect();
            state.adam_g.step(&mut g_params, &g_grads)?;

            sums[0] += tape.value(g_adv).item();
            sums[1] += d_loss_value;
            sums[2] += tape.value(l_s).item();
            sums[3] += tape.value(l_f).item();
            batches += 1;
        }

        state.epoch += 1;
        let record = EpochRecord {
            epoch: state.epoch,
            l_adv_g: sums[0] / batches as f64,
            l_adv_d: sums[1] / batches as f64,
            l_s: sums[2] / batches as f64,
            l_f: sums[3] / batches as f64,
        };
        on_epoch(state, &record)?;
        records.push(record);
    }
    Ok(records)
}

fn acc_add(
    tape: &mut Tape,
    acc: Option<crate::tape::VarId>,
    v: crate::tape::VarId,
) -> Result<Option<crate::tape::VarId>> {
    Ok(Some(match acc {
        Some(a) => tape.add(a, v)?,
        None => v,
    }))
}

/// Fisher-Yates with a dedicated stream.
fn shuffle(order: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
}
