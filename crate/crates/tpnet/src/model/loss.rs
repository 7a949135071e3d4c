//! Loss terms: per-scale multi-supervision, final-trajectory supervision,
//! and the adversarial pair.

use super::discriminator::{DiscriminatorVars, FutureInput};
use super::generator::GeneratedScene;
use crate::data::Scene;
use crate::error::{Error, Result};
use crate::point::Point;
use crate::pyramid::Pyramid;
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;

/// Probabilities are clamped here before any log, so the adversarial losses
/// cannot signal numeric errors even against a saturated discriminator.
pub const PROB_FLOOR: f64 = 1e-12;

/// Sum of squared differences between a predicted 2-d sequence (tape vars)
/// and a target point sequence.
pub fn seq_sq_error(tape: &mut Tape, pred: &[VarId], target: &[Point]) -> Result<VarId> {
    if pred.len() != target.len() {
        return Err(Error::ShapeError(format!(
            "sequence lengths differ: {} vs {}",
            pred.len(),
            target.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::EmptySequence);
    }
    let cat = tape.concat(pred)?;
    let flat: Vec<f64> = target.iter().flat_map(|p| [p.x, p.y]).collect();
    let t = tape.leaf(Tensor::vector(flat))?;
    let d = tape.sub(cat, t)?;
    let sq = tape.mul(d, d)?;
    tape.sum(sq)
}

/// Length-weighted squared error over every pyramid scale:
/// `(1 / (N L)) * sum_i sum_l lambda_l * ||pred_i^l - target_i^l||^2`
/// with `lambda_l = t_pred / m'_l`.
pub fn loss_multi_supervision(
    tape: &mut Tape,
    gen_scene: &GeneratedScene,
    targets: &[Pyramid],
    scale_weights: &[f64],
) -> Result<VarId> {
    let n = gen_scene.fused.len();
    if n == 0 || targets.len() != n {
        return Err(Error::ShapeError(format!(
            "multi-supervision: {} predictions vs {} targets",
            n,
            targets.len()
        )));
    }
    let levels = scale_weights.len();
    let mut total: Option<VarId> = None;
    for (scales, target) in gen_scene.fused.iter().zip(targets) {
        if scales.len() != levels || target.scales.len() != levels {
            return Err(Error::ShapeError(format!(
                "multi-supervision: scale counts {} / {} vs {}",
                scales.len(),
                target.scales.len(),
                levels
            )));
        }
        for (level, (pred, tgt)) in scales.iter().zip(&target.scales).enumerate() {
            let e = seq_sq_error(tape, pred, tgt)?;
            let w = tape.scale(e, scale_weights[level])?;
            total = Some(match total {
                Some(acc) => tape.add(acc, w)?,
                None => w,
            });
        }
    }
    tape.scale(total.unwrap(), 1.0 / (n as f64 * levels as f64))
}

/// Final-output supervision: `(1/N) * sum_i ||y_hat_i - y_i||^2`.
pub fn loss_final(
    tape: &mut Tape,
    gen_scene: &GeneratedScene,
    futures: &[Vec<Point>],
) -> Result<VarId> {
    let n = gen_scene.y_hat.len();
    if n == 0 || futures.len() != n {
        return Err(Error::ShapeError(format!(
            "final loss: {} predictions vs {} targets",
            n,
            futures.len()
        )));
    }
    let mut total: Option<VarId> = None;
    for (pred, target) in gen_scene.y_hat.iter().zip(futures) {
        let e = seq_sq_error(tape, pred, target)?;
        total = Some(match total {
            Some(acc) => tape.add(acc, e)?,
            None => e,
        });
    }
    tape.scale(total.unwrap(), 1.0 / n as f64)
}

fn mean_log(tape: &mut Tape, scores: &[VarId]) -> Result<VarId> {
    let cat = tape.concat(scores)?;
    let clamped = tape.clamp_min(cat, PROB_FLOOR)?;
    let lg = tape.log(clamped)?;
    tape.mean(lg)
}

fn mean_log_one_minus(tape: &mut Tape, scores: &[VarId]) -> Result<VarId> {
    let cat = tape.concat(scores)?;
    let neg = tape.scale(cat, -1.0)?;
    let one_minus = tape.add_scalar(neg, 1.0)?;
    let clamped = tape.clamp_min(one_minus, PROB_FLOOR)?;
    let lg = tape.log(clamped)?;
    tape.mean(lg)
}

/// Discriminator objective on one scene:
/// `-mean(log D(real)) - mean(log(1 - D(fake)))` over pedestrians. The fake
/// futures enter as plain points; the discriminator step never needs
/// gradients through the generator.
pub fn discriminator_loss(
    tape: &mut Tape,
    dis: &DiscriminatorVars,
    scene: &Scene,
    fake_futures: &[Vec<Point>],
) -> Result<VarId> {
    let n = scene.num_peds();
    if fake_futures.len() != n {
        return Err(Error::ShapeError(format!(
            "discriminator loss: {} fakes for {} pedestrians",
            fake_futures.len(),
            n
        )));
    }
    let mut real_scores = Vec::with_capacity(n);
    let mut fake_scores = Vec::with_capacity(n);
    for i in 0..n {
        real_scores.push(dis.score(tape, scene.observed(i), FutureInput::Real(scene.future(i)))?);
        fake_scores.push(dis.score(
            tape,
            scene.observed(i),
            FutureInput::Real(&fake_futures[i]),
        )?);
    }
    let real_term = mean_log(tape, &real_scores)?;
    let fake_term = mean_log_one_minus(tape, &fake_scores)?;
    let s = tape.add(real_term, fake_term)?;
    tape.scale(s, -1.0)
}

/// Generator adversarial term on one scene. The default is the
/// non-saturating form `-mean(log D(fake))`; `literal` switches to the
/// min-max term `mean(log(1 - D(fake)))`.
pub fn generator_adv_loss(
    tape: &mut Tape,
    dis: &DiscriminatorVars,
    scene: &Scene,
    gen_scene: &GeneratedScene,
    literal: bool,
) -> Result<VarId> {
    let n = scene.num_peds();
    let mut fake_scores = Vec::with_capacity(n);
    for i in 0..n {
        fake_scores.push(dis.score(
            tape,
            scene.observed(i),
            FutureInput::Fake(&gen_scene.y_hat[i]),
        )?);
    }
    if literal {
        mean_log_one_minus(tape, &fake_scores)
    } else {
        let m = mean_log(tape, &fake_scores)?;
        tape.scale(m, -1.0)
    }
}
