//! Adam with bias correction and coupled L2 weight decay.

use crate::error::{Error, Result};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl AdamConfig {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
        }
    }
}

/// Per-parameter first/second moment accumulators plus the step counter.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl AdamState {
    /// `shapes` fixes the parameter ordering for the lifetime of the state.
    pub fn new(config: AdamConfig, params: &[&Tensor]) -> Self {
        AdamState {
            config,
            step: 0,
            m: params.iter().map(|p| Tensor::zeros_like(p)).collect(),
            v: params.iter().map(|p| Tensor::zeros_like(p)).collect(),
        }
    }

    /// One bias-corrected update. Weight decay enters as an L2 term added to
    /// the raw gradient before the moment updates.
    pub fn step(&mut self, params: &mut [&mut Tensor], grads: &[Tensor]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.m.len() {
            return Err(Error::ShapeError(format!(
                "adam: {} params, {} grads, {} moment slots",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        for ((p, g), (m, v)) in params
            .iter()
            .zip(grads)
            .zip(self.m.iter().zip(self.v.iter()))
        {
            if p.shape() != g.shape() || p.shape() != m.shape() || p.shape() != v.shape() {
                return Err(Error::ShapeError(format!(
                    "adam: param {:?} vs grad {:?} vs moments {:?}/{:?}",
                    p.shape(),
                    g.shape(),
                    m.shape(),
                    v.shape()
                )));
            }
        }

        self.step += 1;
        let c = self.config;
        let bc1 = 1.0 - c.beta1.powi(self.step as i32);
        let bc2 = 1.0 - c.beta2.powi(self.step as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            let pd = p.data_mut();
            let md = m.data_mut();
            let vd = v.data_mut();
            for i in 0..pd.len() {
                let grad = g.data()[i] + c.weight_decay * pd[i];
                md[i] = c.beta1 * md[i] + (1.0 - c.beta1) * grad;
                vd[i] = c.beta2 * vd[i] + (1.0 - c.beta2) * grad * grad;
                let m_hat = md[i] / bc1;
                let v_hat = vd[i] / bc2;
                pd[i] -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
                if !pd[i].is_finite() {
                    return Err(Error::NumericError(
                        "adam produced a non-finite parameter".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // First-step identity: with m-hat = v-hat = grad-derived units, the very
    // first update moves the parameter by almost exactly -lr * sign(grad).
    #[test]
    fn first_step_magnitude_is_the_learning_rate() {
        let cfg = AdamConfig::new(1e-4, 0.0);
        let mut p = Tensor::scalar(2.0);
        let mut state = AdamState::new(cfg, &[&p]);
        let g = Tensor::scalar(1.0);
        state.step(&mut [&mut p], &[g]).unwrap();
        let delta = p.item() - 2.0;
        assert!((delta + 1e-4).abs() < 1e-4 * 1e-3, "delta = {delta}");
    }

    #[test]
    fn zero_gradient_zero_moments_leaves_params_unchanged() {
        let cfg = AdamConfig::new(1e-3, 0.0);
        let mut p = Tensor::vector(vec![1.0, -2.0, 3.0]);
        let before = p.clone();
        let mut state = AdamState::new(cfg, &[&p]);
        state.step(&mut [&mut p], &[Tensor::zeros(vec![3])]).unwrap();
        assert_eq!(p, before);
    }

    // With param = 1 and decay 1e-4, the effective gradient is 1e-4 and the
    // bias-corrected first step still has magnitude ~lr.
    #[test]
    fn weight_decay_alone_drives_a_full_first_step() {
        let cfg = AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
        };
        let mut p = Tensor::scalar(1.0);
        let mut state = AdamState::new(cfg, &[&p]);
        state.step(&mut [&mut p], &[Tensor::scalar(0.0)]).unwrap();
        let delta = p.item() - 1.0;
        assert!((delta + 1e-4).abs() < 1e-4 * 1e-2, "delta = {delta}");
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let cfg = AdamConfig::new(1e-3, 0.0);
        let mut p = Tensor::vector(vec![0.0; 3]);
        let mut state = AdamState::new(cfg, &[&p]);
        let bad = Tensor::vector(vec![0.0; 2]);
        assert!(matches!(
            state.step(&mut [&mut p], &[bad]),
            Err(Error::ShapeError(_))
        ));
    }

    #[test]
    fn step_counter_increments() {
        let cfg = AdamConfig::new(1e-3, 0.0);
        let mut p = Tensor::scalar(0.0);
        let mut state = AdamState::new(cfg, &[&p]);
        for expected in 1..=3 {
            state.step(&mut [&mut p], &[Tensor::scalar(0.1)]).unwrap();
            assert_eq!(state.step, expected);
        }
    }
}
