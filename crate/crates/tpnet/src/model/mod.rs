//! The trajectory generator, its discriminator, the loss terms, and the
//! alternating adversarial training loop.

mod discriminator;
mod generator;
mod loss;
mod train;

pub use discriminator::{discriminate, DiscriminatorParams, DiscriminatorVars, FutureInput};
pub use generator::{GeneratedScene, GeneratorParams, GeneratorVars, SceneEncoding};
pub use loss::{
    discriminator_loss, generator_adv_loss, loss_final, loss_multi_supervision, seq_sq_error,
};
pub use train::{sample_noise, stream_rng, train, EpochRecord, TrainOptions, TrainerState};

use crate::pyramid::PyramidConfig;

/// Network widths. Defaults follow the reference configuration: 16-d
/// position embeddings, 32-d recurrent state, 8-d noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelDims {
    pub embed: usize,
    pub hidden: usize,
    pub noise: usize,
    /// Width of the pooled social-context vector.
    pub pool: usize,
    /// Hidden width inside the pooling network.
    pub pool_hidden: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            embed: 16,
            hidden: 32,
            noise: 8,
            pool: 32,
            pool_hidden: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub pyramid: PyramidConfig,
    pub dims: ModelDims,
    /// Draw one noise vector per pedestrian instead of one per scene.
    pub noise_per_ped: bool,
}

impl GeneratorConfig {
    pub fn new(pyramid: PyramidConfig) -> Self {
        GeneratorConfig {
            pyramid,
            dims: ModelDims::default(),
            noise_per_ped: false,
        }
    }

    pub fn standard() -> Self {
        GeneratorConfig::new(PyramidConfig::standard())
    }
}
