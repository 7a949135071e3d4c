//! Flat key-value run configuration.
//!
//! The file format is one `section.key = value` pair per line with `#`
//! comments. Defaults are the reference settings (five pyramid scales,
//! 32-d hidden state, 16-d embeddings, 8-d noise, Adam at 1e-4/2e-4 with
//! betas 0.9/0.999, weight decay 1e-4, batch 64). Command-line flags
//! override file values, which override defaults.

use std::path::Path;

use tpnet::error::{Error, Result};
use tpnet::model::{GeneratorConfig, ModelDims, TrainOptions};
use tpnet::pyramid::PyramidConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub levels: usize,
    pub native: usize,
    pub t_obs: usize,
    pub t_pred: usize,

    pub hidden: usize,
    pub embed: usize,
    pub noise: usize,
    pub pool: usize,
    pub pool_hidden: usize,
    pub noise_per_ped: bool,

    pub lr_g: f64,
    pub lr_d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,

    pub batch: usize,
    pub epochs: usize,
    pub seed: u64,
    pub multi_supervision: f64,
    pub literal_adversarial: bool,

    pub data_train: Vec<String>,
    pub data_test: Vec<String>,
    pub stride_train: usize,
    pub stride_eval: usize,

    pub k: usize,
    pub eval_seed: u64,
    pub workers: usize,

    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            levels: 5,
            native: 3,
            t_obs: 8,
            t_pred: 12,
            hidden: 32,
            embed: 16,
            noise: 8,
            pool: 32,
            pool_hidden: 64,
            noise_per_ped: false,
            lr_g: 1e-4,
            lr_d: 2e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-4,
            batch: 64,
            epochs: 400,
            seed: 1,
            multi_supervision: 1.0,
            literal_adversarial: false,
            data_train: Vec::new(),
            data_test: Vec::new(),
            stride_train: 1,
            stride_eval: 1,
            k: 20,
            eval_seed: 0,
            workers: 1,
            out_dir: "runs/default".into(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::ConfigError(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut cfg = RunConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ConfigError(format!(
                    "{}:{}: expected 'key = value'",
                    path.display(),
                    idx + 1
                )));
            };
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::ConfigError(format!("bad value '{value}' for {key}")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::ConfigError(format!("bad flag '{value}' for {key}"))),
            }
        }
        let paths = |value: &str| -> Vec<String> {
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        };
        match key {
            "pyramid.levels" => self.levels = num(key, value)?,
            "pyramid.native" => self.native = num(key, value)?,
            "window.observed" => self.t_obs = num(key, value)?,
            "window.predicted" => self.t_pred = num(key, value)?,
            "model.hidden" => self.hidden = num(key, value)?,
            "model.embed" => self.embed = num(key, value)?,
            "model.noise" => self.noise = num(key, value)?,
            "model.pool" => self.pool = num(key, value)?,
            "model.pool_hidden" => self.pool_hidden = num(key, value)?,
            "model.noise_per_ped" => self.noise_per_ped = flag(key, value)?,
            "optim.lr_g" => self.lr_g = num(key, value)?,
            "optim.lr_d" => self.lr_d = num(key, value)?,
            "optim.beta1" => self.beta1 = num(key, value)?,
            "optim.beta2" => self.beta2 = num(key, value)?,
            "optim.eps" => self.eps = num(key, value)?,
            "optim.weight_decay" => self.weight_decay = num(key, value)?,
            "train.batch" => self.batch = num(key, value)?,
            "train.epochs" => self.epochs = num(key, value)?,
            "train.seed" => self.seed = num(key, value)?,
            "train.multi_supervision" => self.multi_supervision = num(key, value)?,
            "train.literal_adversarial" => self.literal_adversarial = flag(key, value)?,
            "data.train" => self.data_train = paths(value),
            "data.test" => self.data_test = paths(value),
            "data.stride_train" => self.stride_train = num(key, value)?,
            "data.stride_eval" => self.stride_eval = num(key, value)?,
            "eval.k" => self.k = num(key, value)?,
            "eval.seed" => self.eval_seed = num(key, value)?,
            "eval.workers" => self.workers = num(key, value)?,
            "out.dir" => self.out_dir = value.to_string(),
            other => {
                return Err(Error::ConfigError(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    pub fn generator_config(&self) -> Result<GeneratorConfig> {
        let pyramid = PyramidConfig::new(self.levels, self.native, self.t_obs, self.t_pred)?;
        Ok(GeneratorConfig {
            pyramid,
            dims: ModelDims {
                embed: self.embed,
                hidden: self.hidden,
                noise: self.noise,
                pool: self.pool,
                pool_hidden: self.pool_hidden,
            },
            noise_per_ped: self.noise_per_ped,
        })
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.epochs,
            batch_size: self.batch,
            lr_g: self.lr_g,
            lr_d: self.lr_d,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
            multi_supervision_weight: self.multi_supervision,
            literal_adversarial: self.literal_adversarial,
        }
    }

    /// One-line run header echoing the effective settings.
    pub fn header(&self) -> String {
        format!(
            "levels={} native={} t_obs={} t_pred={} hidden={} embed={} noise={} \
             batch={} epochs={} seed={} lr_g={} lr_d={} weight_decay={} k={}",
            self.levels,
            self.native,
            self.t_obs,
            self.t_pred,
            self.hidden,
            self.embed,
            self.noise,
            self.batch,
            self.epochs,
            self.seed,
            self.lr_g,
            self.lr_d,
            self.weight_decay,
            self.k
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_settings() {
        let c = RunConfig::default();
        assert_eq!(c.levels, 5);
        assert_eq!(c.hidden, 32);
        assert_eq!(c.embed, 16);
        assert_eq!(c.noise, 8);
        assert_eq!(c.lr_g, 1e-4);
        assert_eq!(c.lr_d, 2e-4);
        assert_eq!(c.beta1, 0.9);
        assert_eq!(c.beta2, 0.999);
        assert_eq!(c.weight_decay, 1e-4);
        assert_eq!(c.batch, 64);
        assert_eq!(c.epochs, 400);
        assert_eq!(c.k, 20);
    }

    #[test]
    fn set_and_reject_keys() {
        let mut c = RunConfig::default();
        c.set("train.epochs", "7").unwrap();
        assert_eq!(c.epochs, 7);
        c.set("data.train", "a.txt, b.txt").unwrap();
        assert_eq!(c.data_train, vec!["a.txt", "b.txt"]);
        assert!(c.set("nope.key", "1").is_err());
        assert!(c.set("train.epochs", "abc").is_err());
    }
}
