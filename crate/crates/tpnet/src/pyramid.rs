//! Temporal pyramid construction and coarse-to-fine fusion.
//!
//! A pyramid holds one trajectory at `L` temporal resolutions. Scales above
//! the native one are produced by the squeeze modulation (uniform
//! subsampling with stride powers of two); scales below it by the dilation
//! modulation (natural-spline interpolation of in-between time steps).

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::point::Point;
use crate::spline::{eval_spline, fit_natural_cubic, Knot};

/// Call counters for the two modulations, used by the ablation harness to
/// assert that the single-scale variant never builds pyramid levels.
pub static SQUEEZE_CALLS: AtomicU64 = AtomicU64::new(0);
pub static DILATE_CALLS: AtomicU64 = AtomicU64::new(0);

pub fn reset_modulation_counters() {
    SQUEEZE_CALLS.store(0, Ordering::Relaxed);
    DILATE_CALLS.store(0, Ordering::Relaxed);
}

pub fn modulation_counts() -> (u64, u64) {
    (
        SQUEEZE_CALLS.load(Ordering::Relaxed),
        DILATE_CALLS.load(Ordering::Relaxed),
    )
}

/// Shape of the temporal pyramid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PyramidConfig {
    /// Number of scales `L` (scale 1 is the coarsest).
    pub levels: usize,
    /// 1-based index of the native scale `k`.
    pub native: usize,
    /// Observed steps per trajectory.
    pub t_obs: usize,
    /// Steps to predict.
    pub t_pred: usize,
}

impl PyramidConfig {
    pub fn new(levels: usize, native: usize, t_obs: usize, t_pred: usize) -> Result<Self> {
        let cfg = PyramidConfig {
            levels,
            native,
            t_obs,
            t_pred,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Default shape: five scales with the native resolution in the middle,
    /// 8 observed and 12 predicted steps.
    pub fn standard() -> Self {
        PyramidConfig::new(5, 3, 8, 12).unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::ConfigError("levels must be >= 1".into()));
        }
        if self.native == 0 || self.native > self.levels {
            return Err(Error::ConfigError(format!(
                "native scale {} outside 1..={}",
                self.native, self.levels
            )));
        }
        if self.t_obs < 2 || self.t_pred < 1 {
            return Err(Error::ConfigError(format!(
                "window too short: t_obs={} t_pred={}",
                self.t_obs, self.t_pred
            )));
        }
        // The deepest squeeze must leave at least two points.
        if scale_len_for(self.t_obs, self.levels, self.native, 1) < 2 {
            return Err(Error::ConfigError(format!(
                "squeeze depth {} infeasible for t_obs={}",
                self.native - 1,
                self.t_obs
            )));
        }
        Ok(())
    }

    /// Closed-form scale lengths for a base sequence of `base_len` steps.
    pub fn scale_lengths(&self, base_len: usize) -> Vec<usize> {
        (1..=self.levels)
            .map(|l| scale_len_for(base_len, self.levels, self.native, l))
            .collect()
    }

    /// Lengths of the observation pyramid (`m`).
    pub fn obs_lengths(&self) -> Vec<usize> {
        self.scale_lengths(self.t_obs)
    }

    /// Lengths of the target pyramid (`m'`).
    pub fn target_lengths(&self) -> Vec<usize> {
        self.scale_lengths(self.t_pred)
    }

    /// Per-scale supervision weights, inversely proportional to the target
    /// feature length: `t_pred / m'`.
    pub fn scale_weights(&self) -> Vec<f64> {
        self.target_lengths()
            .iter()
            .map(|&m| self.t_pred as f64 / m as f64)
            .collect()
    }
}

fn scale_len_for(base_len: usize, _levels: usize, native: usize, level: usize) -> usize {
    if level < native {
        let stride = 1usize << (native - level);
        base_len.div_ceil(stride)
    } else if level == native {
        base_len
    } else {
        let c = 1usize << (level - native);
        c * (base_len - 1) + 1
    }
}

/// One trajectory at every pyramid scale, coarsest first.
#[derive(Clone, Debug, PartialEq)]
pub struct Pyramid {
    pub scales: Vec<Vec<Point>>,
    pub lengths: Vec<usize>,
}

/// Uniformly subsamples `seq` with stride `2^depth`, keeping the first
/// element. Output length is `ceil(n / 2^depth)`.
pub fn squeeze_level(seq: &[Point], depth: u32) -> Result<Vec<Point>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    SQUEEZE_CALLS.fetch_add(1, Ordering::Relaxed);
    let stride = 1usize << depth;
    Ok(seq.iter().copied().step_by(stride).collect())
}

/// Densifies `seq` by a factor `c`: fits a natural spline over the step
/// indices and samples at `1, 1 + 1/c, ..., n`. Samples that land on an
/// original index copy the original point, so squeezing a dilated sequence
/// back down is exact.
pub fn dilate_level(seq: &[Point], c: usize) -> Result<Vec<Point>> {
    if seq.len() < 2 {
        return Err(Error::InsufficientKnots(seq.len()));
    }
    DILATE_CALLS.fetch_add(1, Ordering::Relaxed);
    let knots: Vec<Knot> = seq
        .iter()
        .enumerate()
        .map(|(i, &p)| Knot::new((i + 1) as f64, p))
        .collect();
    let spline = fit_natural_cubic(&knots)?;
    sample_dilated(seq, &spline, c)
}

fn sample_dilated(seq: &[Point], spline: &crate::spline::SplineCoeffs, c: usize) -> Result<Vec<Point>> {
    let n = seq.len();
    let m = c * (n - 1) + 1;
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        if j % c == 0 {
            out.push(seq[j / c]);
        } else {
            let t = 1.0 + j as f64 / c as f64;
            out.push(eval_spline(spline, t)?);
        }
    }
    Ok(out)
}

/// Builds the full pyramid for `seq`, whose length must be the configured
/// observation or prediction window.
pub fn build_pyramid(seq: &[Point], cfg: &PyramidConfig) -> Result<Pyramid> {
    cfg.validate()?;
    if seq.len() != cfg.t_obs && seq.len() != cfg.t_pred {
        return Err(Error::ConfigError(format!(
            "sequence length {} is neither t_obs={} nor t_pred={}",
            seq.len(),
            cfg.t_obs,
            cfg.t_pred
        )));
    }

    // One spline serves every dilated scale.
    let spline = if cfg.levels > cfg.native {
        if seq.len() < 2 {
            return Err(Error::InsufficientKnots(seq.len()));
        }
        let knots: Vec<Knot> = seq
            .iter()
            .enumerate()
            .map(|(i, &p)| Knot::new((i + 1) as f64, p))
            .collect();
        Some(fit_natural_cubic(&knots)?)
    } else {
        None
    };

    let mut scales = Vec::with_capacity(cfg.levels);
    for level in 1..=cfg.levels {
        let scale = if level < cfg.native {
            squeeze_level(seq, (cfg.native - level) as u32)?
        } else if level == cfg.native {
            seq.to_vec()
        } else {
            DILATE_CALLS.fetch_add(1, Ordering::Relaxed);
            let c = 1usize << (level - cfg.native);
            sample_dilated(seq, spline.as_ref().unwrap(), c)?
        };
        scales.push(scale);
    }
    let lengths = scales.iter().map(Vec::len).collect();
    Ok(Pyramid { scales, lengths })
}

/// Linearly resamples `seq` onto `target_len` uniformly spaced parameters
/// over [0, 1]. Endpoints are preserved; a single-point input repeats.
pub fn resample_to_length(seq: &[Point], target_len: usize) -> Result<Vec<Point>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if target_len == 0 {
        return Err(Error::InvalidLength("resample target length 0".into()));
    }
    let mut out = Vec::with_capacity(target_len);
    for (i0, w) in resample_weights(seq.len(), target_len) {
        if w == 0.0 {
            out.push(seq[i0]);
        } else {
            out.push(seq[i0] * (1.0 - w) + seq[i0 + 1] * w);
        }
    }
    Ok(out)
}

/// Same interpolation weights as [`resample_to_length`], exposed so callers
/// that resample differentiable values can mirror the arithmetic exactly.
/// Returns `(left_index, right_weight)` per output slot: the output is
/// `src[i] * (1 - w) + src[i + 1] * w`, or a plain copy of `src[i]` when
/// `w == 0`.
pub fn resample_weights(src_len: usize, target_len: usize) -> Vec<(usize, f64)> {
    assert!(src_len >= 1 && target_len >= 1);
    if src_len == 1 {
        return vec![(0, 0.0); target_len];
    }
    (0..target_len)
        .map(|j| {
            let u = if target_len == 1 {
                0.0
            } else {
                j as f64 / (target_len - 1) as f64
            };
            let pos = u * (src_len - 1) as f64;
            let i0 = (pos.floor() as usize).min(src_len - 2);
            (i0, pos - i0 as f64)
        })
        .collect()
}

/// Coarse-to-fine fusion: walking top-down, each scale is averaged with the
/// previous (already fused) scale resampled onto its own length. Scale 1 is
/// returned unchanged. `expected_lengths` guards the caller's shape contract.
pub fn coarse_to_fine_fuse(
    scales: &[Vec<Point>],
    expected_lengths: &[usize],
) -> Result<Vec<Vec<Point>>> {
    if scales.len() != expected_lengths.len() {
        return Err(Error::ShapeError(format!(
            "fusion got {} scales, expected {}",
            scales.len(),
            expected_lengths.len()
        )));
    }
    for (i, s) in scales.iter().enumerate() {
        if s.len() != expected_lengths[i] {
            return Err(Error::ShapeError(format!(
                "fusion scale {} has length {}, expected {}",
                i + 1,
                s.len(),
                expected_lengths[i]
            )));
        }
    }
    let mut fused: Vec<Vec<Point>> = scales.to_vec();
    for l in 1..fused.len() {
        let up = resample_to_length(&fused[l - 1], fused[l].len())?;
        for (p, u) in fused[l].iter_mut().zip(up.iter()) {
            *p = (*p + *u) * 0.5;
        }
    }
    Ok(fused)
}
