//! ADE/FDE metrics, best-of-K evaluation, baseline predictors, and the
//! benchmark / ablation harness.

use rand_chacha::ChaCha8Rng;

use crate::data::Scene;
use crate::error::{Error, Result};
use crate::model::{
    sample_noise, stream_rng, train, GeneratorConfig, GeneratorParams, TrainOptions, TrainerState,
};
use crate::point::Point;
use crate::pyramid::PyramidConfig;
use crate::tape::Tape;

/// One benchmark result line.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub dataset: String,
    pub ade: f64,
    pub fde: f64,
    pub k: usize,
    pub scenes: usize,
}

impl MetricsRow {
    pub fn csv_header() -> &'static str {
        "dataset,ade,fde,k,scenes"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{:.6},{:.6},{},{}",
            self.dataset, self.ade, self.fde, self.k, self.scenes
        )
    }
}

fn check_shapes(pred: &[Vec<Point>], gt: &[Vec<Point>]) -> Result<()> {
    if pred.len() != gt.len() || pred.is_empty() {
        return Err(Error::ShapeError(format!(
            "pedestrian counts differ: {} vs {}",
            pred.len(),
            gt.len()
        )));
    }
    for (p, g) in pred.iter().zip(gt) {
        if p.len() != g.len() || p.is_empty() {
            return Err(Error::ShapeError(format!(
                "trajectory lengths differ: {} vs {}",
                p.len(),
                g.len()
            )));
        }
    }
    Ok(())
}

/// Average displacement error: mean Euclidean distance over all pedestrians
/// and all predicted steps.
pub fn ade(pred: &[Vec<Point>], gt: &[Vec<Point>]) -> Result<f64> {
    check_shapes(pred, gt)?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, g) in pred.iter().zip(gt) {
        for (a, b) in p.iter().zip(g) {
            sum += a.dist(b);
            count += 1;
        }
    }
    Ok(sum / count as f64)
}

/// Final displacement error: mean Euclidean distance at the last predicted
/// step.
pub fn fde(pred: &[Vec<Point>], gt: &[Vec<Point>]) -> Result<f64> {
    check_shapes(pred, gt)?;
    let mut sum = 0.0;
    for (p, g) in pred.iter().zip(gt) {
        sum += p.last().unwrap().dist(g.last().unwrap());
    }
    Ok(sum / pred.len() as f64)
}

/// Minimum ADE and minimum FDE over K samples, minimized independently.
pub fn best_of_k(samples: &[Vec<Vec<Point>>], gt: &[Vec<Point>]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidK);
    }
    let mut best_ade = f64::INFINITY;
    let mut best_fde = f64::INFINITY;
    for s in samples {
        best_ade = best_ade.min(ade(s, gt)?);
        best_fde = best_fde.min(fde(s, gt)?);
    }
    Ok((best_ade, best_fde))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    /// Least-squares line over the observed steps, extrapolated.
    Linear,
    /// Last observed displacement repeated.
    ConstantVelocity,
}

impl BaselineKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(BaselineKind::Linear),
            "constant_velocity" => Ok(BaselineKind::ConstantVelocity),
            other => Err(Error::ConfigError(format!("unknown baseline '{other}'"))),
        }
    }
}

/// Extrapolates each pedestrian's observed history `t_pred` steps ahead.
pub fn baseline_predict(kind: BaselineKind, scene: &Scene) -> Vec<Vec<Point>> {
    (0..scene.num_peds())
        .map(|i| {
            let obs = scene.observed(i);
            match kind {
                BaselineKind::ConstantVelocity => {
                    let last = *obs.last().unwrap();
                    let v = if obs.len() >= 2 {
                        obs[obs.len() - 1] - obs[obs.len() - 2]
                    } else {
                        Point::ZERO
                    };
                    (1..=scene.t_pred).map(|s| last + v * s as f64).collect()
                }
                BaselineKind::Linear => {
                    let n = obs.len() as f64;
                    let t_mean = (n - 1.0) / 2.0;
                    let mut sxx = 0.0;
                    let mut sxy = Point::ZERO;
                    let mut y_mean = Point::ZERO;
                    for p in obs {
                        y_mean += *p;
                    }
                    let y_mean = y_mean * (1.0 / n);
                    for (t, p) in obs.iter().enumerate() {
                        let dt = t as f64 - t_mean;
                        sxx += dt * dt;
                        sxy += (*p - y_mean) * dt;
                    }
                    let slope = sxy * (1.0 / sxx);
                    let intercept = y_mean - slope * t_mean;
                    (obs.len()..obs.len() + scene.t_pred)
                        .map(|t| intercept + slope * t as f64)
                        .collect()
                }
            }
        })
        .collect()
}

/// Anything that can produce one stochastic prediction set for a scene.
/// Implementations must only look at the observed part; the full scene is
/// passed so oracle fixtures can cheat in tests.
pub trait ScenePredictor: Sync {
    fn predict(&self, scene: &Scene, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Point>>>;
}

/// Samples the trained generator: one noise draw per call.
pub struct GeneratorPredictor<'a> {
    pub params: &'a GeneratorParams,
}

impl ScenePredictor for GeneratorPredictor<'_> {
    fn predict(&self, scene: &Scene, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Point>>> {
        let count = if self.params.cfg.noise_per_ped {
            scene.num_peds()
        } else {
            1
        };
        let noise: Vec<_> = (0..count)
            .map(|_| sample_noise(self.params.cfg.dims.noise, rng))
            .collect();
        let mut tape = Tape::new();
        let vars = self.params.bind(&mut tape)?;
        let out = vars.generate(&mut tape, scene, &noise)?;
        Ok(out.y_hat_points(&tape))
    }
}

/// Deterministic baseline wrapped as a predictor.
pub struct BaselinePredictor(pub BaselineKind);

impl ScenePredictor for BaselinePredictor {
    fn predict(&self, scene: &Scene, _rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Point>>> {
        Ok(baseline_predict(self.0, scene))
    }
}

/// Best-of-K evaluation over a scene list. Scenes contribute to the
/// aggregate proportionally to their pedestrian count. The per-sample RNG
/// stream is keyed by (seed, scene index, sample index), so results are
/// deterministic and independent of worker count.
pub fn run_benchmark(
    predictor: &impl ScenePredictor,
    scenes: &[Scene],
    k: usize,
    samples_seed: u64,
    dataset: &str,
    workers: usize,
) -> Result<MetricsRow> {
    if k == 0 {
        return Err(Error::InvalidK);
    }
    if scenes.is_empty() {
        return Err(Error::EmptyScene);
    }
    let per_scene = eval_scenes(predictor, scenes, k, samples_seed, workers.max(1))?;

    let mut ade_sum = 0.0;
    let mut fde_sum = 0.0;
    let mut weight = 0.0;
    for (scene, (min_ade, min_fde)) in scenes.iter().zip(&per_scene) {
        let w = scene.num_peds() as f64;
        ade_sum += min_ade * w;
        fde_sum += min_fde * w;
        weight += w;
    }
    Ok(MetricsRow {
        dataset: dataset.to_string(),
        ade: ade_sum / weight,
        fde: fde_sum / weight,
        k,
        scenes: scenes.len(),
    })
}

fn eval_scene(
    predictor: &impl ScenePredictor,
    scene: &Scene,
    idx: usize,
    k: usize,
    samples_seed: u64,
) -> Result<(f64, f64)> {
    let gt = scene.futures();
    let mut samples = Vec::with_capacity(k);
    for s in 0..k {
        let mut rng = stream_rng(samples_seed, idx as u64, s as u64);
        samples.push(predictor.predict(scene, &mut rng)?);
    }
    best_of_k(&samples, &gt)
}

fn eval_scenes(
    predictor: &impl ScenePredictor,
    scenes: &[Scene],
    k: usize,
    samples_seed: u64,
    workers: usize,
) -> Result<Vec<(f64, f64)>> {
    if workers <= 1 || scenes.len() <= 1 {
        return scenes
            .iter()
            .enumerate()
            .map(|(i, s)| eval_scene(predictor, s, i, k, samples_seed))
            .collect();
    }
    let mut results: Vec<Option<Result<(f64, f64)>>> = (0..scenes.len()).map(|_| None).collect();
    let chunk = scenes.len().div_ceil(workers);
    let indices: Vec<usize> = (0..scenes.len()).collect();
    std::thread::scope(|scope| {
        for (slot_chunk, idx_chunk) in results.chunks_mut(chunk).zip(indices.chunks(chunk)) {
            scope.spawn(move || {
                for (slot, &i) in slot_chunk.iter_mut().zip(idx_chunk) {
                    *slot = Some(eval_scene(predictor, &scenes[i], i, k, samples_seed));
                }
            });
        }
    });
    results.into_iter().map(|r| r.unwrap()).collect()
}

/// Ablation variants: the single-scale shape, the pyramid without
/// multi-supervision, and the full model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    SingleScale,
    PyramidNoMs,
    Full,
}

impl Variant {
    pub const DEFAULT_SET: [Variant; 3] = [Variant::SingleScale, Variant::PyramidNoMs, Variant::Full];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "single_scale" => Ok(Variant::SingleScale),
            "pyramid_no_ms" => Ok(Variant::PyramidNoMs),
            "full" => Ok(Variant::Full),
            other => Err(Error::ConfigError(format!("unknown variant '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::SingleScale => "single_scale",
            Variant::PyramidNoMs => "pyramid_no_ms",
            Variant::Full => "full",
        }
    }

    /// Applies the variant to a base configuration.
    pub fn apply(
        &self,
        base_cfg: &GeneratorConfig,
        base_opts: &TrainOptions,
    ) -> Result<(GeneratorConfig, TrainOptions)> {
        let mut cfg = *base_cfg;
        let mut opts = *base_opts;
        match self {
            Variant::SingleScale => {
                cfg.pyramid =
                    PyramidConfig::new(1, 1, cfg.pyramid.t_obs, cfg.pyramid.t_pred)?;
                opts.multi_supervision_weight = 0.0;
            }
            Variant::PyramidNoMs => {
                opts.multi_supervision_weight = 0.0;
            }
            Variant::Full => {}
        }
        Ok((cfg, opts))
    }
}

/// One trained-and-evaluated ablation cell.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub variant: &'static str,
    pub seed: u64,
    pub ade: f64,
    pub fde: f64,
    pub k: usize,
}

impl AblationRow {
    pub fn csv_header() -> &'static str {
        "variant,seed,ade,fde,k"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{}",
            self.variant, self.seed, self.ade, self.fde, self.k
        )
    }
}

/// Mean and sample standard deviation of (ADE, FDE) per variant.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationSummary {
    pub variant: &'static str,
    pub ade_mean: f64,
    pub ade_spread: f64,
    pub fde_mean: f64,
    pub fde_spread: f64,
    pub runs: usize,
}

/// Trains every (variant, seed) cell under identical budgets and evaluates
/// best-of-`k` on `eval_scenes`. Cells are independent seeded runs, so they
/// fan out across `workers` threads without changing any result.
#[allow(clippy::too_many_arguments)]
pub fn run_ablation(
    variants: &[Variant],
    train_scenes: &[Scene],
    eval_scenes: &[Scene],
    seeds: &[u64],
    base_cfg: &GeneratorConfig,
    base_opts: &TrainOptions,
    k: usize,
    workers: usize,
) -> Result<Vec<AblationRow>> {
    if seeds.is_empty() {
        return Err(Error::ConfigError("ablation needs at least one seed".into()));
    }
    let mut cells = Vec::with_capacity(variants.len() * seeds.len());
    for variant in variants {
        let (cfg, opts) = variant.apply(base_cfg, base_opts)?;
        for &seed in seeds {
            cells.push((*variant, cfg, opts, seed));
        }
    }

    let run_cell = |(variant, cfg, opts, seed): &(Variant, GeneratorConfig, TrainOptions, u64)| {
        let mut state = TrainerState::init(*cfg, opts, *seed);
        train(&mut state, train_scenes, opts, |_, _| Ok(()))?;
        let predictor = GeneratorPredictor { params: &state.gen };
        let row = run_benchmark(&predictor, eval_scenes, k, *seed, variant.name(), 1)?;
        Ok(AblationRow {
            variant: variant.name(),
            seed: *seed,
            ade: row.ade,
            fde: row.fde,
            k,
        })
    };

    let workers = workers.max(1).min(cells.len());
    if workers <= 1 {
        return cells.iter().map(run_cell).collect();
    }

    // Workers pull cell indices from a shared counter (cells differ a lot
    // in cost) and send results back tagged with their index.
    let next = std::sync::atomic::AtomicUsize::new(0);
    let (tx, rx) = std::sync::mpsc::channel::<(usize, Result<AblationRow>)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let cells = &cells;
            let run_cell = &run_cell;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                if tx.send((i, run_cell(&cells[i]))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
    });
    let mut rows: Vec<Option<Result<AblationRow>>> = (0..cells.len()).map(|_| None).collect();
    for (i, row) in rx {
        rows[i] = Some(row);
    }
    rows.into_iter().map(|r| r.unwrap()).collect()
}

pub fn summarize_ablation(rows: &[AblationRow]) -> Vec<AblationSummary> {
    let mut out = Vec::new();
    for variant in Variant::DEFAULT_SET {
        let vals: Vec<&AblationRow> = rows.iter().filter(|r| r.variant == variant.name()).collect();
        if vals.is_empty() {
            continue;
        }
        let n = vals.len() as f64;
        let ade_mean = vals.iter().map(|r| r.ade).sum::<f64>() / n;
        let fde_mean = vals.iter().map(|r| r.fde).sum::<f64>() / n;
        let spread = |mean: f64, get: fn(&AblationRow) -> f64| {
            if vals.len() < 2 {
                0.0
            } else {
                (vals.iter().map(|r| (get(r) - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            }
        };
        out.push(AblationSummary {
            variant: variant.name(),
            ade_mean,
            ade_spread: spread(ade_mean, |r| r.ade),
            fde_mean,
            fde_spread: spread(fde_mean, |r| r.fde),
            runs: vals.len(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, Scenario};

    fn traj(points: &[(f64, f64)]) -> Vec<Point> {
        points.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn ade_of_identical_trajectories_is_zero() {
        let gt = vec![traj(&[(0.0, 0.0), (1.0, 1.0)])];
        assert_eq!(ade(&gt, &gt).unwrap(), 0.0);
        assert_eq!(fde(&gt, &gt).unwrap(), 0.0);
    }

    #[test]
    fn constant_offset_is_a_345_triangle() {
        let gt: Vec<Vec<Point>> = vec![(0..12).map(|i| Point::new(i as f64, 0.0)).collect()];
        let pred: Vec<Vec<Point>> = vec![gt[0].iter().map(|p| *p + Point::new(0.3, 0.4)).collect()];
        assert!((ade(&pred, &gt).unwrap() - 0.5).abs() < 1e-12);
        assert!((fde(&pred, &gt).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_step_error_averages_over_twelve() {
        let gt: Vec<Vec<Point>> = vec![vec![Point::ZERO; 12]];
        let mut pred = gt.clone();
        pred[0][3] = Point::new(1.0, 0.0);
        assert!((ade(&pred, &gt).unwrap() - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn fde_means_over_pedestrians() {
        let gt = vec![vec![Point::ZERO; 3], vec![Point::ZERO; 3]];
        let mut pred = gt.clone();
        pred[0][2] = Point::new(1.0, 0.0);
        pred[1][2] = Point::new(3.0, 0.0);
        assert!((fde(&pred, &gt).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn metric_symmetry_and_scaling() {
        let a = vec![traj(&[(0.0, 1.0), (2.0, 3.0), (4.0, -1.0)])];
        let b = vec![traj(&[(1.0, 1.5), (0.0, 3.5), (4.5, 0.0)])];
        assert_eq!(ade(&a, &b).unwrap(), ade(&b, &a).unwrap());
        assert_eq!(fde(&a, &b).unwrap(), fde(&b, &a).unwrap());

        let s = 2.5;
        let scale = |t: &[Vec<Point>]| -> Vec<Vec<Point>> {
            t.iter()
                .map(|tr| tr.iter().map(|p| *p * s).collect())
                .collect()
        };
        assert!((ade(&scale(&a), &scale(&b)).unwrap() - s * ade(&a, &b).unwrap()).abs() < 1e-12);
        assert!((fde(&scale(&a), &scale(&b)).unwrap() - s * fde(&a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn best_of_k_reduces_and_never_increases() {
        let gt = vec![vec![Point::ZERO; 4]];
        let far: Vec<Vec<Point>> = vec![vec![Point::new(0.7, 0.0); 4]];
        let near: Vec<Vec<Point>> = vec![vec![Point::new(0.4, 0.0); 4]];
        let (a1, f1) = best_of_k(std::slice::from_ref(&far), &gt).unwrap();
        let (a2, f2) = best_of_k(&[far.clone(), near.clone()], &gt).unwrap();
        assert!((a1 - 0.7).abs() < 1e-12);
        assert!((a2 - 0.4).abs() < 1e-12);
        assert!(a2 <= a1 && f2 <= f1);
        assert!(matches!(best_of_k(&[], &gt), Err(Error::InvalidK)));
    }

    #[test]
    fn k_equal_one_matches_plain_metrics() {
        let gt = vec![traj(&[(0.0, 0.0), (1.0, 0.0)])];
        let sample = vec![traj(&[(0.5, 0.0), (1.5, 0.0)])];
        let (ba, bf) = best_of_k(std::slice::from_ref(&sample), &gt).unwrap();
        assert_eq!(ba, ade(&sample, &gt).unwrap());
        assert_eq!(bf, fde(&sample, &gt).unwrap());
    }

    #[test]
    fn baselines_reproduce_linear_futures_exactly() {
        let scenes = gen_synthetic(Scenario::ConstantVelocity, 3, 5, 8, 12);
        for scene in &scenes {
            let gt = scene.futures();
            for kind in [BaselineKind::Linear, BaselineKind::ConstantVelocity] {
                let pred = baseline_predict(kind, scene);
                assert!(ade(&pred, &gt).unwrap() < 1e-9, "{kind:?}");
            }
        }
    }

    #[test]
    fn stationary_pedestrian_stays_put_under_constant_velocity() {
        let mut scene = gen_synthetic(Scenario::ConstantVelocity, 1, 5, 8, 12).remove(0);
        let here = Point::new(3.0, -2.0);
        scene.trajectories[0] = vec![here; 20];
        let pred = baseline_predict(BaselineKind::ConstantVelocity, &scene);
        assert!(pred[0].iter().all(|p| *p == here));
    }

    // Analytic least-squares check on y = t^2 over t = 0..7: the fitted
    // slope is cov(t, t^2) / var(t) = 7 and intercept -7, so the
    // extrapolation at step t is 7t - 7.
    #[test]
    fn linear_fit_on_quadratic_matches_closed_form() {
        let mut scene = gen_synthetic(Scenario::ConstantVelocity, 1, 5, 8, 12).remove(0);
        scene.trajectories[0] = (0..20)
            .map(|t| Point::new(t as f64, (t * t) as f64))
            .collect();
        let pred = baseline_predict(BaselineKind::Linear, &scene);
        for (i, p) in pred[0].iter().enumerate() {
            let t = (8 + i) as f64;
            assert!((p.x - t).abs() < 1e-9);
            assert!((p.y - (7.0 * t - 7.0)).abs() < 1e-9);
        }
    }

    struct OracleModel;
    impl ScenePredictor for OracleModel {
        fn predict(&self, scene: &Scene, _rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Point>>> {
            Ok(scene.futures())
        }
    }

    #[test]
    fn oracle_model_scores_zero() {
        let scenes = gen_synthetic(Scenario::Sinusoidal, 4, 2, 8, 12);
        let row = run_benchmark(&OracleModel, &scenes, 3, 0, "synthetic", 1).unwrap();
        assert_eq!(row.ade, 0.0);
        assert_eq!(row.fde, 0.0);
        assert_eq!(row.k, 3);
        assert_eq!(row.scenes, 4);
    }

    // Weighted aggregation oracle: a 2-scene fixture with 1 and 3
    // pedestrians and hand-computed per-scene errors.
    #[test]
    fn benchmark_mean_is_pedestrian_weighted() {
        struct OffsetModel;
        impl ScenePredictor for OffsetModel {
            fn predict(&self, scene: &Scene, _rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Point>>> {
                // Shift every pedestrian by (0.3, 0.4): per-scene ADE = FDE = 0.5.
                Ok(scene
                    .futures()
                    .iter()
                    .map(|t| t.iter().map(|p| *p + Point::new(0.3, 0.4)).collect())
                    .collect())
            }
        }
        let mut s1 = gen_synthetic(Scenario::ConstantVelocity, 1, 1, 8, 12).remove(0);
        let mut s2 = gen_synthetic(Scenario::ConstantVelocity, 1, 2, 8, 12).remove(0);
        s1.ped_ids = vec![1];
        s2.ped_ids = vec![10, 11, 12];
        s2.trajectories = vec![
            s2.trajectories[0].clone(),
            s2.trajectories[0].clone(),
            s2.trajectories[0].clone(),
        ];
        let row = run_benchmark(&OffsetModel, &[s1, s2], 1, 0, "fixture", 1).unwrap();
        // (0.5 * 1 + 0.5 * 3) / 4
        assert!((row.ade - 0.5).abs() < 1e-12);
        assert!((row.fde - 0.5).abs() < 1e-12);
    }

    #[test]
    fn worker_fanout_matches_serial_bitwise() {
        struct JitterModel;
        impl ScenePredictor for JitterModel {
            fn predict(&self, scene: &Scene, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<Point>>> {
                use rand::Rng;
                let dx: f64 = rng.random_range(-1.0..1.0);
                Ok(scene
                    .futures()
                    .iter()
                    .map(|t| t.iter().map(|p| *p + Point::new(dx, 0.0)).collect())
                    .collect())
            }
        }
        let scenes = gen_synthetic(Scenario::Sinusoidal, 6, 3, 8, 12);
        let serial = run_benchmark(&JitterModel, &scenes, 5, 9, "x", 1).unwrap();
        let parallel = run_benchmark(&JitterModel, &scenes, 5, 9, "x", 4).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn variant_configs_differ_as_intended() {
        let base_cfg = GeneratorConfig::standard();
        let base_opts = TrainOptions::default();
        let (cfg, opts) = Variant::SingleScale.apply(&base_cfg, &base_opts).unwrap();
        assert_eq!(cfg.pyramid.levels, 1);
        assert_eq!(opts.multi_supervision_weight, 0.0);
        let (cfg, opts) = Variant::PyramidNoMs.apply(&base_cfg, &base_opts).unwrap();
        assert_eq!(cfg.pyramid.levels, 5);
        assert_eq!(opts.multi_supervision_weight, 0.0);
        let (cfg, opts) = Variant::Full.apply(&base_cfg, &base_opts).unwrap();
        assert_eq!(cfg.pyramid.levels, 5);
        assert_eq!(opts.multi_supervision_weight, 1.0);
    }
}
