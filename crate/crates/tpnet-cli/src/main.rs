//! Command-line front end: train, eval, predict, ablate, synth.
//!
//! Exit codes: 0 success, 2 usage/config, 3 numeric abort, 4 checkpoint,
//! 5 data.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use tpnet::checkpoint;
use tpnet::data::{
    extract_scenes, gen_synthetic, latest_observation_window, parse_dataset_file, Scenario, Scene,
    scenes_to_observations, serialize_observations,
};
use tpnet::error::Error;
use tpnet::eval::{
    run_ablation, run_benchmark, summarize_ablation, GeneratorPredictor, MetricsRow, Variant,
};
use tpnet::model::{sample_noise, stream_rng, train, EpochRecord, TrainerState};
use tpnet::tape::Tape;

#[derive(Parser)]
#[command(name = "tpnet", version, about = "Temporal-pyramid pedestrian trajectory prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Run configuration file (flat `key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override: training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Override: RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override: batch size.
    #[arg(long)]
    batch: Option<usize>,
    /// Override: generator learning rate.
    #[arg(long)]
    lr_g: Option<f64>,
    /// Override: discriminator learning rate.
    #[arg(long)]
    lr_d: Option<f64>,
    /// Override: pyramid scale count.
    #[arg(long)]
    levels: Option<usize>,
    /// Override: native scale index.
    #[arg(long)]
    native: Option<usize>,
    /// Override: multi-supervision weight.
    #[arg(long)]
    multi_supervision: Option<f64>,
    /// Override: output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override: comma-separated training dataset paths.
    #[arg(long)]
    data_train: Option<String>,
    /// Override: comma-separated test dataset paths.
    #[arg(long)]
    data_test: Option<String>,
    /// Override: evaluation worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.epochs {
            cfg.epochs = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.batch {
            cfg.batch = v;
        }
        if let Some(v) = self.lr_g {
            cfg.lr_g = v;
        }
        if let Some(v) = self.lr_d {
            cfg.lr_d = v;
        }
        if let Some(v) = self.levels {
            cfg.levels = v;
        }
        if let Some(v) = self.native {
            cfg.native = v;
        }
        if let Some(v) = self.multi_supervision {
            cfg.multi_supervision = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.display().to_string();
        }
        if let Some(v) = &self.data_train {
            cfg.set("data.train", v)?;
        }
        if let Some(v) = &self.data_test {
            cfg.set("data.test", v)?;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train a model; writes checkpoints and a loss log per epoch.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Resume from a checkpoint file.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a test set (best-of-K ADE/FDE).
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Checkpoint file to evaluate.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Samples per scene.
        #[arg(long)]
        k: Option<usize>,
        /// Sampling seed.
        #[arg(long)]
        samples_seed: Option<u64>,
        /// CSV output path (defaults to <out>/metrics.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Predict futures for the last complete observation window of a file.
    Predict {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Input observations in the dataset text format.
        #[arg(long)]
        input: PathBuf,
        /// Number of sampled futures per pedestrian.
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Output file for predicted rows (`frame ped x y sample`).
        #[arg(long, name = "out-file")]
        out_file: PathBuf,
    },
    /// Train and evaluate ablation variants under identical budgets.
    Ablate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated variants (single_scale, pyramid_no_ms, full).
        #[arg(long, default_value = "single_scale,pyramid_no_ms,full")]
        variants: String,
        /// Number of seeds (1..=N).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Synthetic scenario used when no dataset paths are configured.
        #[arg(long, default_value = "sinusoidal")]
        synthetic: String,
        /// Synthetic training scene count.
        #[arg(long, default_value_t = 200)]
        train_count: usize,
        /// Synthetic evaluation scene count.
        #[arg(long, default_value_t = 50)]
        eval_count: usize,
        /// CSV output path (defaults to <out>/ablation.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate synthetic scenes and write them in the dataset format.
    Synth {
        /// Scenario: constant_velocity, sinusoidal, parallel_pair,
        /// opposing_pair.
        scenario: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        t_obs: usize,
        #[arg(long, default_value_t = 12)]
        t_pred: usize,
        /// Output file.
        #[arg(long, name = "out-file")]
        out_file: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigError(_) | Error::InvalidK | Error::InvalidLength(_) => 2,
        Error::NumericError(_) => 3,
        Error::CheckpointError(_) => 4,
        Error::ParseError { .. }
        | Error::DuplicateObservation { .. }
        | Error::EmptyScene
        | Error::EmptySequence
        | Error::Io(_) => 5,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train { cfg, resume } => cmd_train(cfg, resume),
        Command::Eval {
            cfg,
            checkpoint,
            k,
            samples_seed,
            csv,
        } => cmd_eval(cfg, checkpoint, k, samples_seed, csv),
        Command::Predict {
            cfg,
            checkpoint,
            input,
            samples,
            out_file,
        } => cmd_predict(cfg, checkpoint, input, samples, out_file),
        Command::Ablate {
            cfg,
            variants,
            seeds,
            synthetic,
            train_count,
            eval_count,
            csv,
        } => cmd_ablate(cfg, variants, seeds, synthetic, train_count, eval_count, csv),
        Command::Synth {
            scenario,
            count,
            seed,
            t_obs,
            t_pred,
            out_file,
        } => cmd_synth(scenario, count, seed, t_obs, t_pred, out_file),
    }
}

/// Reads and window-extracts every dataset file in `paths`.
fn load_scenes(paths: &[String], t_obs: usize, t_pred: usize, stride: usize) -> Result<Vec<Scene>, Error> {
    if paths.is_empty() {
        return Err(Error::ConfigError("no dataset paths configured".into()));
    }
    let mut scenes = Vec::new();
    for p in paths {
        let text = std::fs::read_to_string(p)
            .map_err(|e| Error::ConfigError(format!("cannot read dataset {p}: {e}")))?;
        let obs = parse_dataset_file(&text)?;
        scenes.extend(extract_scenes(&obs, t_obs, t_pred, stride)?);
    }
    if scenes.is_empty() {
        return Err(Error::EmptyScene);
    }
    Ok(scenes)
}

fn ensure_out_dir(cfg: &RunConfig) -> Result<PathBuf, Error> {
    let dir = PathBuf::from(&cfg.out_dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_train(args: ConfigArgs, resume: Option<PathBuf>) -> Result<(), Error> {
    let cfg = args.resolve()?;
    println!("{}", cfg.header());
    let scenes = load_scenes(&cfg.data_train, cfg.t_obs, cfg.t_pred, cfg.stride_train)?;
    println!("loaded {} training scenes", scenes.len());
    let out_dir = ensure_out_dir(&cfg)?;

    let opts = cfg.train_options();
    let mut state = match resume {
        Some(path) => TrainerState::from_checkpoint(&checkpoint::load_from_path(&path)?)?,
        None => TrainerState::init(cfg.generator_config()?, &opts, cfg.seed),
    };

    let log_path = out_dir.join("loss_log.csv");
    let mut log = String::from(EpochRecord::csv_header());
    log.push('\n');
    std::fs::write(&log_path, &log)?;

    let latest = out_dir.join("checkpoint_latest.tpnc");
    let result = train(&mut state, &scenes, &opts, |st, rec| {
        log.push_str(&rec.to_csv_row());
        log.push('\n');
        std::fs::write(&log_path, &log)?;
        checkpoint::save_to_path(&latest, &st.to_checkpoint())?;
        println!("{}", rec.to_csv_row());
        Ok(())
    });

    match result {
        Ok(_) => {
            checkpoint::save_to_path(&out_dir.join("checkpoint_final.tpnc"), &state.to_checkpoint())?;
            println!("done: {} epochs, checkpoints in {}", state.epoch, out_dir.display());
            Ok(())
        }
        Err(e) => {
            // The last good checkpoint stays on disk.
            eprintln!("training aborted after epoch {}", state.epoch);
            Err(e)
        }
    }
}

fn load_generator(path: &Path) -> Result<TrainerState, Error> {
    TrainerState::from_checkpoint(&checkpoint::load_from_path(path)?)
}

fn cmd_eval(
    args: ConfigArgs,
    ck_path: PathBuf,
    k: Option<usize>,
    samples_seed: Option<u64>,
    csv: Option<PathBuf>,
) -> Result<(), Error> {
    let cfg = args.resolve()?;
    let k = k.unwrap_or(cfg.k);
    if k == 0 {
        return Err(Error::ConfigError("--k must be >= 1".into()));
    }
    let seed = samples_seed.unwrap_or(cfg.eval_seed);
    let state = load_generator(&ck_path)?;
    let pyramid = state.gen.cfg.pyramid;
    let scenes = load_scenes(&cfg.data_test, pyramid.t_obs, pyramid.t_pred, cfg.stride_eval)?;

    let predictor = GeneratorPredictor { params: &state.gen };
    let dataset = cfg
        .data_test
        .first()
        .map(|p| {
            Path::new(p)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.clone())
        })
        .unwrap_or_else(|| "test".into());
    let row = run_benchmark(&predictor, &scenes, k, seed, &dataset, cfg.workers)?;

    println!("{}", MetricsRow::csv_header());
    println!("{}", row.to_csv_row());

    let out_dir = ensure_out_dir(&cfg)?;
    let csv_path = csv.unwrap_or_else(|| out_dir.join("metrics.csv"));
    std::fs::write(&csv_path, format!("{}\n{}\n", MetricsRow::csv_header(), row.to_csv_row()))?;
    Ok(())
}

fn cmd_predict(
    args: ConfigArgs,
    ck_path: PathBuf,
    input: PathBuf,
    samples: usize,
    out_file: PathBuf,
) -> Result<(), Error> {
    let cfg = args.resolve()?;
    if samples == 0 {
        return Err(Error::ConfigError("--samples must be >= 1".into()));
    }
    let state = load_generator(&ck_path)?;
    let pyr = state.gen.cfg.pyramid;

    let text = std::fs::read_to_string(&input)
        .map_err(|e| Error::ConfigError(format!("cannot read input {}: {e}", input.display())))?;
    let obs = parse_dataset_file(&text)?;
    let window = latest_observation_window(&obs, pyr.t_obs).ok_or(Error::EmptyScene)?;

    // Wrap the window as a scene; the generator only reads the observed
    // part, so the future placeholder is never consulted.
    let scene = Scene {
        start_frame: window.start_frame,
        frame_step: window.frame_step,
        t_obs: pyr.t_obs,
        t_pred: pyr.t_pred,
        ped_ids: window.ped_ids.clone(),
        trajectories: window
            .observed
            .iter()
            .map(|o| {
                let mut t = o.clone();
                t.extend(std::iter::repeat_n(*o.last().unwrap(), pyr.t_pred));
                t
            })
            .collect(),
    };

    let mut out = String::new();
    let last_frame = window.start_frame + (pyr.t_obs as i64 - 1) * window.frame_step;
    for s in 0..samples {
        let mut rng = stream_rng(cfg.eval_seed, 0, s as u64);
        let count = if state.gen.cfg.noise_per_ped {
            scene.num_peds()
        } else {
            1
        };
        let noise: Vec<_> = (0..count)
            .map(|_| sample_noise(state.gen.cfg.dims.noise, &mut rng))
            .collect();
        let mut tape = Tape::new();
        let vars = state.gen.bind(&mut tape)?;
        let pred = vars.generate(&mut tape, &scene, &noise)?.y_hat_points(&tape);
        for (ped, traj) in scene.ped_ids.iter().zip(&pred) {
            for (j, p) in traj.iter().enumerate() {
                let frame = last_frame + (j as i64 + 1) * window.frame_step;
                out.push_str(&format!("{} {} {} {} {}\n", frame, ped, p.x, p.y, s));
            }
        }
    }
    std::fs::write(&out_file, out)?;
    println!(
        "wrote {} samples x {} pedestrians x {} steps to {}",
        samples,
        scene.num_peds(),
        pyr.t_pred,
        out_file.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_ablate(
    args: ConfigArgs,
    variants: String,
    seeds: u64,
    synthetic: String,
    train_count: usize,
    eval_count: usize,
    csv: Option<PathBuf>,
) -> Result<(), Error> {
    let cfg = args.resolve()?;
    if seeds == 0 {
        return Err(Error::ConfigError("--seeds must be >= 1".into()));
    }
    let variants: Vec<Variant> = variants
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Variant::parse)
        .collect::<Result<_, _>>()?;
    if variants.is_empty() {
        return Err(Error::ConfigError("no variants selected".into()));
    }

    let (train_scenes, eval_scenes) = if cfg.data_train.is_empty() {
        let scenario = Scenario::parse(&synthetic)?;
        (
            gen_synthetic(scenario, train_count, cfg.seed, cfg.t_obs, cfg.t_pred),
            gen_synthetic(scenario, eval_count, cfg.seed ^ 0x5EED, cfg.t_obs, cfg.t_pred),
        )
    } else {
        let train = load_scenes(&cfg.data_train, cfg.t_obs, cfg.t_pred, cfg.stride_train)?;
        let eval = if cfg.data_test.is_empty() {
            train.clone()
        } else {
            load_scenes(&cfg.data_test, cfg.t_obs, cfg.t_pred, cfg.stride_eval)?
        };
        (train, eval)
    };

    let seed_list: Vec<u64> = (1..=seeds).collect();
    let rows = run_ablation(
        &variants,
        &train_scenes,
        &eval_scenes,
        &seed_list,
        &cfg.generator_config()?,
        &cfg.train_options(),
        cfg.k,
        cfg.workers,
    )?;

    println!("{}", tpnet::eval::AblationRow::csv_header());
    let mut csv_text = String::from(tpnet::eval::AblationRow::csv_header());
    csv_text.push('\n');
    for r in &rows {
        println!("{}", r.to_csv_row());
        csv_text.push_str(&r.to_csv_row());
        csv_text.push('\n');
    }
    for s in summarize_ablation(&rows) {
        println!(
            "# {}: ade {:.4} +/- {:.4}, fde {:.4} +/- {:.4} ({} runs)",
            s.variant, s.ade_mean, s.ade_spread, s.fde_mean, s.fde_spread, s.runs
        );
    }
    let out_dir = ensure_out_dir(&cfg)?;
    let csv_path = csv.unwrap_or_else(|| out_dir.join("ablation.csv"));
    std::fs::write(&csv_path, csv_text)?;
    Ok(())
}

fn cmd_synth(
    scenario: String,
    count: usize,
    seed: u64,
    t_obs: usize,
    t_pred: usize,
    out_file: PathBuf,
) -> Result<(), Error> {
    if count == 0 {
        return Err(Error::ConfigError("--count must be >= 1".into()));
    }
    let scenario = Scenario::parse(&scenario)?;
    let scenes = gen_synthetic(scenario, count, seed, t_obs, t_pred);
    let text = serialize_observations(&scenes_to_observations(&scenes));
    std::fs::write(&out_file, text)?;
    println!(
        "wrote {} {} scenes to {}",
        count,
        scenario.name(),
        out_file.display()
    );
    Ok(())
}
