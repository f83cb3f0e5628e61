use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use serde::Serialize;
use teegrade::data::{split_by_participant, Dataset, DEFAULT_TRAIN_FRACTION};
use teegrade::model::{build_model, Arch, Checkpoint, Dtype, ModelSpec, TrainingMeta};
use teegrade::nn::{train, AdamConfig, Target, TrainConfig};
use teegrade::seed::derive_seed;

use crate::run::{write_file, RunManifest, Timer, RUN_MANIFEST};

pub const CHECKPOINT_FILE: &str = "model.teeg";
pub const HISTORY_FILE: &str = "history.csv";

#[derive(clap::Args)]
pub struct Args {
    /// Dataset directory written by `gen`.
    #[arg(long)]
    data: PathBuf,
    /// Output directory for the checkpoint and history.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "alexnet-mini")]
    arch: Arch,
    /// Score to regress: cp or gi.
    #[arg(long, default_value = "cp")]
    target: Target,
    #[arg(long, default_value_t = 10)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch: usize,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    /// Weight of the view-classification loss.
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of participants used for training.
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRACTION)]
    train_fraction: f64,
    /// Checkpoint storage precision: f64 or f32.
    #[arg(long, default_value = "f64")]
    dtype: Dtype,
}

#[derive(Serialize)]
struct Resolved<'a> {
    data: &'a PathBuf,
    arch: Arch,
    input: usize,
    train_fraction: f64,
    dtype: Dtype,
    train: &'a TrainConfig,
    train_participants: &'a [u32],
    test_participants: &'a [u32],
}

pub fn run(args: Args) -> Result<ExitCode> {
    let timer = Timer::start();
    let threads = super::threads()?;
    let data = Dataset::load(&args.data)?;
    let split = split_by_participant(&data.participants(), args.train_fraction, args.seed)?;
    let (train_part, test_part) = data.split(&split);

    let spec = if args.arch.is_full() {
        ModelSpec::default_for(args.arch)?
    } else {
        anyhow::ensure!(data.height == data.width, "mini architectures need square images");
        ModelSpec::new(args.arch, data.height, 1)?
    };
    let (h, w) = (spec.input_height, spec.input_width);
    let train_set = train_part.image_set(args.target).resized(h, w)?;
    let val_set = test_part.image_set(args.target).resized(h, w)?;

    let config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch,
        adam: AdamConfig {
            lr: args.lr,
            ..AdamConfig::default()
        },
        seed: args.seed,
        target: args.target,
        lambda: args.lambda,
        shuffle: true,
        threads,
    };
    config.validate()?;
    let mut model = build_model(spec, derive_seed(args.seed, "init"))?;
    let outcome = train(&mut model, &train_set, &config, Some(&val_set))?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let checkpoint_path = args.out.join(CHECKPOINT_FILE);
    let history_path = args.out.join(HISTORY_FILE);
    let meta = TrainingMeta {
        target: args.target,
        seed: args.seed,
        epochs: args.epochs,
        batch_size: args.batch,
        lr: args.lr,
        lambda: args.lambda,
        train_fraction: args.train_fraction,
    };
    Checkpoint::new(model, meta, args.dtype).save(&checkpoint_path)?;
    write_file(&history_path, outcome.history_csv())?;

    let resolved = Resolved {
        data: &args.data,
        arch: args.arch,
        input: h,
        train_fraction: args.train_fraction,
        dtype: args.dtype,
        train: &config,
        train_participants: &split.train,
        test_participants: &split.test,
    };
    let mut manifest = RunManifest::new("train", &resolved, &timer)?;
    manifest.seed = Some(args.seed);
    manifest.seed_streams = vec!["split".into(), "init".into(), "shuffle".into()];
    manifest.threads = threads;
    manifest.outputs = vec![checkpoint_path.clone(), history_path];
    manifest.write(&args.out.join(RUN_MANIFEST))?;

    if let Some(last) = outcome.history.last() {
        println!(
            "{} on {}: {} epochs, final loss {:.5}, held-out RMSE {:.3}",
            args.arch,
            args.target,
            last.epoch,
            last.train_loss,
            last.val_rmse.unwrap_or(f64::NAN)
        );
    }
    println!("wrote {}", checkpoint_path.display());
    Ok(ExitCode::SUCCESS)
}
