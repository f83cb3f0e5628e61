use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use serde::Serialize;
use teegrade::data::{split_by_participant, Dataset};
use teegrade::metrics::{evaluate, predictions_csv};
use teegrade::model::Checkpoint;

use crate::run::{write_file, RunManifest, Timer, RUN_MANIFEST};
use crate::svg;

pub const METRICS_FILE: &str = "metrics.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const SCATTER_FILE: &str = "scatter.svg";

#[derive(Clone, Copy, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Test,
    Train,
    All,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Participants to evaluate, using the split recorded in the checkpoint.
    #[arg(long, value_enum, default_value_t = Part::Test)]
    split: Part,
    /// Also draw per-video predictions against truth as SVG.
    #[arg(long)]
    svg: bool,
}

#[derive(Serialize)]
struct Resolved<'a> {
    data: &'a PathBuf,
    checkpoint: &'a PathBuf,
    split: Part,
    participants: Vec<u32>,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let timer = Timer::start();
    let threads = super::threads()?;
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    let data = Dataset::load(&args.data)?;
    let meta = &checkpoint.meta;
    let split = split_by_participant(&data.participants(), meta.train_fraction, meta.seed)?;
    let part = match args.split {
        Part::Test => data.subset(&split.test),
        Part::Train => data.subset(&split.train),
        Part::All => data,
    };
    let report = evaluate(&checkpoint.model, &part, meta.target, threads)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let metrics_path = args.out.join(METRICS_FILE);
    let predictions_path = args.out.join(PREDICTIONS_FILE);
    write_file(&metrics_path, report.to_json())?;
    write_file(&predictions_path, predictions_csv(&report.per_video))?;
    let mut outputs = vec![metrics_path, predictions_path];
    if args.svg {
        let title = format!(
            "{} {}: RMSE {:.2} (σ={:.2})",
            checkpoint.model.spec.arch, meta.target, report.grouped_rmse, report.mean_sigma
        );
        let path = args.out.join(SCATTER_FILE);
        write_file(&path, svg::scatter(&report.per_video, meta.target.scale(), &title))?;
        outputs.push(path);
    }

    let resolved = Resolved {
        data: &args.data,
        checkpoint: &args.checkpoint,
        split: args.split,
        participants: part.participants(),
    };
    let mut manifest = RunManifest::new("eval", &resolved, &timer)?;
    manifest.seed = Some(meta.seed);
    manifest.seed_streams = vec!["split".into()];
    manifest.threads = threads;
    manifest.outputs = outputs;
    manifest.write(&args.out.join(RUN_MANIFEST))?;

    println!(
        "{} frames / {} videos: RMSE {:.3}, grouped RMSE {:.3} (mean σ {:.3}), view accuracy {:.3}",
        report.frames, report.videos, report.overall_rmse, report.grouped_rmse, report.mean_sigma, report.view_accuracy
    );
    Ok(ExitCode::SUCCESS)
}
