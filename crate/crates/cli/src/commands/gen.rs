use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use teegrade::data::{generate_dataset, GenConfig, MANIFEST_FILE};

use crate::run::{fresh_dir, RunManifest, Timer, RUN_MANIFEST};

#[derive(clap::Args)]
pub struct Args {
    /// Output directory (created; must be empty if it exists).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 38)]
    participants: usize,
    /// Frames per video.
    #[arg(long, default_value_t = 8)]
    frames: usize,
    /// Image side length in pixels.
    #[arg(long, default_value_t = 64)]
    size: usize,
    /// Probability that a rater flips any one checklist criterion.
    #[arg(long, default_value_t = 0.07)]
    flip_noise: f64,
    /// Standard deviation of rater GI noise.
    #[arg(long, default_value_t = 0.35)]
    gi_noise: f64,
    /// Probability that a video is missing from the study.
    #[arg(long, default_value_t = 0.0)]
    missing_prob: f64,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let timer = Timer::start();
    let config = GenConfig {
        participants: args.participants,
        frames: args.frames,
        image_size: args.size,
        flip_noise: args.flip_noise,
        gi_noise: args.gi_noise,
        missing_prob: args.missing_prob,
        seed: args.seed,
    };
    config.validate()?;
    let threads = super::threads()?;
    let data = generate_dataset(&config, threads)?;
    fresh_dir(&args.out)?;
    data.write(&args.out)?;

    let mut manifest = RunManifest::new("gen", &config, &timer)?;
    manifest.seed = Some(args.seed);
    manifest.seed_streams = vec![
        "participant/{p}/view/{v}".into(),
        "participant/{p}/view/{v}/raters".into(),
        "participant/{p}/view/{v}/frame/{f}".into(),
    ];
    manifest.threads = threads;
    manifest.outputs = vec![args.out.join(MANIFEST_FILE), args.out.clone()];
    manifest.write(&args.out.join(RUN_MANIFEST))?;
    println!(
        "wrote {} videos, {} frames to {}",
        data.videos.len(),
        data.frame_count(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
