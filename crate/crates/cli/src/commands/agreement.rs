use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use teegrade::data::{parse_jsonl, MANIFEST_FILE};
use teegrade::metrics::agreement;

use crate::run::write_file;

#[derive(clap::Args)]
pub struct Args {
    /// Dataset directory written by `gen`.
    #[arg(long)]
    data: PathBuf,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let path = args.data.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let records = parse_jsonl(&text)?;
    let report = agreement(&records)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match args.out {
        Some(out) => {
            write_file(&out, &json)?;
            let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.3}"));
            println!(
                "{} videos: mean ICC(2,k) {}, mean alpha {}, Pearson(CP, GI) {}",
                report.videos,
                fmt(report.mean_over_views(|v| v.icc_average)),
                fmt(report.mean_over_views(|v| v.alpha)),
                fmt(report.pearson_cp_gi)
            );
        }
        None => print!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}
