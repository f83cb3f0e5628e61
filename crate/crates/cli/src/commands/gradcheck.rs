use std::process::ExitCode;

use anyhow::{anyhow, Result};
use teegrade::gradcheck::{GradCheck, Kernel, TOLERANCE};

#[derive(clap::Args)]
pub struct Args {
    /// Random cases per kernel.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deliberately perturb one kernel's analytic gradient.
    #[arg(long, hide = true)]
    corrupt: Option<String>,
}

pub fn run(args: Args) -> Result<ExitCode> {
    let corrupt = args
        .corrupt
        .map(|name| Kernel::from_name(&name).ok_or_else(|| anyhow!("unknown kernel {name:?}")))
        .transpose()?;
    let check = GradCheck {
        trials: args.trials,
        seed: args.seed,
        tolerance: TOLERANCE,
        corrupt,
    };
    let reports = check.run_all()?;
    println!("{:<16} {:>6} {:>14}  result", "kernel", "trials", "max rel err");
    for r in &reports {
        println!(
            "{:<16} {:>6} {:>14.3e}  {}",
            r.kernel.name(),
            r.trials,
            r.max_rel_error,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        println!("all {} kernels pass at {TOLERANCE:e}", reports.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failed} of {} kernels fail", reports.len());
        Ok(ExitCode::FAILURE)
    }
}
