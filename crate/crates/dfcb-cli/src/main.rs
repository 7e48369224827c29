use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dfcb_cli::{
    cmd_compare_explicit, cmd_sample, cmd_sweep, cmd_verify, CorruptTarget, RunConfig,
};

#[derive(Parser)]
#[command(name = "dfcb", about = "Darboux-transformed solutions of the damping-forcing coupled Burgers system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (must exist)
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Override the primary tolerance of the command (PDE residual for
    /// verify, comparison tolerance for compare-explicit)
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample (u, v) over the grid into sample.csv
    Sample(Common),
    /// Run the residual suite; exit 0 iff every criterion line passes
    Verify {
        #[command(flatten)]
        common: Common,
        /// Add delta·sin(x) to one component (`u` or `v`) before verifying
        #[arg(long, num_args = 2, value_names = ["FIELD", "DELTA"])]
        corrupt: Option<Vec<String>>,
    },
    /// Sweep the damping/forcing parameter listed in the config
    Sweep(Common),
    /// Compare the printed closed-form displays against the pipeline
    CompareExplicit(Common),
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sample(c) => {
            let config = RunConfig::load(&c.config)?;
            let summary = cmd_sample(&config, &c.out)?;
            println!(
                "wrote {} rows ({} masked) to {}",
                summary.rows,
                summary.mask_count,
                c.out.join("sample.csv").display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common: c, corrupt } => {
            let config = RunConfig::load(&c.config)?;
            let corrupt = match corrupt {
                Some(args) => Some((args[0].parse::<CorruptTarget>()?, args[1].parse::<f64>()?)),
                None => None,
            };
            let report = cmd_verify(&config, &c.out, c.tolerance, corrupt)?;
            for line in &report.lines {
                println!(
                    "{}: {:.6e} (tolerance {:.1e}) {}",
                    line.name,
                    line.value,
                    line.tolerance,
                    if line.pass { "pass" } else { "FAIL" }
                );
            }
            match &report.first_violation {
                None => Ok(ExitCode::SUCCESS),
                Some(name) => {
                    eprintln!("verification failed: {name} out of tolerance");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::Sweep(c) => {
            let config = RunConfig::load(&c.config)?;
            let summary = cmd_sweep(&config, &c.out)?;
            println!(
                "wrote {} per-value files and sweep_summary.csv to {}",
                summary.files.len(),
                c.out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CompareExplicit(c) => {
            let config = RunConfig::load(&c.config)?;
            let report = cmd_compare_explicit(&config, &c.out, c.tolerance)?;
            println!(
                "classification: {:?}; max_rel_u {:.3e}, max_rel_v {:.3e}",
                report.classification, report.max_rel_u, report.max_rel_v
            );
            let pipeline_ok = report
                .darboux_residual
                .max_res_u
                .max(report.darboux_residual.max_res_v)
                <= config.tolerances.pde;
            if pipeline_ok {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("pipeline-side residual out of tolerance");
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
