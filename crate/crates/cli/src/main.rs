use std::path::PathBuf;
use std::process::ExitCode;

use alpha_patch_cli::{analyze_dir, load_config, run_config, sweep, CliError, EXIT_BLOWUP, EXIT_OK, EXIT_USAGE};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "alpha-patch", version, about = "Contour-dynamics runs for alpha-patches")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one config and write its output directory.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run one config per value of a single key, in parallel.
    Sweep {
        config: PathBuf,
        /// Key path such as `alpha`, `control.t_end` or `patch[0].shape.radius`.
        #[arg(long)]
        param: String,
        /// Comma-separated TOML literals.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        /// Parent directory for the entries; defaults to the config's `output_dir`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Calibrate the a-priori bound and write plot tables for finished runs.
    Analyze {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match cli.command {
        Command::Run { config, output } => {
            let mut cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => return fail(e.into()),
            };
            if let Some(out) = output {
                cfg.output_dir = out;
            }
            match run_config(&cfg) {
                Ok(outcome) => {
                    let v = &outcome.verdict;
                    println!("{:?} at t = {} ({})", v.reason, v.t_final, v.detail);
                    ExitCode::from(if v.reason.is_blowup() { EXIT_BLOWUP } else { EXIT_OK })
                }
                Err(e) => fail(e),
            }
        }
        Command::Sweep { config, param, values, output } => {
            let mut cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(e) => return fail(e.into()),
            };
            if let Some(out) = output {
                cfg.output_dir = out;
            }
            match sweep(&cfg, &param, &values) {
                Ok(report) => {
                    for line in &report.lines {
                        println!("{line}");
                    }
                    if report.failed > 0 {
                        eprintln!("error: {} of {} entries failed", report.failed, values.len());
                        ExitCode::from(EXIT_USAGE)
                    } else if report.blowups > 0 {
                        ExitCode::from(EXIT_BLOWUP)
                    } else {
                        ExitCode::from(EXIT_OK)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Analyze { dirs } => {
            let mut ok = 0;
            for dir in &dirs {
                match analyze_dir(dir) {
                    Ok(lines) => {
                        ok += 1;
                        for line in lines {
                            println!("{}: {line}", dir.display());
                        }
                    }
                    Err(e) => eprintln!("error: {e}"),
                }
            }
            ExitCode::from(if ok > 0 { EXIT_OK } else { EXIT_USAGE })
        }
    }
}
