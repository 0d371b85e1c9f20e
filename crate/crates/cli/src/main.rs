use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use despeckle_cli::bench::format_psnr;
use despeckle_cli::{
    cmd_add_noise, cmd_denoise, cmd_evaluate, load_run_config, run_benchmark, BenchmarkPlan,
    CliError, CliResult, Entry,
};

#[derive(Parser)]
#[command(
    name = "despeckle",
    version,
    about = "Telegraph-diffusion speckle removal"
)]
struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply an image by gamma speckle with mean 1 and variance 1/looks.
    AddNoise {
        input: PathBuf,
        output: PathBuf,
        #[arg(short = 'L', long)]
        looks: u32,
        #[arg(short, long, default_value_t = 0)]
        seed: u64,
    },
    /// Restore an image as described by a run configuration.
    Denoise {
        /// Flat key = value configuration file.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(short, long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(short, long)]
        model: Option<String>,
        /// Extra configuration entries, `key=value`; override the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Print `psnr,mssim,si` of a restored image against a reference.
    Evaluate {
        restored: PathBuf,
        reference: PathBuf,
    },
    /// Run a benchmark plan and write the comparison table.
    Benchmark {
        plan: PathBuf,
        /// Overrides the plan's `output`.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Overrides the plan's `images`.
        #[arg(long)]
        images: Option<PathBuf>,
        /// Record wall-clock seconds (makes the table non-reproducible).
        #[arg(long)]
        timing: bool,
    },
}

fn cli_entry(key: &str, value: &str) -> Entry {
    Entry::new(key, value, "command line", Path::new("."))
}

/// Returns the exit status of a command that ran to completion.
fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::AddNoise {
            input,
            output,
            looks,
            seed,
        } => {
            let si = cmd_add_noise(&input, &output, looks, seed)?;
            println!("si = {si:.6}");
        }
        Command::Denoise {
            config,
            input,
            output,
            reference,
            report,
            model,
            set,
        } => {
            let mut overrides = Vec::new();
            for kv in &set {
                let (k, v) = kv.split_once('=').ok_or_else(|| {
                    CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'"))
                })?;
                overrides.push(cli_entry(k, v));
            }
            let paths = [
                ("input", input),
                ("output", output),
                ("reference", reference),
                ("report", report),
            ];
            for (key, path) in paths {
                if let Some(p) = path {
                    overrides.push(cli_entry(key, &p.to_string_lossy()));
                }
            }
            if let Some(m) = model {
                overrides.push(cli_entry("model", &m));
            }
            let cfg = load_run_config(config.as_deref(), &overrides)?;
            let summary = cmd_denoise(&cfg)?;
            print!("{}", summary.text);
        }
        Command::Evaluate {
            restored,
            reference,
        } => {
            println!("{}", cmd_evaluate(&restored, &reference)?.csv_row());
        }
        Command::Benchmark {
            plan,
            output,
            images,
            timing,
        } => {
            let mut plan = BenchmarkPlan::load(&plan)?;
            if let Some(o) = output {
                plan.output = o;
            }
            if images.is_some() {
                plan.images = images;
            }
            plan.timing |= timing;
            let rows = run_benchmark(&plan)?;
            for r in &rows {
                let psnr = r.psnr.map(format_psnr).unwrap_or_else(|| "-".into());
                log::info!(
                    "{} L={} {}: psnr {psnr} [{}]",
                    r.image,
                    r.look,
                    r.model,
                    r.status
                );
            }
            println!("{}", plan.output.display());
            let failed: Vec<_> = rows.iter().filter(|r| !r.is_ok()).collect();
            if !failed.is_empty() {
                eprintln!(
                    "{} of {} runs failed; see the status column",
                    failed.len(),
                    rows.len()
                );
                let diverged = failed.iter().all(|r| r.status.starts_with("diverged"));
                let code = if diverged {
                    CliError::EXIT_DIVERGENCE
                } else {
                    CliError::EXIT_IO
                };
                return Ok(code as u8);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                CliError::EXIT_USAGE
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
