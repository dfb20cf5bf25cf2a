use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hcec::harness::{
    emit_plots, parse_schemes, run_check, run_sweep, run_transition_demo, ExperimentConfig,
    TransitionDemo, CALIBRATION_DIMS, FUNCTIONAL_DIMS,
};
use hcec::verify::measure_rate;
use hcec::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_UNRECOVERABLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hcec", version, about = "Coded elastic computing experiments")]
struct Cli {
    /// Flat `key = value` config file; flags below override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed for profiles and trials.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// cec, mlcec, bicec, a comma list of these, or all.
    #[arg(long, global = true, value_name = "SCHEME")]
    scheme: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the seeded trials over the N sweep and write CSVs and SVG plots.
    Sweep,
    /// Rebuild A*B from simulated completions and compare with the direct product.
    Verify,
    /// Show transition waste over the 8 -> 6 -> 4 preemption timeline.
    TransitionDemo,
    /// Measure this host's multiply-add throughput.
    Calibrate,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
                Error::Unrecoverable { .. } => EXIT_UNRECOVERABLE,
                _ => EXIT_FAILURE,
            })
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(s) = &cli.scheme {
        cfg.schemes = parse_schemes(s)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn run(cli: &Cli) -> Result<u8, Error> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::Sweep => {
            let result = run_sweep(&cfg)?;
            let mut written = result.write_csv(&cfg.output_dir)?;
            written.extend(emit_plots(&result, &cfg.output_dir)?);
            written.push(write(&cfg.output_dir, "config.txt", &cfg.to_text())?);
            for row in &result.rows {
                println!(
                    "{:<6} N={:<3} computation={:.6} decoding={:.6} finishing={:.6} trials={}",
                    row.scheme.as_str(),
                    row.n,
                    row.computation.mean,
                    row.decoding.mean,
                    row.finishing.mean,
                    row.trials
                );
            }
            for path in &written {
                log::info!("wrote {}", path.display());
            }
            let failures = result.failures();
            if failures > 0 {
                eprintln!(
                    "{failures} trial(s) were unrecoverable; see {}",
                    cfg.output_dir.join("trials.csv").display()
                );
                return Ok(EXIT_UNRECOVERABLE);
            }
            println!("results in {}", cfg.output_dir.display());
            Ok(0)
        }
        Command::Verify => {
            let report = run_check(&cfg, FUNCTIONAL_DIMS)?;
            print!("{report}");
            Ok(if report.passed() { 0 } else { EXIT_FAILURE })
        }
        Command::TransitionDemo => {
            let demo = TransitionDemo::from_experiment(&cfg)?;
            let report = run_transition_demo(&demo)?;
            print!("{report}");
            if cli.out.is_some() {
                write(&cfg.output_dir, "transitions.csv", &report.to_csv())?;
            }
            Ok(0)
        }
        Command::Calibrate => {
            let rate = measure_rate(&CALIBRATION_DIMS, 5)?;
            let line = format!("base_rate = {rate:.6e}\n");
            print!("{line}");
            if cli.out.is_some() {
                write(&cfg.output_dir, "calibration.txt", &line)?;
            }
            Ok(0)
        }
    }
}
