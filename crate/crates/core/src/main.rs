use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fracture_core::pipeline::{cmd_compare, cmd_ingest, cmd_report, cmd_run, load_record, PipelineConfig, PipelineError};
use fracture_core::synth::{write_series_fixture, SeriesFixture};

#[derive(Parser)]
#[command(name = "fracture", version, about = "Skull-fracture CT classification pipeline")]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Config file (`section.key = value` lines).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides as `--section.key value` or `--section.key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "OVERRIDES")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Scan DICOM files, preprocess labeled slices into the tensor cache and write the manifest.
    Ingest(ConfigArgs),
    /// Ingest, split, balance, extract features, train and evaluate.
    Run(ConfigArgs),
    /// Metric-by-model grid over run records evaluated on the same test set.
    Compare {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Also write the grid as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the report stored in a run record.
    Report {
        record: PathBuf,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Write a synthetic DICOM series with a labels file.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 24)]
        patients: usize,
        #[arg(long, default_value_t = 6)]
        min_slices: usize,
        #[arg(long, default_value_t = 10)]
        max_slices: usize,
        #[arg(long, default_value_t = 96)]
        side: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn load_config(args: &ConfigArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    cfg.apply_overrides(&args.overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(args) => {
            let cfg = load_config(&args)?;
            let s = cmd_ingest(&cfg)?;
            println!(
                "{} slices ({} preprocessed, {} cached); {} skipped, {} unlabeled, {} other thickness",
                s.slices,
                s.processed,
                s.cached,
                s.skipped.len(),
                s.unlabeled,
                s.filtered_out
            );
            for (path, reason) in &s.skipped {
                println!("skipped {}: {reason}", path.display());
            }
            println!("manifest: {}", s.manifest.display());
        }
        Command::Run(args) => {
            let cfg = load_config(&args)?;
            let record = cmd_run(&cfg)?;
            print!("{}", fracture_core::metrics::render_report(&record.report));
            if let Some(path) = record.artifacts.get("run_record") {
                println!("\nrun record: {path}");
            }
        }
        Command::Compare { records, json } => {
            let grid = cmd_compare(&records)?;
            print!("{}", grid.render());
            if let Some(path) = json {
                write_json(&path, &grid)?;
            }
        }
        Command::Report { record, json } => {
            if json {
                let r = load_record(&record)?;
                println!("{}", serde_json::to_string_pretty(&r.report)?);
            } else {
                print!("{}", cmd_report(&record)?);
            }
        }
        Command::Synth { out, patients, min_slices, max_slices, side, seed } => {
            anyhow::ensure!(min_slices <= max_slices, "--min-slices exceeds --max-slices");
            let spec = SeriesFixture { patients, slices_per_patient: (min_slices, max_slices), side, seed, ..Default::default() };
            let summary = write_series_fixture(&out, &spec).with_context(|| format!("writing {}", out.display()))?;
            println!("{} files, labels at {}", summary.files.len(), summary.labels_csv.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<PipelineError>().map_or(4, PipelineError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
