//! Scenario runner: quantum game configs in, reproduction reports out.

mod config;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use config::{Analysis, CliError, OutputFormat, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "qgt",
    version,
    about = "Run quantum game scenarios and parameter sweeps from TOML configs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the scenario config (TOML).
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the grid resolution (applied to every parameter axis).
    #[arg(long)]
    grid: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Epsilon threshold for equilibrium certification.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write a JSON report.
    Run(CommonArgs),
    /// Sweep the config's single swept parameter and write a table.
    Sweep(CommonArgs),
}

fn load_config(args: &CommonArgs) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(n) = args.grid {
        cfg.grid = Some(vec![n]);
    }
    if let Some(path) = &args.out {
        cfg.output = Some(path.clone());
    }
    if let Some(fmt) = &args.format {
        cfg.format = Some(match fmt.as_str() {
            "csv" => OutputFormat::Csv,
            _ => OutputFormat::Json,
        });
    }
    if let Some(tol) = args.tolerance {
        cfg.tolerance = Some(tol);
    }
    Ok(cfg)
}

fn emit(cfg: &ScenarioConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if x.fract() != 0.0 || x.abs() >= 1e15 => format!("{:.*e}", 11, x),
            Some(x) => format!("{x}"),
            None => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn execute(command: &Command) -> Result<(), CliError> {
    let started = Instant::now();
    match command {
        Command::Run(args) => {
            let cfg = load_config(args)?;
            if cfg.format == Some(OutputFormat::Csv) && cfg.analysis != Analysis::Sweep {
                return Err(CliError::Config(
                    "csv format is only available for sweeps".into(),
                ));
            }
            if cfg.analysis == Analysis::Sweep {
                return write_sweep(&cfg, started);
            }
            let results = runner::run_analysis(&cfg)?;
            let report = runner::report_document(&cfg, results, started);
            emit(&cfg, &serde_json::to_string_pretty(&report).unwrap())
        }
        Command::Sweep(args) => {
            let cfg = load_config(args)?;
            write_sweep(&cfg, started)
        }
    }
}

fn write_sweep(cfg: &ScenarioConfig, started: Instant) -> Result<(), CliError> {
    let (columns, rows) = runner::run_sweep(cfg)?;
    match cfg.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let results = serde_json::json!({
                "columns": columns,
                "rows": rows,
            });
            let report = runner::report_document(cfg, results, started);
            emit(cfg, &serde_json::to_string_pretty(&report).unwrap())
        }
        OutputFormat::Csv => {
            let mut text = columns.join(",");
            text.push('\n');
            for row in &rows {
                let cells: Vec<String> = row.iter().map(csv_cell).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            emit(cfg, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
