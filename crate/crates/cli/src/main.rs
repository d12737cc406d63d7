use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use egt_cli::commands::{self, FieldFormat, FieldRequest, ReportFormat};
use egt_cli::server::{serve, AppState};
use egt_core::report::GeneratorKind;

#[derive(Parser)]
#[command(name = "egt", version, about = "Spoken directives for blocks-world plans")]
struct Cli {
    /// Coefficient file for the cost model.
    #[arg(long, global = true, env = "EGT_COEFFS")]
    coeffs: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Narrate every step of a plan.
    Generate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[arg(long, default_value = "egt")]
        generator: GeneratorKind,
    },
    /// Sample a predicate field over the table.
    FieldViz {
        #[arg(long)]
        scene: PathBuf,
        /// e.g. in_front, on_top, at_corner
        #[arg(long)]
        relation: Option<String>,
        /// `table`, a block id or a group id such as `stack:a+b`
        #[arg(long)]
        ground: Option<String>,
        #[arg(long, default_value_t = 40)]
        resolution: usize,
        /// Figure-centre heights; one layer each. Defaults to the natural
        /// height for the relation.
        #[arg(long, value_delimiter = ',')]
        heights: Vec<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: FieldFormat,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Print the scene's blocks and groups instead.
        #[arg(long)]
        list: bool,
    },
    /// Fit cost coefficients to the response times in session logs.
    FitCost {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Per-depth summary of session logs, raw and normalized.
    AnalyzeLog {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Welch's t-test. Each sample is a comma-separated list or a log file.
    Ttest { a: String, b: String },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory for session files.
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
}

fn write_out(output: Option<&PathBuf>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(bytes)?),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = commands::load_config(cli.coeffs.as_deref())?;
    match cli.command {
        Command::Generate { scene, plan, format, generator } => {
            let (out, report) =
                commands::generate(&commands::read_scene(&scene)?, &commands::read_plan(&plan)?, &cfg, generator, format);
            print!("{out}");
            if report.has_errors() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::FieldViz { scene, relation, ground, resolution, heights, format, output, list } => {
            let scene = commands::read_scene(&scene)?;
            if list {
                print!("{}", commands::list_entities(&scene));
                return Ok(ExitCode::SUCCESS);
            }
            let req = FieldRequest {
                relation: relation.as_deref().context("--relation is required")?,
                ground: ground.as_deref().context("--ground is required")?,
                resolution,
                heights,
                format,
            };
            write_out(output.as_ref(), &commands::field_viz(&scene, &req, &cfg)?)?;
        }
        Command::FitCost { logs, output } => {
            let (table, note) = commands::fit_cost(&commands::read_logs(&logs)?)?;
            eprintln!("{note}");
            write_out(output.as_ref(), (table.to_json() + "\n").as_bytes())?;
        }
        Command::AnalyzeLog { logs, json } => {
            print!("{}", commands::analyze_log(&commands::read_logs(&logs)?, json)?);
        }
        Command::Ttest { a, b } => {
            print!("{}", commands::ttest(&commands::read_sample(&a)?, &commands::read_sample(&b)?)?);
        }
        Command::Serve { port, log_dir } => {
            if let Some(d) = &log_dir {
                std::fs::create_dir_all(d)?;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(serve(AppState::new(cfg, log_dir), port))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
