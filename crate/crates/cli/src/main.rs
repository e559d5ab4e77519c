use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pairdesign::config::{parse_config, ConfigError, RunConfig};
use pairdesign::document::DesignDocument;
use pairdesign::pipeline::{list_examples, run_construct, run_evaluate, run_reproduce, summary, PipelineError};

#[derive(Parser)]
#[command(
    name = "pairdesign",
    version,
    about = "Efficient paired-comparison designs for factorial two-color experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a design for the configured slide budget.
    Construct(RunArgs),
    /// Score the design given in the config.
    Evaluate(RunArgs),
    /// Rerun a built-in reference problem and compare against published values.
    Reproduce {
        /// Example id, or "all".
        id: String,
    },
    /// List the ids accepted by reproduce.
    ListExamples,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Where to write the design document (JSON).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Stopping tolerance of the multiplicative algorithm.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Extra variance profile (JSON array or treatment map); repeatable.
    #[arg(long)]
    profile: Vec<PathBuf>,
}

fn read(path: &Path) -> Result<String, PipelineError> {
    fs::read_to_string(path).map_err(|e| ConfigError::Validation(format!("cannot read {}: {e}", path.display())).into())
}

fn load(args: &RunArgs) -> Result<RunConfig, PipelineError> {
    let mut cfg = parse_config(&read(&args.config)?)?;
    if let Some(eps) = args.epsilon {
        cfg = cfg.with_epsilon(eps)?;
    }
    for path in &args.profile {
        let name = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        cfg.add_profile(name, &read(path)?)?;
    }
    Ok(cfg)
}

fn finish(doc: DesignDocument, output: Option<&Path>) -> Result<(), PipelineError> {
    let doc = doc.with_timestamp(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    print!("{}", summary(&doc));
    if let Some(path) = output {
        fs::write(path, doc.to_json() + "\n")
            .map_err(|e| ConfigError::Validation(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Construct(args) => finish(run_construct(&load(&args)?)?, args.output.as_deref()),
        Command::Evaluate(args) => finish(run_evaluate(&load(&args)?)?, args.output.as_deref()),
        Command::Reproduce { id } => {
            let ids: Vec<String> = if id == "all" {
                list_examples().into_iter().map(|(id, _)| id).collect()
            } else {
                vec![id]
            };
            let (mut passed, mut failed) = (0, 0);
            for id in &ids {
                let report = run_reproduce(id)?;
                passed += report.passed();
                failed += report.failed();
                println!("{report}\n");
            }
            if ids.len() > 1 {
                println!("total: {passed} passed, {failed} failed");
            }
            Ok(())
        }
        Command::ListExamples => {
            for (id, title) in list_examples() {
                println!("{id:14} {title}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
