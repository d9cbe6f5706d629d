use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dwell_core::cli::{run, CliError, RunConfig};

/// Dwell-time switched systems: control sets, Lyapunov exponents and the
/// random switching process.
#[derive(Parser)]
#[command(name = "dwell", version)]
struct Args {
    #[command(subcommand)]
    action: Action,
}

#[derive(Subcommand)]
enum Action {
    /// Run the command described by a JSON config file.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Re-run the config recorded in a run manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn execute(action: Action) -> Result<(), CliError> {
    let (mut cfg, dir) = match action {
        Action::Run { config, output_dir } => (RunConfig::from_file(&config)?, output_dir),
        Action::Replay { manifest, output_dir } => {
            let text = std::fs::read_to_string(&manifest)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", manifest.display())))?;
            (RunConfig::from_manifest(&text)?, output_dir)
        }
    };
    if let Some(d) = dir {
        cfg.output_dir = d;
    }
    for path in run(&cfg)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    // the error line below replaces the default panic report
    std::panic::set_hook(Box::new(|_| {}));
    let outcome = std::panic::catch_unwind(|| execute(args.action));
    let err = match outcome {
        Ok(Ok(())) => return ExitCode::SUCCESS,
        Ok(Err(e)) => e,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            CliError::internal(msg)
        }
    };
    eprintln!("{}", err.to_json_line());
    ExitCode::from(err.exit_code() as u8)
}
