use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use pathgeom::cli::{run, Command, Input, RunOptions};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Invariants,
    Classify,
    VerifyChains,
    VerifyCr,
    VerifyDancing,
    Metric,
    Catalog,
}

/// Invariants, type classification and chain/dancing/metric checks for path geometries.
#[derive(Parser)]
#[command(name = "pg", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Problem file (.pg); catalog names resolve without one.
    file: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per identity test.
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Write the machine-readable report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write sampled curves here (verify-dancing).
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cmd = match args.command {
        Cmd::Invariants => Command::Invariants,
        Cmd::Classify => Command::Classify,
        Cmd::VerifyChains => Command::VerifyChains,
        Cmd::VerifyCr => Command::VerifyCr,
        Cmd::VerifyDancing => Command::VerifyDancing,
        Cmd::Metric => Command::Metric,
        Cmd::Catalog => Command::Catalog,
    };
    let input = match &args.file {
        Some(p) => Input::from_path(p),
        None => Ok(Input::empty()),
    };
    let opts = RunOptions { system: args.system, samples: args.samples, seed: args.seed, trials: args.trials, csv: args.csv };
    let result = input.and_then(|i| run(cmd, &i, &opts));
    match result {
        Ok(report) => {
            print!("{}", report.to_text());
            if let Some(path) = &args.json {
                if let Err(e) = std::fs::write(path, report.to_json()) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let a = Args::try_parse_from(["pg", "verify-chains", "chains.pg"]).unwrap();
        assert!(matches!(a.command, Cmd::VerifyChains));
        assert_eq!((a.samples, a.seed, a.trials), (20, 0, 50));
        assert!(Args::try_parse_from(["pg", "verify-everything"]).is_err());
    }
}
