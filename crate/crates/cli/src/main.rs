mod params;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use params::Params;

#[derive(Parser, Debug)]
#[command(name = "flagzoom", version, about = "Rational points on flag varieties: counts, zooms and exponents")]
struct Cli {
    /// JSON file with parameters; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (outputs do not depend on it).
    #[arg(long, global = true, env = "FLAGZOOM_THREADS")]
    threads: Option<usize>,
    /// Write every artifact here instead of printing the main one.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rational points with bounded heights, as CSV.
    Enumerate(Params),
    /// Counting series and power-log fit.
    Count(Params),
    /// Counts in moving windows against the limit measure.
    Windows(Params),
    /// Zoomed clouds, mass slopes and uniformity statistics.
    Zoom(Params),
    /// Best-approximation records and exponent estimates.
    Beta(Params),
    /// Scan for rational Schubert conditions.
    Genericity(Params),
    /// First-minimum trace along the diagonal flow.
    Escape(Params),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] flagzoom::Error),
    #[error("{0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use flagzoom::Error as E;
        match self {
            CliError::Lib(
                E::BudgetExceeded { .. }
                | E::PrecisionLoss { .. }
                | E::IncompleteEnumeration { .. }
                | E::InsufficientMass { .. }
                | E::InsufficientData(_),
            ) => 3,
            CliError::Lib(_) | CliError::Config(_) => 2,
            CliError::Io(_) => 1,
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Lib(e) => {
                let dbg = format!("{e:?}");
                dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
            }
            CliError::Config(_) => "Config".into(),
            CliError::Io(_) => "Io".into(),
        }
    }
}

fn report(err: &CliError) -> ExitCode {
    let code = err.exit_code();
    let body = json!({ "error": err.kind(), "message": err.to_string(), "exit_code": code });
    let _ = writeln!(std::io::stderr(), "{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return report(&CliError::Config(e.to_string().trim().to_string())),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<Params>(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => Params::default(),
    };
    let (name, flags) = match cli.command {
        Command::Enumerate(p) => ("enumerate", p),
        Command::Count(p) => ("count", p),
        Command::Windows(p) => ("windows", p),
        Command::Zoom(p) => ("zoom", p),
        Command::Beta(p) => ("beta", p),
        Command::Genericity(p) => ("genericity", p),
        Command::Escape(p) => ("escape", p),
    };
    let params = flags.over(base);
    let mut out = run::Output::new(cli.out_dir, params::config_hash(name, &params));
    match name {
        "enumerate" => run::enumerate(&params, &mut out),
        "count" => run::count(&params, &mut out),
        "windows" => run::windows(&params, &mut out),
        "zoom" => run::zoom(&params, &mut out),
        "beta" => run::beta(&params, &mut out),
        "genericity" => run::genericity(&params, &mut out),
        _ => run::escape(&params, &mut out),
    }
}
