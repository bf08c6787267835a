use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use operforge::job::{self, Command, Knobs, EXIT_INVALID, PRECISION_ENV};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Normalize,
    NormalizeRegular,
    Cyclic,
    Regularize,
    VerifyOper,
    TangentDim,
    Member,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Normalize => Command::Normalize,
            Cmd::NormalizeRegular => Command::NormalizeRegular,
            Cmd::Cyclic => Command::Cyclic,
            Cmd::Regularize => Command::Regularize,
            Cmd::VerifyOper => Command::VerifyOper,
            Cmd::TangentDim => Command::TangentDim,
            Cmd::Member => Command::Member,
        }
    }
}

/// Gauge normal forms and certificates for connections on the formal
/// punctured disc.
///
/// Exit status: 0 success, 1 invalid input, 2 a bound or the precision was
/// too small (retry with larger knobs).
#[derive(Parser, Debug)]
#[command(name = "operforge", version)]
struct Args {
    command: Cmd,
    /// Input JSON file, or `-` for stdin.
    input: PathBuf,
    /// Relative precision of the working window (at least 4).
    #[arg(long, env = PRECISION_ENV, default_value_t = 16)]
    precision: i64,
    #[arg(long, default_value_t = operforge::springer::DEFAULT_COWEIGHT_BOUND)]
    coweight_bound: i64,
    #[arg(long, default_value_t = operforge::springer::DEFAULT_DEPTH_BOUND)]
    depth_bound: i64,
    /// Defaults to 2n.
    #[arg(long)]
    pole_budget: Option<i64>,
    /// Laurent window depth for tangent-dim; defaults to (-r) * dim g.
    #[arg(long)]
    window_depth: Option<i64>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Treat INPUT as a report from an earlier run and re-check it.
    #[arg(long)]
    verify_only: bool,
}

fn read_input(path: &PathBuf) -> std::io::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match read_input(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("operforge: cannot read {}: {e}", args.input.display());
            return ExitCode::from(EXIT_INVALID as u8);
        }
    };
    let command = Command::from(args.command);
    let (code, report) = if args.verify_only {
        let (code, report) = job::verify_report(&text);
        match report.get("command").and_then(|c| c.as_str()) {
            Some(c) if c != command.name() => {
                eprintln!("operforge: report is for {c}, not {command}");
                (EXIT_INVALID, report)
            }
            _ => (code, report),
        }
    } else {
        let knobs = Knobs {
            precision: args.precision,
            coweight_bound: args.coweight_bound,
            depth_bound: args.depth_bound,
            pole_budget: args.pole_budget,
            window_depth: args.window_depth,
        };
        job::run(command, &text, &knobs)
    };
    let rendered = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    match &args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("operforge: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_INVALID as u8);
            }
        }
        None => print!("{rendered}"),
    }
    if let Some(err) = report.get("error") {
        eprintln!("operforge: {}", err["message"].as_str().unwrap_or("error"));
    }
    ExitCode::from(code as u8)
}
