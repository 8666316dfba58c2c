use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use scalelab::Error;
use scalelab_cli::{exit_code, run_str, Command, Options};

/// Scales, tidy lattices and dynamical decompositions over local fields.
#[derive(Parser)]
#[command(name = "scalelab", version)]
struct Cli {
    command: Command,
    /// Request document; `-` reads standard input.
    #[arg(long)]
    input: PathBuf,
    /// Overrides the precision of the field in the request.
    #[arg(long)]
    precision: Option<u32>,
    /// Oracle window exponent, or shift window radius.
    #[arg(long)]
    window: Option<i64>,
    /// Oracle candidate budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Seed for the sampled checks in the group reports.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn read_input(path: &PathBuf) -> Result<String, Error> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options { precision: cli.precision, window: cli.window, budget: cli.budget, seed: cli.seed };
    let result = read_input(&cli.input).and_then(|text| run_str(cli.command, &text, &opts));
    match result {
        Ok(out) => {
            let mut text = serde_json::to_string_pretty(&out.report).expect("reports serialize");
            text.push('\n');
            let written = match &cli.output {
                Some(path) => std::fs::write(path, text),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("scalelab: cannot write report: {e}");
                return ExitCode::from(2);
            }
            eprintln!("{}: {}", cli.command, out.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("scalelab {}: {e}", cli.command);
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
