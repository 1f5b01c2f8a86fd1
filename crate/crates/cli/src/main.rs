use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use straticoh::{init_threads, run, Command, JobSpec};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// Exact rational intersection-space cohomology.
///
/// Exit status is 0 on success, 1 when a verification fails and 2 when the
/// input is invalid. The worker thread count is read from STRATICOH_THREADS.
#[derive(Parser, Debug)]
#[command(name = "straticoh", version)]
struct Args {
    command: Command,
    /// Perversity preset (zero, lower-middle, upper-middle, top) or values
    /// p(2),p(3),...; `pairing` takes a second one for the dual side.
    #[arg(long, short)]
    perversity: Vec<String>,
    /// Overrides the truncation cutoff derived from the perversity.
    #[arg(long, allow_hyphen_values = true)]
    cutoff: Option<i32>,
    #[arg(long, short, value_enum, default_value = "table")]
    format: Format,
    /// Writes the report here instead of standard output.
    #[arg(long, short)]
    output: Option<std::path::PathBuf>,
    inputs: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    init_threads();
    let job = JobSpec {
        command: args.command,
        inputs: args.inputs,
        perversities: args.perversity,
        cutoff: args.cutoff,
    };
    match run(&job) {
        Ok(outcome) => {
            let text = match args.format {
                Format::Json => outcome.report.to_json(),
                Format::Table => outcome.report.to_table(),
            };
            match &args.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: {}: {}", path.display(), e);
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", text),
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
