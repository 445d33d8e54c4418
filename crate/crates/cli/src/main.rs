//! `sofic`: batch sweeps over microstate counts, coverings, concentration
//! experiments and splitting checks.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "sofic",
    version,
    about = "Sofic microstate counting for finite measured equivalence relations"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "dsv")]
    pub format: Format,
    /// Column delimiter for DSV output.
    #[arg(long, global = true, default_value = "\t")]
    pub delimiter: String,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Leave out the timestamp header line and wall-time values.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Worker threads for parallel work (default: available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a presentation and test whether its generators generate.
    Check(commands::CheckArgs),
    /// Count microstates for each d.
    Count(commands::CountArgs),
    /// Covering numbers of the passing restriction sets.
    Cover(commands::CoverArgs),
    /// Random-conjugation concentration experiment.
    Concentrate(commands::ConcentrateArgs),
    /// Splitting inequality for two generator subsets.
    Split(commands::SplitArgs),
    /// Growth ratios of a count report.
    Report(commands::ReportArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(workers) = cli.global.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()?;
    }
    let table = match &cli.command {
        Command::Check(a) => commands::check(a)?,
        Command::Count(a) => commands::count(a)?,
        Command::Cover(a) => commands::cover(a)?,
        Command::Concentrate(a) => commands::concentrate(a, !cli.global.no_timestamp)?,
        Command::Split(a) => commands::split(a)?,
        Command::Report(a) => commands::report(a)?,
    };
    let timestamp = (!cli.global.no_timestamp).then(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    let mut sink: Box<dyn Write> = match &cli.global.output {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    table.write(
        &mut sink,
        cli.global.format,
        &cli.global.delimiter,
        timestamp,
    )?;
    sink.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
