//! `qott`: verification campaigns and fixture exchange for qott-core.

mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{checks_table, write_csv, ReportEnvelope};

#[derive(Parser, Debug)]
#[command(name = "qott", version, about = "Numerical checks for qudit maskers and trusted-initializer commitment")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "QOTT_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Masking, entropy and duality audits of every circuit family.
    VerifyMaskers {
        /// Comma-separated dimensions, each in 2..=7.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        d: Vec<usize>,
    },
    /// Exact protocol runs.
    Protocol {
        #[command(subcommand)]
        action: ProtocolAction,
    },
    /// Sampled acceptance, optionally over repeated instances.
    Montecarlo {
        #[command(flatten)]
        run: commands::protocol::RunArgs,
        /// Independent instances per trial that must all accept.
        #[arg(long, default_value_t = 1)]
        repeat: u32,
    },
    /// Shared-randomness cost of the commitment routes.
    Src {
        #[command(flatten)]
        params: commands::ParamArgs,
        /// Field size of the classical scheme; defaults to p.
        #[arg(long)]
        classical_field: Option<usize>,
    },
    /// The classical line/point commitment.
    Baseline {
        #[command(subcommand)]
        action: BaselineAction,
    },
    /// Commit to two dits with one entangled reference.
    Superdense {
        #[command(flatten)]
        params: commands::ParamArgs,
        /// `a,b`; drawn from the seed when omitted.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        dits: Option<Vec<usize>>,
    },
    /// Write fixtures to a directory.
    Export {
        #[command(subcommand)]
        what: commands::fixtures::ExportWhat,
    },
    /// Read fixtures back and check them.
    Import {
        #[command(subcommand)]
        what: commands::fixtures::ImportWhat,
    },
}

#[derive(Subcommand, Debug)]
enum ProtocolAction {
    Run(commands::protocol::RunArgs),
}

#[derive(Subcommand, Debug)]
enum BaselineAction {
    Run(BaselineArgs),
}

#[derive(Args, Debug)]
struct BaselineArgs {
    #[arg(long, default_value_t = 5)]
    p: usize,
    /// Committed message; drawn from the seed when omitted.
    #[arg(long)]
    message: Option<usize>,
}

fn dispatch(cli: &Cli) -> anyhow::Result<(String, report::Outcome)> {
    let seed = cli.seed;
    Ok(match &cli.command {
        Command::VerifyMaskers { d } => ("verify-maskers".into(), commands::maskers::verify(d)?),
        Command::Protocol { action: ProtocolAction::Run(args) } => {
            ("protocol run".into(), commands::protocol::run(args, seed)?)
        }
        Command::Montecarlo { run, repeat } => {
            ("montecarlo".into(), commands::protocol::montecarlo(run, *repeat, seed)?)
        }
        Command::Src { params, classical_field } => ("src".into(), commands::src(params, *classical_field)?),
        Command::Baseline { action: BaselineAction::Run(a) } => {
            ("baseline run".into(), commands::baseline(a.p, a.message, seed)?)
        }
        Command::Superdense { params, dits } => {
            ("superdense".into(), commands::superdense(params, dits.as_deref(), seed)?)
        }
        Command::Export { what } => ("export".into(), commands::fixtures::export(what, seed)?),
        Command::Import { what } => ("import".into(), commands::fixtures::import(what)?),
    })
}

fn emit(cli: &Cli, envelope: &ReportEnvelope, table: Option<&report::Table>) -> anyhow::Result<()> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, envelope)?;
            writeln!(out)?;
        }
        Format::Csv => match table {
            Some(t) => write_csv(t, &mut out)?,
            None => write_csv(&checks_table(&envelope.checks), &mut out)?,
        },
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let (command, outcome) = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let envelope = ReportEnvelope::new(command, cli.seed, &outcome, start.elapsed().as_secs_f64() * 1e3);
    if let Err(e) = emit(&cli, &envelope, outcome.table.as_ref()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    if envelope.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
