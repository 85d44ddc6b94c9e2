mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::debug;

use input::{CompileArgs, DocArgs, SpecArgs};

/// Information extraction with regular document spanners.
///
/// Inputs are regex formulas (`--rgx`), automata in JSON (`--automaton`) or
/// algebra expressions (`--expr`). Exit status: 0 on success, 1 on a
/// semantic error (failed check, wrong automaton class, symbol outside the
/// alphabet), 2 on I/O or parse errors.
#[derive(Parser, Debug)]
#[command(name = "spanner", version)]
struct Cli {
    /// Increase log verbosity (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile to a deterministic sequential eVA and print it as JSON.
    Compile {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        opts: CompileArgs,
        /// Write the automaton here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report whether the input is sequential, functional and deterministic.
    Check {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        opts: CompileArgs,
        /// Fail unless the input is deterministic.
        #[arg(long)]
        deterministic: bool,
        /// Fail unless the input is sequential.
        #[arg(long)]
        sequential: bool,
        /// Fail unless the input is functional.
        #[arg(long)]
        functional: bool,
    },
    /// Print every output mapping once, as NDJSON.
    Enumerate {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        opts: CompileArgs,
        #[command(flatten)]
        doc: DocArgs,
        /// Stop after this many mappings.
        #[arg(long)]
        limit: Option<u64>,
        /// Print a work report as JSON on stderr.
        #[arg(long)]
        stats: bool,
        /// Use an eVA input as is, without checking that it is deterministic
        /// and sequential. Output on other automata is unspecified.
        #[arg(long)]
        skip_validation: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the number of output mappings.
    Count {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        opts: CompileArgs,
        #[command(flatten)]
        doc: DocArgs,
    },
    /// Measure preprocessing and enumeration over documents of growing
    /// length; prints CSV.
    Bench {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        opts: CompileArgs,
        /// Document lengths.
        #[arg(long, value_delimiter = ',', default_value = "0,10,100,1000,10000")]
        lengths: Vec<usize>,
        /// Symbols repeated to fill each document. Defaults to the alphabet.
        #[arg(long)]
        pattern: Option<String>,
        /// Symbols that end every document (counted in its length).
        #[arg(long, default_value = "")]
        suffix: String,
        #[arg(long)]
        skip_validation: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the built-in example automata, documents and corpus manifests.
    Fixtures {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Seeds per corpus manifest.
        #[arg(long, default_value_t = 500)]
        corpus_seeds: u64,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<spanner_core::Error>() {
            return if e.is_input_error() { 2 } else { 1 };
        }
    }
    2
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    debug!("{cli:?}");
    match cli.command {
        Command::Compile { spec, opts, out } => {
            commands::compile_to_file(&spec, &opts, out.as_deref())
        }
        Command::Check {
            spec,
            opts,
            deterministic,
            sequential,
            functional,
        } => commands::check(&spec, &opts, [sequential, functional, deterministic]),
        Command::Enumerate {
            spec,
            opts,
            doc,
            limit,
            stats,
            skip_validation,
            out,
        } => commands::enumerate(
            &spec,
            &opts,
            &doc,
            commands::EnumerateOptions {
                limit,
                stats,
                skip_validation,
                out,
            },
        ),
        Command::Count { spec, opts, doc } => commands::count(&spec, &opts, &doc),
        Command::Bench {
            spec,
            opts,
            lengths,
            pattern,
            suffix,
            skip_validation,
            out,
        } => commands::bench(
            &spec,
            &opts,
            commands::BenchOptions {
                lengths,
                pattern,
                suffix,
                skip_validation,
                out,
            },
        ),
        Command::Fixtures { out, corpus_seeds } => commands::fixtures(&out, corpus_seeds),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
