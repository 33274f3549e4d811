use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bogolab::cli::{self, Command, ConfigError, Origin, RunError};

#[derive(Parser)]
#[command(
    name = "bogolab",
    version,
    about = "Exact and Bogoliubov spectra of trapped 1D bosons"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override a configuration key; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Lowest many-body eigenvalues.
    Exact {
        #[command(flatten)]
        common: Common,
        /// Also write the Hamiltonian at the first coupling as row,col,value.
        #[arg(long, value_name = "PATH")]
        dump_operator: Option<PathBuf>,
        /// Also write the interaction tensor as i,j,k,l,value.
        #[arg(long, value_name = "PATH")]
        dump_tensor: Option<PathBuf>,
    },
    /// Mean-field condensate orbital.
    Condensate(Common),
    /// Bogoliubov spectrum around the condensate.
    Bogoliubov(Common),
    /// Exact versus Bogoliubov, one row per coupling.
    Compare(Common),
    /// Comparison rows for every mode cutoff from 2 up to `modes`.
    Sweep(Common),
}

fn configure_threads() -> Result<(), RunError> {
    let Ok(value) = std::env::var("BOGOLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        RunError::Config(ConfigError::Malformed {
            origin: Origin::Environment,
            key: "BOGOLAB_THREADS".into(),
            value: value.clone(),
            expected: "a positive integer",
        })
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| RunError::Io(e.to_string()))
}

fn write_dump(
    path: &std::path::Path,
    dump: impl FnOnce(std::io::BufWriter<std::fs::File>) -> Result<(), RunError>,
) -> Result<(), RunError> {
    let file = std::fs::File::create(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    dump(std::io::BufWriter::new(file))
}

fn run(cli: Cli) -> Result<(), RunError> {
    configure_threads()?;
    let (command, common, dumps) = match cli.command {
        Sub::Exact {
            common,
            dump_operator,
            dump_tensor,
        } => (Command::Exact, common, (dump_operator, dump_tensor)),
        Sub::Condensate(c) => (Command::Condensate, c, (None, None)),
        Sub::Bogoliubov(c) => (Command::Bogoliubov, c, (None, None)),
        Sub::Compare(c) => (Command::Compare, c, (None, None)),
        Sub::Sweep(c) => (Command::Sweep, c, (None, None)),
    };
    let text = match &common.config {
        Some(path) => {
            Some(std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?)
        }
        None => None,
    };
    let config = cli::load_config(text.as_deref(), &common.set, command)?;

    if let Some(path) = &dumps.0 {
        write_dump(path, |out| cli::dump_operator(&config, out))?;
    }
    if let Some(path) = &dumps.1 {
        write_dump(path, |out| cli::dump_tensor(&config, out))?;
    }

    let table = cli::execute(command, &config)?;
    cli::emit(&table, config.output_format, config.output_path.as_deref())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("bogolab: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
