mod commands;
mod output;
mod svg;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lattice_bands::{Estimator, LatticeParams, SpectrumError};

use commands::{SweepArgs, Vary};
use output::Report;

const EXIT_VALIDATION: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "lattice-bands", version, about = "Spectra of δ-coupled rectangular lattices and their line perturbations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Grid,
    Mc,
}

#[derive(Args)]
struct Lattice {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    gamma: f64,
}

#[derive(Args)]
struct Emit {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Bands, flat bands, the negative band and gaps of the unperturbed lattice.
    #[command(allow_negative_numbers = true)]
    Bands {
        #[command(flatten)]
        lattice: Lattice,
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: f64,
        #[command(flatten)]
        emit: Emit,
    },
    /// New bands created inside the gaps by the perturbed line of couplings.
    #[command(allow_negative_numbers = true)]
    Perturbed {
        #[command(flatten)]
        lattice: Lattice,
        #[arg(long)]
        gamma_tilde: f64,
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: f64,
        #[command(flatten)]
        emit: Emit,
    },
    /// Bands and discrete eigenvalues of single fibers.
    #[command(allow_negative_numbers = true)]
    Fiber {
        #[command(flatten)]
        lattice: Lattice,
        /// Defaults to gamma (no perturbation).
        #[arg(long)]
        gamma_tilde: Option<f64>,
        #[arg(long = "theta2")]
        theta2: Vec<f64>,
        #[arg(long = "theta2-grid")]
        theta2_grid: Option<i64>,
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: f64,
        /// Emit vertex values for |j| ≤ J of every eigenvector.
        #[arg(long, value_name = "J")]
        profile: Option<u32>,
        #[command(flatten)]
        emit: Emit,
    },
    /// Band diagram against gamma_tilde or a.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[arg(long, value_enum)]
        vary: Vary,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: i64,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        gamma_tilde: Option<f64>,
        #[arg(long)]
        emin: Option<f64>,
        #[arg(long)]
        emax: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
        #[command(flatten)]
        emit: Emit,
    },
    /// Spectral-measure estimates up to momentum kmax, as JSON.
    #[command(allow_negative_numbers = true)]
    Measure {
        #[command(flatten)]
        lattice: Lattice,
        #[arg(long)]
        gamma_tilde: Option<f64>,
        #[arg(long)]
        kmax: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, value_enum, default_value = "grid")]
        estimator: EstimatorArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Spectrum(SpectrumError),
    Io(String),
}

impl From<SpectrumError> for Failure {
    fn from(e: SpectrumError) -> Self {
        Failure::Spectrum(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn lattice(l: &Lattice, gamma_tilde: Option<f64>) -> Result<lattice_bands::Lattice, SpectrumError> {
    let p = LatticeParams::new(l.a, l.b, l.gamma)?;
    gamma_tilde.map_or(Ok(p), |g| p.with_gamma_tilde(g))
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(value: &serde_json::Value, path: Option<&Path>) -> Result<(), Failure> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit(report: &Report, e: &Emit) -> Result<(), Failure> {
    match e.format {
        Format::Csv => {
            let mut w = sink(e.out.as_deref())?;
            report.table.write_csv(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Format::Json => write_json(&report.to_json(), e.out.as_deref()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bands { lattice: l, emin, emax, emit: e } => {
            let rep = commands::bands(&lattice(&l, None)?, emin, emax)?;
            emit(&rep, &e)
        }
        Command::Perturbed { lattice: l, gamma_tilde, emin, emax, emit: e } => {
            let rep = commands::perturbed(&lattice(&l, Some(gamma_tilde))?, emin, emax)?;
            emit(&rep, &e)
        }
        Command::Fiber { lattice: l, gamma_tilde, theta2, theta2_grid, emin, emax, profile, emit: e } => {
            let p = lattice(&l, Some(gamma_tilde.unwrap_or(l.gamma)))?;
            let thetas = commands::theta_values(&theta2, theta2_grid)?;
            let rep = commands::fiber(&p, &thetas, emin, emax, profile)?;
            emit(&rep, &e)
        }
        Command::Sweep { vary, from, to, steps, a, b, gamma, gamma_tilde, emin, emax, svg, emit: e } => {
            let args = SweepArgs { vary, from, to, steps, a, b, gamma, gamma_tilde, emin, emax };
            let (rep, diagram) = commands::sweep(&args)?;
            if let Some(path) = svg {
                std::fs::write(path, diagram.render())?;
            }
            emit(&rep, &e)
        }
        Command::Measure { lattice: l, gamma_tilde, kmax, samples, estimator, seed, out } => {
            let est = match estimator {
                EstimatorArg::Grid => Estimator::Grid,
                EstimatorArg::Mc => Estimator::MonteCarlo { seed },
            };
            let value = commands::measure(&lattice(&l, gamma_tilde)?, kmax, samples, est)?;
            write_json(&value, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Spectrum(e)) if e.is_validation() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Spectrum(e)) => {
            eprintln!("internal error: {e}");
            ExitCode::from(EXIT_INTERNAL)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("output error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
