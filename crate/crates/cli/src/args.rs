use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "antipt",
    version,
    about = "Spectra, transfer functions and QCRB sweeps for two dissipatively coupled cavities"
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Destination file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Detuned, lossy, broken phase.
    Lossy,
    /// Lossy exceptional point.
    Ep,
    /// Exceptional point on the gain side; the master equation leg is skipped.
    GainEp,
    /// No dissipative coupling.
    Decoupled,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SystemArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long = "Gamma")]
    pub big_gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma0: Option<f64>,
    #[arg(long)]
    pub gamma_c: Option<f64>,
    /// Noise rate of the dissipative channel; defaults to Gamma.
    #[arg(long)]
    pub gamma_bath: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProbeArgs {
    /// Mean input quadratures xa,xb,ya,yb.
    #[arg(long, value_delimiter = ',', num_args = 4, allow_hyphen_values = true)]
    pub mu_in: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    pub covariance_mode: Option<CovarianceArg>,
    #[arg(long)]
    pub derivative_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CovarianceArg {
    SymmetricVacuum,
    AsWritten,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalues over a detuning grid.
    Spectrum {
        #[command(flatten)]
        system: SystemArgs,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        delta_range: Option<String>,
    },
    /// Phase of a single parameter point.
    Phase {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        ep_tol: Option<f64>,
    },
    /// Critical frequencies and their case.
    Critical {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// QFI and QCRB over a frequency grid.
    Qcrb {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        probe: ProbeArgs,
        /// Sets delta = (2 + eps) Gamma and places gamma0 at the threshold.
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<f64>,
        /// start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        omega_range: Option<String>,
        #[arg(long)]
        log: bool,
    },
    /// Analytic Laurent coefficient against the numerical residue.
    Laurent {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<f64>,
        /// Probe radii, decreasing, in units of Gamma.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Log-log slope of a saved QCRB sweep.
    PoleFit {
        /// Sweep file (CSV or JSON); standard input when absent or '-'.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        omega0: Option<f64>,
        /// lo:hi bounds on |omega - omega0|.
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        derivative_step: Option<f64>,
    },
    /// Dynamics cross-checks and invariant suites.
    Validate {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}
