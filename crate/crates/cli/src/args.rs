use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "photon-echo", version, about = "Simulate three-pulse photon-echo storage of weak light pulses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one protocol and report its observables.
    Run(CommonArgs),
    /// Run a protocol once per value of one parameter.
    Sweep(SweepArgs),
    /// Project a Monte Carlo ensemble's echo onto observation directions.
    ScanPhaseMatching(ScanArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProtocolName {
    #[value(name = "two-level-3pe")]
    TwoLevel,
    #[value(name = "three-level-3pe")]
    ThreeLevel,
    #[value(name = "ham-variant")]
    HamVariant,
}

impl ProtocolName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::TwoLevel => "two-level-3pe",
            Self::ThreeLevel => "three-level-3pe",
            Self::HamVariant => "ham-variant",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "theta2")]
    Theta2,
    #[value(name = "theta3")]
    Theta3,
    #[value(name = "theta2_r")]
    Theta2R,
    #[value(name = "theta3_r")]
    Theta3R,
    #[value(name = "epsilon")]
    Epsilon,
    #[value(name = "n_atoms")]
    NAtoms,
    #[value(name = "separation")]
    Separation,
}

#[derive(Clone, Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "two-level-3pe")]
    pub protocol: ProtocolName,

    /// JSON protocol description used instead of a named protocol.
    #[arg(long, value_name = "FILE")]
    pub protocol_file: Option<PathBuf>,

    /// Number of atoms N.
    #[arg(long, default_value_t = 1e6, allow_negative_numbers = true)]
    pub n_atoms: f64,

    /// Input amplitude ε; the storage pulse has area 2ε.
    #[arg(long, conflicts_with = "single_photon", allow_negative_numbers = true)]
    pub epsilon: Option<f64>,

    /// Set ε = 1/√N (one excitation on average).
    #[arg(long)]
    pub single_photon: bool,

    /// Δ₀(t₂ − t₁).
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    pub separation: f64,

    /// Δ₀(t₃ − t₂).
    #[arg(long, default_value_t = 100.0, allow_negative_numbers = true)]
    pub storage: f64,

    /// Second pulse area (Raman area for the three-level protocol).
    #[arg(long, visible_alias = "theta2-r", allow_negative_numbers = true)]
    pub theta2: Option<f64>,

    /// Third pulse area (Raman area for the three-level protocol).
    #[arg(long, visible_alias = "theta3-r", allow_negative_numbers = true)]
    pub theta3: Option<f64>,

    /// Minimum number of quadrature nodes.
    #[arg(long, default_value_t = 64)]
    pub quadrature_order: usize,

    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,

    /// Seed for Monte Carlo sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write output here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    #[arg(long, value_enum)]
    pub param: SweepParam,

    /// Comma-separated parameter values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required_unless_present = "range")]
    pub values: Vec<f64>,

    /// START STOP COUNT: COUNT evenly spaced values from START to STOP.
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "COUNT"], conflicts_with = "values", allow_negative_numbers = true)]
    pub range: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Monte Carlo sample size M.
    #[arg(long, default_value_t = 10_000)]
    pub m: usize,

    /// Sample box side lengths in wavelengths: one value for a cube or
    /// three comma-separated values.
    #[arg(long = "box", value_delimiter = ',', default_value = "100")]
    pub box_size: Vec<f64>,

    /// File of observation directions, one `x,y,z` triple per line.
    #[arg(long, value_name = "FILE")]
    pub directions: Option<PathBuf>,

    /// Number of random observation directions when no file is given.
    #[arg(long, default_value_t = 100)]
    pub n_directions: usize,

    /// Tilt of the second beam from the common axis of the other two, in
    /// radians.
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub tilt: f64,
}
