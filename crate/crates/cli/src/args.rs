use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "psaws", version, about = "Propagation-separation adaptive weights smoothing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smooth observed data and write the estimates.
    Smooth(SmoothArgs),
    /// Choose the adaptation bandwidth by the propagation condition.
    Calibrate(CalibrateArgs),
    /// Test the propagation condition at a given adaptation bandwidth.
    Testprop(TestpropArgs),
    /// Run one of the theoretical-bound verification experiments.
    Verify(VerifyArgs),
    /// Run the test-function demo and report the MSE of every step.
    Demo(DemoArgs),
    /// Print the family catalog as JSON.
    Families(FamiliesArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    /// Family name, see `psaws families`.
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    /// Standard deviation (gaussian, lognormal).
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Shape p (gamma).
    #[arg(long)]
    pub shape: Option<f64>,
    /// Shape k (weibull) or degrees of freedom (scaled_chi_squared).
    #[arg(long)]
    pub kparam: Option<f64>,
    /// Number of trials or phases (binomial, erlang).
    #[arg(long)]
    pub trials: Option<u32>,
    /// Scale x_m (pareto).
    #[arg(long)]
    pub xm: Option<f64>,
    /// Size r (negative_binomial).
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Parabola,
    Plateau,
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// Initial bandwidth h0.
    #[arg(long, default_value_t = 1.0)]
    pub h0: f64,
    /// Bandwidth growth factor [default: 1.25^(1/d)].
    #[arg(long)]
    pub a: Option<f64>,
    /// Number of iterations k* [default: 15 unless --hmax is given].
    #[arg(long, conflicts_with = "hmax")]
    pub kstar: Option<usize>,
    /// Largest bandwidth; k* is the first step reaching it.
    #[arg(long)]
    pub hmax: Option<f64>,
    /// Location kernel.
    #[arg(long, value_enum, default_value = "parabola")]
    pub lkern: KernelArg,
    /// Adaptation kernel.
    #[arg(long, value_enum, default_value = "plateau")]
    pub akern: KernelArg,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// Size of a one-dimensional design.
    #[arg(long, conflicts_with = "grid")]
    pub n: Option<usize>,
    /// Two-dimensional design ROWS COLS.
    #[arg(long, num_args = 2, value_names = ["ROWS", "COLS"])]
    pub grid: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Master seed.
    #[arg(long, env = "PSAWS_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    /// Headered CSV, one column.
    Csv,
    /// Header-less CSV matrix.
    Matrix,
    /// Binary PGM (P5).
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PgmDepth {
    #[value(name = "8")]
    Eight,
    #[value(name = "16")]
    Sixteen,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Adaptation bandwidth; `inf` gives non-adaptive smoothing.
    #[arg(long)]
    pub lambda: f64,
    /// Input file.
    #[arg(long)]
    pub input: PathBuf,
    /// Input layout.
    #[arg(long, value_enum, default_value = "csv")]
    pub input_format: InputFormat,
    /// Column to read from a headered CSV [default: first column].
    #[arg(long)]
    pub column: Option<String>,
    /// Linear value mapping LO HI for PGM pixels, in and out.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub range: Option<Vec<f64>>,
    /// Project estimates onto [LO, HI] after every step.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub project: Option<Vec<f64>>,
    /// Shift of estimates away from divergent parameter boundaries.
    #[arg(long, default_value_t = psaws_core::families::DEFAULT_BOUNDARY_SHIFT)]
    pub boundary_shift: f64,
    /// Output file [default: standard output].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: OutputFormat,
    /// Emit every step instead of the final one (csv, json).
    #[arg(long)]
    pub trace: bool,
    /// PGM bit depth.
    #[arg(long, value_enum, default_value = "8")]
    pub depth: PgmDepth,
}

#[derive(Debug, Clone, Args)]
pub struct SimulationArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Monte-Carlo replications.
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Target level epsilon of the propagation condition.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    /// Homogeneous parameter values theta* [default: a family-specific value].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    /// Write isolines z(k, p) as CSV.
    #[arg(long)]
    pub isolines: Option<PathBuf>,
    /// Levels p of the isolines.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.1,0.01,0.001")]
    pub p_levels: Vec<f64>,
    /// Report file [default: standard output].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub sim: SimulationArgs,
    /// Bisection bracket LO HI; the check must fail at LO and pass at HI.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [0.1, 1000.0])]
    pub bracket: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct TestpropArgs {
    #[command(flatten)]
    pub sim: SimulationArgs,
    /// Adaptation bandwidth.
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Expbound,
    Triangle,
    Separation,
    Localprop,
    Stability,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Experiment to run.
    #[arg(long, value_enum)]
    pub check: Check,
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Replications (random sequences for `triangle`).
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Parameter value (expbound).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Weights in [0, 1] (expbound) [default: N unit weights].
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<f64>,
    /// Number of unit weights when --weights is absent (expbound).
    #[arg(long, default_value_t = 1)]
    pub nweights: usize,
    /// Thresholds (expbound).
    #[arg(long = "zs", value_delimiter = ',', default_value = "1,2,5,10")]
    pub zs: Vec<f64>,
    /// Parameter set [LO, HI] of the triangle check, or the set used for
    /// kappa in the scenario checks.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub kappa_range: Option<Vec<f64>>,
    /// Longest sequence (triangle).
    #[arg(long, default_value_t = 5)]
    pub max_len: usize,
    /// Design size of the two-segment scenario.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// First index of the right segment [default: n/2].
    #[arg(long)]
    pub split: Option<usize>,
    /// Parameter on the left segment.
    #[arg(long, allow_negative_numbers = true)]
    pub left: Option<f64>,
    /// Parameter on the right segment.
    #[arg(long, allow_negative_numbers = true)]
    pub right: Option<f64>,
    /// Adaptation bandwidth of the scenario.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Threshold z [default: 2 ln n].
    #[arg(long)]
    pub z: Option<f64>,
    /// Level epsilon [default: n^-2].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Step k of the separation check.
    #[arg(long)]
    pub step: Option<usize>,
    /// Horizon k' of the local propagation check [default: k*].
    #[arg(long)]
    pub kprime: Option<usize>,
    /// Conditioning step k1 (stability).
    #[arg(long)]
    pub k1: Option<usize>,
    /// Target step k2 (stability) [default: k*].
    #[arg(long)]
    pub k2: Option<usize>,
    /// Project estimates onto the kappa set.
    #[arg(long)]
    pub project: bool,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Report file [default: standard output].
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestFunction {
    Theta1,
    Theta2,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Test function.
    #[arg(long = "function", value_enum, default_value = "theta1")]
    pub function: TestFunction,
    /// Adaptation bandwidth [default: 14.6 for theta1, 16 for theta2].
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub seed: SeedArgs,
    /// Per-step estimates as CSV.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// MSE table file [default: standard output].
    #[arg(long)]
    pub mse: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FamiliesArgs {
    /// Output file [default: standard output].
    #[arg(long)]
    pub output: Option<PathBuf>,
}
