use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "darwin", version, about = "Simulate, fit and test the double AR model without intercept")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// Human-readable, 4 decimals
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Master seed for every random draw
    #[arg(long, default_value_t = 20160601, global = true)]
    pub seed: u64,
    /// Write output here instead of stdout
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for mc-* and clt-check (overrides DARWIN_WORKERS)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Add wall time to JSON output (makes output run-dependent)
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// CSV file (header row, comma separated). A file with `sign` and `logabs`
    /// columns is read as a simulated path unless --column is given.
    #[arg(long, short = 'i')]
    pub input: PathBuf,
    /// Column name or zero-based index
    #[arg(long)]
    pub column: Option<String>,
    /// none | logret | logret_pct
    #[arg(long, default_value = "none")]
    pub transform: String,
    /// Skip empty / NA cells instead of failing
    #[arg(long)]
    pub drop_na: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long)]
    pub alpha: f64,
    /// gaussian | t5std | laplace
    #[arg(long, default_value = "gaussian")]
    pub dist: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path (log-sign form)
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Initial value, or "random" for a standard normal draw
        #[arg(long, default_value = "random", allow_hyphen_values = true)]
        y0: String,
        /// Simulate the positive auxiliary process with x0 = |y0|
        #[arg(long)]
        auxiliary: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form QMLE with standard errors, plug-in exponent and residual ACFs
    Fit {
        #[command(flatten)]
        input: InputArgs,
        /// Lags for residual ACF/PACF (0 disables)
        #[arg(long, default_value_t = 10)]
        acf_lags: usize,
        /// Also write per-observation residuals to this CSV
        #[arg(long)]
        residuals_csv: Option<PathBuf>,
        /// Also write residual and squared-residual ACF/PACF to this CSV
        #[arg(long)]
        acf_csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Lyapunov exponent estimate and stability test of gamma0 = 0
    Stability {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Wald test of linear restrictions Gamma theta = r on the QMLE
    Wald {
        #[command(flatten)]
        input: InputArgs,
        /// Rows separated by ';', entries by ',' (default tests phi = 0)
        #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
        gamma: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        r: String,
        #[command(flatten)]
        common: Common,
    },
    /// Find alpha with gamma0(phi, alpha) = target (the stability boundary by default)
    Calibrate {
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value = "gaussian")]
        dist: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        target: f64,
        #[arg(long, default_value_t = 1e-6)]
        lo: f64,
        #[arg(long, default_value_t = 1e3)]
        hi: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Theoretical gamma0 and sigma2, optionally with asymptotic sds at n
    Theory {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = MethodArg::Quad)]
        method: MethodArg,
        #[arg(long, default_value_t = 10_000_000)]
        draws: usize,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// EM / ESD / ASD table of the estimators
    McTable {
        #[command(flatten)]
        study: StudyArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Size and power of the stability test across an alpha grid
    McPower {
        #[command(flatten)]
        study: StudyArgs,
        /// Grid points when --alphas is not given
        #[arg(long, default_value_t = 11)]
        grid_points: usize,
        /// Grid spans gamma0 in [-w, w] when --alphas is not given
        #[arg(long, default_value_t = 0.05)]
        half_width: f64,
        #[arg(long, default_value_t = 0.05)]
        level: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Standardized replicates sqrt(n)(estimate - truth) with normal overlay
    McHist {
        #[command(flatten)]
        study: StudyArgs,
        #[arg(long, value_enum, default_value_t = TargetArg::Gamma)]
        target: TargetArg,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical check of the functional CLT for log|y|
    CltCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        reps: usize,
        #[arg(long, default_value = "0.25,0.5,0.75,1")]
        grid: String,
        #[command(flatten)]
        common: Common,
    },
    /// Comparison QMLE of the intercepted DAR(1) model
    DarFit {
        #[command(flatten)]
        input: InputArgs,
        /// Starting point phi,omega,alpha (default from the closed-form fit)
        #[arg(long, allow_hyphen_values = true)]
        init: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Fitted log-volatility log(alpha_hat * y_{t-1}^2)
    Volatility {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Print the man page (roff)
    Man {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[arg(long, default_value = "gaussian")]
    pub dist: String,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub phi: f64,
    /// Comma-separated alpha values (default: the tabulated values for --dist)
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long, default_value = "100,200")]
    pub ns: String,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Quad,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Gamma,
    Phi,
    Alpha,
}
