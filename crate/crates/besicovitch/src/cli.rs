//! Argument definitions and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::config::{OutputFormat, Overrides, RunConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "besicovitch", version, about = "Discrete orbits of Besicovitch cylinder transformations: exact certificates and experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// golden | sqrt2m1 | quotients=a1,a2,... | periodic=head;tail
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// fixed | greedy
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// main | tent
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// A variant name, or the path of a stored profile JSON.
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// Number of construction levels.
    #[arg(long = "n", global = true)]
    pub n: Option<u32>,
    /// Convergent index of the rational stand-in for α.
    #[arg(long = "alpha-depth", global = true)]
    pub alpha_depth: Option<usize>,
    /// Levels summed in φ.
    #[arg(long = "trunc", global = true)]
    pub trunc: Option<u32>,
    #[arg(long = "precision-bits", global = true)]
    pub precision_bits: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// csv | json
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeCommand {
    Sensitivity,
    Nonrecurrence,
    Classify,
    Coverage,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convergent table with the gap certificates.
    Cf {
        #[arg(long, default_value_t = 10)]
        upto: usize,
    },
    /// Level parameters and validation certificates.
    Levels {
        /// Write the profile as JSON.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Per-level values `f_l(x)` and `φ(x)`.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Also list `f_l(x + m α̂) − f_l(x)`.
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i64>,
    },
    /// `φ^(m)(x)` by telescoping and by direct summation.
    Sum {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        m: i64,
    },
    /// Interval tables, sample points and membership.
    Target {
        #[arg(long, default_value = "pp")]
        family: String,
        /// Build a centered sample path of this depth instead of listing intervals.
        #[arg(long)]
        depth: Option<u32>,
        /// Test membership of this point.
        #[arg(long)]
        x: Option<String>,
    },
    /// Divergence reports for the centered sample of a family.
    Audit {
        #[arg(long, default_value = "pp")]
        family: String,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "m_range")]
        m: Option<i64>,
        /// `lo:hi`, inclusive; `0` is skipped.
        #[arg(long = "m-range", allow_hyphen_values = true)]
        m_range: Option<String>,
        /// Sample depth; defaults to the truncation.
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Hausdorff dimension bounds, or a box count with `--grid`.
    Dimension {
        #[arg(long, default_value = "pp")]
        family: String,
        /// Enumerate children instead of using the count formulas.
        #[arg(long)]
        measured: bool,
        /// Finest grid of a box count on the deepest level.
        #[arg(long)]
        grid: Option<u64>,
        #[arg(long = "grid-min", default_value_t = 64)]
        grid_min: u64,
    },
    /// Fixed-point orbit of the cylinder map.
    Orbit {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value_t = 1000)]
        horizon: u64,
        /// Keep every k-th state.
        #[arg(long, default_value_t = 1)]
        stride: u64,
    },
    /// Numerical experiments on orbits.
    Probe {
        #[arg(value_enum)]
        kind: ProbeCommand,
        /// Base point; defaults to the centered sample of `--family`.
        #[arg(long)]
        x: Option<String>,
        #[arg(long, default_value = "mp")]
        family: String,
        #[arg(long, default_value_t = 1000)]
        horizon: u64,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// Half-height of the coverage window.
        #[arg(long, default_value_t = 3.0)]
        height: f64,
    },
}

/// Where the profile comes from.
#[derive(Debug, Clone)]
pub enum ProfileSource {
    Select,
    File(PathBuf),
}

pub struct Context {
    pub config: RunConfig,
    pub source: ProfileSource,
}

impl Common {
    fn context(&self) -> Result<Context> {
        let mut variant = self.variant.clone();
        let mut source = ProfileSource::Select;
        if let Some(p) = &self.profile {
            match p.as_str() {
                "main" | "tent" => {
                    if variant.as_deref().is_some_and(|v| v != p) {
                        return Err(CliError::Usage("--profile and --variant disagree".into()));
                    }
                    variant = Some(p.clone());
                }
                path => source = ProfileSource::File(PathBuf::from(path)),
            }
        }
        let over = Overrides {
            alpha: self.alpha.clone(),
            strategy: self.strategy.clone(),
            variant,
            n_max: self.n,
            alpha_depth: self.alpha_depth,
            truncation: self.trunc,
            precision_bits: self.precision_bits,
            out: self.out.as_deref().map(str::parse::<OutputFormat>).transpose()?,
            seed: self.seed,
        };
        Ok(Context { config: RunConfig::resolve(self.config.as_deref(), &over)?, source })
    }
}

/// Runs a parsed command line, writing to `out`; returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let ctx = cli.common.context()?;
    let report = commands::run(&ctx, &cli.command)?;
    report.write(ctx.config.out, out)?;
    Ok(if report.ok { 0 } else { 2 })
}

/// Entry point: parses `args` and maps every outcome to an exit code
/// (0 success, 2 certificate failure, 1 usage or other error).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
