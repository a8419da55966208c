//! Run configuration shared by every subcommand.
//!
//! Values come from the defaults below, then an optional JSON file
//! (`--config`), then explicit flags, later sources winning.

use std::path::Path;
use std::str::FromStr;

use besicovitch_core::cf::IrrationalSpec;
use besicovitch_core::dimension::DEFAULT_ENUMERATION_CAP;
use besicovitch_core::params::{Strategy, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(CliError::Usage(format!("unknown output format {s:?} (csv|json)"))),
        }
    }
}

/// Defaults: golden, greedy, main, `n_max = 3`, automatic α̂ depth,
/// truncation `n_max + 3`, 128 bits, CSV, seed 0, enumeration cap 10⁷.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `golden`, `sqrt2m1`, `quotients=...` or `periodic=head;tail`.
    pub alpha: String,
    pub strategy: String,
    pub variant: String,
    pub n_max: u32,
    /// Convergent index of α̂; `None` picks the shallowest admissible one.
    pub alpha_depth: Option<usize>,
    /// Levels summed in φ; `None` means all selected levels.
    pub truncation: Option<u32>,
    pub precision_bits: u32,
    pub out: OutputFormat,
    pub seed: u64,
    pub enumeration_cap: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: "golden".into(),
            strategy: "greedy".into(),
            variant: "main".into(),
            n_max: 3,
            alpha_depth: None,
            truncation: None,
            precision_bits: 128,
            out: OutputFormat::Csv,
            seed: 0,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Flag values; `None` leaves the configured value alone.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub alpha: Option<String>,
    pub strategy: Option<String>,
    pub variant: Option<String>,
    pub n_max: Option<u32>,
    pub alpha_depth: Option<usize>,
    pub truncation: Option<u32>,
    pub precision_bits: Option<u32>,
    pub out: Option<OutputFormat>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn resolve(path: Option<&Path>, over: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = over.$f.clone() { cfg.$f = v; } )* };
        }
        take!(alpha, strategy, variant, n_max, precision_bits, out, seed);
        if over.alpha_depth.is_some() {
            cfg.alpha_depth = over.alpha_depth;
        }
        if over.truncation.is_some() {
            cfg.truncation = over.truncation;
        }
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        self.alpha_spec()?;
        self.strategy()?;
        self.variant()?;
        if self.n_max == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        Ok(())
    }

    pub fn alpha_spec(&self) -> Result<IrrationalSpec> {
        self.alpha.parse().map_err(|e: besicovitch_core::Error| CliError::Usage(e.to_string()))
    }

    pub fn strategy(&self) -> Result<Strategy> {
        self.strategy.parse().map_err(|_| CliError::Usage(format!("unknown strategy {:?} (fixed|greedy)", self.strategy)))
    }

    pub fn variant(&self) -> Result<Variant> {
        self.variant.parse().map_err(|_| CliError::Usage(format!("unknown variant {:?} (main|tent)", self.variant)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
