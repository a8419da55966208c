//! File formats: profile JSON, CSV tables and JSON documents.
//!
//! Rationals are written as `"num/den"` and big integers as decimal strings,
//! so nothing in a certificate passes through a float.

use std::io::Write;
use std::path::Path;

use besicovitch_core::cf::IrrationalSpec;
use besicovitch_core::logs::Enclosure;
use besicovitch_core::params::{LevelParams, Profile};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::OutputFormat;
use crate::error::{CliError, Result};

pub fn rat(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn big(v: &BigInt) -> String {
    v.to_string()
}

/// `[lo, hi]` with 17 significant digits, enough to round-trip an `f64`.
pub fn enclosure(e: &Enclosure) -> String {
    format!("[{:.16e}, {:.16e}]", e.lo, e.hi)
}

pub fn enclosure_json(e: &Enclosure) -> Value {
    json!({ "lo": e.lo, "hi": e.hi })
}

fn parse_big(s: &str, what: &str) -> Result<BigInt> {
    s.parse().map_err(|_| CliError::Usage(format!("bad integer {s:?} in field {what}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaJson {
    pub head: Vec<u64>,
    pub tail: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelJson {
    pub n: u32,
    pub k: usize,
    pub p: String,
    pub q: String,
    pub q_next: String,
    #[serde(rename = "A")]
    pub a: String,
}

/// Stored profile. Loading re-derives every row from the convergents of α
/// and rejects files that disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileJson {
    pub alpha: AlphaJson,
    pub strategy: String,
    pub variant: String,
    pub n_max: u32,
    pub levels: Vec<LevelJson>,
}

impl ProfileJson {
    pub fn from_profile(p: &Profile) -> Self {
        ProfileJson {
            alpha: AlphaJson { head: p.alpha.head().to_vec(), tail: p.alpha.tail().to_vec() },
            strategy: p.strategy.name().into(),
            variant: p.variant.name().into(),
            n_max: p.n_max(),
            levels: p
                .levels
                .iter()
                .map(|l| LevelJson {
                    n: l.n,
                    k: l.k,
                    p: big(&l.p),
                    q: big(&l.q),
                    q_next: big(&l.q_next),
                    a: big(&l.a),
                })
                .collect(),
        }
    }

    pub fn to_profile(&self) -> Result<Profile> {
        let alpha = IrrationalSpec::new(self.alpha.head.clone(), self.alpha.tail.clone())?;
        let strategy = self.strategy.parse().map_err(|_| CliError::Usage(format!("bad strategy {:?}", self.strategy)))?;
        let variant = self.variant.parse().map_err(|_| CliError::Usage(format!("bad variant {:?}", self.variant)))?;
        if self.n_max as usize != self.levels.len() {
            return Err(CliError::Usage(format!("n_max {} but {} levels", self.n_max, self.levels.len())));
        }
        let levels = self
            .levels
            .iter()
            .map(|l| {
                Ok(LevelParams {
                    n: l.n,
                    k: l.k,
                    p: parse_big(&l.p, "p")?,
                    q: parse_big(&l.q, "q")?,
                    q_next: parse_big(&l.q_next, "q_next")?,
                    a: parse_big(&l.a, "A")?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Profile::from_rows(alpha, strategy, variant, levels)?)
    }
}

pub fn save_profile(p: &Profile, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&ProfileJson::from_profile(p))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_profile(path: &Path) -> Result<Profile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read profile {}: {e}", path.display())))?;
    let pj: ProfileJson = serde_json::from_str(&text)?;
    pj.to_profile()
}

/// A flat table plus the richer JSON document for the same result.
#[derive(Debug, Clone)]
pub struct Report {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
    /// `false` if a certificate in the result failed.
    pub ok: bool,
}

impl Report {
    pub fn new(headers: Vec<&'static str>) -> Self {
        Report { headers, rows: Vec::new(), json: Value::Null, ok: true }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Default JSON form: an array of objects keyed by the headers.
    pub fn rows_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let obj = self.headers.iter().zip(r).map(|(h, v)| (h.to_string(), Value::String(v.clone())));
                    Value::Object(obj.collect())
                })
                .collect(),
        )
    }

    pub fn write(&self, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
        match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.headers)?;
                for r in &self.rows {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
            OutputFormat::Json => {
                let doc = if self.json.is_null() { self.rows_json() } else { self.json.clone() };
                serde_json::to_writer_pretty(&mut *out, &doc)?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}
