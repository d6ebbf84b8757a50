//! Result rows and the CSV/JSON emitters.
//!
//! Every command emits the same column set so one plotting script can read
//! any output file; metrics a command does not produce stay null (empty CSV
//! cell, JSON `null`), never zero.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::NetworkConfig;

/// One grid point of results: the input echo plus whichever metrics the
/// command produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub k: Option<u32>,
    pub lambda: Option<u32>,
    pub t: Option<u32>,
    pub gamma: Option<f64>,
    pub policy: Option<String>,
    pub h: Option<u32>,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
    pub rho_achieved: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub profile: Option<String>,
    pub j: Option<u32>,
    pub cdf: Option<f64>,
    pub delay: Option<f64>,
    pub exact: Option<f64>,
    pub t_min: Option<f64>,
    pub g: Option<f64>,
    pub aub: Option<f64>,
    pub alb: Option<f64>,
    pub nlb: Option<f64>,
    pub nub: Option<f64>,
    pub paub: Option<f64>,
    pub naub: Option<f64>,
    pub nalb: Option<f64>,
    pub sbn_mean: Option<f64>,
    pub sbn_stderr: Option<f64>,
    /// Half-width of the 95% confidence interval.
    pub sbn_ci: Option<f64>,
    pub e_l1: Option<f64>,
    pub normalizer: Option<f64>,
    pub normalized_g: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub warning: Option<String>,
    pub error: Option<String>,
}

impl ResultRow {
    /// Input echo for one network configuration.
    pub fn for_config(cfg: &NetworkConfig) -> Self {
        ResultRow {
            k: Some(cfg.users()),
            lambda: Some(cfg.caches()),
            t: Some(cfg.redundancy()),
            gamma: Some(cfg.gamma()),
            ..ResultRow::default()
        }
    }
}

pub const CSV_COLUMNS: [&str; 34] = [
    "k",
    "lambda",
    "t",
    "gamma",
    "policy",
    "h",
    "alpha",
    "rho",
    "rho_achieved",
    "seed",
    "samples",
    "profile",
    "j",
    "cdf",
    "delay",
    "exact",
    "t_min",
    "g",
    "aub",
    "alb",
    "nlb",
    "nub",
    "paub",
    "naub",
    "nalb",
    "sbn_mean",
    "sbn_stderr",
    "sbn_ci",
    "e_l1",
    "normalizer",
    "normalized_g",
    "runtime_ms",
    "warning",
    "error",
];

/// Plain-decimal rendering with 12 significant digits, trailing zeros
/// trimmed.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (11 - mag).clamp(0, 40) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt_u32(v: Option<u32>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

fn opt_str(v: &Option<String>) -> String {
    v.clone().unwrap_or_default()
}

impl ResultRow {
    fn to_record(&self) -> Vec<String> {
        vec![
            opt_u32(self.k),
            opt_u32(self.lambda),
            opt_u32(self.t),
            opt_f64(self.gamma),
            opt_str(&self.policy),
            opt_u32(self.h),
            opt_f64(self.alpha),
            opt_f64(self.rho),
            opt_f64(self.rho_achieved),
            opt_u64(self.seed),
            opt_u64(self.samples),
            opt_str(&self.profile),
            opt_u32(self.j),
            opt_f64(self.cdf),
            opt_f64(self.delay),
            opt_f64(self.exact),
            opt_f64(self.t_min),
            opt_f64(self.g),
            opt_f64(self.aub),
            opt_f64(self.alb),
            opt_f64(self.nlb),
            opt_f64(self.nub),
            opt_f64(self.paub),
            opt_f64(self.naub),
            opt_f64(self.nalb),
            opt_f64(self.sbn_mean),
            opt_f64(self.sbn_stderr),
            opt_f64(self.sbn_ci),
            opt_f64(self.e_l1),
            opt_f64(self.normalizer),
            opt_f64(self.normalized_g),
            opt_f64(self.runtime_ms),
            opt_str(&self.warning),
            opt_str(&self.error),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Writes results as RFC-4180 CSV with a header row.
pub fn emit_csv(rows: &[ResultRow], writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(CSV_COLUMNS)?;
    for row in rows {
        csv.write_record(row.to_record())?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes results as a JSON array: a metadata object (tool version, seed,
/// UTC ISO-8601 timestamp) followed by one object per row.
///
/// Setting `SOURCE_DATE_EPOCH` pins the timestamp so output files are
/// byte-reproducible.
pub fn emit_json(rows: &[ResultRow], seed: Option<u64>, writer: impl Write) -> Result<()> {
    let metadata = serde_json::json!({
        "tool": "cachecalc",
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "generated_at": timestamp(),
    });
    let mut items = Vec::with_capacity(rows.len() + 1);
    items.push(metadata);
    for row in rows {
        items.push(serde_json::to_value(row)?);
    }
    let mut writer = writer;
    serde_json::to_writer_pretty(&mut writer, &items)?;
    writer.write_all(b"\n")?;
    Ok(())
}

fn timestamp() -> String {
    use chrono::{DateTime, Utc};
    let now: DateTime<Utc> = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(epoch) => epoch
            .parse::<i64>()
            .ok()
            .and_then(|s| DateTime::from_timestamp(s, 0))
            .unwrap_or_else(Utc::now),
        Err(_) => Utc::now(),
    };
    now.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Writes rows to `path` (or stdout when `None`) in the chosen format.
pub fn emit(
    rows: &[ResultRow],
    format: OutputFormat,
    path: Option<&Path>,
    seed: Option<u64>,
) -> Result<()> {
    let write_to = |w: Box<dyn Write>| -> Result<()> {
        match format {
            OutputFormat::Csv => emit_csv(rows, w),
            OutputFormat::Json => emit_json(rows, seed, w),
        }
    };
    match path {
        None => write_to(Box::new(std::io::stdout().lock())),
        Some(p) => {
            let file = std::fs::File::create(p).map_err(|source| Error::OutputIo {
                path: p.display().to_string(),
                source,
            })?;
            write_to(Box::new(std::io::BufWriter::new(file))).map_err(|e| match e {
                Error::Io(source) => Error::OutputIo {
                    path: p.display().to_string(),
                    source,
                },
                other => other,
            })
        }
    }
}

/// Reads rows back from an emitted JSON document, skipping the leading
/// metadata object.
pub fn parse_json_rows(reader: impl std::io::Read) -> Result<Vec<ResultRow>> {
    let items: Vec<serde_json::Value> = serde_json::from_reader(reader)?;
    items
        .into_iter()
        .skip(1)
        .map(|v| serde_json::from_value(v).map_err(Error::from))
        .collect()
}
