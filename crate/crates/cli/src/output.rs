//! Output schemas. Every JSON document carries `schema_version`; CSV
//! layouts are fixed by their header rows.

use std::io::Write;

use poisson_lab::gas::ThermoPoint;
use poisson_lab::process::RarityPoint;
use poisson_lab::stats::{CountHistogram, GofResult};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Process parameters shared by every `verify` check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessParameters {
    pub rate: f64,
    pub horizon: f64,
    pub replicas: u64,
    pub seed: u64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub alpha: f64,
    pub passed: bool,
    pub parameters: ProcessParameters,
    #[serde(flatten)]
    pub outcome: CheckOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", content = "result", rename_all = "snake_case")]
pub enum CheckOutcome {
    Poisson(PoissonOutcome),
    Uniformity(UniformityOutcome),
    Rarity(RarityOutcome),
    Independence(IndependenceOutcome),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonOutcome {
    pub mu: f64,
    pub mean: f64,
    pub variance: f64,
    pub gof: GofResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityOutcome {
    pub total_count: u64,
    pub bins: usize,
    pub matched_replicas: u64,
    pub pooled_times: u64,
    pub gof: GofResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RarityOutcome {
    pub points: Vec<RarityRow>,
    /// Empirical ratios strictly decrease with the width.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RarityRow {
    #[serde(flatten)]
    pub point: RarityPoint,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependenceOutcome {
    pub first: [f64; 2],
    pub second: [f64; 2],
    pub correlation: Option<f64>,
    pub std_error: f64,
    pub z: Option<f64>,
    pub p_value: Option<f64>,
}

/// One row of the `simplex` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexRow {
    pub dimension: u64,
    pub exact: f64,
    pub recursive: f64,
    pub mc: f64,
    pub mc_std_error: f64,
    pub mc_hits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexReport {
    pub schema_version: u32,
    pub extent: f64,
    pub quad_steps: usize,
    pub mc_samples: u64,
    pub seed: u64,
    pub rows: Vec<SimplexRow>,
}

/// One element of the `limit` array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub n: u64,
    pub tv: f64,
}

/// Geometry of a fixed-`N` gas run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasParameters {
    pub particles: u64,
    pub volume: f64,
    pub sub_volumes: Vec<f64>,
    pub replicas: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalOutcome {
    pub p: f64,
    pub mean: f64,
    pub variance: f64,
    pub gof: GofResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasBinomialReport {
    pub schema_version: u32,
    pub parameters: GasParameters,
    #[serde(flatten)]
    pub outcome: MarginalOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasMultinomialReport {
    pub schema_version: u32,
    pub parameters: GasParameters,
    /// `v_i / V` per region, then the remainder.
    pub probabilities: Vec<f64>,
    pub gof: GofResult,
    pub marginals: Vec<MarginalOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningReportOut {
    pub schema_version: u32,
    pub density: f64,
    pub volume: f64,
    pub sub_volume: f64,
    pub total: u64,
    pub density_replicas: u64,
    pub fixed_replicas: u64,
    pub seed: u64,
    pub matched_replicas: u64,
    pub test: GofResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoReport {
    pub schema_version: u32,
    pub density: f64,
    pub sub_volume: f64,
    pub points: Vec<ThermoPoint>,
}

/// `count,frequency` rows for every count from 0 to the largest observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub count: u64,
    pub frequency: u64,
}

pub fn histogram_rows(hist: &CountHistogram) -> Vec<HistogramRow> {
    let max = hist.max_count().unwrap_or(0);
    (0..=max)
        .map(|count| HistogramRow {
            count,
            frequency: hist.frequency(count),
        })
        .collect()
}

pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
