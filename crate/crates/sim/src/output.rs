//! CSV tables and the JSON run manifest.
//!
//! Files are written to a temporary sibling and renamed into place, so a
//! failed run never leaves a partial table behind.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::sweep::{RegionShape, SweepResult, SweepVariable};

pub const PCOW_HEADER: [&str; 5] =
    ["sweep_var", "p_cow_analytic_K", "p_cow_analytic_pairs", "p_cow_montecarlo", "mc_stderr"];
pub const SE_HEADER: [&str; 6] =
    ["sweep_var", "se_mode1", "se_mode2", "se_total", "se_total_steered", "se_fixed_uca_baseline"];
pub const CU_HEADER: [&str; 4] = ["sweep_var", "mean_cu_count", "p_cow_montecarlo", "mc_stderr"];
pub const BEAM_HEADER: [&str; 2] = ["r_meters", "intensity"];
pub const DEMO_HEADER: [&str; 6] = ["index", "r", "theta", "x", "y", "role"];

/// Writes `bytes` to `dir/name` atomically, creating `dir` if needed.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).map_err(|e| e.error)?;
    Ok(path)
}

pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Vec<u8>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

fn num(x: f64) -> String {
    x.to_string()
}

pub fn pcow_csv(result: &SweepResult) -> Vec<u8> {
    csv_bytes(
        &PCOW_HEADER,
        result.points.iter().map(|p| {
            [p.value, p.p_cow_analytic_per_user, p.p_cow_analytic_per_pair, p.p_cow_montecarlo, p.mc_stderr].map(num)
        }),
    )
}

pub fn se_csv(result: &SweepResult) -> Vec<u8> {
    csv_bytes(
        &SE_HEADER,
        result.points.iter().map(|p| {
            let mode = |i: usize| p.mean_se_per_mode.get(i).copied().unwrap_or(f64::NAN);
            [p.value, mode(0), mode(1), p.mean_se_total, p.mean_se_steered, p.mean_se_baseline].map(num)
        }),
    )
}

pub fn cu_csv(result: &SweepResult) -> Vec<u8> {
    csv_bytes(
        &CU_HEADER,
        result.points.iter().map(|p| [p.value, p.mean_cu_count, p.p_cow_montecarlo, p.mc_stderr].map(num)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub value: f64,
    pub analytic_per_user: f64,
    pub analytic_per_pair: f64,
    pub montecarlo: f64,
    pub mc_stderr: f64,
    pub deviation_per_user: f64,
    pub deviation_per_pair: f64,
}

/// Analytic versus Monte Carlo formation probability under both exponent
/// conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationTable {
    pub rows: Vec<DeviationRow>,
    pub max_deviation_per_user: f64,
    pub max_deviation_per_pair: f64,
    pub better_convention: String,
}

impl DeviationTable {
    pub fn from_result(result: &SweepResult) -> Self {
        let rows: Vec<DeviationRow> = result
            .points
            .iter()
            .map(|p| DeviationRow {
                value: p.value,
                analytic_per_user: p.p_cow_analytic_per_user,
                analytic_per_pair: p.p_cow_analytic_per_pair,
                montecarlo: p.p_cow_montecarlo,
                mc_stderr: p.mc_stderr,
                deviation_per_user: (p.p_cow_analytic_per_user - p.p_cow_montecarlo).abs(),
                deviation_per_pair: (p.p_cow_analytic_per_pair - p.p_cow_montecarlo).abs(),
            })
            .collect();
        let max_user = rows.iter().map(|r| r.deviation_per_user).fold(0.0, f64::max);
        let max_pair = rows.iter().map(|r| r.deviation_per_pair).fold(0.0, f64::max);
        let better = if max_pair < max_user { "per_pair" } else { "per_user" };
        Self {
            rows,
            max_deviation_per_user: max_user,
            max_deviation_per_pair: max_pair,
            better_convention: better.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamRecord {
    pub mode: i32,
    pub waist: f64,
    pub z: f64,
    pub r_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub git_describe: String,
    pub config: ConfigFile,
    pub seed: u64,
    pub workers: usize,
    pub region: RegionShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam: Option<BeamRecord>,
    pub outputs: Vec<String>,
    pub started_unix_secs: u64,
    pub wall_clock_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation_table: Option<DeviationTable>,
    /// Per-point details, including success counts and runtimes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<serde_json::Value>,
}

impl Manifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn read(path: &Path) -> io::Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("manifest serializes");
        out.push(b'\n');
        out
    }
}
