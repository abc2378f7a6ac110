//! The result document and the human-readable quantities inside it.
//!
//! Memory sizes are printed in mebibytes with the suffix ` Mb`. Durations use
//! `S` below a minute and `M`, `H`, `D` above.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::ComplexityFamily;
use crate::models::{predict_at, BenchmarkResult, MeasurementSeries};

const MIB: f64 = 1024.0 * 1024.0;

pub fn format_duration(seconds: f64) -> String {
    let seconds = seconds.max(0.0);
    let (value, unit) = if seconds < 60.0 {
        (seconds, 'S')
    } else if seconds < 3600.0 {
        (seconds / 60.0, 'M')
    } else if seconds < 86_400.0 {
        (seconds / 3600.0, 'H')
    } else {
        (seconds / 86_400.0, 'D')
    };
    format!("{value:.2}{unit}")
}

/// Inverse of [`format_duration`], in seconds.
pub fn parse_duration(text: &str) -> Result<f64> {
    let bad = || Error::Precondition(format!("not a formatted duration: `{text}`"));
    let unit = text.chars().last().ok_or_else(bad)?;
    let scale = match unit {
        'S' => 1.0,
        'M' => 60.0,
        'H' => 3600.0,
        'D' => 86_400.0,
        _ => return Err(bad()),
    };
    let value: f64 = text[..text.len() - 1].parse().map_err(|_| bad())?;
    Ok(value * scale)
}

pub fn format_memory(bytes: f64) -> String {
    format!("{:.0} Mb", (bytes.max(0.0) / MIB).round())
}

/// Inverse of [`format_memory`], in bytes.
pub fn parse_memory(text: &str) -> Result<f64> {
    text.strip_suffix(" Mb")
        .and_then(|v| v.parse::<f64>().ok())
        .map(|mib| mib * MIB)
        .ok_or_else(|| Error::Precondition(format!("not a formatted memory size: `{text}`")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeResults {
    #[serde(rename = "best.model")]
    pub best_model: ComplexityFamily,
    #[serde(rename = "computation.time.on.full.dataset")]
    pub full_dataset_prediction: String,
    #[serde(rename = "p.value.model.significance")]
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryResults {
    #[serde(rename = "best.model")]
    pub best_model: ComplexityFamily,
    #[serde(rename = "memory.usage.on.full.dataset")]
    pub full_dataset_prediction: String,
    #[serde(rename = "system.memory.limit")]
    pub system_memory_limit: Option<String>,
    #[serde(rename = "p.value.model.significance")]
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    /// Replicate-expanded, in run order.
    #[serde(rename = "sample.sizes")]
    pub sample_sizes: Vec<usize>,
    #[serde(rename = "TIME COMPLEXITY RESULTS")]
    pub time: TimeResults,
    #[serde(
        rename = "MEMORY COMPLEXITY RESULTS",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub memory: Option<MemoryResults>,
    #[serde(default)]
    pub advisories: Vec<String>,
}

/// Extrapolates each resource's best model to `n_full` and assembles the
/// report. Without a memory result the memory section is omitted.
pub fn build_report(
    time_result: &BenchmarkResult,
    mem_result: Option<&BenchmarkResult>,
    n_full: usize,
    time_series: &MeasurementSeries,
    system_memory_limit: Option<u64>,
    advisories: Vec<String>,
) -> Result<ComplexityReport> {
    let time = TimeResults {
        best_model: time_result.best,
        full_dataset_prediction: format_duration(predict_at(time_result.best_model(), n_full)?),
        p_value: time_result.p_value,
    };
    let memory = mem_result
        .map(|m| -> Result<MemoryResults> {
            Ok(MemoryResults {
                best_model: m.best,
                full_dataset_prediction: format_memory(predict_at(m.best_model(), n_full)?),
                system_memory_limit: system_memory_limit.map(|b| format_memory(b as f64)),
                p_value: m.p_value,
            })
        })
        .transpose()?;
    Ok(ComplexityReport {
        sample_sizes: time_series.sizes().collect(),
        time,
        memory,
        advisories,
    })
}

/// Pretty JSON with fields in declaration order; an absent p-value is an
/// explicit `null`.
pub fn serialize_report(report: &ComplexityReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn parse_report(text: &str) -> Result<ComplexityReport> {
    Ok(serde_json::from_str(text)?)
}
