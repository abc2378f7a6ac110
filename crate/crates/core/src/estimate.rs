//! End-to-end estimation: campaign, fits, alerts and report.

use std::sync::atomic::AtomicBool;

use crate::dataset::Dataset;
use crate::error::Result;
use crate::measurement::{constant_alert, run_campaign_until, CampaignConfig, CampaignOutcome, TargetSpec};
use crate::models::{fit_all_with_alpha, BenchmarkResult, MeasurementSeries};
use crate::plot::{render_plot, PlotFormat, PlotSpec};
use crate::probe;
use crate::report::{build_report, ComplexityReport};

#[derive(Debug, Clone)]
pub struct Estimate {
    pub outcome: CampaignOutcome,
    pub time_series: MeasurementSeries,
    pub memory_series: Option<MeasurementSeries>,
    pub time: BenchmarkResult,
    pub memory: Option<BenchmarkResult>,
    pub report: ComplexityReport,
}

pub fn estimate(
    dataset: &Dataset,
    target: &mut TargetSpec,
    config: &CampaignConfig,
) -> Result<Estimate> {
    estimate_until(dataset, target, config, &AtomicBool::new(false))
}

pub fn estimate_until(
    dataset: &Dataset,
    target: &mut TargetSpec,
    config: &CampaignConfig,
    cancel: &AtomicBool,
) -> Result<Estimate> {
    let outcome = run_campaign_until(dataset, target, config, cancel)?;
    let time_series = outcome.time_series()?;
    let memory_series = outcome.memory_series()?;
    let time = fit_all_with_alpha(&time_series, config.alpha)?;
    let memory = memory_series
        .as_ref()
        .map(|s| fit_all_with_alpha(s, config.alpha))
        .transpose()?;

    let mut advisories = outcome.advisories.clone();
    if outcome.interrupted {
        advisories.push(format!(
            "interrupted: results cover the {} completed size(s) only",
            outcome.distinct_sizes()
        ));
    }
    advisories.extend(constant_alert(&time, config));
    if let Some(m) = &memory {
        advisories.extend(constant_alert(m, config));
    }

    let system_limit = memory.as_ref().and_then(|_| probe::system_memory_limit());
    let report = build_report(
        &time,
        memory.as_ref(),
        outcome.n_full,
        &time_series,
        system_limit,
        advisories,
    )?;
    Ok(Estimate {
        outcome,
        time_series,
        memory_series,
        time,
        memory,
        report,
    })
}

impl Estimate {
    /// Rendered time plot, then the memory plot when there is one.
    pub fn plots(&self, format: PlotFormat, subtitle: &str) -> Result<Vec<(String, String)>> {
        let mut plots = Vec::new();
        let pairs = std::iter::once((&self.time_series, &self.time)).chain(
            self.memory_series
                .as_ref()
                .zip(self.memory.as_ref()),
        );
        for (series, result) in pairs {
            let mut spec = PlotSpec::from_result(series, result);
            if !subtitle.is_empty() {
                spec = spec.with_subtitle(subtitle);
            }
            spec = spec.with_subtitle(format!(
                "best model {} ({}), p = {}",
                result.best,
                result.best.notation(),
                result.p_value.map_or("NA".to_owned(), |p| format!("{p:.3e}"))
            ));
            let label = series.resource().label().to_lowercase();
            plots.push((label, render_plot(&spec, format)?));
        }
        Ok(plots)
    }
}
