//! The campaign loop: sample, invoke the target once, record wall time and
//! memory, and stop once a whole size step runs over its time budget.

use std::hint::black_box;
use std::any::Any;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetFormat};
use crate::error::{Error, Result};
use crate::family::ComplexityFamily;
use crate::models::{BenchmarkResult, MeasurementSeries, Observation, Resource, DEFAULT_ALPHA};
use crate::probe::{self, MemoryProbe, MemoryReading, OpenReading};
use crate::sampling::{SamplingMode, SamplingStrategy};
use crate::schedule::{build_schedule, default_start_size, SizeSchedule, DEFAULT_POWER_FACTOR};

pub const DEFAULT_REPLICATES: usize = 4;
pub const DEFAULT_MAX_TIME_SECS: f64 = 30.0;

/// Placeholder an external command template must contain exactly once.
pub const INPUT_PLACEHOLDER: &str = "{input}";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    /// `None` means `floor(log2(n_full))`.
    pub start_size: Option<usize>,
    pub power_factor: f64,
    pub replicates: usize,
    /// Budget in seconds for all replicates of one size.
    pub max_time_per_step: f64,
    pub random_sampling: bool,
    pub strata: Option<String>,
    pub alpha: f64,
    pub plot: bool,
    pub seed: Option<u64>,
    /// `None` picks per target: allocation tracking in process, RSS for
    /// external commands.
    pub probe: Option<MemoryProbe>,
    /// Use the cost a target reports instead of the wall clock.
    pub simulate_time: bool,
    /// One untimed invocation at the smallest size before measuring.
    pub warmup: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            start_size: None,
            power_factor: DEFAULT_POWER_FACTOR,
            replicates: DEFAULT_REPLICATES,
            max_time_per_step: DEFAULT_MAX_TIME_SECS,
            random_sampling: false,
            strata: None,
            alpha: DEFAULT_ALPHA,
            plot: true,
            seed: None,
            probe: None,
            simulate_time: false,
            warmup: true,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if !(self.max_time_per_step > 0.0) {
            return Err(Error::Config(format!(
                "max time per step must be positive, got {}",
                self.max_time_per_step
            )));
        }
        if !(self.power_factor.is_finite() && self.power_factor > 1.0) {
            return Err(Error::Config(format!(
                "power factor must be > 1, got {}",
                self.power_factor
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.start_size == Some(0) {
            return Err(Error::Config("start size must be at least 1".into()));
        }
        Ok(())
    }

    pub fn sampling(&self) -> SamplingStrategy {
        let mode = match (&self.strata, self.random_sampling) {
            (Some(column), _) => SamplingMode::Stratified {
                column: column.clone(),
            },
            (None, true) => SamplingMode::Random,
            (None, false) => SamplingMode::Head,
        };
        SamplingStrategy {
            mode,
            seed: self.seed,
        }
    }
}

/// What one invocation left behind. `output` stays alive until the memory
/// reading is taken and is dropped afterwards.
#[derive(Default)]
pub struct Invocation {
    pub output: Option<Box<dyn Any>>,
    pub virtual_seconds: Option<f64>,
}

impl Invocation {
    pub fn done() -> Self {
        Self::default()
    }

    pub fn with_output<T: Any>(output: T) -> Self {
        Self {
            output: Some(Box::new(output)),
            virtual_seconds: None,
        }
    }

    pub fn virtual_time(mut self, seconds: f64) -> Self {
        self.virtual_seconds = Some(seconds);
        self
    }
}

/// Code run in-process on a sampled dataset. The return value is discarded.
pub trait Target {
    fn name(&self) -> &str;

    /// Rejects datasets the target cannot consume, before any run.
    fn validate(&self, _dataset: &Dataset) -> Result<()> {
        Ok(())
    }

    /// Untimed per-invocation setup on the sample.
    fn prepare(&mut self, _sample: &Dataset) -> Result<(), String> {
        Ok(())
    }

    fn invoke(&mut self, sample: &Dataset) -> Result<Invocation, String>;

    /// Switches targets that can report a virtual cost into that mode.
    fn set_simulated(&mut self, _simulated: bool) {}
}

/// Adapts a closure into a [`Target`].
pub struct FnTarget<F> {
    name: String,
    f: F,
}

impl<F> FnTarget<F>
where
    F: FnMut(&Dataset) -> Result<(), String>,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        Self {
            name: name.into(),
            f,
        }
    }
}

impl<F> Target for FnTarget<F>
where
    F: FnMut(&Dataset) -> Result<(), String>,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn invoke(&mut self, sample: &Dataset) -> Result<Invocation, String> {
        (self.f)(sample).map(|()| Invocation::done())
    }
}

/// A shell command run once per measurement on a sample file.
#[derive(Debug)]
pub struct ExternalCommand {
    template: String,
    scratch: Option<tempfile::TempDir>,
    keep_samples: bool,
    counter: u64,
}

impl ExternalCommand {
    pub fn parse(template: &str) -> Result<Self> {
        match template.matches(INPUT_PLACEHOLDER).count() {
            1 => Ok(Self {
                template: template.to_owned(),
                scratch: None,
                keep_samples: false,
                counter: 0,
            }),
            0 => Err(Error::Config(format!(
                "command template has no {INPUT_PLACEHOLDER} placeholder: `{template}`"
            ))),
            n => Err(Error::Config(format!(
                "command template has {n} {INPUT_PLACEHOLDER} placeholders, expected one: `{template}`"
            ))),
        }
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    /// Leave sample files on disk after the run.
    pub fn keep_samples(mut self, keep: bool) -> Self {
        self.keep_samples = keep;
        self
    }

    fn write_sample(&mut self, sample: &Dataset) -> Result<PathBuf> {
        if self.scratch.is_none() {
            self.scratch = Some(tempfile::Builder::new().prefix("compx-").tempdir()?);
        }
        let dir = self.scratch.as_ref().expect("scratch dir created above").path();
        let ext = match sample.format() {
            DatasetFormat::Csv => "csv",
            DatasetFormat::Lines => "txt",
            DatasetFormat::Bytes { .. } => "bin",
        };
        self.counter += 1;
        let path = dir.join(format!("sample-{:05}-{}.{ext}", self.counter, sample.len()));
        let mut out = BufWriter::new(File::create(&path)?);
        sample.write_native(&mut out)?;
        out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        Ok(path)
    }

    fn command_line(&self, input: &std::path::Path) -> String {
        let quoted = format!("'{}'", input.display().to_string().replace('\'', r"'\''"));
        self.template.replacen(INPUT_PLACEHOLDER, &quoted, 1)
    }

    /// Runs the command on `input`; returns wall seconds and the child's peak
    /// resident set in bytes.
    fn run(&self, input: &std::path::Path) -> Result<(f64, u64), String> {
        let line = self.command_line(input);
        let mut command = Command::new("sh");
        command
            .arg("-c")
            .arg(&line)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null());

        let started = Instant::now();
        let child = command
            .spawn()
            .map_err(|e| format!("cannot start `{line}`: {e}"))?;
        let (status, max_rss) = wait_child(child)?;
        let elapsed = started.elapsed().as_secs_f64();
        if status != 0 {
            return Err(format!("`{line}` exited with status {status}"));
        }
        Ok((elapsed, max_rss))
    }
}

impl Drop for ExternalCommand {
    fn drop(&mut self) {
        if self.keep_samples {
            if let Some(dir) = self.scratch.take() {
                let path = dir.keep();
                eprintln!("sample files kept in {}", path.display());
            }
        }
    }
}

/// Reaps the child and returns (exit status, peak RSS bytes).
#[cfg(unix)]
fn wait_child(child: std::process::Child) -> Result<(i32, u64), String> {
    let pid = child.id() as libc::pid_t;
    let mut status: libc::c_int = 0;
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    loop {
        let rc = unsafe { libc::wait4(pid, &mut status, 0, &mut usage) };
        if rc == pid {
            break;
        }
        let err = std::io::Error::last_os_error();
        if err.kind() != std::io::ErrorKind::Interrupted {
            return Err(format!("wait failed: {err}"));
        }
    }
    let code = if libc::WIFEXITED(status) {
        libc::WEXITSTATUS(status)
    } else {
        128 + libc::WTERMSIG(status)
    };
    // ru_maxrss is in KiB on Linux.
    Ok((code, usage.ru_maxrss.max(0) as u64 * 1024))
}

#[cfg(not(unix))]
fn wait_child(mut child: std::process::Child) -> Result<(i32, u64), String> {
    let status = child.wait().map_err(|e| e.to_string())?;
    Ok((status.code().unwrap_or(1), 0))
}

pub enum TargetSpec {
    /// A paragon from the built-in suite.
    Builtin(Box<dyn Target>),
    /// Caller-supplied code.
    InProcess(Box<dyn Target>),
    External(ExternalCommand),
}

impl TargetSpec {
    pub fn name(&self) -> String {
        match self {
            TargetSpec::Builtin(t) | TargetSpec::InProcess(t) => t.name().to_owned(),
            TargetSpec::External(cmd) => cmd.template().to_owned(),
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, TargetSpec::External(_))
    }

    pub fn default_probe(&self) -> MemoryProbe {
        if self.is_external() {
            MemoryProbe::RssDelta
        } else {
            MemoryProbe::AllocTracking
        }
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        match self {
            TargetSpec::Builtin(t) | TargetSpec::InProcess(t) => t.validate(dataset),
            TargetSpec::External(_) => Ok(()),
        }
    }

    fn set_simulated(&mut self, simulated: bool) {
        if let TargetSpec::Builtin(t) | TargetSpec::InProcess(t) = self {
            t.set_simulated(simulated);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub size: usize,
    /// 1-based.
    pub replicate: usize,
    pub elapsed: f64,
    pub mem_delta: u64,
    pub mem_peak: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub size: usize,
    pub replicate: usize,
    pub simulate_time: bool,
}

/// Times exactly one invocation of `target` on an already materialized
/// sample, with the memory probe bracketing the same region.
pub fn measure_once(
    target: &mut TargetSpec,
    sample: &Dataset,
    probe: MemoryProbe,
    step: Step,
) -> Result<Measurement> {
    let fail = |target: &TargetSpec, message: String| Error::Target {
        target: target.name(),
        size: step.size,
        message,
    };

    let (elapsed, memory) = match target {
        TargetSpec::Builtin(t) | TargetSpec::InProcess(t) => {
            if let Err(message) = t.prepare(sample) {
                return Err(Error::Target {
                    target: t.name().to_owned(),
                    size: step.size,
                    message,
                });
            }
            let reading = OpenReading::begin(probe);
            // Bring the clock path back into cache after sampling evicted it.
            black_box(Instant::now());
            let started = Instant::now();
            let outcome = t.invoke(sample);
            let wall = started.elapsed().as_secs_f64();
            let memory = reading.finish();
            let invocation = outcome.map_err(|message| Error::Target {
                target: t.name().to_owned(),
                size: step.size,
                message,
            })?;
            let elapsed = match invocation.virtual_seconds {
                Some(v) if step.simulate_time => v.max(0.0),
                _ => wall,
            };
            drop(invocation);
            (elapsed, memory)
        }
        TargetSpec::External(cmd) => {
            let path = cmd.write_sample(sample)?;
            let run = cmd.run(&path);
            if !cmd.keep_samples {
                let _ = std::fs::remove_file(&path);
            }
            let (wall, max_rss) = run.map_err(|m| fail(target, m))?;
            let memory = if probe.is_enabled() {
                MemoryReading {
                    delta: max_rss,
                    peak: max_rss,
                }
            } else {
                MemoryReading::default()
            };
            (wall, memory)
        }
    };

    Ok(Measurement {
        size: step.size,
        replicate: step.replicate,
        elapsed,
        mem_delta: memory.delta,
        mem_peak: memory.peak,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub n_full: usize,
    pub schedule: SizeSchedule,
    pub measurements: Vec<Measurement>,
    pub probe: MemoryProbe,
    /// A step ran over `max_time_per_step` and later sizes were skipped.
    pub stopped_early: bool,
    /// The run was cancelled between invocations.
    pub interrupted: bool,
    pub advisories: Vec<String>,
}

impl CampaignOutcome {
    /// Sizes actually measured, replicate-expanded, in run order.
    pub fn sizes_used(&self) -> Vec<usize> {
        self.measurements.iter().map(|m| m.size).collect()
    }

    pub fn distinct_sizes(&self) -> usize {
        let mut sizes = self.sizes_used();
        sizes.dedup();
        sizes.len()
    }

    pub fn time_series(&self) -> Result<MeasurementSeries> {
        MeasurementSeries::new(
            Resource::Time,
            self.measurements
                .iter()
                .map(|m| Observation {
                    size: m.size,
                    value: m.elapsed,
                })
                .collect(),
        )
    }

    /// Peak bytes per invocation; `None` when the probe was disabled.
    pub fn memory_series(&self) -> Result<Option<MeasurementSeries>> {
        if !self.probe.is_enabled() {
            return Ok(None);
        }
        MeasurementSeries::new(
            Resource::Memory,
            self.measurements
                .iter()
                .map(|m| Observation {
                    size: m.size,
                    value: m.mem_peak as f64,
                })
                .collect(),
        )
        .map(Some)
    }
}

pub fn run_campaign(
    dataset: &Dataset,
    target: &mut TargetSpec,
    config: &CampaignConfig,
) -> Result<CampaignOutcome> {
    run_campaign_until(dataset, target, config, &AtomicBool::new(false))
}

/// [`run_campaign`] that also stops, keeping completed sizes, once `cancel`
/// is set. The flag is checked between invocations.
pub fn run_campaign_until(
    dataset: &Dataset,
    target: &mut TargetSpec,
    config: &CampaignConfig,
    cancel: &AtomicBool,
) -> Result<CampaignOutcome> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::Precondition("the dataset is empty".into()));
    }
    let n_full = dataset.len();
    let sampling = config.sampling();
    sampling.validate(dataset)?;
    target.validate(dataset)?;
    target.set_simulated(config.simulate_time);

    let mut advisories = Vec::new();
    let probe = resolve_probe(config.probe, target, &mut advisories);

    let start = config.start_size.unwrap_or_else(|| default_start_size(n_full));
    let schedule = build_schedule(start, config.power_factor, n_full)?
        .with_replicates(config.replicates)?;

    let mut draw = 0u64;
    if config.warmup {
        let sample = sampling.draw(dataset, schedule.sizes()[0], u64::MAX)?;
        let step = Step {
            size: schedule.sizes()[0],
            replicate: 0,
            simulate_time: config.simulate_time,
        };
        measure_once(target, &sample, probe, step)?;
    }

    let mut measurements = Vec::new();
    let mut stopped_early = false;
    let mut interrupted = false;
    'sizes: for &size in schedule.sizes() {
        let mut completed = Vec::with_capacity(config.replicates);
        let mut head_sample = None;
        for replicate in 1..=config.replicates {
            if cancel.load(Ordering::Relaxed) {
                interrupted = true;
                break 'sizes;
            }
            let sample = if sampling.is_random() {
                draw += 1;
                sampling.draw(dataset, size, draw)?
            } else {
                match head_sample.take() {
                    Some(s) => s,
                    None => sampling.draw(dataset, size, 0)?,
                }
            };
            let step = Step {
                size,
                replicate,
                simulate_time: config.simulate_time,
            };
            completed.push(measure_once(target, &sample, probe, step)?);
            if !sampling.is_random() {
                head_sample = Some(sample);
            }
        }
        let step_total: f64 = completed.iter().map(|m| m.elapsed).sum();
        measurements.extend(completed);
        if step_total > config.max_time_per_step {
            stopped_early = size != n_full;
            break;
        }
    }

    let outcome = CampaignOutcome {
        n_full,
        schedule,
        measurements,
        probe,
        stopped_early,
        interrupted,
        advisories,
    };
    if outcome.distinct_sizes() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} distinct sample size(s) completed before the {} s step limit; \
             at least 3 are needed. Raise the max time per step or lower the start size",
            outcome.distinct_sizes(),
            config.max_time_per_step
        )));
    }
    Ok(outcome)
}

fn resolve_probe(
    requested: Option<MemoryProbe>,
    target: &TargetSpec,
    advisories: &mut Vec<String>,
) -> MemoryProbe {
    let probe = requested.unwrap_or_else(|| target.default_probe());
    match probe {
        MemoryProbe::AllocTracking if target.is_external() => {
            advisories.push(
                "allocation tracking cannot see inside an external command; \
                 using the child's peak resident set instead"
                    .into(),
            );
            MemoryProbe::RssDelta
        }
        MemoryProbe::AllocTracking if !probe::alloc_tracking_available() => {
            advisories.push(
                "the tracking allocator is not installed; falling back to resident-set deltas"
                    .into(),
            );
            MemoryProbe::RssDelta
        }
        other => other,
    }
}

/// Advice for results that show no usable trend: a CONSTANT winner or a
/// winner that is not significant at `alpha`.
pub fn constant_alert(result: &BenchmarkResult, config: &CampaignConfig) -> Option<String> {
    let label = result.resource.label();
    let remedy = format!(
        "the max time per step ({} s) may be too low to show any tendency; \
         consider raising it, lowering the start size, or raising the replicates (now {})",
        config.max_time_per_step, config.replicates
    );
    if result.best == ComplexityFamily::Constant {
        return Some(format!("{label}: best model is CONSTANT; {remedy}"));
    }
    if !result.significant {
        let p = result.p_value.map_or("NA".to_owned(), |p| format!("{p:e}"));
        return Some(format!(
            "{label}: non-significant best model {} (p = {p}, alpha = {}); {remedy}",
            result.best, config.alpha
        ));
    }
    None
}
