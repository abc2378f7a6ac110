//! `compx` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{ingest_dataset, DatasetFormat};
use crate::error::{Error, Result};
use crate::estimate::estimate_until;
use crate::measurement::{
    CampaignConfig, ExternalCommand, TargetSpec, DEFAULT_MAX_TIME_SECS, DEFAULT_REPLICATES,
};
use crate::models::DEFAULT_ALPHA;
use crate::paragon::{builtin, BUILTIN_NAMES};
use crate::plot::PlotFormat;
use crate::probe::MemoryProbe;
use crate::report::serialize_report;
use crate::schedule::DEFAULT_POWER_FACTOR;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAMPAIGN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "compx", version, about = "Estimate the time and memory complexity of a program from measured runs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a campaign on a dataset and print the report.
    Run(RunArgs),
    /// List the built-in targets.
    Builtins,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Lines,
    Bytes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeArg {
    Alloc,
    Rss,
    Off,
}

impl From<ProbeArg> for MemoryProbe {
    fn from(p: ProbeArg) -> Self {
        match p {
            ProbeArg::Alloc => MemoryProbe::AllocTracking,
            ProbeArg::Rss => MemoryProbe::RssDelta,
            ProbeArg::Off => MemoryProbe::Disabled,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Dataset file.
    pub dataset: PathBuf,
    /// `builtin:<name>` or `exec:<command with {input}>`.
    #[arg(long)]
    pub target: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Record size for `--format bytes`.
    #[arg(long, default_value_t = 1)]
    pub record_bytes: usize,
    /// First sample size; defaults to floor(log2(rows)).
    #[arg(long)]
    pub start_size: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_POWER_FACTOR)]
    pub power_factor: f64,
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,
    /// Seconds allowed for all replicates of one size.
    #[arg(long, default_value_t = DEFAULT_MAX_TIME_SECS)]
    pub max_time: f64,
    #[arg(long)]
    pub random_sampling: bool,
    /// Categorical column to stratify samples on.
    #[arg(long)]
    pub strata: Option<String>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long)]
    pub no_plot: bool,
    /// Report path; plots go to `<out>.time.svg` and `<out>.memory.svg`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "COMPX_SEED")]
    pub seed: Option<u64>,
    /// Memory probe; alloc for builtins and rss for exec targets by default.
    #[arg(long, value_enum)]
    pub probe: Option<ProbeArg>,
    /// Synthetic targets report their modelled cost instead of sleeping.
    #[arg(long)]
    pub simulate_time: bool,
    /// Keep the sample files written for exec targets.
    #[arg(long)]
    pub keep_samples: bool,
    /// Skip the untimed warm-up invocation.
    #[arg(long)]
    pub no_warmup: bool,
}

impl RunArgs {
    pub fn config(&self) -> CampaignConfig {
        CampaignConfig {
            start_size: self.start_size,
            power_factor: self.power_factor,
            replicates: self.replicates,
            max_time_per_step: self.max_time,
            random_sampling: self.random_sampling,
            strata: self.strata.clone(),
            alpha: self.alpha,
            plot: !self.no_plot,
            seed: self.seed,
            probe: self.probe.map(MemoryProbe::from),
            simulate_time: self.simulate_time,
            warmup: !self.no_warmup,
        }
    }

    pub fn dataset_format(&self) -> DatasetFormat {
        match self.format {
            FormatArg::Csv => DatasetFormat::Csv,
            FormatArg::Lines => DatasetFormat::Lines,
            FormatArg::Bytes => DatasetFormat::Bytes {
                record_bytes: self.record_bytes,
            },
        }
    }
}

/// Parses `builtin:<name>` or `exec:<template>`.
pub fn resolve_target(spec: &str, seed: Option<u64>, keep_samples: bool) -> Result<TargetSpec> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin(name, seed).map(TargetSpec::Builtin);
    }
    if let Some(template) = spec.strip_prefix("exec:") {
        return Ok(TargetSpec::External(
            ExternalCommand::parse(template)?.keep_samples(keep_samples),
        ));
    }
    Err(Error::Config(format!(
        "target must be `builtin:<name>` or `exec:<command>`, got `{spec}`"
    )))
}

static INTERRUPTED: AtomicBool = AtomicBool::new(false);

fn install_interrupt_handler() {
    // A second install in the same process fails; the first handler stays.
    let _ = ctrlc::set_handler(|| INTERRUPTED.store(true, Ordering::SeqCst));
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn run(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let config = args.config();
    config.validate()?;
    let dataset = ingest_dataset(&args.dataset, args.dataset_format())?;
    let mut target = resolve_target(&args.target, args.seed, args.keep_samples)?;

    install_interrupt_handler();
    let estimate = estimate_until(&dataset, &mut target, &config, &INTERRUPTED)?;

    for advisory in &estimate.report.advisories {
        writeln!(stderr, "warning: {advisory}")?;
    }

    let document = serialize_report(&estimate.report)?;
    match &args.out {
        Some(path) => std::fs::write(path, format!("{document}\n"))?,
        None => writeln!(stdout, "{document}")?,
    }

    if config.plot {
        let subtitle = format!("{} on {}", target.name(), args.dataset.display());
        match &args.out {
            Some(path) => {
                for (label, svg) in estimate.plots(PlotFormat::Svg, &subtitle)? {
                    std::fs::write(with_suffix(path, &format!(".{label}.svg")), svg)?;
                }
            }
            None => {
                for (_, text) in estimate.plots(PlotFormat::Terminal, &subtitle)? {
                    writeln!(stderr, "{text}")?;
                }
            }
        }
    }
    Ok(())
}

/// Runs the CLI and returns the process exit status. The report goes to
/// `stdout` (or `--out`); advisories and diagnostics go to `stderr`.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    match cli.command {
        Command::Builtins => {
            for name in BUILTIN_NAMES {
                let _ = writeln!(stdout, "{name}");
            }
            EXIT_OK
        }
        Command::Run(args) => match run(&args, stdout, stderr) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                if e.is_configuration() {
                    EXIT_CONFIG
                } else {
                    EXIT_CAMPAIGN
                }
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunArgs {
        let mut argv = vec!["compx", "run"];
        argv.extend_from_slice(args);
        match Cli::try_parse_from(argv).unwrap().command {
            Command::Run(a) => a,
            Command::Builtins => unreachable!(),
        }
    }

    #[test]
    fn flag_defaults_match_campaign_defaults() {
        let args = parse(&["data.csv", "--target", "builtin:noop"]);
        let config = args.config();
        let defaults = CampaignConfig::default();
        assert_eq!(config.power_factor, defaults.power_factor);
        assert_eq!(config.replicates, defaults.replicates);
        assert_eq!(config.max_time_per_step, defaults.max_time_per_step);
        assert_eq!(config.alpha, defaults.alpha);
        assert_eq!(config.random_sampling, defaults.random_sampling);
        assert_eq!(config.plot, defaults.plot);
        assert_eq!(config.start_size, None);
        assert_eq!(config.probe, None);
        assert_eq!(args.dataset_format(), DatasetFormat::Csv);
    }

    #[test]
    fn flags_map_onto_config() {
        let args = parse(&[
            "d.txt", "--target", "builtin:noop", "--format", "lines", "--start-size", "3",
            "--power-factor", "1.5", "--replicates", "10", "--max-time", "5",
            "--random-sampling", "--alpha", "0.01", "--no-plot", "--seed", "9", "--probe", "rss",
        ]);
        let c = args.config();
        assert_eq!(c.start_size, Some(3));
        assert_eq!(c.power_factor, 1.5);
        assert_eq!(c.replicates, 10);
        assert_eq!(c.max_time_per_step, 5.0);
        assert!(c.random_sampling);
        assert_eq!(c.alpha, 0.01);
        assert!(!c.plot);
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.probe, Some(MemoryProbe::RssDelta));
        assert_eq!(args.dataset_format(), DatasetFormat::Lines);
    }

    #[test]
    fn target_resolution() {
        assert!(matches!(
            resolve_target("builtin:find_max", None, false).unwrap(),
            TargetSpec::Builtin(t) if t.name() == "find_max"
        ));
        assert!(matches!(
            resolve_target("exec:sort {input} -o /dev/null", None, false).unwrap(),
            TargetSpec::External(_)
        ));
        let err = resolve_target("builtin:quicksoup", None, false).err().unwrap();
        assert!(err.to_string().contains("available"));
        assert!(resolve_target("exec:sort data", None, false).is_err());
        assert!(resolve_target("exec:cat {input} {input}", None, false).is_err());
        assert!(resolve_target("python:foo", None, false).is_err());
    }
}
