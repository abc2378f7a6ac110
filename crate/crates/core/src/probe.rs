//! Memory probes and process memory readings.

use std::fs;

use serde::{Deserialize, Serialize};

use crate::alloc::{self, AllocRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryProbe {
    /// Net and peak heap bytes from the tracking allocator.
    AllocTracking,
    /// Resident-set difference; for child processes, their peak resident set.
    RssDelta,
    /// No memory series.
    Disabled,
}

impl MemoryProbe {
    pub fn is_enabled(self) -> bool {
        self != MemoryProbe::Disabled
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MemoryReading {
    pub delta: u64,
    pub peak: u64,
}

/// Best-effort return of freed heap pages to the OS before an RSS reading.
pub fn reclaim() {
    #[cfg(all(target_os = "linux", target_env = "gnu"))]
    unsafe {
        libc::malloc_trim(0);
    }
}

fn page_size() -> u64 {
    #[cfg(unix)]
    {
        let size = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
        if size > 0 {
            return size as u64;
        }
    }
    4096
}

/// Current resident set of this process in bytes.
pub fn resident_bytes() -> Option<u64> {
    let statm = fs::read_to_string("/proc/self/statm").ok()?;
    let pages: u64 = statm.split_whitespace().nth(1)?.parse().ok()?;
    Some(pages * page_size())
}

fn status_kib(field: &str) -> Option<u64> {
    let status = fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix(field))
        .and_then(|rest| rest.trim().trim_end_matches("kB").trim().parse().ok())
}

fn reset_peak_resident() {
    let _ = fs::write("/proc/self/clear_refs", "5");
}

/// Total physical memory, used as the report's system memory limit.
pub fn system_memory_limit() -> Option<u64> {
    let meminfo = fs::read_to_string("/proc/meminfo").ok()?;
    meminfo
        .lines()
        .find_map(|l| l.strip_prefix("MemTotal:"))
        .and_then(|rest| rest.trim().trim_end_matches("kB").trim().parse::<u64>().ok())
        .map(|kib| kib * 1024)
}

/// An in-process reading in progress.
pub(crate) enum OpenReading {
    Alloc(AllocRegion),
    Rss { before: u64 },
    Off,
}

impl OpenReading {
    pub(crate) fn begin(probe: MemoryProbe) -> Self {
        match probe {
            MemoryProbe::AllocTracking => OpenReading::Alloc(AllocRegion::begin()),
            MemoryProbe::RssDelta => {
                reclaim();
                reset_peak_resident();
                OpenReading::Rss {
                    before: resident_bytes().unwrap_or(0),
                }
            }
            MemoryProbe::Disabled => OpenReading::Off,
        }
    }

    pub(crate) fn finish(self) -> MemoryReading {
        match self {
            OpenReading::Alloc(region) => {
                let r = region.finish();
                let delta = r.net.max(0) as u64;
                MemoryReading {
                    delta,
                    peak: r.peak.max(delta),
                }
            }
            OpenReading::Rss { before } => {
                reclaim();
                let after = resident_bytes().unwrap_or(before);
                let delta = after.saturating_sub(before);
                let high_water = status_kib("VmHWM:").map_or(0, |k| k * 1024);
                MemoryReading {
                    delta,
                    peak: high_water.saturating_sub(before).max(delta),
                }
            }
            OpenReading::Off => MemoryReading::default(),
        }
    }
}

/// Whether the allocation probe can work in this process.
pub fn alloc_tracking_available() -> bool {
    alloc::is_tracking()
}
