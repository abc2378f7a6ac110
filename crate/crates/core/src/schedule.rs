//! Geometric progression of sample sizes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_POWER_FACTOR: f64 = 2.0;

/// `floor(log2(n_full))`, never below 1. Datasets with fewer than two rows
/// get 1, which is too small to show any trend.
pub fn default_start_size(n_full: usize) -> usize {
    if n_full < 2 {
        return 1;
    }
    (n_full.ilog2() as usize).max(1)
}

/// Distinct, strictly increasing sample sizes ending at the full dataset
/// size. Replication is applied when the schedule is run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSchedule {
    sizes: Vec<usize>,
    replicates: usize,
}

impl SizeSchedule {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn with_replicates(mut self, replicates: usize) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        self.replicates = replicates;
        Ok(self)
    }

    /// Every size repeated once per replicate, in run order.
    pub fn expanded(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .flat_map(|&s| std::iter::repeat_n(s, self.replicates))
            .collect()
    }
}

/// `s0 = start_size`, `s(k+1) = min(floor(s(k) * power_factor), n_full)`,
/// forced to grow by at least one row so fractional factors cannot stall.
pub fn build_schedule(start_size: usize, power_factor: f64, n_full: usize) -> Result<SizeSchedule> {
    if start_size == 0 {
        return Err(Error::Precondition("start size must be at least 1".into()));
    }
    if start_size > n_full {
        return Err(Error::Precondition(format!(
            "start size {start_size} exceeds the dataset size {n_full}"
        )));
    }
    if !(power_factor.is_finite() && power_factor > 1.0) {
        return Err(Error::Config(format!(
            "power factor must be a finite number > 1, got {power_factor}"
        )));
    }

    let mut sizes = vec![start_size];
    let mut current = start_size;
    while current < n_full {
        let grown = (current as f64 * power_factor).floor();
        let next = if grown >= n_full as f64 {
            n_full
        } else {
            (grown as usize).max(current + 1)
        };
        sizes.push(next);
        current = next;
    }
    Ok(SizeSchedule {
        sizes,
        replicates: 1,
    })
}
