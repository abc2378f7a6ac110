//! Per-step subsets of the dataset: head, uniform random, or stratified with
//! at least one row per category.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const RHEAD_DEFAULT_ROWS: usize = 7;

/// A reproducible generator for draw number `stream` under `seed`. ChaCha is
/// counter based, so each stream is an independent split of the same seed.
/// Without a seed the generator is seeded from the OS.
pub fn rng_for(seed: Option<u64>, stream: u64) -> ChaCha8Rng {
    let mut rng = match seed {
        Some(s) => ChaCha8Rng::seed_from_u64(s),
        None => ChaCha8Rng::from_os_rng(),
    };
    rng.set_stream(stream);
    rng
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::Precondition("sample size must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// The first `k` rows in original order; `k` past the end is clamped.
pub fn sample_head(d: &Dataset, k: usize) -> Result<Dataset> {
    check_k(k)?;
    Ok(d.head(k))
}

/// `k` rows uniformly without replacement, in draw order.
pub fn sample_random(d: &Dataset, k: usize, seed: Option<u64>) -> Result<Dataset> {
    sample_random_with(d, k, &mut rng_for(seed, 0))
}

pub fn sample_random_with<R: Rng + ?Sized>(d: &Dataset, k: usize, rng: &mut R) -> Result<Dataset> {
    check_k(k)?;
    let k = k.min(d.len());
    let rows = index::sample(rng, d.len(), k).into_vec();
    Ok(d.take(&rows))
}

/// Rows taken from a category holding `count` rows at sampling `fraction`:
/// `max(1, round(fraction * count))` with halves rounded up.
pub fn stratum_quota(fraction: f64, count: usize) -> usize {
    let quota = (fraction * count as f64 + 0.5).floor() as usize;
    quota.clamp(1, count)
}

pub fn sample_stratified(
    d: &Dataset,
    fraction: f64,
    strata_column: &str,
    seed: Option<u64>,
) -> Result<Dataset> {
    sample_stratified_with(d, fraction, strata_column, &mut rng_for(seed, 0))
}

/// Draws `stratum_quota` rows at random from every category of
/// `strata_column`, so no category present in `d` is ever missing from the
/// sample. Selected rows keep their original relative order.
pub fn sample_stratified_with<R: Rng + ?Sized>(
    d: &Dataset,
    fraction: f64,
    strata_column: &str,
    rng: &mut R,
) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "sampling fraction must be in (0, 1], got {fraction}"
        )));
    }
    let codes = d.categories(strata_column)?;
    let categories = codes.iter().max().map_or(0, |&m| m as usize + 1);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); categories];
    for (row, &code) in codes.iter().enumerate() {
        groups[code as usize].push(row);
    }

    let mut rows = Vec::new();
    for group in groups.iter().filter(|g| !g.is_empty()) {
        let quota = stratum_quota(fraction, group.len());
        rows.extend(
            index::sample(rng, group.len(), quota)
                .into_iter()
                .map(|i| group[i]),
        );
    }
    rows.sort_unstable();
    Ok(d.take(&rows))
}

/// A small look at a dataset: `k` rows (default 7), random or from the head.
pub fn rhead(d: &Dataset, k: usize, is_random: bool, seed: Option<u64>) -> Result<Dataset> {
    if is_random {
        sample_random(d, k, seed)
    } else {
        sample_head(d, k)
    }
}

/// [`rhead`] for a flat sequence.
pub fn rhead_slice<T: Clone>(v: &[T], k: usize, is_random: bool, seed: Option<u64>) -> Result<Vec<T>> {
    check_k(k)?;
    let k = k.min(v.len());
    if is_random {
        let mut rng = rng_for(seed, 0);
        Ok(index::sample(&mut rng, v.len(), k)
            .into_iter()
            .map(|i| v[i].clone())
            .collect())
    } else {
        Ok(v[..k].to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMode {
    Head,
    Random,
    Stratified { column: String },
}

/// How each campaign step draws its subset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingStrategy {
    pub mode: SamplingMode,
    pub seed: Option<u64>,
}

impl SamplingStrategy {
    pub fn head() -> Self {
        Self {
            mode: SamplingMode::Head,
            seed: None,
        }
    }

    /// Checks the strategy against the dataset before any run starts.
    pub fn validate(&self, d: &Dataset) -> Result<()> {
        if let SamplingMode::Stratified { column } = &self.mode {
            d.categories(column)?;
        }
        Ok(())
    }

    /// Subset for a scheduled `size`. `draw` numbers the draws of a campaign
    /// so every replicate gets its own reproducible random stream.
    pub fn draw(&self, d: &Dataset, size: usize, draw: u64) -> Result<Dataset> {
        match &self.mode {
            SamplingMode::Head => sample_head(d, size),
            SamplingMode::Random => sample_random_with(d, size, &mut rng_for(self.seed, draw)),
            SamplingMode::Stratified { column } => {
                let fraction = (size as f64 / d.len() as f64).min(1.0);
                sample_stratified_with(d, fraction, column, &mut rng_for(self.seed, draw))
            }
        }
    }

    /// Whether replicates at one size see different rows.
    pub fn is_random(&self) -> bool {
        !matches!(self.mode, SamplingMode::Head)
    }
}
