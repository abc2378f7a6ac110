//! Built-in targets with known complexity, used as ground truth and as
//! ready-made CLI targets.

use std::hint::black_box;
use std::time::Duration;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::family::ComplexityFamily;
use crate::measurement::{Invocation, Target};
use crate::sampling::rng_for;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SortStats {
    pub comparisons: u64,
    pub swaps: u64,
}

/// Bubble sort, ascending. With `early_exit` a pass without swaps ends the
/// sort; without it every pass runs, which is the worst case for timing.
pub fn bubble_sort(v: &mut [f64], early_exit: bool) -> SortStats {
    let mut stats = SortStats::default();
    let n = v.len();
    for pass in 0..n.saturating_sub(1) {
        let mut swapped = false;
        for i in 0..n - 1 - pass {
            stats.comparisons += 1;
            if v[i] > v[i + 1] {
                v.swap(i, i + 1);
                stats.swaps += 1;
                swapped = true;
            }
        }
        if early_exit && !swapped {
            break;
        }
    }
    stats
}

/// Bubble sort without data-dependent branches: each pass carries the larger
/// element forward with `min`/`max`. Same passes and comparisons as
/// [`bubble_sort`] without early exit.
pub fn bubble_sort_branchless(v: &mut [f64]) {
    let n = v.len();
    for pass in 0..n.saturating_sub(1) {
        let end = n - 1 - pass;
        let mut carry = v[0];
        for i in 0..end {
            let next = v[i + 1];
            v[i] = carry.min(next);
            carry = carry.max(next);
        }
        v[end] = carry;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxResult {
    pub value: f64,
    pub comparisons: u64,
}

/// Linear scan for the maximum: exactly `n - 1` comparisons.
pub fn find_max(v: &[f64]) -> Result<MaxResult> {
    let (&first, rest) = v
        .split_first()
        .ok_or_else(|| Error::Domain("find_max of an empty sequence".into()))?;
    let mut value = first;
    let mut comparisons = 0u64;
    for &x in rest {
        comparisons += 1;
        if x > value {
            value = x;
        }
    }
    Ok(MaxResult { value, comparisons })
}

/// Triple nested accumulation over the input: `n^3` inner iterations and
/// `n` accumulators. The inner loop carries a running value from slot to
/// slot, so it executes serially. Returns the iteration count.
pub fn permutations_probe(v: &[f64]) -> (u64, Vec<f64>) {
    let n = v.len();
    let mut acc = vec![0.0f64; n];
    let mut iterations = 0u64;
    for &a in v {
        for &b in v {
            let ab = black_box(a * b);
            let mut carry = 0.0;
            for slot in acc.iter_mut() {
                carry = carry * 0.5 + ab;
                *slot += carry;
            }
            iterations += n as u64;
        }
    }
    (iterations, acc)
}

/// Sorted keys searched as an implicit balanced binary search tree.
#[derive(Debug, Clone, Default)]
pub struct BalancedIndex {
    keys: Vec<f64>,
}

impl BalancedIndex {
    pub fn build(values: &[f64]) -> Self {
        let mut keys = values.to_vec();
        keys.sort_by(f64::total_cmp);
        Self { keys }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Descends the tree toward `needle` and returns the number of nodes
/// visited: at most `floor(log2 n) + 1`.
pub fn tree_split_probe(index: &BalancedIndex, needle: f64) -> usize {
    let keys = &index.keys;
    let (mut lo, mut hi) = (0usize, keys.len());
    let mut steps = 0;
    while lo < hi {
        steps += 1;
        let mid = lo + (hi - lo) / 2;
        match keys[mid].total_cmp(&needle) {
            std::cmp::Ordering::Equal => break,
            std::cmp::Ordering::Less => lo = mid + 1,
            std::cmp::Ordering::Greater => hi = mid,
        }
    }
    steps
}

/// Gaps `4^k + 3 * 2^(k-1) + 1` (1, 8, 23, 77, 281, ...), largest first,
/// which bound the worst case at `O(n^(4/3))`.
pub fn shell_gaps(n: usize) -> Vec<usize> {
    let mut gaps = vec![1usize];
    for k in 1u32.. {
        let gap = 4usize.pow(k) + 3 * 2usize.pow(k - 1) + 1;
        if gap >= n {
            break;
        }
        gaps.push(gap);
    }
    gaps.reverse();
    gaps
}

pub fn shell_sort(v: &mut [f64]) -> SortStats {
    let mut stats = SortStats::default();
    for gap in shell_gaps(v.len()) {
        for i in gap..v.len() {
            let item = v[i];
            let mut j = i;
            while j >= gap {
                stats.comparisons += 1;
                if v[j - gap] <= item {
                    break;
                }
                v[j] = v[j - gap];
                stats.swaps += 1;
                j -= gap;
            }
            v[j] = item;
        }
    }
    stats
}

/// Percentage of predictions equal to the truth.
pub fn accuracy(predictions: &[ComplexityFamily], truth: ComplexityFamily) -> Result<f64> {
    accuracy_within(predictions, &[truth])
}

/// Percentage of predictions falling in `accepted`.
pub fn accuracy_within(predictions: &[ComplexityFamily], accepted: &[ComplexityFamily]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::Precondition("accuracy of zero predictions".into()));
    }
    let hits = predictions.iter().filter(|p| accepted.contains(p)).count();
    Ok(100.0 * hits as f64 / predictions.len() as f64)
}

/// `n` uniform values in `[0, 1)` for run `seed`.
pub fn random_values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(Some(seed), 0);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

fn numeric(sample: &Dataset) -> Result<&[f64], String> {
    sample
        .first_numeric()
        .ok_or_else(|| "the sample has no numeric column".to_owned())
}

fn require_numeric(name: &str, dataset: &Dataset) -> Result<()> {
    if dataset.first_numeric().is_none() {
        return Err(Error::Config(format!(
            "builtin target `{name}` needs a dataset with a numeric column"
        )));
    }
    Ok(())
}

macro_rules! numeric_target {
    ($ty:ident, $name:literal, |$v:ident| $body:expr) => {
        #[derive(Debug, Default)]
        pub struct $ty;

        impl Target for $ty {
            fn name(&self) -> &str {
                $name
            }

            fn validate(&self, dataset: &Dataset) -> Result<()> {
                require_numeric($name, dataset)
            }

            fn invoke(&mut self, sample: &Dataset) -> Result<Invocation, String> {
                let $v = numeric(sample)?;
                $body
            }
        }
    };
}

/// Independent sorts per bubble_sort invocation.
const BUBBLE_SORT_ROUNDS: usize = 8;

numeric_target!(BubbleSortTarget, "bubble_sort", |v| {
    let mut sorted = Vec::new();
    for _ in 0..BUBBLE_SORT_ROUNDS {
        sorted = v.to_vec();
        bubble_sort_branchless(black_box(&mut sorted));
    }
    Ok(Invocation::with_output(sorted))
});

/// Full scans per find_max invocation.
const FIND_MAX_PASSES: usize = 512;

numeric_target!(FindMaxTarget, "find_max", |v| {
    for _ in 0..FIND_MAX_PASSES {
        let max = find_max(black_box(v)).map_err(|e| e.to_string())?;
        black_box(max);
    }
    Ok(Invocation::done())
});

numeric_target!(PermutationsTarget, "permutations", |v| {
    let (iterations, acc) = permutations_probe(v);
    black_box(iterations);
    Ok(Invocation::with_output(acc))
});

numeric_target!(ShellSortTarget, "shell_sort", |v| {
    let mut sorted = v.to_vec();
    black_box(shell_sort(&mut sorted));
    Ok(Invocation::with_output(sorted))
});

#[derive(Debug, Default)]
pub struct NoopTarget;

impl Target for NoopTarget {
    fn name(&self) -> &str {
        "noop"
    }

    fn invoke(&mut self, sample: &Dataset) -> Result<Invocation, String> {
        black_box(sample);
        Ok(Invocation::done())
    }
}

/// Lookups per invocation; a single descent is too fast to time.
const TREE_LOOKUPS: usize = 1024;

/// Balanced-tree lookups whose index is built untimed in `prepare`. Each
/// invocation also reserves `8 * n * ln(n)` bytes as a memory proxy.
#[derive(Debug, Default)]
pub struct TreeSplitTarget {
    index: BalancedIndex,
}

impl Target for TreeSplitTarget {
    fn name(&self) -> &str {
        "tree_split"
    }

    fn validate(&self, dataset: &Dataset) -> Result<()> {
        require_numeric("tree_split", dataset)
    }

    fn prepare(&mut self, sample: &Dataset) -> Result<(), String> {
        self.index = BalancedIndex::build(numeric(sample)?);
        Ok(())
    }

    fn invoke(&mut self, sample: &Dataset) -> Result<Invocation, String> {
        let v = numeric(sample)?;
        let mut steps = 0usize;
        for i in 0..TREE_LOOKUPS {
            steps += tree_split_probe(&self.index, v[i % v.len()]);
        }
        black_box(steps);
        let n = v.len() as f64;
        let proxy: Vec<u8> = Vec::with_capacity((8.0 * n * n.ln()) as usize);
        Ok(Invocation::with_output(black_box(proxy)))
    }
}

/// Mean and spread of a synthetic sleep as functions of `n`:
/// `mean = mean_base + mean_scale * g(n)`, `sd = sd_base + sd_scale * g(n)`
/// with `g` the time family's transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub mean_base: f64,
    pub mean_scale: f64,
    pub sd_base: f64,
    pub sd_scale: f64,
}

/// A target that sleeps according to a time family plus Gaussian noise and
/// allocates `g_space(n) * u` doubles with `u ~ U(1000, 1100)`.
#[derive(Debug)]
pub struct SyntheticTarget {
    name: String,
    time_family: ComplexityFamily,
    space_family: Option<ComplexityFamily>,
    noise: NoiseSpec,
    rng: ChaCha8Rng,
    simulated: bool,
}

impl SyntheticTarget {
    pub fn new(
        name: impl Into<String>,
        time_family: ComplexityFamily,
        space_family: Option<ComplexityFamily>,
        noise: NoiseSpec,
        seed: Option<u64>,
    ) -> Result<Self> {
        let fields = [noise.mean_base, noise.mean_scale, noise.sd_base, noise.sd_scale];
        if fields.iter().any(|f| !f.is_finite()) || noise.sd_base < 0.0 || noise.sd_scale < 0.0 {
            return Err(Error::Config(format!("invalid noise specification {noise:?}")));
        }
        Ok(Self {
            name: name.into(),
            time_family,
            space_family,
            noise,
            rng: rng_for(seed, 0x5EED),
            simulated: false,
        })
    }

    /// About 0.1 s per call regardless of size, `n ln n` memory.
    pub fn constant_time_nlogn_memory(seed: Option<u64>) -> Self {
        let noise = NoiseSpec {
            mean_base: 0.1,
            mean_scale: 0.0,
            sd_base: 0.02,
            sd_scale: 0.0,
        };
        Self::new(
            "synthetic_nlogn_memory",
            ComplexityFamily::Constant,
            Some(ComplexityFamily::NLogN),
            noise,
            seed,
        )
        .expect("preset noise is valid")
    }

    /// `0.1 + n/500` seconds with standard deviation `n/2000`.
    pub fn noisy_linear(seed: Option<u64>) -> Self {
        let noise = NoiseSpec {
            mean_base: 0.1,
            mean_scale: 1.0 / 500.0,
            sd_base: 0.0,
            sd_scale: 1.0 / 2000.0,
        };
        Self::new("synthetic_noisy_linear", ComplexityFamily::Linear, None, noise, seed)
            .expect("preset noise is valid")
    }

    /// Doubles the invocation allocates for `n` rows and spread draw `u`.
    pub fn allocation_doubles(space: ComplexityFamily, n: usize, u: f64) -> usize {
        (space.transform_real(n as f64) * u).max(0.0) as usize
    }

    fn draw_seconds(&mut self, n: usize) -> f64 {
        let g = self.time_family.transform_real(n as f64);
        let mean = self.noise.mean_base + self.noise.mean_scale * g;
        let sd = self.noise.sd_base + self.noise.sd_scale * g;
        let value = if sd > 0.0 {
            Normal::new(mean, sd)
                .expect("sd checked positive and finite")
                .sample(&mut self.rng)
        } else {
            mean
        };
        value.max(0.0)
    }
}

impl Target for SyntheticTarget {
    fn name(&self) -> &str {
        &self.name
    }

    fn set_simulated(&mut self, simulated: bool) {
        self.simulated = simulated;
    }

    fn invoke(&mut self, sample: &Dataset) -> Result<Invocation, String> {
        let n = sample.len().max(1);
        let seconds = self.draw_seconds(n);
        if !self.simulated {
            std::thread::sleep(Duration::from_secs_f64(seconds));
        }
        let mut invocation = Invocation::done().virtual_time(seconds);
        if let Some(space) = self.space_family {
            let u = self.rng.random_range(1000.0..1100.0);
            let doubles = Self::allocation_doubles(space, n, u);
            invocation.output = Some(Box::new(black_box(vec![0.0f64; doubles])));
        }
        Ok(invocation)
    }
}

/// A paragon and the complexity it is known to have.
pub struct ParagonTarget {
    pub name: &'static str,
    /// `None` when the true class is outside the seven families.
    pub true_time_family: Option<ComplexityFamily>,
    pub true_space_family: ComplexityFamily,
    /// Families counted as a correct time prediction.
    pub accepted_time: &'static [ComplexityFamily],
    /// Dataset size that runs well inside a 5 s step budget.
    pub default_rows: usize,
    pub make: fn() -> Box<dyn Target>,
}

impl ParagonTarget {
    /// The standard input for run number `seed`.
    pub fn generate(&self, n: usize, seed: u64) -> Dataset {
        Dataset::from_values(random_values(n, seed))
    }
}

use ComplexityFamily as F;

pub fn paragons() -> [ParagonTarget; 5] {
    [
        ParagonTarget {
            name: "bubble_sort",
            true_time_family: Some(F::Quadratic),
            true_space_family: F::Linear,
            accepted_time: &[F::Quadratic],
            default_rows: 1 << 12,
            make: || Box::new(BubbleSortTarget),
        },
        ParagonTarget {
            name: "find_max",
            true_time_family: Some(F::Linear),
            true_space_family: F::Constant,
            accepted_time: &[F::Linear],
            default_rows: 1 << 17,
            make: || Box::new(FindMaxTarget),
        },
        ParagonTarget {
            name: "permutations",
            true_time_family: Some(F::Cubic),
            true_space_family: F::Linear,
            accepted_time: &[F::Cubic],
            default_rows: 400,
            make: || Box::new(PermutationsTarget),
        },
        ParagonTarget {
            name: "tree_split",
            true_time_family: Some(F::Log),
            true_space_family: F::NLogN,
            accepted_time: &[F::Log, F::Constant],
            default_rows: 1 << 16,
            make: || Box::new(TreeSplitTarget::default()),
        },
        ParagonTarget {
            name: "shell_sort",
            true_time_family: None,
            true_space_family: F::Linear,
            accepted_time: &[F::NLogN, F::Linear],
            default_rows: 1 << 18,
            make: || Box::new(ShellSortTarget),
        },
    ]
}

pub const BUILTIN_NAMES: [&str; 8] = [
    "bubble_sort",
    "find_max",
    "permutations",
    "tree_split",
    "shell_sort",
    "noop",
    "synthetic_nlogn_memory",
    "synthetic_noisy_linear",
];

/// Looks up a built-in target by name. `seed` drives the synthetic targets.
pub fn builtin(name: &str, seed: Option<u64>) -> Result<Box<dyn Target>> {
    let target: Box<dyn Target> = match name {
        "noop" => Box::new(NoopTarget),
        "synthetic_nlogn_memory" => Box::new(SyntheticTarget::constant_time_nlogn_memory(seed)),
        "synthetic_noisy_linear" => Box::new(SyntheticTarget::noisy_linear(seed)),
        _ => match paragons().into_iter().find(|p| p.name == name) {
            Some(p) => (p.make)(),
            None => {
                return Err(Error::Config(format!(
                    "unknown builtin target `{name}`; available: {}",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        },
    };
    Ok(target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bubble_examples() {
        let mut v = [3.0, 1.0, 2.0];
        bubble_sort(&mut v, false);
        assert_eq!(v, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn bubble_best_and_worst_case_counts() {
        let mut sorted: Vec<f64> = (0..1000).map(f64::from).collect();
        assert_eq!(bubble_sort(&mut sorted, true).comparisons, 999);
        assert_eq!(bubble_sort(&mut sorted, false).comparisons, 1000 * 999 / 2);

        let mut reversed: Vec<f64> = (0..100).rev().map(f64::from).collect();
        let stats = bubble_sort(&mut reversed, false);
        assert_eq!(stats.swaps, 4950);
        assert_eq!(stats.comparisons, 4950);
    }

    #[test]
    fn branchless_bubble_agrees_with_bubble() {
        for seed in 0..5 {
            let mut a = random_values(300, seed);
            let mut b = a.clone();
            bubble_sort(&mut a, false);
            bubble_sort_branchless(&mut b);
            assert_eq!(a, b);
        }
        let mut empty: [f64; 0] = [];
        bubble_sort_branchless(&mut empty);
        let mut one = [4.0];
        bubble_sort_branchless(&mut one);
        assert_eq!(one, [4.0]);
    }

    #[test]
    fn find_max_examples() {
        assert_eq!(find_max(&[5.0]).unwrap().value, 5.0);
        let r = find_max(&[1.0, 9.0, 3.0]).unwrap();
        assert_eq!(r.value, 9.0);
        assert_eq!(r.comparisons, 2);
        assert!(matches!(find_max(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn find_max_agrees_with_sorting() {
        let v = random_values(10_000, 3);
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let r = find_max(&v).unwrap();
        assert_eq!(r.value, *sorted.last().unwrap());
        assert_eq!(r.comparisons, 9_999);
    }

    #[test]
    fn permutation_iterations_are_cubic() {
        assert_eq!(permutations_probe(&[1.0]).0, 1);
        assert_eq!(permutations_probe(&random_values(10, 1)).0, 1000);
        assert_eq!(permutations_probe(&random_values(10, 1)).1.len(), 10);
    }

    #[test]
    fn tree_probe_depth() {
        let one = BalancedIndex::build(&[4.0]);
        assert_eq!(tree_split_probe(&one, 4.0), 1);
        assert_eq!(tree_split_probe(&one, 7.0), 1);
        for k in 0..16u32 {
            let n = 1usize << k;
            let index = BalancedIndex::build(&random_values(n, u64::from(k)));
            for needle in random_values(200, 99) {
                assert!(tree_split_probe(&index, needle) as u32 <= k + 1);
            }
        }
    }

    #[test]
    fn shell_sort_examples() {
        let mut v = [2.0, 1.0];
        shell_sort(&mut v);
        assert_eq!(v, [1.0, 2.0]);

        let mut v = random_values(10_000, 8);
        let mut oracle = v.clone();
        oracle.sort_by(f64::total_cmp);
        shell_sort(&mut v);
        assert_eq!(v, oracle);
    }

    #[test]
    fn shell_gap_sequence() {
        assert_eq!(shell_gaps(1000), [281, 77, 23, 8, 1]);
        assert_eq!(shell_gaps(1), [1]);
    }

    #[test]
    fn accuracy_examples() {
        let mut preds = vec![F::Quadratic; 97];
        preds.extend([F::Cubic; 3]);
        assert_eq!(accuracy(&preds, F::Quadratic).unwrap(), 97.0);
        assert_eq!(accuracy(&[F::Linear; 5], F::Linear).unwrap(), 100.0);
        assert_eq!(accuracy(&[F::Linear; 5], F::Cubic).unwrap(), 0.0);
        assert!(accuracy(&[], F::Cubic).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let p = &paragons()[0];
        assert_eq!(p.generate(50, 4), p.generate(50, 4));
        assert_ne!(p.generate(50, 4), p.generate(50, 5));
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let err = builtin("quicksoup", None).err().unwrap();
        let msg = err.to_string();
        assert!(msg.contains("quicksoup") && msg.contains("bubble_sort"), "{msg}");
        for name in BUILTIN_NAMES {
            assert_eq!(builtin(name, Some(1)).unwrap().name(), name);
        }
    }

    #[test]
    fn synthetic_sleep_is_clamped_at_zero() {
        let noise = NoiseSpec {
            mean_base: -10.0,
            mean_scale: 0.0,
            sd_base: 0.1,
            sd_scale: 0.0,
        };
        let mut t = SyntheticTarget::new("neg", F::Constant, None, noise, Some(1)).unwrap();
        t.set_simulated(true);
        let d = Dataset::from_values(vec![0.0; 4]);
        for _ in 0..20 {
            assert_eq!(t.invoke(&d).unwrap().virtual_seconds, Some(0.0));
        }
    }

    #[test]
    fn synthetic_allocation_size() {
        let mut t = SyntheticTarget::constant_time_nlogn_memory(Some(2));
        t.set_simulated(true);
        let d = Dataset::from_values(vec![0.0; 32]);
        let inv = t.invoke(&d).unwrap();
        let v = inv.output.unwrap().downcast::<Vec<f64>>().unwrap();
        let base = 32.0 * 32f64.ln();
        assert!(v.len() as f64 >= base * 1000.0 && (v.len() as f64) < base * 1100.0);
    }
}
