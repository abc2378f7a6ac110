#![allow(dead_code)]

use std::path::PathBuf;

use compx::{ComplexityFamily, MeasurementSeries, Resource};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

/// Reads a `size,value` fixture into a series.
pub fn load_series(name: &str, resource: Resource) -> MeasurementSeries {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    let pairs: Vec<(usize, f64)> = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (s, v) = l.split_once(',').unwrap();
            (s.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    MeasurementSeries::from_pairs(resource, &pairs).unwrap()
}

/// Leave-one-out MSE by refitting on every `n - 1` subset. Uses the plain
/// normal equations so it shares no code with the library.
pub fn brute_force_loo(family: ComplexityFamily, pairs: &[(usize, f64)]) -> f64 {
    let g = |n: usize| family.transform_real(n as f64);
    let mut total = 0.0;
    for i in 0..pairs.len() {
        let rest: Vec<(f64, f64)> = pairs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &(n, y))| (g(n), y))
            .collect();
        let m = rest.len() as f64;
        let my = rest.iter().map(|p| p.1).sum::<f64>() / m;
        let prediction = if family == ComplexityFamily::Constant {
            my
        } else {
            let mx = rest.iter().map(|p| p.0).sum::<f64>() / m;
            let sxx: f64 = rest.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            let sxy: f64 = rest.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let b = sxy / sxx;
            my + b * (g(pairs[i].0) - mx)
        };
        total += (pairs[i].1 - prediction).powi(2);
    }
    total / pairs.len() as f64
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Sizes 4, 8, ..., 128 with value `3 + 2 g(n)`.
pub fn noiseless_series(family: ComplexityFamily) -> MeasurementSeries {
    let pairs: Vec<(usize, f64)> = [4usize, 8, 16, 32, 64, 128]
        .iter()
        .map(|&n| (n, 3.0 + 2.0 * family.transform_real(n as f64)))
        .collect();
    MeasurementSeries::from_pairs(Resource::Time, &pairs).unwrap()
}
