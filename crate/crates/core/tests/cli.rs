use std::path::Path;
use std::process::{Command, Output};
use std::sync::Mutex;

use compx::report::parse_report;
use compx::ComplexityFamily;

/// Campaigns time wall clock, so runs must not overlap.
static SERIAL: Mutex<()> = Mutex::new(());

fn compx(args: &[&str]) -> Output {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    Command::new(env!("CARGO_BIN_EXE_compx"))
        .args(args)
        .env_remove("COMPX_SEED")
        .output()
        .unwrap()
}

fn write_values(dir: &Path, n: usize) -> String {
    let path = dir.join("values.csv");
    let mut text = String::from("value\n");
    let mut x: u64 = 0x9E37_79B9_7F4A_7C15;
    for _ in 0..n {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        text.push_str(&format!("{}\n", x % 100_000));
    }
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn bubble_sort_is_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_values(dir.path(), 4096);
    // Ten replicates per size average out bursts of host noise.
    let out = compx(&[
        "run", &data, "--target", "builtin:bubble_sort", "--no-plot", "--max-time", "5",
        "--replicates", "10",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = parse_report(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.time.best_model, ComplexityFamily::Quadratic);
    assert!(report.time.p_value.unwrap() < 0.005);
    assert!(report.memory.is_some());
    assert_eq!(*report.sample_sizes.last().unwrap(), 4096);
}

#[test]
fn out_writes_report_and_svg_plots() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_values(dir.path(), 256);
    let out_path = dir.path().join("report.json");
    let out = compx(&[
        "run", &data, "--target", "builtin:synthetic_noisy_linear", "--simulate-time",
        "--seed", "4", "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let report = parse_report(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report.sample_sizes.len(), 4 * 6);
    for suffix in ["report.json.time.svg", "report.json.memory.svg"] {
        let svg = std::fs::read_to_string(dir.path().join(suffix)).unwrap();
        assert!(svg.contains("data-best=\"true\""));
    }
}

#[test]
fn seeded_simulated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_values(dir.path(), 512);
    let args = [
        "run", &data, "--target", "builtin:synthetic_noisy_linear", "--simulate-time",
        "--random-sampling", "--seed", "42", "--no-plot", "--probe", "off",
    ];
    let a = compx(&args);
    let b = compx(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("MEMORY COMPLEXITY RESULTS"));
}

#[test]
fn missing_dataset_is_a_configuration_error() {
    let out = compx(&["run", "/nonexistent/data.csv", "--target", "builtin:noop"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/data.csv"));
}

#[test]
fn bad_flags_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_values(dir.path(), 64);
    for args in [
        vec!["run", data.as_str(), "--target", "builtin:nothing"],
        vec!["run", data.as_str(), "--target", "builtin:noop", "--power-factor", "1"],
        vec!["run", data.as_str(), "--target", "builtin:noop", "--strata", "value"],
        vec!["run", data.as_str(), "--target", "exec:cat data.csv"],
        vec!["run", data.as_str()],
    ] {
        let out = compx(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[cfg(unix)]
#[test]
fn failing_command_reports_the_size() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_values(dir.path(), 64);
    let out = compx(&["run", &data, "--target", "exec:false {input}", "--no-plot"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("size 6"), "{stderr}");
}

#[test]
fn builtins_are_listed() {
    let out = compx(&["builtins"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["bubble_sort", "find_max", "permutations", "tree_split", "shell_sort", "noop"] {
        assert!(text.lines().any(|l| l == name), "{name}");
    }
}

#[test]
fn terminal_plots_go_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_values(dir.path(), 128);
    let out = compx(&[
        "run", &data, "--target", "builtin:synthetic_noisy_linear", "--simulate-time", "--seed", "1",
        "--probe", "off",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("TIME complexity fit"), "{stderr}");
    parse_report(&String::from_utf8(out.stdout).unwrap()).unwrap();
}
