mod common;

use common::load_series;
use compx::models::{predict_at, significance_test, DEFAULT_ALPHA};
use compx::plot::{render_plot, PlotFormat, PlotSpec};
use compx::report::{build_report, format_duration, format_memory, parse_report, serialize_report};
use compx::{fit_all, ComplexityFamily, Resource};

const MIB: f64 = 1024.0 * 1024.0;

#[test]
fn linear_time_fixture() {
    let series = load_series("linear_time_8602.csv", Resource::Time);
    let result = fit_all(&series).unwrap();
    assert_eq!(result.best, ComplexityFamily::Linear);
    let s = significance_test(result.best_model(), &series, DEFAULT_ALPHA).unwrap();
    assert!(s.p_value.unwrap() < 1e-10, "p = {:?}", s.p_value);
    assert!(s.significant);
    let seconds = predict_at(result.best_model(), 8602).unwrap();
    assert!(seconds > 1.0 && seconds < 60.0, "{seconds}");
}

#[test]
fn quadratic_memory_fixture_exceeds_the_machine_limit() {
    let time = load_series("linear_time_8602.csv", Resource::Time);
    let memory = load_series("quadratic_memory_53940.csv", Resource::Memory);
    let mem_result = fit_all(&memory).unwrap();
    assert_eq!(mem_result.best, ComplexityFamily::Quadratic);

    let bytes = predict_at(mem_result.best_model(), 53940).unwrap();
    let expected = 4.0 * 53940.0 * 53939.0;
    assert!((bytes - expected).abs() / expected < 0.01);
    let mib = bytes / MIB;
    assert!((mib - 11110.0).abs() / 11110.0 < 0.05, "{mib} MiB");

    let limit = 8064 * 1024 * 1024u64;
    let report = build_report(
        &fit_all(&time).unwrap(),
        Some(&mem_result),
        53940,
        &time,
        Some(limit),
        Vec::new(),
    )
    .unwrap();
    let m = report.memory.as_ref().unwrap();
    assert_eq!(m.full_dataset_prediction, format_memory(bytes));
    assert_eq!(m.system_memory_limit.as_deref(), Some("8064 Mb"));
}

#[test]
fn constant_time_fixture_reports_without_p_value() {
    let time = load_series("constant_time_32.csv", Resource::Time);
    let memory = load_series("nlogn_memory_32.csv", Resource::Memory);
    let t = fit_all(&time).unwrap();
    let m = fit_all(&memory).unwrap();
    assert_eq!(t.best, ComplexityFamily::Constant);
    assert!(matches!(m.best, ComplexityFamily::NLogN | ComplexityFamily::Linear));

    let report = build_report(&t, Some(&m), 32, &time, None, Vec::new()).unwrap();
    assert_eq!(report.time.full_dataset_prediction, "0.11S");
    assert_eq!(report.time.p_value, None);
    assert_eq!(report.memory.as_ref().unwrap().full_dataset_prediction, "1 Mb");
    assert_eq!(report.sample_sizes, vec![2, 2, 4, 4, 8, 8, 16, 16, 32, 32]);

    let json = serialize_report(&report).unwrap();
    assert!(json.contains("\"p.value.model.significance\": null"));
    assert_eq!(parse_report(&json).unwrap(), report);
}

#[test]
fn printed_values_format_exactly() {
    assert_eq!(format_duration(5.78), "5.78S");
    assert_eq!(format_duration(0.11), "0.11S");
    assert_eq!(format_memory(1.0 * MIB), "1 Mb");
    assert_eq!(format_memory(11110.0 * MIB), "11110 Mb");
}

#[test]
fn fixture_plots_mark_the_best_family() {
    let time = load_series("constant_time_32.csv", Resource::Time);
    let memory = load_series("nlogn_memory_32.csv", Resource::Memory);
    for (series, resource) in [(&time, "TIME"), (&memory, "MEMORY")] {
        let result = fit_all(series).unwrap();
        let svg = render_plot(&PlotSpec::from_result(series, &result), PlotFormat::Svg).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(resource));
        let best_tag = format!("data-family=\"{}\" data-best=\"true\"", result.best);
        assert!(svg.contains(&best_tag), "{resource}: missing {best_tag}");
        assert_eq!(svg.matches("data-best=\"true\"").count(), 1);
        assert_eq!(svg.matches("class=\"fit\"").count(), result.fits.len());

        let text = render_plot(&PlotSpec::from_result(series, &result), PlotFormat::Terminal).unwrap();
        assert!(text.contains(&result.best.to_string()));
    }
}
