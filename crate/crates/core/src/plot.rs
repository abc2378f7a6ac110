//! Observed points with every fitted family drawn over them; the selected
//! family is drawn in bold.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::family::ComplexityFamily;
use crate::models::{BenchmarkResult, MeasurementSeries, Resource};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotFormat {
    Svg,
    Terminal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotCurve {
    pub family: ComplexityFamily,
    pub intercept: f64,
    pub slope: f64,
    pub loo_mse: f64,
    pub best: bool,
}

impl PlotCurve {
    fn at(&self, n: f64) -> f64 {
        self.intercept + self.slope * self.family.transform_real(n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub resource: Resource,
    /// (size, value) per invocation, replicates included.
    pub points: Vec<(usize, f64)>,
    pub curves: Vec<PlotCurve>,
    pub subtitle: Vec<String>,
}

impl PlotSpec {
    /// One curve per non-degenerate fit in `result`.
    pub fn from_result(series: &MeasurementSeries, result: &BenchmarkResult) -> Self {
        Self {
            resource: series.resource(),
            points: series.rows().iter().map(|r| (r.size, r.value)).collect(),
            curves: result
                .fits
                .iter()
                .map(|m| PlotCurve {
                    family: m.family,
                    intercept: m.intercept,
                    slope: m.slope,
                    loo_mse: m.loo_mse,
                    best: m.family == result.best,
                })
                .collect(),
            subtitle: Vec::new(),
        }
    }

    pub fn with_subtitle(mut self, line: impl Into<String>) -> Self {
        self.subtitle.push(line.into());
        self
    }

    fn title(&self) -> String {
        format!("{} complexity fit", self.resource.label())
    }

    fn check(&self) -> Result<(f64, f64)> {
        if self.points.is_empty() {
            return Err(Error::EmptyPlot("no observed points".into()));
        }
        let lo = self.points.iter().map(|p| p.0).min().unwrap_or(0);
        let hi = self.points.iter().map(|p| p.0).max().unwrap_or(0);
        if lo == hi {
            return Err(Error::EmptyPlot(format!(
                "all observations are at size {lo}; a trend needs at least two sizes"
            )));
        }
        Ok((lo as f64, hi as f64))
    }

    /// Sampled curve values across the observed size range.
    fn curve_samples(&self, curve: &PlotCurve, x_lo: f64, x_hi: f64, count: usize) -> Vec<(f64, f64)> {
        (0..count)
            .map(|i| {
                let x = x_lo + (x_hi - x_lo) * i as f64 / (count - 1) as f64;
                (x, curve.at(x))
            })
            .collect()
    }

    fn y_range(&self, x_lo: f64, x_hi: f64) -> (f64, f64) {
        let mut lo = 0.0f64;
        let mut hi = f64::MIN;
        for &(_, y) in &self.points {
            lo = lo.min(y);
            hi = hi.max(y);
        }
        // Curves may overshoot; keep the frame around the data with some room.
        let span = (hi - lo).max(f64::EPSILON);
        for curve in &self.curves {
            for (_, y) in self.curve_samples(curve, x_lo, x_hi, 50) {
                if y.is_finite() {
                    lo = lo.min(y.max(lo - 0.25 * span));
                    hi = hi.max(y.min(hi + 0.25 * span));
                }
            }
        }
        if hi <= lo {
            hi = lo + 1.0;
        }
        (lo, hi)
    }
}

pub fn render_plot(spec: &PlotSpec, format: PlotFormat) -> Result<String> {
    match format {
        PlotFormat::Svg => render_svg(spec),
        PlotFormat::Terminal => render_terminal(spec),
    }
}

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 70.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 7] = [
    "#7f7f7f", "#1f77b4", "#2ca02c", "#d62728", "#9467bd", "#ff7f0e", "#8c564b",
];

fn color(family: ComplexityFamily) -> &'static str {
    let idx = ComplexityFamily::ALL
        .iter()
        .position(|&f| f == family)
        .unwrap_or(0);
    PALETTE[idx]
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn render_svg(spec: &PlotSpec) -> Result<String> {
    let (x_lo, x_hi) = spec.check()?;
    let (y_lo, y_hi) = spec.y_range(x_lo, x_hi);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y.clamp(y_lo, y_hi) - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text class="title" x="{LEFT}" y="28" font-size="18">{}</text>"#,
        escape(&spec.title())
    );
    for (i, line) in spec.subtitle.iter().enumerate() {
        let _ = writeln!(
            svg,
            r#"<text class="subtitle" x="{LEFT}" y="{}" font-size="12" fill="dimgray">{}</text>"#,
            46 + 14 * i,
            escape(line)
        );
    }

    // Axes and tick labels.
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{y0}"/></g>"#,
        y0 = TOP + plot_h,
        x1 = LEFT + plot_w
    );
    for i in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * f64::from(i) / 4.0;
        let fy = y_lo + (y_hi - y_lo) * f64::from(i) / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            sx(fx),
            TOP + plot_h + 16.0,
            fx.round()
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{:.3e}</text>"#,
            LEFT - 6.0,
            sy(fy) + 4.0,
            fy
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">sample size (rows)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.1})">{} ({})</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        spec.resource.label().to_lowercase(),
        spec.resource.unit()
    );

    // Non-best curves first so the bold one sits on top.
    let mut ordered: Vec<&PlotCurve> = spec.curves.iter().collect();
    ordered.sort_by_key(|c| c.best);
    for curve in ordered {
        let mut d = String::new();
        for (i, (x, y)) in spec.curve_samples(curve, x_lo, x_hi, 120).into_iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { 'M' } else { 'L' }, sx(x), sy(y));
        }
        let (width, best_attr) = if curve.best {
            ("4", r#" data-best="true""#)
        } else {
            ("1.5", "")
        };
        let _ = writeln!(
            svg,
            r#"<path class="fit" data-family="{}"{best_attr} d="{}" fill="none" stroke="{}" stroke-width="{width}"/>"#,
            curve.family,
            d.trim_end(),
            color(curve.family)
        );
    }

    let _ = writeln!(svg, r#"<g class="observations" fill="black">"#);
    for &(n, y) in &spec.points {
        let _ = writeln!(
            svg,
            r#"<circle class="obs" cx="{:.2}" cy="{:.2}" r="3"/>"#,
            sx(n as f64),
            sy(y)
        );
    }
    let _ = writeln!(svg, "</g>");

    let _ = writeln!(svg, r#"<g class="legend" font-size="12">"#);
    for (i, curve) in spec.curves.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let weight = if curve.best { "bold" } else { "normal" };
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="{}"/><text x="{}" y="{}" font-weight="{weight}">{} ({})</text>"#,
            x + 20.0,
            color(curve.family),
            if curve.best { 4 } else { 2 },
            x + 26.0,
            y + 4.0,
            curve.family,
            escape(curve.family.notation())
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

const COLS: usize = 72;
const ROWS: usize = 20;

fn render_terminal(spec: &PlotSpec) -> Result<String> {
    let (x_lo, x_hi) = spec.check()?;
    let (y_lo, y_hi) = spec.y_range(x_lo, x_hi);
    let mut grid = vec![vec![' '; COLS]; ROWS];
    let cell = |x: f64, y: f64| -> Option<(usize, usize)> {
        if !(y.is_finite() && (y_lo..=y_hi).contains(&y)) {
            return None;
        }
        let c = ((x - x_lo) / (x_hi - x_lo) * (COLS - 1) as f64).round() as usize;
        let r = ((y_hi - y) / (y_hi - y_lo) * (ROWS - 1) as f64).round() as usize;
        Some((r.min(ROWS - 1), c.min(COLS - 1)))
    };

    for curve in spec.curves.iter().filter(|c| !c.best) {
        for (x, y) in spec.curve_samples(curve, x_lo, x_hi, COLS * 2) {
            if let Some((r, c)) = cell(x, y) {
                grid[r][c] = '\u{b7}';
            }
        }
    }
    for curve in spec.curves.iter().filter(|c| c.best) {
        for (x, y) in spec.curve_samples(curve, x_lo, x_hi, COLS * 2) {
            if let Some((r, c)) = cell(x, y) {
                grid[r][c] = '\u{2588}';
            }
        }
    }
    for &(n, y) in &spec.points {
        if let Some((r, c)) = cell(n as f64, y) {
            grid[r][c] = 'o';
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "{}", spec.title());
    for line in &spec.subtitle {
        let _ = writeln!(out, "  {line}");
    }
    let _ = writeln!(out, "{:>11.3e} \u{252c}", y_hi);
    for row in &grid {
        let _ = writeln!(out, "{:>11} \u{2502}{}", "", row.iter().collect::<String>());
    }
    let _ = writeln!(out, "{:>11.3e} \u{2514}{}", y_lo, "\u{2500}".repeat(COLS));
    let _ = writeln!(out, "{:>13}{:<w$}{}", "", x_lo, x_hi, w = COLS - 8);
    for curve in &spec.curves {
        let mark = if curve.best { "\u{2588} best" } else { "\u{b7}" };
        let _ = writeln!(out, "  {mark} {} LOO-MSE {:.4e}", curve.family, curve.loo_mse);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::fit_all;

    fn nlogn_spec() -> PlotSpec {
        let pairs: Vec<(usize, f64)> = [2usize, 2, 4, 4, 8, 8, 16, 16, 32, 32]
            .iter()
            .enumerate()
            .map(|(i, &n)| (n, n as f64 * (n as f64).ln() * (1.0 + 0.01 * i as f64)))
            .collect();
        let s = MeasurementSeries::from_pairs(Resource::Memory, &pairs).unwrap();
        let r = fit_all(&s).unwrap();
        PlotSpec::from_result(&s, &r).with_subtitle("dummy target")
    }

    #[test]
    fn svg_has_one_path_per_family_and_one_bold() {
        let spec = nlogn_spec();
        let svg = render_plot(&spec, PlotFormat::Svg).unwrap();
        assert_eq!(svg.matches(r#"class="fit""#).count(), 7);
        assert_eq!(svg.matches(r#"data-best="true""#).count(), 1);
        assert!(svg.contains("dummy target"));
        assert_eq!(svg.matches(r#"class="obs""#).count(), 10);
        let best = spec.curves.iter().find(|c| c.best).unwrap().family;
        assert!(svg.contains(&format!(r#"data-family="{best}" data-best="true""#)));
    }

    #[test]
    fn degenerate_families_are_not_drawn() {
        let mut spec = nlogn_spec();
        spec.curves.retain(|c| c.best || c.family != ComplexityFamily::Cubic);
        let svg = render_plot(&spec, PlotFormat::Svg).unwrap();
        assert_eq!(svg.matches(r#"class="fit""#).count(), 6);
    }

    #[test]
    fn terminal_plot_mentions_every_family() {
        let text = render_plot(&nlogn_spec(), PlotFormat::Terminal).unwrap();
        for family in ComplexityFamily::ALL {
            assert!(text.contains(family.tag()));
        }
        assert!(text.contains("best"));
    }

    #[test]
    fn empty_and_single_size_specs_fail() {
        let mut spec = nlogn_spec();
        spec.points.clear();
        assert!(matches!(render_plot(&spec, PlotFormat::Svg), Err(Error::EmptyPlot(_))));
        spec.points = vec![(8, 1.0), (8, 2.0)];
        assert!(matches!(
            render_plot(&spec, PlotFormat::Terminal),
            Err(Error::EmptyPlot(_))
        ));
    }
}
