//! Deterministic SVG rendering: multi-series line charts on a date axis,
//! correlation heatmaps, and density histograms.
//!
//! Charts are laid out on a fixed 960x540 canvas with 10% margins and built
//! by plain string assembly, so identical inputs always produce identical
//! bytes. That keeps the output golden-file testable; no styling beyond the
//! data content is attempted.

use chrono::{Datelike, NaiveDate};
use thiserror::Error;

use crate::series::DailySeries;
use crate::stats::Histogram;
use crate::xcorr::XCorrMatrix;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const MARGIN_X: f64 = 96.0;
const MARGIN_Y: f64 = 54.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("no series to draw")]
    NoSeries,
    #[error("series `{0}` has fewer than 2 points")]
    TooShort(String),
    #[error("empty matrix")]
    EmptyMatrix,
}

struct Plot {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Plot {
    fn frame() -> Self {
        Plot {
            left: MARGIN_X,
            top: MARGIN_Y,
            width: WIDTH - 2.0 * MARGIN_X,
            height: HEIGHT - 2.0 * MARGIN_Y,
        }
    }

    fn bottom(&self) -> f64 {
        self.top + self.height
    }

    fn right(&self) -> f64 {
        self.left + self.width
    }
}

/// One polyline per series over a shared date axis with year ticks and a
/// legend of series names.
pub fn render_lines(series: &[DailySeries], title: &str) -> Result<String, RenderError> {
    if series.is_empty() {
        return Err(RenderError::NoSeries);
    }
    for s in series {
        if s.len() < 2 {
            return Err(RenderError::TooShort(s.name().to_string()));
        }
    }

    let plot = Plot::frame();
    let start = series.iter().map(|s| s.start_date()).min().unwrap();
    let end = series.iter().map(|s| s.end_date()).max().unwrap();
    let total_days = (end - start).num_days() as f64;

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &v in s.values() {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }

    let x_of = |date: NaiveDate| {
        plot.left + plot.width * (date - start).num_days() as f64 / total_days
    };
    let y_of = |v: f64| plot.bottom() - plot.height * (v - y_min) / (y_max - y_min);

    let mut svg = open_svg(title);
    axes(&mut svg, &plot);

    // Year ticks where a January 1st falls inside the range; otherwise the
    // range endpoints.
    let year_marks: Vec<NaiveDate> = (start.year()..=end.year())
        .filter_map(|y| NaiveDate::from_ymd_opt(y, 1, 1))
        .filter(|&d| d >= start && d <= end)
        .collect();
    if year_marks.is_empty() {
        for (date, anchor) in [(start, "start"), (end, "end")] {
            let x = x_of(date);
            svg.push_str(&tick_x(&plot, x, &date.to_string(), anchor));
        }
    } else {
        for date in year_marks {
            let x = x_of(date);
            svg.push_str(&tick_x(&plot, x, &date.year().to_string(), "middle"));
        }
    }

    y_ticks(&mut svg, &plot, y_min, y_max);

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = s
            .iter_dated()
            .map(|(date, v)| format!("{:.2},{:.2}", x_of(date), y_of(v)))
            .collect();
        svg.push_str(&format!(
            "<polyline class=\"series\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
    }

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = plot.top + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            plot.left + 10.0,
            plot.left + 34.0,
        ));
        svg.push_str(&format!(
            "<text class=\"legend-label\" x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            plot.left + 40.0,
            y + 4.0,
            escape(s.name()),
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Colored n-by-n grid of the matrix maxima with the 2-decimal coefficient
/// printed in each cell and the series names as row and column labels.
pub fn render_heatmap(matrix: &XCorrMatrix, title: &str) -> Result<String, RenderError> {
    let n = matrix.len();
    if n == 0 {
        return Err(RenderError::EmptyMatrix);
    }

    let plot = Plot::frame();
    let cell_w = plot.width / n as f64;
    let cell_h = plot.height / n as f64;

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in &matrix.max_corr {
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }

    let mut svg = open_svg(title);
    for (j, name) in matrix.names.iter().enumerate() {
        svg.push_str(&format!(
            "<text class=\"col-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            plot.left + cell_w * (j as f64 + 0.5),
            plot.top - 8.0,
            escape(name),
        ));
    }
    for (i, name) in matrix.names.iter().enumerate() {
        svg.push_str(&format!(
            "<text class=\"row-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            plot.left - 8.0,
            plot.top + cell_h * (i as f64 + 0.5) + 4.0,
            escape(name),
        ));
    }

    for i in 0..n {
        for j in 0..n {
            let v = matrix.max_corr[i][j];
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            let x = plot.left + cell_w * j as f64;
            let y = plot.top + cell_h * i as f64;
            svg.push_str(&format!(
                "<rect class=\"cell\" x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell_w:.2}\" height=\"{cell_h:.2}\" fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n",
                blend(t),
            ));
            let ink = if t > 0.6 { "#ffffff" } else { "#000000" };
            svg.push_str(&format!(
                "<text class=\"cell-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" fill=\"{ink}\">{v:.2}</text>\n",
                x + cell_w / 2.0,
                y + cell_h / 2.0 + 5.0,
            ));
        }
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Bar chart of a density histogram.
pub fn render_histogram(histogram: &Histogram, title: &str) -> String {
    let plot = Plot::frame();
    let lo = histogram.bin_edges[0];
    let hi = *histogram.bin_edges.last().unwrap();
    let d_max = histogram.densities.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let x_of = |v: f64| plot.left + plot.width * (v - lo) / (hi - lo);
    let mut svg = open_svg(title);
    axes(&mut svg, &plot);

    for i in 0..5 {
        let v = lo + (hi - lo) * i as f64 / 4.0;
        svg.push_str(&tick_x(&plot, x_of(v), &trim_decimal(v), "middle"));
    }
    y_ticks(&mut svg, &plot, 0.0, d_max);

    for (i, &density) in histogram.densities.iter().enumerate() {
        let x0 = x_of(histogram.bin_edges[i]);
        let x1 = x_of(histogram.bin_edges[i + 1]);
        let h = plot.height * density / d_max;
        svg.push_str(&format!(
            "<rect class=\"bar\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#1f77b4\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n",
            x0,
            plot.bottom() - h,
            x1 - x0,
            h,
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

fn open_svg(title: &str) -> String {
    let mut svg = String::with_capacity(4096);
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    ));
    if !title.is_empty() {
        svg.push_str(&format!(
            "<text class=\"title\" x=\"{:.2}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            escape(title),
        ));
    }
    svg
}

fn axes(svg: &mut String, plot: &Plot) {
    svg.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
        l = plot.left,
        t = plot.top,
        b = plot.bottom(),
    ));
    svg.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
        l = plot.left,
        r = plot.right(),
        b = plot.bottom(),
    ));
}

fn tick_x(plot: &Plot, x: f64, label: &str, anchor: &str) -> String {
    let anchor = match anchor {
        "start" | "end" => anchor,
        _ => "middle",
    };
    format!(
        "<line x1=\"{x:.2}\" y1=\"{b:.2}\" x2=\"{x:.2}\" y2=\"{t:.2}\" stroke=\"#000000\" stroke-width=\"1\"/>\n\
         <text class=\"x-tick\" x=\"{x:.2}\" y=\"{ly:.2}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n",
        b = plot.bottom(),
        t = plot.bottom() + 6.0,
        ly = plot.bottom() + 20.0,
    )
}

fn y_ticks(svg: &mut String, plot: &Plot, y_min: f64, y_max: f64) {
    for i in 0..5 {
        let v = y_min + (y_max - y_min) * i as f64 / 4.0;
        let y = plot.bottom() - plot.height * i as f64 / 4.0;
        svg.push_str(&format!(
            "<line x1=\"{x0:.2}\" y1=\"{y:.2}\" x2=\"{x1:.2}\" y2=\"{y:.2}\" stroke=\"#000000\" stroke-width=\"1\"/>\n",
            x0 = plot.left - 6.0,
            x1 = plot.left,
        ));
        svg.push_str(&format!(
            "<text class=\"y-tick\" x=\"{x:.2}\" y=\"{ly:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n",
            x = plot.left - 10.0,
            ly = y + 4.0,
            label = trim_decimal(v),
        ));
    }
}

/// Two-stop linear color scale from pale to dark blue.
fn blend(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let channel = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        channel(247.0, 8.0),
        channel(251.0, 48.0),
        channel(255.0, 107.0)
    )
}

/// Fixed-width decimal with trailing zeros removed, for tick labels.
fn trim_decimal(v: f64) -> String {
    let mut s = format!("{v:.4}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn series(name: &str, start: NaiveDate, values: Vec<f64>) -> DailySeries {
        DailySeries::new(name, start, values).unwrap()
    }

    fn count(haystack: &str, needle: &str) -> usize {
        haystack.matches(needle).count()
    }

    #[test]
    fn one_series_one_polyline_two_points() {
        let svg = render_lines(&[series("a", d(2020, 6, 1), vec![1.0, 2.0])], "t").unwrap();
        assert_eq!(count(&svg, "<polyline"), 1);
        let points = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(points.split(' ').count(), 2);
    }

    #[test]
    fn four_series_four_polylines_and_legend_entries() {
        let set: Vec<DailySeries> = (0..4)
            .map(|i| {
                series(
                    &format!("s{i}"),
                    d(2020, 1, 1),
                    vec![i as f64, i as f64 + 1.0, i as f64 + 0.5],
                )
            })
            .collect();
        let svg = render_lines(&set, "four").unwrap();
        assert_eq!(count(&svg, "<polyline"), 4);
        assert_eq!(count(&svg, "legend-label"), 4);
    }

    #[test]
    fn line_chart_is_deterministic() {
        let set = [series("a", d(2017, 6, 1), (0..400).map(f64::from).collect())];
        let first = render_lines(&set, "same").unwrap();
        let second = render_lines(&set, "same").unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn year_ticks_appear_for_multi_year_ranges() {
        let set = [series("a", d(2017, 6, 1), (0..400).map(f64::from).collect())];
        let svg = render_lines(&set, "").unwrap();
        assert!(svg.contains(">2018<"), "{svg}");
    }

    #[test]
    fn short_range_falls_back_to_date_labels() {
        let set = [series("a", d(2020, 3, 1), vec![1.0, 2.0, 3.0])];
        let svg = render_lines(&set, "").unwrap();
        assert!(svg.contains(">2020-03-01<"));
        assert!(svg.contains(">2020-03-03<"));
    }

    #[test]
    fn render_lines_rejects_bad_input() {
        assert!(matches!(render_lines(&[], "t"), Err(RenderError::NoSeries)));
        let short = series("a", d(2020, 1, 1), vec![1.0]);
        assert!(matches!(
            render_lines(&[short], "t"),
            Err(RenderError::TooShort(_))
        ));
    }

    fn matrix(names: &[&str], corr: Vec<Vec<f64>>) -> XCorrMatrix {
        let n = names.len();
        XCorrMatrix {
            names: names.iter().map(|s| s.to_string()).collect(),
            max_corr: corr,
            lag_at_max: vec![vec![0; n]; n],
        }
    }

    #[test]
    fn heatmap_single_cell() {
        let svg = render_heatmap(&matrix(&["a"], vec![vec![0.67]]), "").unwrap();
        assert_eq!(count(&svg, "class=\"cell\""), 1);
        assert!(svg.contains(">0.67<"), "{svg}");
    }

    #[test]
    fn heatmap_four_by_four_symmetric_labels() {
        let mut corr = vec![vec![0.0; 4]; 4];
        for (i, row) in corr.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = 0.1 * (i.min(j) as f64) + 0.5;
            }
        }
        let m = matrix(&["e", "ge", "b", "gb"], corr);
        let svg = render_heatmap(&m, "heat").unwrap();
        assert_eq!(count(&svg, "class=\"cell\""), 16);
        assert_eq!(count(&svg, "class=\"cell-label\""), 16);
        // min(i,j) = 0 in one diagonal cell plus three mirrored pairs.
        assert_eq!(count(&svg, ">0.50<"), 7);
        assert_eq!(render_heatmap(&m, "heat").unwrap(), svg);
    }

    #[test]
    fn heatmap_rejects_empty() {
        let m = matrix(&[], vec![]);
        assert!(matches!(render_heatmap(&m, ""), Err(RenderError::EmptyMatrix)));
    }

    #[test]
    fn histogram_renders_one_bar_per_bin() {
        let h = crate::stats::histogram(&[0.0, 1.0, 2.0, 3.0, 4.0], 4).unwrap();
        let svg = render_histogram(&h, "hist");
        assert_eq!(count(&svg, "class=\"bar\""), 4);
        assert_eq!(render_histogram(&h, "hist"), svg);
    }

    #[test]
    fn escapes_markup_in_names() {
        let svg = render_lines(
            &[series("a<b&c", d(2020, 1, 1), vec![1.0, 2.0])],
            "x<y",
        )
        .unwrap();
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(svg.contains("x&lt;y"));
        assert!(!svg.contains("a<b"));
    }
}
