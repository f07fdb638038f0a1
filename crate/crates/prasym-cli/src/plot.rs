//! Self-contained SVG log-log plots (no plotting dependencies), plus a
//! gnuplot-compatible .dat twin for users with their own tooling.

use prasym::error::{Error, Result};

use crate::experiment::{loglog_slope, median, ExperimentRecord};

/// The record fields that can be plotted on the y axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotField {
    TvError,
    MaxRelativeError,
    Lambda2,
    DegreeRatio,
}

impl PlotField {
    pub fn label(&self) -> &'static str {
        match self {
            PlotField::TvError => "tv_error",
            PlotField::MaxRelativeError => "max_relative_error",
            PlotField::Lambda2 => "lambda2",
            PlotField::DegreeRatio => "degree_ratio",
        }
    }

    pub fn get(&self, r: &ExperimentRecord) -> f64 {
        match self {
            PlotField::TvError => r.tv_error,
            PlotField::MaxRelativeError => r.max_relative_error,
            PlotField::Lambda2 => r.lambda2,
            PlotField::DegreeRatio => r.degree_ratio,
        }
    }
}

pub struct Plot {
    pub svg: String,
    pub dat: String,
    /// Fitted log-log slope of the per-size medians.
    pub slope: Option<f64>,
    /// Records dropped because the y value was missing or nonpositive.
    pub skipped: usize,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 56.0;

/// Build the log-log scatter/median plot of `field` against n.
pub fn emit_loglog_plot(
    records: &[ExperimentRecord],
    field: PlotField,
    title: &str,
) -> Result<Plot> {
    let mut skipped = 0usize;
    let mut points: Vec<(usize, f64, u64)> = Vec::new();
    for r in records {
        let y = field.get(r);
        if r.is_excluded() || !y.is_finite() || y <= 0.0 {
            skipped += 1;
            continue;
        }
        points.push((r.n, y, r.seed));
    }
    if points.is_empty() {
        return Err(Error::parameter(
            "no plottable records (all skipped or nonpositive)",
        ));
    }
    let mut sizes: Vec<usize> = points.iter().map(|p| p.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let medians: Vec<(usize, f64)> = sizes
        .iter()
        .map(|&n| {
            (
                n,
                median(points.iter().filter(|p| p.0 == n).map(|p| p.1)),
            )
        })
        .collect();
    let slope = loglog_slope(medians.iter().copied());

    let (x_min, x_max) = log_range(points.iter().map(|p| p.0 as f64));
    let (y_min, y_max) = log_range(points.iter().map(|p| p.1));

    let to_x = |v: f64| -> f64 {
        MARGIN_L + (v.log10() - x_min) / (x_max - x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    };
    let to_y = |v: f64| -> f64 {
        HEIGHT - MARGIN_B - (v.log10() - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    ));

    // Axes frame.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    ));

    // X ticks at the actual sweep sizes.
    for &n in &sizes {
        let x = to_x(n as f64);
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#cccccc\"/>\n",
            MARGIN_T,
            HEIGHT - MARGIN_B
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{n}</text>\n",
            HEIGHT - MARGIN_B + 18.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">n (log scale)</text>\n",
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 12.0
    ));

    // Y ticks at powers of ten inside the range.
    let mut decade = y_min.floor() as i32;
    while (decade as f64) <= y_max.ceil() {
        let v = 10f64.powi(decade);
        if v.log10() >= y_min - 1e-9 && v.log10() <= y_max + 1e-9 {
            let y = to_y(v);
            svg.push_str(&format!(
                "<line x1=\"{MARGIN_L}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#cccccc\"/>\n",
                WIDTH - MARGIN_R
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">1e{decade}</text>\n",
                MARGIN_L - 6.0,
                y + 4.0
            ));
        }
        decade += 1;
    }
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{} (log scale)</text>\n",
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        MARGIN_T + (HEIGHT - MARGIN_T - MARGIN_B) / 2.0,
        field.label()
    ));

    // Per-seed scatter at reduced opacity.
    for (n, y, _) in &points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f77b4\" fill-opacity=\"0.35\"/>\n",
            to_x(*n as f64),
            to_y(*y)
        ));
    }

    // Fitted line through the medians (least squares in log-log space).
    if let (Some(s), true) = (slope, medians.len() >= 2) {
        let xs: Vec<f64> = medians.iter().map(|(n, _)| (*n as f64).log10()).collect();
        let ys: Vec<f64> = medians.iter().map(|(_, m)| m.log10()).collect();
        let mean_x = xs.iter().sum::<f64>() / xs.len() as f64;
        let mean_y = ys.iter().sum::<f64>() / ys.len() as f64;
        let intercept = mean_y - s * mean_x;
        let y_at = |lx: f64| 10f64.powf(intercept + s * lx);
        let (lx0, lx1) = (x_min, x_max);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#d62728\" stroke-dasharray=\"6 3\" stroke-width=\"1.5\"/>\n",
            to_x(10f64.powf(lx0)),
            to_y(y_at(lx0).clamp(10f64.powf(y_min), 10f64.powf(y_max))),
            to_x(10f64.powf(lx1)),
            to_y(y_at(lx1).clamp(10f64.powf(y_min), 10f64.powf(y_max)))
        ));
    }

    // Median markers on top.
    for (n, m) in &medians {
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"8\" height=\"8\" fill=\"#d62728\"/>\n",
            to_x(*n as f64) - 4.0,
            to_y(*m) - 4.0
        ));
    }

    // Legend with the fitted slope.
    let legend = match slope {
        Some(s) => format!("median fit: slope = {s:.3}"),
        None => "median fit: n/a".to_string(),
    };
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
        WIDTH - MARGIN_R - 6.0,
        MARGIN_T + 16.0,
        xml_escape(&legend)
    ));
    svg.push_str("</svg>\n");

    // gnuplot twin: scatter block then median block.
    let mut dat = String::new();
    dat.push_str(&format!("# {title}\n# scatter: n {} seed\n", field.label()));
    for (n, y, seed) in &points {
        dat.push_str(&format!("{n} {y:.16e} {seed}\n"));
    }
    dat.push_str("\n\n# medians: n median\n");
    for (n, m) in &medians {
        dat.push_str(&format!("{n} {m:.16e}\n"));
    }
    if let Some(s) = slope {
        dat.push_str(&format!("# slope {s:.6}\n"));
    }

    Ok(Plot {
        svg,
        dat,
        slope,
        skipped,
    })
}

fn log_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let logs: Vec<f64> = values.map(|v| v.log10()).collect();
    let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).abs() < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, seed: u64, tv: f64) -> ExperimentRecord {
        ExperimentRecord {
            model: "er".into(),
            n,
            seed,
            alpha: 0.85,
            preference: "uniform".into(),
            tv_error: tv,
            max_relative_error: 2.0 * tv,
            lambda2: 0.1,
            degree_ratio: 1.2,
            iterations: 10,
            wall_time_ms: 0.0,
            flags: String::new(),
        }
    }

    #[test]
    fn two_point_slope_annotation() {
        let records = vec![record(100, 1, 1e-2), record(1000, 2, 1e-3)];
        let plot = emit_loglog_plot(&records, PlotField::TvError, "t").unwrap();
        let s = plot.slope.unwrap();
        assert!((s - -1.0).abs() < 1e-9, "slope = {s}");
        assert!(plot.svg.contains("slope = -1.000"));
        assert!(plot.svg.starts_with("<svg"));
        assert!(plot.svg.trim_end().ends_with("</svg>"));
        assert!(plot.dat.contains("# medians"));
    }

    #[test]
    fn flat_data_has_zero_slope() {
        let records = vec![record(100, 1, 0.5), record(1000, 2, 0.5)];
        let plot = emit_loglog_plot(&records, PlotField::TvError, "t").unwrap();
        assert!(plot.slope.unwrap().abs() < 1e-12);
    }

    #[test]
    fn nonpositive_values_are_skipped_with_count() {
        let mut bad = record(100, 3, 0.0);
        bad.max_relative_error = 0.0;
        let records = vec![record(100, 1, 1e-2), bad, record(1000, 2, 1e-3)];
        let plot = emit_loglog_plot(&records, PlotField::TvError, "t").unwrap();
        assert_eq!(plot.skipped, 1);
        // All skipped is an error.
        let zeros = vec![record(100, 1, 0.0)];
        assert!(emit_loglog_plot(&zeros, PlotField::TvError, "t").is_err());
    }
}
