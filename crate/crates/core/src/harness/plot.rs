use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::sweep::{Metric, SweepResult};
use crate::allocation::Scheme;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn colour(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Cec => "#d62728",
        Scheme::Mlcec => "#1f77b4",
        Scheme::Bicec => "#2ca02c",
    }
}

fn title(metric: Metric) -> &'static str {
    match metric {
        Metric::Computation => "Average computation time",
        Metric::Decoding => "Average decoding time",
        Metric::Finishing => "Average finishing time",
        Metric::TransitionWaste => "Average transition waste",
    }
}

/// Renders one metric as a standalone SVG line chart (N on x, mean on y).
pub fn render_svg(result: &SweepResult, metric: Metric) -> Result<String> {
    let points: Vec<(Scheme, usize, f64)> = result
        .rows
        .iter()
        .map(|r| (r.scheme, r.n, r.stat(metric).mean))
        .filter(|p| p.2.is_finite())
        .collect();
    if points.is_empty() {
        return Err(Error::NoData);
    }
    let x_min = points.iter().map(|p| p.1).min().unwrap_or(0) as f64;
    let x_max = points.iter().map(|p| p.1).max().unwrap_or(0) as f64;
    let y_max = points.iter().map(|p| p.2).fold(0.0, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_min) / x_span * plot_w;
    let sy = |y: f64| TOP + plot_h - y / y_max * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + plot_w / 2.0,
        title(metric)
    );
    // axes
    let _ = writeln!(
        svg,
        r#"<path d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="black"/>"#,
        TOP + plot_h,
        LEFT + plot_w
    );
    let mut ns: Vec<usize> = points.iter().map(|p| p.1).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in &ns {
        let x = sx(*n as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{0}" x2="{x:.2}" y2="{1}" stroke="black"/><text x="{x:.2}" y="{2}" text-anchor="middle">{n}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0
        );
    }
    for i in 0..=4 {
        let y = y_max * i as f64 / 4.0;
        let py = sy(y);
        let _ = writeln!(
            svg,
            r#"<line x1="{0}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{1}" y="{2:.2}" text-anchor="end">{y:.3e}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0
        );
    }
    let unit = if metric == Metric::TransitionWaste { "subtasks" } else { "seconds" };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">N (workers)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{unit}</text>"#,
        TOP + plot_h / 2.0
    );

    let mut legend_y = TOP + 10.0;
    for scheme in Scheme::ALL {
        let mut series: Vec<(usize, f64)> = points
            .iter()
            .filter(|p| p.0 == scheme)
            .map(|p| (p.1, p.2))
            .collect();
        if series.is_empty() {
            continue;
        }
        series.sort_by_key(|p| p.0);
        let coords: Vec<String> = series
            .iter()
            .map(|&(n, y)| format!("{:.2},{:.2}", sx(n as f64), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline id="{scheme}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            coords.join(" "),
            colour(scheme)
        );
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{legend_y}" x2="{}" y2="{legend_y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            colour(scheme),
            lx + 26.0,
            legend_y + 4.0,
            scheme.as_str().to_uppercase()
        );
        legend_y += 18.0;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes `computation.svg`, `decoding.svg` and `finishing.svg`.
pub fn emit_plots(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>> {
    if result.rows.is_empty() {
        return Err(Error::NoData);
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for metric in [Metric::Computation, Metric::Decoding, Metric::Finishing] {
        let path = dir.join(format!("{}.svg", metric.file_stem()));
        fs::write(&path, render_svg(result, metric)?)?;
        written.push(path);
    }
    Ok(written)
}
