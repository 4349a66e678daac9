//! Minimal quick-look SVG line plots rendered straight from a CSV table.

use std::path::Path;

use crate::csvio::CsvTable;

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;

/// Plot every column against the first one. `log_x`/`log_y` switch the axes
/// to log10 scale (rows with non-positive values are skipped there).
pub fn plot(table: &CsvTable, title: &str, log_x: bool, log_y: bool, path: &Path) -> std::io::Result<()> {
    let ncols = table.header.len();
    if ncols < 2 || table.rows.is_empty() {
        return Ok(());
    }
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let usable = |v: f64, log: bool| !log || v > 0.0;

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for row in &table.rows {
        if !usable(row[0], log_x) {
            continue;
        }
        x_min = x_min.min(tx(row[0]));
        x_max = x_max.max(tx(row[0]));
        for &v in &row[1..] {
            if usable(v, log_y) && v.is_finite() {
                y_min = y_min.min(ty(v));
                y_max = y_max.max(ty(v));
            }
        }
    }
    if !(x_max > x_min) {
        x_max = x_min + 1.0;
    }
    if !(y_max > y_min) {
        y_max = y_min + 1.0;
    }
    let pad = 0.04 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let sx = |v: f64| MARGIN + (tx(v) - x_min) / (x_max - x_min) * (W - 2.0 * MARGIN);
    let sy = |v: f64| H - MARGIN - (ty(v) - y_min) / (y_max - y_min) * (H - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        W / 2.0
    ));
    // Axes.
    svg.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    ));
    let fmt_tick = |v: f64, log: bool| {
        if log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3}")
        }
    };
    for k in 0..=4 {
        let fx = x_min + (x_max - x_min) * k as f64 / 4.0;
        let fy = y_min + (y_max - y_min) * k as f64 / 4.0;
        let px = MARGIN + (W - 2.0 * MARGIN) * k as f64 / 4.0;
        let py = H - MARGIN - (H - 2.0 * MARGIN) * k as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\" fill=\"#444\">{}</text>\n",
            H - MARGIN + 16.0,
            fmt_tick(fx, log_x)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{py}\" text-anchor=\"end\" fill=\"#444\">{}</text>\n",
            MARGIN - 6.0,
            fmt_tick(fy, log_y)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"#222\">{}</text>\n",
        W / 2.0,
        H - 12.0,
        table.header[0]
    ));
    // Series.
    for (ci, name) in table.header.iter().enumerate().skip(1) {
        let color = COLORS[(ci - 1) % COLORS.len()];
        let mut points = Vec::new();
        for row in &table.rows {
            if usable(row[0], log_x) && usable(row[ci], log_y) && row[ci].is_finite() {
                points.push(format!("{:.2},{:.2}", sx(row[0]), sy(row[ci])));
            }
        }
        if points.is_empty() {
            continue;
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{name}</text>\n",
            W - MARGIN - 120.0,
            MARGIN + 16.0 * ci as f64
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)
}
