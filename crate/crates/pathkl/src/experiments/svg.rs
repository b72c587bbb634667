//! Minimal self-contained SVG line plots. No external plotting dependency:
//! the figures are simple polyline charts with axes, ticks, and a legend.

use std::path::Path;

use crate::error::Result;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const COLORS: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).abs().max(1e-300);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag
        * if norm < 1.5 {
            1.0
        } else if norm < 3.5 {
            2.0
        } else if norm < 7.5 {
            5.0
        } else {
            10.0
        };
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = first;
    while t <= hi + step * 1e-9 {
        ticks.push(t);
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Render a line chart with one polyline per series and write it to `path`.
pub fn line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    show_legend: bool,
) -> Result<()> {
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if !x_lo.is_finite() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_lo == x_hi {
        x_hi = x_lo + 1.0;
    }
    if y_lo == y_hi {
        y_hi = y_lo + 1.0;
        y_lo -= 1.0;
    }
    let pad = 0.04 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = move |y: f64| MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::with_capacity(16 * 1024);
    svg.push_str(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    ));
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    svg.push_str(&format!(
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0
    ));

    // axes
    svg.push_str(&format!(
        r#"<line x1="{MARGIN_L}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        MARGIN_T + plot_h,
        MARGIN_L + plot_w,
        MARGIN_T + plot_h
    ));
    svg.push_str(&format!(
        r#"<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" y2="{:.1}" stroke="black"/>"#,
        MARGIN_T + plot_h
    ));

    for t in nice_ticks(x_lo, x_hi) {
        let x = sx(t);
        svg.push_str(&format!(
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/>"#,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0
        ));
        svg.push_str(&format!(
            r#"<text x="{x:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            MARGIN_T + plot_h + 18.0,
            fmt_tick(t)
        ));
        svg.push_str(&format!(
            r#"<line x1="{x:.1}" y1="{MARGIN_T}" x2="{x:.1}" y2="{:.1}" stroke="#eeeeee"/>"#,
            MARGIN_T + plot_h
        ));
    }
    for t in nice_ticks(y_lo, y_hi) {
        let y = sy(t);
        svg.push_str(&format!(
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_L}" y2="{y:.1}" stroke="black"/>"#,
            MARGIN_L - 5.0
        ));
        svg.push_str(&format!(
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            MARGIN_L - 8.0,
            y + 4.0,
            fmt_tick(t)
        ));
        svg.push_str(&format!(
            r#"<line x1="{MARGIN_L}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#eeeeee"/>"#,
            MARGIN_L + plot_w
        ));
    }

    svg.push_str(&format!(
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{x_label}</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 10.0
    ));
    svg.push_str(&format!(
        r#"<text x="16" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">{y_label}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    ));

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if s.points.len() == 1 {
            let (x, y) = s.points[0];
            svg.push_str(&format!(
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            ));
            continue;
        }
        let mut d = String::with_capacity(s.points.len() * 14);
        for (j, &(x, y)) in s.points.iter().enumerate() {
            d.push(if j == 0 { 'M' } else { 'L' });
            d.push_str(&format!("{:.2} {:.2}", sx(x), sy(y)));
        }
        svg.push_str(&format!(
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.4"/>"#
        ));
    }

    if show_legend {
        for (i, s) in series.iter().enumerate().take(10) {
            let color = COLORS[i % COLORS.len()];
            let y = MARGIN_T + 14.0 + 16.0 * i as f64;
            let x = MARGIN_L + plot_w - 150.0;
            svg.push_str(&format!(
                r#"<rect x="{x:.1}" y="{:.1}" width="12" height="4" fill="{color}"/>"#,
                y - 4.0
            ));
            svg.push_str(&format!(
                r#"<text x="{:.1}" y="{y:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
                x + 18.0,
                s.name
            ));
        }
    }

    svg.push_str("</svg>\n");
    std::fs::write(path, svg)?;
    Ok(())
}
