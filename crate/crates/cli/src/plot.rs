//! Minimal SVG rendering of a sweep: log-scaled bound against angle.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::format::sig12;
use crate::sweep::{write_file, SweepResult};

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];
const ULA_COLOR: &str = "#000000";

/// Maps data coordinates to SVG pixels. The vertical axis covers whole
/// decades so that tick labels land on powers of ten.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axes {
    pub phi_min: f64,
    pub phi_max: f64,
    pub decade_lo: i32,
    pub decade_hi: i32,
}

impl Axes {
    pub fn fit(sweep: &SweepResult) -> Self {
        let phi = sweep.rows.iter().map(|r| r.phi_deg);
        let (phi_min, phi_max) = phi.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let values = sweep.rows.iter().flat_map(|r| [r.crlb_lens, r.crlb_ula]);
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let decade_lo = lo.log10().floor() as i32;
        let decade_hi = (hi.log10().ceil() as i32).max(decade_lo + 1);
        let (phi_min, phi_max) = if phi_max > phi_min {
            (phi_min, phi_max)
        } else {
            (phi_min - 1.0, phi_max + 1.0)
        };
        Self {
            phi_min,
            phi_max,
            decade_lo,
            decade_hi,
        }
    }

    pub fn x(&self, phi_deg: f64) -> f64 {
        LEFT + (phi_deg - self.phi_min) / (self.phi_max - self.phi_min) * (WIDTH - LEFT - RIGHT)
    }

    pub fn y(&self, value: f64) -> f64 {
        let t = (value.log10() - self.decade_lo as f64) / (self.decade_hi - self.decade_lo) as f64;
        HEIGHT - BOTTOM - t * (HEIGHT - TOP - BOTTOM)
    }
}

fn polyline(out: &mut String, points: impl Iterator<Item = (f64, f64)>, color: &str, attrs: &str) {
    let coords: Vec<String> = points.map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline {attrs} fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
        coords.join(" ")
    );
}

fn phi_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let step = [1.0, 2.0, 5.0, 10.0, 15.0, 30.0, 45.0]
        .into_iter()
        .find(|s| span / s <= 10.0)
        .unwrap_or(90.0);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Renders the sweep as a standalone SVG document.
pub fn render_svg(sweep: &SweepResult) -> Result<String> {
    if sweep.rows.is_empty() {
        return Err(CliError::Numerical("cannot plot an empty sweep".into()));
    }
    if sweep.rows.iter().any(|r| !(r.crlb_lens > 0.0 && r.crlb_ula > 0.0)) {
        return Err(CliError::Numerical("log axis needs strictly positive bounds".into()));
    }
    let axes = Axes::fit(sweep);
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for d in axes.decade_lo..=axes.decade_hi {
        let y = axes.y(10f64.powi(d));
        let _ = writeln!(
            out,
            "<line x1=\"{x0}\" y1=\"{y:.3}\" x2=\"{x1}\" y2=\"{y:.3}\" stroke=\"#dddddd\"/>"
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">1e{d}</text>"#,
            x0 - 6.0,
            y + 4.0
        );
    }
    for phi in phi_ticks(axes.phi_min, axes.phi_max) {
        let x = axes.x(phi);
        let _ = writeln!(
            out,
            "<line x1=\"{x:.3}\" y1=\"{y0}\" x2=\"{x:.3}\" y2=\"{y1}\" stroke=\"#eeeeee\"/>"
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            sig12(phi)
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">DoA (degrees)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(20 {:.3}) rotate(-90)" text-anchor="middle">CRLB on DoA (rad²)</text>"#,
        (y0 + y1) / 2.0
    );

    let sigmas = sweep.sigma_values();
    let mut legend: Vec<(String, &str)> = Vec::new();
    for (i, &sigma_c) in sigmas.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let attrs = format!(r#"class="curve lens" data-sigma-c="{}""#, sig12(sigma_c));
        polyline(
            &mut out,
            sweep.series(sigma_c).map(|r| (axes.x(r.phi_deg), axes.y(r.crlb_lens))),
            color,
            &attrs,
        );
        legend.push((format!("lens, σc = {}", trim_label(sigma_c)), color));
    }
    polyline(
        &mut out,
        sweep.series(sigmas[0]).map(|r| (axes.x(r.phi_deg), axes.y(r.crlb_ula))),
        ULA_COLOR,
        r#"class="curve ula" stroke-dasharray="6 4""#,
    );
    legend.push(("ULA, no lens".to_string(), ULA_COLOR));

    for (i, (label, color)) in legend.iter().enumerate() {
        let y = TOP + 14.0 + 20.0 * i as f64;
        let lx = x1 + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{label}</text>"#, lx + 30.0, y + 4.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn trim_label(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn emit_plot(sweep: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, &render_svg(sweep)?)
}
