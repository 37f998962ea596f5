use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::run::RunResult;
use crate::controllability::RankSweepReport;
use crate::error::{Error, Result};
use crate::magnetics::FieldComparisonRow;
use crate::DEG;

/// Column schema of the per-run time series.
pub const SERIES_HEADER: [&str; 10] = [
    "t_s",
    "omega_x_dps",
    "omega_y_dps",
    "omega_z_dps",
    "m_x_Am2",
    "B_body_x_T",
    "B_body_y_T",
    "B_body_z_T",
    "V_J",
    "F_norm",
];

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_series_csv(result: &RunResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SERIES_HEADER)?;
    for s in &result.series {
        let w_dps = s.omega / DEG;
        w.write_record([
            num(s.t),
            num(w_dps.x),
            num(w_dps.y),
            num(w_dps.z),
            num(s.m_x),
            num(s.b_body.x),
            num(s.b_body.y),
            num(s.b_body.z),
            num(s.energy),
            s.f_norm.map(num).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_telemetry_csv(result: &RunResult, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t_s", "m_x_Am2", "v0", "mu0", "F_norm", "gmres_iterations", "failed"])?;
    for r in &result.telemetry {
        w.write_record([
            num(r.t),
            num(r.m_x),
            num(r.v0),
            num(r.mu0),
            num(r.f_norm),
            r.gmres_iterations.to_string(),
            (r.failed as u8).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_field_comparison(rows: &[FieldComparisonRow], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "t_s",
        "dipole_x_T",
        "dipole_y_T",
        "dipole_z_T",
        "igrf_x_T",
        "igrf_y_T",
        "igrf_z_T",
    ])?;
    for r in rows {
        w.write_record([
            num(r.t),
            num(r.dipole.x),
            num(r.dipole.y),
            num(r.dipole.z),
            num(r.igrf.x),
            num(r.igrf.y),
            num(r.igrf.z),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_rank_sweep(report: &RankSweepReport, path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "sigma1", "sigma2", "sigma3", "rank"])?;
    for s in &report.samples {
        let [a, b, c] = s.singular_values;
        w.write_record([num(s.t), num(a), num(b), num(c), s.rank.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    points: Vec<(f64, f64)>,
}

fn svg_plot(title: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let (w, h, pad) = (800.0, 400.0, 60.0);
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, -1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y0 -= 1.0;
        y1 += 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#,
        w / 2.0
    );
    let _ = writeln!(
        out,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let xv = x0 + frac * (x1 - x0);
        let yv = y0 + frac * (y1 - y0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.4}</text>"#,
            sx(xv),
            h - pad + 16.0,
            xv
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.4}</text>"#,
            pad - 4.0,
            sy(yv) + 4.0,
            yv
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">t [min]</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            out,
            r##"<line x1="{pad}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#bbb"/>"##,
            w - pad,
            y = sy(0.0)
        );
    }
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"#,
            s.color,
            pts.join(" ")
        );
        let ly = pad + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" fill="{}">{}</text>"#,
            w - pad - 80.0,
            s.color,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// ω(t) and m_x(t) plots, decimated to at most 2000 points per line.
pub fn write_svg_plots(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    let stride = (result.series.len() / 2000).max(1);
    let rows: Vec<_> = result.series.iter().step_by(stride).collect();
    let line = |label, color, f: &dyn Fn(&super::SeriesRow) -> f64| Series {
        label,
        color,
        points: rows.iter().map(|s| (s.t / 60.0, f(s))).collect(),
    };
    let omega = svg_plot(
        &format!("{}: angular velocity", result.name),
        "omega [deg/s]",
        &[
            line("omega_x", "#d62728", &|s| s.omega.x / DEG),
            line("omega_y", "#2ca02c", &|s| s.omega.y / DEG),
            line("omega_z", "#1f77b4", &|s| s.omega.z / DEG),
        ],
    );
    let input = svg_plot(
        &format!("{}: dipole command", result.name),
        "m_x [A m^2]",
        &[line("m_x", "#000000", &|s| s.m_x)],
    );
    let mut paths = Vec::new();
    for (suffix, body) in [("omega", omega), ("mx", input)] {
        let path = dir.join(format!("{}_{suffix}.svg", result.name));
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

/// Write `<name>.csv`, NMPC telemetry when present, and optional SVG plots.
pub fn emit_series(result: &RunResult, dir: &Path, plot: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    let csv_path = dir.join(format!("{}.csv", result.name));
    write_series_csv(result, &csv_path)?;
    paths.push(csv_path);
    if !result.telemetry.is_empty() {
        let p = dir.join(format!("{}_telemetry.csv", result.name));
        write_telemetry_csv(result, &p)?;
        paths.push(p);
    }
    if plot {
        paths.extend(write_svg_plots(result, dir)?);
    }
    Ok(paths)
}
