//! Artifact writers: atomic file replacement, CSV with 17 significant digits,
//! pretty JSON and a small SVG line plotter.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{Error, Result};

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory and
/// a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io_error(dir, e))?;
    tmp.write_all(bytes).map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

/// A CSV cell: floats in `{:.16e}`, everything else verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Render a table as CSV. Refuses an empty record set.
pub fn csv_bytes(header: &[&str], rows: &[Vec<Cell>], name: &str) -> Result<Vec<u8>> {
    if rows.is_empty() {
        return Err(Error::EmptyRecords(name.to_string()));
    }
    let csv_err = |source| Error::Csv {
        path: name.to_string(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Dimension(format!("{name}: row has {} cells, header {}", row.len(), header.len())));
        }
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io {
        path: name.to_string(),
        source: e.into_error(),
    })
}

pub fn emit_csv(header: &[&str], rows: &[Vec<Cell>], path: &Path) -> Result<()> {
    write_atomic(path, &csv_bytes(header, rows, &path.display().to_string())?)
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn emit_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    write_atomic(path, &json_bytes(value)?)
}

/// One curve of a plot.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// A horizontal dashed line at `value`.
#[derive(Debug, Clone)]
pub struct ReferenceLine {
    pub value: f64,
    pub label: String,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 70.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const REFERENCE_COLORS: [&str; 3] = ["#e6a700", "#d62728", "#ff7f0e"];

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

/// Render curves and reference lines as SVG: one polyline per series (a
/// marker when a series has a single point), dashed reference lines, axis
/// labels.
pub fn svg_bytes(series: &[Series], references: &[ReferenceLine], x_label: &str, y_label: &str, name: &str) -> Result<Vec<u8>> {
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if finite.is_empty() {
        return Err(Error::EmptyRecords(name.to_string()));
    }
    let (mut x0, mut x1) = finite.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = finite
        .iter()
        .map(|p| p.1)
        .chain(references.iter().map(|r| r.value))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = *hi - *lo;
        let p = if span > 0.0 { 0.05 * span } else { 0.5 * lo.abs().max(1.0) };
        *lo -= p;
        *hi += p;
    };
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for t in nice_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.1}" stroke="black"/>"#, bottom + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{}</text>"#, bottom + 18.0, fmt_tick(t));
    }
    for t in nice_ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#, left - 8.0, y + 4.0, fmt_tick(t));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, 0.5 * WIDTH, HEIGHT - 20.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        0.5 * HEIGHT,
        0.5 * HEIGHT,
        escape(y_label)
    );
    for (i, r) in references.iter().enumerate() {
        let y = sy(r.value);
        let color = REFERENCE_COLORS[i % REFERENCE_COLORS.len()];
        let _ = writeln!(
            s,
            r#"<line x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.2}" fill="{color}" text-anchor="end">{}</text>"#, right - 4.0, y - 4.0, escape(&r.label));
    }
    for (i, series) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = series.points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        if pts.len() == 1 {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(pts[0].0), sy(pts[0].1));
        } else if !pts.is_empty() {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            left + 8.0,
            top + 16.0 + 14.0 * i as f64,
            escape(&series.name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s.into_bytes())
}

pub fn emit_svg(series: &[Series], references: &[ReferenceLine], x_label: &str, y_label: &str, path: &Path) -> Result<()> {
    write_atomic(path, &svg_bytes(series, references, x_label, y_label, &path.display().to_string())?)
}

fn fmt_tick(t: f64) -> String {
    let r = (t * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
