//! Plain-text artifact writers. Output depends only on the input, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use critlab::geometry::BBox;
use critlab::Point;

use crate::CliError;

/// One SVG element: a closed loop becomes a polygon, an open curve a
/// polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Figure {
    pub fn closed(points: Vec<Point>) -> Self {
        Figure { points, closed: true }
    }

    pub fn open(points: Vec<Point>) -> Self {
        Figure { points, closed: false }
    }
}

const SIZE: f64 = 800.0;
const MARGIN: f64 = 10.0;

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Standalone SVG with the figures in the given order, the y axis pointing
/// up and the bounding box scaled to 800 units.
pub fn svg_string(figures: &[Figure], stamp: &str) -> Result<String, CliError> {
    if figures.is_empty() || figures.iter().any(|f| f.points.is_empty()) {
        return Err(CliError::Usage("nothing to draw".into()));
    }
    let bb = BBox::of(figures.iter().flat_map(|f| f.points.iter().copied())).ok_or_else(|| CliError::Usage("nothing to draw".into()))?;
    let span = bb.width().max(bb.height());
    let scale = if span > 0.0 { (SIZE - 2.0 * MARGIN) / span } else { 1.0 };
    let (w, h) = (bb.width() * scale + 2.0 * MARGIN, bb.height() * scale + 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#);
    let _ = writeln!(s, "<!-- {} -->", stamp.replace("--", "- -"));
    let stroke = (0.5f64).max(SIZE / 1000.0);
    let _ = writeln!(s, r#"<g fill="none" stroke="black" stroke-width="{stroke:.2}" stroke-linejoin="round">"#);
    for f in figures {
        let tag = if f.closed { "polygon" } else { "polyline" };
        let _ = write!(s, r#"<{tag} points=""#);
        for (i, p) in f.points.iter().enumerate() {
            let x = (p.re - bb.min.re) * scale + MARGIN;
            let y = (bb.max.im - p.im) * scale + MARGIN;
            let sep = if i == 0 { "" } else { " " };
            let _ = write!(s, "{sep}{x:.3},{y:.3}");
        }
        let _ = writeln!(s, r#""/>"#);
    }
    s.push_str("</g>\n</svg>\n");
    Ok(s)
}

pub fn emit_svg(figures: &[Figure], stamp: &str, path: &Path) -> Result<(), CliError> {
    write_file(path, &svg_string(figures, stamp)?)
}

/// CSV with a leading `#` line carrying the run stamp.
pub fn csv_string(stamp: &str, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = format!("# {stamp}\n{}\n", header.join(","));
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Plain (ASCII) graymap, rows top to bottom, values scaled linearly from
/// their range onto 0..=255.
pub fn pgm_string(width: usize, height: usize, values: &[f64], stamp: &str) -> Result<String, CliError> {
    if width == 0 || height == 0 || values.len() != width * height {
        return Err(CliError::Usage("field does not match its dimensions".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if hi > lo { hi - lo } else { 1.0 };
    let mut s = format!("P2\n# {stamp}\n# range {lo} {hi}\n{width} {height}\n255\n");
    for row in values.chunks(width) {
        let line: Vec<String> = row.iter().map(|v| (((v - lo) / range) * 255.0).round().clamp(0.0, 255.0).to_string()).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    Ok(s)
}
