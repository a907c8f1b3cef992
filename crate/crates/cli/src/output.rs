use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ktbill_core::{ConvexBody, Vector};

use crate::CliError;

/// Shortest round-trip form; exponent notation outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}

pub fn nums(v: &Vector) -> Vec<String> {
    v.iter().map(|x| num(*x)).collect()
}

/// A CSV table assembled in memory and written in one go.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_path(path)
            .map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush()
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

pub fn out_path(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir.join(name))
}

/// Outline of a planar body as a closed polyline.
pub fn outline(body: &ConvexBody, samples: usize) -> Vec<[f64; 2]> {
    if let Some(vs) = body.polygon_vertices() {
        return vs.iter().map(|v| [v[0], v[1]]).collect();
    }
    let c = body.center().clone();
    (0..samples)
        .filter_map(|i| {
            let th = std::f64::consts::TAU * i as f64 / samples as f64;
            let w = Vector::from_vec(vec![th.cos(), th.sin()]);
            body.ray_exit(&c, &w).ok().map(|p| [p[0], p[1]])
        })
        .collect()
}

/// Minimal SVG: each layer is a polyline with a stroke colour and a
/// closed flag. The y axis points up.
pub struct Svg {
    layers: Vec<(Vec<[f64; 2]>, &'static str, bool)>,
}

impl Svg {
    pub fn new() -> Self {
        Svg { layers: Vec::new() }
    }

    pub fn path(&mut self, points: Vec<[f64; 2]>, stroke: &'static str, closed: bool) {
        if !points.is_empty() {
            self.layers.push((points, stroke, closed));
        }
    }

    pub fn render(&self, size: f64) -> String {
        let all = self.layers.iter().flat_map(|l| l.0.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in all {
            x0 = x0.min(p[0]);
            x1 = x1.max(p[0]);
            y0 = y0.min(p[1]);
            y1 = y1.max(p[1]);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-12);
        let pad = 0.05 * span;
        let scale = size / (span + 2.0 * pad);
        let map = |p: &[f64; 2]| ((p[0] - x0 + pad) * scale, (y1 - p[1] + pad) * scale);
        let w = (x1 - x0 + 2.0 * pad) * scale;
        let h = (y1 - y0 + 2.0 * pad) * scale;
        let mut s = String::new();
        writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.1}\" height=\"{h:.1}\" viewBox=\"0 0 {w:.1} {h:.1}\">"
        )
        .unwrap();
        for (points, stroke, closed) in &self.layers {
            let mut d = String::new();
            for (i, p) in points.iter().enumerate() {
                let (x, y) = map(p);
                write!(d, "{}{x:.3} {y:.3} ", if i == 0 { "M" } else { "L" }).unwrap();
            }
            if *closed {
                d.push('Z');
            }
            writeln!(
                s,
                "  <path d=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1\"/>",
                d.trim_end()
            )
            .unwrap();
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render(400.0)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_round_trips() {
        for x in [0.0, 1.0, -0.25, 4.0, 1e-7, 3.0e20, std::f64::consts::PI, 1e-4, 123456.789] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(4.0), "4");
        assert_eq!(num(1e-7), "1e-7");
    }

    #[test]
    fn svg_is_well_formed() {
        let mut svg = Svg::new();
        svg.path(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], "black", true);
        let text = svg.render(100.0);
        assert!(text.starts_with("<svg") && text.ends_with("</svg>\n"));
        assert!(text.contains("M4.545 95.455 L95.455 95.455 L95.455 4.545 Z"));
    }
}
