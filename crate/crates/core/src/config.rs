//! Plain-text body and experiment files.
//!
//! A file is a sequence of lines. `#` starts a comment, blank lines are
//! ignored, `[body NAME]` and `[experiment]` open sections, and every other
//! line is `key = value`. Lists are separated by commas or whitespace.
//!
//! ```text
//! [body K]
//! kind = superellipsoid
//! semi_axes = 1.0, 0.8
//! exponent = 4
//!
//! [body T]
//! file = disk.body          # relative to this file
//!
//! [experiment]
//! kind = capacity
//! m_max = 4
//! ```
//!
//! Body keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `kind` | `ball`, `ellipsoid`, `superellipsoid`, `blend`, `germ` or `polygon` |
//! | `dimension` | ambient dimension; required for `ball`, `germ` and `matrix` |
//! | `radius` | radius of a `ball` |
//! | `semi_axes` | semi-axes of an axis-aligned body |
//! | `matrix` | `A` of `{yᵀAy < 1}`, row-major, instead of `semi_axes` |
//! | `exponent` | exponent `p >= 2` of `superellipsoid` and `blend` |
//! | `weight` | blend weight in `[0, 1]` |
//! | `vertices` | polygon vertices `x1 y1 x2 y2 ...` |
//! | `c[i,j,..]` | germ coefficient of `x_1^i x_2^j ..` |
//! | `germ_radius` | evaluation radius of a germ (default 1) |
//! | `scale` | homothety about the center, applied first |
//! | `center` | translation, applied last |
//! | `file` | read the body keys from another file instead |
//!
//! A body file read on its own (see [`parse_body`]) holds body keys with no
//! section header. Errors carry the 1-based line number; line 0 refers to
//! the file as a whole.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::convex_body::{ConvexBody, GraphGerm};
use crate::error::{Error, Result};
use crate::numeric::{Matrix, Vector};
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    line: usize,
    value: String,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| parse_error(0, format!("cannot read {}: {e}", path.display())))
}

fn split_key_value(line: usize, text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| parse_error(line, format!("expected `key = value`, found `{text}`")))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(parse_error(line, "empty key"));
    }
    if v.is_empty() {
        return Err(parse_error(line, format!("missing value for `{k}`")));
    }
    Ok((k.to_string(), v.to_string()))
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

#[derive(Clone, Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn insert(&mut self, line: usize, key: String, value: String) -> Result<()> {
        if let Some(prev) = self.entries.get(&key) {
            return Err(parse_error(
                line,
                format!("duplicate key `{key}` (first set on line {})", prev.line),
            ));
        }
        self.entries.insert(key, Entry { line, value });
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn require(&self, key: &str) -> Result<&Entry> {
        self.get(key)
            .ok_or_else(|| parse_error(self.line, format!("missing key `{key}`")))
    }
}

fn number(e: &Entry) -> Result<f64> {
    e.value
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_error(e.line, format!("`{}` is not a finite number", e.value)))
}

fn count(e: &Entry) -> Result<usize> {
    e.value
        .parse::<usize>()
        .map_err(|_| parse_error(e.line, format!("`{}` is not a non-negative integer", e.value)))
}

fn numbers(e: &Entry) -> Result<Vec<f64>> {
    e.value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_error(e.line, format!("`{s}` is not a finite number")))
        })
        .collect()
}

/// Parses `c[i,j,..]` into its exponent list.
fn coefficient_key(line: usize, key: &str) -> Result<Option<Vec<u32>>> {
    let Some(rest) = key.strip_prefix("c[") else {
        return Ok(None);
    };
    let inner = rest
        .strip_suffix(']')
        .ok_or_else(|| parse_error(line, format!("malformed coefficient key `{key}`")))?;
    inner
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| parse_error(line, format!("bad exponent `{}` in `{key}`", s.trim())))
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

const BODY_KEYS: &[&str] = &[
    "kind",
    "dimension",
    "radius",
    "semi_axes",
    "matrix",
    "exponent",
    "weight",
    "vertices",
    "germ_radius",
    "scale",
    "center",
];

fn build_body(section: &Section) -> Result<ConvexBody> {
    for (k, e) in &section.entries {
        if !BODY_KEYS.contains(&k.as_str()) && coefficient_key(e.line, k)?.is_none() {
            return Err(parse_error(e.line, format!("unknown body key `{k}`")));
        }
    }
    let kind = section.require("kind")?;
    let wrap = |line: usize| move |err: Error| parse_error(line, err.to_string());
    let dimension = section.get("dimension").map(count).transpose()?;
    let check_dim = |n: usize, line: usize| -> Result<()> {
        match dimension {
            Some(d) if d != n => Err(parse_error(line, format!("dimension is {d} but data has dimension {n}"))),
            _ => Ok(()),
        }
    };
    let semi = || -> Result<Vec<f64>> {
        let e = section.require("semi_axes")?;
        let s = numbers(e)?;
        check_dim(s.len(), e.line)?;
        Ok(s)
    };
    let exponent = || section.require("exponent").and_then(number);
    let body = match kind.value.as_str() {
        "ball" => {
            let d = dimension.ok_or_else(|| parse_error(kind.line, "ball needs `dimension`"))?;
            let line = section.get("radius").map_or(kind.line, |e| e.line);
            let r = section.get("radius").map(number).transpose()?.unwrap_or(1.0);
            ConvexBody::ball(d, r).map_err(wrap(line))?
        }
        "ellipsoid" => match section.get("matrix") {
            Some(e) => {
                let d = dimension.ok_or_else(|| parse_error(e.line, "matrix needs `dimension`"))?;
                let vals = numbers(e)?;
                if vals.len() != d * d {
                    return Err(parse_error(e.line, format!("expected {} matrix entries, found {}", d * d, vals.len())));
                }
                ConvexBody::ellipsoid(Matrix::from_row_slice(d, d, &vals)).map_err(wrap(e.line))?
            }
            None => ConvexBody::ellipsoid_axes(&semi()?).map_err(wrap(kind.line))?,
        },
        "superellipsoid" => ConvexBody::superellipsoid(&semi()?, exponent()?).map_err(wrap(kind.line))?,
        "blend" => {
            let w = number(section.require("weight")?)?;
            ConvexBody::blend(&semi()?, exponent()?, w).map_err(wrap(kind.line))?
        }
        "polygon" => {
            let e = section.require("vertices")?;
            let vals = numbers(e)?;
            if vals.len() % 2 != 0 {
                return Err(parse_error(e.line, "polygon vertices need an even number of coordinates"));
            }
            check_dim(2, e.line)?;
            let verts = vals.chunks(2).map(Vector::from_column_slice).collect();
            ConvexBody::polygon(verts).map_err(wrap(e.line))?
        }
        "germ" => {
            let d = dimension.ok_or_else(|| parse_error(kind.line, "germ needs `dimension`"))?;
            if d < 2 {
                return Err(parse_error(kind.line, "germ dimension must be at least 2"));
            }
            let mut poly = Poly::zero(d - 1);
            for (k, e) in &section.entries {
                if let Some(exps) = coefficient_key(e.line, k)? {
                    if exps.len() != d - 1 {
                        return Err(parse_error(e.line, format!("`{k}` needs {} exponents", d - 1)));
                    }
                    poly.add_term(exps, number(e)?);
                }
            }
            let radius = section.get("germ_radius").map(number).transpose()?.unwrap_or(1.0);
            ConvexBody::germ(GraphGerm::new(poly, radius).map_err(wrap(kind.line))?)
        }
        other => return Err(parse_error(kind.line, format!("unknown body kind `{other}`"))),
    };
    let body = match section.get("scale") {
        Some(e) => body.scaled(number(e)?).map_err(wrap(e.line))?,
        None => body,
    };
    match section.get("center") {
        Some(e) => {
            let c = numbers(e)?;
            if c.len() != body.dim() {
                return Err(parse_error(e.line, format!("center needs {} coordinates", body.dim())));
            }
            body.translated(&Vector::from_vec(c)).map_err(wrap(e.line))
        }
        None => Ok(body),
    }
}

fn body_section(text: &str) -> Result<Section> {
    let mut section = Section {
        line: 1,
        ..Section::default()
    };
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            return Err(parse_error(i + 1, "section headers are not allowed in a body file"));
        }
        let (k, v) = split_key_value(i + 1, line)?;
        section.insert(i + 1, k, v)?;
    }
    Ok(section)
}

/// Builds a body from a standalone body file.
pub fn parse_body(text: &str) -> Result<ConvexBody> {
    build_body(&body_section(text)?)
}

/// Reads a standalone body file.
pub fn load_body(path: &Path) -> Result<ConvexBody> {
    parse_body(&read_file(path)?)
}

/// Bodies and numeric parameters of one experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    bodies: Vec<(String, ConvexBody)>,
    params: Section,
}

impl ExperimentConfig {
    /// Parses a config; `file` references resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut bodies: Vec<(String, usize, Section)> = Vec::new();
        let mut params: Option<Section> = None;
        enum Current {
            None,
            Body,
            Experiment,
        }
        let mut current = Current::None;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('[') {
                let header = header
                    .strip_suffix(']')
                    .ok_or_else(|| parse_error(n, "unterminated section header"))?
                    .trim();
                let mut words = header.split_whitespace();
                match (words.next(), words.next(), words.next()) {
                    (Some("body"), Some(name), None) => {
                        if let Some((_, first, _)) = bodies.iter().find(|(b, _, _)| b == name) {
                            return Err(parse_error(n, format!("body `{name}` already defined on line {first}")));
                        }
                        bodies.push((name.to_string(), n, Section { line: n, ..Section::default() }));
                        current = Current::Body;
                    }
                    (Some("experiment"), None, None) => {
                        if params.is_some() {
                            return Err(parse_error(n, "duplicate [experiment] section"));
                        }
                        params = Some(Section { line: n, ..Section::default() });
                        current = Current::Experiment;
                    }
                    _ => return Err(parse_error(n, format!("unknown section `[{header}]`"))),
                }
                continue;
            }
            let (k, v) = split_key_value(n, line)?;
            match current {
                Current::None => return Err(parse_error(n, "key outside of any section")),
                Current::Body => bodies.last_mut().unwrap().2.insert(n, k, v)?,
                Current::Experiment => params.as_mut().unwrap().insert(n, k, v)?,
            }
        }
        let bodies = bodies
            .into_iter()
            .map(|(name, _, section)| {
                let body = match section.get("file") {
                    Some(e) => {
                        if section.entries.len() > 1 {
                            return Err(parse_error(e.line, "`file` cannot be combined with other keys"));
                        }
                        let path = match base {
                            Some(dir) => dir.join(&e.value),
                            None => PathBuf::from(&e.value),
                        };
                        load_body(&path).map_err(|err| match err {
                            Error::Parse { line, message } => parse_error(
                                e.line,
                                format!("in {} line {line}: {message}", path.display()),
                            ),
                            other => other,
                        })?
                    }
                    None => build_body(&section)?,
                };
                Ok((name, body))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentConfig {
            bodies,
            params: params.unwrap_or_default(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        ExperimentConfig::parse(&text, path.parent())
    }

    /// Body names in file order.
    pub fn body_names(&self) -> impl Iterator<Item = &str> {
        self.bodies.iter().map(|(n, _)| n.as_str())
    }

    pub fn body(&self, name: &str) -> Result<&ConvexBody> {
        self.bodies
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| b)
            .ok_or_else(|| parse_error(0, format!("no body named `{name}`")))
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.get(key).is_some()
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(|e| e.value.as_str())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        self.params.get(key).map(number).transpose().map(|v| v.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.params.get(key).map(count).transpose().map(|v| v.unwrap_or(default))
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.params.get(key).map(numbers).transpose()
    }

    /// Line on which `key` was set, if any.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.params.get(key).map(|e| e.line)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn bodies_of_every_kind() {
        let text = "
# a comment
[body disk]
kind = ball
dimension = 2
radius = 2

[body e]
kind = ellipsoid
dimension = 2
matrix = 4 0, 0 1   # row-major
center = 1, 0

[body s]
kind = superellipsoid
semi_axes = 1 0.8
exponent = 4

[body b]
kind = blend
semi_axes = 1 1 1
exponent = 6
weight = 0.5

[body g]
kind = germ
dimension = 3
c[2,0] = 0.5
c[0,2] = 0.5
c[3,1] = 0.01

[body sq]
kind = polygon
vertices = 1 1, -1 1, -1 -1, 1 -1

[experiment]
kind = capacity
m_max = 4
tol = 1e-7
";
        let cfg = ExperimentConfig::parse(text, None).unwrap();
        assert_eq!(cfg.body_names().collect::<Vec<_>>(), ["disk", "e", "s", "b", "g", "sq"]);
        let disk = cfg.body("disk").unwrap();
        assert!((disk.support(&Vector::from_vec(vec![1.0, 0.0])).unwrap() - 2.0).abs() < 1e-14);
        let e = cfg.body("e").unwrap();
        assert!((e.support(&Vector::from_vec(vec![1.0, 0.0])).unwrap() - 1.5).abs() < 1e-14);
        assert_eq!(cfg.body("s").unwrap().kind(), "superellipsoid");
        assert_eq!(cfg.body("b").unwrap().dim(), 3);
        let g = cfg.body("g").unwrap().graph_germ().unwrap();
        assert_eq!(g.coeff(&[3, 1]), 0.01);
        assert!((cfg.body("sq").unwrap().volume().unwrap().0 - 4.0).abs() < 1e-14);
        assert_eq!(cfg.text("kind"), Some("capacity"));
        assert_eq!(cfg.usize_or("m_max", 2).unwrap(), 4);
        assert_eq!(cfg.f64_or("tol", 1.0).unwrap(), 1e-7);
        assert_eq!(cfg.f64_or("missing", 3.0).unwrap(), 3.0);
        assert_eq!(cfg.line_of("m_max"), Some(38));
    }

    #[test]
    fn errors_report_line_numbers() {
        let cases = [
            ("[body a]\nkind = ball\ndimension = two\n", 3),
            ("[body a]\nkind = ball\nkind = ball\n", 3),
            ("x = 1\n", 1),
            ("[body a]\nkind = cube\n", 2),
            ("[body a]\nkind = ellipsoid\ndimension = 2\nmatrix = 1 0 0\n", 4),
            ("[body a]\nkind = ellipsoid\ndimension = 2\nmatrix = 1 2, 2 1\n", 4),
            ("[body a]\nkind = superellipsoid\nsemi_axes = 1 1\nexponent = 1.5\n", 2),
            ("[body a]\nkind = germ\ndimension = 3\nc[2] = 1\n", 4),
            ("[body a]\nkind = ball\ndimension = 2\ncolour = red\n", 4),
            ("\n\n[body a\n", 3),
            ("[experiment]\nk = 1\n[experiment]\n", 3),
            ("[body a]\nkind = ball\n", 2),
            ("[body a]\nkind = ball\ndimension = 2\n[body a]\n", 4),
            ("[body a]\nkind = ball\nradius =\n", 3),
        ];
        for (text, line) in cases {
            let err = ExperimentConfig::parse(text, None).unwrap_err();
            assert_eq!(line_of(err), line, "{text}");
        }
        let cfg = ExperimentConfig::parse("[experiment]\nm = -1\n", None).unwrap();
        assert_eq!(line_of(cfg.usize_or("m", 0).unwrap_err()), 2);
    }

    #[test]
    fn body_files_are_resolved_relative_to_the_config() {
        let dir = std::env::temp_dir().join(format!("ktbill-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("t.body"), "kind = ball\ndimension = 2\nradius = 3\n").unwrap();
        std::fs::write(dir.join("bad.body"), "kind = ball\n\nradius = x\n").unwrap();
        let cfg = ExperimentConfig::parse("[body T]\nfile = t.body\n", Some(&dir)).unwrap();
        assert!((cfg.body("T").unwrap().bounding_radius() - 3.0).abs() < 1e-12);
        let err = ExperimentConfig::parse("\n[body T]\nfile = bad.body\n", Some(&dir)).unwrap_err();
        assert_eq!(line_of(err), 3);
        let err = ExperimentConfig::parse("[body T]\nfile = nope.body\n", Some(&dir)).unwrap_err();
        assert_eq!(line_of(err), 2);
        assert!(parse_body("[body x]\n").is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
