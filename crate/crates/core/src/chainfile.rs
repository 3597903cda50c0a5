//! Line-oriented chain files.
//!
//! ```text
//! #% manifold=sphere dims=3 sampler=rwmh seed=7 burn_in=1000
//! # any other line starting with '#' is a comment
//! 0.0,0.0,1.0
//! 0.6,0.0,0.8
//! ```
//!
//! The directive must be the first non-blank line. `dims` is `d` for spheres,
//! `m` for SPD and correlation matrices and `m,p` for Grassmann frames. Rows
//! are comma-separated and row-major. Values are written with 17 significant
//! digits, which reproduces every `f64` exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Chain, ChainMeta, Manifold, Point};

const DIRECTIVE: &str = "#%";

fn line_err(line: usize, reason: impl Into<String>) -> Error {
    Error::ChainFile { line, reason: reason.into() }
}

struct Header {
    manifold: Manifold,
    dims: Vec<usize>,
    meta: ChainMeta,
    has_meta: bool,
}

fn parse_directive(body: &str, line: usize) -> Result<Header> {
    let (mut manifold, mut dims) = (None, None);
    let mut meta = ChainMeta::default();
    let mut has_meta = false;
    for tok in body.split_whitespace() {
        let (key, value) = tok.split_once('=').ok_or_else(|| line_err(line, format!("malformed directive field `{tok}`")))?;
        let bad = |what: &str| line_err(line, format!("invalid {what} `{value}`"));
        match key {
            "manifold" => manifold = Some(value.parse::<Manifold>().map_err(|e| line_err(line, e.to_string()))?),
            "dims" => {
                dims = Some(
                    value
                        .split(',')
                        .map(|d| d.trim().parse::<usize>().ok().filter(|&d| d > 0))
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad("dims"))?,
                )
            }
            "sampler" => meta.sampler = Some(value.to_string()),
            "seed" => meta.seed = Some(value.parse().map_err(|_| bad("seed"))?),
            "burn_in" => meta.burn_in = Some(value.parse().map_err(|_| bad("burn_in"))?),
            "iid" => meta.iid = value.parse().map_err(|_| bad("iid flag"))?,
            other => return Err(line_err(line, format!("unknown directive key `{other}`"))),
        }
        has_meta |= !matches!(key, "manifold" | "dims");
    }
    let manifold = manifold.ok_or_else(|| line_err(line, "directive lacks manifold="))?;
    let dims = dims.ok_or_else(|| line_err(line, "directive lacks dims="))?;
    let arity = if manifold == Manifold::Grassmann { 2 } else { 1 };
    if dims.len() != arity {
        return Err(line_err(line, format!("{manifold} takes {arity} dimension(s), got {}", dims.len())));
    }
    Ok(Header { manifold, dims, meta, has_meta })
}

/// Parses chain file contents.
pub fn parse_chain(text: &str) -> Result<Chain> {
    let mut header: Option<Header> = None;
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(body) = s.strip_prefix(DIRECTIVE) {
            if header.is_some() {
                return Err(line_err(line, "repeated directive"));
            }
            header = Some(parse_directive(body, line)?);
            continue;
        }
        if s.starts_with('#') {
            continue;
        }
        let h = header.as_ref().ok_or_else(|| line_err(line, "data before the `#% manifold=... dims=...` directive"))?;
        let row = s
            .split(',')
            .map(|v| {
                let v = v.trim();
                v.parse::<f64>().map_err(|_| line_err(line, format!("`{v}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let point = Point::from_row(h.manifold, &h.dims, &row).map_err(|e| line_err(line, e.to_string()))?;
        points.push(point);
    }
    let h = header.ok_or_else(|| line_err(1, "missing `#% manifold=... dims=...` directive"))?;
    if points.is_empty() {
        return Err(line_err(text.lines().count().max(1), "chain file has no data rows"));
    }
    let chain = Chain::new(points)?;
    Ok(if h.has_meta { chain.with_meta(h.meta) } else { chain })
}

pub fn read_chain(path: impl AsRef<Path>) -> Result<Chain> {
    parse_chain(&fs::read_to_string(path)?)
}

/// Renders a chain in the file format.
pub fn format_chain(chain: &Chain) -> String {
    let dims: Vec<String> = chain.dims().iter().map(|d| d.to_string()).collect();
    let mut out = format!("{DIRECTIVE} manifold={} dims={}", chain.manifold(), dims.join(","));
    if let Some(m) = chain.meta() {
        if let Some(s) = &m.sampler {
            write!(out, " sampler={s}").unwrap();
        }
        if let Some(s) = m.seed {
            write!(out, " seed={s}").unwrap();
        }
        if let Some(b) = m.burn_in {
            write!(out, " burn_in={b}").unwrap();
        }
        if m.iid {
            out.push_str(" iid=true");
        }
    }
    out.push('\n');
    for p in chain.points() {
        let row: Vec<String> = p.to_row().iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_chain(path: impl AsRef<Path>, chain: &Chain) -> Result<()> {
    write_atomic(path, format_chain(chain).as_bytes())
}
