//! Plain-text file formats shared by the CLI subcommands.
//!
//! * dataset CSV: optional `# d=<label_dim> name=<name> seed=<seed>` header,
//!   then one row per sample, `D` feature columns followed by `d` label
//!   columns;
//! * graph dump: `# n=<n> k=<k>` header, then `i,j,weight` for `i < j`;
//! * alignment dump: `# n=<n> method=<method|none> k=<k>` header, then
//!   `i,j,value` for the upper triangle including the diagonal;
//! * selection JSON: `{method, seed, landmarks, trace}`;
//! * landmark list: selection JSON or whitespace/comma separated indices.
//!
//! Numbers are written in shortest round-trip exponent form, so a
//! write/read cycle is exact.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use gcls_core::{
    AlignmentMatrix, AlignmentMethod, Dataset, NeighborGraph, SelectionResult, SparseSymMatrix,
};
use nalgebra::DMatrix;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Core {
        path: PathBuf,
        #[source]
        source: gcls_core::Error,
    },
}

pub type Result<T> = std::result::Result<T, FormatError>;

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.into(),
        source,
    })
}

fn write_with(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<()> {
    let io_err = |source| FormatError::Io {
        path: path.into(),
        source,
    };
    let mut w = BufWriter::new(fs::File::create(path).map_err(io_err)?);
    f(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse {
        path: path.into(),
        line,
        msg: msg.into(),
    }
}

fn core_err(path: &Path) -> impl FnOnce(gcls_core::Error) -> FormatError + '_ {
    move |source| FormatError::Core {
        path: path.into(),
        source,
    }
}

/// `key=value` tokens of every `#` line.
fn header_fields(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .flat_map(|l| l.split_whitespace())
        .filter_map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
        })
        .collect()
}

fn header_value<T: std::str::FromStr>(
    fields: &HashMap<String, String>,
    key: &str,
    path: &Path,
) -> Result<Option<T>> {
    fields
        .get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| parse_err(path, 1, format!("bad header value {key}={v}")))
        })
        .transpose()
}

/// Numeric CSV records with their 1-based line numbers; `#` lines skipped.
fn numeric_records(text: &str, path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let vals = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| parse_err(path, line, format!("not a number: '{f}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((line, vals));
    }
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_dataset<W: Write>(w: &mut W, ds: &Dataset) -> std::io::Result<()> {
    write!(w, "# d={}", ds.label_dim())?;
    if !ds.name().is_empty() && !ds.name().contains(char::is_whitespace) {
        write!(w, " name={}", ds.name())?;
    }
    if let Some(seed) = ds.seed() {
        write!(w, " seed={seed}")?;
    }
    writeln!(w)?;
    let x = ds.samples();
    for i in 0..ds.len() {
        let mut fields: Vec<String> = x.column(i).iter().map(|&v| num(v)).collect();
        if let Some(z) = ds.labels() {
            fields.extend(z.column(i).iter().map(|&v| num(v)));
        }
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn save_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    write_with(path, |w| write_dataset(w, ds))
}

/// Parse a dataset CSV. Without a `d=` header every column is a feature.
pub fn parse_dataset(text: &str, path: &Path) -> Result<Dataset> {
    let fields = header_fields(text);
    let d: usize = header_value(&fields, "d", path)?.unwrap_or(0);
    let rows = numeric_records(text, path)?;
    let Some((_, first)) = rows.first() else {
        return Err(parse_err(path, 1, "no data rows"));
    };
    let width = first.len();
    if width <= d {
        return Err(parse_err(
            path,
            1,
            format!("{width} columns leave no features for d={d} labels"),
        ));
    }
    if let Some((line, r)) = rows.iter().find(|(_, r)| r.len() != width) {
        return Err(parse_err(
            path,
            *line,
            format!("expected {width} columns, found {}", r.len()),
        ));
    }
    let n = rows.len();
    let dim = width - d;
    let samples = DMatrix::from_fn(dim, n, |r, c| rows[c].1[r]);
    let labels = (d > 0).then(|| DMatrix::from_fn(d, n, |r, c| rows[c].1[dim + r]));
    let name = fields.get("name").cloned().unwrap_or_default();
    let ds = Dataset::new(samples, labels, name).map_err(core_err(path))?;
    Ok(match header_value::<u64>(&fields, "seed", path)? {
        Some(seed) => ds.with_seed(seed),
        None => ds,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read_text(path)?, path)
}

/// The header carries `k` only when neighborhoods are a strict subset of the
/// adjacency; without it the reader takes every adjacent node.
pub fn write_graph<W: Write>(w: &mut W, g: &NeighborGraph) -> std::io::Result<()> {
    let full = (0..g.n()).all(|i| g.neighborhood(i).len() == g.neighbors(i).len());
    if full {
        writeln!(w, "# n={}", g.n())?;
    } else {
        writeln!(w, "# n={} k={}", g.n(), g.k())?;
    }
    for (i, j, d) in g.edges() {
        writeln!(w, "{i},{j},{}", num(d))?;
    }
    Ok(())
}

pub fn save_graph(path: &Path, g: &NeighborGraph) -> Result<()> {
    write_with(path, |w| write_graph(w, g))
}

fn index_triplets(text: &str, path: &Path) -> Result<Vec<(usize, usize, f64)>> {
    numeric_records(text, path)?
        .into_iter()
        .map(|(line, r)| {
            let idx = |v: f64| {
                (v >= 0.0 && v.fract() == 0.0)
                    .then_some(v as usize)
                    .ok_or_else(|| parse_err(path, line, format!("bad index {v}")))
            };
            match r.as_slice() {
                &[i, j, w] => Ok((idx(i)?, idx(j)?, w)),
                _ => Err(parse_err(
                    path,
                    line,
                    format!("expected i,j,value, found {} fields", r.len()),
                )),
            }
        })
        .collect()
}

pub fn parse_graph(text: &str, path: &Path) -> Result<NeighborGraph> {
    let fields = header_fields(text);
    let n: usize =
        header_value(&fields, "n", path)?.ok_or_else(|| parse_err(path, 1, "missing n= header"))?;
    let k: Option<usize> = header_value(&fields, "k", path)?;
    NeighborGraph::from_edges(n, &index_triplets(text, path)?, k).map_err(core_err(path))
}

pub fn load_graph(path: &Path) -> Result<NeighborGraph> {
    parse_graph(&read_text(path)?, path)
}

pub fn write_alignment<W: Write>(w: &mut W, a: &AlignmentMatrix) -> std::io::Result<()> {
    let method = a.method().map_or("none", AlignmentMethod::as_str);
    writeln!(w, "# n={} method={method} k={}", a.n(), a.graph_k())?;
    for (i, j, v) in a.matrix().upper_triplets() {
        writeln!(w, "{i},{j},{}", num(v))?;
    }
    Ok(())
}

pub fn save_alignment(path: &Path, a: &AlignmentMatrix) -> Result<()> {
    write_with(path, |w| write_alignment(w, a))
}

pub fn parse_alignment(text: &str, path: &Path) -> Result<AlignmentMatrix> {
    let fields = header_fields(text);
    let n: usize =
        header_value(&fields, "n", path)?.ok_or_else(|| parse_err(path, 1, "missing n= header"))?;
    let k: usize = header_value(&fields, "k", path)?.unwrap_or(0);
    let method = match fields.get("method").map(String::as_str) {
        None | Some("none") => None,
        Some(m) => Some(m.parse::<AlignmentMethod>().map_err(core_err(path))?),
    };
    let triplets = index_triplets(text, path)?;
    if let Some(&(i, j, _)) = triplets.iter().find(|t| t.0 > t.1) {
        return Err(parse_err(
            path,
            1,
            format!("entry ({i},{j}) below the diagonal; store i <= j only"),
        ));
    }
    let m = SparseSymMatrix::from_triplets(n, &triplets).map_err(core_err(path))?;
    Ok(AlignmentMatrix::from_matrix(m, method, k))
}

pub fn load_alignment(path: &Path) -> Result<AlignmentMatrix> {
    parse_alignment(&read_text(path)?, path)
}

pub fn save_selection(path: &Path, s: &SelectionResult) -> Result<()> {
    let json = serde_json::to_string_pretty(s).map_err(|source| FormatError::Json {
        path: path.into(),
        source,
    })?;
    write_with(path, |w| writeln!(w, "{json}"))
}

/// Landmarks from a selection JSON or a plain list of indices.
pub fn parse_landmarks(text: &str, path: &Path) -> Result<Vec<usize>> {
    if text.trim_start().starts_with('{') {
        let sel: SelectionResult =
            serde_json::from_str(text).map_err(|source| FormatError::Json {
                path: path.into(),
                source,
            })?;
        return Ok(sel.landmarks);
    }
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
        {
            out.push(
                tok.parse()
                    .map_err(|_| parse_err(path, ln + 1, format!("not an index: '{tok}'")))?,
            );
        }
    }
    if out.is_empty() {
        return Err(parse_err(path, 1, "no landmark indices"));
    }
    Ok(out)
}

pub fn load_landmarks(path: &Path) -> Result<Vec<usize>> {
    parse_landmarks(&read_text(path)?, path)
}
