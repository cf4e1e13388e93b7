//! Network file formats. Node indices are 1-based in files and 0-based in
//! memory.
//!
//! * edge-list CSV: optional header `n=<int>`, then `i,j,w` lines meaning
//!   `a_ij = w`; blank lines and `#` comments are skipped.
//! * Matrix Market: `coordinate real general` (or `symmetric`).
//! * dense JSON: `{ "n": int, "A": [[...]], "directed": bool }`.

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{dense_rows, Network};
use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkFormat {
    EdgeListCsv,
    MatrixMarket,
    DenseJson,
}

impl NetworkFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" | "txt" | "edges" => Some(NetworkFormat::EdgeListCsv),
            "mtx" | "mm" => Some(NetworkFormat::MatrixMarket),
            "json" => Some(NetworkFormat::DenseJson),
            _ => None,
        }
    }
}

impl FromStr for NetworkFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list-csv" | "csv" | "edges" => Ok(NetworkFormat::EdgeListCsv),
            "matrix-market" | "mtx" => Ok(NetworkFormat::MatrixMarket),
            "dense-json" | "json" => Ok(NetworkFormat::DenseJson),
            other => Err(Error::InvalidArgument(format!("unknown network format '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DenseJson {
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    directed: bool,
}

pub fn load_network(path: &Path, format: NetworkFormat) -> Result<Network> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network(&text, format)
}

pub fn save_network(net: &Network, path: &Path, format: NetworkFormat) -> Result<()> {
    fs::write(path, write_network(net, format)).map_err(|e| Error::io(path, e))
}

pub fn parse_network(text: &str, format: NetworkFormat) -> Result<Network> {
    match format {
        NetworkFormat::EdgeListCsv => parse_edge_list(text),
        NetworkFormat::MatrixMarket => parse_matrix_market(text),
        NetworkFormat::DenseJson => parse_dense_json(text),
    }
}

pub fn write_network(net: &Network, format: NetworkFormat) -> String {
    let a = net.adjacency();
    let n = net.n();
    match format {
        NetworkFormat::EdgeListCsv => {
            let mut out = format!("n={n}\n");
            for i in 0..n {
                for j in 0..n {
                    if a[(i, j)] != 0.0 {
                        out.push_str(&format!("{},{},{}\n", i + 1, j + 1, a[(i, j)]));
                    }
                }
            }
            out
        }
        NetworkFormat::MatrixMarket => {
            let nnz = a.iter().filter(|&&x| x != 0.0).count();
            let mut out = format!("%%MatrixMarket matrix coordinate real general\n{n} {n} {nnz}\n");
            for j in 0..n {
                for i in 0..n {
                    if a[(i, j)] != 0.0 {
                        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, a[(i, j)]));
                    }
                }
            }
            out
        }
        NetworkFormat::DenseJson => {
            let doc = DenseJson {
                n,
                a: dense_rows(a),
                directed: net.directed(),
            };
            serde_json::to_string(&doc).expect("dense network serializes")
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_index(tok: &str, line: usize) -> Result<usize> {
    let i: usize = tok
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid node index '{}'", tok.trim())))?;
    if i == 0 {
        return Err(parse_err(line, "node indices are 1-based"));
    }
    Ok(i)
}

fn parse_weight(tok: &str, line: usize) -> Result<f64> {
    let w: f64 = tok
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("invalid weight '{}'", tok.trim())))?;
    if !w.is_finite() {
        return Err(parse_err(line, format!("non-finite weight {w}")));
    }
    Ok(w)
}

fn assemble(n: usize, entries: &[(usize, usize, f64, usize)]) -> Result<Mat> {
    let mut a = Mat::zeros(n, n);
    let mut seen = HashSet::new();
    for &(i, j, w, line) in entries {
        if i > n || j > n {
            return Err(parse_err(line, format!("edge ({i}, {j}) exceeds node count {n}")));
        }
        if !seen.insert((i, j)) {
            return Err(parse_err(line, format!("duplicate edge ({i}, {j})")));
        }
        a[(i - 1, j - 1)] = w;
    }
    Ok(a)
}

fn parse_edge_list(text: &str) -> Result<Network> {
    let mut header_n: Option<usize> = None;
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        if let Some(rest) = s.strip_prefix("n=") {
            if header_n.is_some() || !entries.is_empty() {
                return Err(parse_err(line, "the n= header must come first"));
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("invalid node count '{}'", rest.trim())))?;
            if n == 0 {
                return Err(parse_err(line, "node count must be positive"));
            }
            header_n = Some(n);
            continue;
        }
        let fields: Vec<&str> = s.split(',').collect();
        if fields.len() != 3 {
            return Err(parse_err(line, format!("expected 'i,j,w', got '{s}'")));
        }
        let i = parse_index(fields[0], line)?;
        let j = parse_index(fields[1], line)?;
        let w = parse_weight(fields[2], line)?;
        entries.push((i, j, w, line));
    }
    let inferred = entries.iter().map(|&(i, j, _, _)| i.max(j)).max().unwrap_or(0);
    let n = match header_n {
        Some(n) => n,
        None if inferred > 0 => inferred,
        None => return Err(parse_err(1, "empty edge list without an n= header")),
    };
    Network::from_matrix(assemble(n, &entries)?)
}

fn parse_matrix_market(text: &str) -> Result<Network> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let banner_lc = banner.to_ascii_lowercase();
    let tokens: Vec<&str> = banner_lc.split_whitespace().collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "missing %%MatrixMarket matrix banner"));
    }
    if tokens[2] != "coordinate" || !matches!(tokens[3], "real" | "integer") {
        return Err(parse_err(1, "only coordinate real/integer matrices are supported"));
    }
    let symmetric = match tokens[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut entries = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = s.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(line, "expected 'rows cols nnz'"));
                }
                let r: usize = fields[0].parse().map_err(|_| parse_err(line, "invalid row count"))?;
                let c: usize = fields[1].parse().map_err(|_| parse_err(line, "invalid column count"))?;
                if r != c || r == 0 {
                    return Err(parse_err(line, format!("matrix must be square, got {r}x{c}")));
                }
                size = Some((r, fields[2].parse().map_err(|_| parse_err(line, "invalid nnz"))?));
            }
            Some(_) => {
                if fields.len() != 3 {
                    return Err(parse_err(line, format!("expected 'i j value', got '{s}'")));
                }
                let i = parse_index(fields[0], line)?;
                let j = parse_index(fields[1], line)?;
                let w = parse_weight(fields[2], line)?;
                entries.push((i, j, w, line));
                if symmetric && i != j {
                    entries.push((j, i, w, line));
                }
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    let stored = if symmetric {
        entries.iter().filter(|e| e.0 >= e.1).count()
    } else {
        entries.len()
    };
    if stored != nnz {
        return Err(parse_err(
            text.lines().count(),
            format!("header declares {nnz} entries, found {stored}"),
        ));
    }
    Network::from_matrix(assemble(n, &entries)?)
}

fn parse_dense_json(text: &str) -> Result<Network> {
    let doc: DenseJson = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    if doc.a.len() != doc.n || doc.a.iter().any(|row| row.len() != doc.n) {
        return Err(parse_err(1, format!("matrix is not {}x{}", doc.n, doc.n)));
    }
    let flat: Vec<f64> = doc.a.into_iter().flatten().collect();
    Network::new(Mat::from_row_slice(doc.n, doc.n, &flat), doc.directed)
}
