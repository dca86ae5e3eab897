use std::fs;
use std::path::{Path, PathBuf};

use super::{build_graph, SparseGraph};
use crate::error::{Error, Result};

/// Reads a whitespace-separated `u v [weight]` edge list (0-based indices,
/// `#` starts a comment, weight defaults to 1). The vertex count is one past
/// the largest index seen.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<SparseGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_edge_list(&text, path)
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<SparseGraph> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(
                line_no,
                format!("expected `u v [weight]`, found {} fields", fields.len()),
            ));
        }
        let vertex = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| parse_err(line_no, format!("bad vertex index {s:?}: {e}")))
        };
        let u = vertex(fields[0])?;
        let v = vertex(fields[1])?;
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|e| parse_err(line_no, format!("bad weight {s:?}: {e}")))?,
            None => 1.0,
        };
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    if edges.is_empty() {
        return Err(Error::EmptyFile {
            path: PathBuf::from(path),
        });
    }
    build_graph(&edges, n, false)
}
