use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::{Dataset, IngestReport};
use crate::error::{Error, Result};
use crate::graph::build_graph;

/// The seven Cora subject labels; class ids follow this order.
pub const CORA_CLASSES: [&str; 7] = [
    "Case_Based",
    "Genetic_Algorithms",
    "Neural_Networks",
    "Probabilistic_Methods",
    "Reinforcement_Learning",
    "Rule_Learning",
    "Theory",
];

/// Loads the raw Cora distribution with the fixed class list.
pub fn load_cora(content_path: impl AsRef<Path>, cites_path: impl AsRef<Path>) -> Result<Dataset> {
    load_labeled_graph(content_path, cites_path, Some(&CORA_CLASSES))
}

/// Reads a `.content` file (`id<TAB>features…<TAB>label`) and a `.cites` file
/// (`cited<TAB>citing`).
///
/// Vertices are numbered in order of appearance in the content file.
/// Citations become unit-weight undirected edges; duplicates collapse,
/// self-citations and citations of unknown ids are skipped and counted in
/// [`Dataset::ingest`]. With `classes = None` the class list is the sorted
/// set of labels present.
pub fn load_labeled_graph(
    content_path: impl AsRef<Path>,
    cites_path: impl AsRef<Path>,
    classes: Option<&[&str]>,
) -> Result<Dataset> {
    let content_path = content_path.as_ref();
    let cites_path = cites_path.as_ref();
    let content = fs::read_to_string(content_path)?;
    let cites = fs::read_to_string(cites_path)?;
    let parse_err = |path: &Path, line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };

    let mut ids: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<(String, usize)> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(parse_err(
                content_path,
                line_no,
                format!("expected id, features and label; found {} columns", fields.len()),
            ));
        }
        let n_feat = fields.len() - 2;
        match width {
            None => width = Some(n_feat),
            Some(w) if w != n_feat => {
                return Err(parse_err(
                    content_path,
                    line_no,
                    format!("expected {} feature columns, found {n_feat}", w),
                ))
            }
            _ => {}
        }
        let id = fields[0].to_string();
        if index.insert(id.clone(), ids.len()).is_some() {
            return Err(parse_err(content_path, line_no, format!("duplicate paper id {id:?}")));
        }
        ids.push(id);
        for s in &fields[1..fields.len() - 1] {
            let v: f64 = s
                .parse()
                .map_err(|e| parse_err(content_path, line_no, format!("bad feature {s:?}: {e}")))?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(parse_err(content_path, line_no, format!("feature {v} must be finite and ≥ 0")));
            }
            rows.push(v);
        }
        raw_labels.push((fields[fields.len() - 1].to_string(), line_no));
    }
    let Some(width) = width else {
        return Err(Error::EmptyFile {
            path: PathBuf::from(content_path),
        });
    };
    let n = ids.len();

    let class_names: Vec<String> = match classes {
        Some(list) => list.iter().map(|s| s.to_string()).collect(),
        None => {
            let mut names: Vec<String> = raw_labels.iter().map(|(l, _)| l.clone()).collect();
            names.sort();
            names.dedup();
            names
        }
    };
    let class_index: HashMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let labels = raw_labels
        .iter()
        .map(|(label, line)| {
            class_index.get(label.as_str()).copied().ok_or_else(|| Error::UnknownClass {
                path: PathBuf::from(content_path),
                line: *line,
                label: label.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = IngestReport::default();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::new();
    for (idx, line) in cites.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(
                cites_path,
                line_no,
                format!("expected `cited<TAB>citing`, found {} columns", fields.len()),
            ));
        }
        let (Some(&u), Some(&v)) = (index.get(fields[0]), index.get(fields[1])) else {
            report.unknown_citations += 1;
            continue;
        };
        if u == v {
            report.self_citations += 1;
            continue;
        }
        if !seen.insert((u.min(v), u.max(v))) {
            report.duplicate_citations += 1;
            continue;
        }
        edges.push((u, v, 1.0));
    }
    if report.unknown_citations > 0 {
        log::warn!(
            "{}: skipped {} citations naming unknown papers",
            cites_path.display(),
            report.unknown_citations
        );
    }

    let graph = build_graph(&edges, n, false)?;
    let features = Array2::from_shape_vec((n, width), rows).expect("rows have uniform width");
    let mut ds = Dataset::new(graph, features, labels, class_names)?;
    ds.vertex_ids = ids;
    ds.ingest = report;
    Ok(ds)
}

/// Writes a dataset in the two-file Cora layout. Each undirected edge is
/// written once as `u<TAB>v`.
pub fn write_cora_format(ds: &Dataset, content_path: impl AsRef<Path>, cites_path: impl AsRef<Path>) -> Result<()> {
    let mut content = std::io::BufWriter::new(fs::File::create(content_path)?);
    for v in 0..ds.n_vertices() {
        write!(content, "{}", ds.vertex_ids[v])?;
        for x in ds.features.row(v) {
            write!(content, "\t{x}")?;
        }
        writeln!(content, "\t{}", ds.class_names[ds.labels[v]])?;
    }
    content.flush()?;
    let mut cites = std::io::BufWriter::new(fs::File::create(cites_path)?);
    for (u, v, _) in ds.graph.edges() {
        if u != v {
            writeln!(cites, "{}\t{}", ds.vertex_ids[u], ds.vertex_ids[v])?;
        }
    }
    cites.flush()?;
    Ok(())
}
