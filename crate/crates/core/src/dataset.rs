//! Plain-text graph and label ingestion.
//!
//! Edge lists hold one `u v [weight]` triple per line; labels hold one
//! `node label` pair per line. Both skip blank lines and `#` comments and
//! accept 0- or 1-based node ids (whichever the smallest id in the file
//! suggests).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{AdjacencyMatrix, LabelVector};

#[derive(Debug, Clone, Copy)]
struct RawEdge {
    u: u64,
    v: u64,
    weight: f64,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Yields `(1-based line number, tokens)` for every non-comment line.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line.split_whitespace().collect()))
        }
    })
}

fn parse_id(path: &Path, line: usize, tok: &str) -> Result<u64> {
    if tok.starts_with('-') {
        return Err(parse_err(path, line, format!("negative node id `{tok}`")));
    }
    tok.parse::<u64>()
        .map_err(|_| parse_err(path, line, format!("node id `{tok}` is not a non-negative integer")))
}

/// Loads an undirected simple graph. Node count is `max id + 1` after the
/// index base is removed.
pub fn load_edge_list(path: impl AsRef<Path>, binarize: bool) -> Result<AdjacencyMatrix> {
    load_edge_list_sized(path, binarize, None)
}

/// Like [`load_edge_list`], but pads the graph to `num_nodes` when given, so
/// isolated trailing nodes are kept.
pub fn load_edge_list_sized(
    path: impl AsRef<Path>,
    binarize: bool,
    num_nodes: Option<usize>,
) -> Result<AdjacencyMatrix> {
    load_edges(path.as_ref(), binarize, num_nodes, None)
}

fn load_edges(
    path: &Path,
    binarize: bool,
    num_nodes: Option<usize>,
    base: Option<u64>,
) -> Result<AdjacencyMatrix> {
    let text = read(path)?;
    let mut raw = Vec::new();
    for (line, toks) in data_lines(&text) {
        if toks.len() < 2 || toks.len() > 3 {
            return Err(parse_err(
                path,
                line,
                format!("expected `u v [weight]`, got {} fields", toks.len()),
            ));
        }
        let u = parse_id(path, line, toks[0])?;
        let v = parse_id(path, line, toks[1])?;
        let weight = match toks.get(2) {
            Some(w) => w
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite())
                .ok_or_else(|| parse_err(path, line, format!("weight `{w}` is not a number")))?,
            None => 1.0,
        };
        raw.push(RawEdge { u, v, weight });
    }

    let min_id = raw.iter().map(|e| e.u.min(e.v)).min();
    let base = match (base, min_id) {
        (Some(b), Some(m)) if m < b => {
            return Err(Error::invalid(format!(
                "{}: node id {m} is below the label file's base {b}",
                path.display()
            )))
        }
        (Some(b), _) => b,
        (None, m) => m.map_or(0, |m| m.min(1)),
    };
    let max_id = raw.iter().map(|e| e.u.max(e.v) - base).max();
    let inferred = max_id.map_or(0, |m| m as usize + 1);
    let n = match num_nodes {
        Some(n) if n < inferred => {
            return Err(Error::invalid(format!(
                "{}: node id {} exceeds the requested {n} nodes",
                path.display(),
                inferred - 1
            )))
        }
        Some(n) => n,
        None => inferred,
    };

    let edges = raw
        .iter()
        .filter(|e| !binarize || e.weight > 0.0)
        .map(|e| ((e.u - base) as usize, (e.v - base) as usize));
    AdjacencyMatrix::from_edges(n, edges)
}

/// Loads a full-length label vector. Labels may be coded {-1, +1} or {0, 1}
/// (0 maps to -1).
pub fn load_labels(path: impl AsRef<Path>, n: usize) -> Result<LabelVector> {
    load_labels_with_base(path.as_ref(), n).map(|(l, _)| l)
}

fn load_labels_with_base(path: &Path, n: usize) -> Result<(LabelVector, u64)> {
    let text = read(path)?;
    let mut rows = Vec::new();
    for (line, toks) in data_lines(&text) {
        if toks.len() != 2 {
            return Err(parse_err(
                path,
                line,
                format!("expected `node label`, got {} fields", toks.len()),
            ));
        }
        let id = parse_id(path, line, toks[0])?;
        let label = toks[1]
            .parse::<i64>()
            .map_err(|_| parse_err(path, line, format!("label `{}` is not an integer", toks[1])))?;
        if !matches!(label, -1..=1) {
            return Err(parse_err(path, line, format!("label {label} outside {{-1, 0, 1}}")));
        }
        rows.push((line, id, label as i8));
    }

    let zero_coded = rows.iter().any(|r| r.2 == 0);
    if zero_coded {
        if let Some(r) = rows.iter().find(|r| r.2 == -1) {
            return Err(parse_err(path, r.0, "label -1 mixed with {0, 1} coding"));
        }
    }
    let base = rows.iter().map(|r| r.1).min().map_or(0, |m| m.min(1));

    let mut labels: Vec<Option<i8>> = vec![None; n];
    for &(line, id, label) in &rows {
        let idx = (id - base) as usize;
        let slot = labels
            .get_mut(idx)
            .ok_or_else(|| parse_err(path, line, format!("node {id} out of range for n = {n}")))?;
        if slot.is_some() {
            return Err(parse_err(path, line, format!("duplicate node {id}")));
        }
        *slot = Some(match (zero_coded, label) {
            (true, 0) => -1,
            (_, l) => l,
        });
    }
    let out = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| {
                Error::invalid(format!(
                    "{}: node {} has no label",
                    path.display(),
                    i as u64 + base
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((LabelVector::new(out)?, base))
}

/// Loads a labeled graph. The node count is taken from the label file, so
/// nodes without edges are kept.
pub fn load_labeled_graph(
    edge_path: impl AsRef<Path>,
    label_path: impl AsRef<Path>,
    binarize: bool,
) -> Result<(AdjacencyMatrix, LabelVector)> {
    let label_path = label_path.as_ref();
    let n = data_lines(&read(label_path)?).count();
    let (labels, base) = load_labels_with_base(label_path, n)?;
    let graph = load_edges(edge_path.as_ref(), binarize, Some(n), Some(base))?;
    Ok((graph, labels))
}
