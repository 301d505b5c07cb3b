//! Plain-text edge-list and label files.
//!
//! Edge lists hold one edge per line as `src dst [weight]` with 0-based
//! indices; the weight defaults to 1. Lines starting with `#` are comments.
//! The writer emits a `# vertices N edges M` header which the reader uses to
//! recover trailing isolated vertices; without it the vertex count is one
//! more than the largest index seen.
//!
//! Label files hold one integer per line, line `i` being the community of
//! vertex `i`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Labeling};

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<DirectedGraph> {
    let mut declared_n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut max_index: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("vertices") {
                let n = words.next().and_then(|w| w.parse().ok()).ok_or(Error::Parse {
                    line: line_no,
                    message: "malformed vertices header".into(),
                })?;
                declared_n = Some(n);
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected `src dst [weight]`, got {} fields", fields.len()),
            });
        }
        let parse_index = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid vertex index `{s}`"),
            })
        };
        let src = parse_index(fields[0])?;
        let dst = parse_index(fields[1])?;
        let weight = match fields.get(2) {
            Some(s) => s.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid weight `{s}`"),
            })?,
            None => 1.0,
        };
        max_index = Some(max_index.map_or(src.max(dst), |m: usize| m.max(src).max(dst)));
        edges.push((src, dst, weight));
    }
    let n = declared_n.unwrap_or_else(|| max_index.map_or(0, |m| m + 1));
    DirectedGraph::new(n, edges)
}

pub fn write_edge_list<W: Write>(mut writer: W, g: &DirectedGraph) -> Result<()> {
    writeln!(writer, "# vertices {} edges {}", g.n(), g.edge_count())?;
    for (u, v, w) in g.edges() {
        if w == 1.0 {
            writeln!(writer, "{u} {v}")?;
        } else {
            writeln!(writer, "{u} {v} {w}")?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn read_labels<R: BufRead>(reader: R) -> Result<Labeling> {
    let mut assignments = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let label = trimmed.parse::<usize>().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("invalid label `{trimmed}`"),
        })?;
        assignments.push(label);
    }
    Ok(Labeling::from_assignments(assignments))
}

pub fn write_labels<W: Write>(mut writer: W, labels: &Labeling) -> Result<()> {
    for &c in labels.assignments() {
        writeln!(writer, "{c}")?;
    }
    writer.flush()?;
    Ok(())
}
