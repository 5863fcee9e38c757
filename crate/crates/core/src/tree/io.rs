//! Plain-text tree files.
//!
//! ```text
//! # goerw-tree v1 depth=<L>
//! <parent> <child>
//! ...
//! ```
//! Edges appear in breadth-first order of the child id.

use std::io::{BufRead, Write};

use super::{build_from_edge_list, Tree, TreeError};

pub fn write_tree<W: Write>(tree: &Tree, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# goerw-tree v1 depth={}", tree.truncation_depth())?;
    for e in tree.edges() {
        writeln!(out, "{} {}", e.parent, e.child)?;
    }
    Ok(())
}

pub fn read_tree<R: BufRead>(input: R) -> Result<Tree, TreeError> {
    let mut edges = Vec::new();
    let mut declared = None;
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| TreeError::Parse { line: line_no, msg: e.to_string() })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            if line_no == 1 {
                declared = parse_header(header).map_err(|msg| TreeError::Parse { line: 1, msg })?;
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let mut field = |name: &str| -> Result<usize, TreeError> {
            it.next()
                .ok_or_else(|| TreeError::Parse { line: line_no, msg: format!("missing {name} id") })?
                .parse()
                .map_err(|e| TreeError::Parse { line: line_no, msg: format!("bad {name} id: {e}") })
        };
        let p = field("parent")?;
        let c = field("child")?;
        if it.next().is_some() {
            return Err(TreeError::Parse { line: line_no, msg: "expected two ids".into() });
        }
        edges.push((p, c));
    }
    let tree = build_from_edge_list(&edges)?;
    if let Some(d) = declared {
        if d != tree.truncation_depth() {
            return Err(TreeError::Parse {
                line: 1,
                msg: format!("header declares depth {d}, edges reach depth {}", tree.truncation_depth()),
            });
        }
    }
    Ok(tree)
}

fn parse_header(header: &str) -> Result<Option<usize>, String> {
    let mut words = header.split_whitespace();
    if words.next() != Some("goerw-tree") {
        return Ok(None);
    }
    if words.next() != Some("v1") {
        return Err("unsupported tree file version".into());
    }
    for w in words {
        if let Some(d) = w.strip_prefix("depth=") {
            return d.parse().map(Some).map_err(|e| format!("bad depth: {e}"));
        }
    }
    Ok(None)
}
