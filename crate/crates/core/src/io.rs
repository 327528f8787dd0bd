//! Plain-text edge lists.
//!
//! ```text
//! # optional comment lines
//! n 5
//! 0 1        undirected edge
//! 2 > 3      arc 2→3
//! ```
//!
//! Vertices are 0-indexed and tokens are whitespace separated. Blank lines and
//! lines starting with `#` are ignored. Arcs come out in lexicographic order,
//! which is what makes dumps of identical objects byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Digraph, Graph, Orientation, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Line {
    Edge(usize, usize),
    Arc(usize, usize),
}

fn parse_lines(text: &str) -> Result<(usize, Vec<(usize, Line)>)> {
    let mut n = None;
    let mut items = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let perr = |msg: &str| Error::Parse { line: line_no, msg: msg.to_string() };
        let num = |t: &str| t.parse::<usize>().map_err(|_| perr(&format!("bad vertex `{t}`")));
        match toks.as_slice() {
            ["n", count] => {
                if n.is_some() {
                    return Err(perr("duplicate header"));
                }
                n = Some(count.parse::<usize>().map_err(|_| perr("bad vertex count"))?);
            }
            [u, ">", v] => items.push((line_no, Line::Arc(num(u)?, num(v)?))),
            [u, v] => items.push((line_no, Line::Edge(num(u)?, num(v)?))),
            _ => return Err(perr("expected `n <count>`, `u v` or `u > v`")),
        }
        if n.is_none() {
            return Err(perr("header `n <count>` must come first"));
        }
    }
    let n = n.ok_or(Error::Parse { line: 0, msg: "missing header `n <count>`".into() })?;
    for &(line, item) in &items {
        let (u, v) = match item {
            Line::Edge(u, v) | Line::Arc(u, v) => (u, v),
        };
        if u >= n || v >= n {
            return Err(Error::Parse { line, msg: format!("vertex out of range for n = {n}") });
        }
        if u == v {
            return Err(Error::Parse { line, msg: "self-loop".into() });
        }
    }
    Ok((n, items))
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let (n, items) = parse_lines(text)?;
    let mut g = Graph::empty(n);
    for (_, item) in items {
        match item {
            Line::Edge(u, v) | Line::Arc(u, v) => g.add_edge(u, v),
        }
    }
    Ok(g)
}

/// Undirected lines are read as arcs `u → v` as written.
pub fn parse_digraph(text: &str) -> Result<Digraph> {
    let (n, items) = parse_lines(text)?;
    let mut d = Digraph::empty(n);
    for (_, item) in items {
        match item {
            Line::Edge(u, v) | Line::Arc(u, v) => d.add_arc(u, v),
        }
    }
    Ok(d)
}

/// `u > v` lines become directed edges; `u v` lines become unset edges.
pub fn parse_orientation(text: &str) -> Result<Orientation> {
    let (n, items) = parse_lines(text)?;
    let mut g = Graph::empty(n);
    for &(_, item) in &items {
        match item {
            Line::Edge(u, v) | Line::Arc(u, v) => g.add_edge(u, v),
        }
    }
    let mut o = Orientation::unset(g);
    for (line, item) in items {
        if let Line::Arc(u, v) = item {
            if o.has_arc(v, u) {
                return Err(Error::Parse { line, msg: format!("antiparallel arc {u} > {v}") });
            }
            o.set_arc(u, v)?;
        }
    }
    Ok(o)
}

pub fn write_graph(g: &Graph) -> String {
    let mut s = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

pub fn write_digraph(d: &Digraph) -> String {
    let mut s = format!("n {}\n", d.n());
    for (u, v) in d.arcs() {
        let _ = writeln!(s, "{u} > {v}");
    }
    s
}

pub fn write_orientation(o: &Orientation) -> String {
    let mut s = format!("n {}\n", o.n());
    for (&(u, v), d) in o.edges().iter().zip(o.dirs()) {
        let _ = match d {
            crate::graph::Dir::Forward => writeln!(s, "{u} > {v}"),
            crate::graph::Dir::Backward => writeln!(s, "{v} > {u}"),
            crate::graph::Dir::Unset => writeln!(s, "{u} {v}"),
        };
    }
    s
}

/// Space-separated vertex labels on one line.
pub fn write_vertex_set(s: &VertexSet) -> String {
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn read_to_string(path: impl AsRef<Path>) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

/// Writes via a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
