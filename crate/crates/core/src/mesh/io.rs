//! Plain-text mesh format.
//!
//! ```text
//! polymesh 2d
//! <nv>
//! <x> <y>            (nv lines)
//! <nc>
//! <m> <v0> ... <vm-1> (nc lines, counter-clockwise loops, 0-based)
//! ```
//!
//! Blank lines are ignored and `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use super::PolyMesh;
use crate::{Error, Point, Result};

fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::MeshParse { line, message: message.into() }
}

fn num<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("expected {what}, found '{s}'")))
}

pub fn parse_mesh(text: &str) -> Result<PolyMesh> {
    let mut lines = tokens(text);
    let last_line = text.lines().count();
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| parse_err(last_line, format!("unexpected end of input, expected {what}")))
    };

    let (l, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["polymesh", "2d"] {
        return Err(parse_err(l, "expected header 'polymesh 2d'"));
    }
    let (l, s) = next("vertex count")?;
    let nv: usize = num(l, s, "vertex count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, s) = next("vertex coordinates")?;
        let xy: Vec<&str> = s.split_whitespace().collect();
        if xy.len() != 2 {
            return Err(parse_err(l, "expected two coordinates"));
        }
        vertices.push(Point::new(num(l, xy[0], "coordinate")?, num(l, xy[1], "coordinate")?));
    }
    let (l, s) = next("cell count")?;
    let nc: usize = num(l, s, "cell count")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (l, s) = next("cell loop")?;
        let mut it = s.split_whitespace();
        let m: usize = num(l, it.next().unwrap_or(""), "loop length")?;
        let ids = it.map(|t| num::<usize>(l, t, "vertex index")).collect::<Result<Vec<_>>>()?;
        if ids.len() != m {
            return Err(parse_err(l, format!("loop declares {m} vertices but lists {}", ids.len())));
        }
        cells.push(ids);
    }
    if let Ok((l, _)) = next("end") {
        return Err(parse_err(l, "trailing content after cell list"));
    }
    PolyMesh::new(vertices, cells)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolyMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    parse_mesh(&text)
}

/// Serializes a mesh; coordinates use the shortest round-trip representation.
pub fn write_mesh(mesh: &PolyMesh) -> String {
    let mut out = String::from("polymesh 2d\n");
    let _ = writeln!(out, "{}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{:?} {:?}", v.x, v.y);
    }
    let _ = writeln!(out, "{}", mesh.cells.len());
    for c in &mesh.cells {
        let _ = write!(out, "{}", c.len());
        for v in c {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}
