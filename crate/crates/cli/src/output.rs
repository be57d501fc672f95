//! Field output: legacy VTK polygons and CSV samples, one copy of every
//! sub-cell vertex per side so the field stays discontinuous across the
//! interface.

use std::fmt::Write;

use cut_hho::{Discretization, ManufacturedCase, Point, Side, Solution};

/// Values of one side of one computational cell at the vertices of its
/// sub-polygons.
#[derive(Debug, Clone)]
pub struct Patch {
    pub cell: usize,
    pub side: Side,
    pub vertices: Vec<Point>,
    pub values: Vec<f64>,
    pub exact: Option<Vec<f64>>,
}

pub fn patches(disc: &Discretization, sol: &Solution, case: Option<&ManufacturedCase>) -> Vec<Patch> {
    let mut out = Vec::new();
    for (c, cell) in disc.cells().iter().enumerate() {
        for region in &cell.sides {
            for poly in &region.polygons {
                let vertices = poly.vertices.clone();
                let values = vertices.iter().map(|&x| sol.value(c, region.side, x).unwrap_or(f64::NAN)).collect();
                let exact = case.map(|k| vertices.iter().map(|&x| k.u(region.side, x)).collect());
                out.push(Patch { cell: c, side: region.side, vertices, values, exact });
            }
        }
    }
    out
}

pub const FIELD_HEADER: &str = "cell,side,x,y,u_h,u_exact";

pub fn write_field_csv(patches: &[Patch]) -> String {
    let mut s = String::from(FIELD_HEADER);
    s.push('\n');
    for p in patches {
        for (j, x) in p.vertices.iter().enumerate() {
            let exact = p.exact.as_ref().map_or_else(String::new, |e| format!("{:.12e}", e[j]));
            let _ =
                writeln!(s, "{},{},{:.12e},{:.12e},{:.12e},{exact}", p.cell, p.side.number(), x.x, x.y, p.values[j]);
        }
    }
    s
}

pub fn write_field_vtk(patches: &[Patch]) -> String {
    let points: usize = patches.iter().map(|p| p.vertices.len()).sum();
    let mut s = String::from("# vtk DataFile Version 3.0\ncut-hho solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {points} double");
    for p in patches {
        for x in &p.vertices {
            let _ = writeln!(s, "{:.12e} {:.12e} 0", x.x, x.y);
        }
    }
    let _ = writeln!(s, "CELLS {} {}", patches.len(), points + patches.len());
    let mut next = 0;
    for p in patches {
        let _ = write!(s, "{}", p.vertices.len());
        for j in 0..p.vertices.len() {
            let _ = write!(s, " {}", next + j);
        }
        s.push('\n');
        next += p.vertices.len();
    }
    let _ = writeln!(s, "CELL_TYPES {}", patches.len());
    for _ in patches {
        s.push_str("7\n");
    }
    let _ = writeln!(s, "CELL_DATA {}", patches.len());
    s.push_str("SCALARS cell int 1\nLOOKUP_TABLE default\n");
    for p in patches {
        let _ = writeln!(s, "{}", p.cell);
    }
    s.push_str("SCALARS side int 1\nLOOKUP_TABLE default\n");
    for p in patches {
        let _ = writeln!(s, "{}", p.side.number());
    }
    let _ = writeln!(s, "POINT_DATA {points}");
    s.push_str("SCALARS u_h double 1\nLOOKUP_TABLE default\n");
    for p in patches {
        for v in &p.values {
            let _ = writeln!(s, "{v:.12e}");
        }
    }
    if patches.iter().all(|p| p.exact.is_some()) && !patches.is_empty() {
        s.push_str("SCALARS u_exact double 1\nLOOKUP_TABLE default\n");
        for p in patches {
            for v in p.exact.iter().flatten() {
                let _ = writeln!(s, "{v:.12e}");
            }
        }
    }
    s
}
