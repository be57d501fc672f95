//! Polygonal meshes, Cartesian generation and per-cell regularity data.

mod io;

pub use io::{parse_mesh, read_mesh, write_mesh};

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::polygon::{self, Region};
use crate::{Error, Point, Result};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 1.0, 0.0, 1.0)
    }

    /// The square `(-a, a)^2`.
    pub fn centered(a: f64) -> Self {
        Rect::new(-a, a, -a, a)
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.x0, self.y0),
            Point::new(self.x1, self.y0),
            Point::new(self.x1, self.y1),
            Point::new(self.x0, self.y1),
        ]
    }
}

/// Mesh edge. `vertices` follow the counter-clockwise orientation of `owner`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub vertices: [usize; 2],
    pub owner: usize,
    pub neighbor: Option<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.owner).chain(self.neighbor)
    }
}

/// Polygonal mesh with face connectivity.
///
/// `cell_faces[c][j]` is the face joining `cells[c][j]` and `cells[c][j + 1]`.
#[derive(Debug, Clone)]
pub struct PolyMesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<Vec<usize>>,
    pub faces: Vec<Face>,
    pub cell_faces: Vec<Vec<usize>>,
}

impl PolyMesh {
    /// Builds the face skeleton and validates the cell loops.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let mut faces: Vec<Face> = Vec::new();
        let mut cell_faces = Vec::with_capacity(cells.len());
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        for (c, loop_) in cells.iter().enumerate() {
            if loop_.len() < 3 {
                return Err(Error::InvalidMesh(format!("cell {c} has fewer than 3 vertices")));
            }
            if let Some(&v) = loop_.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!("cell {c} references missing vertex {v}")));
            }
            let poly: Vec<Point> = loop_.iter().map(|&v| vertices[v]).collect();
            if polygon::signed_area(&poly) <= 0.0 {
                return Err(Error::InvalidMesh(format!("cell {c} is not counter-clockwise or has zero area")));
            }
            if !polygon::is_simple(&poly) {
                return Err(Error::InvalidMesh(format!("cell {c} is not a simple polygon")));
            }
            let n = loop_.len();
            let mut local = Vec::with_capacity(n);
            for j in 0..n {
                let (a, b) = (loop_[j], loop_[(j + 1) % n]);
                if a == b {
                    return Err(Error::InvalidMesh(format!("cell {c} repeats vertex {a}")));
                }
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.neighbor.is_some() || face.owner == c {
                            return Err(Error::InvalidMesh(format!("edge ({a}, {b}) shared by more than two cells")));
                        }
                        if face.vertices != [b, a] {
                            return Err(Error::InvalidMesh(format!(
                                "cells {} and {c} have inconsistent orientation",
                                face.owner
                            )));
                        }
                        face.neighbor = Some(c);
                        local.push(f);
                    }
                    None => {
                        lookup.insert(key, faces.len());
                        local.push(faces.len());
                        faces.push(Face { vertices: [a, b], owner: c, neighbor: None });
                    }
                }
            }
            cell_faces.push(local);
        }
        Ok(PolyMesh { vertices, cells, faces, cell_faces })
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn polygon(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn area(&self, cell: usize) -> f64 {
        polygon::signed_area(&self.polygon(cell))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.area(c)).sum()
    }

    pub fn centroid(&self, cell: usize) -> Point {
        polygon::centroid(&self.polygon(cell))
    }

    pub fn diameter(&self, cell: usize) -> f64 {
        polygon::diameter(&self.polygon(cell))
    }

    /// Largest cell diameter.
    pub fn h_max(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.diameter(c)).fold(0.0, f64::max)
    }

    pub fn face_points(&self, face: usize) -> [Point; 2] {
        let [a, b] = self.faces[face].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn face_length(&self, face: usize) -> f64 {
        let [a, b] = self.face_points(face);
        (b - a).norm()
    }

    pub fn is_boundary_face(&self, face: usize) -> bool {
        self.faces[face].is_boundary()
    }

    /// Cells owning at least one vertex on the boundary.
    pub fn boundary_adjacent_cells(&self) -> Vec<bool> {
        let mut on_boundary = vec![false; self.vertices.len()];
        for f in self.faces.iter().filter(|f| f.is_boundary()) {
            on_boundary[f.vertices[0]] = true;
            on_boundary[f.vertices[1]] = true;
        }
        self.cells.iter().map(|l| l.iter().any(|&v| on_boundary[v])).collect()
    }

    /// Cells sharing at least one vertex with each cell, including itself, sorted.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut vertex_cells = vec![Vec::new(); self.vertices.len()];
        for (c, l) in self.cells.iter().enumerate() {
            for &v in l {
                vertex_cells[v].push(c);
            }
        }
        self.cells
            .iter()
            .map(|l| {
                let mut n: Vec<usize> = l.iter().flat_map(|&v| vertex_cells[v].iter().copied()).collect();
                n.sort_unstable();
                n.dedup();
                n
            })
            .collect()
    }

    /// Returns the face shared by two cells, if any.
    pub fn shared_face(&self, a: usize, b: usize) -> Option<usize> {
        self.cell_faces[a].iter().copied().find(|&f| {
            let face = &self.faces[f];
            (face.owner == a && face.neighbor == Some(b)) || (face.owner == b && face.neighbor == Some(a))
        })
    }

    /// Renumbers cells: new cell `i` is old cell `order[i]`.
    pub fn permute_cells(&self, order: &[usize]) -> Result<PolyMesh> {
        let cells = order.iter().map(|&c| self.cells[c].clone()).collect();
        PolyMesh::new(self.vertices.clone(), cells)
    }
}

/// Cartesian mesh of `nx * ny` rectangles.
pub fn generate_cartesian(nx: usize, ny: usize, domain: Rect) -> Result<PolyMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("nx and ny must be at least 1".into()));
    }
    if !(domain.x1 > domain.x0 && domain.y1 > domain.y0) {
        return Err(Error::InvalidArgument(format!("degenerate domain {domain:?}")));
    }
    let (hx, hy) = ((domain.x1 - domain.x0) / nx as f64, (domain.y1 - domain.y0) / ny as f64);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            // pin the last row/column to the exact domain bounds
            let x = if i == nx { domain.x1 } else { domain.x0 + i as f64 * hx };
            let y = if j == ny { domain.y1 } else { domain.y0 + j as f64 * hy };
            vertices.push(Point::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    PolyMesh::new(vertices, cells)
}

/// Cartesian mesh whose interior vertices are displaced by up to
/// `fraction * min(hx, hy)` in each coordinate. `fraction` must lie in `[0, 0.2]`.
pub fn generate_perturbed(nx: usize, ny: usize, domain: Rect, fraction: f64, seed: u64) -> Result<PolyMesh> {
    if !(0.0..=0.2).contains(&fraction) {
        return Err(Error::InvalidArgument(format!("perturbation fraction {fraction} outside [0, 0.2]")));
    }
    let mut mesh = generate_cartesian(nx, ny, domain)?;
    let h = ((domain.x1 - domain.x0) / nx as f64).min((domain.y1 - domain.y0) / ny as f64);
    let amplitude = fraction * h;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for j in 1..ny {
        for i in 1..nx {
            let v = &mut mesh.vertices[j * (nx + 1) + i];
            v.x += amplitude * rng.random_range(-1.0..=1.0);
            v.y += amplitude * rng.random_range(-1.0..=1.0);
        }
    }
    PolyMesh::new(mesh.vertices, mesh.cells)
}

/// Per-cell regularity data.
#[derive(Debug, Clone)]
pub struct CellMeta {
    /// Diameter.
    pub h: f64,
    /// Center of the estimated inscribed ball.
    pub center: Point,
    /// Radius of the estimated inscribed ball.
    pub radius: f64,
    /// Cells sharing at least a vertex, including the cell itself.
    pub neighbors: Vec<usize>,
}

/// Grid resolution of the inscribed-ball estimator relative to `h_T`.
pub const BALL_RESOLUTION: f64 = 1.0 / 64.0;

pub fn compute_meta(mesh: &PolyMesh) -> Vec<CellMeta> {
    let neighbors = mesh.vertex_neighbors();
    neighbors
        .into_iter()
        .enumerate()
        .map(|(c, neighbors)| {
            let poly = mesh.polygon(c);
            let h = polygon::diameter(&poly);
            let ball = polygon::inscribed_ball(&Region::from_polygon(poly), h * BALL_RESOLUTION);
            CellMeta { h, center: ball.center, radius: ball.radius, neighbors }
        })
        .collect()
}

/// Regularity ratio: the smaller of `min r_T / h_T` and
/// `min_T (min h over the neighborhood) / (max h over the neighborhood)`.
pub fn estimate_rho(meta: &[CellMeta]) -> f64 {
    let mut rho = f64::INFINITY;
    for m in meta {
        rho = rho.min(m.radius / m.h);
        let (lo, hi) =
            m.neighbors.iter().map(|&n| meta[n].h).fold((f64::INFINITY, 0.0f64), |(lo, hi), h| (lo.min(h), hi.max(h)));
        rho = rho.min(lo / hi);
    }
    rho
}
