//! Geometry of a (possibly agglomerated, possibly cut) computational cell:
//! per-side sub-regions, sub-faces and interface segments.

use std::collections::HashSet;

use crate::geometry::cut::{CutTopology, EdgeLabel, SubPolygon};
use crate::geometry::polygon::{self, Region};
use crate::geometry::quadrature::{self, QuadratureRule};
use crate::mesh::PolyMesh;
use crate::{Error, Point, Result, Side};

/// Piece of a mesh face on one side, oriented counter-clockwise around the
/// cell that owns this record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubFace {
    pub face: usize,
    pub side: Side,
    pub a: Point,
    pub b: Point,
}

impl SubFace {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    /// Outward unit normal.
    pub fn normal(&self) -> Point {
        let d = self.b - self.a;
        Point::new(d.y, -d.x) / d.norm()
    }

    pub fn midpoint(&self) -> Point {
        (self.a + self.b) * 0.5
    }

    pub fn rule(&self, degree: usize) -> QuadratureRule {
        quadrature::segment_rule(self.a, self.b, degree)
    }
}

/// The part of a cell lying in one subdomain.
#[derive(Debug, Clone)]
pub struct SideRegion {
    pub side: Side,
    pub polygons: Vec<SubPolygon>,
    /// Boundary pieces on mesh faces, excluding faces interior to the cell.
    pub faces: Vec<SubFace>,
}

impl SideRegion {
    pub fn area(&self) -> f64 {
        self.polygons.iter().map(SubPolygon::area).sum()
    }

    pub fn centroid(&self) -> Point {
        let mut c = Point::zeros();
        let mut a = 0.0;
        for p in &self.polygons {
            let ap = p.area();
            c += polygon::centroid(&p.vertices) * ap;
            a += ap;
        }
        c / a
    }

    /// Gauss rule exact for polynomials of `degree` on the polygons.
    pub fn rule(&self, degree: usize) -> Result<QuadratureRule> {
        let mut rule = QuadratureRule::default();
        for p in &self.polygons {
            rule.append(quadrature::polygon_rule(&p.vertices, degree)?);
        }
        Ok(rule)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        self.polygons.iter().flat_map(|p| p.vertices.iter().copied())
    }
}

/// Points, weights and unit normals (from side 1 to side 2) on the interface.
#[derive(Debug, Clone, Default)]
pub struct InterfaceRule {
    pub rule: QuadratureRule,
    pub normals: Vec<Point>,
}

impl InterfaceRule {
    pub fn iter(&self) -> impl Iterator<Item = (Point, f64, Point)> + '_ {
        self.rule.points.iter().zip(&self.rule.weights).zip(&self.normals).map(|((&p, &w), &n)| (p, w, n))
    }

    pub fn measure(&self) -> f64 {
        self.rule.measure()
    }
}

/// Segment of the interface polyline with its normal pointing into side 2.
pub fn segment_normal(a: Point, b: Point) -> Point {
    let d = b - a;
    Point::new(d.y, -d.x) / d.norm()
}

/// Computational cell: one or more parent cells, with one region per side
/// present and the interface polylines crossing it.
#[derive(Debug, Clone)]
pub struct CellGeometry {
    pub parents: Vec<usize>,
    /// Diameter (largest distance between parent vertices).
    pub h: f64,
    pub sides: Vec<SideRegion>,
    /// Interface polylines, each counter-clockwise around side 1.
    pub interface: Vec<Vec<Point>>,
    /// Mesh faces shared by two parents, removed from the skeleton.
    pub internal_faces: Vec<usize>,
}

impl CellGeometry {
    /// Assembles the geometry of the union of `parents`.
    pub fn from_parents(mesh: &PolyMesh, topo: &CutTopology, parents: &[usize]) -> Self {
        let set: HashSet<usize> = parents.iter().copied().collect();
        let mut internal: Vec<usize> = parents
            .iter()
            .flat_map(|&c| mesh.cell_faces[c].iter().copied())
            .filter(|&f| {
                let face = &mesh.faces[f];
                set.contains(&face.owner) && face.neighbor.is_some_and(|n| set.contains(&n))
            })
            .collect();
        internal.sort_unstable();
        internal.dedup();
        let is_internal = |f: usize| internal.binary_search(&f).is_ok();

        let mut sides = Vec::new();
        for side in [Side::One, Side::Two] {
            let polygons: Vec<SubPolygon> = parents.iter().filter_map(|&c| topo.sub_polygon(mesh, c, side)).collect();
            if polygons.is_empty() {
                continue;
            }
            let faces = polygons
                .iter()
                .flat_map(|p| p.edges())
                .filter_map(|(a, b, l)| match l {
                    EdgeLabel::Face(f) if !is_internal(f) => Some(SubFace { face: f, side, a, b }),
                    _ => None,
                })
                .collect();
            sides.push(SideRegion { side, polygons, faces });
        }
        let interface = parents.iter().filter_map(|&c| topo.cut[c].as_ref().map(|cut| cut.interface.clone())).collect();
        let pts: Vec<Point> = parents.iter().flat_map(|&c| mesh.polygon(c)).collect();
        CellGeometry {
            parents: parents.to_vec(),
            h: polygon::diameter(&pts),
            sides,
            interface,
            internal_faces: internal,
        }
    }

    pub fn is_cut(&self) -> bool {
        !self.interface.is_empty()
    }

    pub fn side(&self, side: Side) -> Option<&SideRegion> {
        self.sides.iter().find(|s| s.side == side)
    }

    pub fn area(&self) -> f64 {
        self.sides.iter().map(SideRegion::area).sum()
    }

    pub fn interface_segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.interface.iter().flat_map(|l| l.windows(2).map(|w| (w[0], w[1])))
    }

    pub fn interface_length(&self) -> f64 {
        self.interface_segments().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Gauss rule on the interface polyline, exact for `degree` per segment.
    pub fn interface_rule(&self, degree: usize) -> InterfaceRule {
        let mut out = InterfaceRule::default();
        for (a, b) in self.interface_segments() {
            let n = segment_normal(a, b);
            let r = quadrature::segment_rule(a, b, degree);
            out.normals.extend(std::iter::repeat_n(n, r.len()));
            out.rule.append(r);
        }
        out
    }

    /// Region of `side` for inscribed-ball queries: faces interior to the
    /// cell do not count as boundary.
    pub fn region(&self, side: Side) -> Option<Region> {
        let s = self.side(side)?;
        let mut region = Region::default();
        for p in &s.polygons {
            region.pieces.push(p.vertices.clone());
            for (a, b, l) in p.edges() {
                let keep = match l {
                    EdgeLabel::Interface => true,
                    EdgeLabel::Face(f) => self.internal_faces.binary_search(&f).is_err(),
                };
                if keep {
                    region.boundary.push((a, b));
                }
            }
        }
        Some(region)
    }

    /// Joins the interface polylines end to end; errors if they do not form
    /// a single chain.
    pub fn connect_interface(&mut self, id: usize) -> Result<()> {
        if self.interface.len() <= 1 {
            return Ok(());
        }
        let tol = 1e-10 * self.h;
        let mut chains = std::mem::take(&mut self.interface);
        let mut merged = chains.remove(0);
        while !chains.is_empty() {
            let tail = *merged.last().unwrap();
            let head = merged[0];
            if let Some(i) = chains.iter().position(|c| (c[0] - tail).norm() <= tol) {
                let c = chains.remove(i);
                merged.extend_from_slice(&c[1..]);
            } else if let Some(i) = chains.iter().position(|c| (*c.last().unwrap() - head).norm() <= tol) {
                let mut c = chains.remove(i);
                c.extend_from_slice(&merged[1..]);
                merged = c;
            } else {
                self.interface = std::iter::once(merged).chain(chains).collect();
                return Err(Error::DisconnectedInterface { agglomerate: id });
            }
        }
        self.interface = vec![merged];
        Ok(())
    }
}
