//! Cut classification of faces and cells, and polygonal sub-cells.

use rayon::prelude::*;

use crate::geometry::polygon;
use crate::geometry::LevelSet;
use crate::mesh::PolyMesh;
use crate::{Error, Point, Result, Side};

/// Default relative tolerance of the edge root-finding.
pub const ROOT_TOLERANCE: f64 = 1e-13;

/// Sign samples taken along each face to detect double crossings.
const FACE_SAMPLES: usize = 16;

const MAX_PROJECTION_STEPS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellTag {
    Inside1,
    Inside2,
    Cut,
}

impl CellTag {
    pub fn inside(side: Side) -> Self {
        match side {
            Side::One => CellTag::Inside1,
            Side::Two => CellTag::Inside2,
        }
    }

    pub fn side(self) -> Option<Side> {
        match self {
            CellTag::Inside1 => Some(Side::One),
            CellTag::Inside2 => Some(Side::Two),
            CellTag::Cut => None,
        }
    }
}

/// Position of a face relative to the interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceCut {
    Whole(Side),
    /// Crossed once at `point`; `first` is the side of `vertices[0]`.
    Split {
        point: Point,
        first: Side,
    },
}

impl FaceCut {
    pub fn is_split(&self) -> bool {
        matches!(self, FaceCut::Split { .. })
    }

    /// Sub-segment of the face `[a, b]` on `side`, in the orientation of the face.
    pub fn piece(&self, a: Point, b: Point, side: Side) -> Option<(Point, Point)> {
        match *self {
            FaceCut::Whole(s) => (s == side).then_some((a, b)),
            FaceCut::Split { point, first } => Some(if first == side { (a, point) } else { (point, b) }),
        }
    }
}

/// Provenance of a sub-polygon edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeLabel {
    Face(usize),
    Interface,
}

/// Counter-clockwise polygon whose edge `j` (from vertex `j` to `j + 1`)
/// carries `labels[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPolygon {
    pub vertices: Vec<Point>,
    pub labels: Vec<EdgeLabel>,
}

impl SubPolygon {
    pub fn area(&self) -> f64 {
        polygon::signed_area(&self.vertices)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point, EdgeLabel)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |j| (self.vertices[j], self.vertices[(j + 1) % n], self.labels[j]))
    }
}

/// Sub-cells of a cut cell.
#[derive(Debug, Clone)]
pub struct CutCell {
    /// `polygons[i]` is the sub-cell on side `i + 1`.
    pub polygons: [SubPolygon; 2],
    /// Interface polyline traversed counter-clockwise around side 1; every
    /// node lies on the zero level.
    pub interface: Vec<Point>,
}

impl CutCell {
    pub fn polygon(&self, side: Side) -> &SubPolygon {
        &self.polygons[side.index()]
    }

    pub fn interface_length(&self) -> f64 {
        self.interface.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }
}

/// Classification of all cells and faces, plus sub-cells of the cut cells.
#[derive(Debug, Clone)]
pub struct CutTopology {
    pub tags: Vec<CellTag>,
    pub faces: Vec<FaceCut>,
    /// Sub-cell data of cut cells, filled by [`build_subcells`].
    pub cut: Vec<Option<CutCell>>,
    pub n_sub: usize,
}

impl CutTopology {
    /// Classification followed by sub-cell construction.
    pub fn build(mesh: &PolyMesh, ls: &LevelSet, n_sub: usize) -> Result<Self> {
        let tags = classify_cells(mesh, ls, ROOT_TOLERANCE)?;
        build_subcells(mesh, ls, tags, n_sub)
    }

    pub fn num_cut(&self) -> usize {
        self.tags.iter().filter(|&&t| t == CellTag::Cut).count()
    }

    pub fn cut_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.tags.iter().enumerate().filter(|(_, &t)| t == CellTag::Cut).map(|(c, _)| c)
    }

    /// `[Inside1, Inside2, Cut]` counts.
    pub fn census(&self) -> [usize; 3] {
        let mut n = [0; 3];
        for t in &self.tags {
            n[match t {
                CellTag::Inside1 => 0,
                CellTag::Inside2 => 1,
                CellTag::Cut => 2,
            }] += 1;
        }
        n
    }

    /// Sub-polygon of `cell` on `side`; uncut cells return the whole cell
    /// for their own side only.
    pub fn sub_polygon(&self, mesh: &PolyMesh, cell: usize, side: Side) -> Option<SubPolygon> {
        match self.tags[cell].side() {
            Some(s) if s == side => Some(SubPolygon {
                vertices: mesh.polygon(cell),
                labels: mesh.cell_faces[cell].iter().map(|&f| EdgeLabel::Face(f)).collect(),
            }),
            Some(_) => None,
            None => self.cut[cell].as_ref().map(|c| c.polygon(side).clone()),
        }
    }
}

/// Face/cell tags without sub-cells.
#[derive(Debug, Clone)]
pub struct Classification {
    pub tags: Vec<CellTag>,
    pub faces: Vec<FaceCut>,
}

fn locate_root(f: impl Fn(f64) -> f64, mut t0: f64, mut t1: f64, tol: f64) -> f64 {
    // Illinois variant of regula falsi on a bracket where the side changes
    let (mut f0, mut f1) = (f(t0), f(t1));
    let side0 = Side::of_value(f0);
    let mut last = 0i8;
    for _ in 0..200 {
        if t1 - t0 <= tol {
            break;
        }
        let mut t = if f1 != f0 { t1 - f1 * (t1 - t0) / (f1 - f0) } else { 0.5 * (t0 + t1) };
        if !(t > t0 && t < t1) {
            t = 0.5 * (t0 + t1);
        }
        // fall back to bisection when the bracket shrinks slowly
        let width = t1 - t0;
        let ft = f(t);
        if Side::of_value(ft) == side0 {
            t0 = t;
            f0 = ft;
            if last == -1 {
                f1 *= 0.5;
            }
            last = -1;
        } else {
            t1 = t;
            f1 = ft;
            if last == 1 {
                f0 *= 0.5;
            }
            last = 1;
        }
        if t1 - t0 > 0.5 * width {
            let m = 0.5 * (t0 + t1);
            let fm = f(m);
            if Side::of_value(fm) == side0 {
                t0 = m;
                f0 = fm;
            } else {
                t1 = m;
                f1 = fm;
            }
            last = 0;
        }
    }
    // final secant step on the unweighted bracket values
    let (g0, g1) = (f(t0), f(t1));
    let t = if g1 != g0 { t1 - g1 * (t1 - t0) / (g1 - g0) } else { 0.5 * (t0 + t1) };
    if t >= t0 && t <= t1 {
        t
    } else {
        0.5 * (t0 + t1)
    }
}

/// Classifies a single face `[a, b]` (`face` and `cell` are used in errors).
pub fn cut_face(ls: &LevelSet, a: Point, b: Point, tol: f64, face: usize, cell: usize) -> Result<FaceCut> {
    let d = b - a;
    let len = d.norm();
    let phi = |t: f64| ls.value(a + d * t);
    let (pa, pb, pm) = (phi(0.0), phi(1.0), phi(0.5));
    let scale = len * ls.gradient(a + d * 0.5).norm().max(ls.gradient(a).norm()).max(ls.gradient(b).norm());
    let flat = tol * scale.max(f64::MIN_POSITIVE);
    if pa.abs() <= flat && pb.abs() <= flat && pm.abs() <= flat {
        return Err(Error::TangentialCut { face });
    }
    let mut ts = Vec::with_capacity(FACE_SAMPLES + 1);
    let mut sides = Vec::with_capacity(FACE_SAMPLES + 1);
    for j in 0..=FACE_SAMPLES {
        let t = j as f64 / FACE_SAMPLES as f64;
        let v = match j {
            0 => pa,
            _ if j == FACE_SAMPLES => pb,
            _ => phi(t),
        };
        ts.push(t);
        sides.push(Side::of_value(v));
    }
    let changes: Vec<usize> = (0..FACE_SAMPLES).filter(|&j| sides[j] != sides[j + 1]).collect();
    match changes.as_slice() {
        [] => Ok(FaceCut::Whole(sides[0])),
        &[j] => {
            let t = locate_root(phi, ts[j], ts[j + 1], tol);
            if t * len <= tol * len {
                Ok(FaceCut::Whole(sides[FACE_SAMPLES]))
            } else if (1.0 - t) * len <= tol * len {
                Ok(FaceCut::Whole(sides[0]))
            } else {
                Ok(FaceCut::Split { point: a + d * t, first: sides[0] })
            }
        }
        many => {
            Err(Error::UnresolvedInterface { cell, reason: format!("face {face} is crossed {} times", many.len()) })
        }
    }
}

/// Boundary pieces of a cell: start point, side of the piece interior, label.
fn boundary_pieces(mesh: &PolyMesh, faces: &[FaceCut], cell: usize) -> Vec<(Point, Side, EdgeLabel)> {
    let loop_ = &mesh.cells[cell];
    let mut pieces = Vec::with_capacity(loop_.len() + 2);
    for (j, &f) in mesh.cell_faces[cell].iter().enumerate() {
        let start = mesh.vertices[loop_[j]];
        let forward = mesh.faces[f].vertices[0] == loop_[j];
        match faces[f] {
            FaceCut::Whole(s) => pieces.push((start, s, EdgeLabel::Face(f))),
            FaceCut::Split { point, first } => {
                let (s0, s1) = if forward { (first, first.other()) } else { (first.other(), first) };
                pieces.push((start, s0, EdgeLabel::Face(f)));
                pieces.push((point, s1, EdgeLabel::Face(f)));
            }
        }
    }
    pieces
}

/// Tags every face and cell.
///
/// `tol` is relative to each face length. A cell is cut when the sides of
/// its boundary pieces change; isolated touching points leave it uncut.
pub fn classify_cells(mesh: &PolyMesh, ls: &LevelSet, tol: f64) -> Result<Classification> {
    let faces: Vec<FaceCut> = (0..mesh.num_faces())
        .into_par_iter()
        .map(|f| {
            let [a, b] = mesh.face_points(f);
            cut_face(ls, a, b, tol, f, mesh.faces[f].owner)
        })
        .collect::<Result<_>>()?;
    let tags = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let pieces = boundary_pieces(mesh, &faces, c);
            let n = pieces.len();
            let transitions = (0..n).filter(|&i| pieces[i].1 != pieces[(i + n - 1) % n].1).count();
            match transitions {
                0 => {
                    let side = pieces[0].1;
                    let inner = Side::of_value(ls.value(mesh.centroid(c)));
                    if inner != side {
                        return Err(Error::UnresolvedInterface {
                            cell: c,
                            reason: "an interface component lies strictly inside the cell".into(),
                        });
                    }
                    Ok(CellTag::inside(side))
                }
                2 => Ok(CellTag::Cut),
                t => {
                    Err(Error::UnresolvedInterface { cell: c, reason: format!("{t} sign changes along the boundary") })
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(Classification { tags, faces })
}

/// Moves `x` onto the zero level along the gradient (damped Newton).
pub fn project_to_interface(ls: &LevelSet, mut x: Point, length_scale: f64) -> Result<Point> {
    let mut v = ls.value(x);
    for _ in 0..MAX_PROJECTION_STEPS {
        let g = ls.gradient(x);
        let g2 = g.norm_squared();
        if g2 == 0.0 {
            break;
        }
        if v.abs() <= 1e-15 * length_scale * g2.sqrt() {
            return Ok(x);
        }
        let step = g * (v / g2);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let y = x - step * lambda;
            let w = ls.value(y);
            if w.abs() < v.abs() {
                x = y;
                v = w;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // no further decrease is possible in floating point
            return if v.abs() <= 1e-12 * length_scale * g2.sqrt() {
                Ok(x)
            } else {
                Err(Error::ProjectionFailed { iterations: MAX_PROJECTION_STEPS })
            };
        }
    }
    let g = ls.gradient(x).norm();
    if v.abs() <= 1e-12 * length_scale * g {
        Ok(x)
    } else {
        Err(Error::ProjectionFailed { iterations: MAX_PROJECTION_STEPS })
    }
}

fn drop_short_edges(poly: &mut SubPolygon, tol: f64) {
    let mut j = 0;
    while poly.vertices.len() > 3 && j < poly.vertices.len() {
        let n = poly.vertices.len();
        if (poly.vertices[(j + 1) % n] - poly.vertices[j]).norm() <= tol {
            // keep the label of the edge that follows the collapsed one
            poly.vertices.remove((j + 1) % n);
            poly.labels.remove(j);
            if j == n - 1 {
                poly.labels.rotate_left(1);
            }
        } else {
            j += 1;
        }
    }
}

fn cut_cell(mesh: &PolyMesh, ls: &LevelSet, faces: &[FaceCut], cell: usize, n_sub: usize) -> Result<CutCell> {
    let pieces = boundary_pieces(mesh, faces, cell);
    let n = pieces.len();
    let prev = |i: usize| (i + n - 1) % n;
    let i_in = (0..n).find(|&i| pieces[i].1 == Side::One && pieces[prev(i)].1 == Side::Two);
    let i_out = (0..n).find(|&i| pieces[i].1 == Side::Two && pieces[prev(i)].1 == Side::One);
    let (i_in, i_out) = match (i_in, i_out) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::UnresolvedInterface { cell, reason: "no sign change on the boundary".into() }),
    };
    let (c_in, c_out) = (pieces[i_in].0, pieces[i_out].0);
    let cell_poly = mesh.polygon(cell);
    let h = polygon::diameter(&cell_poly);
    let mut interface = Vec::with_capacity(n_sub + 1);
    interface.push(c_out);
    for j in 1..n_sub {
        let chord = c_out + (c_in - c_out) * (j as f64 / n_sub as f64);
        let p = project_to_interface(ls, chord, h)?;
        let inside = polygon::contains(&cell_poly, p)
            || (0..cell_poly.len())
                .any(|e| polygon::segment_distance(p, cell_poly[e], cell_poly[(e + 1) % cell_poly.len()]) <= 1e-12 * h);
        if !inside {
            return Err(Error::UnresolvedInterface {
                cell,
                reason: "interface polyline leaves the cell; the interface is not resolved".into(),
            });
        }
        interface.push(p);
    }
    interface.push(c_in);

    let walk = |from: usize, to: usize| {
        let mut vertices = Vec::new();
        let mut labels = Vec::new();
        let mut i = from;
        while i != to {
            vertices.push(pieces[i].0);
            labels.push(pieces[i].2);
            i = (i + 1) % n;
        }
        (vertices, labels)
    };
    let (mut v1, mut l1) = walk(i_in, i_out);
    for &p in &interface[..n_sub] {
        v1.push(p);
        l1.push(EdgeLabel::Interface);
    }
    let (mut v2, mut l2) = walk(i_out, i_in);
    for &p in interface[1..].iter().rev() {
        v2.push(p);
        l2.push(EdgeLabel::Interface);
    }
    let tol = 1e-14 * h;
    let mut polygons = [SubPolygon { vertices: v1, labels: l1 }, SubPolygon { vertices: v2, labels: l2 }];
    for p in polygons.iter_mut() {
        drop_short_edges(p, tol);
        if p.vertices.len() < 3 || !polygon::is_simple(&p.vertices) || p.area() <= 0.0 {
            return Err(Error::UnresolvedInterface { cell, reason: "sub-cell polygon is not simple".into() });
        }
    }
    Ok(CutCell { polygons, interface })
}

/// Builds the polygonal sub-cells of every cut cell with an interface
/// polyline of `n_sub` segments.
pub fn build_subcells(mesh: &PolyMesh, ls: &LevelSet, tags: Classification, n_sub: usize) -> Result<CutTopology> {
    if n_sub == 0 {
        return Err(Error::InvalidArgument("n_sub must be at least 1".into()));
    }
    let Classification { tags, faces } = tags;
    let cut = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| match tags[c] {
            CellTag::Cut => cut_cell(mesh, ls, &faces, c, n_sub).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CutTopology { tags, faces, cut, n_sub })
}

/// Default number of interface segments per cut cell for degree `k`.
pub fn default_n_sub(k: usize) -> usize {
    4 * (k + 1) * (k + 1)
}
