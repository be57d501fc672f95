//! Runtime checks of the geometric resolution assumptions.

use crate::geometry::cell::CellGeometry;
use crate::geometry::polygon;
use crate::geometry::{CutTopology, LevelSet};
use crate::mesh::{PolyMesh, BALL_RESOLUTION};
use crate::{Error, Point, Result, Side};

/// Inscribed-ball estimate of one side of a cell against `delta * h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallCheck {
    pub center: Point,
    pub radius: f64,
    pub required: f64,
    pub pass: bool,
}

/// Ball condition for both sides of a cut cell (grid resolution `h / 64`).
/// Uncut cells pass on both sides by convention.
pub fn check_assumption_ball(cell: &CellGeometry, delta: f64) -> [BallCheck; 2] {
    let required = delta * cell.h;
    [Side::One, Side::Two].map(|side| match (cell.is_cut(), cell.region(side)) {
        (true, Some(region)) => {
            let ball = polygon::inscribed_ball(&region, cell.h * BALL_RESOLUTION);
            BallCheck { center: ball.center, radius: ball.radius, required, pass: ball.radius >= required }
        }
        (true, None) => BallCheck { center: Point::zeros(), radius: 0.0, required, pass: false },
        (false, _) => BallCheck { center: Point::zeros(), radius: f64::NAN, required, pass: true },
    })
}

/// Achieved interface-resolution ratio of a cut cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaCheck {
    pub point: Point,
    pub gamma: f64,
}

/// Evaluates `min(h / max_s |x - s|, min_s d(x, T_s) / h)` at `x`, where `s`
/// runs over the samples and `T_s` is the tangent line at `s`.
fn gamma_at(x: Point, samples: &[(Point, Point)], h: f64) -> f64 {
    let mut far: f64 = 0.0;
    let mut near = f64::INFINITY;
    for &(s, n) in samples {
        far = far.max((x - s).norm());
        near = near.min((x - s).dot(&n).abs());
    }
    (h / far).min(near / h)
}

/// Interface-resolution diagnostic.
///
/// Candidates are the points at distance `2 h` from each polyline node along
/// both normal directions, and the inscribed-ball centers of the sub-cells.
/// Tangent lines are sampled at the polyline nodes and segment midpoints
/// (projected onto the zero level). Errors when the best `gamma` is below
/// `min_gamma`.
pub fn check_assumption_gamma(cell: &CellGeometry, ls: &LevelSet, min_gamma: f64, id: usize) -> Result<GammaCheck> {
    let h = cell.h;
    let mut samples = Vec::new();
    for line in &cell.interface {
        for (j, &p) in line.iter().enumerate() {
            samples.push((p, ls.normal(p)));
            if j + 1 < line.len() {
                let mid = (p + line[j + 1]) * 0.5;
                if let Ok(q) = crate::geometry::cut::project_to_interface(ls, mid, h) {
                    samples.push((q, ls.normal(q)));
                }
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument(format!("cell {id} is not cut")));
    }
    let mut candidates: Vec<Point> = Vec::new();
    for line in &cell.interface {
        for &p in line {
            let n = ls.normal(p);
            candidates.push(p - n * (2.0 * h));
            candidates.push(p + n * (2.0 * h));
        }
    }
    for b in check_assumption_ball(cell, 0.0) {
        if b.radius > 0.0 {
            candidates.push(b.center);
        }
    }
    let mut best = GammaCheck { point: candidates[0], gamma: f64::NEG_INFINITY };
    for x in candidates {
        let g = gamma_at(x, &samples, h);
        if g > best.gamma {
            best = GammaCheck { point: x, gamma: g };
        }
    }
    if best.gamma > 0.0 && best.gamma >= min_gamma {
        Ok(best)
    } else {
        Err(Error::InterfaceNotResolved { cell: id, gamma: best.gamma, min_gamma })
    }
}

/// Outcome of the mesh-resolution surrogate checks.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionReport {
    pub h: f64,
    pub curvature: Option<f64>,
    /// `h * M <= 1`; vacuous when no curvature bound is known or no cell is cut.
    pub curvature_ok: bool,
    /// Cut cells touching the domain boundary.
    pub boundary_cut_cells: Vec<usize>,
}

impl ResolutionReport {
    pub fn pass(&self) -> bool {
        self.curvature_ok && self.boundary_cut_cells.is_empty()
    }
}

/// Passes iff `h M <= 1` and no cell touching the boundary is cut.
pub fn check_resolution(mesh: &PolyMesh, topo: &CutTopology, ls: &LevelSet) -> ResolutionReport {
    let h = mesh.h_max();
    let curvature = ls.curvature_bound();
    let curvature_ok = topo.num_cut() == 0 || curvature.is_none_or(|m| h * m <= 1.0);
    let adjacent = mesh.boundary_adjacent_cells();
    let boundary_cut_cells = topo.cut_cells().filter(|&c| adjacent[c]).collect();
    ResolutionReport { h, curvature, curvature_ok, boundary_cut_cells }
}
