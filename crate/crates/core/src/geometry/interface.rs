//! Quadrature on the exact interface and on curved sub-cells, obtained by
//! projecting the polyline onto the zero level along segment normals.

use crate::geometry::cell::{segment_normal, CellGeometry, InterfaceRule};
use crate::geometry::quadrature::{gauss_legendre, points_for_degree};
use crate::geometry::LevelSet;
use crate::{Error, Point, Result, Side};

const MAX_STEPS: usize = 50;

/// Offset `s` such that `phi(p + s nu) = 0`, by damped Newton.
fn normal_offset(ls: &LevelSet, p: Point, nu: Point, scale: f64) -> Result<f64> {
    let mut s = 0.0;
    let mut v = ls.value(p);
    for _ in 0..MAX_STEPS {
        if v.abs() <= 1e-15 * scale {
            return Ok(s);
        }
        let dv = ls.gradient(p + nu * s).dot(&nu);
        if dv == 0.0 {
            break;
        }
        let step = v / dv;
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let t = s - lambda * step;
            let w = ls.value(p + nu * t);
            if w.abs() < v.abs() {
                s = t;
                v = w;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !moved {
            if v.abs() <= 1e-12 * scale {
                return Ok(s);
            }
            break;
        }
    }
    if v.abs() <= 1e-12 * scale {
        Ok(s)
    } else {
        Err(Error::ProjectionFailed { iterations: MAX_STEPS })
    }
}

/// Node of a projected segment: position, offset along the chord normal,
/// and derivative of the mapped point with respect to the chord parameter.
struct Mapped {
    x: Point,
    s: f64,
    dx: Point,
}

fn map_point(ls: &LevelSet, a: Point, b: Point, t: f64, scale: f64) -> Result<Mapped> {
    let d = b - a;
    let nu = segment_normal(a, b);
    let p = a + d * t;
    let s = normal_offset(ls, p, nu, scale)?;
    let x = p + nu * s;
    let g = ls.gradient(x);
    // implicit differentiation of phi(p(t) + s(t) nu) = 0
    let ds = -g.dot(&d) / g.dot(&nu);
    Ok(Mapped { x, s, dx: d + nu * ds })
}

/// Gauss rule on the exact interface inside `cell`: the nodes of a
/// `order`-exact rule on each polyline segment are projected onto the zero
/// level along the segment normal; weights carry the arc-length Jacobian.
/// Normals are `grad phi / |grad phi|` at the projected nodes.
pub fn interface_quadrature(cell: &CellGeometry, ls: &LevelSet, order: usize) -> Result<InterfaceRule> {
    let (x, w) = gauss_legendre(points_for_degree(order));
    let scale = cell.h * ls.gradient(cell.interface.first().map_or(Point::zeros(), |l| l[0])).norm().max(1e-300);
    let mut out = InterfaceRule::default();
    for (a, b) in cell.interface_segments() {
        for (&t, &wt) in x.iter().zip(&w) {
            let m = map_point(ls, a, b, 0.5 * (t + 1.0), scale)?;
            out.rule.points.push(m.x);
            out.rule.weights.push(0.5 * wt * m.dx.norm());
            out.normals.push(ls.normal(m.x));
        }
    }
    Ok(out)
}

/// Rule on the sub-cell of `side` bounded by the exact interface: the
/// polygon rule plus signed rules on the strips between each chord and
/// the projected arc. Strip weights are negative where the arc bulges into
/// the polygon.
pub fn curved_subcell_quadrature(
    cell: &CellGeometry,
    ls: &LevelSet,
    side: Side,
    order: usize,
) -> Result<crate::QuadratureRule> {
    let region =
        cell.side(side).ok_or_else(|| Error::InvalidArgument(format!("cell has no side {}", side.number())))?;
    let mut rule = region.rule(order)?;
    let (xt, wt) = gauss_legendre(points_for_degree(order + 1));
    let (xl, wl) = gauss_legendre(points_for_degree(order + 1));
    let scale = cell.h * ls.gradient(region.centroid()).norm().max(1e-300);
    let orient = match side {
        Side::One => 1.0,
        Side::Two => -1.0,
    };
    for (a, b) in cell.interface_segments() {
        let d = b - a;
        let nu = segment_normal(a, b);
        for (&t, &wt) in xt.iter().zip(&wt) {
            let t = 0.5 * (t + 1.0);
            let m = map_point(ls, a, b, t, scale)?;
            let p = a + d * t;
            for (&l, &wl) in xl.iter().zip(&wl) {
                let l = 0.5 * (l + 1.0);
                // x(t, l) = p(t) + l s(t) nu has Jacobian |s| |d|
                let x = p + nu * (l * m.s);
                rule.points.push(x);
                rule.weights.push(orient * 0.25 * wt * wl * m.s * d.norm());
            }
        }
    }
    Ok(rule)
}
