//! Planar polygon utilities: measures, containment, triangulation and the
//! sampled inscribed-ball estimator.

use crate::{Error, Point, Result};

fn cross(a: Point, b: Point) -> f64 {
    a.x * b.y - a.y * b.x
}

pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * s
}

/// Area centroid; falls back to the vertex mean for degenerate polygons.
pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let a = signed_area(poly);
    if a.abs() < 1e-300 {
        return poly.iter().sum::<Point>() / n as f64;
    }
    // shift to the first vertex to limit cancellation
    let o = poly[0];
    let mut c = Point::zeros();
    for i in 0..n {
        let p = poly[i] - o;
        let q = poly[(i + 1) % n] - o;
        let w = cross(p, q);
        c += (p + q) * w;
    }
    o + c / (6.0 * a)
}

/// Largest pairwise distance between points.
pub fn diameter(points: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max((points[i] - points[j]).norm());
        }
    }
    d
}

pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_squared();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / l2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Even-odd containment test (points on the boundary may go either way).
pub fn contains(poly: &[Point], p: Point) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// True when no two non-adjacent edges properly intersect.
pub fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_cross(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Drops consecutive points closer than `tol` (cyclically).
pub fn dedup(poly: &mut Vec<Point>, tol: f64) {
    let mut out: Vec<Point> = Vec::with_capacity(poly.len());
    for &p in poly.iter() {
        if out.last().is_none_or(|q| (p - q).norm() > tol) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= tol {
        out.pop();
    }
    *poly = out;
}

/// Closed containment; points coinciding with a corner do not count.
fn point_in_triangle(p: Point, a: Point, b: Point, c: Point, eps: f64) -> bool {
    if p == a || p == b || p == c {
        return false;
    }
    let d1 = cross(b - a, p - a);
    let d2 = cross(c - b, p - b);
    let d3 = cross(a - c, p - c);
    d1 >= -eps && d2 >= -eps && d3 >= -eps
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
/// Degenerate (zero-area) ears are dropped from the output.
pub fn triangulate(poly: &[Point]) -> Result<Vec<[Point; 3]>> {
    let n = poly.len();
    if n < 3 {
        return Err(Error::NonSimplePolygon(format!("{n} vertices")));
    }
    let scale = diameter(poly).max(1e-300);
    let eps = 1e-14 * scale * scale;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let mut guard = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            let area2 = cross(b - a, c - a);
            if area2 < -eps {
                continue;
            }
            if area2 > eps {
                let blocked = idx
                    .iter()
                    .filter(|&&j| j != ia && j != ib && j != ic)
                    .any(|&j| point_in_triangle(poly[j], a, b, c, eps));
                if blocked {
                    continue;
                }
                tris.push([a, b, c]);
            }
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            guard += 1;
            if guard > 1 {
                return Err(Error::NonSimplePolygon("ear clipping found no ear".into()));
            }
            // tolerate a nearly-flat reflex vertex by clipping the flattest one
            let m = idx.len();
            let (mut best, mut best_val) = (0, f64::INFINITY);
            for i in 0..m {
                let (a, b, c) = (poly[idx[(i + m - 1) % m]], poly[idx[i]], poly[idx[(i + 1) % m]]);
                let v = cross(b - a, c - a).abs();
                if v < best_val {
                    best_val = v;
                    best = i;
                }
            }
            if best_val > 1e-10 * scale * scale {
                return Err(Error::NonSimplePolygon("ear clipping found no ear".into()));
            }
            idx.remove(best);
        } else {
            guard = 0;
        }
    }
    let (a, b, c) = (poly[idx[0]], poly[idx[1]], poly[idx[2]]);
    if cross(b - a, c - a) > eps {
        tris.push([a, b, c]);
    }
    Ok(tris)
}

/// A region of the plane given as a union of simple polygons together with
/// the edges forming the boundary of the union.
#[derive(Debug, Clone, Default)]
pub struct Region {
    pub pieces: Vec<Vec<Point>>,
    pub boundary: Vec<(Point, Point)>,
}

impl Region {
    pub fn from_polygon(poly: Vec<Point>) -> Self {
        let n = poly.len();
        let boundary = (0..n).map(|i| (poly[i], poly[(i + 1) % n])).collect();
        Region { pieces: vec![poly], boundary }
    }

    pub fn area(&self) -> f64 {
        self.pieces.iter().map(|p| signed_area(p)).sum()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.pieces.iter().any(|poly| contains(poly, p))
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.boundary.iter().map(|&(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    fn clearance(&self, p: Point) -> f64 {
        if self.contains(p) {
            self.boundary_distance(p)
        } else {
            0.0
        }
    }
}

/// Ball found inside a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

/// Lower bound on the largest ball contained in `region`.
///
/// Candidates are the points of a grid of spacing `resolution` anchored at
/// the bounding-box center, plus the incenters of an ear-clipping
/// triangulation of each piece; the best candidate is polished by a compass
/// search. Every reported radius is the exact clearance of a sampled point.
pub fn inscribed_ball(region: &Region, resolution: f64) -> Ball {
    let mut best = Ball { center: Point::zeros(), radius: 0.0 };
    let pts: Vec<Point> = region.pieces.iter().flatten().copied().collect();
    if pts.is_empty() || resolution <= 0.0 {
        return best;
    }
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let mid = (lo + hi) * 0.5;
    let nx = ((hi.x - lo.x) * 0.5 / resolution).ceil() as i64;
    let ny = ((hi.y - lo.y) * 0.5 / resolution).ceil() as i64;
    let consider = |p: Point, best: &mut Ball| {
        let r = region.clearance(p);
        if r > best.radius {
            *best = Ball { center: p, radius: r };
        }
    };
    best.center = mid;
    for j in -ny..=ny {
        for i in -nx..=nx {
            let p = mid + Point::new(i as f64 * resolution, j as f64 * resolution);
            consider(p, &mut best);
        }
    }
    for piece in &region.pieces {
        if let Ok(tris) = triangulate(piece) {
            for [a, b, c] in tris {
                let (la, lb, lc) = ((b - c).norm(), (c - a).norm(), (a - b).norm());
                let s = la + lb + lc;
                if s > 0.0 {
                    consider((a * la + b * lb + c * lc) / s, &mut best);
                }
            }
        }
    }
    if best.radius == 0.0 {
        return best;
    }
    let dirs = [
        Point::new(1.0, 0.0),
        Point::new(-1.0, 0.0),
        Point::new(0.0, 1.0),
        Point::new(0.0, -1.0),
        Point::new(0.5f64.sqrt(), 0.5f64.sqrt()),
        Point::new(-(0.5f64.sqrt()), 0.5f64.sqrt()),
        Point::new(0.5f64.sqrt(), -(0.5f64.sqrt())),
        Point::new(-(0.5f64.sqrt()), -(0.5f64.sqrt())),
    ];
    let mut step = resolution.min(best.radius) * 0.5;
    let stop = resolution * 1e-4;
    let mut iterations = 0;
    while step > stop && iterations < 400 {
        iterations += 1;
        let mut improved = false;
        for d in &dirs {
            let p = best.center + d * step;
            let r = region.clearance(p);
            if r > best.radius {
                best = Ball { center: p, radius: r };
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}
