//! Gauss rules on segments, triangles and polygons.

use crate::geometry::polygon;
use crate::{Point, Result};

/// Points and positive weights; weights sum to the measure of the domain.
#[derive(Debug, Clone, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn append(&mut self, other: QuadratureRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` with `n` points.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and its derivative
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = (p1, p0);
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Number of Gauss points integrating degree `degree` exactly.
pub fn points_for_degree(degree: usize) -> usize {
    degree / 2 + 1
}

/// Gauss rule on the segment `[a, b]`, exact for polynomials of `degree`.
pub fn segment_rule(a: Point, b: Point, degree: usize) -> QuadratureRule {
    let (x, w) = gauss_legendre(points_for_degree(degree));
    let half = 0.5 * (b - a).norm();
    QuadratureRule {
        points: x.iter().map(|&t| a + (b - a) * (0.5 * (t + 1.0))).collect(),
        weights: w.iter().map(|&wi| wi * half).collect(),
    }
}

/// Collapsed (Duffy) Gauss rule on a triangle, exact for `degree`.
pub fn triangle_rule(a: Point, b: Point, c: Point, degree: usize) -> QuadratureRule {
    let area = 0.5 * ((b - a).x * (c - a).y - (b - a).y * (c - a).x).abs();
    let (xu, wu) = gauss_legendre(points_for_degree(degree + 1));
    let (xv, wv) = gauss_legendre(points_for_degree(degree));
    let mut rule = QuadratureRule {
        points: Vec::with_capacity(xu.len() * xv.len()),
        weights: Vec::with_capacity(xu.len() * xv.len()),
    };
    for (&u, &wu) in xu.iter().zip(&wu) {
        let u = 0.5 * (u + 1.0);
        for (&v, &wv) in xv.iter().zip(&wv) {
            let v = 0.5 * (v + 1.0);
            let (xi, eta) = (u, v * (1.0 - u));
            rule.points.push(a + (b - a) * xi + (c - a) * eta);
            // 0.25 maps both [-1,1] weights to [0,1]; 2*area is the affine Jacobian
            rule.weights.push(0.25 * wu * wv * (1.0 - u) * 2.0 * area);
        }
    }
    rule
}

/// Rule on a simple counter-clockwise polygon through ear clipping.
pub fn polygon_rule(poly: &[Point], degree: usize) -> Result<QuadratureRule> {
    let mut rule = QuadratureRule::default();
    for [a, b, c] in polygon::triangulate(poly)? {
        rule.append(triangle_rule(a, b, c, degree));
    }
    Ok(rule)
}
