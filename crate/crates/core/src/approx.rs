//! Polynomial bases on cells, sub-cells and (sub-)faces, L2 projections and
//! trace matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::geometry::QuadratureRule;
use crate::{Error, Point, Result};

/// Dimension of the bivariate polynomials of total degree at most `l`.
pub fn dim_p(l: usize) -> usize {
    (l + 1) * (l + 2) / 2
}

/// Exponents `(i, j)` of `x^i y^j`, graded by total degree.
pub fn exponents(l: usize) -> Vec<(i32, i32)> {
    let mut e = Vec::with_capacity(dim_p(l));
    for d in 0..=l as i32 {
        for j in 0..=d {
            e.push((d - j, j));
        }
    }
    e
}

/// Condition number above which a mass matrix is declared singular.
pub const MAX_MASS_CONDITION: f64 = 1e14;

/// Scaled monomials `((x - c) / h)^alpha` orthonormalized in `L2(S)` for a
/// sub-domain `S`. The orthonormalization is triangular, so the first
/// `dim_p(l')` functions span `P^{l'}(S)` for every `l' <= l`.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub degree: usize,
    pub center: Point,
    pub scale: f64,
    exps: Vec<(i32, i32)>,
    /// Column `a` holds the monomial coefficients of basis function `a`.
    coeffs: DMatrix<f64>,
}

/// Gram matrix of the scaled monomials of degree `l` under `rule`.
pub fn monomial_gram(l: usize, center: Point, scale: f64, rule: &QuadratureRule) -> DMatrix<f64> {
    let exps = exponents(l);
    let n = exps.len();
    let mut g = DMatrix::zeros(n, n);
    let mut m = DVector::zeros(n);
    for (p, w) in rule.iter() {
        fill_monomials(&exps, (p - center) / scale, &mut m);
        g.syger(w, &m, &m, 1.0);
    }
    g.fill_upper_triangle_with_lower_triangle();
    g
}

fn fill_monomials(exps: &[(i32, i32)], z: Point, out: &mut DVector<f64>) {
    for (k, &(i, j)) in exps.iter().enumerate() {
        out[k] = z.x.powi(i) * z.y.powi(j);
    }
}

fn upper_inverse_factor(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    // G = L L^T, returns L^{-T} (upper triangular)
    let l = g.clone().cholesky()?.unpack();
    let n = l.nrows();
    let linv = l.solve_lower_triangular(&DMatrix::identity(n, n))?;
    Some(linv.transpose())
}

impl CellBasis {
    /// Orthonormalizes the scaled monomials of degree `degree` with respect
    /// to the sub-domain integrated by `rule` (which must be exact to
    /// degree `2 degree`). `cell` only labels errors.
    pub fn new(degree: usize, center: Point, scale: f64, rule: &QuadratureRule, cell: usize) -> Result<Self> {
        let exps = exponents(degree);
        let g = monomial_gram(degree, center, scale, rule);
        let d = DVector::from_iterator(g.nrows(), g.diagonal().iter().map(|&v| 1.0 / v.max(f64::MIN_POSITIVE).sqrt()));
        let scaled = DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] * d[i] * d[j]);
        let eig = SymmetricEigen::new(scaled).eigenvalues;
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_MASS_CONDITION) {
            return Err(Error::SingularMass { cell, condition });
        }
        // two passes of Cholesky orthonormalization
        let c1 = upper_inverse_factor(&g).ok_or(Error::SingularMass { cell, condition })?;
        let g2 = c1.transpose() * &g * &c1;
        let c2 = upper_inverse_factor(&g2).ok_or(Error::SingularMass { cell, condition })?;
        Ok(CellBasis { degree, center, scale, exps, coeffs: c1 * c2 })
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Monomial coefficients of the basis (column per function).
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn eval(&self, x: Point) -> DVector<f64> {
        let mut m = DVector::zeros(self.dim());
        fill_monomials(&self.exps, (x - self.center) / self.scale, &mut m);
        self.coeffs.tr_mul(&m)
    }

    /// Gradients of all basis functions: row 0 is `d/dx`, row 1 is `d/dy`.
    pub fn grad(&self, x: Point) -> (DVector<f64>, DVector<f64>) {
        let z = (x - self.center) / self.scale;
        let n = self.dim();
        let (mut gx, mut gy) = (DVector::zeros(n), DVector::zeros(n));
        for (k, &(i, j)) in self.exps.iter().enumerate() {
            if i > 0 {
                gx[k] = i as f64 * z.x.powi(i - 1) * z.y.powi(j) / self.scale;
            }
            if j > 0 {
                gy[k] = j as f64 * z.x.powi(i) * z.y.powi(j - 1) / self.scale;
            }
        }
        (self.coeffs.tr_mul(&gx), self.coeffs.tr_mul(&gy))
    }

    /// Normal derivatives `grad phi_a . n` of all basis functions.
    pub fn normal_grad(&self, x: Point, n: Point) -> DVector<f64> {
        let (gx, gy) = self.grad(x);
        gx * n.x + gy * n.y
    }

    /// Value at `x` of the polynomial with coefficients `c`.
    pub fn evaluate(&self, c: &DVector<f64>, x: Point) -> f64 {
        self.eval(x).dot(c)
    }

    pub fn evaluate_grad(&self, c: &DVector<f64>, x: Point) -> Point {
        let (gx, gy) = self.grad(x);
        Point::new(gx.dot(c), gy.dot(c))
    }

    /// Mass matrix under `rule`.
    pub fn mass(&self, rule: &QuadratureRule) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (p, w) in rule.iter() {
            let v = self.eval(p);
            m.syger(w, &v, &v, 1.0);
        }
        m.fill_upper_triangle_with_lower_triangle();
        m
    }
}

/// Orthonormal Legendre basis of `P^k` on the segment `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct FaceBasis {
    pub degree: usize,
    pub a: Point,
    pub b: Point,
}

impl FaceBasis {
    pub fn new(degree: usize, a: Point, b: Point) -> Self {
        FaceBasis { degree, a, b }
    }

    pub fn dim(&self) -> usize {
        self.degree + 1
    }

    pub fn eval(&self, x: Point) -> DVector<f64> {
        let d = self.b - self.a;
        let len = d.norm();
        let t = 2.0 * (x - self.a).dot(&d) / (len * len) - 1.0;
        let mut v = DVector::zeros(self.dim());
        let (mut p0, mut p1) = (1.0, t);
        for j in 0..self.dim() {
            let pj = match j {
                0 => 1.0,
                1 => t,
                _ => {
                    let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            v[j] = ((2 * j + 1) as f64 / len).sqrt() * pj;
        }
        v
    }

    pub fn evaluate(&self, c: &DVector<f64>, x: Point) -> f64 {
        self.eval(x).dot(c)
    }
}

fn solve_projection(mass: DMatrix<f64>, rhs: DVector<f64>) -> DVector<f64> {
    match mass.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => mass.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
    }
}

/// Coefficients of the L2 projection of `f` onto the span of `basis`.
pub fn project_cell(f: impl Fn(Point) -> f64, basis: &CellBasis, rule: &QuadratureRule) -> DVector<f64> {
    let mut rhs = DVector::zeros(basis.dim());
    for (p, w) in rule.iter() {
        rhs.axpy(w * f(p), &basis.eval(p), 1.0);
    }
    solve_projection(basis.mass(rule), rhs)
}

/// Coefficients of the L2 projection of `f` onto the face basis.
pub fn project_face(f: impl Fn(Point) -> f64, basis: &FaceBasis, rule: &QuadratureRule) -> DVector<f64> {
    let n = basis.dim();
    let mut rhs = DVector::zeros(n);
    let mut mass = DMatrix::zeros(n, n);
    for (p, w) in rule.iter() {
        let v = basis.eval(p);
        rhs.axpy(w * f(p), &v, 1.0);
        mass.syger(w, &v, &v, 1.0);
    }
    mass.fill_upper_triangle_with_lower_triangle();
    solve_projection(mass, rhs)
}

/// `T[c, a] = int_F psi_c phi_a`.
pub fn trace_matrix(cell: &CellBasis, face: &FaceBasis, rule: &QuadratureRule) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(face.dim(), cell.dim());
    for (p, w) in rule.iter() {
        t.ger(w, &face.eval(p), &cell.eval(p), 1.0);
    }
    t
}

/// `G[a, c] = int_F (grad phi_a . n) psi_c`.
pub fn normal_trace_matrix(cell: &CellBasis, normal: Point, face: &FaceBasis, rule: &QuadratureRule) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(cell.dim(), face.dim());
    for (p, w) in rule.iter() {
        g.ger(w, &cell.normal_grad(p, normal), &face.eval(p), 1.0);
    }
    g
}

/// `G[a, b] = int_F (grad phi_a . n) phi_b` for two cell bases.
pub fn normal_cell_trace_matrix(
    test: &CellBasis,
    normal: Point,
    trial: &CellBasis,
    rule: &QuadratureRule,
) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(test.dim(), trial.dim());
    for (p, w) in rule.iter() {
        g.ger(w, &test.normal_grad(p, normal), &trial.eval(p), 1.0);
    }
    g
}
