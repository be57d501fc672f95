//! Manufactured solutions of the interface problem with closed-form
//! derivatives.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::LevelSet;
use crate::hho::ProblemData;
use crate::mesh::Rect;
use crate::{Error, Point, Result, Side};

type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// Exact fields on one side.
#[derive(Clone)]
pub struct Field {
    pub u: ScalarFn,
    pub grad: VectorFn,
    pub laplacian: ScalarFn,
}

impl Field {
    pub fn new(
        u: impl Fn(Point) -> f64 + Send + Sync + 'static,
        grad: impl Fn(Point) -> Point + Send + Sync + 'static,
        laplacian: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Field { u: Arc::new(u), grad: Arc::new(grad), laplacian: Arc::new(laplacian) }
    }
}

/// Exact solution, coefficients and interface of a model problem. The data
/// `f`, `g_D` and `g_N` are derived from the fields.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: String,
    pub kappa: [f64; 2],
    pub level_set: LevelSet,
    pub fields: [Field; 2],
}

impl fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedCase")
            .field("name", &self.name)
            .field("kappa", &self.kappa)
            .field("level_set", &self.level_set)
            .finish()
    }
}

/// Parameters accepted by [`make_case`].
#[derive(Debug, Clone, PartialEq)]
pub struct CaseParams {
    pub kappa: [f64; 2],
    /// Circle center and radius (radial_circle, smooth_nojump, polynomial).
    pub center: Point,
    pub radius: f64,
    /// Exponent of `r^p` in radial_circle.
    pub power: i32,
    /// Unit normal angle and offset of the line `n . x = d` (planar_kink).
    pub angle: f64,
    pub offset: f64,
    /// Solution jump and flux jump (planar_kink).
    pub jump: f64,
    pub flux_jump: f64,
    /// Degree of the polynomial case.
    pub degree: usize,
    /// Computational domain; the interface must stay inside it.
    pub domain: Rect,
}

impl Default for CaseParams {
    fn default() -> Self {
        CaseParams {
            kappa: [1.0, 100.0],
            center: Point::zeros(),
            radius: 0.71,
            power: 4,
            angle: 0.0,
            offset: 0.0,
            jump: 1.0,
            flux_jump: 0.5,
            degree: 2,
            domain: Rect::centered(1.0),
        }
    }
}

/// Names accepted by [`make_case`].
pub const CASE_NAMES: [&str; 5] = ["radial_circle", "smooth_nojump", "smooth_linear", "planar_kink", "polynomial"];

impl ManufacturedCase {
    pub fn u(&self, side: Side, x: Point) -> f64 {
        (self.fields[side.index()].u)(x)
    }

    pub fn grad(&self, side: Side, x: Point) -> Point {
        (self.fields[side.index()].grad)(x)
    }

    pub fn laplacian(&self, side: Side, x: Point) -> f64 {
        (self.fields[side.index()].laplacian)(x)
    }

    /// Same problem with the interface translated by `shift`.
    pub fn translated(&self, shift: Point) -> Self {
        let shift_field = |f: &Field| {
            let (u, g, l) = (f.u.clone(), f.grad.clone(), f.laplacian.clone());
            Field::new(move |x| u(x - shift), move |x| g(x - shift), move |x| l(x - shift))
        };
        ManufacturedCase {
            name: self.name.clone(),
            kappa: self.kappa,
            level_set: self.level_set.translated(shift),
            fields: [shift_field(&self.fields[0]), shift_field(&self.fields[1])],
        }
    }

    /// Relabels the sides so that `kappa1 <= kappa2`.
    pub fn normalized(self) -> Self {
        if self.kappa[0] <= self.kappa[1] {
            return self;
        }
        let [a, b] = self.fields;
        ManufacturedCase {
            name: self.name,
            kappa: [self.kappa[1], self.kappa[0]],
            level_set: self.level_set.negated(),
            fields: [b, a],
        }
    }

    /// Residual of the interface problem at `x`: PDE residual on both sides
    /// plus, if `x` is on the interface, both jump conditions.
    pub fn residual(&self, x: Point) -> f64 {
        let pde = [Side::One, Side::Two]
            .iter()
            .map(|&s| (-self.kappa[s.index()] * self.laplacian(s, x) - self.source(s, x)).abs())
            .fold(0.0, f64::max);
        let n = self.level_set.normal(x);
        let jump = (self.u(Side::One, x) - self.u(Side::Two, x) - self.jump(x)).abs();
        let flux = ((self.grad(Side::One, x) * self.kappa[0] - self.grad(Side::Two, x) * self.kappa[1]).dot(&n)
            - self.flux_jump(x, n))
        .abs();
        pde.max(jump).max(flux)
    }

    /// Checks the closed-form gradients and Laplacians against central
    /// differences with step `1e-6 * diam` at `samples` random points of
    /// `domain`; returns the largest relative deviation.
    pub fn validate_derivatives(&self, domain: &Rect, samples: usize, seed: u64) -> Result<f64> {
        let diam = ((domain.x1 - domain.x0).powi(2) + (domain.y1 - domain.y0).powi(2)).sqrt();
        let step = 1e-6 * diam;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = Point::new(rng.random_range(domain.x0..domain.x1), rng.random_range(domain.y0..domain.y1));
            for side in [Side::One, Side::Two] {
                let f = &self.fields[side.index()];
                let (ex, ey) = (Point::new(step, 0.0), Point::new(0.0, step));
                let fd = Point::new(
                    ((f.u)(x + ex) - (f.u)(x - ex)) / (2.0 * step),
                    ((f.u)(x + ey) - (f.u)(x - ey)) / (2.0 * step),
                );
                let g = (f.grad)(x);
                let lap_fd =
                    (((f.grad)(x + ex) - (f.grad)(x - ex)).x + ((f.grad)(x + ey) - (f.grad)(x - ey)).y) / (2.0 * step);
                let scale_g = 1.0 + g.norm();
                let scale_l = 1.0 + (f.laplacian)(x).abs();
                worst = worst.max((fd - g).norm() / scale_g).max((lap_fd - (f.laplacian)(x)).abs() / scale_l);
            }
        }
        if worst <= 1e-6 {
            Ok(worst)
        } else {
            Err(Error::InvalidArgument(format!(
                "case {}: closed-form derivatives disagree with finite differences ({worst:.3e})",
                self.name
            )))
        }
    }

    /// Errors when the interface meets the closure of `domain`.
    pub fn check_domain(&self, domain: &Rect) -> Result<()> {
        let samples = 64;
        let mut sign = None;
        let corners = domain.corners();
        for e in 0..4 {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            for t in 0..=samples {
                let x = a + (b - a) * (t as f64 / samples as f64);
                let v = self.level_set.value(x);
                let s = v > 0.0;
                if v == 0.0 || sign.is_some_and(|p| p != s) {
                    return Err(Error::InvalidArgument(format!(
                        "case {}: the interface touches the domain boundary",
                        self.name
                    )));
                }
                sign = Some(s);
            }
        }
        Ok(())
    }
}

impl ProblemData for ManufacturedCase {
    fn kappa(&self) -> [f64; 2] {
        self.kappa
    }

    fn source(&self, side: Side, x: Point) -> f64 {
        -self.kappa[side.index()] * self.laplacian(side, x)
    }

    fn jump(&self, x: Point) -> f64 {
        self.u(Side::One, x) - self.u(Side::Two, x)
    }

    fn flux_jump(&self, x: Point, normal: Point) -> f64 {
        (self.grad(Side::One, x) * self.kappa[0] - self.grad(Side::Two, x) * self.kappa[1]).dot(&normal)
    }

    fn dirichlet(&self, side: Side, x: Point) -> f64 {
        self.u(side, x)
    }
}

/// `u^i = |x - c|^p / kappa_i` around a circle of radius `r0`: continuous
/// flux, jump `r0^p (1/kappa1 - 1/kappa2)`.
pub fn radial_circle(center: Point, r0: f64, kappa: [f64; 2], p: i32) -> Result<ManufacturedCase> {
    if p < 2 || p % 2 != 0 {
        return Err(Error::InvalidArgument(format!("radial_circle needs an even power >= 2, got {p}")));
    }
    let side = |k: f64| {
        Field::new(
            move |x| (x - center).norm_squared().powi(p / 2) / k,
            move |x| {
                let d = x - center;
                d * (p as f64 * d.norm_squared().powi(p / 2 - 1) / k)
            },
            move |x| (p * p) as f64 * (x - center).norm_squared().powi(p / 2 - 1) / k,
        )
    };
    Ok(ManufacturedCase {
        name: "radial_circle".into(),
        kappa,
        level_set: LevelSet::circle(center.x, center.y, r0)?,
        fields: [side(kappa[0]), side(kappa[1])],
    })
}

/// `u = sin(pi x) sin(pi y)` on both sides, equal coefficients.
pub fn smooth_nojump(center: Point, r0: f64, kappa: f64) -> Result<ManufacturedCase> {
    use std::f64::consts::PI;
    let field = || {
        Field::new(
            |x: Point| (PI * x.x).sin() * (PI * x.y).sin(),
            |x: Point| Point::new(PI * (PI * x.x).cos() * (PI * x.y).sin(), PI * (PI * x.x).sin() * (PI * x.y).cos()),
            |x: Point| -2.0 * PI * PI * (PI * x.x).sin() * (PI * x.y).sin(),
        )
    };
    Ok(ManufacturedCase {
        name: "smooth_nojump".into(),
        kappa: [kappa, kappa],
        level_set: LevelSet::circle(center.x, center.y, r0)?,
        fields: [field(), field()],
    })
}

/// `u = x` on both sides, equal coefficients.
pub fn smooth_linear(center: Point, r0: f64, kappa: f64) -> Result<ManufacturedCase> {
    let field = || Field::new(|x: Point| x.x, |_| Point::new(1.0, 0.0), |_| 0.0);
    Ok(ManufacturedCase {
        name: "smooth_linear".into(),
        kappa: [kappa, kappa],
        level_set: LevelSet::circle(center.x, center.y, r0)?,
        fields: [field(), field()],
    })
}

/// Line `n . x = d` with `n = (cos a, sin a)`, side 1 on `n . x < d`;
/// `u^1 = a1 s + g_D`, `u^2 = a2 s` in the signed distance `s`, with the
/// slopes chosen so that `kappa1 a1 - kappa2 a2 = g_N`.
pub fn planar_kink(angle: f64, offset: f64, kappa: [f64; 2], jump: f64, flux_jump: f64) -> Result<ManufacturedCase> {
    let n = Point::new(angle.cos(), angle.sin());
    let a2 = 1.0;
    let a1 = (flux_jump + kappa[1] * a2) / kappa[0];
    let field = |slope: f64, shift: f64| {
        Field::new(move |x: Point| slope * (n.dot(&x) - offset) + shift, move |_| n * slope, |_| 0.0)
    };
    Ok(ManufacturedCase {
        name: "planar_kink".into(),
        kappa,
        level_set: LevelSet::line(n.x, n.y, -offset)?,
        fields: [field(a1, jump), field(a2, 0.0)],
    })
}

/// A fixed polynomial of total degree `degree` on both sides, equal
/// coefficients, circle interface.
pub fn polynomial(degree: usize, center: Point, r0: f64, kappa: f64) -> Result<ManufacturedCase> {
    let mut terms: Vec<(i32, i32, f64)> = Vec::new();
    for d in 0..=degree as i32 {
        for j in 0..=d {
            let i = d - j;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            terms.push((i, j, sign / (1.0 + i as f64 + 2.0 * j as f64)));
        }
    }
    let terms = Arc::new(terms);
    let field = || {
        let (t1, t2, t3) = (terms.clone(), terms.clone(), terms.clone());
        Field::new(
            move |x: Point| t1.iter().map(|&(i, j, c)| c * x.x.powi(i) * x.y.powi(j)).sum(),
            move |x: Point| {
                t2.iter().fold(Point::zeros(), |g, &(i, j, c)| {
                    let dx = if i > 0 { c * i as f64 * x.x.powi(i - 1) * x.y.powi(j) } else { 0.0 };
                    let dy = if j > 0 { c * j as f64 * x.x.powi(i) * x.y.powi(j - 1) } else { 0.0 };
                    g + Point::new(dx, dy)
                })
            },
            move |x: Point| {
                t3.iter()
                    .map(|&(i, j, c)| {
                        let xx = if i > 1 { c * (i * (i - 1)) as f64 * x.x.powi(i - 2) * x.y.powi(j) } else { 0.0 };
                        let yy = if j > 1 { c * (j * (j - 1)) as f64 * x.x.powi(i) * x.y.powi(j - 2) } else { 0.0 };
                        xx + yy
                    })
                    .sum()
            },
        )
    };
    Ok(ManufacturedCase {
        name: "polynomial".into(),
        kappa: [kappa, kappa],
        level_set: LevelSet::circle(center.x, center.y, r0)?,
        fields: [field(), field()],
    })
}

/// Builds a named case, normalizes `kappa1 <= kappa2` and rejects
/// interfaces touching the boundary of `params.domain`.
pub fn make_case(name: &str, params: &CaseParams) -> Result<ManufacturedCase> {
    let c = params.center;
    let case = match name {
        "radial_circle" => radial_circle(c, params.radius, params.kappa, params.power)?,
        "smooth_nojump" => smooth_nojump(c, params.radius, params.kappa[0])?,
        "smooth_linear" => smooth_linear(c, params.radius, params.kappa[0])?,
        "planar_kink" => planar_kink(params.angle, params.offset, params.kappa, params.jump, params.flux_jump)?,
        "polynomial" => polynomial(params.degree, c, params.radius, params.kappa[0])?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown case '{other}', expected one of {}",
                CASE_NAMES.join(", ")
            )))
        }
    };
    if params.kappa.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::InvalidArgument("diffusion coefficients must be positive".into()));
    }
    case.check_domain(&params.domain)?;
    Ok(case.normalized())
}
