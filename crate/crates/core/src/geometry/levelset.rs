//! Level-set description of the interface.

use std::fmt;
use std::sync::Arc;

use crate::{Error, Point, Result};

type ScalarFn = dyn Fn(Point) -> f64 + Send + Sync;
type VectorFn = dyn Fn(Point) -> Point + Send + Sync;

#[derive(Clone)]
enum Shape {
    /// `a x + b y + c`
    Line {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `|x - c| - r`
    Circle {
        center: Point,
        r: f64,
    },
    /// `min(a, b) * (sqrt(((x - cx) / a)^2 + ((y - cy) / b)^2) - 1)`
    Ellipse {
        center: Point,
        a: f64,
        b: f64,
    },
    /// `sum c x^i y^j`
    Polynomial {
        terms: Vec<(i32, i32, f64)>,
    },
    Custom {
        phi: Arc<ScalarFn>,
        grad: Arc<VectorFn>,
        name: String,
    },
}

/// Signed function whose negative part is subdomain 1.
#[derive(Clone)]
pub struct LevelSet {
    shape: Shape,
    sign: f64,
    shift: Point,
    curvature: Option<f64>,
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevelSet({}", self.describe())?;
        if self.sign < 0.0 {
            write!(f, ", negated")?;
        }
        if self.shift != Point::zeros() {
            write!(f, ", shifted by ({}, {})", self.shift.x, self.shift.y)?;
        }
        write!(f, ")")
    }
}

impl LevelSet {
    fn from_shape(shape: Shape, curvature: Option<f64>) -> Self {
        LevelSet { shape, sign: 1.0, shift: Point::zeros(), curvature }
    }

    pub fn line(a: f64, b: f64, c: f64) -> Result<Self> {
        if a == 0.0 && b == 0.0 {
            return Err(Error::InvalidArgument("line(a, b, c) needs (a, b) != 0".into()));
        }
        Ok(Self::from_shape(Shape::Line { a, b, c }, Some(0.0)))
    }

    pub fn circle(cx: f64, cy: f64, r: f64) -> Result<Self> {
        if r <= 0.0 {
            return Err(Error::InvalidArgument(format!("circle radius {r} must be positive")));
        }
        Ok(Self::from_shape(Shape::Circle { center: Point::new(cx, cy), r }, Some(1.0 / r)))
    }

    pub fn ellipse(cx: f64, cy: f64, a: f64, b: f64) -> Result<Self> {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
        }
        let m = a.max(b) / a.min(b).powi(2);
        Ok(Self::from_shape(Shape::Ellipse { center: Point::new(cx, cy), a, b }, Some(m)))
    }

    /// Polynomial `sum c x^i y^j` from `(i, j, c)` terms.
    pub fn polynomial(terms: Vec<(i32, i32, f64)>) -> Result<Self> {
        if terms.iter().any(|&(i, j, _)| i < 0 || j < 0) {
            return Err(Error::InvalidArgument("polynomial exponents must be nonnegative".into()));
        }
        Ok(Self::from_shape(Shape::Polynomial { terms }, None))
    }

    /// Level set from closures; `curvature` is an optional bound on the
    /// curvature of the zero level.
    pub fn custom(
        name: &str,
        phi: impl Fn(Point) -> f64 + Send + Sync + 'static,
        grad: impl Fn(Point) -> Point + Send + Sync + 'static,
        curvature: Option<f64>,
    ) -> Self {
        Self::from_shape(Shape::Custom { phi: Arc::new(phi), grad: Arc::new(grad), name: name.into() }, curvature)
    }

    /// Parses `line(a,b,c)`, `circle(cx,cy,r)`, `ellipse(cx,cy,a,b)` or
    /// `poly(i j c, i j c, ...)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::InvalidArgument(format!("cannot parse level set '{text}'"));
        let open = text.find('(').ok_or_else(bad)?;
        if !text.ends_with(')') {
            return Err(bad());
        }
        let name = text[..open].trim();
        let body = &text[open + 1..text.len() - 1];
        let numbers = |s: &str| -> Result<Vec<f64>> {
            s.split([',', ' '])
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        match name {
            "line" | "circle" | "ellipse" => {
                let v = numbers(body)?;
                match (name, v.as_slice()) {
                    ("line", &[a, b, c]) => Self::line(a, b, c),
                    ("circle", &[cx, cy, r]) => Self::circle(cx, cy, r),
                    ("ellipse", &[cx, cy, a, b]) => Self::ellipse(cx, cy, a, b),
                    _ => Err(bad()),
                }
            }
            "poly" => {
                let mut terms = Vec::new();
                for term in body.split(',') {
                    let v: Vec<&str> = term.split_whitespace().collect();
                    if v.len() != 3 {
                        return Err(bad());
                    }
                    let i = v[0].parse::<i32>().map_err(|_| bad())?;
                    let j = v[1].parse::<i32>().map_err(|_| bad())?;
                    let c = v[2].parse::<f64>().map_err(|_| bad())?;
                    terms.push((i, j, c));
                }
                Self::polynomial(terms)
            }
            _ => Err(bad()),
        }
    }

    pub fn describe(&self) -> String {
        match &self.shape {
            Shape::Line { a, b, c } => format!("line({a},{b},{c})"),
            Shape::Circle { center, r } => format!("circle({},{},{r})", center.x, center.y),
            Shape::Ellipse { center, a, b } => format!("ellipse({},{},{a},{b})", center.x, center.y),
            Shape::Polynomial { terms } => {
                let t: Vec<String> = terms.iter().map(|(i, j, c)| format!("{i} {j} {c}")).collect();
                format!("poly({})", t.join(", "))
            }
            Shape::Custom { name, .. } => name.clone(),
        }
    }

    /// Same zero level with the two subdomains exchanged.
    pub fn negated(&self) -> Self {
        LevelSet { sign: -self.sign, ..self.clone() }
    }

    /// Zero level translated by `offset`.
    pub fn translated(&self, offset: Point) -> Self {
        LevelSet { shift: self.shift + offset, ..self.clone() }
    }

    /// Bound on the curvature of the zero level, when known.
    pub fn curvature_bound(&self) -> Option<f64> {
        self.curvature
    }

    pub fn value(&self, x: Point) -> f64 {
        let x = x - self.shift;
        let v = match &self.shape {
            Shape::Line { a, b, c } => a * x.x + b * x.y + c,
            Shape::Circle { center, r } => (x - center).norm() - r,
            Shape::Ellipse { center, a, b } => {
                let d = x - center;
                a.min(*b) * ((d.x / a).powi(2) + (d.y / b).powi(2)).sqrt() - a.min(*b)
            }
            Shape::Polynomial { terms } => terms.iter().map(|&(i, j, c)| c * x.x.powi(i) * x.y.powi(j)).sum(),
            Shape::Custom { phi, .. } => phi(x),
        };
        self.sign * v
    }

    pub fn gradient(&self, x: Point) -> Point {
        let x = x - self.shift;
        let g = match &self.shape {
            Shape::Line { a, b, .. } => Point::new(*a, *b),
            Shape::Circle { center, .. } => {
                let d = x - center;
                let n = d.norm();
                if n > 0.0 {
                    d / n
                } else {
                    Point::zeros()
                }
            }
            Shape::Ellipse { center, a, b } => {
                let d = x - center;
                let s = ((d.x / a).powi(2) + (d.y / b).powi(2)).sqrt();
                if s > 0.0 {
                    Point::new(d.x / (a * a), d.y / (b * b)) * (a.min(*b) / s)
                } else {
                    Point::zeros()
                }
            }
            Shape::Polynomial { terms } => {
                let mut g = Point::zeros();
                for &(i, j, c) in terms {
                    if i > 0 {
                        g.x += c * i as f64 * x.x.powi(i - 1) * x.y.powi(j);
                    }
                    if j > 0 {
                        g.y += c * j as f64 * x.x.powi(i) * x.y.powi(j - 1);
                    }
                }
                g
            }
            Shape::Custom { grad, .. } => grad(x),
        };
        g * self.sign
    }

    /// Unit normal `grad phi / |grad phi|`, pointing from subdomain 1 to 2.
    pub fn normal(&self, x: Point) -> Point {
        let g = self.gradient(x);
        let n = g.norm();
        if n > 0.0 {
            g / n
        } else {
            g
        }
    }
}
