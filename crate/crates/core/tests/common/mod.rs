//! Independent dense oracles and random generators shared by the
//! integration tests. Everything here uses raw scaled monomials and dense
//! solves, and only borrows quadrature and geometry from the crate.

#![allow(dead_code)]

use cut_hho::approx::dim_p;
use cut_hho::geometry::cell::segment_normal;
use cut_hho::geometry::quadrature::{polygon_rule, segment_rule};
use cut_hho::geometry::{CellGeometry, LevelSet, QuadratureRule};
use cut_hho::hho::{self, CellData, ProblemData};
use cut_hho::mesh::{generate_cartesian, generate_perturbed, PolyMesh, Rect};
use cut_hho::{Discretization, PipelineOptions, Point, Side};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Monomials `xi^a eta^b` of total degree `<= degree` in an affine frame:
/// `(xi, eta) = (axes^T (x - center)) / scales`.
#[derive(Debug, Clone)]
pub struct Monomials {
    pub center: Point,
    pub axes: [Point; 2],
    pub scales: [f64; 2],
    pub exps: Vec<(i32, i32)>,
}

impl Monomials {
    pub fn isotropic(degree: usize, center: Point, scale: f64) -> Self {
        Self::framed(degree, center, [Point::new(1.0, 0.0), Point::new(0.0, 1.0)], [scale, scale])
    }

    pub fn framed(degree: usize, center: Point, axes: [Point; 2], scales: [f64; 2]) -> Self {
        let mut exps = Vec::new();
        for d in 0..=degree as i32 {
            for b in 0..=d {
                exps.push((d - b, b));
            }
        }
        Monomials { center, axes, scales, exps }
    }

    /// Frame aligned with the principal axes of `points`, scaled by their
    /// extents.
    pub fn principal(degree: usize, points: &[Point]) -> Self {
        let n = points.len() as f64;
        let c = points.iter().fold(Point::zeros(), |a, p| a + p) / n;
        let mut cov = nalgebra::Matrix2::zeros();
        for p in points {
            let d = p - c;
            cov += d * d.transpose();
        }
        let eig = nalgebra::SymmetricEigen::new(cov);
        let axes = [eig.eigenvectors.column(0).into_owned(), eig.eigenvectors.column(1).into_owned()];
        let mut scales = [0.0f64; 2];
        for p in points {
            for (s, ax) in scales.iter_mut().zip(&axes) {
                *s = s.max((p - c).dot(ax).abs());
            }
        }
        Self::framed(degree, c, axes, scales.map(|s| s.max(1e-300)))
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    fn local(&self, x: Point) -> (f64, f64) {
        let d = x - self.center;
        (d.dot(&self.axes[0]) / self.scales[0], d.dot(&self.axes[1]) / self.scales[1])
    }

    pub fn eval(&self, x: Point) -> DVector<f64> {
        let (u, v) = self.local(x);
        DVector::from_iterator(self.dim(), self.exps.iter().map(|&(a, b)| u.powi(a) * v.powi(b)))
    }

    pub fn grad(&self, x: Point) -> Vec<Point> {
        let (u, v) = self.local(x);
        self.exps
            .iter()
            .map(|&(a, b)| {
                let du = if a > 0 { a as f64 * u.powi(a - 1) * v.powi(b) } else { 0.0 } / self.scales[0];
                let dv = if b > 0 { b as f64 * u.powi(a) * v.powi(b - 1) } else { 0.0 } / self.scales[1];
                self.axes[0] * du + self.axes[1] * dv
            })
            .collect()
    }

    pub fn laplacian(&self, x: Point) -> DVector<f64> {
        let (u, v) = self.local(x);
        DVector::from_iterator(
            self.dim(),
            self.exps.iter().map(|&(a, b)| {
                let uu = if a > 1 { (a * (a - 1)) as f64 * u.powi(a - 2) * v.powi(b) } else { 0.0 };
                let vv = if b > 1 { (b * (b - 1)) as f64 * u.powi(a) * v.powi(b - 2) } else { 0.0 };
                uu / self.scales[0].powi(2) + vv / self.scales[1].powi(2)
            }),
        )
    }

    pub fn value(&self, c: &DVector<f64>, x: Point) -> f64 {
        self.eval(x).dot(c)
    }
}

fn side_rule(geom: &CellGeometry, b: usize, degree: usize) -> QuadratureRule {
    let mut rule = QuadratureRule::default();
    for p in &geom.sides[b].polygons {
        rule.append(polygon_rule(&p.vertices, degree).expect("sub-polygon rule"));
    }
    rule
}

fn dot_grad(g: &[Point], n: Point) -> DVector<f64> {
    DVector::from_iterator(g.len(), g.iter().map(|v| v.dot(&n)))
}

/// Reconstruction computed by brute-force Galerkin assembly of
/// `n_T(R, Z) = n_T(V_T, Z) - sum_i int_{(dT)^i} kappa_i grad z^i . n (v_i - v_F)`
/// with `sum_i int R^i = sum_i int v_i`, in monomials on each side.
pub struct OracleReconstruction {
    pub sides: Vec<(Side, Monomials, DVector<f64>)>,
    /// Volume points of each side, for comparisons.
    pub samples: Vec<Vec<Point>>,
}

pub fn dense_reconstruction(
    geom: &CellGeometry,
    data: &CellData,
    kappa: [f64; 2],
    eta: f64,
    v: &DVector<f64>,
) -> OracleReconstruction {
    let k = data.k;
    let degree = 2 * k + 8;
    let nc = dim_p(k + 1);
    let ns = geom.sides.len();
    let h = geom.h;
    let spaces: Vec<Monomials> = geom
        .sides
        .iter()
        .map(|r| {
            let pts: Vec<Point> = r.polygons.iter().flat_map(|p| p.vertices.iter().copied()).collect();
            Monomials::principal(k + 1, &pts)
        })
        .collect();
    let rules: Vec<QuadratureRule> = (0..ns).map(|b| side_rule(geom, b, degree)).collect();
    let vt = |b: usize, x: Point| data.sides[b].basis.eval(x).dot(&v.rows(b * nc, nc));
    let gvt = |b: usize, x: Point| {
        let (gx, gy) = data.sides[b].basis.grad(x);
        let c = v.rows(b * nc, nc);
        Point::new(gx.dot(&c), gy.dot(&c))
    };
    let n = ns * nc;
    let mut mat = DMatrix::zeros(n + 1, n + 1);
    let mut rhs = DVector::zeros(n + 1);
    for b in 0..ns {
        let kap = kappa[geom.sides[b].side.index()];
        let o = b * nc;
        for (x, w) in rules[b].iter() {
            let g = spaces[b].grad(x);
            let gv = gvt(b, x);
            for i in 0..nc {
                for j in 0..nc {
                    mat[(o + i, o + j)] += w * kap * g[i].dot(&g[j]);
                }
                rhs[o + i] += w * kap * g[i].dot(&gv);
            }
            let m = spaces[b].eval(x);
            for i in 0..nc {
                mat[(n, o + i)] += w * m[i];
                mat[(o + i, n)] += w * m[i];
            }
            rhs[n] += w * vt(b, x);
        }
    }
    // face consistency terms
    let mut fb = 0;
    for b in 0..ns {
        let kap = kappa[geom.sides[b].side.index()];
        let o = b * nc;
        for (f, sub) in geom.sides[b].faces.iter().enumerate() {
            let fd = &data.sides[b].faces[f];
            let off = ns * nc + fb * (k + 1);
            let vf = v.rows(off, k + 1).into_owned();
            let nrm = segment_normal(sub.a, sub.b);
            for (x, w) in segment_rule(sub.a, sub.b, degree).iter() {
                let gz = dot_grad(&spaces[b].grad(x), nrm);
                let gap = vt(b, x) - fd.basis.eval(x).dot(&vf);
                rhs.rows_mut(o, nc).axpy(-w * kap * gap, &gz, 1.0);
            }
            fb += 1;
        }
    }
    if geom.is_cut() {
        let s1 = geom.sides.iter().position(|r| r.side == Side::One).unwrap();
        let s2 = geom.sides.iter().position(|r| r.side == Side::Two).unwrap();
        let pen = eta * kappa[0] / h;
        for (a, bpt) in geom.interface_segments() {
            let nrm = segment_normal(a, bpt);
            for (x, w) in segment_rule(a, bpt, degree).iter() {
                let mut jz = DVector::zeros(n);
                jz.rows_mut(s1 * nc, nc).copy_from(&spaces[s1].eval(x));
                jz.rows_mut(s2 * nc, nc).copy_from(&(-spaces[s2].eval(x)));
                let mut fz = DVector::zeros(n);
                fz.rows_mut(s1 * nc, nc).copy_from(&(dot_grad(&spaces[s1].grad(x), nrm) * kappa[0]));
                let jv = vt(s1, x) - vt(s2, x);
                let fv = kappa[0] * gvt(s1, x).dot(&nrm);
                let mut blk = mat.view_mut((0, 0), (n, n));
                blk.ger(-w, &fz, &jz, 1.0);
                blk.ger(-w, &jz, &fz, 1.0);
                blk.ger(w * pen, &jz, &jz, 1.0);
                let mut r = rhs.rows_mut(0, n);
                r.axpy(-w * fv, &jz, 1.0);
                r.axpy(-w * jv, &fz, 1.0);
                r.axpy(w * pen * jv, &jz, 1.0);
            }
        }
    }
    let sol = mat.full_piv_lu().solve(&rhs).expect("oracle bordered system");
    let sides = (0..ns).map(|b| (geom.sides[b].side, spaces[b].clone(), sol.rows(b * nc, nc).into_owned())).collect();
    let samples = rules.iter().map(|r| r.points.clone()).collect();
    OracleReconstruction { sides, samples }
}

/// `max |R_ours - R_oracle| / max |R_oracle|` over the oracle's volume
/// points, for the local dof vector `v`.
pub fn reconstruction_mismatch(
    data: &CellData,
    reconstruction: &DMatrix<f64>,
    oracle: &OracleReconstruction,
    v: &DVector<f64>,
) -> f64 {
    let nc = dim_p(data.k + 1);
    let ours = reconstruction * v;
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for (b, (side, space, coef)) in oracle.sides.iter().enumerate() {
        assert_eq!(data.sides[b].side, *side);
        let c = ours.rows(b * nc, nc).into_owned();
        for &x in &oracle.samples[b] {
            let o = space.value(coef, x);
            let m = data.sides[b].basis.evaluate(&c, x);
            diff = diff.max((o - m).abs());
            scale = scale.max(o.abs());
        }
    }
    diff / scale.max(f64::MIN_POSITIVE)
}

/// A cut computational cell from an admissible random configuration.
#[derive(Debug, Clone)]
pub struct RandomCell {
    pub geom: CellGeometry,
    pub level_set: LevelSet,
    pub k: usize,
    pub kappa: [f64; 2],
}

fn random_level_set(rng: &mut ChaCha8Rng, n: usize) -> LevelSet {
    let h = 2.0 / n as f64;
    match rng.random_range(0..4) {
        0 => {
            let c = Point::new(rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15));
            LevelSet::circle(c.x, c.y, rng.random_range(0.5..0.8)).unwrap()
        }
        1 => {
            let c = Point::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
            LevelSet::ellipse(c.x, c.y, rng.random_range(0.6..0.8), rng.random_range(0.6..0.8)).unwrap()
        }
        2 => {
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            LevelSet::line(a.cos(), a.sin(), rng.random_range(-0.5..0.5)).unwrap()
        }
        _ => {
            // nearly aligned with a grid line, at a tiny distance from it
            let i = rng.random_range(1..n) as f64;
            let eps = 10f64.powf(rng.random_range(-8.0..-2.0)) * h;
            let x = -1.0 + i * h + if rng.random_bool(0.5) { eps } else { -eps };
            let tilt = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(-1e-3..1e-3) };
            let ls = LevelSet::line(1.0, tilt, -x).unwrap();
            if rng.random_bool(0.5) {
                ls.negated()
            } else {
                ls
            }
        }
    }
}

/// `count` cut cells drawn from random admissible configurations: Cartesian
/// or perturbed meshes of `(-1, 1)^2`, circle, ellipse or line interfaces,
/// `k` in `0..=2`, `kappa2 / kappa1` in `[1, 1e6]`. Configurations rejected
/// by the pipeline are skipped.
pub fn random_cut_cells(count: usize, seed: u64) -> Vec<RandomCell> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 50 * count + 100, "too many rejected configurations");
        let n = rng.random_range(5..=8);
        let mesh = if rng.random_bool(0.5) {
            generate_cartesian(n, n, Rect::centered(1.0)).unwrap()
        } else {
            generate_perturbed(n, n, Rect::centered(1.0), 0.15, rng.random()).unwrap()
        };
        let ls = random_level_set(&mut rng, n);
        let k = rng.random_range(0..=2);
        let kappa = [1.0, 10f64.powf(rng.random_range(0.0..6.0))];
        let Ok(disc) = Discretization::new(mesh, ls.clone(), PipelineOptions::with_k(k)) else {
            continue;
        };
        let mut cut: Vec<&CellGeometry> = disc.cells().iter().filter(|c| c.is_cut()).collect();
        // favour merged cells, then sample the rest
        cut.sort_by_key(|c| std::cmp::Reverse(c.parents.len()));
        let merged = cut.iter().take_while(|c| c.parents.len() > 1).count();
        let take = 8.min(cut.len());
        let mut chosen: Vec<usize> = (0..merged.min(take)).collect();
        while chosen.len() < take {
            let i = rng.random_range(0..cut.len());
            if !chosen.contains(&i) {
                chosen.push(i);
            }
        }
        for i in chosen {
            if out.len() == count {
                break;
            }
            out.push(RandomCell { geom: cut[i].clone(), level_set: ls.clone(), k, kappa });
        }
    }
    out
}

/// Problem data with constant coefficients and no sources; only `kappa`
/// matters for operator tests.
pub struct Coefficients(pub [f64; 2]);

impl ProblemData for Coefficients {
    fn kappa(&self) -> [f64; 2] {
        self.0
    }
    fn source(&self, _: Side, _: Point) -> f64 {
        0.0
    }
    fn jump(&self, _: Point) -> f64 {
        0.0
    }
    fn flux_jump(&self, _: Point, _: Point) -> f64 {
        0.0
    }
    fn dirichlet(&self, _: Side, _: Point) -> f64 {
        0.0
    }
}

/// Assembles `a_h` and `l_h` over all cell and face unknowns without
/// condensation, then eliminates the Dirichlet faces and every cell
/// unknown from the dense system. Returns the matrix and right-hand side in
/// the ordering of the active face unknowns.
pub fn whole_system_schur(disc: &Discretization, problem: &dyn ProblemData) -> (DMatrix<f64>, DVector<f64>) {
    let locals = disc.local_systems(problem).unwrap();
    let dofs = &disc.dofs;
    let kd = dofs.block_dim;
    let cell_sizes: Vec<usize> = locals.iter().map(|(_, o)| o.layout.num_cell_dofs()).collect();
    let ncell: usize = cell_sizes.iter().sum();
    let nface = dofs.blocks.len() * kd;
    let n = ncell + nface;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DVector::zeros(n);
    let mut cell_offset = 0;
    for (c, (_, ops)) in locals.iter().enumerate() {
        let nl = ops.layout.total();
        let nc = ops.layout.num_cell_dofs();
        let map: Vec<usize> = (0..nl)
            .map(|l| {
                if l < nc {
                    cell_offset + l
                } else {
                    let j = (l - nc) / kd;
                    ncell + dofs.cell_blocks[c][j] * kd + (l - nc) % kd
                }
            })
            .collect();
        for i in 0..nl {
            b[map[i]] += ops.rhs[i];
            for j in 0..nl {
                a[(map[i], map[j])] += ops.matrix[(i, j)];
            }
        }
        cell_offset += nc;
    }
    let dirichlet = disc.dirichlet_values(problem);
    let mut g = DVector::zeros(n);
    let mut active = vec![usize::MAX; dofs.num_active];
    for (blk, fb) in dofs.blocks.iter().enumerate() {
        for t in 0..kd {
            let gi = ncell + blk * kd + t;
            if fb.eliminated {
                g[gi] = dirichlet[fb.offset + t];
            } else {
                active[fb.offset + t] = gi;
            }
        }
    }
    let b = &b - &a * &g;
    let cells: Vec<usize> = (0..ncell).collect();
    let pick = |rows: &[usize], cols: &[usize]| DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]);
    let acc = pick(&cells, &cells);
    let aca = pick(&cells, &active);
    let aaa = pick(&active, &active);
    let bc = DVector::from_iterator(ncell, cells.iter().map(|&i| b[i]));
    let ba = DVector::from_iterator(active.len(), active.iter().map(|&i| b[i]));
    let inv = acc.try_inverse().expect("cell block invertible");
    let s = &aaa - aca.transpose() * &inv * &aca;
    let r = &ba - aca.transpose() * (&inv * &bc);
    (s, r)
}

/// Classical HHO on an uncut mesh: cell unknowns in `P^{k+1}`, face
/// unknowns in `P^k`, reconstruction from
/// `(kappa grad r, grad z) = -(v_T, kappa lap z) + sum_F (v_F, kappa grad z . n)_F`,
/// stabilization `kappa / h sum_F |Pi^k_F (v_T - v_F)|^2`, Dirichlet faces
/// fixed to the L2 projection of `g`. Dense global solve, no condensation.
pub struct ClassicalSolution {
    pub cells: Vec<(Monomials, DVector<f64>)>,
}

impl ClassicalSolution {
    pub fn value(&self, cell: usize, x: Point) -> f64 {
        let (m, c) = &self.cells[cell];
        m.value(c, x)
    }
}

/// Face monomials `t^j` of the affine parameter `t in [-1, 1]` from `a` to `b`.
fn face_eval(a: Point, b: Point, k: usize, x: Point) -> DVector<f64> {
    let d = b - a;
    let t = 2.0 * (x - a).dot(&d) / d.norm_squared() - 1.0;
    DVector::from_iterator(k + 1, (0..=k as i32).map(|j| t.powi(j)))
}

pub fn classical_hho(
    mesh: &PolyMesh,
    k: usize,
    kappa: f64,
    f: impl Fn(Point) -> f64,
    g: impl Fn(Point) -> f64,
) -> ClassicalSolution {
    let degree = 2 * k + 8;
    let nc = dim_p(k + 1);
    let kd = k + 1;
    let nf = mesh.num_faces();
    let ncell = mesh.num_cells() * nc;
    let n = ncell + nf * kd;
    let mut a = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    let mut spaces = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let poly = mesh.polygon(c);
        let h = mesh.diameter(c);
        let space = Monomials::isotropic(k + 1, mesh.centroid(c), h);
        let vol = polygon_rule(&poly, degree).unwrap();
        let faces = &mesh.cell_faces[c];
        let nl = nc + faces.len() * kd;
        // stiffness and mean
        let mut kmat = DMatrix::zeros(nc, nc);
        let mut mean = DVector::zeros(nc);
        let mut bmat = DMatrix::zeros(nc, nl);
        for (x, w) in vol.iter() {
            let gr = space.grad(x);
            let m = space.eval(x);
            let lap = space.laplacian(x);
            for i in 0..nc {
                for j in 0..nc {
                    kmat[(i, j)] += w * kappa * gr[i].dot(&gr[j]);
                    bmat[(i, j)] -= w * kappa * lap[i] * m[j];
                }
            }
            mean.axpy(w, &m, 1.0);
            rhs.rows_mut(c * nc, nc).axpy(w * f(x), &m, 1.0);
        }
        let mut stab = DMatrix::zeros(nl, nl);
        for (j, &face) in faces.iter().enumerate() {
            let nv = poly.len();
            let (p, q) = (poly[j], poly[(j + 1) % nv]);
            let [fa, fb] = mesh.face_points(face);
            let nrm = segment_normal(p, q);
            let rule = segment_rule(p, q, degree);
            let mut mf = DMatrix::zeros(kd, kd);
            let mut tr = DMatrix::zeros(kd, nc);
            for (x, w) in rule.iter() {
                let psi = face_eval(fa, fb, k, x);
                let dz = dot_grad(&space.grad(x), nrm);
                let m = space.eval(x);
                for i in 0..nc {
                    for t in 0..kd {
                        bmat[(i, nc + j * kd + t)] += w * kappa * dz[i] * psi[t];
                    }
                }
                mf.ger(w, &psi, &psi, 1.0);
                tr.ger(w, &psi, &m, 1.0);
            }
            let proj = mf.clone().lu().solve(&tr).unwrap();
            let mut d = DMatrix::zeros(kd, nl);
            d.view_mut((0, 0), (kd, nc)).copy_from(&proj);
            for t in 0..kd {
                d[(t, nc + j * kd + t)] = -1.0;
            }
            stab += d.transpose() * &mf * &d * (kappa / h);
        }
        let mut bordered = DMatrix::zeros(nc + 1, nc + 1);
        bordered.view_mut((0, 0), (nc, nc)).copy_from(&kmat);
        bordered.view_mut((0, nc), (nc, 1)).copy_from(&mean);
        bordered.view_mut((nc, 0), (1, nc)).copy_from(&mean.transpose());
        let mut brhs = DMatrix::zeros(nc + 1, nl);
        brhs.view_mut((0, 0), (nc, nl)).copy_from(&bmat);
        // mean of v_T: the cell unknowns are monomial coefficients
        brhs.view_mut((nc, 0), (1, nc)).copy_from(&mean.transpose());
        let r = bordered.full_piv_lu().solve(&brhs).unwrap().rows(0, nc).into_owned();
        let local = r.transpose() * &kmat * &r + stab;
        let map: Vec<usize> = (0..nl)
            .map(|l| if l < nc { c * nc + l } else { ncell + faces[(l - nc) / kd] * kd + (l - nc) % kd })
            .collect();
        for i in 0..nl {
            for j in 0..nl {
                a[(map[i], map[j])] += local[(i, j)];
            }
        }
        spaces.push(space);
    }
    // Dirichlet faces
    let mut fixed = vec![false; n];
    let mut values = DVector::zeros(n);
    for face in 0..nf {
        if !mesh.is_boundary_face(face) {
            continue;
        }
        let [fa, fb] = mesh.face_points(face);
        let mut mf = DMatrix::zeros(kd, kd);
        let mut load = DVector::zeros(kd);
        for (x, w) in segment_rule(fa, fb, degree).iter() {
            let psi = face_eval(fa, fb, k, x);
            mf.ger(w, &psi, &psi, 1.0);
            load.axpy(w * g(x), &psi, 1.0);
        }
        let coef = mf.lu().solve(&load).unwrap();
        for t in 0..kd {
            fixed[ncell + face * kd + t] = true;
            values[ncell + face * kd + t] = coef[t];
        }
    }
    let free: Vec<usize> = (0..n).filter(|&i| !fixed[i]).collect();
    let lifted = &rhs - &a * &values;
    let af = DMatrix::from_fn(free.len(), free.len(), |i, j| a[(free[i], free[j])]);
    let bf = DVector::from_iterator(free.len(), free.iter().map(|&i| lifted[i]));
    let x = af.lu().solve(&bf).expect("classical HHO system");
    let mut full = values;
    for (i, &gi) in free.iter().enumerate() {
        full[gi] = x[i];
    }
    let cells = spaces.into_iter().enumerate().map(|(c, s)| (s, full.rows(c * nc, nc).into_owned())).collect();
    ClassicalSolution { cells }
}

/// Smallest eigenvalue of the symmetric matrix `m`.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of the symmetric matrix `m`, ascending.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Local operators of a random cell with its own coefficients.
pub fn local_operators(cell: &RandomCell) -> (CellData, hho::LocalOperatorSet) {
    hho::local_system(&cell.geom, 0, cell.k, &Coefficients(cell.kappa), hho::EtaMode::Auto).unwrap()
}

/// Exact `int_P x^a y^b` over a counter-clockwise polygon by the divergence
/// theorem, `int_P x^a y^b = 1/(a+1) oint x^(a+1) y^b dy`, with each edge
/// integrated by a Gauss rule exact for the edge polynomial.
pub fn polygon_moment(poly: &[Point], a: i32, b: i32) -> f64 {
    let (pts, wts) = cut_hho::geometry::quadrature::gauss_legendre((a + b + 2) as usize / 2 + 2);
    let n = poly.len();
    let mut s = 0.0;
    for j in 0..n {
        let (p, q) = (poly[j], poly[(j + 1) % n]);
        let dy = q.y - p.y;
        for (&t, &w) in pts.iter().zip(&wts) {
            let x = p + (q - p) * (0.5 * (t + 1.0));
            s += 0.5 * w * x.x.powi(a + 1) * x.y.powi(b) * dy;
        }
    }
    s / (a + 1) as f64
}

/// Matrix of `|V|^2 = sum_i kappa_i |grad v_i|^2 + eta kappa1 / h |[V]|^2`
/// on the cell blocks, assembled with `2k + 8` rules.
pub fn nitsche_seminorm(geom: &CellGeometry, data: &CellData, kappa: [f64; 2], eta: f64) -> DMatrix<f64> {
    let degree = 2 * data.k + 8;
    let nc = dim_p(data.k + 1);
    let ns = geom.sides.len();
    let mut m = DMatrix::zeros(ns * nc, ns * nc);
    for b in 0..ns {
        let kap = kappa[geom.sides[b].side.index()];
        for (x, w) in side_rule(geom, b, degree).iter() {
            let (gx, gy) = data.sides[b].basis.grad(x);
            let mut blk = m.view_mut((b * nc, b * nc), (nc, nc));
            blk.ger(w * kap, &gx, &gx, 1.0);
            blk.ger(w * kap, &gy, &gy, 1.0);
        }
    }
    if geom.is_cut() {
        let pen = eta * kappa[0] / geom.h;
        for (a, b) in geom.interface_segments() {
            for (x, w) in segment_rule(a, b, degree).iter() {
                let mut j = DVector::zeros(ns * nc);
                for (s, sd) in data.sides.iter().enumerate() {
                    let sign = if sd.side == Side::One { 1.0 } else { -1.0 };
                    j.rows_mut(s * nc, nc).copy_from(&(sd.basis.eval(x) * sign));
                }
                m.ger(w * pen, &j, &j, 1.0);
            }
        }
    }
    m
}

/// Smallest `lambda` with `a >= lambda b` on the complement of the kernel of
/// `b`; `b` is symmetric positive semidefinite.
pub fn generalized_min(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(b.clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cols: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-12 * top)
        .map(|(i, &l)| eig.eigenvectors.column(i) / l.sqrt())
        .collect();
    let w = DMatrix::from_columns(&cols);
    min_eigenvalue(&(w.transpose() * a * &w))
}
