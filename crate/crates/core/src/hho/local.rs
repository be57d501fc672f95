use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{EtaMode, LocalDofLayout, ProblemData, ETA_SAFETY};
use crate::approx::{self, dim_p, CellBasis, FaceBasis};
use crate::geometry::{CellGeometry, InterfaceRule, QuadratureRule, SubFace};
use crate::{Error, Result, Side};

/// A sub-face with its basis and Gauss rule.
#[derive(Debug, Clone)]
pub struct FaceData {
    pub sub: SubFace,
    pub basis: FaceBasis,
    pub rule: QuadratureRule,
}

/// Face basis oriented from the lexicographically smaller endpoint, so that
/// both cells sharing a face see the same basis.
pub fn canonical_face_basis(k: usize, sub: &SubFace) -> FaceBasis {
    let key = |p: crate::Point| (p.x, p.y);
    if key(sub.a) <= key(sub.b) {
        FaceBasis::new(k, sub.a, sub.b)
    } else {
        FaceBasis::new(k, sub.b, sub.a)
    }
}

/// One side of a cell: orthonormal `P^{k+1}` basis, volume rule, sub-faces.
#[derive(Debug, Clone)]
pub struct SideData {
    pub side: Side,
    pub basis: CellBasis,
    pub volume: QuadratureRule,
    pub faces: Vec<FaceData>,
}

/// Bases and quadrature of one computational cell.
#[derive(Debug, Clone)]
pub struct CellData {
    pub id: usize,
    pub k: usize,
    pub h: f64,
    pub sides: Vec<SideData>,
    /// Gauss rule on the interface polyline (empty for uncut cells).
    pub interface: InterfaceRule,
}

impl CellData {
    /// Builds bases and rules of degree `2k + 4` on every (sub-)cell, sub-face
    /// and interface segment.
    pub fn new(geom: &CellGeometry, id: usize, k: usize) -> Result<Self> {
        let order = 2 * k + 4;
        let mut sides = Vec::with_capacity(geom.sides.len());
        for region in &geom.sides {
            let volume = region.rule(order)?;
            let basis = CellBasis::new(k + 1, region.centroid(), geom.h, &volume, id)?;
            let faces = region
                .faces
                .iter()
                .map(|&sub| FaceData { sub, basis: canonical_face_basis(k, &sub), rule: sub.rule(order) })
                .collect();
            sides.push(SideData { side: region.side, basis, volume, faces });
        }
        let interface = if geom.is_cut() { geom.interface_rule(order) } else { InterfaceRule::default() };
        Ok(CellData { id, k, h: geom.h, sides, interface })
    }

    pub fn is_cut(&self) -> bool {
        !self.interface.rule.is_empty() && self.sides.len() == 2
    }

    pub fn layout(&self) -> LocalDofLayout {
        LocalDofLayout {
            cell_dim: dim_p(self.k + 1),
            face_dim: self.k + 1,
            sides: self.sides.iter().map(|s| s.side).collect(),
            faces: self.sides.iter().flat_map(|s| s.faces.iter().map(|f| (f.sub.face, f.sub.side))).collect(),
        }
    }

    pub fn side(&self, side: Side) -> Option<&SideData> {
        self.sides.iter().find(|s| s.side == side)
    }

    /// Interface vectors at `x`: `jump[a]` is the coefficient of `[V]` and
    /// `flux[a]` of `kappa1 grad v1 . n`, both over the cell blocks.
    fn interface_vectors(&self, x: crate::Point, n: crate::Point, kappa1: f64) -> (DVector<f64>, DVector<f64>) {
        let nc = dim_p(self.k + 1);
        let mut jump = DVector::zeros(self.sides.len() * nc);
        let mut flux = DVector::zeros(self.sides.len() * nc);
        for (b, s) in self.sides.iter().enumerate() {
            let v = s.basis.eval(x);
            match s.side {
                Side::One => {
                    jump.rows_mut(b * nc, nc).copy_from(&v);
                    flux.rows_mut(b * nc, nc).copy_from(&(s.basis.normal_grad(x, n) * kappa1));
                }
                Side::Two => jump.rows_mut(b * nc, nc).copy_from(&(-v)),
            }
        }
        (jump, flux)
    }
}

/// Everything one cell contributes to the global problem.
#[derive(Debug, Clone)]
pub struct LocalOperatorSet {
    pub layout: LocalDofLayout,
    /// Maps local dofs to the `P^{k+1}` coefficients of every side.
    pub reconstruction: DMatrix<f64>,
    /// Volume form (uncut) or Nitsche form (cut) on the cell blocks.
    pub nitsche: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
    /// `R^T N R + S`.
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Penalty used on cut cells.
    pub eta: Option<f64>,
}

fn side_kappa(kappa: [f64; 2], side: Side) -> f64 {
    kappa[side.index()]
}

/// Largest eigenvalue of `h int_Gamma phi_a phi_b` over the orthonormal
/// `P^k(T^1)` basis; the returned penalty is `4 * 1.1 * lambda_max`.
pub fn calibrate_eta(data: &CellData) -> Result<f64> {
    let s1 = data.side(Side::One).ok_or_else(|| Error::InvalidArgument(format!("cell {} has no side 1", data.id)))?;
    let nk = dim_p(data.k);
    let mut g = DMatrix::zeros(nk, nk);
    for (x, w, _) in data.interface.iter() {
        let v = s1.basis.eval(x).rows(0, nk).into_owned();
        g.syger(w * data.h, &v, &v, 1.0);
    }
    g.fill_upper_triangle_with_lower_triangle();
    let eig = SymmetricEigen::try_new(g, f64::EPSILON, 1000)
        .ok_or_else(|| Error::InvalidArgument(format!("eigen-solve failed on cell {}", data.id)))?;
    let lambda = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    Ok(4.0 * ETA_SAFETY * lambda)
}

/// Matrix of `n_T` (uncut: of the volume form) on the cell blocks.
pub fn nitsche_matrix(data: &CellData, kappa: [f64; 2], eta: f64) -> DMatrix<f64> {
    let nc = dim_p(data.k + 1);
    let n = data.sides.len() * nc;
    let mut m = DMatrix::zeros(n, n);
    for (b, s) in data.sides.iter().enumerate() {
        let kap = side_kappa(kappa, s.side);
        let mut block = DMatrix::zeros(nc, nc);
        for (x, w) in s.volume.iter() {
            let (gx, gy) = s.basis.grad(x);
            block.syger(w * kap, &gx, &gx, 1.0);
            block.syger(w * kap, &gy, &gy, 1.0);
        }
        block.fill_upper_triangle_with_lower_triangle();
        m.view_mut((b * nc, b * nc), (nc, nc)).copy_from(&block);
    }
    if data.is_cut() {
        let pen = eta * kappa[0] / data.h;
        for (x, w, nrm) in data.interface.iter() {
            let (j, g) = data.interface_vectors(x, nrm, kappa[0]);
            m.ger(-w, &g, &j, 1.0);
            m.ger(-w, &j, &g, 1.0);
            m.ger(w * pen, &j, &j, 1.0);
        }
    }
    m
}

/// Matrix of the seminorm `sum_i kappa_i |v_i|_1^2 + eta kappa1/h |[V]|^2`.
pub fn interface_seminorm(data: &CellData, kappa: [f64; 2], eta: f64) -> DMatrix<f64> {
    let mut m = nitsche_matrix(data, kappa, 0.0);
    if data.is_cut() {
        // remove the consistency terms added with eta = 0
        for (x, w, nrm) in data.interface.iter() {
            let (j, g) = data.interface_vectors(x, nrm, kappa[0]);
            m.ger(w, &g, &j, 1.0);
            m.ger(w, &j, &g, 1.0);
            m.ger(w * eta * kappa[0] / data.h, &j, &j, 1.0);
        }
    }
    m
}

/// Errors with [`Error::NotCoercive`] unless `N - seminorm / 2` is positive
/// semidefinite up to `1e-12` relative slack.
pub fn check_coercivity(nitsche: &DMatrix<f64>, seminorm: &DMatrix<f64>, cell: usize) -> Result<()> {
    let d = nitsche - seminorm * 0.5;
    let scale = seminorm.amax().max(f64::MIN_POSITIVE);
    let eig = SymmetricEigen::new(d).eigenvalues;
    if eig.iter().all(|&l| l >= -1e-12 * scale) {
        Ok(())
    } else {
        Err(Error::NotCoercive { cell })
    }
}

/// Reconstruction matrix from the bordered system
/// `[N m; m^T 0] [R; lambda] = [B; m^T E]`, where `B` is the right-hand
/// side of the reconstruction problem and `m` the mean functional.
pub fn reconstruct(data: &CellData, kappa: [f64; 2], nitsche: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let layout = data.layout();
    let nc = layout.cell_dim;
    let ncell = layout.num_cell_dofs();
    let ndof = layout.total();
    let mut b = DMatrix::zeros(ncell, ndof);
    b.view_mut((0, 0), (ncell, ncell)).copy_from(nitsche);
    let mut mean = DVector::zeros(ncell);
    let mut fb = 0;
    for (blk, s) in data.sides.iter().enumerate() {
        let kap = side_kappa(kappa, s.side);
        let o = blk * nc;
        for (x, w) in s.volume.iter() {
            mean.rows_mut(o, nc).axpy(w, &s.basis.eval(x), 1.0);
        }
        for f in &s.faces {
            let n = f.sub.normal();
            let gc = approx::normal_cell_trace_matrix(&s.basis, n, &s.basis, &f.rule);
            let gf = approx::normal_trace_matrix(&s.basis, n, &f.basis, &f.rule);
            let mut cc = b.view_mut((o, o), (nc, nc));
            cc -= gc * kap;
            let fo = layout.face_offset(fb);
            b.view_mut((o, fo), (nc, layout.face_dim)).copy_from(&(gf * kap));
            fb += 1;
        }
    }
    let mut big = DMatrix::zeros(ncell + 1, ncell + 1);
    big.view_mut((0, 0), (ncell, ncell)).copy_from(nitsche);
    big.view_mut((0, ncell), (ncell, 1)).copy_from(&mean);
    big.view_mut((ncell, 0), (1, ncell)).copy_from(&mean.transpose());
    let mut rhs = DMatrix::zeros(ncell + 1, ndof);
    rhs.view_mut((0, 0), (ncell, ndof)).copy_from(&b);
    rhs.view_mut((ncell, 0), (1, ncell)).copy_from(&mean.transpose());
    let lu = big.clone().full_piv_lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::LocalFactorization { cell: data.id, reason: "singular reconstruction system".into() })?;
    let resid = (&big * &sol - &rhs).amax();
    if !(resid <= 1e-9 * (rhs.amax() + big.amax() * sol.amax())) {
        return Err(Error::LocalFactorization {
            cell: data.id,
            reason: format!("reconstruction residual {resid:.3e}"),
        });
    }
    Ok(sol.rows(0, ncell).into_owned())
}

/// `S = sum_i kappa_i / h sum_F D_F^T D_F` with `D_F = [Pi_F on the cell
/// block, -I on the face block]`.
pub fn stabilize(data: &CellData, kappa: [f64; 2]) -> DMatrix<f64> {
    let layout = data.layout();
    let ndof = layout.total();
    let (nc, nk) = (layout.cell_dim, layout.face_dim);
    let mut s = DMatrix::zeros(ndof, ndof);
    let mut fb = 0;
    for (blk, sd) in data.sides.iter().enumerate() {
        let weight = side_kappa(kappa, sd.side) / data.h;
        for f in &sd.faces {
            let mut d = DMatrix::zeros(nk, ndof);
            d.view_mut((0, blk * nc), (nk, nc)).copy_from(&approx::trace_matrix(&sd.basis, &f.basis, &f.rule));
            d.view_mut((0, layout.face_offset(fb)), (nk, nk)).fill_with_identity();
            d.view_mut((0, layout.face_offset(fb)), (nk, nk)).neg_mut();
            s += d.tr_mul(&d) * weight;
            fb += 1;
        }
    }
    s
}

/// Local load vector: volume sources on each side plus, on cut cells,
/// `int_Gamma g_N w2 + g_D (-kappa1 grad w1 . n + eta kappa1 / h [W])`.
pub fn local_rhs(data: &CellData, problem: &dyn ProblemData, eta: f64) -> DVector<f64> {
    let layout = data.layout();
    let nc = layout.cell_dim;
    let mut r = DVector::zeros(layout.total());
    for (blk, s) in data.sides.iter().enumerate() {
        let mut seg = r.rows_mut(blk * nc, nc);
        for (x, w) in s.volume.iter() {
            seg.axpy(w * problem.source(s.side, x), &s.basis.eval(x), 1.0);
        }
    }
    if data.is_cut() {
        let kappa = problem.kappa();
        let pen = eta * kappa[0] / data.h;
        let two = layout.side_block(Side::Two).expect("cut cell has side 2") * nc;
        let s2 = data.side(Side::Two).expect("cut cell has side 2");
        for (x, w, n) in data.interface.iter() {
            let (j, g) = data.interface_vectors(x, n, kappa[0]);
            let gd = problem.jump(x);
            let mut cells = r.rows_mut(0, layout.num_cell_dofs());
            cells.axpy(w * gd, &(j * pen - g), 1.0);
            r.rows_mut(two, nc).axpy(w * problem.flux_jump(x, n), &s2.basis.eval(x), 1.0);
        }
    }
    r
}

/// Builds all local operators of one cell.
pub fn local_system(
    geom: &CellGeometry,
    id: usize,
    k: usize,
    problem: &dyn ProblemData,
    eta: EtaMode,
) -> Result<(CellData, LocalOperatorSet)> {
    let data = CellData::new(geom, id, k)?;
    let kappa = problem.kappa();
    let eta = if data.is_cut() {
        Some(match eta {
            EtaMode::Auto => calibrate_eta(&data)?,
            EtaMode::Fixed(v) => v,
        })
    } else {
        None
    };
    let e = eta.unwrap_or(0.0);
    let nitsche = nitsche_matrix(&data, kappa, e);
    if data.is_cut() {
        check_coercivity(&nitsche, &interface_seminorm(&data, kappa, e), id)?;
    }
    let reconstruction = reconstruct(&data, kappa, &nitsche)?;
    let stabilization = stabilize(&data, kappa);
    let mut matrix = reconstruction.tr_mul(&(&nitsche * &reconstruction)) + &stabilization;
    let sym = (&matrix + matrix.transpose()) * 0.5;
    matrix = sym;
    let rhs = local_rhs(&data, problem, e);
    let layout = data.layout();
    Ok((data, LocalOperatorSet { layout, reconstruction, nitsche, stabilization, matrix, rhs, eta }))
}
