use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::LocalOperatorSet;
use crate::{Error, Result};

/// Static condensation of one cell: Schur complement on the face dofs and
/// the data needed to recover the cell dofs.
#[derive(Debug, Clone)]
pub struct Condensed {
    /// `A_ff - A_fc A_cc^{-1} A_cf`.
    pub matrix: DMatrix<f64>,
    /// `b_f - A_fc A_cc^{-1} b_c`.
    pub rhs: DVector<f64>,
    cell_factor: Cholesky<f64, Dyn>,
    coupling: DMatrix<f64>,
    cell_rhs: DVector<f64>,
}

/// Relative pivot threshold of the dense local factorizations.
pub const LOCAL_PIVOT_THRESHOLD: f64 = 1e-14;

pub fn condense(ops: &LocalOperatorSet, cell: usize) -> Result<Condensed> {
    let nc = ops.layout.num_cell_dofs();
    let nf = ops.layout.num_face_dofs();
    let a = &ops.matrix;
    let acc = a.view((0, 0), (nc, nc)).into_owned();
    let acf = a.view((0, nc), (nc, nf)).into_owned();
    let aff = a.view((nc, nc), (nf, nf)).into_owned();
    let diag_max = acc.diagonal().amax();
    let factor = acc
        .cholesky()
        .ok_or_else(|| Error::LocalFactorization { cell, reason: "cell block not positive definite".into() })?;
    let l = factor.l_dirty();
    let pivot = (0..nc).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if pivot < LOCAL_PIVOT_THRESHOLD * diag_max {
        return Err(Error::LocalFactorization { cell, reason: format!("pivot {pivot:.3e} below threshold") });
    }
    let x = factor.solve(&acf);
    let mut matrix = aff - acf.tr_mul(&x);
    matrix = (&matrix + matrix.transpose()) * 0.5;
    let bc = ops.rhs.rows(0, nc).into_owned();
    let y = factor.solve(&bc);
    let rhs = ops.rhs.rows(nc, nf) - acf.tr_mul(&y);
    Ok(Condensed { matrix, rhs, cell_factor: factor, coupling: acf, cell_rhs: bc })
}

impl Condensed {
    /// Cell dofs minimizing the local energy for the given face dofs.
    pub fn recover(&self, faces: &DVector<f64>) -> DVector<f64> {
        self.cell_factor.solve(&(&self.cell_rhs - &self.coupling * faces))
    }

    /// Cell then face dofs.
    pub fn full(&self, faces: &DVector<f64>) -> DVector<f64> {
        let c = self.recover(faces);
        let mut v = DVector::zeros(c.len() + faces.len());
        v.rows_mut(0, c.len()).copy_from(&c);
        v.rows_mut(c.len(), faces.len()).copy_from(faces);
        v
    }
}
