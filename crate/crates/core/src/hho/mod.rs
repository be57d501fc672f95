//! Cell-local HHO operators on uncut and cut cells: reconstruction,
//! stabilization, Nitsche coupling, local systems and static condensation.
//!
//! Uncut cells are treated as the one-sided case of the cut-cell algebra:
//! a cell carries one block of `P^{k+1}` coefficients per side present and
//! one block of `P^k` coefficients per (sub-)face.

mod condense;
mod local;

pub use condense::{condense, Condensed};
pub use local::{
    calibrate_eta, canonical_face_basis, check_coercivity, interface_seminorm, local_rhs, local_system, nitsche_matrix,
    reconstruct, stabilize, CellData, FaceData, LocalOperatorSet, SideData,
};

use crate::{Point, Side};

/// Data of the interface problem. `normal` points from side 1 into side 2.
pub trait ProblemData: Sync {
    /// Diffusion coefficients `[kappa1, kappa2]`.
    fn kappa(&self) -> [f64; 2];
    fn source(&self, side: Side, x: Point) -> f64;
    /// `g_D`, the prescribed value of `u1 - u2`.
    fn jump(&self, x: Point) -> f64;
    /// `g_N`, the prescribed value of `(kappa1 grad u1 - kappa2 grad u2) . n`.
    fn flux_jump(&self, x: Point, normal: Point) -> f64;
    /// Dirichlet value on the outer boundary.
    fn dirichlet(&self, side: Side, x: Point) -> f64;
}

/// Nitsche penalty selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaMode {
    /// Per-cell value from the discrete trace inequality.
    Auto,
    Fixed(f64),
}

/// Safety factor applied to `4 c_dtr^2`.
pub const ETA_SAFETY: f64 = 1.1;

/// Block structure of the local unknowns: one cell block per side present,
/// followed by one face block per sub-face, side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDofLayout {
    pub cell_dim: usize,
    pub face_dim: usize,
    pub sides: Vec<Side>,
    /// `(mesh face, side)` per face block.
    pub faces: Vec<(usize, Side)>,
}

impl LocalDofLayout {
    pub fn num_cell_dofs(&self) -> usize {
        self.sides.len() * self.cell_dim
    }

    pub fn num_face_dofs(&self) -> usize {
        self.faces.len() * self.face_dim
    }

    pub fn total(&self) -> usize {
        self.num_cell_dofs() + self.num_face_dofs()
    }

    pub fn cell_offset(&self, block: usize) -> usize {
        block * self.cell_dim
    }

    pub fn face_offset(&self, block: usize) -> usize {
        self.num_cell_dofs() + block * self.face_dim
    }

    pub fn side_block(&self, side: Side) -> Option<usize> {
        self.sides.iter().position(|&s| s == side)
    }
}
