//! Unfitted hybrid high-order (HHO) discretization of the 2D elliptic
//! interface problem `-div(kappa grad u) = f` with prescribed solution and
//! flux jumps across a curved interface that cuts the mesh arbitrarily.
//!
//! The crate is organized along the pipeline:
//!
//! * [`mesh`]: polygonal meshes, Cartesian generation, regularity metadata.
//! * [`geometry`]: level sets, cut classification, sub-cells, quadrature and
//!   the interface/cut-cell diagnostics.
//! * [`agglomerate`]: merging of badly cut cells with a neighbor.
//! * [`approx`]: polynomial bases and L2 projections.
//! * [`hho`]: cell-local reconstruction, stabilization, Nitsche coupling,
//!   local systems and static condensation.
//! * [`system`]: global face unknowns, assembly, sparse solve, recovery.
//! * [`verify`]: manufactured solutions, error measures and convergence
//!   studies.
//! * [`pipeline`]: glue from a mesh and a level set to a solved problem.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agglomerate;
pub mod approx;
pub mod error;
pub mod geometry;
pub mod hho;
pub mod mesh;
pub mod pipeline;
pub mod system;
pub mod verify;

pub use error::{Error, Result};

/// Points and vectors in the plane.
pub type Point = nalgebra::Vector2<f64>;

/// Subdomain label. `One` is `{phi < 0}` and carries the smaller diffusion
/// coefficient, `Two` is `{phi > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    One,
    Two,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::One => 0,
            Side::Two => 1,
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::One => Side::Two,
            Side::Two => Side::One,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn of_value(phi: f64) -> Side {
        if phi < 0.0 {
            Side::One
        } else {
            Side::Two
        }
    }
}

pub use agglomerate::{AgglomeratedMesh, CutPartition};
pub use geometry::{CutTopology, LevelSet, QuadratureRule};
pub use mesh::{CellMeta, PolyMesh, Rect};
pub use pipeline::{Discretization, PipelineOptions, Solution};
pub use verify::{ErrorReport, ManufacturedCase};
