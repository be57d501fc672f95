//! Interface representation, cut classification, sub-cells, quadrature and
//! resolution diagnostics.

pub mod cell;
pub mod cut;
pub mod diagnostics;
pub mod interface;
pub mod levelset;
pub mod polygon;
pub mod quadrature;

pub use cell::{CellGeometry, InterfaceRule, SideRegion, SubFace};
pub use cut::{
    build_subcells, classify_cells, default_n_sub, CellTag, Classification, CutCell, CutTopology, EdgeLabel, FaceCut,
    SubPolygon,
};
pub use diagnostics::{check_assumption_ball, check_assumption_gamma, check_resolution, BallCheck, GammaCheck};
pub use interface::{curved_subcell_quadrature, interface_quadrature};
pub use levelset::LevelSet;
pub use quadrature::QuadratureRule;

use crate::Result;

/// Gauss rule on the polygonal sub-cell of `side` (the whole cell when uncut).
pub fn subcell_quadrature(cell: &CellGeometry, side: crate::Side, order: usize) -> Result<QuadratureRule> {
    match cell.side(side) {
        Some(region) => region.rule(order),
        None => Ok(QuadratureRule::default()),
    }
}
