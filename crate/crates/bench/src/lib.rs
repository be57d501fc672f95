//! Fixtures shared by the benchmarks.

use cut_hho::mesh::generate_cartesian;
use cut_hho::verify::cases;
use cut_hho::{Discretization, ManufacturedCase, PipelineOptions, Point, Rect};

/// Circular interface with contrast 100 on `(-1, 1)^2`.
pub fn radial_case() -> ManufacturedCase {
    cases::radial_circle(Point::zeros(), 0.71, [1.0, 100.0], 4).expect("valid case")
}

/// Discretization of [`radial_case`] on an `n x n` grid.
pub fn discretization(n: usize, k: usize) -> Discretization {
    let mesh = generate_cartesian(n, n, Rect::centered(1.0)).expect("valid mesh");
    Discretization::new(mesh, radial_case().level_set, PipelineOptions::with_k(k)).expect("resolved interface")
}

/// Index of the first cut computational cell.
pub fn first_cut_cell(disc: &Discretization) -> usize {
    disc.cells().iter().position(|c| c.is_cut()).expect("cut cell")
}
