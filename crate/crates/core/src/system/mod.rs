//! Global face unknowns, Dirichlet elimination, assembly of the condensed
//! skeleton problem, sparse solve and recovery of the cell unknowns.

pub mod sparse;

use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;

pub use sparse::{rcm_ordering, EnvelopeCholesky, SymmetricCsr};

use crate::geometry::{CellGeometry, CutTopology};
use crate::hho::Condensed;
use crate::mesh::PolyMesh;
use crate::{Error, Result, Side};

/// Residual bound `|A x - b| / |b|` of the skeleton solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Global index of a local face dof.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofIndex {
    Active(usize),
    Dirichlet(usize),
}

/// One `(face, side)` block of `k + 1` face unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceBlock {
    pub face: usize,
    pub side: Side,
    pub eliminated: bool,
    /// First index in the active or the Dirichlet numbering.
    pub offset: usize,
}

/// Face unknowns of the skeleton: one block per face and side present on
/// it, boundary blocks eliminated, faces interior to agglomerates removed.
#[derive(Debug, Clone)]
pub struct GlobalDofMap {
    pub block_dim: usize,
    pub blocks: Vec<FaceBlock>,
    pub num_active: usize,
    pub num_dirichlet: usize,
    /// Per cell, the block id of each local face block.
    pub cell_blocks: Vec<Vec<usize>>,
}

impl GlobalDofMap {
    pub fn indices(&self, cell: usize) -> impl Iterator<Item = DofIndex> + '_ {
        self.cell_blocks[cell].iter().flat_map(move |&b| {
            let blk = self.blocks[b];
            (0..self.block_dim).map(move |t| {
                if blk.eliminated {
                    DofIndex::Dirichlet(blk.offset + t)
                } else {
                    DofIndex::Active(blk.offset + t)
                }
            })
        })
    }
}

/// Numbers the face blocks of `cells` by `(face, side)`. Errors on a cut
/// boundary face or a face seen by an unexpected number of cells.
pub fn build_dof_map(mesh: &PolyMesh, topo: &CutTopology, cells: &[CellGeometry], k: usize) -> Result<GlobalDofMap> {
    let mut seen: BTreeMap<(usize, Side), usize> = BTreeMap::new();
    for cell in cells {
        for region in &cell.sides {
            for f in &region.faces {
                *seen.entry((f.face, f.side)).or_default() += 1;
            }
        }
    }
    for (&(face, side), &count) in &seen {
        let boundary = mesh.is_boundary_face(face);
        if boundary && topo.faces[face].is_split() {
            return Err(Error::CutBoundaryFace { face });
        }
        let expected = if boundary { 1 } else { 2 };
        if count != expected {
            return Err(Error::InvalidMesh(format!(
                "face {face} side {} seen by {count} cells, expected {expected}",
                side.number()
            )));
        }
    }
    let block_dim = k + 1;
    let mut blocks = Vec::with_capacity(seen.len());
    let mut id = BTreeMap::new();
    let (mut na, mut nd) = (0, 0);
    for &(face, side) in seen.keys() {
        let eliminated = mesh.is_boundary_face(face);
        let offset = if eliminated { &mut nd } else { &mut na };
        id.insert((face, side), blocks.len());
        blocks.push(FaceBlock { face, side, eliminated, offset: *offset });
        *offset += block_dim;
    }
    let cell_blocks = cells
        .iter()
        .map(|c| c.sides.iter().flat_map(|r| r.faces.iter().map(|f| id[&(f.face, f.side)])).collect())
        .collect();
    Ok(GlobalDofMap { block_dim, blocks, num_active: na, num_dirichlet: nd, cell_blocks })
}

/// Statistics of the direct solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverStats {
    pub n: usize,
    pub nnz: usize,
    pub envelope: usize,
    pub min_pivot_ratio: f64,
    pub residual: f64,
    pub refinements: usize,
}

/// Assembled skeleton problem over the active face dofs.
#[derive(Debug, Clone)]
pub struct SkeletonSystem {
    pub matrix: SymmetricCsr,
    pub rhs: Vec<f64>,
}

/// Scatter-adds the condensed cell systems; Dirichlet columns move to the
/// right-hand side with the values `dirichlet`.
pub fn assemble(map: &GlobalDofMap, condensed: &[Condensed], dirichlet: &[f64]) -> SkeletonSystem {
    type Part = (Vec<(usize, usize, f64)>, Vec<(usize, f64)>);
    let parts: Vec<Part> = condensed
        .par_iter()
        .enumerate()
        .map(|(c, cond)| {
            let idx: Vec<DofIndex> = map.indices(c).collect();
            let mut trip = Vec::new();
            let mut load = Vec::new();
            for (a, &ia) in idx.iter().enumerate() {
                let DofIndex::Active(i) = ia else { continue };
                let mut r = cond.rhs[a];
                for (b, &ib) in idx.iter().enumerate() {
                    match ib {
                        DofIndex::Active(j) if j <= i => trip.push((i, j, cond.matrix[(a, b)])),
                        DofIndex::Active(_) => {}
                        DofIndex::Dirichlet(j) => r -= cond.matrix[(a, b)] * dirichlet[j],
                    }
                }
                load.push((i, r));
            }
            (trip, load)
        })
        .collect();
    let mut rhs = vec![0.0; map.num_active];
    let mut triplets = Vec::with_capacity(parts.iter().map(|p| p.0.len()).sum());
    for (t, l) in parts {
        triplets.extend(t);
        for (i, v) in l {
            rhs[i] += v;
        }
    }
    SkeletonSystem { matrix: SymmetricCsr::from_triplets(map.num_active, triplets), rhs }
}

fn relative_residual(a: &SymmetricCsr, x: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let ax = a.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    (r, if nb > 0.0 { nr / nb } else { nr })
}

/// Direct solve with up to three steps of iterative refinement; errors if
/// the relative residual stays above [`SOLVE_TOLERANCE`].
pub fn solve(system: &SkeletonSystem) -> Result<(Vec<f64>, SolverStats)> {
    let a = &system.matrix;
    if a.n == 0 {
        return Ok((Vec::new(), SolverStats { min_pivot_ratio: 1.0, ..Default::default() }));
    }
    let factor = EnvelopeCholesky::factor(a)?;
    let mut x = factor.solve(&system.rhs);
    let (mut r, mut res) = relative_residual(a, &x, &system.rhs);
    let mut refinements = 0;
    while res > SOLVE_TOLERANCE * 1e-2 && refinements < 3 {
        let dx = factor.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        refinements += 1;
        (r, res) = relative_residual(a, &x, &system.rhs);
    }
    if !(res <= SOLVE_TOLERANCE) {
        return Err(Error::SolveResidual { residual: res, tolerance: SOLVE_TOLERANCE });
    }
    let stats = SolverStats {
        n: a.n,
        nnz: a.nnz(),
        envelope: factor.envelope_size(),
        min_pivot_ratio: factor.min_pivot_ratio,
        residual: res,
        refinements,
    };
    Ok((x, stats))
}

/// Local face values of cell `c` from the global active and Dirichlet
/// vectors.
pub fn gather(map: &GlobalDofMap, cell: usize, active: &[f64], dirichlet: &[f64]) -> DVector<f64> {
    DVector::from_iterator(
        map.cell_blocks[cell].len() * map.block_dim,
        map.indices(cell).map(|i| match i {
            DofIndex::Active(j) => active[j],
            DofIndex::Dirichlet(j) => dirichlet[j],
        }),
    )
}

/// Full local dof vectors (cell then face dofs) of every cell.
pub fn recover(map: &GlobalDofMap, condensed: &[Condensed], active: &[f64], dirichlet: &[f64]) -> Vec<DVector<f64>> {
    condensed.par_iter().enumerate().map(|(c, cond)| cond.full(&gather(map, c, active, dirichlet))).collect()
}
