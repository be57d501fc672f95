//! From a mesh and a level set to a solved problem: cut topology,
//! agglomeration, diagnostics, local operators, condensation, global solve
//! and recovery.

use nalgebra::{DVector, DVectorView};
use rayon::prelude::*;

use crate::agglomerate::{self, AgglomeratedMesh, CutPartition, NeighborSelection};
use crate::approx;
use crate::geometry::{self, default_n_sub, CellGeometry, CutTopology, LevelSet};
use crate::hho::{self, canonical_face_basis, CellData, Condensed, EtaMode, LocalOperatorSet, ProblemData};
use crate::mesh::{compute_meta, estimate_rho, CellMeta, PolyMesh};
use crate::system::{self, GlobalDofMap, SolverStats};
use crate::{Error, Point, Result, Side};

/// Default threshold of the interface-resolution diagnostic.
pub const DEFAULT_MIN_GAMMA: f64 = 0.25;

/// Knobs of the discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    /// Face degree; cell unknowns have degree `k + 1`.
    pub k: usize,
    /// Interface segments per cut cell; `None` uses `4 (k + 1)^2`.
    pub n_sub: Option<usize>,
    pub eta: EtaMode,
    /// Cut threshold; `None` uses `rho^3 / 4`.
    pub delta: Option<f64>,
    /// Post-agglomeration threshold; `None` uses `rho^4 / 12`.
    pub delta_star: Option<f64>,
    /// Minimum accepted `gamma`; `None` skips the diagnostic.
    pub min_gamma: Option<f64>,
    /// Fail when `h M > 1` for the curvature bound `M`.
    pub check_curvature: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            k: 1,
            n_sub: None,
            eta: EtaMode::Auto,
            delta: None,
            delta_star: None,
            min_gamma: Some(DEFAULT_MIN_GAMMA),
            check_curvature: true,
        }
    }
}

impl PipelineOptions {
    pub fn with_k(k: usize) -> Self {
        PipelineOptions { k, ..Default::default() }
    }
}

/// Geometry, agglomeration and face numbering of one problem.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: PolyMesh,
    pub level_set: LevelSet,
    pub options: PipelineOptions,
    pub topology: CutTopology,
    pub meta: Vec<CellMeta>,
    pub rho: f64,
    pub delta: f64,
    pub delta_star: f64,
    pub partition: CutPartition,
    pub selection: NeighborSelection,
    pub agglomerated: AgglomeratedMesh,
    pub dofs: GlobalDofMap,
}

impl Discretization {
    pub fn new(mesh: PolyMesh, level_set: LevelSet, options: PipelineOptions) -> Result<Self> {
        let n_sub = options.n_sub.unwrap_or_else(|| default_n_sub(options.k));
        let topology = CutTopology::build(&mesh, &level_set, n_sub)?;
        if options.check_curvature {
            let report = geometry::check_resolution(&mesh, &topology, &level_set);
            if !report.curvature_ok {
                let m = report.curvature.unwrap_or(0.0);
                return Err(Error::InvalidArgument(format!(
                    "h M = {:.3} > 1 (h = {:.3e}, curvature bound {m:.3e}); refine the mesh",
                    report.h * m,
                    report.h
                )));
            }
        }
        let meta = compute_meta(&mesh);
        let rho = estimate_rho(&meta);
        let delta = options.delta.unwrap_or_else(|| agglomerate::default_delta(rho));
        let delta_star = options.delta_star.unwrap_or_else(|| agglomerate::default_delta_star(rho));
        let (partition, selection, agglomerated) =
            agglomerate::agglomerate_mesh(&mesh, &topology, &meta, delta, delta_star)?;
        if let Some(min_gamma) = options.min_gamma {
            agglomerated
                .cells
                .par_iter()
                .enumerate()
                .filter(|(_, c)| c.is_cut())
                .try_for_each(|(id, c)| geometry::check_assumption_gamma(c, &level_set, min_gamma, id).map(|_| ()))?;
        }
        let dofs = system::build_dof_map(&mesh, &topology, &agglomerated.cells, options.k)?;
        Ok(Discretization {
            mesh,
            level_set,
            options,
            topology,
            meta,
            rho,
            delta,
            delta_star,
            partition,
            selection,
            agglomerated,
            dofs,
        })
    }

    pub fn k(&self) -> usize {
        self.options.k
    }

    pub fn cells(&self) -> &[CellGeometry] {
        &self.agglomerated.cells
    }

    pub fn h(&self) -> f64 {
        self.mesh.h_max()
    }

    /// Local operators of every computational cell.
    pub fn local_systems(&self, problem: &dyn ProblemData) -> Result<Vec<(CellData, LocalOperatorSet)>> {
        let k = self.k();
        let eta = self.options.eta;
        self.cells().par_iter().enumerate().map(|(id, g)| hho::local_system(g, id, k, problem, eta)).collect()
    }

    /// L2 projections of the Dirichlet data on the eliminated face blocks.
    pub fn dirichlet_values(&self, problem: &dyn ProblemData) -> Vec<f64> {
        let k = self.k();
        let mut values = vec![0.0; self.dofs.num_dirichlet];
        for (c, cell) in self.cells().iter().enumerate() {
            let subs = cell.sides.iter().flat_map(|r| r.faces.iter());
            for (&b, sub) in self.dofs.cell_blocks[c].iter().zip(subs) {
                let blk = self.dofs.blocks[b];
                if !blk.eliminated {
                    continue;
                }
                let basis = canonical_face_basis(k, sub);
                let coef = approx::project_face(|x| problem.dirichlet(sub.side, x), &basis, &sub.rule(2 * k + 4));
                values[blk.offset..blk.offset + k + 1].copy_from_slice(coef.as_slice());
            }
        }
        values
    }

    /// Local systems, condensation, assembly, solve and recovery.
    pub fn solve(&self, problem: &dyn ProblemData) -> Result<Solution> {
        let locals = self.local_systems(problem)?;
        let condensed: Vec<Condensed> =
            locals.par_iter().enumerate().map(|(id, (_, ops))| hho::condense(ops, id)).collect::<Result<_>>()?;
        let dirichlet = self.dirichlet_values(problem);
        let skeleton = system::assemble(&self.dofs, &condensed, &dirichlet);
        let (faces, stats) = system::solve(&skeleton)?;
        let local = system::recover(&self.dofs, &condensed, &faces, &dirichlet);
        let eta = locals.iter().map(|(_, o)| o.eta).collect();
        let cells = locals.into_iter().map(|(d, _)| d).collect();
        Ok(Solution { k: self.k(), cells, local, faces, dirichlet, stats, eta })
    }
}

/// Discrete solution: per-cell bases and local dof vectors (cell blocks
/// first), global face values and solver statistics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub k: usize,
    pub cells: Vec<CellData>,
    pub local: Vec<DVector<f64>>,
    pub faces: Vec<f64>,
    pub dirichlet: Vec<f64>,
    pub stats: SolverStats,
    pub eta: Vec<Option<f64>>,
}

impl Solution {
    pub fn num_dofs(&self) -> usize {
        self.faces.len()
    }

    /// `P^{k+1}` coefficients of `side` on `cell`.
    pub fn coefficients(&self, cell: usize, side: Side) -> Option<DVectorView<'_, f64>> {
        let data = &self.cells[cell];
        let blk = data.sides.iter().position(|s| s.side == side)?;
        let n = approx::dim_p(self.k + 1);
        Some(self.local[cell].rows(blk * n, n))
    }

    pub fn value(&self, cell: usize, side: Side, x: Point) -> Option<f64> {
        let c = self.coefficients(cell, side)?;
        Some(self.cells[cell].side(side)?.basis.eval(x).dot(&c))
    }

    pub fn gradient(&self, cell: usize, side: Side, x: Point) -> Option<Point> {
        let c = self.coefficients(cell, side)?;
        let (gx, gy) = self.cells[cell].side(side)?.basis.grad(x);
        Some(Point::new(gx.dot(&c), gy.dot(&c)))
    }

    pub fn max_eta(&self) -> Option<f64> {
        self.eta.iter().flatten().copied().reduce(f64::max)
    }
}
