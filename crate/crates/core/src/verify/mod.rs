//! Manufactured solutions, the energy error `E`, and convergence and
//! robustness studies.

pub mod cases;
mod errors;

pub use cases::{make_case, CaseParams, ManufacturedCase, CASE_NAMES};
pub use errors::{compute_errors, fill_eoc, write_csv, ErrorReport, CSV_HEADER};

use crate::mesh::{generate_cartesian, Rect};
use crate::pipeline::{Discretization, PipelineOptions};
use crate::{Error, Point, Result};

/// Runs the full pipeline on an `n x n` Cartesian mesh of `domain`.
pub fn run_case(case: &ManufacturedCase, n: usize, domain: Rect, options: &PipelineOptions) -> Result<ErrorReport> {
    let mesh = generate_cartesian(n, n, domain)?;
    let disc = Discretization::new(mesh, case.level_set.clone(), options.clone())?;
    let sol = disc.solve(case)?;
    Ok(compute_errors(&disc, &sol, case))
}

/// Errors on a sequence of `n x n` meshes with EOC between consecutive
/// levels.
pub fn convergence_study(
    case: &ManufacturedCase,
    meshes: &[usize],
    domain: Rect,
    options: &PipelineOptions,
) -> Result<Vec<ErrorReport>> {
    if meshes.len() < 2 {
        return Err(Error::InvalidArgument("a convergence study needs at least two meshes".into()));
    }
    let mut reports = meshes.iter().map(|&n| run_case(case, n, domain, options)).collect::<Result<Vec<_>>>()?;
    fill_eoc(&mut reports);
    Ok(reports)
}

/// Outcome of a sweep over a family of problems.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub parameters: Vec<f64>,
    pub reports: Vec<ErrorReport>,
    /// `max sqrt(E) / min sqrt(E)`.
    pub ratio: f64,
    /// Smallest pivot ratio of the skeleton factorizations.
    pub worst_pivot: f64,
}

fn sweep(
    parameters: &[f64],
    n: usize,
    domain: Rect,
    options: &PipelineOptions,
    make: impl Fn(f64) -> Result<ManufacturedCase>,
) -> Result<SweepReport> {
    let mut reports = Vec::new();
    let mut worst_pivot = f64::INFINITY;
    for &p in parameters {
        let case = make(p)?;
        let mesh = generate_cartesian(n, n, domain)?;
        let disc = Discretization::new(mesh, case.level_set.clone(), options.clone())?;
        let sol = disc.solve(&case)?;
        worst_pivot = worst_pivot.min(sol.stats.min_pivot_ratio);
        reports.push(compute_errors(&disc, &sol, &case));
    }
    let e: Vec<f64> = reports.iter().map(ErrorReport::sqrt_total).collect();
    let ratio = e.iter().copied().fold(0.0, f64::max) / e.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SweepReport { parameters: parameters.to_vec(), reports, ratio, worst_pivot })
}

/// Default interface offsets, in units of `h`.
pub const SWEEP_OFFSETS: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];

/// Translates the interface (and the exact solution) by `eps h` along
/// `direction` for every `eps` in `offsets`.
pub fn cut_robustness_sweep(
    case: &ManufacturedCase,
    n: usize,
    domain: Rect,
    options: &PipelineOptions,
    offsets: &[f64],
    direction: Point,
) -> Result<SweepReport> {
    let h = (domain.x1 - domain.x0) / n as f64;
    sweep(offsets, n, domain, options, |eps| Ok(case.translated(direction * (eps * h))))
}

/// Reruns `make(kappa2 / kappa1)` for each contrast; the ratio compares
/// `sqrt(E)`.
pub fn contrast_sweep(
    contrasts: &[f64],
    n: usize,
    domain: Rect,
    options: &PipelineOptions,
    make: impl Fn(f64) -> Result<ManufacturedCase>,
) -> Result<SweepReport> {
    sweep(contrasts, n, domain, options, make)
}
