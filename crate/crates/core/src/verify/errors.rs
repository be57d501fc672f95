use std::fmt::Write;

use rayon::prelude::*;

use super::ManufacturedCase;
use crate::hho::ProblemData;
use crate::pipeline::{Discretization, Solution};
use crate::Side;

/// Components of the energy error
/// `E = sum_i kappa_i |u_i - U_i|_1^2 + kappa1/h |g_D - [U]|^2 + h/kappa2 |g_N - [kappa grad U] . n|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub h: f64,
    pub dofs: usize,
    pub cells: usize,
    pub cut_cells: usize,
    /// Broken gradient error per side, `kappa`-weighted.
    pub grad: [f64; 2],
    pub jump: f64,
    pub flux: f64,
    pub total: f64,
    /// Estimated order of `sqrt(total)` against the previous mesh.
    pub eoc: Option<f64>,
}

impl ErrorReport {
    pub fn sqrt_total(&self) -> f64 {
        self.total.sqrt()
    }

    /// Gradient component only, `sum_i kappa_i |u_i - U_i|_1^2`.
    pub fn grad_total(&self) -> f64 {
        self.grad[0] + self.grad[1]
    }
}

/// Evaluates every component of `E` with the `2k + 4` rules of each cell
/// and the polyline rule on the interface.
pub fn compute_errors(disc: &Discretization, sol: &Solution, case: &ManufacturedCase) -> ErrorReport {
    let kappa = case.kappa;
    let parts: Vec<([f64; 2], f64, f64)> = sol
        .cells
        .par_iter()
        .enumerate()
        .map(|(c, data)| {
            let mut grad = [0.0; 2];
            for s in &data.sides {
                let i = s.side.index();
                for (x, w) in s.volume.iter() {
                    let e = case.grad(s.side, x) - sol.gradient(c, s.side, x).unwrap();
                    grad[i] += w * kappa[i] * e.norm_squared();
                }
            }
            let (mut jump, mut flux) = (0.0, 0.0);
            if data.is_cut() {
                for (x, w, n) in data.interface.iter() {
                    let u1 = sol.value(c, Side::One, x).unwrap();
                    let u2 = sol.value(c, Side::Two, x).unwrap();
                    let g1 = sol.gradient(c, Side::One, x).unwrap();
                    let g2 = sol.gradient(c, Side::Two, x).unwrap();
                    let dj = case.jump(x) - (u1 - u2);
                    let df = case.flux_jump(x, n) - (g1 * kappa[0] - g2 * kappa[1]).dot(&n);
                    jump += w * kappa[0] / data.h * dj * dj;
                    flux += w * data.h / kappa[1] * df * df;
                }
            }
            (grad, jump, flux)
        })
        .collect();
    let mut r = ErrorReport {
        h: disc.h(),
        dofs: sol.num_dofs(),
        cells: disc.agglomerated.num_cells(),
        cut_cells: disc.agglomerated.num_cut(),
        ..Default::default()
    };
    for (g, j, f) in parts {
        r.grad[0] += g[0];
        r.grad[1] += g[1];
        r.jump += j;
        r.flux += f;
    }
    r.total = r.grad[0] + r.grad[1] + r.jump + r.flux;
    r
}

/// Fills `eoc` from consecutive reports.
pub fn fill_eoc(reports: &mut [ErrorReport]) {
    for j in 1..reports.len() {
        let (a, b) = (reports[j - 1], reports[j]);
        let ratio = (a.sqrt_total() / b.sqrt_total()).ln() / (a.h / b.h).ln();
        reports[j].eoc = ratio.is_finite().then_some(ratio);
    }
}

/// Column order of [`write_csv`].
pub const CSV_HEADER: &str = "mesh,h,dofs,cells,cut_cells,grad_error,jump_error,flux_error,total,sqrt_total,eoc";

/// One row per report; `labels` names the meshes.
pub fn write_csv(labels: &[String], reports: &[ErrorReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for (l, r) in labels.iter().zip(reports) {
        let eoc = r.eoc.map_or_else(|| "n/a".to_string(), |e| format!("{e:.4}"));
        let _ = writeln!(
            s,
            "{l},{:.6e},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{eoc}",
            r.h,
            r.dofs,
            r.cells,
            r.cut_cells,
            r.grad_total(),
            r.jump,
            r.flux,
            r.total,
            r.sqrt_total()
        );
    }
    s
}
