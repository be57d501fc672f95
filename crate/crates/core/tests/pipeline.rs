//! End-to-end behavior of the discretization pipeline.

use cut_hho::mesh::{generate_cartesian, generate_perturbed, parse_mesh, write_mesh, Rect};
use cut_hho::verify::{cases, compute_errors, convergence_study, run_case};
use cut_hho::{Discretization, Error, LevelSet, PipelineOptions, Point, Side};

fn domain() -> Rect {
    Rect::centered(1.0)
}

#[test]
fn piecewise_quadratic_with_jumps_is_exact() {
    // u_i = r^2 / kappa_i lies in P^2 on each side
    let case = cases::radial_circle(Point::new(0.04, -0.02), 0.6, [1.0, 100.0], 2).unwrap();
    for k in 1..3 {
        let r = run_case(&case, 8, domain(), &PipelineOptions::with_k(k)).unwrap();
        assert!(r.cut_cells > 0);
        assert!(r.total < 1e-18, "k = {k}: {r:?}");
    }
}

#[test]
fn interface_touching_the_boundary_is_rejected() {
    // crosses the boundary x = 1 away from grid vertices
    let mesh = generate_cartesian(8, 8, domain()).unwrap();
    let ls = LevelSet::circle(1.0, 0.1, 0.5).unwrap();
    let err = Discretization::new(mesh, ls, PipelineOptions::with_k(0)).unwrap_err();
    assert!(matches!(err, Error::CutBoundaryFace { .. }), "{err}");
}

#[test]
fn coarse_mesh_fails_the_curvature_check() {
    let mesh = generate_cartesian(2, 2, domain()).unwrap();
    let ls = LevelSet::circle(0.0, 0.0, 0.3).unwrap();
    let err = Discretization::new(mesh, ls, PipelineOptions::with_k(0)).unwrap_err();
    assert!(err.to_string().contains("refine"), "{err}");
}

#[test]
fn perturbed_meshes_converge() {
    let case = cases::radial_circle(Point::zeros(), 0.71, [1.0, 100.0], 4).unwrap();
    let opts = PipelineOptions::with_k(1);
    let mut reports = Vec::new();
    for n in [8, 16, 32] {
        let mesh = generate_perturbed(n, n, domain(), 0.15, 7).unwrap();
        let disc = Discretization::new(mesh, case.level_set.clone(), opts.clone()).unwrap();
        let sol = disc.solve(&case).unwrap();
        reports.push(compute_errors(&disc, &sol, &case));
    }
    cut_hho::verify::fill_eoc(&mut reports);
    let eoc = reports[2].eoc.unwrap();
    assert!(eoc > 1.7, "{reports:?}");
}

#[test]
fn near_vertex_cuts_are_agglomerated_and_solved() {
    // circle through a vertex of the 16 x 16 grid, pushed off by 1e-10
    let r = 0.5 + 1e-10;
    let case = cases::smooth_nojump(Point::zeros(), r, 1.0).unwrap();
    let mesh = generate_cartesian(16, 16, domain()).unwrap();
    let disc = Discretization::new(mesh, case.level_set.clone(), PipelineOptions::with_k(1)).unwrap();
    assert!(disc.agglomerated.num_merged() > 0);
    let sol = disc.solve(&case).unwrap();
    assert!(sol.stats.residual < 1e-10);
    let e = compute_errors(&disc, &sol, &case);
    let reference =
        run_case(&cases::smooth_nojump(Point::zeros(), 0.47, 1.0).unwrap(), 16, domain(), &PipelineOptions::with_k(1))
            .unwrap();
    assert!(e.total < 4.0 * reference.total, "{} vs {}", e.total, reference.total);
}

#[test]
fn thread_count_does_not_change_the_solution() {
    let case = cases::radial_circle(Point::new(0.01, 0.02), 0.6, [1.0, 10.0], 4).unwrap();
    let solve = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mesh = generate_cartesian(12, 12, domain()).unwrap();
            let disc = Discretization::new(mesh, case.level_set.clone(), PipelineOptions::with_k(1)).unwrap();
            disc.solve(&case).unwrap().faces
        })
    };
    assert_eq!(solve(1), solve(4));
}

#[test]
fn mesh_file_round_trip_gives_the_same_solution() {
    let case = cases::smooth_nojump(Point::new(0.1, 0.0), 0.6, 1.0).unwrap();
    let mesh = generate_perturbed(10, 10, domain(), 0.1, 3).unwrap();
    let again = parse_mesh(&write_mesh(&mesh)).unwrap();
    let a =
        Discretization::new(mesh, case.level_set.clone(), PipelineOptions::with_k(1)).unwrap().solve(&case).unwrap();
    let b =
        Discretization::new(again, case.level_set.clone(), PipelineOptions::with_k(1)).unwrap().solve(&case).unwrap();
    let diff = a.faces.iter().zip(&b.faces).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-12);
}

#[test]
fn solution_jump_matches_interface_data() {
    let case = cases::radial_circle(Point::zeros(), 0.6, [1.0, 10.0], 4).unwrap();
    let mesh = generate_cartesian(32, 32, domain()).unwrap();
    let disc = Discretization::new(mesh, case.level_set.clone(), PipelineOptions::with_k(2)).unwrap();
    let sol = disc.solve(&case).unwrap();
    let expected = 0.6f64.powi(4) * (1.0 - 0.1);
    for (c, data) in sol.cells.iter().enumerate().filter(|(_, d)| d.is_cut()) {
        for (x, _, _) in data.interface.iter() {
            let jump = sol.value(c, Side::One, x).unwrap() - sol.value(c, Side::Two, x).unwrap();
            assert!((jump - expected).abs() < 1e-3, "cell {c}: {jump} vs {expected}");
        }
    }
}

#[test]
fn convergence_study_needs_two_meshes() {
    let case = cases::smooth_nojump(Point::zeros(), 0.5, 1.0).unwrap();
    assert!(convergence_study(&case, &[8], domain(), &PipelineOptions::with_k(0)).is_err());
}
