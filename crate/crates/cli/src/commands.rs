//! The `check-mesh`, `solve` and `convergence` subcommands.

use std::path::Path;

use cut_hho::agglomerate;
use cut_hho::geometry::{self, check_assumption_ball, default_n_sub};
use cut_hho::mesh::{compute_meta, estimate_rho, generate_cartesian, generate_perturbed, read_mesh};
use cut_hho::verify::{compute_errors, fill_eoc, make_case, write_csv, ErrorReport};
use cut_hho::{CutTopology, Discretization, LevelSet, ManufacturedCase, PolyMesh};

use crate::config::RunConfig;
use crate::output;
use crate::CliError;

fn build_mesh(cfg: &RunConfig, n: Option<usize>) -> Result<PolyMesh, CliError> {
    let m = &cfg.mesh;
    if let Some(path) = &m.file {
        return Ok(read_mesh(path)?);
    }
    let (nx, ny) = n.map_or((m.nx, m.ny), |n| (n, n));
    let mesh = if m.perturbation > 0.0 {
        generate_perturbed(nx, ny, m.domain, m.perturbation, cfg.seed)?
    } else {
        generate_cartesian(nx, ny, m.domain)?
    };
    Ok(mesh)
}

fn build_case(cfg: &RunConfig) -> Result<ManufacturedCase, CliError> {
    let name = cfg.case.as_deref().ok_or_else(|| CliError::Usage("missing config key `problem.case`".into()))?;
    if cfg.level_set.is_some() {
        return Err(CliError::Usage(
            "`interface.level_set` only applies to check-mesh; a case takes its interface from \
             `interface.center`, `interface.radius`, `interface.angle` and `interface.offset`"
                .into(),
        ));
    }
    make_case(name, &cfg.params).map_err(|e| CliError::Usage(format!("problem: {e}")))
}

fn level_set(cfg: &RunConfig) -> Result<LevelSet, CliError> {
    match (&cfg.level_set, &cfg.case) {
        (Some(text), _) => LevelSet::parse(text).map_err(|e| CliError::Usage(format!("interface.level_set: {e}"))),
        (None, Some(name)) => {
            Ok(make_case(name, &cfg.params).map_err(|e| CliError::Usage(format!("problem: {e}")))?.level_set)
        }
        (None, None) => Err(CliError::Usage("missing config key `problem.case`".into())),
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Failure(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
}

fn mesh_label(mesh: &PolyMesh, cfg: &RunConfig, n: Option<usize>) -> String {
    match (&cfg.mesh.file, n) {
        (Some(_), _) => format!("file{}", mesh.num_cells()),
        (None, Some(n)) => format!("{n}x{n}"),
        (None, None) => format!("{}x{}", cfg.mesh.nx, cfg.mesh.ny),
    }
}

/// Prints the diagnostics and returns whether every check passed.
pub fn check_mesh(cfg: &RunConfig) -> Result<bool, CliError> {
    let mesh = build_mesh(cfg, None)?;
    let ls = level_set(cfg)?;
    println!("mesh: {} cells, {} faces, h = {:.4e}", mesh.num_cells(), mesh.num_faces(), mesh.h_max());
    println!("interface: {}", ls.describe());
    let n_sub = cfg.options.n_sub.unwrap_or_else(|| default_n_sub(cfg.k()));
    let topo = match CutTopology::build(&mesh, &ls, n_sub) {
        Ok(t) => t,
        Err(e) => {
            println!("cut topology: FAIL: {e}");
            return Ok(false);
        }
    };
    println!("{} cut cells", topo.num_cut());

    let res = geometry::check_resolution(&mesh, &topo, &ls);
    let mut pass = true;
    match res.curvature {
        Some(m) => {
            let verdict = if res.curvature_ok { "OK" } else { "FAIL: h M > 1; refine the mesh" };
            println!("resolution: h M = {:.4} (curvature bound {m:.4e}): {verdict}", res.h * m);
        }
        None => println!("resolution: no curvature bound known"),
    }
    pass &= res.curvature_ok;
    if res.boundary_cut_cells.is_empty() {
        println!("boundary: no cut cell touches the boundary: OK");
    } else {
        println!(
            "boundary: FAIL: {} cut cells touch the boundary (first {}); move the interface or refine the mesh",
            res.boundary_cut_cells.len(),
            res.boundary_cut_cells[0]
        );
        pass = false;
    }

    let meta = compute_meta(&mesh);
    let rho = estimate_rho(&meta);
    let delta = cfg.options.delta.unwrap_or_else(|| agglomerate::default_delta(rho));
    let delta_star = cfg.options.delta_star.unwrap_or_else(|| agglomerate::default_delta_star(rho));
    println!("rho = {rho:.4}, delta = {delta:.4e}, delta* = {delta_star:.4e}");
    let (partition, _, agg) = match agglomerate::agglomerate_mesh(&mesh, &topo, &meta, delta, delta_star) {
        Ok(r) => r,
        Err(e) => {
            println!("agglomeration: FAIL: {e}");
            return Ok(false);
        }
    };
    let [ok, ko1, ko2] = partition.census();
    println!("census before agglomeration: OK = {ok}, KO1 = {ko1}, KO2 = {ko2}");

    let mut post = [0usize; 2];
    for cell in agg.cells.iter().filter(|c| c.is_cut()) {
        for (i, check) in check_assumption_ball(cell, delta_star).iter().enumerate() {
            post[i] += usize::from(!check.pass);
        }
    }
    println!(
        "census after agglomeration: {} cells, {} merged, {} cut, KO1 = {}, KO2 = {} (delta*)",
        agg.num_cells(),
        agg.num_merged(),
        agg.num_cut(),
        post[0],
        post[1]
    );
    pass &= post == [0, 0];

    if let Some(min_gamma) = cfg.options.min_gamma {
        let bad: Vec<String> = agg
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_cut())
            .filter_map(|(id, c)| geometry::check_assumption_gamma(c, &ls, min_gamma, id).err())
            .map(|e| e.to_string())
            .collect();
        match bad.first() {
            None => println!("interface graph condition: OK (gamma >= {min_gamma})"),
            Some(first) => {
                println!("interface graph condition: FAIL in {} cells: {first}", bad.len());
                pass = false;
            }
        }
    }

    println!("agglomerate,cut,parents");
    for (a, cell) in agg.agglomerates.iter().zip(&agg.cells) {
        let parents: Vec<String> = a.parents.iter().map(usize::to_string).collect();
        println!("{},{},{}", a.seed, u8::from(cell.is_cut()), parents.join(" "));
    }
    println!("check-mesh: {}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

/// Solves one problem and writes the field and error outputs.
pub fn solve(cfg: &RunConfig) -> Result<ErrorReport, CliError> {
    let case = build_case(cfg)?;
    let mesh = build_mesh(cfg, None)?;
    let label = mesh_label(&mesh, cfg, None);
    let disc = Discretization::new(mesh, case.level_set.clone(), cfg.options.clone())?;
    let sol = disc.solve(&case)?;
    let report = compute_errors(&disc, &sol, &case);

    let patches = output::patches(&disc, &sol, Some(&case));
    write_file(&cfg.out_dir, "errors.csv", &write_csv(&[label], &[report]))?;
    write_file(&cfg.out_dir, "solution.csv", &output::write_field_csv(&patches))?;
    if cfg.vtk {
        write_file(&cfg.out_dir, "solution.vtk", &output::write_field_vtk(&patches))?;
    }
    println!(
        "{}: k = {}, {} cells ({} cut, {} merged), {} face unknowns",
        case.name,
        cfg.k(),
        disc.agglomerated.num_cells(),
        disc.agglomerated.num_cut(),
        disc.agglomerated.num_merged(),
        sol.num_dofs()
    );
    println!("solver: residual {:.3e}, min pivot ratio {:.3e}", sol.stats.residual, sol.stats.min_pivot_ratio);
    println!("energy error: sqrt(E) = {:.6e}", report.sqrt_total());
    println!("wrote {}", cfg.out_dir.display());
    Ok(report)
}

/// Runs the mesh sequence and returns whether the final EOC reaches the
/// threshold.
pub fn convergence(cfg: &RunConfig) -> Result<bool, CliError> {
    if cfg.meshes.len() < 3 {
        return Err(CliError::Usage(format!(
            "a convergence run needs at least 3 meshes (`convergence.meshes` or --meshes), got {}",
            cfg.meshes.len()
        )));
    }
    if cfg.mesh.file.is_some() {
        return Err(CliError::Usage("convergence runs generate their meshes; remove `mesh.file`".into()));
    }
    let case = build_case(cfg)?;
    let mut reports = Vec::new();
    let mut labels = Vec::new();
    for &n in &cfg.meshes {
        let mesh = build_mesh(cfg, Some(n))?;
        labels.push(mesh_label(&mesh, cfg, Some(n)));
        let disc = Discretization::new(mesh, case.level_set.clone(), cfg.options.clone())?;
        let sol = disc.solve(&case)?;
        reports.push(compute_errors(&disc, &sol, &case));
    }
    fill_eoc(&mut reports);
    let table = write_csv(&labels, &reports);
    write_file(&cfg.out_dir, "convergence.csv", &table)?;
    print!("{table}");
    let threshold = cfg.eoc_threshold();
    let last = reports.last().and_then(|r| r.eoc);
    let pass = last.is_some_and(|e| e >= threshold);
    match last {
        Some(e) => println!("final EOC {e:.3} (threshold {threshold:.2}): {}", if pass { "PASS" } else { "FAIL" }),
        None => println!("final EOC undefined: FAIL"),
    }
    Ok(pass)
}
