//! End-to-end runs of the `cut-hho` binary: exit codes, outputs and
//! determinism.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_cut-hho");

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str], config: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).arg("--config").arg(config).env_remove("CUT_HHO_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn radial(n: usize, k: usize) -> String {
    format!(
        "[mesh]\nnx = {n}\n[interface]\nradius = 0.71\n[problem]\ncase = \"radial_circle\"\nkappa = [1.0, 100.0]\n\
         [discretization]\nk = {k}\n[convergence]\nmeshes = [8, 16, 32, 64]\n"
    )
}

/// Final EOC column of a convergence table.
fn final_eoc(csv: &str) -> f64 {
    csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn uncut_configuration_reports_zero_cut_cells() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nnx = 6\n[interface]\nlevel_set = \"circle(5, 5, 0.3)\"\n[discretization]\nk = 0\n",
    );
    let out = run(&["check-mesh"], &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("0 cut cells"));
}

#[test]
fn sliver_cells_are_ko_before_and_ok_after_agglomeration() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(16, 1));
    let out = run(&["check-mesh"], &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let pre = text.lines().find(|l| l.starts_with("census before")).unwrap();
    let ko1: usize = pre.split("KO1 = ").nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(ko1 > 0, "{pre}");
    assert!(text.contains("KO1 = 0, KO2 = 0 (delta*)"), "{text}");
    let rows = text.lines().skip_while(|l| *l != "agglomerate,cut,parents").skip(1);
    assert!(rows.filter(|l| l.split(',').nth(2).is_some_and(|p| p.contains(' '))).count() >= ko1);
}

#[test]
fn under_resolved_interface_fails_with_refinement_advice() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nnx = 4\n[interface]\nlevel_set = \"circle(0.1, 0.05, 0.3)\"\n[discretization]\nk = 1\n",
    );
    let out = run(&["check-mesh"], &cfg, &[]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("refine"), "{}", stdout(&out));
}

#[test]
fn solve_writes_one_error_row() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nnx = 16\n[interface]\nradius = 0.5\n[problem]\ncase = \"smooth_nojump\"\nkappa = [1, 1]\n[discretization]\nk = 1\n",
    );
    let out_dir = dir.path().join("out");
    let out = run(&["solve", "--out", out_dir.to_str().unwrap()], &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("errors.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("mesh,h,dofs"));
    assert!(lines[1].starts_with("16x16,"));
    let vtk = std::fs::read_to_string(out_dir.join("solution.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0"));
}

#[test]
fn emitted_field_jumps_across_the_interface() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(16, 1).replace("radius = 0.71", "radius = 0.6"));
    let out_dir = dir.path().join("out");
    let out = run(&["solve", "--out", out_dir.to_str().unwrap()], &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("solution.csv")).unwrap();
    // interface vertices appear once per side of the same cell
    let mut seen: HashMap<(String, String, String), [Option<f64>; 2]> = HashMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let side: usize = f[1].parse().unwrap();
        let entry = seen.entry((f[0].into(), f[2].into(), f[3].into())).or_default();
        entry[side - 1] = Some(f[4].parse().unwrap());
    }
    let expected = 0.6f64.powi(4) * (1.0 - 0.01);
    let mut count = 0;
    for [a, b] in seen.values() {
        if let (Some(a), Some(b)) = (a, b) {
            assert!((a - b - expected).abs() < 1e-2 * expected, "{} vs {expected}", a - b);
            count += 1;
        }
    }
    assert!(count > 40, "{count}");
}

#[test]
fn missing_key_is_a_usage_error_naming_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(8, 1).replace("case = \"radial_circle\"\n", ""));
    let out = run(&["solve"], &cfg, &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("problem.case"), "{}", stderr(&out));
    let cfg =
        write_config(dir.path(), "[problem]\ncase = \"radial_circle\"\nkappa = [1, 2]\n[discretization]\nk = 1\n");
    let out = run(&["solve"], &cfg, &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("mesh.nx"), "{}", stderr(&out));
}

#[test]
fn syntax_errors_report_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[mesh]\nnx = 8\n[problem\ncase = \"radial_circle\"\n");
    let out = run(&["check-mesh"], &cfg, &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn unknown_case_and_bad_seed_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(8, 1).replace("radial_circle", "square_wave"));
    assert_eq!(code(&run(&["solve"], &cfg, &[])), 2);
    let cfg = write_config(dir.path(), &radial(8, 1));
    assert_eq!(code(&run(&["check-mesh"], &cfg, &[("CUT_HHO_SEED", "seven")])), 2);
    let out = Command::new(BIN).arg("solve").output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn two_mesh_convergence_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(8, 0));
    let out = run(&["convergence", "--meshes", "8,16"], &cfg, &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("at least 3 meshes"));
}

#[test]
fn acceptance_runs_meet_the_eoc_thresholds() {
    let dir = TempDir::new().unwrap();
    for (k, threshold) in [(0, 0.9), (1, 1.8)] {
        let cfg = write_config(dir.path(), &radial(8, k));
        let out_dir = dir.path().join(format!("k{k}"));
        let out = run(&["convergence", "--out", out_dir.to_str().unwrap()], &cfg, &[]);
        assert_eq!(code(&out), 0, "{}{}", stdout(&out), stderr(&out));
        let csv = std::fs::read_to_string(out_dir.join("convergence.csv")).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(final_eoc(&csv) >= threshold, "{csv}");
    }
}

#[test]
fn missed_eoc_threshold_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &format!("{}min_eoc = 5.0\n", radial(8, 0)));
    let out = run(&["convergence", "--meshes", "8,16,32"], &cfg, &[("CUT_HHO_SEED", "1")]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(12, 1).replace("[mesh]\n", "[mesh]\nperturbation = 0.1\n"));
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4", "0"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{i}"));
        let out =
            run(&["solve", "--threads", threads, "--out", out_dir.to_str().unwrap()], &cfg, &[("CUT_HHO_SEED", "11")]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let read = |f: &str| std::fs::read(out_dir.join(f)).unwrap();
        outputs.push((read("errors.csv"), read("solution.csv"), read("solution.vtk")));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn seed_variable_changes_the_perturbed_mesh() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(12, 0).replace("[mesh]\n", "[mesh]\nperturbation = 0.1\n"));
    let field = |seed: &str, name: &str| {
        let out_dir = dir.path().join(name);
        let out = run(&["solve", "--out", out_dir.to_str().unwrap()], &cfg, &[("CUT_HHO_SEED", seed)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        std::fs::read_to_string(out_dir.join("solution.csv")).unwrap()
    };
    assert_eq!(field("3", "a"), field("3", "b"));
    assert_ne!(field("3", "c"), field("4", "d"));
}

#[test]
fn k_flag_overrides_the_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(8, 0));
    let out_dir = dir.path().join("out");
    let out = run(&["solve", "--k", "2", "--out", out_dir.to_str().unwrap()], &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("k = 2"));
}

#[test]
fn mesh_file_input() {
    let dir = TempDir::new().unwrap();
    let n = 10;
    let mut text = String::from("polymesh 2d\n");
    let _ = writeln!(text, "{}", (n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let _ = writeln!(text, "{} {}", -1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64);
        }
    }
    let _ = writeln!(text, "{}", n * n);
    for j in 0..n {
        for i in 0..n {
            let v = j * (n + 1) + i;
            let _ = writeln!(text, "4 {} {} {} {}", v, v + 1, v + n + 2, v + n + 1);
        }
    }
    std::fs::write(dir.path().join("grid.mesh"), text).unwrap();
    let cfg = write_config(
        dir.path(),
        "[mesh]\nfile = \"grid.mesh\"\n[interface]\nradius = 0.55\n[problem]\ncase = \"smooth_nojump\"\nkappa = [2, 2]\n[discretization]\nk = 1\n",
    );
    let out_dir = dir.path().join("out");
    let out = run(&["solve", "--out", out_dir.to_str().unwrap()], &cfg, &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(out_dir.join("errors.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("file100,"), "{csv}");
}

#[test]
fn pipeline_failures_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &radial(3, 1).replace("radius = 0.71", "radius = 0.3"));
    let out = run(&["solve"], &cfg, &[]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("refine"), "{}", stderr(&out));
}
