//! Run configuration: TOML sections `[mesh]`, `[interface]`, `[problem]`,
//! `[discretization]`, `[output]` and `[convergence]`.

use std::path::{Path, PathBuf};

use cut_hho::hho::EtaMode;
use cut_hho::verify::CaseParams;
use cut_hho::{PipelineOptions, Point, Rect};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    mesh: MeshSection,
    #[serde(default)]
    interface: InterfaceSection,
    #[serde(default)]
    problem: ProblemSection,
    #[serde(default)]
    discretization: DiscretizationSection,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    convergence: ConvergenceSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshSection {
    nx: Option<usize>,
    ny: Option<usize>,
    domain: Option<[f64; 4]>,
    perturbation: Option<f64>,
    file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterfaceSection {
    level_set: Option<String>,
    center: Option<[f64; 2]>,
    radius: Option<f64>,
    angle: Option<f64>,
    offset: Option<f64>,
    n_sub: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    case: Option<String>,
    kappa: Option<[f64; 2]>,
    power: Option<i32>,
    jump: Option<f64>,
    flux_jump: Option<f64>,
    degree: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum EtaValue {
    Value(f64),
    Name(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscretizationSection {
    k: Option<usize>,
    eta: Option<EtaValue>,
    delta: Option<f64>,
    delta_star: Option<f64>,
    min_gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    vtk: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvergenceSection {
    meshes: Option<Vec<usize>>,
    min_eoc: Option<f64>,
}

/// Background mesh: a file, or an `nx x ny` grid of `domain` with vertex
/// perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub nx: usize,
    pub ny: usize,
    pub domain: Rect,
    pub perturbation: f64,
    pub file: Option<PathBuf>,
}

/// Validated configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    /// Explicit level set; otherwise the interface of the case is used.
    pub level_set: Option<String>,
    pub case: Option<String>,
    pub params: CaseParams,
    pub options: PipelineOptions,
    pub out_dir: PathBuf,
    pub vtk: bool,
    pub meshes: Vec<usize>,
    pub min_eoc: Option<f64>,
    pub seed: u64,
}

/// Overrides from the command line and the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
    pub meshes: Option<Vec<usize>>,
    pub seed: Option<String>,
}

fn missing(key: &str) -> CliError {
    CliError::Usage(format!("missing config key `{key}`"))
}

fn invalid(key: &str, why: &str) -> CliError {
    CliError::Usage(format!("invalid value for `{key}`: {why}"))
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, overrides)
    }

    /// Parses `text`; relative mesh files resolve against `base`.
    pub fn parse(text: &str, base: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;

        let m = raw.mesh;
        let domain = m.domain.map_or(Rect::centered(1.0), |[x0, x1, y0, y1]| Rect::new(x0, x1, y0, y1));
        if !(domain.x0 < domain.x1 && domain.y0 < domain.y1) {
            return Err(invalid("mesh.domain", "expected [x0, x1, y0, y1] with x0 < x1 and y0 < y1"));
        }
        let file = m.file.map(|f| if f.is_absolute() { f } else { base.join(f) });
        let nx = match (m.nx, &file) {
            (Some(n), _) => n,
            (None, Some(_)) => 1,
            (None, None) => return Err(missing("mesh.nx")),
        };
        let ny = m.ny.unwrap_or(nx);
        if nx == 0 || ny == 0 {
            return Err(invalid("mesh.nx", "must be at least 1"));
        }
        let perturbation = m.perturbation.unwrap_or(0.0);
        if !(0.0..0.5).contains(&perturbation) {
            return Err(invalid("mesh.perturbation", "must lie in [0, 0.5)"));
        }

        let i = raw.interface;
        let p = raw.problem;
        let defaults = CaseParams::default();
        let kappa = match (p.kappa, &p.case) {
            (Some(k), _) => k,
            (None, Some(_)) => return Err(missing("problem.kappa")),
            (None, None) => defaults.kappa,
        };
        if kappa.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(invalid("problem.kappa", "coefficients must be positive"));
        }
        let params = CaseParams {
            kappa,
            center: i.center.map_or(defaults.center, |[x, y]| Point::new(x, y)),
            radius: i.radius.unwrap_or(defaults.radius),
            power: p.power.unwrap_or(defaults.power),
            angle: i.angle.unwrap_or(defaults.angle),
            offset: i.offset.unwrap_or(defaults.offset),
            jump: p.jump.unwrap_or(defaults.jump),
            flux_jump: p.flux_jump.unwrap_or(defaults.flux_jump),
            degree: p.degree.unwrap_or(defaults.degree),
            domain,
        };
        if p.case.is_none() && i.level_set.is_none() {
            return Err(missing("problem.case"));
        }

        let d = raw.discretization;
        let k = overrides.k.or(d.k).ok_or_else(|| missing("discretization.k"))?;
        let eta = match d.eta {
            None => EtaMode::Auto,
            Some(EtaValue::Name(s)) if s == "auto" => EtaMode::Auto,
            Some(EtaValue::Value(v)) if v > 0.0 && v.is_finite() => EtaMode::Fixed(v),
            Some(_) => return Err(invalid("discretization.eta", "expected \"auto\" or a positive number")),
        };
        for (key, v) in [("discretization.delta", d.delta), ("discretization.delta_star", d.delta_star)] {
            if v.is_some_and(|v| !(v > 0.0 && v < 1.0)) {
                return Err(invalid(key, "must lie in (0, 1)"));
            }
        }
        if i.n_sub == Some(0) {
            return Err(invalid("interface.n_sub", "must be at least 1"));
        }
        let options = PipelineOptions {
            k,
            n_sub: i.n_sub,
            eta,
            delta: d.delta,
            delta_star: d.delta_star,
            min_gamma: Some(d.min_gamma.unwrap_or(cut_hho::pipeline::DEFAULT_MIN_GAMMA)),
            check_curvature: true,
        };

        let out_dir = overrides.out.clone().or(raw.output.dir).unwrap_or_else(|| PathBuf::from("out"));
        let meshes = overrides.meshes.clone().or(raw.convergence.meshes).unwrap_or_default();
        let seed = match &overrides.seed {
            None => 0,
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("CUT_HHO_SEED must be an unsigned integer, got '{s}'")))?,
        };

        Ok(RunConfig {
            mesh: MeshSpec { nx, ny, domain, perturbation, file },
            level_set: i.level_set,
            case: p.case,
            params,
            options,
            out_dir,
            vtk: raw.output.vtk.unwrap_or(true),
            meshes,
            min_eoc: raw.convergence.min_eoc,
            seed,
        })
    }

    pub fn k(&self) -> usize {
        self.options.k
    }

    /// Acceptance threshold of the final EOC, `0.9 (k + 1)` unless set.
    pub fn eoc_threshold(&self) -> f64 {
        self.min_eoc.unwrap_or(0.9 * (self.k() + 1) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(text, Path::new("/tmp"), &Overrides::default())
    }

    const MINIMAL: &str =
        "[mesh]\nnx = 8\n[problem]\ncase = \"radial_circle\"\nkappa = [1, 100]\n[discretization]\nk = 1\n";

    #[test]
    fn minimal_config() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!((c.mesh.nx, c.mesh.ny), (8, 8));
        assert_eq!(c.k(), 1);
        assert_eq!(c.options.eta, EtaMode::Auto);
        assert_eq!(c.params.kappa, [1.0, 100.0]);
        assert!((c.eoc_threshold() - 1.8).abs() < 1e-15);
    }

    #[test]
    fn missing_key_is_named() {
        let text = MINIMAL.replace("k = 1\n", "");
        match parse(&text) {
            Err(CliError::Usage(m)) => assert!(m.contains("discretization.k"), "{m}"),
            other => panic!("{other:?}"),
        }
        let with_k = RunConfig::parse(&text, Path::new("."), &Overrides { k: Some(2), ..Default::default() });
        assert_eq!(with_k.unwrap().k(), 2);
    }

    #[test]
    fn unknown_key_and_syntax_errors_report_location() {
        let Err(CliError::Usage(m)) = parse(&format!("{MINIMAL}typo = 3\n")) else { panic!() };
        assert!(m.contains("typo"), "{m}");
        let Err(CliError::Usage(m)) = parse("[mesh]\nnx = = 8\n") else { panic!() };
        assert!(m.contains("line 2"), "{m}");
    }

    #[test]
    fn eta_accepts_auto_or_value() {
        let c = parse(&format!("{MINIMAL}eta = 12\n")).unwrap();
        assert_eq!(c.options.eta, EtaMode::Fixed(12.0));
        let c = parse(&format!("{MINIMAL}eta = \"auto\"\n")).unwrap();
        assert_eq!(c.options.eta, EtaMode::Auto);
        assert!(parse(&format!("{MINIMAL}eta = \"big\"\n")).is_err());
    }

    #[test]
    fn relative_mesh_file_resolves_against_the_config() {
        let text = MINIMAL.replace("nx = 8", "file = \"grid.mesh\"");
        let c = RunConfig::parse(&text, Path::new("/data/run"), &Overrides::default()).unwrap();
        assert_eq!(c.mesh.file.unwrap(), PathBuf::from("/data/run/grid.mesh"));
    }

    #[test]
    fn bad_seed_is_a_usage_error() {
        let o = Overrides { seed: Some("x".into()), ..Default::default() };
        assert!(matches!(RunConfig::parse(MINIMAL, Path::new("."), &o), Err(CliError::Usage(_))));
    }
}
