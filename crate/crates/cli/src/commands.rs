use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dislocq_core::constitutive::legendre_hadamard;
use dislocq_core::equilibrium::{outer_iteration, rescale_solution, solve_screw_3d, Problem};
use dislocq_core::geometry::burgers::{square_circuit, square_triangles};
use dislocq_core::geometry::{burgers_circuit, density_flux, AffineGroup, FrameField, HeisenbergGroup};
use dislocq_core::mesh::{generate_ball_mesh, generate_disk_mesh, load_mesh, save_mesh};
use dislocq_core::{
    Configuration, DisplacementField, EnergyModel, Error, IterationReport, MaterialSource, Mesh, ProblemSpec,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::config::{ConfigError, MeshSource, ProblemKind, RunConfig};
use crate::output;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Setup(Error),
    #[error("solver failed: {0}")]
    Solve(Error),
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(_) => 3,
            _ => 2,
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn build_mesh(cfg: &RunConfig) -> Result<Mesh, CliError> {
    let mesh = match (&cfg.mesh, cfg.problem) {
        (MeshSource::Generated { radius, h }, ProblemKind::Edge2d) => generate_disk_mesh(*radius, *h),
        (MeshSource::Generated { radius, h }, ProblemKind::Screw3d) => generate_ball_mesh(*radius, *h),
        (MeshSource::File(path), _) => load_mesh(path),
    }
    .map_err(CliError::Setup)?;
    let want = if cfg.problem == ProblemKind::Edge2d { 2 } else { 3 };
    if mesh.dim() != want {
        return Err(CliError::Setup(Error::Precondition(format!(
            "mesh has dimension {} but the problem needs {want}",
            mesh.dim()
        ))));
    }
    Ok(mesh)
}

fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let mesh = build_mesh(cfg)?;
    let (material, model) = match cfg.problem {
        ProblemKind::Edge2d => (MaterialSource::Hyperbolic { epsilon: cfg.epsilon }, EnergyModel::Isotropic),
        ProblemKind::Screw3d => (
            MaterialSource::heisenberg(cfg.beta),
            EnergyModel::anisotropic(cfg.alpha, cfg.beta_w).map_err(CliError::Setup)?,
        ),
    };
    let mut spec = ProblemSpec::new(mesh, material, model).with_tolerances(cfg.tolerances);
    spec.quadrature_order = cfg.quadrature_order;
    spec.prepare().map_err(CliError::Setup)
}

fn summary(cfg: &RunConfig, report: &IterationReport, psi: Option<&DisplacementField>, failure: Option<&Error>) -> String {
    let mut s = String::new();
    let kind = if cfg.problem == ProblemKind::Edge2d { "edge2d" } else { "screw3d" };
    let _ = writeln!(s, "problem = {kind}");
    let _ = writeln!(s, "converged = {}", report.converged);
    let _ = writeln!(s, "iterations = {}", report.iterations());
    if let Some(psi) = psi {
        let _ = writeln!(s, "psi_sup = {:e}", psi.sup_norm());
    }
    let _ = writeln!(s, "max_doping = {:e}", report.max_doping());
    if let Some(last) = report.last() {
        let _ = writeln!(s, "final_residual = {:e}", last.residual);
        let _ = writeln!(s, "final_increment = {:e}", last.increment);
        let _ = writeln!(s, "energy = {:e}", last.energy);
    }
    let _ = writeln!(s, "initial_energy = {:e}", report.initial_energy);
    if let Some(e) = failure {
        let _ = writeln!(s, "failure = {e}");
    }
    s
}

pub fn solve(config: &Path) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let problem = build_problem(&cfg)?;
    std::fs::create_dir_all(&cfg.output).map_err(|source| CliError::Write {
        path: cfg.output.clone(),
        source,
    })?;
    let result = match cfg.problem {
        ProblemKind::Edge2d => outer_iteration(&problem),
        ProblemKind::Screw3d => solve_screw_3d(&problem),
    };
    let (psi, report) = match result {
        Ok(ok) => ok,
        Err(e) => {
            let report = match &e {
                Error::Diverged { report } | Error::InvertedIterate { report, .. } => (**report).clone(),
                _ => IterationReport::default(),
            };
            write_file(&cfg.output.join("report.csv"), &report.to_csv())?;
            let text = summary(&cfg, &report, None, Some(&e));
            write_file(&cfg.output.join("summary.txt"), &text)?;
            print!("{text}");
            return Err(CliError::Solve(e));
        }
    };
    let stresses = problem.cell_stresses(&psi).map_err(CliError::Solve)?;
    write_file(&cfg.output.join("report.csv"), &report.to_csv())?;
    if cfg.csv {
        write_file(&cfg.output.join("displacement.csv"), &output::displacement_csv(problem.mesh(), &psi))?;
        write_file(&cfg.output.join("stress.csv"), &output::stress_csv(problem.mesh(), &stresses))?;
    }
    if cfg.vtk {
        write_file(&cfg.output.join("solution.vtk"), &output::vtk(problem.mesh(), &psi, &stresses))?;
    }
    let text = summary(&cfg, &report, Some(&psi), None);
    write_file(&cfg.output.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

struct Check {
    name: &'static str,
    value: f64,
    tolerance: String,
    pass: bool,
}

fn burgers_check(field: &dyn FrameField, component: usize, expected: Option<f64>) -> Result<f64, CliError> {
    let d = field.dim();
    let (x0, s) = if d == 2 { (0.25, 0.5) } else { (0.0, 1.0) };
    let b = burgers_circuit(field, &square_circuit(x0, x0, s, 16, d, 0.0)).map_err(CliError::Setup)?;
    let flux = density_flux(field, &square_triangles(x0, x0, s, d, 0.0), 8);
    let mut gap = (b.components[component] - flux[component]).abs();
    if let Some(e) = expected {
        gap = gap.max((b.components[component] - e).abs());
    }
    Ok(gap)
}

/// Gradient, Legendre-Hadamard, Burgers and scaling self-checks.
pub fn check(config: &Path) -> Result<bool, CliError> {
    let cfg = RunConfig::load(config)?;
    let problem = build_problem(&cfg)?;
    let d = problem.dim();
    let mut checks = Vec::new();

    let mut rng = StdRng::seed_from_u64(1);
    let mut psi = DisplacementField::zeros(problem.mesh());
    psi.values.iter_mut().for_each(|v| *v = rng.random_range(-1e-3..1e-3));
    let g = problem.gradient_check(&psi, 1e-6).map_err(CliError::Setup)?.relative();
    checks.push(Check {
        name: "gradient vs central differences (relative)",
        value: g,
        tolerance: "< 1e-6".into(),
        pass: g < 1e-6,
    });

    let lh = legendre_hadamard(&problem.spec.model, &Configuration::identity(d)).map_err(CliError::Setup)?;
    checks.push(match problem.spec.model {
        EnergyModel::Isotropic => Check {
            name: "Legendre-Hadamard minimum at identity",
            value: lh.minimum,
            tolerance: "0.5 +- 1e-3".into(),
            pass: (lh.minimum - 0.5).abs() <= 1e-3,
        },
        EnergyModel::Anisotropic { .. } => Check {
            name: "Legendre-Hadamard minimum at identity",
            value: lh.minimum,
            tolerance: "> 0".into(),
            pass: lh.minimum > 0.0,
        },
    });

    let gap = match cfg.problem {
        ProblemKind::Edge2d => burgers_check(&AffineGroup, 1, None)?,
        ProblemKind::Screw3d => burgers_check(&HeisenbergGroup { beta: cfg.beta }, 2, Some(cfg.beta.exp()))?,
    };
    checks.push(Check {
        name: "Burgers circuit vs density flux",
        value: gap,
        tolerance: "< 1e-6".into(),
        pass: gap < 1e-6,
    });

    if cfg.problem == ProblemKind::Edge2d {
        let l = 0.5;
        let r = rescale_solution(&problem.spec, &psi, l).map_err(CliError::Setup)?;
        let scaled = r.spec.clone().prepare().map_err(CliError::Setup)?;
        let g0 = problem.gradient(&psi).map_err(CliError::Setup)?;
        let g1 = scaled.gradient(&r.psi).map_err(CliError::Setup)?;
        let rel = (g1 / l - &g0).amax() / g0.amax();
        let back = rescale_solution(&r.spec, &r.psi, 1.0 / l).map_err(CliError::Setup)?;
        let exact = back.psi == psi;
        checks.push(Check {
            name: "scaling: transported gradient (relative)",
            value: rel,
            tolerance: "< 1e-10, round trip bit-exact".into(),
            pass: rel < 1e-10 && exact,
        });
    }

    let mut all = true;
    println!("{:<46} {:>14}  {:<32} result", "check", "value", "tolerance");
    for c in &checks {
        all &= c.pass;
        println!(
            "{:<46} {:>14.6e}  {:<32} {}",
            c.name,
            c.value,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(all)
}

pub fn mesh(shape: &str, radius: f64, h: f64, out: &Path) -> Result<(), CliError> {
    let mesh = match shape {
        "disk" => generate_disk_mesh(radius, h),
        "ball" => generate_ball_mesh(radius, h),
        other => return Err(CliError::Usage(format!("unknown mesh shape `{other}` (expected disk or ball)"))),
    }
    .map_err(CliError::Setup)?;
    save_mesh(&mesh, out).map_err(CliError::Setup)?;
    println!(
        "wrote {} ({} nodes, {} cells, {} boundary facets)",
        out.display(),
        mesh.n_nodes(),
        mesh.n_cells(),
        mesh.boundary_facets().len()
    );
    Ok(())
}
