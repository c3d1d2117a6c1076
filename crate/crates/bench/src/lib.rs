//! Fixtures shared by the benchmarks.

use dislocq_core::equilibrium::Problem;
use dislocq_core::mesh::{generate_ball_mesh, generate_disk_mesh};
use dislocq_core::{EnergyModel, MaterialSource, ProblemSpec};

/// Isotropic edge-dislocation problem on the unit disk.
pub fn edge_problem(epsilon: f64, h: f64) -> Problem {
    let mesh = generate_disk_mesh(1.0, h).expect("valid disk parameters");
    ProblemSpec::new(mesh, MaterialSource::Hyperbolic { epsilon }, EnergyModel::Isotropic)
        .prepare()
        .expect("admissible edge problem")
}

/// Anisotropic screw-dislocation problem on a ball in the Heisenberg chart.
pub fn screw_problem(radius: f64, h: f64) -> Problem {
    let mesh = generate_ball_mesh(radius, h).expect("valid ball parameters");
    let model = EnergyModel::anisotropic(1.0, 1.0).expect("positive coefficients");
    ProblemSpec::new(mesh, MaterialSource::heisenberg(0.1), model)
        .prepare()
        .expect("admissible screw problem")
}
