use dislocq_core::equilibrium::{outer_iteration, rescale_solution};
use dislocq_core::linalg::Vector;
use dislocq_core::linear::{apply_doping, doping_coefficients, FlatSolver};
use dislocq_core::mesh::{generate_ball_mesh, generate_disk_mesh, load_mesh, save_mesh};
use dislocq_core::{DisplacementField, EnergyModel, MaterialSource, ProblemSpec};
use proptest::prelude::*;

fn vector(values: &[f64], n: usize) -> Vector {
    Vector::from_iterator(n, values.iter().cycle().copied().take(n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flat_operator_is_self_adjoint(
        x in prop::collection::vec(-1.0f64..1.0, 17),
        y in prop::collection::vec(-1.0f64..1.0, 13),
    ) {
        let mesh = generate_disk_mesh(1.0, 0.3).unwrap();
        let solver = FlatSolver::new(&mesh).unwrap();
        let n = mesh.n_nodes() * 2;
        let (mut x, mut y) = (vector(&x, n), vector(&y, n));
        solver.gauge.apply(&mesh, &solver.basis, &mut x);
        solver.gauge.apply(&mesh, &solver.basis, &mut y);
        let a = &solver.operator;
        prop_assert_eq!(a.max_asymmetry(), 0.0);
        let (yax, xay) = (y.dot(&a.mul_vec(&x)), x.dot(&a.mul_vec(&y)));
        let scale = a.mul_vec(&x).norm() * y.norm() + a.mul_vec(&y).norm() * x.norm();
        prop_assert!((yax - xay).abs() <= 1e-14 * scale, "{} vs {}", yax, xay);
    }

    #[test]
    fn doped_loads_are_compatible(load in prop::collection::vec(-1.0f64..1.0, 29)) {
        let mesh = generate_ball_mesh(1.0, 0.5).unwrap();
        let solver = FlatSolver::new(&mesh).unwrap();
        let b = vector(&load, mesh.n_nodes() * 3);
        let c = doping_coefficients(&solver.basis, &b).coefficients;
        let doped = apply_doping(&solver.basis, &solver.mass, &b, &c);
        let moments = solver.basis.project_coefficients(&doped);
        prop_assert!(moments.amax() < 1e-11 * b.amax().max(1.0));
    }
}

#[test]
fn gauge_conditions_hold_after_solves() {
    let mesh = generate_ball_mesh(1.0, 0.5).unwrap();
    let solver = FlatSolver::new(&mesh).unwrap();
    let b = Vector::from_fn(mesh.n_nodes() * 3, |i, _| ((i * 7919) % 101) as f64 / 101.0 - 0.5);
    let sol = solver.solve_load(&mesh, &b).unwrap();
    let r = solver.gauge.residuals(&mesh, &sol.psi);
    assert!(r.iter().all(|v| v.abs() < 1e-13), "{r:?}");
    assert!(sol.cg.max_drift < 1e-13);
}

#[test]
fn hyperbolic_runs_descend_and_decrease_residual() {
    for epsilon in [0.02, 0.1, 0.2] {
        let mesh = generate_disk_mesh(1.0, 0.2).unwrap();
        let p = ProblemSpec::new(mesh, MaterialSource::Hyperbolic { epsilon }, EnergyModel::Isotropic)
            .prepare()
            .unwrap();
        let (psi, report) = outer_iteration(&p).unwrap();
        assert!(report.converged);
        assert!(p.energy(&psi).unwrap() <= report.initial_energy);
        let res: Vec<f64> = report.rows.iter().map(|r| r.residual).collect();
        assert!(res.windows(2).skip(1).all(|w| w[1] < w[0]), "{epsilon}: {res:?}");
    }
}

#[test]
fn rescaled_solution_returns_bit_exactly() {
    let mesh = generate_disk_mesh(1.0, 0.2).unwrap();
    let spec = ProblemSpec::new(mesh, MaterialSource::Hyperbolic { epsilon: 0.05 }, EnergyModel::Isotropic);
    let (psi, _) = outer_iteration(&spec.clone().prepare().unwrap()).unwrap();
    let there = rescale_solution(&spec, &psi, 0.25).unwrap();
    let back = rescale_solution(&there.spec, &there.psi, 4.0).unwrap();
    assert_eq!(back.psi, psi);
    assert_eq!(back.spec.mesh, spec.mesh);
}

#[test]
fn mesh_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("dislocq-mesh-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for (name, mesh) in [
        ("disk.msh", generate_disk_mesh(1.0, 0.2).unwrap()),
        ("ball.msh", generate_ball_mesh(1.0, 0.4).unwrap()),
    ] {
        let path = dir.join(name);
        save_mesh(&mesh, &path).unwrap();
        assert_eq!(load_mesh(&path).unwrap(), mesh);
    }
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(load_mesh(&dir.join("missing.msh")).is_err());
}

#[test]
fn psi_field_interpolates_linear_functions() {
    let mesh = generate_disk_mesh(1.0, 0.3).unwrap();
    let psi = DisplacementField::from_fn(&mesh, |y| vec![2.0 * y[0] - y[1], 0.5 * y[1]]);
    let quad = dislocq_core::mesh::Quadrature::new(&mesh, 4).unwrap();
    let err = psi.l2_error(&mesh, &quad, |y| vec![2.0 * y[0] - y[1], 0.5 * y[1]]);
    assert!(err < 1e-14);
}
