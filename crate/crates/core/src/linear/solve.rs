//! Kernel-projected conjugate gradients and gauge fixing for the flat
//! pure-traction problem.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Mat, Vector};
use crate::linear::assemble::{assemble_flat_operator, assemble_mass, load_vector};
use crate::linear::killing::{apply_doping, doping_coefficients, killing_field, killing_gradient, KillingBasis};
use crate::linear::{DisplacementField, TractionProblem};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgSettings {
    /// Stop when `|r| <= rel_tol |b|`.
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub solution: Vector,
    pub iterations: usize,
    /// Relative residual after every iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
    /// Largest per-iteration correction applied when re-projecting the
    /// iterate onto the `L2` complement of the Killing fields, relative to
    /// the iterate.
    pub max_drift: f64,
}

/// Linear conditions pinning the Killing part of a displacement at a node:
/// the value there and the lower-triangular entries `d psi^i / d y^a`
/// (`i > a`) of the averaged gradient over the adjacent cells.
#[derive(Debug, Clone)]
pub struct Gauge {
    node: usize,
    /// `(cell, weight)` with weights summing to one.
    cells: Vec<(usize, f64)>,
    system: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    condition_matrix: Mat,
}

impl Gauge {
    pub fn new(mesh: &Mesh, basis: &KillingBasis) -> Result<Self> {
        let d = mesh.dim();
        let scale = mesh.coordinates().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let node = mesh
            .find_node(&vec![0.0; d], 1e-12 * scale.max(1.0))
            .ok_or(Error::OriginNotNode)?;
        let adj = mesh.cells_of_node(node);
        let total: f64 = adj.iter().map(|&c| mesh.cell_volume(c)).sum();
        let cells: Vec<(usize, f64)> = adj.iter().map(|&c| (c, mesh.cell_volume(c) / total)).collect();
        let n = basis.len();
        let mut cm = Mat::zeros(n, n);
        for k in 0..n {
            let origin = mesh.node(node);
            let val = killing_field(d, k, origin);
            let grad = killing_gradient(d, k);
            let row = Self::conditions(d, &val, &grad);
            for (j, v) in row.into_iter().enumerate() {
                cm[(j, k)] = v;
            }
        }
        let det = cm.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::Degenerate(format!("gauge condition system is singular (det {det})")));
        }
        Ok(Self {
            node,
            cells,
            system: cm.clone().lu(),
            condition_matrix: cm,
        })
    }

    fn conditions(d: usize, value: &[f64], grad: &Mat) -> Vec<f64> {
        let mut out = value.to_vec();
        for i in 0..d {
            for a in 0..i {
                out.push(grad[(i, a)]);
            }
        }
        out
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn condition_matrix(&self) -> &Mat {
        &self.condition_matrix
    }

    /// Volume-weighted average of `grad psi` over the cells around the
    /// gauge node; `(i, a)` entry is `d psi^i / d y^a`.
    pub fn averaged_gradient(&self, mesh: &Mesh, psi: &Vector) -> Mat {
        let d = mesh.dim();
        let mut g = Mat::zeros(d, d);
        for &(c, w) in &self.cells {
            let sg = mesh.shape_gradients(c);
            for (k, &n) in mesh.cell(c).iter().enumerate() {
                for i in 0..d {
                    for a in 0..d {
                        g[(i, a)] += w * psi[n * d + i] * sg[(k, a)];
                    }
                }
            }
        }
        g
    }

    /// Current values of the gauge conditions.
    pub fn residuals(&self, mesh: &Mesh, psi: &Vector) -> Vec<f64> {
        let d = mesh.dim();
        let value: Vec<f64> = (0..d).map(|a| psi[self.node * d + a]).collect();
        Self::conditions(d, &value, &self.averaged_gradient(mesh, psi))
    }

    /// Subtracts the unique Killing field that makes all conditions vanish.
    pub fn apply(&self, mesh: &Mesh, basis: &KillingBasis, psi: &mut Vector) {
        let r = Vector::from_vec(self.residuals(mesh, psi));
        let a = self.system.solve(&r).expect("gauge system checked nonsingular");
        *psi -= basis.combine(&a);
    }
}

/// Everything needed to solve flat pure-traction problems on one mesh.
#[derive(Debug, Clone)]
pub struct FlatSolver {
    pub operator: CsrMatrix,
    pub mass: CsrMatrix,
    pub basis: KillingBasis,
    pub gauge: Gauge,
    pub settings: CgSettings,
    inv_diag: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub psi: Vector,
    /// Doping coefficients `c_A`.
    pub doping: Vector,
    /// Killing moments `sigma_A` of the undoped load.
    pub sigma: Vector,
    /// Euclidean inner products of the doped load with the Killing fields.
    pub compatibility: Vector,
    pub cg: CgOutcome,
}

impl FlatSolver {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let operator = assemble_flat_operator(mesh);
        let mass = assemble_mass(mesh);
        let basis = KillingBasis::new(mesh)?;
        let gauge = Gauge::new(mesh, &basis)?;
        let inv_diag = operator.diagonal().map(|v| if v > 0.0 { 1.0 / v } else { 1.0 });
        Ok(Self {
            operator,
            mass,
            basis,
            gauge,
            settings: CgSettings::default(),
            inv_diag,
        })
    }

    pub fn with_settings(mut self, settings: CgSettings) -> Self {
        self.settings = settings;
        self
    }

    /// `<v, (A + M) v>^{1/2}`.
    pub fn h1_norm(&self, v: &Vector) -> f64 {
        (self.operator.bilinear(v, v) + self.mass.bilinear(v, v)).max(0.0).sqrt()
    }

    /// Preconditioned CG for `A x = b` with `b` orthogonal to the Killing
    /// fields. Residuals are kept Euclidean-orthogonal to the kernel and the
    /// preconditioned directions `L2`-orthogonal, which keeps the iterates in
    /// the `L2` complement of the Killing span.
    pub fn cg(&self, b: &Vector) -> Result<CgOutcome> {
        let n = b.len();
        let mut x = Vector::zeros(n);
        let mut r = b.clone();
        self.basis.remove_euclidean(&mut r);
        let bnorm = r.norm();
        let mut history = vec![if bnorm > 0.0 { 1.0 } else { 0.0 }];
        if bnorm == 0.0 {
            return Ok(CgOutcome {
                solution: x,
                iterations: 0,
                residual_history: history,
                max_drift: 0.0,
            });
        }
        let precondition = |r: &Vector| {
            let mut z = r.component_mul(&self.inv_diag);
            self.basis.remove_l2(&mut z, &self.mass);
            z
        };
        let mut z = precondition(&r);
        let mut p = z.clone();
        let mut rz = r.dot(&z);
        let mut ap = Vector::zeros(n);
        let mut max_drift = 0.0_f64;
        for it in 1..=self.settings.max_iterations {
            self.operator.mul_vec_into(&p, &mut ap);
            let pap = p.dot(&ap);
            if !(pap > 0.0) {
                return Err(Error::Degenerate(format!(
                    "search direction has non-positive curvature {pap:e}"
                )));
            }
            let alpha = rz / pap;
            x.axpy(alpha, &p, 1.0);
            r.axpy(-alpha, &ap, 1.0);
            self.basis.remove_euclidean(&mut r);
            let removed = self.basis.remove_l2(&mut x, &self.mass);
            let xn = x.amax();
            if xn > 0.0 {
                max_drift = max_drift.max(removed / xn);
            }
            let rel = r.norm() / bnorm;
            history.push(rel);
            if rel <= self.settings.rel_tol {
                return Ok(CgOutcome {
                    solution: x,
                    iterations: it,
                    residual_history: history,
                    max_drift,
                });
            }
            z = precondition(&r);
            let rz_new = r.dot(&z);
            let beta = rz_new / rz;
            rz = rz_new;
            p *= beta;
            p += &z;
        }
        Err(Error::CgNotConverged {
            iterations: self.settings.max_iterations,
            residual_history: history,
        })
    }

    /// Dopes `load`, solves and gauge-fixes.
    pub fn solve_load(&self, mesh: &Mesh, load: &Vector) -> Result<LinearSolution> {
        let dope = doping_coefficients(&self.basis, load);
        let doped = apply_doping(&self.basis, &self.mass, load, &dope.coefficients);
        let compatibility = self.basis.project_coefficients(&doped);
        let cg = self.cg(&doped)?;
        let mut psi = cg.solution.clone();
        self.gauge.apply(mesh, &self.basis, &mut psi);
        Ok(LinearSolution {
            psi,
            doping: dope.coefficients,
            sigma: dope.sigma,
            compatibility,
            cg,
        })
    }
}

/// Solves the flat pure-traction problem for body force and traction data.
pub fn solve_traction(mesh: &Mesh, solver: &FlatSolver, problem: &TractionProblem) -> Result<(DisplacementField, LinearSolution)> {
    let load = load_vector(mesh, problem);
    let sol = solver.solve_load(mesh, &load)?;
    Ok((DisplacementField::from_vector(mesh.dim(), sol.psi.clone()), sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_ball_mesh, generate_disk_mesh};

    #[test]
    fn zero_data_gives_zero() {
        let mesh = generate_disk_mesh(1.0, 0.25).unwrap();
        let solver = FlatSolver::new(&mesh).unwrap();
        let problem = TractionProblem::zero(&mesh).unwrap();
        let (psi, sol) = solve_traction(&mesh, &solver, &problem).unwrap();
        assert_eq!(psi.sup_norm(), 0.0);
        assert_eq!(sol.doping.amax(), 0.0);
    }

    #[test]
    fn killing_body_force_is_cancelled_by_doping() {
        let mesh = generate_disk_mesh(1.0, 0.2).unwrap();
        let solver = FlatSolver::new(&mesh).unwrap();
        let problem = TractionProblem::from_fns(&mesh, |_| vec![1.0, 0.0], |_, _| vec![0.0, 0.0]).unwrap();
        let (psi, sol) = solve_traction(&mesh, &solver, &problem).unwrap();
        assert!((sol.doping[0] + 1.0).abs() < 1e-12, "{}", sol.doping);
        assert!(sol.doping[1].abs() < 1e-12 && sol.doping[2].abs() < 1e-12);
        assert!(sol.compatibility.amax() < 1e-11);
        assert!(psi.sup_norm() < 1e-12);
    }

    #[test]
    fn gauge_systems_are_nonsingular() {
        for mesh in [generate_disk_mesh(1.0, 0.5).unwrap(), generate_ball_mesh(1.0, 0.5).unwrap()] {
            let solver = FlatSolver::new(&mesh).unwrap();
            let n = solver.basis.len();
            assert_eq!(solver.gauge.condition_matrix().shape(), (n, n));
            assert!(solver.gauge.condition_matrix().determinant().abs() > 0.5);
        }
    }

    #[test]
    fn gauge_fixing_removes_killing_part() {
        let mesh = generate_ball_mesh(1.0, 0.5).unwrap();
        let solver = FlatSolver::new(&mesh).unwrap();
        let c = Vector::from_vec(vec![0.3, -0.2, 0.1, 0.5, -0.4, 0.25]);
        let mut psi = solver.basis.combine(&c);
        solver.gauge.apply(&mesh, &solver.basis, &mut psi);
        assert!(psi.amax() < 1e-14);
    }

    #[test]
    fn origin_must_be_a_node() {
        let mesh = Mesh::from_cells(2, vec![1.0, 1.0, 2.0, 1.0, 1.0, 2.0], vec![0, 1, 2]).unwrap();
        assert!(matches!(FlatSolver::new(&mesh), Err(Error::OriginNotNode)));
    }

    #[test]
    fn cg_iterates_stay_killing_orthogonal() {
        let mesh = generate_disk_mesh(1.0, 0.2).unwrap();
        let solver = FlatSolver::new(&mesh).unwrap();
        let problem = TractionProblem::from_fns(
            &mesh,
            |y| vec![y[0] * y[1], (y[0] - y[1]).sin()],
            |y, _| vec![y[1], 0.5 * y[0] * y[0]],
        )
        .unwrap();
        let (_, sol) = solve_traction(&mesh, &solver, &problem).unwrap();
        assert!(sol.cg.max_drift < 1e-13, "{}", sol.cg.max_drift);
        assert!(sol.compatibility.amax() < 1e-11);
        assert!(*sol.cg.residual_history.last().unwrap() <= 1e-12);
    }
}
