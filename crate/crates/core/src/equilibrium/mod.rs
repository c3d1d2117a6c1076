//! The nonlinear equilibrium problem: discrete energy, its gradient, the
//! doped frozen-Hessian iteration and similarity rescaling.

mod iterate;
mod report;
mod scaling;

pub use iterate::{outer_iteration, residual_split, solve_screw_3d, ResidualSplit};
pub use report::{IterationReport, IterationRow};
pub use scaling::{rescale_solution, Rescaled};

use rayon::prelude::*;

use crate::constitutive::{EnergyModel, StressTensors};
use crate::error::{Error, Result};
use crate::geometry::{Chart, HyperbolicMetric, MaterialFrame, MetricField, StructureConstants};
use crate::linalg::{orthonormal_frame, Mat, Vector};
use crate::linear::{CgSettings, DisplacementField, FlatSolver};
use crate::mesh::{Mesh, Quadrature};

/// Where the metric and crystalline frame at a mesh point come from.
#[derive(Debug, Clone)]
pub enum MaterialSource {
    /// Euclidean metric, identity frame.
    Flat,
    /// Hyperbolic plane of curvature `-epsilon^2` in normal coordinates,
    /// with the Cholesky orthonormal frame (sufficient for isotropic energies).
    Hyperbolic { epsilon: f64 },
    /// Heisenberg group in Riemannian normal coordinates with the
    /// left-invariant frame pushed through the chart.
    HeisenbergChart { chart: Chart },
}

impl MaterialSource {
    pub fn heisenberg(beta: f64) -> Self {
        MaterialSource::HeisenbergChart {
            chart: Chart::new(beta, [0.0; 3]),
        }
    }

    /// Frame and `sqrt(det h)` at a point.
    pub fn sample(&self, y: &[f64]) -> Result<(Mat, f64)> {
        match self {
            MaterialSource::Flat => Ok((Mat::identity(y.len(), y.len()), 1.0)),
            MaterialSource::Hyperbolic { epsilon } => {
                let h = HyperbolicMetric::new(*epsilon)?.metric_at(y);
                Ok((orthonormal_frame(&h)?, h.determinant().sqrt()))
            }
            MaterialSource::HeisenbergChart { chart } => {
                let s = chart.sample(y)?;
                Ok((s.frame.frame, s.metric.determinant().sqrt()))
            }
        }
    }

    pub fn material_frame(&self, y: &[f64]) -> Result<MaterialFrame> {
        match self {
            MaterialSource::HeisenbergChart { chart } => chart.frame(y),
            _ => {
                let (e, _) = self.sample(y)?;
                MaterialFrame::from_frame(e, StructureConstants::zero(y.len()))
            }
        }
    }

    fn dim(&self) -> Option<usize> {
        match self {
            MaterialSource::Flat => None,
            MaterialSource::Hyperbolic { .. } => Some(2),
            MaterialSource::HeisenbergChart { .. } => Some(3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Bound on the `H1` increment, the projected residual and the doping
    /// coefficients at convergence.
    pub outer_tol: f64,
    /// Relative residual of each CG solve.
    pub linear_tol: f64,
    pub max_outer: usize,
    pub max_linear: usize,
    /// Increment halvings allowed when an update inverts an element.
    pub max_halvings: usize,
    /// Largest admissible curvature parameter.
    pub epsilon_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            outer_tol: 1e-10,
            linear_tol: 1e-12,
            max_outer: 50,
            max_linear: 20_000,
            max_halvings: 10,
            epsilon_max: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub mesh: Mesh,
    pub material: MaterialSource,
    pub model: EnergyModel,
    pub tolerances: Tolerances,
    /// Cell quadrature order for the energy (1, 2 or 4).
    pub quadrature_order: usize,
}

impl ProblemSpec {
    pub fn new(mesh: Mesh, material: MaterialSource, model: EnergyModel) -> Self {
        Self {
            mesh,
            material,
            model,
            tolerances: Tolerances::default(),
            quadrature_order: 2,
        }
    }

    pub fn with_tolerances(mut self, tolerances: Tolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.mesh.dim();
        if let Some(md) = self.material.dim() {
            if md != d {
                return Err(Error::Precondition(format!(
                    "material manifold has dimension {md} but the mesh has dimension {d}"
                )));
            }
        }
        self.model.check_dim(d)?;
        if let MaterialSource::Hyperbolic { epsilon } = self.material {
            if !(0.0..=self.tolerances.epsilon_max).contains(&epsilon) {
                return Err(Error::Precondition(format!(
                    "epsilon = {epsilon} outside the admissible range [0, {}]",
                    self.tolerances.epsilon_max
                )));
            }
        }
        if let MaterialSource::HeisenbergChart { chart } = &self.material {
            for n in 0..self.mesh.n_nodes() {
                chart.check_domain(self.mesh.node(n))?;
            }
        }
        let t = &self.tolerances;
        if !(t.outer_tol > 0.0 && t.linear_tol > 0.0 && t.max_outer > 0) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Samples the material at every quadrature point and assembles the
    /// flat solver.
    pub fn prepare(self) -> Result<Problem> {
        self.validate()?;
        let quad = Quadrature::new(&self.mesh, self.quadrature_order)?;
        let nq = quad.points_per_cell();
        let cells: Vec<CellData> = (0..self.mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let mut frames = Vec::with_capacity(nq);
                let mut weights = Vec::with_capacity(nq);
                for q in 0..nq {
                    let (e, sqrt_det) = self.material.sample(quad.point(c, q))?;
                    frames.push(e);
                    weights.push(quad.weight(c, q) * sqrt_det);
                }
                Ok(CellData {
                    grads: self.mesh.shape_gradients(c),
                    frames,
                    weights,
                })
            })
            .collect::<Result<_>>()?;
        let solver = FlatSolver::new(&self.mesh)?.with_settings(CgSettings {
            rel_tol: self.tolerances.linear_tol,
            max_iterations: self.tolerances.max_linear,
        });
        Ok(Problem {
            spec: self,
            cells,
            solver,
        })
    }
}

#[derive(Debug, Clone)]
struct CellData {
    /// Rows are the shape-function gradients.
    grads: Mat,
    frames: Vec<Mat>,
    /// Quadrature weight times `sqrt(det h)`.
    weights: Vec<f64>,
}

/// A validated problem with the material sampled at quadrature points.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    cells: Vec<CellData>,
    pub solver: FlatSolver,
}

/// Gradient of the discrete energy with its Killing moments.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakResidual {
    pub gradient: Vector,
    /// Euclidean products of the gradient with the nodal Killing fields.
    pub killing_moments: Vector,
    /// Norm of the gradient after removing its Killing component.
    pub projected_norm: f64,
}

/// Per-cell stresses and energy density, evaluated at the centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStress {
    /// Material stress `S^{ab}`.
    pub s: Mat,
    /// Spatial stress `T^{ij}`.
    pub t: Mat,
    pub energy_density: f64,
}

/// Result of comparing the gradient against central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    pub max_error: f64,
    pub max_gradient: f64,
}

impl GradientCheck {
    pub fn relative(&self) -> f64 {
        if self.max_gradient > 0.0 {
            self.max_error / self.max_gradient
        } else {
            self.max_error
        }
    }
}

impl Problem {
    pub fn mesh(&self) -> &Mesh {
        &self.spec.mesh
    }

    pub fn dim(&self) -> usize {
        self.spec.mesh.dim()
    }

    /// `I + grad psi` on cell `c`; `(i, a)` entry is `d phi^i / d y^a`.
    pub fn deformation_gradient(&self, c: usize, psi: &[f64]) -> Mat {
        let d = self.dim();
        let grads = &self.cells[c].grads;
        let mut f = Mat::identity(d, d);
        for (k, &n) in self.spec.mesh.cell(c).iter().enumerate() {
            for i in 0..d {
                let v = psi[n * d + i];
                for a in 0..d {
                    f[(i, a)] += v * grads[(k, a)];
                }
            }
        }
        f
    }

    fn checked_gradient(&self, c: usize, psi: &[f64]) -> Result<Mat> {
        let f = self.deformation_gradient(c, psi);
        let det = f.determinant();
        if !(det > 0.0) {
            return Err(Error::InvertedElement { cell: c, det });
        }
        Ok(f)
    }

    /// Energy of cell `c`.
    pub fn cell_energy(&self, c: usize, psi: &[f64]) -> Result<f64> {
        let f = self.checked_gradient(c, psi)?;
        let m = f.transpose() * &f;
        let cell = &self.cells[c];
        let mut e = 0.0;
        for (frame, w) in cell.frames.iter().zip(&cell.weights) {
            let gamma = frame.transpose() * &m * frame;
            e += w * self.spec.model.energy_unchecked(&gamma);
        }
        Ok(e)
    }

    /// `E_h = sum over cells and quadrature points of w e(gamma) sqrt(det h)`.
    pub fn energy(&self, psi: &DisplacementField) -> Result<f64> {
        let v = psi.values.as_slice();
        let per_cell: Vec<f64> = (0..self.spec.mesh.n_cells())
            .into_par_iter()
            .map(|c| self.cell_energy(c, v))
            .collect::<Result<_>>()?;
        Ok(per_cell.iter().sum())
    }

    /// `dE_h / dpsi` assembled in cell order.
    pub fn gradient(&self, psi: &DisplacementField) -> Result<Vector> {
        let d = self.dim();
        let v = psi.values.as_slice();
        let per_cell: Vec<Mat> = (0..self.spec.mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let f = self.checked_gradient(c, v)?;
                let m = f.transpose() * &f;
                let cell = &self.cells[c];
                let mut p = Mat::zeros(d, d);
                for (frame, w) in cell.frames.iter().zip(&cell.weights) {
                    let gamma = frame.transpose() * &m * frame;
                    let g = self.spec.model.gradient_unchecked(&gamma);
                    p += frame * g * frame.transpose() * (2.0 * w);
                }
                Ok(f * p)
            })
            .collect::<Result<_>>()?;
        let mut out = Vector::zeros(v.len());
        for (c, p) in per_cell.iter().enumerate() {
            let grads = &self.cells[c].grads;
            for (k, &n) in self.spec.mesh.cell(c).iter().enumerate() {
                for i in 0..d {
                    let mut acc = 0.0;
                    for a in 0..d {
                        acc += p[(i, a)] * grads[(k, a)];
                    }
                    out[n * d + i] += acc;
                }
            }
        }
        Ok(out)
    }

    pub fn weak_residual(&self, psi: &DisplacementField) -> Result<WeakResidual> {
        let gradient = self.gradient(psi)?;
        let killing_moments = self.solver.basis.project_coefficients(&gradient);
        let mut projected = gradient.clone();
        self.solver.basis.remove_euclidean(&mut projected);
        Ok(WeakResidual {
            gradient,
            killing_moments,
            projected_norm: projected.norm(),
        })
    }

    /// Central differences of the energy of the cells around each node.
    pub fn gradient_check(&self, psi: &DisplacementField, step: f64) -> Result<GradientCheck> {
        let d = self.dim();
        let g = self.gradient(psi)?;
        let errors: Vec<f64> = (0..self.spec.mesh.n_nodes())
            .into_par_iter()
            .map(|n| {
                let mut v = psi.values.as_slice().to_vec();
                let mut worst = 0.0_f64;
                for i in 0..d {
                    let k = n * d + i;
                    let x0 = v[k];
                    let patch = |v: &[f64]| -> Result<f64> {
                        self.spec.mesh.cells_of_node(n).iter().map(|&c| self.cell_energy(c, v)).sum()
                    };
                    v[k] = x0 + step;
                    let ep = patch(&v)?;
                    v[k] = x0 - step;
                    let em = patch(&v)?;
                    v[k] = x0;
                    worst = worst.max(((ep - em) / (2.0 * step) - g[k]).abs());
                }
                Ok(worst)
            })
            .collect::<Result<_>>()?;
        Ok(GradientCheck {
            max_error: errors.into_iter().fold(0.0, f64::max),
            max_gradient: g.amax(),
        })
    }

    pub fn cell_stresses(&self, psi: &DisplacementField) -> Result<Vec<CellStress>> {
        let v = psi.values.as_slice();
        (0..self.spec.mesh.n_cells())
            .into_par_iter()
            .map(|c| {
                let f = self.checked_gradient(c, v)?;
                let y = self.spec.mesh.cell_centroid(c);
                let frame = self.spec.material.material_frame(&y)?;
                let st = StressTensors::compute(&self.spec.model, &frame, &f)?;
                let m = f.transpose() * &f;
                let gamma = frame.frame.transpose() * m * &frame.frame;
                Ok(CellStress {
                    s: st.s,
                    t: st.t,
                    energy_density: self.spec.model.energy_unchecked(&gamma),
                })
            })
            .collect()
    }

    /// `<v, (A + M) v>^{1/2}`.
    pub fn h1_norm(&self, v: &Vector) -> f64 {
        self.solver.h1_norm(v)
    }
}

/// `E_h(psi)`.
pub fn discrete_energy(problem: &Problem, psi: &DisplacementField) -> Result<f64> {
    problem.energy(psi)
}

/// Gradient of [`discrete_energy`] and its Killing moments.
pub fn weak_residual(problem: &Problem, psi: &DisplacementField) -> Result<WeakResidual> {
    problem.weak_residual(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_ball_mesh, generate_disk_mesh};
    use std::f64::consts::PI;

    fn disk(epsilon: f64, h: f64) -> Problem {
        let mesh = generate_disk_mesh(1.0, h).unwrap();
        ProblemSpec::new(mesh, MaterialSource::Hyperbolic { epsilon }, EnergyModel::Isotropic)
            .prepare()
            .unwrap()
    }

    fn wavy(mesh: &Mesh, amp: f64) -> DisplacementField {
        DisplacementField::from_fn(mesh, |y| {
            let z = if y.len() == 3 { y[2] } else { 0.0 };
            let mut v = vec![
                amp * (3.0 * y[0] + 1.3 * y[1] + z).sin(),
                amp * (2.0 * y[0] - y[1] * y[1]).cos(),
            ];
            if y.len() == 3 {
                v.push(amp * (y[0] * y[1] - 2.0 * z).sin());
            }
            v
        })
    }

    #[test]
    fn flat_identity_has_zero_energy_and_gradient() {
        let p = disk(0.0, 0.2);
        let psi = DisplacementField::zeros(p.mesh());
        assert_eq!(p.energy(&psi).unwrap(), 0.0);
        assert_eq!(p.gradient(&psi).unwrap().amax(), 0.0);
    }

    #[test]
    fn uniform_dilation_energy() {
        let p = disk(0.0, 0.05);
        let psi = DisplacementField::from_fn(p.mesh(), |y| vec![0.1 * y[0], 0.1 * y[1]]);
        let e = p.energy(&psi).unwrap();
        // e = 1/2 * 2 * (1.21 - 1)^2 per unit area, times the polygon area.
        let exact = p.mesh().total_volume() * 0.0441;
        assert!((e - exact).abs() < 1e-13, "{e} vs {exact}");
        assert!((e - PI * 0.0441).abs() < 2e-3);
    }

    #[test]
    fn curvature_makes_identity_stressed() {
        let p = disk(0.1, 0.2);
        let psi = DisplacementField::zeros(p.mesh());
        assert!(p.energy(&psi).unwrap() > 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = disk(0.1, 0.2);
        let psi = wavy(p.mesh(), 1e-3);
        let check = p.gradient_check(&psi, 1e-6).unwrap();
        assert!(check.relative() < 1e-6, "{check:?}");
    }

    #[test]
    fn anisotropic_gradient_matches_central_differences() {
        let mesh = generate_ball_mesh(0.2, 0.1).unwrap();
        let model = EnergyModel::anisotropic(1.0, 1.0).unwrap();
        let p = ProblemSpec::new(mesh, MaterialSource::heisenberg(0.1), model).prepare().unwrap();
        let psi = wavy(p.mesh(), 1e-3);
        let check = p.gradient_check(&psi, 1e-7).unwrap();
        assert!(check.relative() < 1e-6, "{check:?}");
    }

    #[test]
    fn flat_gradient_is_killing_orthogonal() {
        let p = disk(0.0, 0.2);
        let psi = wavy(p.mesh(), 1e-2);
        let r = p.weak_residual(&psi).unwrap();
        // Translations are exact symmetries; rotations hold to first order
        // in psi only, so test the rotated displacement instead.
        assert!(r.killing_moments[0].abs() < 1e-14 && r.killing_moments[1].abs() < 1e-14);
        let mut rotated = psi.clone();
        let v = psi.values.as_slice();
        for n in 0..p.mesh().n_nodes() {
            let y = p.mesh().node(n);
            let phi = [y[0] + v[2 * n], y[1] + v[2 * n + 1]];
            rotated.values[2 * n] = -phi[1];
            rotated.values[2 * n + 1] = phi[0];
        }
        let dot = r.gradient.dot(&rotated.values);
        assert!(dot.abs() < 1e-11 * r.gradient.norm().max(1.0), "{dot}");
    }

    #[test]
    fn inverted_element_is_named() {
        let p = disk(0.0, 0.5);
        let mut psi = DisplacementField::zeros(p.mesh());
        let c = 3;
        let n = p.mesh().cell(c)[0];
        let target = p.mesh().cell_centroid(c);
        let y = p.mesh().node(n).to_vec();
        for a in 0..2 {
            psi.values[2 * n + a] = 3.0 * (target[a] - y[a]);
        }
        match p.energy(&psi) {
            Err(Error::InvertedElement { cell, det }) => {
                assert!(p.mesh().cells_of_node(n).contains(&cell));
                assert!(det <= 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_and_range_are_rejected() {
        let mesh = generate_disk_mesh(1.0, 0.5).unwrap();
        assert!(ProblemSpec::new(mesh.clone(), MaterialSource::heisenberg(0.0), EnergyModel::Isotropic)
            .prepare()
            .is_err());
        assert!(ProblemSpec::new(mesh.clone(), MaterialSource::Flat, EnergyModel::Anisotropic { alpha: 1.0, beta_w: 1.0 })
            .prepare()
            .is_err());
        assert!(ProblemSpec::new(mesh, MaterialSource::Hyperbolic { epsilon: 0.5 }, EnergyModel::Isotropic)
            .prepare()
            .is_err());
        let big = generate_ball_mesh(1.0, 0.5).unwrap();
        assert!(matches!(
            ProblemSpec::new(big, MaterialSource::heisenberg(0.1), EnergyModel::Isotropic).prepare(),
            Err(Error::ChartDomain { .. })
        ));
    }

    #[test]
    fn stresses_vanish_at_relaxed_flat_state() {
        let p = disk(0.0, 0.5);
        let s = p.cell_stresses(&DisplacementField::zeros(p.mesh())).unwrap();
        assert!(s.iter().all(|c| c.s.amax() == 0.0 && c.t.amax() == 0.0 && c.energy_density == 0.0));
    }
}
