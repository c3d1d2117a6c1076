//! The flat linearized pure-traction problem.

pub mod assemble;
pub mod killing;
pub mod solve;

pub use assemble::{assemble_flat_operator, assemble_mass, body_load, load_vector, traction_load};
pub use killing::{apply_doping, doping_coefficients, killing_field, killing_gradient, Doping, KillingBasis};
pub use solve::{solve_traction, CgOutcome, CgSettings, FlatSolver, Gauge, LinearSolution};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::mesh::{FacetQuadrature, Mesh, Quadrature};

/// Nodal coefficients of `psi`, node-major with `dim` entries per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub dim: usize,
    pub values: Vector,
}

impl DisplacementField {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            dim: mesh.dim(),
            values: Vector::zeros(mesh.n_nodes() * mesh.dim()),
        }
    }

    pub fn from_vector(dim: usize, values: Vector) -> Self {
        Self { dim, values }
    }

    /// Samples `f` at every node.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let d = mesh.dim();
        let mut values = Vector::zeros(mesh.n_nodes() * d);
        for n in 0..mesh.n_nodes() {
            let v = f(mesh.node(n));
            for a in 0..d {
                values[n * d + a] = v[a];
            }
        }
        Self { dim: d, values }
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn at_node(&self, n: usize) -> &[f64] {
        &self.values.as_slice()[n * self.dim..(n + 1) * self.dim]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.amax()
    }

    /// Linear interpolation inside cell `c` at barycentric coordinates `bary`.
    pub fn evaluate(&self, mesh: &Mesh, c: usize, bary: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&n, &l) in mesh.cell(c).iter().zip(bary) {
            for (a, o) in out.iter_mut().enumerate() {
                *o += l * self.values[n * self.dim + a];
            }
        }
        out
    }

    /// `(integral |psi - exact|^2)^{1/2}` with the given cell quadrature.
    pub fn l2_error(&self, mesh: &Mesh, quad: &Quadrature, exact: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
        let mut acc = 0.0;
        for c in 0..mesh.n_cells() {
            for q in 0..quad.points_per_cell() {
                let v = self.evaluate(mesh, c, quad.bary(q));
                let e = exact(quad.point(c, q));
                let d2: f64 = v.iter().zip(&e).map(|(a, b)| (a - b) * (a - b)).sum();
                acc += quad.weight(c, q) * d2;
            }
        }
        acc.sqrt()
    }
}

/// Body force per cell quadrature point and traction per boundary-facet
/// quadrature point, both in Euclidean components.
#[derive(Debug, Clone, PartialEq)]
pub struct TractionProblem {
    pub quadrature: Quadrature,
    pub body: Vec<f64>,
    pub facet_quadrature: FacetQuadrature,
    pub traction: Vec<f64>,
}

impl TractionProblem {
    pub fn zero(mesh: &Mesh) -> Result<Self> {
        Self::from_fns(mesh, |_| vec![0.0; mesh.dim()], |_, _| vec![0.0; mesh.dim()])
    }

    /// `rho(y)` and `tau(y, M)` with `M` the outward unit conormal of the
    /// facet containing `y`.
    pub fn from_fns(
        mesh: &Mesh,
        rho: impl Fn(&[f64]) -> Vec<f64>,
        tau: impl Fn(&[f64], &[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let d = mesh.dim();
        let quadrature = Quadrature::new(mesh, 2)?;
        let facet_quadrature = FacetQuadrature::new(mesh);
        let mut body = Vec::with_capacity(mesh.n_cells() * quadrature.points_per_cell() * d);
        for c in 0..mesh.n_cells() {
            for q in 0..quadrature.points_per_cell() {
                body.extend(rho(quadrature.point(c, q)));
            }
        }
        let mut traction = Vec::with_capacity(facet_quadrature.n_facets() * facet_quadrature.points_per_facet() * d);
        for f in 0..facet_quadrature.n_facets() {
            for q in 0..facet_quadrature.points_per_facet() {
                traction.extend(tau(facet_quadrature.point(f, q), mesh.conormal(f)));
            }
        }
        let expected_body = mesh.n_cells() * quadrature.points_per_cell() * d;
        let expected_traction = facet_quadrature.n_facets() * facet_quadrature.points_per_facet() * d;
        if body.len() != expected_body || traction.len() != expected_traction {
            return Err(Error::Precondition("load functions must return one value per component".into()));
        }
        if body.iter().chain(&traction).any(|v| !v.is_finite()) {
            return Err(Error::Precondition("load data must be finite".into()));
        }
        Ok(Self {
            quadrature,
            body,
            facet_quadrature,
            traction,
        })
    }
}
