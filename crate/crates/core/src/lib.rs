//! Equilibrium configurations of crystalline solids carrying a uniform,
//! continuous distribution of dislocations.
//!
//! The material manifold is a Lie group with a left-invariant metric: the
//! affine group (hyperbolic plane, edge dislocations) or the Heisenberg group
//! (screw dislocations). A configuration is a mapping `phi = id + psi` of a
//! domain in the material manifold into Euclidean space, and the equilibrium
//! is the critical point of the elastic energy
//!
//! ```text
//!     E[phi] = integral over Omega of e(gamma) dmu
//! ```
//!
//! where `gamma_AB = E_A^a E_B^b (dphi^T dphi)_ab` is the pull-back of the
//! Euclidean metric onto the crystalline frame. The solver linearizes at the
//! identity, keeps the flat (zero-curvature) operator fixed and iterates
//! against the full nonlinear residual. Every linear solve is a pure-traction
//! problem, so each right-hand side is made compatible by adding a combination
//! of Euclidean Killing fields to the body force ("doping"); at the fixed point
//! those coefficients vanish.
//!
//! Module map:
//!
//! * [`geometry`]: frames, dislocation densities, Burgers circuits, the
//!   hyperbolic metric in normal coordinates and the Heisenberg normal chart.
//! * [`constitutive`]: energy densities, stresses, Legendre-Hadamard and
//!   characteristic-speed diagnostics.
//! * [`mesh`]: simplicial meshes, generators, quadrature and the mesh file
//!   format.
//! * [`linear`]: the flat pure-traction problem (Killing basis, doping,
//!   kernel-projected CG, gauge fixing).
//! * [`equilibrium`]: discrete energy, weak residual, the outer iteration and
//!   the similarity rescaling.

pub mod constitutive;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod linear;
pub mod mesh;

pub use constitutive::{Configuration, EnergyModel, StressTensors};
pub use equilibrium::{
    outer_iteration, solve_screw_3d, IterationReport, MaterialSource, ProblemSpec, Tolerances,
};
pub use error::{Error, MeshError, Result};
pub use geometry::{Chart, FrameField, MaterialFrame, MetricField};
pub use linear::{DisplacementField, KillingBasis, TractionProblem};
pub use mesh::Mesh;
