//! Assembly of the flat operator, the mass matrix and load vectors.

use rayon::prelude::*;

use crate::linalg::{CsrMatrix, Vector};
use crate::linear::TractionProblem;
use crate::mesh::{FacetQuadrature, Mesh, Quadrature};

type Triplet = (usize, usize, f64);

/// Collects per-cell triplets in parallel and concatenates them in cell
/// order, so the assembled matrix does not depend on the thread count.
fn assemble_cells(mesh: &Mesh, element: impl Fn(usize) -> Vec<Triplet> + Sync + Send) -> CsrMatrix {
    let n = mesh.n_nodes() * mesh.dim();
    let per_cell: Vec<Vec<Triplet>> = (0..mesh.n_cells()).into_par_iter().map(element).collect();
    let triplets: Vec<Triplet> = per_cell.into_iter().flatten().collect();
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Hessian at the identity of the flat toy energy
/// `sum_cells vol * 1/2 |gamma - I|^2`, `gamma = (I + grad psi)^T (I + grad psi)`:
/// `psi^T A psi = integral |grad psi + grad psi^T|^2`.
pub fn assemble_flat_operator(mesh: &Mesh) -> CsrMatrix {
    let d = mesh.dim();
    assemble_cells(mesh, |c| {
        let g = mesh.shape_gradients(c);
        let vol = mesh.cell_volume(c);
        let cell = mesh.cell(c);
        let mut out = Vec::with_capacity((d + 1) * (d + 1) * d * d);
        for (i, &ni) in cell.iter().enumerate() {
            for (j, &nj) in cell.iter().enumerate() {
                let mut dot = 0.0;
                for a in 0..d {
                    dot += g[(i, a)] * g[(j, a)];
                }
                for a in 0..d {
                    for b in 0..d {
                        let mut v = 2.0 * g[(i, b)] * g[(j, a)];
                        if a == b {
                            v += 2.0 * dot;
                        }
                        out.push((ni * d + a, nj * d + b, vol * v));
                    }
                }
            }
        }
        out
    })
}

/// Consistent mass matrix of vector-valued piecewise-linear fields.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    let d = mesh.dim();
    let denom = ((d + 1) * (d + 2)) as f64;
    assemble_cells(mesh, |c| {
        let vol = mesh.cell_volume(c);
        let cell = mesh.cell(c);
        let mut out = Vec::with_capacity((d + 1) * (d + 1) * d);
        for (i, &ni) in cell.iter().enumerate() {
            for (j, &nj) in cell.iter().enumerate() {
                let m = vol * if i == j { 2.0 } else { 1.0 } / denom;
                for a in 0..d {
                    out.push((ni * d + a, nj * d + a, m));
                }
            }
        }
        out
    })
}

/// `F_rho[n, a] = integral N_n rho^a` with the problem's cell quadrature.
pub fn body_load(mesh: &Mesh, quad: &Quadrature, body: &[f64]) -> Vector {
    let d = mesh.dim();
    let nq = quad.points_per_cell();
    let mut f = Vector::zeros(mesh.n_nodes() * d);
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell(c);
        for q in 0..nq {
            let w = quad.weight(c, q);
            let bary = quad.bary(q);
            let rho = &body[(c * nq + q) * d..(c * nq + q + 1) * d];
            for (i, &n) in cell.iter().enumerate() {
                for a in 0..d {
                    f[n * d + a] += w * bary[i] * rho[a];
                }
            }
        }
    }
    f
}

/// `F_tau[n, a] = integral over the boundary of N_n tau^a`.
pub fn traction_load(mesh: &Mesh, fq: &FacetQuadrature, traction: &[f64]) -> Vector {
    let d = mesh.dim();
    let nq = fq.points_per_facet();
    let mut f = Vector::zeros(mesh.n_nodes() * d);
    for (k, facet) in mesh.boundary_facets().iter().enumerate() {
        for q in 0..nq {
            let w = fq.weight(k, q);
            let bary = fq.bary(q);
            let tau = &traction[(k * nq + q) * d..(k * nq + q + 1) * d];
            for (i, &n) in facet.nodes.iter().enumerate() {
                for a in 0..d {
                    f[n * d + a] += w * bary[i] * tau[a];
                }
            }
        }
    }
    f
}

/// Load vector of the flat pure-traction problem,
/// `b = 2 (F_tau - F_rho)`, matching the normalization of
/// [`assemble_flat_operator`].
pub fn load_vector(mesh: &Mesh, problem: &TractionProblem) -> Vector {
    let fb = body_load(mesh, &problem.quadrature, &problem.body);
    let ft = traction_load(mesh, &problem.facet_quadrature, &problem.traction);
    (ft - fb) * 2.0
}
