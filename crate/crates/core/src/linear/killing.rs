//! Euclidean Killing fields and doping.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::linalg::{check_spd, CsrMatrix, Mat, Vector};
use crate::mesh::{Mesh, Quadrature};

/// Translations `e_1..e_d` followed by infinitesimal rotations of the
/// coordinate planes `(p, q)` in lexicographic order, `xi^p = -y^q`,
/// `xi^q = y^p`.
#[derive(Debug, Clone)]
pub struct KillingBasis {
    dim: usize,
    /// Nodal samples, one vector per field (node-major, `dim` per node).
    nodal: Vec<Vector>,
    gram: Mat,
    gram_chol: Cholesky<f64, nalgebra::Dyn>,
}

/// Rotation planes in lexicographic order.
pub fn rotation_planes(dim: usize) -> Vec<(usize, usize)> {
    let mut planes = Vec::new();
    for p in 0..dim {
        for q in (p + 1)..dim {
            planes.push((p, q));
        }
    }
    planes
}

/// Value of Killing field `k` at `y`.
pub fn killing_field(dim: usize, k: usize, y: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    if k < dim {
        v[k] = 1.0;
    } else {
        let (p, q) = rotation_planes(dim)[k - dim];
        v[p] = -y[q];
        v[q] = y[p];
    }
    v
}

/// `d xi^i / d y^a` of Killing field `k` (constant).
pub fn killing_gradient(dim: usize, k: usize) -> Mat {
    let mut g = Mat::zeros(dim, dim);
    if k >= dim {
        let (p, q) = rotation_planes(dim)[k - dim];
        g[(p, q)] = -1.0;
        g[(q, p)] = 1.0;
    }
    g
}

impl KillingBasis {
    pub fn new(mesh: &Mesh) -> Result<Self> {
        let d = mesh.dim();
        let n = d * (d + 1) / 2;
        let nodal: Vec<Vector> = (0..n)
            .map(|k| {
                let mut v = Vector::zeros(mesh.n_nodes() * d);
                for node in 0..mesh.n_nodes() {
                    let f = killing_field(d, k, mesh.node(node));
                    for a in 0..d {
                        v[node * d + a] = f[a];
                    }
                }
                v
            })
            .collect();
        let quad = Quadrature::new(mesh, 2)?;
        let mut gram = Mat::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = quad.integrate(|y| {
                    let fa = killing_field(d, a, y);
                    let fb = killing_field(d, b, y);
                    fa.iter().zip(&fb).map(|(x, z)| x * z).sum()
                });
                gram[(a, b)] = v;
                gram[(b, a)] = v;
            }
        }
        check_spd(&gram, "Killing gram matrix")?;
        let gram_chol = gram.clone().cholesky().ok_or(Error::NotSpd("Killing gram matrix"))?;
        Ok(Self {
            dim: d,
            nodal,
            gram,
            gram_chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of fields, `dim (dim + 1) / 2`.
    pub fn len(&self) -> usize {
        self.nodal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodal.is_empty()
    }

    pub fn nodal(&self, k: usize) -> &Vector {
        &self.nodal[k]
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn solve_gram(&self, rhs: &Vector) -> Vector {
        self.gram_chol.solve(rhs)
    }

    /// `K^T v`.
    pub fn project_coefficients(&self, v: &Vector) -> Vector {
        Vector::from_iterator(self.len(), self.nodal.iter().map(|k| k.dot(v)))
    }

    /// `sum_A c_A k_A`.
    pub fn combine(&self, c: &Vector) -> Vector {
        let mut out = Vector::zeros(self.nodal[0].len());
        for (k, &ca) in self.nodal.iter().zip(c.iter()) {
            out.axpy(ca, k, 1.0);
        }
        out
    }

    /// Removes the Euclidean projection onto the Killing span.
    pub fn remove_euclidean(&self, v: &mut Vector) {
        let kt = self.project_coefficients(v);
        let mut kk = Mat::zeros(self.len(), self.len());
        for a in 0..self.len() {
            for b in 0..self.len() {
                kk[(a, b)] = self.nodal[a].dot(&self.nodal[b]);
            }
        }
        let c = kk.cholesky().expect("Killing fields are independent").solve(&kt);
        *v -= self.combine(&c);
    }

    /// Removes the `L2`-orthogonal projection onto the Killing span, using
    /// the consistent mass matrix. Returns the size of the removed part.
    pub fn remove_l2(&self, v: &mut Vector, mass: &CsrMatrix) -> f64 {
        let c = self.solve_gram(&self.project_coefficients(&mass.mul_vec(v)));
        let corr = self.combine(&c);
        *v -= &corr;
        corr.amax()
    }
}

/// Doping coefficients of a load vector `b = 2 (F_tau - F_rho)`:
/// `sigma_A = 1/2 k_A^T b` and `c = gram^{-1} sigma`.
#[derive(Debug, Clone, PartialEq)]
pub struct Doping {
    pub coefficients: Vector,
    pub sigma: Vector,
}

pub fn doping_coefficients(basis: &KillingBasis, load: &Vector) -> Doping {
    let sigma = basis.project_coefficients(load) * 0.5;
    let coefficients = basis.solve_gram(&sigma);
    Doping {
        coefficients,
        sigma,
    }
}

/// `b' = b - 2 sum_A c_A M k_A`: the load of the body force
/// `rho + sum_A c_A xi_A`.
pub fn apply_doping(basis: &KillingBasis, mass: &CsrMatrix, load: &Vector, c: &Vector) -> Vector {
    load - mass.mul_vec(&basis.combine(c)) * 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_disk_mesh;
    use std::f64::consts::PI;

    #[test]
    fn sizes() {
        let m2 = generate_disk_mesh(1.0, 0.5).unwrap();
        assert_eq!(KillingBasis::new(&m2).unwrap().len(), 3);
        let m3 = crate::mesh::generate_ball_mesh(1.0, 0.5).unwrap();
        assert_eq!(KillingBasis::new(&m3).unwrap().len(), 6);
    }

    #[test]
    fn fields_are_killing() {
        for d in [2, 3] {
            for k in 0..d * (d + 1) / 2 {
                let g = killing_gradient(d, k);
                assert_eq!(&g + g.transpose(), Mat::zeros(d, d));
                // Gradient agrees with the field.
                let y = [0.3, -0.7, 1.1];
                let f0 = killing_field(d, k, &y[..d]);
                for a in 0..d {
                    let mut yp = y;
                    yp[a] += 1.0;
                    let f1 = killing_field(d, k, &yp[..d]);
                    for i in 0..d {
                        assert_eq!(f1[i] - f0[i], g[(i, a)]);
                    }
                }
            }
        }
    }

    #[test]
    fn unit_disk_gram() {
        let m = generate_disk_mesh(1.0, 0.05).unwrap();
        let b = KillingBasis::new(&m).unwrap();
        let g = b.gram();
        let area = m.total_volume();
        assert!((g[(0, 0)] - area).abs() < 1e-12);
        assert!((g[(0, 0)] - PI).abs() < 5e-3);
        assert!((g[(2, 2)] - PI / 2.0).abs() < 5e-3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!(g[(i, j)].abs() < 1e-12, "{i}{j}: {}", g[(i, j)]);
        }
    }
}
