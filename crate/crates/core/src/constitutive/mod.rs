//! Stored-energy functions of the crystalline configuration and the stresses
//! derived from them.
//!
//! Frame-index tensors are stored with all indices down. The relaxed inner
//! product is the identity, so raising and lowering frame indices is trivial.
//! Derivatives with respect to `gamma` follow the symmetric-matrix
//! convention `d gamma_AB / d gamma_CD = (delta_AC delta_BD + delta_AD delta_BC) / 2`,
//! i.e. the gradient `G` satisfies `de = sum_AB G_AB dgamma_AB` for symmetric
//! `dgamma` and is itself symmetric.

pub mod diagnostics;
pub mod stress;

pub use diagnostics::{
    characteristic_speeds, legendre_hadamard, rank_one_form, FourIndex, LegendreHadamard,
    SpeedReport,
};
pub use stress::{material_stress, spatial_stress, thermodynamic_stress, StressTensors};

use crate::error::{Error, Result};
use crate::geometry::MaterialFrame;
use crate::linalg::{check_spd, sym_eigenvalues, Mat};

/// The inner product `gamma_AB` induced on the crystalline structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    gamma: Mat,
}

impl Configuration {
    pub fn new(gamma: Mat) -> Result<Self> {
        let scale = gamma.amax().max(1.0);
        if crate::linalg::asymmetry(&gamma) > 1e-14 * scale {
            return Err(Error::Precondition("configuration is not symmetric".into()));
        }
        check_spd(&gamma, "configuration")?;
        Ok(Self { gamma })
    }

    /// Skips validation; for hot loops where `gamma` is `E^T m E` with a
    /// deformation gradient already known to be non-degenerate.
    pub fn new_unchecked(gamma: Mat) -> Self {
        Self { gamma }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            gamma: Mat::identity(dim, dim),
        }
    }

    pub fn gamma(&self) -> &Mat {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    /// Eigenvalues relative to the identity, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigenvalues(&self.gamma)
    }

    /// Volume factor `V = sqrt(det gamma)`.
    pub fn volume(&self) -> f64 {
        self.gamma.determinant().sqrt()
    }
}

/// `gamma_AB = E_A^a E_B^b m_ab`.
pub fn configuration(frame: &MaterialFrame, m: &Mat) -> Result<Configuration> {
    check_spd(m, "pulled-back metric")?;
    let e = &frame.frame;
    Configuration::new(crate::linalg::symmetrize(&(e.transpose() * m * e)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyModel {
    /// `e = 1/2 sum (lambda_k - 1)^2 = 1/2 |gamma - I|^2`.
    Isotropic,
    /// `e = 1/2 ((mu_1 - 1)^2 + (mu_2 - 1)^2) + alpha/2 |theta|^2 + beta_w/2 (rho - 1)^2`
    /// with `mu` the eigenvalues of the upper 2x2 block, `theta_A = gamma_A3`
    /// and `rho = gamma_33`. Three dimensions only.
    Anisotropic { alpha: f64, beta_w: f64 },
}

impl EnergyModel {
    pub fn anisotropic(alpha: f64, beta_w: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite() && beta_w >= 0.0 && beta_w.is_finite()) {
            return Err(Error::Precondition(format!(
                "anisotropic coefficients must be finite and >= 0, got alpha={alpha}, beta_w={beta_w}"
            )));
        }
        Ok(Self::Anisotropic { alpha, beta_w })
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            EnergyModel::Isotropic if dim == 2 || dim == 3 => Ok(()),
            EnergyModel::Anisotropic { .. } if dim == 3 => Ok(()),
            _ => Err(Error::Precondition(format!(
                "{self:?} energy is not defined in dimension {dim}"
            ))),
        }
    }

    pub fn energy(&self, c: &Configuration) -> Result<f64> {
        self.check_dim(c.dim())?;
        Ok(self.energy_unchecked(c.gamma()))
    }

    /// Energy of a symmetric `gamma` of admissible dimension.
    pub fn energy_unchecked(&self, g: &Mat) -> f64 {
        let d = g.nrows();
        match *self {
            EnergyModel::Isotropic => {
                let mut acc = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        let v = g[(a, b)] - if a == b { 1.0 } else { 0.0 };
                        acc += v * v;
                    }
                }
                0.5 * acc
            }
            EnergyModel::Anisotropic { alpha, beta_w } => {
                let (p, q, r) = (g[(0, 0)] - 1.0, g[(1, 1)] - 1.0, 0.5 * (g[(0, 1)] + g[(1, 0)]));
                let block = p * p + q * q + 2.0 * r * r;
                let theta2 = g[(0, 2)] * g[(0, 2)] + g[(1, 2)] * g[(1, 2)];
                let rho = g[(2, 2)] - 1.0;
                0.5 * block + 0.5 * alpha * theta2 + 0.5 * beta_w * rho * rho
            }
        }
    }

    /// Symmetric gradient `G_AB = de/dgamma_AB`.
    pub fn gradient(&self, c: &Configuration) -> Result<Mat> {
        self.check_dim(c.dim())?;
        Ok(self.gradient_unchecked(c.gamma()))
    }

    pub fn gradient_unchecked(&self, g: &Mat) -> Mat {
        let d = g.nrows();
        match *self {
            EnergyModel::Isotropic => g - Mat::identity(d, d),
            EnergyModel::Anisotropic { alpha, beta_w } => {
                let mut out = Mat::zeros(3, 3);
                out[(0, 0)] = g[(0, 0)] - 1.0;
                out[(1, 1)] = g[(1, 1)] - 1.0;
                let r = 0.5 * (g[(0, 1)] + g[(1, 0)]);
                out[(0, 1)] = r;
                out[(1, 0)] = r;
                for a in 0..2 {
                    let t = 0.25 * alpha * (g[(a, 2)] + g[(2, a)]);
                    out[(a, 2)] = t;
                    out[(2, a)] = t;
                }
                out[(2, 2)] = beta_w * (g[(2, 2)] - 1.0);
                out
            }
        }
    }

    /// Second derivative as a bilinear form on symmetric matrices. Both
    /// models are quadratic in `gamma`, so the form does not depend on the
    /// state.
    pub fn hessian_form(&self, s: &Mat, t: &Mat) -> f64 {
        let d = s.nrows();
        match *self {
            EnergyModel::Isotropic => s.component_mul(t).sum(),
            EnergyModel::Anisotropic { alpha, beta_w } => {
                debug_assert_eq!(d, 3);
                let mut acc = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        acc += s[(a, b)] * t[(a, b)];
                    }
                }
                acc += alpha * (s[(0, 2)] * t[(0, 2)] + s[(1, 2)] * t[(1, 2)]);
                acc + beta_w * s[(2, 2)] * t[(2, 2)]
            }
        }
    }

    /// `D^2 e [s]` as a symmetric matrix, so that `hessian_form(s, t) = <apply(s), t>`.
    pub fn hessian_apply(&self, s: &Mat) -> Mat {
        match *self {
            EnergyModel::Isotropic => s.clone(),
            EnergyModel::Anisotropic { alpha, beta_w } => {
                let mut out = Mat::zeros(3, 3);
                for a in 0..2 {
                    for b in 0..2 {
                        out[(a, b)] = s[(a, b)];
                    }
                    out[(a, 2)] = 0.5 * alpha * s[(a, 2)];
                    out[(2, a)] = 0.5 * alpha * s[(2, a)];
                }
                out[(2, 2)] = beta_w * s[(2, 2)];
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::affine_frame;

    #[test]
    fn configuration_of_identity() {
        let c = configuration(&MaterialFrame::identity(2), &Mat::identity(2, 2)).unwrap();
        assert_eq!(c.gamma(), &Mat::identity(2, 2));
    }

    #[test]
    fn configuration_of_affine_frame() {
        let c = configuration(&affine_frame(&[1.0, 0.0]), &Mat::identity(2, 2)).unwrap();
        let e2 = std::f64::consts::E * std::f64::consts::E;
        assert!((c.gamma()[(1, 1)] - e2).abs() < 1e-14);
        assert_eq!(c.gamma()[(0, 0)], 1.0);
        assert_eq!(c.gamma()[(0, 1)], 0.0);
    }

    #[test]
    fn non_spd_metric_is_rejected() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(configuration(&MaterialFrame::identity(2), &m).is_err());
    }

    #[test]
    fn energy_values() {
        let iso = EnergyModel::Isotropic;
        assert_eq!(iso.energy(&Configuration::identity(3)).unwrap(), 0.0);
        let c = Configuration::new(Mat::from_diagonal(&nalgebra::dvector![2.0, 1.0])).unwrap();
        assert!((iso.energy(&c).unwrap() - 0.5).abs() < 1e-15);

        let aniso = EnergyModel::anisotropic(1.0, 1.0).unwrap();
        let mut g = Mat::identity(3, 3);
        g[(0, 2)] = 0.1;
        g[(2, 0)] = 0.1;
        let c = Configuration::new(g).unwrap();
        assert!((aniso.energy(&c).unwrap() - 0.005).abs() < 1e-15);
        assert!(aniso.energy(&Configuration::identity(2)).is_err());
    }

    #[test]
    fn anisotropic_block_term_is_eigenvalue_sum() {
        let aniso = EnergyModel::anisotropic(0.0, 0.0).unwrap();
        let g = Mat::from_row_slice(3, 3, &[1.3, 0.2, 0.0, 0.2, 0.8, 0.0, 0.0, 0.0, 1.0]);
        let mu = sym_eigenvalues(&g.view((0, 0), (2, 2)).into_owned());
        let expected = 0.5 * ((mu[0] - 1.0).powi(2) + (mu[1] - 1.0).powi(2));
        let e = aniso.energy(&Configuration::new(g).unwrap()).unwrap();
        assert!((e - expected).abs() < 1e-14);
    }

    #[test]
    fn negative_coefficients_are_rejected() {
        assert!(EnergyModel::anisotropic(-1.0, 1.0).is_err());
        assert!(EnergyModel::anisotropic(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn hessian_apply_matches_form() {
        let s = Mat::from_row_slice(3, 3, &[1.0, 0.2, -0.3, 0.2, 0.5, 0.7, -0.3, 0.7, 2.0]);
        let t = Mat::from_row_slice(3, 3, &[0.3, -0.1, 0.4, -0.1, 1.5, 0.2, 0.4, 0.2, -1.0]);
        for model in [EnergyModel::Isotropic, EnergyModel::anisotropic(0.7, 1.3).unwrap()] {
            let lhs = model.hessian_form(&s, &t);
            let rhs = model.hessian_apply(&s).component_mul(&t).sum();
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }
}
