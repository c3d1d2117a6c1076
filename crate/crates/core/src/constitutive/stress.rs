//! Thermodynamic, material and spatial stresses.

use crate::constitutive::{Configuration, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::MaterialFrame;
use crate::linalg::{check_spd, symmetrize, Mat};

/// `pi = -2 G / sqrt(det gamma)`, frame indices.
pub fn thermodynamic_stress(model: &EnergyModel, c: &Configuration) -> Result<Mat> {
    let g = model.gradient(c)?;
    Ok(g * (-2.0 / c.volume()))
}

/// Isotropic-energy material stress in coordinates,
/// `S = 2 sqrt(det h / det m) h^{-1} (h - m) h^{-1}`.
pub fn material_stress(h: &Mat, m: &Mat) -> Result<Mat> {
    check_spd(h, "material metric")?;
    check_spd(m, "pulled-back metric")?;
    let hinv = h
        .clone()
        .cholesky()
        .ok_or(Error::NotSpd("material metric"))?
        .inverse();
    let scale = 2.0 * (h.determinant() / m.determinant()).sqrt();
    Ok(symmetrize(&(&hinv * (h - m) * &hinv * scale)))
}

/// Push-forward `T = dphi S dphi^T`.
pub fn spatial_stress(s: &Mat, dphi: &Mat) -> Result<Mat> {
    let det = dphi.determinant();
    if !(det > 0.0) {
        return Err(Error::Degenerate(format!(
            "deformation gradient has determinant {det}"
        )));
    }
    Ok(symmetrize(&(dphi * s * dphi.transpose())))
}

/// Stress in frame (`pi`), material (`s`) and spatial (`t`) components.
#[derive(Debug, Clone, PartialEq)]
pub struct StressTensors {
    pub pi: Mat,
    pub s: Mat,
    pub t: Mat,
}

impl StressTensors {
    /// Evaluates all three stresses for the deformation gradient `dphi` at a
    /// point with crystalline frame `frame`.
    pub fn compute(model: &EnergyModel, frame: &MaterialFrame, dphi: &Mat) -> Result<Self> {
        let m = dphi.transpose() * dphi;
        let c = super::configuration(frame, &m)?;
        let pi = thermodynamic_stress(model, &c)?;
        let s = &frame.frame * &pi * frame.frame.transpose();
        let t = spatial_stress(&s, dphi)?;
        Ok(Self { pi, s, t })
    }
}
