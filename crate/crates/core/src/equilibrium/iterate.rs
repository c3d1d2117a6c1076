use crate::constitutive::EnergyModel;
use crate::equilibrium::{IterationReport, IterationRow, MaterialSource, Problem};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::linear::DisplacementField;

/// Frozen-Hessian iteration `A psi_{n+1} = A psi_n - grad E_h(psi_n)`
/// started at `psi_0 = 0`. Each step is doped and gauge-fixed; an update
/// that inverts an element is halved up to `max_halvings` times.
pub fn outer_iteration(problem: &Problem) -> Result<(DisplacementField, IterationReport)> {
    let tol = problem.spec.tolerances;
    let mesh = problem.mesh();
    let mut psi = DisplacementField::zeros(mesh);
    let mut residual = problem.weak_residual(&psi)?;
    let mut report = IterationReport {
        initial_residual: residual.projected_norm,
        initial_energy: problem.energy(&psi)?,
        ..Default::default()
    };
    for n in 1..=tol.max_outer {
        let load = -&residual.gradient;
        let step = problem.solver.solve_load(mesh, &load)?;
        let mut delta = step.psi;
        let mut halvings = 0;
        let (candidate, next) = loop {
            let candidate = DisplacementField::from_vector(psi.dim, &psi.values + &delta);
            match problem.weak_residual(&candidate) {
                Ok(r) => break (candidate, r),
                Err(Error::InvertedElement { cell, .. }) => {
                    if halvings == tol.max_halvings {
                        return Err(Error::InvertedIterate {
                            iterate: n,
                            cell,
                            report: Box::new(report),
                        });
                    }
                    halvings += 1;
                    delta *= 0.5;
                }
                Err(e) => return Err(e),
            }
        };
        let row = IterationRow {
            n,
            residual: next.projected_norm,
            increment: problem.h1_norm(&delta),
            energy: problem.energy(&candidate)?,
            doping: step.doping.iter().copied().collect(),
            psi_sup: candidate.sup_norm(),
            cg_iterations: step.cg.iterations,
            halvings,
        };
        let done = row.increment < tol.outer_tol
            && row.residual < tol.outer_tol
            && row.doping.iter().all(|c| c.abs() < tol.outer_tol);
        report.rows.push(row);
        psi = candidate;
        residual = next;
        if done {
            report.converged = true;
            return Ok((psi, report));
        }
    }
    Err(Error::Diverged {
        report: Box::new(report),
    })
}

/// The outer iteration for the screw-dislocation problem: a 3d mesh in the
/// Heisenberg normal chart with the anisotropic energy.
pub fn solve_screw_3d(problem: &Problem) -> Result<(DisplacementField, IterationReport)> {
    if problem.dim() != 3 {
        return Err(Error::Precondition("screw problem needs a 3d mesh".into()));
    }
    if !matches!(problem.spec.material, MaterialSource::HeisenbergChart { .. } | MaterialSource::Flat) {
        return Err(Error::Precondition("screw problem needs the Heisenberg chart".into()));
    }
    match problem.spec.model {
        EnergyModel::Anisotropic { alpha, beta_w } if alpha > 0.0 && beta_w > 0.0 => outer_iteration(problem),
        _ => Err(Error::Precondition(
            "screw problem needs the anisotropic energy with positive coefficients".into(),
        )),
    }
}

/// Split of the gradient at `psi` into the pieces of the linearization at
/// the identity: `grad E(psi) = at_identity + flat_linear + curvature_linear
/// + nonlinear`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSplit {
    pub at_identity: Vector,
    pub flat_linear: Vector,
    pub curvature_linear: Vector,
    pub nonlinear: Vector,
}

/// The linear part at the identity is a central difference of the gradient
/// with relative step `t`.
pub fn residual_split(problem: &Problem, psi: &DisplacementField, t: f64) -> Result<ResidualSplit> {
    let d = psi.dim;
    let at_identity = problem.gradient(&DisplacementField::zeros(problem.mesh()))?;
    let plus = problem.gradient(&DisplacementField::from_vector(d, &psi.values * t))?;
    let minus = problem.gradient(&DisplacementField::from_vector(d, &psi.values * -t))?;
    let linear = (plus - minus) / (2.0 * t);
    let flat_linear = problem.solver.operator.mul_vec(&psi.values);
    let full = problem.gradient(psi)?;
    Ok(ResidualSplit {
        nonlinear: &full - &at_identity - &linear,
        curvature_linear: linear - &flat_linear,
        at_identity,
        flat_linear,
    })
}
