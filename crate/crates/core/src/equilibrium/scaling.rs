use crate::equilibrium::{MaterialSource, ProblemSpec};
use crate::error::{Error, Result};
use crate::linear::DisplacementField;

/// A solution transported to the domain `l Omega`.
#[derive(Debug, Clone)]
pub struct Rescaled {
    /// The problem on `l Omega`; the hyperbolic curvature parameter becomes
    /// `epsilon / l` and the admissible bound scales the same way.
    pub spec: ProblemSpec,
    pub psi: DisplacementField,
    pub scale: f64,
}

/// `phi~(y) = l phi(y / l)`, i.e. nodes and displacements both scale by `l`.
/// Stresses satisfy `S~(y) = S(y / l)`.
pub fn rescale_solution(spec: &ProblemSpec, psi: &DisplacementField, l: f64) -> Result<Rescaled> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Precondition(format!("scale factor must be positive, got {l}")));
    }
    let material = match &spec.material {
        MaterialSource::Flat => MaterialSource::Flat,
        MaterialSource::Hyperbolic { epsilon } => MaterialSource::Hyperbolic { epsilon: epsilon / l },
        MaterialSource::HeisenbergChart { .. } => {
            return Err(Error::Precondition(
                "rescaling is implemented for flat and hyperbolic problems".into(),
            ))
        }
    };
    let mut tolerances = spec.tolerances;
    tolerances.epsilon_max /= l;
    Ok(Rescaled {
        spec: ProblemSpec {
            mesh: spec.mesh.scaled(l),
            material,
            model: spec.model,
            tolerances,
            quadrature_order: spec.quadrature_order,
        },
        psi: DisplacementField::from_vector(psi.dim, &psi.values * l),
        scale: l,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::EnergyModel;
    use crate::mesh::generate_disk_mesh;

    fn spec() -> ProblemSpec {
        ProblemSpec::new(
            generate_disk_mesh(1.0, 0.3).unwrap(),
            MaterialSource::Hyperbolic { epsilon: 0.1 },
            EnergyModel::Isotropic,
        )
    }

    #[test]
    fn unit_scale_is_identity() {
        let s = spec();
        let psi = DisplacementField::from_fn(&s.mesh, |y| vec![y[0] * 0.01, -y[1] * 0.02]);
        let r = rescale_solution(&s, &psi, 1.0).unwrap();
        assert_eq!(r.psi, psi);
        assert_eq!(r.spec.mesh, s.mesh);
    }

    #[test]
    fn power_of_two_round_trip_is_bit_exact() {
        let s = spec();
        let psi = DisplacementField::from_fn(&s.mesh, |y| vec![(y[0] * 3.1).sin() * 0.01, y[1].cos() * 0.02]);
        let there = rescale_solution(&s, &psi, 0.125).unwrap();
        let back = rescale_solution(&there.spec, &there.psi, 8.0).unwrap();
        assert_eq!(back.psi, psi);
        assert_eq!(back.spec.mesh, s.mesh);
        match back.spec.material {
            MaterialSource::Hyperbolic { epsilon } => assert_eq!(epsilon, 0.1),
            _ => unreachable!(),
        }
    }

    #[test]
    fn cell_stresses_are_transported() {
        let s = spec();
        let psi = DisplacementField::from_fn(&s.mesh, |y| vec![0.01 * y[0] * y[1], 0.02 * y[0] * y[0]]);
        let r = rescale_solution(&s, &psi, 0.1).unwrap();
        let a = s.clone().prepare().unwrap().cell_stresses(&psi).unwrap();
        let b = r.spec.prepare().unwrap().cell_stresses(&r.psi).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((&x.s - &y.s).amax() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_scale() {
        let s = spec();
        let psi = DisplacementField::zeros(&s.mesh);
        assert!(rescale_solution(&s, &psi, 0.0).is_err());
        assert!(rescale_solution(&s, &psi, -1.0).is_err());
    }
}
