//! Rank-one ellipticity and characteristic speeds.

use nalgebra::SymmetricEigen;

use crate::constitutive::{Configuration, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::chart::fibonacci_sphere;
use crate::linalg::{generalized_sym_eigenvalues, symmetrize, Mat};

/// Number of sampled directions for the outer minimization.
pub const LH_SAMPLES: usize = 2048;
/// Alternating refinement sweeps after sampling.
pub const LH_REFINEMENT_STEPS: usize = 20;

/// `D^2 e[sym(eta xi^T)] + 1/2 (xi^T G xi)(eta^T gamma^{-1} eta)`.
pub fn rank_one_form(
    model: &EnergyModel,
    c: &Configuration,
    xi: &[f64],
    eta: &[f64],
) -> Result<f64> {
    model.check_dim(c.dim())?;
    let g = model.gradient_unchecked(c.gamma());
    let ginv = c
        .gamma()
        .clone()
        .cholesky()
        .ok_or(Error::NotSpd("configuration"))?
        .inverse();
    Ok(form(model, &g, &ginv, xi, eta))
}

fn form(model: &EnergyModel, g: &Mat, ginv: &Mat, xi: &[f64], eta: &[f64]) -> f64 {
    let d = xi.len();
    let mut s = Mat::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            s[(a, b)] = 0.5 * (eta[a] * xi[b] + eta[b] * xi[a]);
        }
    }
    let mut gxx = 0.0;
    let mut eie = 0.0;
    for a in 0..d {
        for b in 0..d {
            gxx += g[(a, b)] * xi[a] * xi[b];
            eie += ginv[(a, b)] * eta[a] * eta[b];
        }
    }
    model.hessian_form(&s, &s) + 0.5 * gxx * eie
}

/// Matrix of the quadratic form `v -> q(v)` by polarization.
fn polarize(d: usize, q: impl Fn(&[f64]) -> f64) -> Mat {
    let mut k = Mat::zeros(d, d);
    let unit = |i: usize| {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    for i in 0..d {
        k[(i, i)] = q(&unit(i));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let mut v = unit(i);
            v[j] = 1.0;
            let val = 0.5 * (q(&v) - k[(i, i)] - k[(j, j)]);
            k[(i, j)] = val;
            k[(j, i)] = val;
        }
    }
    k
}

fn min_eigenpair(k: &Mat) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(symmetrize(k));
    let (i, &lam) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    (lam, eig.eigenvectors.column(i).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreHadamard {
    /// Minimum of the rank-one form over unit `xi`, `eta`.
    pub minimum: f64,
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
}

impl LegendreHadamard {
    pub fn holds(&self) -> bool {
        self.minimum > 0.0
    }
}

/// Minimizes the rank-one form over unit vectors. For fixed `xi` the form is
/// a quadratic in `eta`, so the inner minimum is an eigenvalue; `xi` is
/// sampled on a Fibonacci lattice and the best pair is refined by
/// alternating exact minimizations.
pub fn legendre_hadamard(model: &EnergyModel, c: &Configuration) -> Result<LegendreHadamard> {
    model.check_dim(c.dim())?;
    let d = c.dim();
    let g = model.gradient_unchecked(c.gamma());
    let ginv = c
        .gamma()
        .clone()
        .cholesky()
        .ok_or(Error::NotSpd("configuration"))?
        .inverse();
    let eta_matrix = |xi: &[f64]| polarize(d, |eta| form(model, &g, &ginv, xi, eta));
    let xi_matrix = |eta: &[f64]| polarize(d, |xi| form(model, &g, &ginv, xi, eta));

    let directions: Vec<Vec<f64>> = if d == 2 {
        // Half circle suffices: the form is even in xi.
        (0..LH_SAMPLES)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / LH_SAMPLES as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()
    } else {
        fibonacci_sphere(LH_SAMPLES).into_iter().map(|p| p.to_vec()).collect()
    };

    let mut best = (f64::INFINITY, Vec::new(), Vec::new());
    for xi in directions {
        let (lam, eta) = min_eigenpair(&eta_matrix(&xi));
        if lam < best.0 {
            best = (lam, xi, eta);
        }
    }
    let (mut minimum, mut xi, mut eta) = best;
    for _ in 0..LH_REFINEMENT_STEPS {
        let (lx, x) = min_eigenpair(&xi_matrix(&eta));
        if lx < minimum {
            minimum = lx;
            xi = x;
        }
        let (le, e) = min_eigenpair(&eta_matrix(&xi));
        if le < minimum {
            minimum = le;
            eta = e;
        }
    }
    Ok(LegendreHadamard { minimum, xi, eta })
}

/// Components `M^{CD}_{AB}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourIndex {
    dim: usize,
    values: Vec<f64>,
}

impl FourIndex {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; dim.pow(4)],
        }
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for c in 0..dim {
            for d in 0..dim {
                for a in 0..dim {
                    for b in 0..dim {
                        m.set(c, d, a, b, f(c, d, a, b));
                    }
                }
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, c: usize, d: usize, a: usize, b: usize) -> usize {
        ((c * self.dim + d) * self.dim + a) * self.dim + b
    }

    pub fn get(&self, c: usize, d: usize, a: usize, b: usize) -> f64 {
        self.values[self.index(c, d, a, b)]
    }

    pub fn set(&mut self, c: usize, d: usize, a: usize, b: usize, v: f64) {
        let i = self.index(c, d, a, b);
        self.values[i] = v;
    }

    /// `H_AB(kappa) = M^{CD}_{AB} kappa_C kappa_D`, symmetrized in `(A, B)`.
    pub fn contract(&self, kappa: &[f64]) -> Mat {
        let n = self.dim;
        let mut h = Mat::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    for d in 0..n {
                        acc += self.get(c, d, a, b) * kappa[c] * kappa[d];
                    }
                }
                h[(a, b)] = acc;
            }
        }
        symmetrize(&h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedReport {
    /// `sqrt(lambda_i) / |kappa|`, ascending; `NaN` where `lambda_i < 0`.
    pub speeds: Vec<f64>,
    /// Generalized eigenvalues `lambda_i`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Indices of eigenvalues violating hyperbolicity.
    pub violations: Vec<usize>,
}

/// Characteristic speeds for the covector `kappa`. `dual_metric` measures
/// `|kappa|^2 = kappa^T dual_metric kappa`.
pub fn characteristic_speeds(
    g: &Mat,
    m4: &FourIndex,
    kappa: &[f64],
    dual_metric: &Mat,
) -> Result<SpeedReport> {
    let n = m4.dim();
    if g.shape() != (n, n) || kappa.len() != n || dual_metric.shape() != (n, n) {
        return Err(Error::Precondition("characteristic speed inputs disagree in dimension".into()));
    }
    let k = nalgebra::DVector::from_column_slice(kappa);
    let norm2 = (k.transpose() * dual_metric * &k)[(0, 0)];
    if !(norm2 > 0.0) {
        return Err(Error::Precondition("covector kappa must be nonzero".into()));
    }
    let eigenvalues = generalized_sym_eigenvalues(&m4.contract(kappa), g)?;
    let norm = norm2.sqrt();
    let mut violations = Vec::new();
    let speeds = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            if l < 0.0 {
                violations.push(i);
                f64::NAN
            } else {
                l.sqrt() / norm
            }
        })
        .collect();
    Ok(SpeedReport {
        speeds,
        eigenvalues,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_form_at_identity_for_orthogonal_pair() {
        let c = Configuration::identity(2);
        let q = rank_one_form(&EnergyModel::Isotropic, &c, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((q - 0.5).abs() < 1e-15);
        let q2 = rank_one_form(&EnergyModel::Isotropic, &c, &[1.0, 0.0], &[0.0, 2.0]).unwrap();
        assert!((q2 - 4.0 * q).abs() < 1e-14);
    }

    #[test]
    fn toy_minimum_at_identity() {
        for d in [2, 3] {
            let lh = legendre_hadamard(&EnergyModel::Isotropic, &Configuration::identity(d)).unwrap();
            assert!((lh.minimum - 0.5).abs() < 1e-12, "{d}: {}", lh.minimum);
            assert!(lh.holds());
        }
    }

    #[test]
    fn anisotropic_minimum_at_identity() {
        let model = EnergyModel::anisotropic(1.0, 1.0).unwrap();
        let lh = legendre_hadamard(&model, &Configuration::identity(3)).unwrap();
        assert!((lh.minimum - 0.25).abs() < 1e-9, "{}", lh.minimum);
    }

    #[test]
    fn degenerate_anisotropy_loses_ellipticity() {
        let model = EnergyModel::anisotropic(0.0, 1.0).unwrap();
        let lh = legendre_hadamard(&model, &Configuration::identity(3)).unwrap();
        assert!(lh.minimum.abs() < 1e-12);
        assert!(!lh.holds());
    }

    #[test]
    fn isotropic_wave_operator_has_uniform_speed() {
        let c2 = 2.25;
        let m4 = FourIndex::from_fn(3, |c, d, a, b| if c == d && a == b { c2 } else { 0.0 });
        let g = Mat::identity(3, 3);
        for kappa in [[1.0, 0.0, 0.0], [0.3, -0.4, 1.2]] {
            let r = characteristic_speeds(&g, &m4, &kappa, &g).unwrap();
            for s in r.speeds {
                assert!((s - 1.5).abs() < 1e-12);
            }
            assert!(r.violations.is_empty());
        }
    }

    #[test]
    fn speeds_are_homogeneous_of_degree_zero() {
        let m4 = FourIndex::from_fn(2, |c, d, a, b| 1.0 + (c + 2 * d) as f64 * 0.1 + (a * b) as f64);
        let g = Mat::from_row_slice(2, 2, &[2.0, 0.1, 0.1, 1.0]);
        let id = Mat::identity(2, 2);
        let a = characteristic_speeds(&g, &m4, &[0.3, 0.7], &id).unwrap();
        let b = characteristic_speeds(&g, &m4, &[0.6, 1.4], &id).unwrap();
        for (x, y) in a.speeds.iter().zip(&b.speeds) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn speeds_match_dense_eigensolver() {
        let m4 = FourIndex::from_fn(3, |c, d, a, b| {
            let s = ((c * 27 + d * 9 + a * 3 + b) as f64 * 0.37).sin();
            s + s * 0.0 + if a == b && c == d { 3.0 } else { 0.0 }
        });
        let g = Mat::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0]);
        let kappa = [0.4, -0.9, 0.2];
        let id = Mat::identity(3, 3);
        let r = characteristic_speeds(&g, &m4, &kappa, &id).unwrap();
        let h = m4.contract(&kappa);
        let oracle = g.clone().try_inverse().unwrap() * h;
        let mut ev: Vec<f64> = oracle.complex_eigenvalues().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        for (a, b) in r.eigenvalues.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_eigenvalues_are_flagged() {
        let m4 = FourIndex::from_fn(2, |c, d, a, b| if c == d && a == b { if a == 0 { -1.0 } else { 1.0 } } else { 0.0 });
        let id = Mat::identity(2, 2);
        let r = characteristic_speeds(&id, &m4, &[1.0, 0.0], &id).unwrap();
        assert_eq!(r.violations, vec![0]);
        assert!(r.speeds[0].is_nan());
        assert!(characteristic_speeds(&id, &m4, &[0.0, 0.0], &id).is_err());
    }
}
