//! Riemannian metrics on the material manifold in coordinates.

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// A smooth field of SPD matrices `h_ab(y)`.
pub trait MetricField: Send + Sync {
    fn dim(&self) -> usize;
    fn metric_at(&self, y: &[f64]) -> Mat;
}

/// Below this value of `x = (eps r)^2` the shape function is evaluated by its
/// Taylor series.
pub const SERIES_SWITCH: f64 = 1e-2;

/// `f(x) = (sinh^2(sqrt x) - x) / x^2`, the radial shape function of the
/// hyperbolic metric in normal coordinates.
pub fn shape_function(x: f64) -> f64 {
    if x <= SERIES_SWITCH {
        shape_function_series(x)
    } else {
        shape_function_closed(x)
    }
}

pub fn shape_function_closed(x: f64) -> f64 {
    let s = x.sqrt().sinh();
    (s * s - x) / (x * x)
}

/// Taylor series `sum_{k>=2} 2^{2k-1} x^{k-2} / (2k)!`, summed through `x^8`.
/// At `x = 2e-2` the first omitted term is below `1e-27`.
pub fn shape_function_series(x: f64) -> f64 {
    // Coefficients 2^{2k-1}/(2k)! for k = 2..=10.
    const C: [f64; 9] = [
        1.0 / 3.0,
        2.0 / 45.0,
        1.0 / 315.0,
        2.0 / 14175.0,
        2.0 / 467775.0,
        4.0 / 42567525.0,
        1.0 / 638512875.0,
        2.0 / 97692469875.0,
        2.0 / 9280784638125.0,
    ];
    C.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// The hyperbolic plane of curvature `-eps^2` in Riemannian normal
/// coordinates centred at the origin:
/// `h = delta + eps^2 f(eps^2 r^2) (r^2 delta - y y^T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicMetric {
    epsilon: f64,
}

impl HyperbolicMetric {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Precondition(format!(
                "curvature scale epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

pub fn hyperbolic_metric(epsilon: f64) -> Result<HyperbolicMetric> {
    HyperbolicMetric::new(epsilon)
}

impl MetricField for HyperbolicMetric {
    fn dim(&self) -> usize {
        2
    }

    fn metric_at(&self, y: &[f64]) -> Mat {
        let e2 = self.epsilon * self.epsilon;
        let r2 = y[0] * y[0] + y[1] * y[1];
        let c = e2 * shape_function(e2 * r2);
        Mat::from_row_slice(
            2,
            2,
            &[
                1.0 + c * (r2 - y[0] * y[0]),
                -c * y[0] * y[1],
                -c * y[1] * y[0],
                1.0 + c * (r2 - y[1] * y[1]),
            ],
        )
    }
}

/// The left-invariant metric of the Heisenberg group in group coordinates,
/// for which `E_1 = d/dx`, `E_2 = d/dy + x d/dz`, `E_3 = e^{-beta} d/dz` is
/// orthonormal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergMetric {
    pub beta: f64,
}

impl HeisenbergMetric {
    /// `d h / d x`; the other coordinate derivatives vanish.
    pub fn dx(&self, y: &[f64]) -> Mat {
        let e2b = (2.0 * self.beta).exp();
        #[rustfmt::skip]
        let m = Mat::from_row_slice(3, 3, &[
            0.0, 0.0,             0.0,
            0.0, 2.0 * e2b * y[0], -e2b,
            0.0, -e2b,            0.0,
        ]);
        m
    }
}

impl MetricField for HeisenbergMetric {
    fn dim(&self) -> usize {
        3
    }

    fn metric_at(&self, y: &[f64]) -> Mat {
        let x = y[0];
        let e2b = (2.0 * self.beta).exp();
        #[rustfmt::skip]
        let m = Mat::from_row_slice(3, 3, &[
            1.0, 0.0,                0.0,
            0.0, 1.0 + e2b * x * x, -e2b * x,
            0.0, -e2b * x,           e2b,
        ]);
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanMetric {
    pub dim: usize,
}

impl MetricField for EuclideanMetric {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric_at(&self, _y: &[f64]) -> Mat {
        Mat::identity(self.dim, self.dim)
    }
}

/// Christoffel symbols `Gamma^k_ij` of a 2d metric by central differences.
fn christoffel_fd(metric: &dyn MetricField, y: [f64; 2], step: f64) -> [[[f64; 2]; 2]; 2] {
    let mut dh = [Mat::zeros(2, 2), Mat::zeros(2, 2)];
    for (a, d) in dh.iter_mut().enumerate() {
        let mut yp = y;
        let mut ym = y;
        yp[a] += step;
        ym[a] -= step;
        *d = (metric.metric_at(&yp) - metric.metric_at(&ym)) / (2.0 * step);
    }
    let hinv = metric
        .metric_at(&y)
        .try_inverse()
        .expect("metric must be invertible");
    let mut g = [[[0.0; 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for l in 0..2 {
                    acc += hinv[(k, l)] * (dh[i][(l, j)] + dh[j][(l, i)] - dh[l][(i, j)]);
                }
                g[k][i][j] = 0.5 * acc;
            }
        }
    }
    g
}

/// Gauss curvature of a 2d metric at `y`, from nested central differences
/// of the metric with the given step.
pub fn gauss_curvature_fd(metric: &dyn MetricField, y: [f64; 2], step: f64) -> f64 {
    let g0 = christoffel_fd(metric, y, step);
    let mut dg = [[[[0.0; 2]; 2]; 2]; 2];
    for m in 0..2 {
        let mut yp = y;
        let mut ym = y;
        yp[m] += step;
        ym[m] -= step;
        let gp = christoffel_fd(metric, yp, step);
        let gm = christoffel_fd(metric, ym, step);
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    dg[m][k][i][j] = (gp[k][i][j] - gm[k][i][j]) / (2.0 * step);
                }
            }
        }
    }
    // R^l_{212} = d_1 G^l_22 - d_2 G^l_12 + G^l_1m G^m_22 - G^l_2m G^m_12.
    let h = metric.metric_at(&y);
    let mut r = [0.0; 2];
    for (l, rl) in r.iter_mut().enumerate() {
        let mut acc = dg[0][l][1][1] - dg[1][l][0][1];
        for m in 0..2 {
            acc += g0[l][0][m] * g0[m][1][1] - g0[l][1][m] * g0[m][0][1];
        }
        *rl = acc;
    }
    let r1212 = h[(0, 0)] * r[0] + h[(0, 1)] * r[1];
    r1212 / h.determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_coefficients_match_factorials() {
        let mut fact = 1.0_f64;
        let mut coeffs = Vec::new();
        for n in 1..=20u32 {
            fact *= n as f64;
            if n >= 4 && n % 2 == 0 {
                let k = n / 2;
                coeffs.push(2f64.powi(2 * k as i32 - 1) / fact);
            }
        }
        assert_eq!(coeffs.len(), 9);
        for x in [0.0f64, 1e-3, 0.02, 0.5] {
            let direct: f64 = coeffs.iter().enumerate().map(|(i, c)| c * x.powi(i as i32)).sum();
            assert!((shape_function_series(x) - direct).abs() < 1e-16, "{x}");
        }
    }

    #[test]
    fn branches_agree_around_switch() {
        let mut worst = 0.0_f64;
        for i in 0..=200 {
            let x = SERIES_SWITCH * (0.5 + 1.5 * i as f64 / 200.0);
            worst = worst.max((shape_function_series(x) - shape_function_closed(x)).abs());
        }
        assert!(worst < 1e-13, "{worst:e}");
    }

    #[test]
    fn metric_is_identity_at_origin_and_flat_limit() {
        let h = hyperbolic_metric(0.3).unwrap();
        assert_eq!(h.metric_at(&[0.0, 0.0]), Mat::identity(2, 2));
        let flat = hyperbolic_metric(0.0).unwrap();
        for y in [[1.0, 2.0], [-0.3, 0.7]] {
            assert_eq!(flat.metric_at(&y), Mat::identity(2, 2));
        }
    }

    #[test]
    fn angular_stretch_at_unit_radius() {
        // sinh^2(eps r)/(eps r)^2 with eps r = 0.1.
        let h = hyperbolic_metric(0.1).unwrap().metric_at(&[1.0, 0.0]);
        let oracle = (0.1f64.sinh() / 0.1).powi(2);
        assert!((h[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((h[(1, 1)] - oracle).abs() < 1e-14);
        assert!((h[(1, 1)] - 1.0033378).abs() < 1e-7);
        assert_eq!(h[(0, 1)], 0.0);
    }

    #[test]
    fn negative_epsilon_is_rejected() {
        assert!(hyperbolic_metric(-0.1).is_err());
        assert!(hyperbolic_metric(f64::NAN).is_err());
    }

    #[test]
    fn curvature_is_minus_epsilon_squared() {
        for eps in [0.5, 1.0, 2.0] {
            let h = hyperbolic_metric(eps).unwrap();
            for y in [[0.3, 0.1], [-0.2, 0.45], [0.05, -0.6]] {
                let k = gauss_curvature_fd(&h, y, 1e-3);
                let target = -eps * eps;
                assert!(((k - target) / target).abs() < 1e-3, "eps {eps} y {y:?}: {k}");
            }
        }
    }

    #[test]
    fn heisenberg_metric_makes_frame_orthonormal() {
        use crate::geometry::frame::heisenberg_frame;
        for beta in [0.0, 0.1, -0.7] {
            let y = [0.4, -1.2, 2.0];
            let e = heisenberg_frame(&y, beta).frame;
            let g = e.transpose() * HeisenbergMetric { beta }.metric_at(&y) * e;
            assert!((g - Mat::identity(3, 3)).amax() < 1e-14);
        }
    }
}
