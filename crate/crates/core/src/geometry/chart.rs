//! Riemannian normal coordinates for the Heisenberg group.
//!
//! The chart inverse is the exponential map at the origin, computed by
//! shooting geodesics of the left-invariant metric with classical RK4. The
//! coordinates are taken relative to the orthonormal frame `E_A` at the
//! origin, so a normal-coordinate point `u` maps to `exp(u^A E_A(p0))`.

use crate::error::{Error, Result};
use crate::geometry::frame::{heisenberg_frame, MaterialFrame};
use crate::geometry::metric::{HeisenbergMetric, MetricField};
use crate::linalg::Mat;

pub const DEFAULT_RADIUS: f64 = 0.5;
/// Central-difference step of the chart jacobian, relative to the radius.
pub const DEFAULT_RELATIVE_FD_STEP: f64 = 1e-5;
/// RK4 steps per chart radius of geodesic arc length.
const STEPS_PER_RADIUS: f64 = 200.0;

/// Everything the assembly needs at one normal-coordinate point.
#[derive(Debug, Clone)]
pub struct ChartSample {
    /// Group coordinates of the point.
    pub point: [f64; 3],
    /// `d(group coords)/d(normal coords)`.
    pub jacobian: Mat,
    /// Pulled-back metric `J^T h J`.
    pub metric: Mat,
    /// Left-invariant frame expressed in normal coordinates.
    pub frame: MaterialFrame,
}

#[derive(Debug, Clone)]
pub struct Chart {
    beta: f64,
    origin: [f64; 3],
    radius: f64,
    fd_step: f64,
    metric: HeisenbergMetric,
    frame0: Mat,
}

pub fn heisenberg_normal_chart(beta: f64, origin: [f64; 3]) -> Chart {
    Chart::new(beta, origin)
}

impl Chart {
    pub fn new(beta: f64, origin: [f64; 3]) -> Self {
        Self {
            beta,
            origin,
            radius: DEFAULT_RADIUS,
            fd_step: DEFAULT_RELATIVE_FD_STEP * DEFAULT_RADIUS,
            metric: HeisenbergMetric { beta },
            frame0: heisenberg_frame(&origin, beta).frame,
        }
    }

    /// Sets the radius bound; the jacobian step keeps its relative size.
    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Precondition(format!("chart radius must be positive, got {radius}")));
        }
        self.fd_step = self.fd_step / self.radius * radius;
        self.radius = radius;
        Ok(self)
    }

    /// Overrides the absolute central-difference step of the jacobian.
    pub fn with_fd_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::Precondition(format!("jacobian step must be positive, got {step}")));
        }
        self.fd_step = step;
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn check_domain(&self, u: &[f64]) -> Result<()> {
        let r = norm(u);
        if !(r <= self.radius) {
            return Err(Error::ChartDomain {
                radius: r,
                bound: self.radius,
            });
        }
        Ok(())
    }

    fn steps_for(&self, u: &[f64]) -> usize {
        let h = self.radius / STEPS_PER_RADIUS;
        ((norm(u) / h).ceil() as usize).max(1)
    }

    fn accel(&self, p: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
        // Only d/dx of the metric is nonzero, so the lowered Christoffel
        // contraction reduces to v^0 (D v)_l - 1/2 delta_l0 v^T D v.
        let d = self.metric.dx(p);
        let dv = [
            d[(0, 0)] * v[0] + d[(0, 1)] * v[1] + d[(0, 2)] * v[2],
            d[(1, 0)] * v[0] + d[(1, 1)] * v[1] + d[(1, 2)] * v[2],
            d[(2, 0)] * v[0] + d[(2, 1)] * v[1] + d[(2, 2)] * v[2],
        ];
        let vdv = v[0] * dv[0] + v[1] * dv[1] + v[2] * dv[2];
        let w = [v[0] * dv[0] - 0.5 * vdv, v[0] * dv[1], v[0] * dv[2]];
        let hinv = self
            .metric
            .metric_at(p)
            .try_inverse()
            .expect("Heisenberg metric is SPD");
        let mut a = [0.0; 3];
        for k in 0..3 {
            a[k] = -(hinv[(k, 0)] * w[0] + hinv[(k, 1)] * w[1] + hinv[(k, 2)] * w[2]);
        }
        a
    }

    /// Integrates the geodesic with initial velocity `u^A E_A(p0)` over unit
    /// time in `n` RK4 steps.
    fn shoot(&self, u: &[f64], n: usize) -> [f64; 3] {
        let mut p = self.origin;
        let mut v = [0.0; 3];
        for (a, va) in v.iter_mut().enumerate() {
            *va = (0..3).map(|b| self.frame0[(a, b)] * u[b]).sum();
        }
        let dt = 1.0 / n as f64;
        let add = |x: &[f64; 3], k: &[f64; 3], s: f64| [x[0] + s * k[0], x[1] + s * k[1], x[2] + s * k[2]];
        for _ in 0..n {
            let k1p = v;
            let k1v = self.accel(&p, &v);
            let (p2, v2) = (add(&p, &k1p, 0.5 * dt), add(&v, &k1v, 0.5 * dt));
            let k2p = v2;
            let k2v = self.accel(&p2, &v2);
            let (p3, v3) = (add(&p, &k2p, 0.5 * dt), add(&v, &k2v, 0.5 * dt));
            let k3p = v3;
            let k3v = self.accel(&p3, &v3);
            let (p4, v4) = (add(&p, &k3p, dt), add(&v, &k3v, dt));
            let k4p = v4;
            let k4v = self.accel(&p4, &v4);
            for i in 0..3 {
                p[i] += dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
                v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
            }
        }
        p
    }

    /// Chart inverse: normal coordinates to group coordinates.
    pub fn exp(&self, u: &[f64]) -> Result<[f64; 3]> {
        self.check_dim(u)?;
        self.check_domain(u)?;
        Ok(self.shoot(u, self.steps_for(u)))
    }

    fn check_dim(&self, u: &[f64]) -> Result<()> {
        if u.len() != 3 {
            return Err(Error::Precondition(format!("chart points have 3 coordinates, got {}", u.len())));
        }
        Ok(())
    }

    /// Differential of the chart inverse at `u`, by central differences of
    /// the shooting map. All perturbed shots use the step count of `u` so the
    /// difference quotient sees a single discrete map.
    pub fn jacobian(&self, u: &[f64]) -> Result<Mat> {
        self.check_dim(u)?;
        self.check_domain(u)?;
        Ok(self.jacobian_unchecked(u, self.steps_for(u)))
    }

    fn jacobian_unchecked(&self, u: &[f64], n: usize) -> Mat {
        let s = self.fd_step;
        let mut j = Mat::zeros(3, 3);
        for b in 0..3 {
            let mut up = [u[0], u[1], u[2]];
            let mut um = up;
            up[b] += s;
            um[b] -= s;
            let pp = self.shoot(&up, n);
            let pm = self.shoot(&um, n);
            for a in 0..3 {
                j[(a, b)] = (pp[a] - pm[a]) / (2.0 * s);
            }
        }
        j
    }

    /// Chart: group coordinates to normal coordinates, by Newton iteration
    /// on the shooting map.
    pub fn forward(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(p)?;
        let coframe0 = heisenberg_frame(&self.origin, self.beta).coframe;
        let dp: Vec<f64> = (0..3).map(|a| p[a] - self.origin[a]).collect();
        let mut u: Vec<f64> = (0..3)
            .map(|a| (0..3).map(|b| coframe0[(a, b)] * dp[b]).sum())
            .collect();
        let scale = 1.0 + norm(p);
        for _ in 0..50 {
            if norm(&u) > 2.0 * self.radius {
                break;
            }
            let n = self.steps_for(&u);
            let q = self.shoot(&u, n);
            let r: Vec<f64> = (0..3).map(|a| p[a] - q[a]).collect();
            if norm(&r) <= 1e-14 * scale {
                self.check_domain(&u)?;
                return Ok(u);
            }
            let j = self.jacobian_unchecked(&u, n);
            let du = j
                .lu()
                .solve(&nalgebra::DVector::from_vec(r))
                .ok_or_else(|| Error::Degenerate("singular chart jacobian".into()))?;
            for a in 0..3 {
                u[a] += du[a];
            }
        }
        self.check_domain(&u)?;
        Err(Error::Degenerate(format!(
            "normal coordinates of {p:?} did not converge"
        )))
    }

    pub fn sample(&self, u: &[f64]) -> Result<ChartSample> {
        self.check_dim(u)?;
        self.check_domain(u)?;
        let n = self.steps_for(u);
        let point = self.shoot(u, n);
        let jacobian = self.jacobian_unchecked(u, n);
        let metric = jacobian.transpose() * self.metric.metric_at(&point) * &jacobian;
        let group = heisenberg_frame(&point, self.beta);
        let jinv = jacobian
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular chart jacobian".into()))?;
        let frame = MaterialFrame {
            frame: &jinv * &group.frame,
            coframe: &group.coframe * &jacobian,
            structure: group.structure,
        };
        Ok(ChartSample {
            point,
            jacobian,
            metric: crate::linalg::symmetrize(&metric),
            frame,
        })
    }

    /// Pulled-back metric `J^T h J` at `u`.
    pub fn metric(&self, u: &[f64]) -> Result<Mat> {
        Ok(self.sample(u)?.metric)
    }

    /// The left-invariant frame in normal coordinates at `u`.
    pub fn frame(&self, u: &[f64]) -> Result<MaterialFrame> {
        Ok(self.sample(u)?.frame)
    }
}

pub fn heisenberg_frame_in_chart(chart: &Chart, u: &[f64]) -> Result<MaterialFrame> {
    chart.frame(u)
}

fn norm(u: &[f64]) -> f64 {
    u.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest `|h_ab - delta_ab|` of the pulled-back metric over `n_dirs`
/// Fibonacci directions on the sphere of radius `r`.
pub fn max_metric_deviation(chart: &Chart, r: f64, n_dirs: usize) -> Result<f64> {
    let mut worst = 0.0_f64;
    for v in fibonacci_sphere(n_dirs) {
        let u = [r * v[0], r * v[1], r * v[2]];
        let h = chart.metric(&u)?;
        worst = worst.max((h - Mat::identity(3, 3)).amax());
    }
    Ok(worst)
}

/// Deterministic, nearly uniform points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}
