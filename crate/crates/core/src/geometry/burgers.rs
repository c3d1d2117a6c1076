//! Burgers vectors of closed circuits and the flux of the dislocation
//! density through spanning surfaces.
//!
//! The two are tied by Stokes: `-closed integral of nu over Gamma` equals the
//! integral of `lambda` over any surface bounded by `Gamma`. The circuit side
//! integrates the coframe along the curve; the surface side integrates the
//! structure constants against the coframe over a triangulation, so the two
//! routes share nothing but the frame evaluation.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::frame::{dislocation_density, FrameField};

/// 4-point Gauss-Legendre nodes on `[0, 1]` and weights summing to 1.
const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_9),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_1),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_9),
];

#[derive(Debug, Clone, PartialEq)]
pub struct BurgersVector {
    /// Components in the crystalline frame `E_A`.
    pub components: Vec<f64>,
    /// Gauss-Legendre points used on every polyline segment.
    pub points_per_segment: usize,
    pub segments: usize,
}

/// `-closed integral of omega^A_a dy^a` over a closed polyline.
pub fn burgers_circuit(field: &dyn FrameField, curve: &[Vec<f64>]) -> Result<BurgersVector> {
    let d = field.dim();
    if curve.is_empty() {
        return Err(Error::Precondition("empty curve".into()));
    }
    if curve.iter().any(|p| p.len() != d) {
        return Err(Error::Precondition(format!("curve points must have {d} coordinates")));
    }
    if curve.first() != curve.last() {
        return Err(Error::Precondition(
            "curve is not closed (first point differs from last)".into(),
        ));
    }

    let mut total = vec![0.0; d];
    let mut y = vec![0.0; d];
    for seg in curve.windows(2) {
        let (p, q) = (&seg[0], &seg[1]);
        let tangent: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
        if tangent.iter().all(|&t| t == 0.0) {
            continue;
        }
        for &(t, w) in &GAUSS4 {
            for a in 0..d {
                y[a] = p[a] + t * tangent[a];
            }
            let frame = field.frame_at(&y);
            for (comp, row) in total.iter_mut().zip(frame.coframe.row_iter()) {
                let nu: f64 = row.iter().zip(&tangent).map(|(o, t)| o * t).sum();
                *comp -= w * nu;
            }
        }
    }
    Ok(BurgersVector {
        components: total,
        points_per_segment: GAUSS4.len(),
        segments: curve.len().saturating_sub(1),
    })
}

/// Degree-5 7-point triangle rule in barycentric coordinates (weights sum to 1).
fn triangle_rule7() -> [([f64; 3], f64); 7] {
    let a1 = 0.059_715_871_789_769_82;
    let b1 = 0.470_142_064_105_115_1;
    let a2 = 0.797_426_985_353_087_3;
    let b2 = 0.101_286_507_323_456_3;
    let w1 = 0.132_394_152_788_506_2;
    let w2 = 0.125_939_180_544_827_1;
    [
        ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

/// Integral of the dislocation 2-form over a union of oriented triangles
/// `(p0, p1, p2)` in coordinate space. Each triangle is subdivided
/// `refine x refine` times before the 7-point rule is applied.
pub fn density_flux(field: &dyn FrameField, triangles: &[[Vec<f64>; 3]], refine: usize) -> Vec<f64> {
    let d = field.dim();
    let rule = triangle_rule7();
    let refine = refine.max(1);
    let mut total = vec![0.0; d];
    let mut y = vec![0.0; d];
    for tri in triangles {
        let u: Vec<f64> = (0..d).map(|a| tri[1][a] - tri[0][a]).collect();
        let v: Vec<f64> = (0..d).map(|a| tri[2][a] - tri[0][a]).collect();
        // Sub-triangles of the reference triangle in (s, t) coordinates.
        let h = 1.0 / refine as f64;
        for i in 0..refine {
            for j in 0..(refine - i) {
                let mut subs = vec![[(i, j), (i + 1, j), (i, j + 1)]];
                if i + j + 1 < refine {
                    subs.push([(i + 1, j), (i + 1, j + 1), (i, j + 1)]);
                }
                for sub in subs {
                    let st: Vec<(f64, f64)> = sub
                        .iter()
                        .map(|&(a, b)| (a as f64 * h, b as f64 * h))
                        .collect();
                    // Sub-triangle area relative to the reference triangle.
                    let jac = (st[1].0 - st[0].0) * (st[2].1 - st[0].1)
                        - (st[2].0 - st[0].0) * (st[1].1 - st[0].1);
                    for (bary, w) in &rule {
                        let s = bary[0] * st[0].0 + bary[1] * st[1].0 + bary[2] * st[2].0;
                        let t = bary[0] * st[0].1 + bary[1] * st[1].1 + bary[2] * st[2].1;
                        for a in 0..d {
                            y[a] = tri[0][a] + s * u[a] + t * v[a];
                        }
                        let lam = dislocation_density(&field.frame_at(&y));
                        let val = lam.contract(&u, &v);
                        // The reference triangle has area 1/2; lambda(u, v) is
                        // the density per unit (s, t) area.
                        for c in 0..d {
                            total[c] += 0.5 * jac * w * val[c];
                        }
                    }
                }
            }
        }
    }
    total
}

/// Reads a closed polyline: one point per line, comma-separated coordinates.
/// Blank lines and lines starting with `#` are ignored.
pub fn read_curve_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_curve_csv(&text)
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::Precondition(format!("curve line {}: {e}", lineno + 1)))?;
        if let Some(first) = points.first() {
            let first: &Vec<f64> = first;
            if first.len() != p.len() {
                return Err(Error::Precondition(format!(
                    "curve line {}: expected {} coordinates",
                    lineno + 1,
                    first.len()
                )));
            }
        }
        points.push(p);
    }
    Ok(points)
}

/// Positively oriented boundary of the axis-aligned square `[x0, x0+s] x [y0, y0+s]`
/// in the `(y1, y2)` plane, with `per_side` segments per edge. Extra
/// coordinates (3d) are filled with `z`.
pub fn square_circuit(x0: f64, y0: f64, s: f64, per_side: usize, dim: usize, z: f64) -> Vec<Vec<f64>> {
    let n = per_side.max(1);
    let corners = [(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)];
    let mut pts = Vec::with_capacity(4 * n + 1);
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        for i in 0..n {
            let t = i as f64 / n as f64;
            let mut p = vec![a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)];
            if dim == 3 {
                p.push(z);
            }
            pts.push(p);
        }
    }
    pts.push(pts[0].clone());
    pts
}

/// The square above split into two positively oriented triangles.
pub fn square_triangles(x0: f64, y0: f64, s: f64, dim: usize, z: f64) -> Vec<[Vec<f64>; 3]> {
    let p = |x: f64, y: f64| {
        let mut v = vec![x, y];
        if dim == 3 {
            v.push(z);
        }
        v
    };
    vec![
        [p(x0, y0), p(x0 + s, y0), p(x0 + s, y0 + s)],
        [p(x0, y0), p(x0 + s, y0 + s), p(x0, y0 + s)],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::frame::{Abelian, AffineGroup, HeisenbergGroup};

    #[test]
    fn open_curve_is_rejected() {
        let curve = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        assert!(matches!(
            burgers_circuit(&AffineGroup, &curve),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn degenerate_curve_gives_zero() {
        let curve = vec![vec![0.3, 0.2]; 4];
        let b = burgers_circuit(&AffineGroup, &curve).unwrap();
        assert_eq!(b.components, vec![0.0, 0.0]);
        assert_eq!(b.points_per_segment, 4);
    }

    #[test]
    fn affine_square_matches_hyperbolic_area() {
        // -closed integral of e^{-y1} dy2 around [0,s]^2 is s (1 - e^{-s}).
        for s in [0.1, 0.5, 1.0] {
            let curve = square_circuit(0.0, 0.0, s, 4, 2, 0.0);
            let b = burgers_circuit(&AffineGroup, &curve).unwrap();
            let area = s * (1.0 - (-s).exp());
            assert!((b.components[1] - area).abs() < 1e-10, "{s}");
            assert!(b.components[0].abs() < 1e-14);
        }
    }

    #[test]
    fn heisenberg_unit_square_threads_unit_flux() {
        let curve = square_circuit(0.0, 0.0, 1.0, 1, 3, 0.0);
        let b = burgers_circuit(&HeisenbergGroup { beta: 0.0 }, &curve).unwrap();
        assert!((b.components[2] - 1.0).abs() < 1e-12);
        assert!(b.components[0].abs() < 1e-14 && b.components[1].abs() < 1e-14);

        let flux = density_flux(&HeisenbergGroup { beta: 0.0 }, &square_triangles(0.0, 0.0, 1.0, 3, 0.0), 1);
        assert!((flux[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn abelian_circuits_close() {
        let curve = square_circuit(-0.3, 0.1, 0.7, 3, 3, 0.4);
        let b = burgers_circuit(&Abelian { dim: 3 }, &curve).unwrap();
        assert!(b.components.iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn csv_round_trip() {
        let text = "# square\n0,0\n1,0\n1,1\n0,1\n0,0\n";
        let c = parse_curve_csv(text).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c[2], vec![1.0, 1.0]);
        assert!(parse_curve_csv("0,0\n1\n").is_err());
    }
}
