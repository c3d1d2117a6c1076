//! Structured meshes of the disk and the ball, centred at the origin.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

fn check_params(radius: f64, target_h: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("radius must be positive, got {radius}")));
    }
    if !(target_h > 0.0 && target_h < radius) {
        return Err(Error::Precondition(format!(
            "target_h must satisfy 0 < h < radius, got h={target_h}, radius={radius}"
        )));
    }
    Ok(())
}

/// Polar-ring triangulation of the disk. Ring `k` (`k = 1..=K`,
/// `K = ceil(radius / target_h)`) sits at radius `k radius / K` and carries
/// `6k` equally spaced nodes; node 0 is the centre. Nodes are numbered ring
/// by ring, angle ascending from the positive `y1` axis.
pub fn generate_disk_mesh(radius: f64, target_h: f64) -> Result<Mesh> {
    check_params(radius, target_h)?;
    let rings = (radius / target_h).ceil() as usize;
    let mut nodes = vec![0.0, 0.0];
    let mut start = vec![0usize];
    for k in 1..=rings {
        start.push(nodes.len() / 2);
        let r = radius * k as f64 / rings as f64;
        let n = 6 * k;
        for j in 0..n {
            let t = std::f64::consts::TAU * j as f64 / n as f64;
            let (s, c) = t.sin_cos();
            nodes.push(r * c);
            nodes.push(r * s);
        }
    }

    let mut cells = Vec::new();
    for j in 0..6 {
        cells.extend([0, start[1] + j, start[1] + (j + 1) % 6]);
    }
    for k in 2..=rings {
        let (n_in, n_out) = (6 * (k - 1), 6 * k);
        let a = |i: usize| start[k - 1] + i % n_in;
        let b = |j: usize| start[k] + j % n_out;
        let (mut i, mut j) = (0, 0);
        while i < n_in || j < n_out {
            // Advance along whichever ring has the smaller next angle,
            // compared exactly as (i+1)/n_in vs (j+1)/n_out.
            let inner_next = (i + 1) * n_out;
            let outer_next = (j + 1) * n_in;
            if j == n_out || (i < n_in && inner_next <= outer_next) {
                cells.extend([a(i), b(j), a(i + 1)]);
                i += 1;
            } else {
                cells.extend([a(i), b(j), b(j + 1)]);
                j += 1;
            }
        }
    }
    Ok(Mesh::from_cells(2, nodes, cells)?)
}

/// Kuhn tetrahedralization of the cube `[-radius, radius]^3` with an even
/// number of cells per side, mirrored in each octant so that the mesh is
/// symmetric under coordinate reflections, then mapped onto the ball by
/// `x -> x |x|_inf / |x|_2`. The origin is node `(n/2, n/2, n/2)`.
pub fn generate_ball_mesh(radius: f64, target_h: f64) -> Result<Mesh> {
    check_params(radius, target_h)?;
    let half = (radius / target_h).ceil() as usize;
    let n = 2 * half;
    let side = n + 1;
    let index = |i: usize, j: usize, k: usize| (i * side + j) * side + k;
    let spacing = radius / half as f64;

    let mut cube = Vec::with_capacity(3 * side * side * side);
    let mut nodes = Vec::with_capacity(3 * side * side * side);
    for i in 0..side {
        for j in 0..side {
            for k in 0..side {
                let x = [
                    (i as f64 - half as f64) * spacing,
                    (j as f64 - half as f64) * spacing,
                    (k as f64 - half as f64) * spacing,
                ];
                cube.extend(x);
                let inf = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                let two = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let s = if two > 0.0 { inf / two } else { 1.0 };
                nodes.extend(x.iter().map(|v| v * s));
            }
        }
    }

    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * 4 * n * n * n);
    for ci in 0..n {
        for cj in 0..n {
            for ck in 0..n {
                // Flip local axes on the negative side so the shared diagonal
                // of every cube points away from the origin.
                let flip = [ci < half, cj < half, ck < half];
                let corner = [ci, cj, ck];
                let node_of = |l: [usize; 3]| {
                    let g: Vec<usize> = (0..3)
                        .map(|a| corner[a] + if flip[a] { 1 - l[a] } else { l[a] })
                        .collect();
                    index(g[0], g[1], g[2])
                };
                for p in perms {
                    let mut l = [0usize; 3];
                    let mut tet = [0usize; 4];
                    tet[0] = node_of(l);
                    for (s, &axis) in p.iter().enumerate() {
                        l[axis] = 1;
                        tet[s + 1] = node_of(l);
                    }
                    let pts: Vec<&[f64]> = tet.iter().map(|&v| &cube[3 * v..3 * v + 3]).collect();
                    if super::simplex_volume(3, &pts) < 0.0 {
                        tet.swap(2, 3);
                    }
                    cells.extend(tet);
                }
            }
        }
    }
    Ok(Mesh::from_cells(3, nodes, cells)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_contains_origin_and_stays_inside() {
        let m = generate_disk_mesh(1.0, 0.5).unwrap();
        assert_eq!(m.find_node(&[0.0, 0.0], 0.0), Some(0));
        for n in 0..m.n_nodes() {
            let p = m.node(n);
            assert!((p[0] * p[0] + p[1] * p[1]).sqrt() <= 1.0 + 1e-12);
        }
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn disk_area_converges_quadratically() {
        let err = |h: f64| (generate_disk_mesh(1.0, h).unwrap().total_volume() - PI).abs() / PI;
        let (e1, e2) = (err(0.2), err(0.1));
        assert!(e1 < 0.05);
        assert!((e1 / e2).log2() > 1.9);
    }

    #[test]
    fn disk_edges_track_target() {
        for h in [0.4, 0.2, 0.1, 0.05] {
            let m = generate_disk_mesh(1.0, h).unwrap();
            assert!(m.max_edge_length() <= 1.5 * h, "{h}: {}", m.max_edge_length());
            assert_eq!(m.euler_characteristic(), 1);
        }
        let ratio = generate_disk_mesh(1.0, 0.2).unwrap().max_edge_length()
            / generate_disk_mesh(1.0, 0.1).unwrap().max_edge_length();
        assert!((ratio / 2.0 - 1.0).abs() < 0.2);
    }

    #[test]
    fn disk_perimeter_converges() {
        let err = |h: f64| (generate_disk_mesh(1.0, h).unwrap().boundary_measure() - 2.0 * PI).abs();
        assert!((err(0.2) / err(0.1)).log2() >= 1.9);
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(generate_disk_mesh(1.0, 0.0).is_err());
        assert!(generate_disk_mesh(1.0, 1.5).is_err());
        assert!(generate_ball_mesh(-1.0, 0.1).is_err());
    }

    #[test]
    fn ball_volume_and_orientation() {
        let exact = 4.0 / 3.0 * PI;
        let err = |h: f64| {
            let m = generate_ball_mesh(1.0, h).unwrap();
            for c in 0..m.n_cells() {
                assert!(m.cell_volume(c) > 0.0);
            }
            (m.total_volume() - exact).abs() / exact
        };
        let (e1, e2) = (err(0.5), err(0.25));
        assert!(e2 < 0.05);
        assert!((e1 / e2).log2() > 1.8, "{e1} {e2}");
    }

    #[test]
    fn ball_conormals_point_outward() {
        let m = generate_ball_mesh(0.2, 0.05).unwrap();
        assert!(m.find_node(&[0.0, 0.0, 0.0], 0.0).is_some());
        for f in 0..m.boundary_facets().len() {
            let n = m.conormal(f);
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            assert!((len - 1.0).abs() < 1e-12);
            let fc = m.facet_centroid(f);
            // Outward on a convex domain centred at the origin.
            assert!(n[0] * fc[0] + n[1] * fc[1] + n[2] * fc[2] > 0.0);
        }
    }

    #[test]
    fn ball_surface_area_converges() {
        let exact = 4.0 * PI;
        let err = |h: f64| (generate_ball_mesh(1.0, h).unwrap().boundary_measure() - exact).abs();
        assert!((err(0.5) / err(0.25)).log2() >= 1.9);
    }
}
