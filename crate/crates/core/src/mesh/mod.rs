//! Simplicial meshes of the material domain.

pub mod generate;
pub mod io;
pub mod quadrature;

pub use generate::{generate_ball_mesh, generate_disk_mesh};
pub use io::{load_mesh, parse_mesh, save_mesh, write_mesh};
pub use quadrature::{FacetQuadrature, Quadrature, QuadratureRule};

use std::collections::HashMap;

use crate::error::MeshError;
use crate::linalg::Mat;

/// A boundary facet: `dim` node indices plus the cell that owns it.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFacet {
    pub nodes: Vec<usize>,
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<f64>,
    cells: Vec<usize>,
    boundary: Vec<BoundaryFacet>,
    conormals: Vec<Vec<f64>>,
    node_cells: Vec<Vec<usize>>,
}

/// Signed volume of a simplex with vertices `pts` (`dim + 1` points).
pub fn simplex_volume(dim: usize, pts: &[&[f64]]) -> f64 {
    let mut b = Mat::zeros(dim, dim);
    for k in 0..dim {
        for a in 0..dim {
            b[(a, k)] = pts[k + 1][a] - pts[0][a];
        }
    }
    let fact = if dim == 2 { 2.0 } else { 6.0 };
    b.determinant() / fact
}

fn facet_key(mut nodes: Vec<usize>) -> Vec<usize> {
    nodes.sort_unstable();
    nodes
}

impl Mesh {
    /// Validates and builds a mesh with explicitly listed boundary facets.
    pub fn new(
        dim: usize,
        nodes: Vec<f64>,
        cells: Vec<usize>,
        boundary: Vec<BoundaryFacet>,
    ) -> Result<Self, MeshError> {
        let facets = Self::check_cells(dim, &nodes, &cells)?;
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (f, facet) in boundary.iter().enumerate() {
            if facet.nodes.len() != dim {
                return Err(MeshError::Boundary {
                    facet: f,
                    message: format!("expected {dim} nodes, got {}", facet.nodes.len()),
                });
            }
            let key = facet_key(facet.nodes.clone());
            match facets.get(&key) {
                Some(owners) if owners.len() == 1 => {
                    if owners[0] != facet.cell {
                        return Err(MeshError::Boundary {
                            facet: f,
                            message: format!(
                                "owned by cell {}, not cell {}",
                                owners[0], facet.cell
                            ),
                        });
                    }
                }
                Some(_) => {
                    return Err(MeshError::Boundary {
                        facet: f,
                        message: "is an interior facet".into(),
                    })
                }
                None => {
                    return Err(MeshError::Boundary {
                        facet: f,
                        message: "is not a facet of any cell".into(),
                    })
                }
            }
            if let Some(prev) = seen.insert(key, f) {
                return Err(MeshError::Boundary {
                    facet: f,
                    message: format!("duplicates facet {prev}"),
                });
            }
        }
        let n_open = facets.values().filter(|o| o.len() == 1).count();
        if n_open != boundary.len() {
            return Err(MeshError::Count {
                what: "boundary facets",
                declared: boundary.len(),
                found: n_open,
            });
        }
        Ok(Self::assemble(dim, nodes, cells, boundary))
    }

    /// Builds a mesh and derives the boundary from the cell connectivity.
    /// Facets are listed in cell order, local facet order within a cell.
    pub fn from_cells(dim: usize, nodes: Vec<f64>, cells: Vec<usize>) -> Result<Self, MeshError> {
        let facets = Self::check_cells(dim, &nodes, &cells)?;
        let mut boundary = Vec::new();
        let k = dim + 1;
        for (c, cell) in cells.chunks(k).enumerate() {
            for skip in 0..k {
                let f: Vec<usize> = (0..k).filter(|&i| i != skip).map(|i| cell[i]).collect();
                if facets[&facet_key(f.clone())].len() == 1 {
                    boundary.push(BoundaryFacet { nodes: f, cell: c });
                }
            }
        }
        Ok(Self::assemble(dim, nodes, cells, boundary))
    }

    fn check_cells(
        dim: usize,
        nodes: &[f64],
        cells: &[usize],
    ) -> Result<HashMap<Vec<usize>, Vec<usize>>, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::Dimension(dim));
        }
        if cells.is_empty() {
            return Err(MeshError::EmptyCells);
        }
        let n_nodes = nodes.len() / dim;
        let k = dim + 1;
        let mut facets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (c, cell) in cells.chunks(k).enumerate() {
            for &n in cell {
                if n >= n_nodes {
                    return Err(MeshError::DanglingNode {
                        cell: c,
                        node: n,
                        n_nodes,
                    });
                }
            }
            let pts: Vec<&[f64]> = cell.iter().map(|&n| &nodes[n * dim..(n + 1) * dim]).collect();
            let volume = simplex_volume(dim, &pts);
            if !(volume > 0.0) {
                return Err(MeshError::NonPositiveCell { cell: c, volume });
            }
            for skip in 0..k {
                let f: Vec<usize> = (0..k).filter(|&i| i != skip).map(|i| cell[i]).collect();
                let owners = facets.entry(facet_key(f)).or_default();
                owners.push(c);
                if owners.len() > 2 {
                    return Err(MeshError::NonManifold {
                        cells: owners.clone(),
                    });
                }
            }
        }
        Ok(facets)
    }

    fn assemble(dim: usize, nodes: Vec<f64>, cells: Vec<usize>, boundary: Vec<BoundaryFacet>) -> Self {
        let n_nodes = nodes.len() / dim;
        let mut node_cells = vec![Vec::new(); n_nodes];
        for (c, cell) in cells.chunks(dim + 1).enumerate() {
            for &n in cell {
                node_cells[n].push(c);
            }
        }
        let mut mesh = Self {
            dim,
            nodes,
            cells,
            boundary,
            conormals: Vec::new(),
            node_cells,
        };
        mesh.conormals = (0..mesh.boundary.len()).map(|f| mesh.compute_conormal(f)).collect();
        mesh
    }

    fn compute_conormal(&self, f: usize) -> Vec<f64> {
        let facet = &self.boundary[f];
        let p: Vec<&[f64]> = facet.nodes.iter().map(|&n| self.node(n)).collect();
        let mut n = if self.dim == 2 {
            vec![p[1][1] - p[0][1], -(p[1][0] - p[0][0])]
        } else {
            let u: Vec<f64> = (0..3).map(|a| p[1][a] - p[0][a]).collect();
            let v: Vec<f64> = (0..3).map(|a| p[2][a] - p[0][a]).collect();
            vec![
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ]
        };
        let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        n.iter_mut().for_each(|x| *x /= len);
        let fc = self.facet_centroid(f);
        let cc = self.cell_centroid(facet.cell);
        let dot: f64 = (0..self.dim).map(|a| n[a] * (fc[a] - cc[a])).sum();
        if dot < 0.0 {
            n.iter_mut().for_each(|x| *x = -*x);
        }
        n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.dim + 1)
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    /// All node coordinates, node-major.
    pub fn coordinates(&self) -> &[f64] {
        &self.nodes
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn connectivity(&self) -> &[usize] {
        &self.cells
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary
    }

    /// Outward Euclidean unit conormal of boundary facet `f`.
    pub fn conormal(&self, f: usize) -> &[f64] {
        &self.conormals[f]
    }

    /// Cells containing node `n`, ascending.
    pub fn cells_of_node(&self, n: usize) -> &[usize] {
        &self.node_cells[n]
    }

    pub fn cell_volume(&self, c: usize) -> f64 {
        let pts: Vec<&[f64]> = self.cell(c).iter().map(|&n| self.node(n)).collect();
        simplex_volume(self.dim, &pts)
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_volume(c)).sum()
    }

    pub fn cell_centroid(&self, c: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &n in self.cell(c) {
            for (a, o) in out.iter_mut().enumerate() {
                *o += self.node(n)[a];
            }
        }
        let k = (self.dim + 1) as f64;
        out.iter_mut().for_each(|x| *x /= k);
        out
    }

    pub fn facet_centroid(&self, f: usize) -> Vec<f64> {
        let facet = &self.boundary[f];
        let mut out = vec![0.0; self.dim];
        for &n in &facet.nodes {
            for (a, o) in out.iter_mut().enumerate() {
                *o += self.node(n)[a];
            }
        }
        out.iter_mut().for_each(|x| *x /= self.dim as f64);
        out
    }

    /// Length (2d) or area (3d) of boundary facet `f`.
    pub fn facet_measure(&self, f: usize) -> f64 {
        let p: Vec<&[f64]> = self.boundary[f].nodes.iter().map(|&n| self.node(n)).collect();
        if self.dim == 2 {
            ((p[1][0] - p[0][0]).powi(2) + (p[1][1] - p[0][1]).powi(2)).sqrt()
        } else {
            let u: Vec<f64> = (0..3).map(|a| p[1][a] - p[0][a]).collect();
            let v: Vec<f64> = (0..3).map(|a| p[2][a] - p[0][a]).collect();
            let c = [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ];
            0.5 * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
        }
    }

    pub fn boundary_measure(&self) -> f64 {
        (0..self.boundary.len()).map(|f| self.facet_measure(f)).sum()
    }

    /// Gradients of the barycentric shape functions on cell `c`: row `i`
    /// is `grad N_i`.
    pub fn shape_gradients(&self, c: usize) -> Mat {
        let d = self.dim;
        let cell = self.cell(c);
        let x0 = self.node(cell[0]);
        let mut b = Mat::zeros(d, d);
        for k in 0..d {
            let xk = self.node(cell[k + 1]);
            for a in 0..d {
                b[(a, k)] = xk[a] - x0[a];
            }
        }
        let binv = b.try_inverse().expect("validated cells are non-degenerate");
        let mut g = Mat::zeros(d + 1, d);
        for k in 0..d {
            for a in 0..d {
                g[(k + 1, a)] = binv[(k, a)];
                g[(0, a)] -= binv[(k, a)];
            }
        }
        g
    }

    /// Index of a node within `tol` of `point`, preferring the lowest index.
    pub fn find_node(&self, point: &[f64], tol: f64) -> Option<usize> {
        (0..self.n_nodes()).find(|&n| {
            self.node(n)
                .iter()
                .zip(point)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                <= tol
        })
    }

    /// Distinct edges as sorted node pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for c in 0..self.n_cells() {
            let cell = self.cell(c);
            for i in 0..cell.len() {
                for j in (i + 1)..cell.len() {
                    edges.push((cell[i].min(cell[j]), cell[i].max(cell[j])));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges()
            .into_iter()
            .map(|(a, b)| {
                self.node(a)
                    .iter()
                    .zip(self.node(b))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `V - E + F` of a 2d mesh.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_nodes() as i64 - self.edges().len() as i64 + self.n_cells() as i64
    }

    /// Same connectivity with every coordinate multiplied by `l`.
    pub fn scaled(&self, l: f64) -> Self {
        let mut out = self.clone();
        out.nodes.iter_mut().for_each(|x| *x *= l);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Mesh {
        let nodes = vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let cells = vec![0, 1, 2, 0, 2, 3];
        Mesh::from_cells(2, nodes, cells).unwrap()
    }

    #[test]
    fn unit_square_topology() {
        let m = square();
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.boundary_facets().len(), 4);
        assert!((m.total_volume() - 1.0).abs() < 1e-15);
        assert!((m.boundary_measure() - 4.0).abs() < 1e-15);
        assert_eq!(m.euler_characteristic(), 1);
        for f in 0..4 {
            let n = m.conormal(f);
            assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-12);
            let fc = m.facet_centroid(f);
            let cc = m.cell_centroid(m.boundary_facets()[f].cell);
            assert!(n[0] * (fc[0] - cc[0]) + n[1] * (fc[1] - cc[1]) > 0.0);
        }
    }

    #[test]
    fn shape_gradients_reproduce_linear_functions() {
        let m = square();
        for c in 0..2 {
            let g = m.shape_gradients(c);
            // f(x, y) = 2x - 3y has gradient (2, -3).
            let mut grad = [0.0; 2];
            for (i, &n) in m.cell(c).iter().enumerate() {
                let p = m.node(n);
                let f = 2.0 * p[0] - 3.0 * p[1];
                grad[0] += f * g[(i, 0)];
                grad[1] += f * g[(i, 1)];
            }
            assert!((grad[0] - 2.0).abs() < 1e-14 && (grad[1] + 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn validation_errors_are_distinct() {
        let nodes = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        assert_eq!(
            Mesh::from_cells(2, nodes.clone(), vec![0, 2, 1]).unwrap_err(),
            MeshError::NonPositiveCell { cell: 0, volume: -0.5 }
        );
        assert_eq!(
            Mesh::from_cells(2, nodes.clone(), vec![0, 1, 5]).unwrap_err(),
            MeshError::DanglingNode { cell: 0, node: 5, n_nodes: 3 }
        );
        assert_eq!(Mesh::from_cells(2, nodes.clone(), vec![]).unwrap_err(), MeshError::EmptyCells);
        assert_eq!(Mesh::from_cells(4, nodes, vec![0]).unwrap_err(), MeshError::Dimension(4));
    }

    #[test]
    fn explicit_boundary_must_tile() {
        let nodes = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let full = vec![
            BoundaryFacet { nodes: vec![0, 1], cell: 0 },
            BoundaryFacet { nodes: vec![1, 2], cell: 0 },
            BoundaryFacet { nodes: vec![2, 0], cell: 0 },
        ];
        assert!(Mesh::new(2, nodes.clone(), vec![0, 1, 2], full.clone()).is_ok());
        let err = Mesh::new(2, nodes.clone(), vec![0, 1, 2], full[..2].to_vec()).unwrap_err();
        assert!(matches!(err, MeshError::Count { .. }));
        let mut wrong = full.clone();
        wrong[1].cell = 3;
        assert!(matches!(
            Mesh::new(2, nodes, vec![0, 1, 2], wrong).unwrap_err(),
            MeshError::Boundary { facet: 1, .. }
        ));
    }
}
