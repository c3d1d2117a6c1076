//! Simplex quadrature on cells and boundary facets.

use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// A rule on the reference simplex: barycentric points and weights that sum
/// to one (fractions of the simplex measure).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub bary: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

fn triangle_orbit(a: f64, w: f64, rule: &mut QuadratureRule) {
    let b = 1.0 - 2.0 * a;
    for p in [[b, a, a], [a, b, a], [a, a, b]] {
        rule.bary.push(p.to_vec());
        rule.weights.push(w);
    }
}

fn tet_orbit4(a: f64, w: f64, rule: &mut QuadratureRule) {
    let b = 1.0 - 3.0 * a;
    for k in 0..4 {
        let mut p = vec![a; 4];
        p[k] = b;
        rule.bary.push(p);
        rule.weights.push(w);
    }
}

fn tet_orbit6(a: f64, w: f64, rule: &mut QuadratureRule) {
    let b = 0.5 - a;
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let mut p = vec![b; 4];
        p[i] = a;
        p[j] = a;
        rule.bary.push(p);
        rule.weights.push(w);
    }
}

impl QuadratureRule {
    /// Cell rule exact for polynomials of degree `order` (1, 2 or 4) on a
    /// triangle (`dim = 2`) or tetrahedron (`dim = 3`).
    pub fn cell(dim: usize, order: usize) -> Result<Self> {
        let mut rule = QuadratureRule {
            bary: Vec::new(),
            weights: Vec::new(),
        };
        match (dim, order) {
            (2, 1) => {
                rule.bary.push(vec![1.0 / 3.0; 3]);
                rule.weights.push(1.0);
            }
            (2, 2) => triangle_orbit(1.0 / 6.0, 1.0 / 3.0, &mut rule),
            (2, 4) => {
                triangle_orbit(0.445_948_490_915_964_9, 0.223_381_589_678_011_47, &mut rule);
                triangle_orbit(0.091_576_213_509_770_74, 0.109_951_743_655_321_87, &mut rule);
            }
            (3, 1) => {
                rule.bary.push(vec![0.25; 4]);
                rule.weights.push(1.0);
            }
            (3, 2) => tet_orbit4(0.138_196_601_125_010_5, 0.25, &mut rule),
            (3, 4) => {
                // 14-point rule, exact through degree 5.
                tet_orbit4(0.092_735_250_310_891_2, 6.0 * 0.012_248_840_519_393_66, &mut rule);
                tet_orbit4(0.310_885_919_263_300_6, 6.0 * 0.018_781_320_953_002_64, &mut rule);
                tet_orbit6(0.045_503_704_125_649_6, 6.0 * 0.007_091_003_462_846_911, &mut rule);
            }
            (2 | 3, o) => return Err(Error::UnsupportedOrder(o)),
            (d, _) => return Err(Error::Precondition(format!("no cell rule in dimension {d}"))),
        }
        Ok(rule)
    }

    /// Facet rule: 2-point Gauss on segments (degree 3), 3-point rule on
    /// triangles (degree 2).
    pub fn facet(dim: usize) -> Self {
        if dim == 2 {
            let g = 0.5 / 3f64.sqrt();
            QuadratureRule {
                bary: vec![vec![0.5 + g, 0.5 - g], vec![0.5 - g, 0.5 + g]],
                weights: vec![0.5, 0.5],
            }
        } else {
            let mut rule = QuadratureRule {
                bary: Vec::new(),
                weights: Vec::new(),
            };
            triangle_orbit(1.0 / 6.0, 1.0 / 3.0, &mut rule);
            rule
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Physical quadrature points and weights for every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub dim: usize,
    pub rule: QuadratureRule,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Quadrature {
    pub fn new(mesh: &Mesh, order: usize) -> Result<Self> {
        let rule = QuadratureRule::cell(mesh.dim(), order)?;
        let d = mesh.dim();
        let q = rule.len();
        let mut points = Vec::with_capacity(mesh.n_cells() * q * d);
        let mut weights = Vec::with_capacity(mesh.n_cells() * q);
        for c in 0..mesh.n_cells() {
            let vol = mesh.cell_volume(c);
            let cell = mesh.cell(c);
            for (bary, w) in rule.bary.iter().zip(&rule.weights) {
                for a in 0..d {
                    points.push(cell.iter().zip(bary).map(|(&n, l)| l * mesh.node(n)[a]).sum());
                }
                weights.push(w * vol);
            }
        }
        Ok(Self {
            dim: d,
            rule,
            points,
            weights,
        })
    }

    pub fn points_per_cell(&self) -> usize {
        self.rule.len()
    }

    pub fn n_cells(&self) -> usize {
        self.weights.len() / self.points_per_cell()
    }

    pub fn point(&self, c: usize, q: usize) -> &[f64] {
        let i = c * self.points_per_cell() + q;
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, c: usize, q: usize) -> f64 {
        self.weights[c * self.points_per_cell() + q]
    }

    /// Barycentric coordinates of point `q` (same on every cell).
    pub fn bary(&self, q: usize) -> &[f64] {
        &self.rule.bary[q]
    }

    /// `integral of f` over the mesh.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        for c in 0..self.n_cells() {
            for q in 0..self.points_per_cell() {
                acc += self.weight(c, q) * f(self.point(c, q));
            }
        }
        acc
    }
}

/// Physical quadrature on boundary facets.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetQuadrature {
    pub dim: usize,
    pub rule: QuadratureRule,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl FacetQuadrature {
    pub fn new(mesh: &Mesh) -> Self {
        let d = mesh.dim();
        let rule = QuadratureRule::facet(d);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (f, facet) in mesh.boundary_facets().iter().enumerate() {
            let meas = mesh.facet_measure(f);
            for (bary, w) in rule.bary.iter().zip(&rule.weights) {
                for a in 0..d {
                    points.push(facet.nodes.iter().zip(bary).map(|(&n, l)| l * mesh.node(n)[a]).sum());
                }
                weights.push(w * meas);
            }
        }
        Self {
            dim: d,
            rule,
            points,
            weights,
        }
    }

    pub fn points_per_facet(&self) -> usize {
        self.rule.len()
    }

    pub fn n_facets(&self) -> usize {
        self.weights.len() / self.points_per_facet()
    }

    pub fn point(&self, f: usize, q: usize) -> &[f64] {
        let i = f * self.points_per_facet() + q;
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, f: usize, q: usize) -> f64 {
        self.weights[f * self.points_per_facet() + q]
    }

    pub fn bary(&self, q: usize) -> &[f64] {
        &self.rule.bary[q]
    }
}
