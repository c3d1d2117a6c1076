//! Crystalline frames on the material manifold.
//!
//! A crystalline structure is represented at a point `y` by its frame
//! `E_A^a(y)` (columns of [`MaterialFrame::frame`]), the dual coframe
//! `omega^A_a(y)` (rows of [`MaterialFrame::coframe`]) and the structure
//! constants `C^C_AB` of the bracket `[E_A, E_B] = C^C_AB E_C`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Structure constants `C^C_AB`, antisymmetric in `(A, B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    dim: usize,
    values: Vec<f64>,
}

impl StructureConstants {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            values: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, c: usize, a: usize, b: usize) -> usize {
        (c * self.dim + a) * self.dim + b
    }

    /// `C^c_ab` with zero-based indices.
    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.values[self.index(c, a, b)]
    }

    /// Sets `C^c_ab = value` and `C^c_ba = -value`.
    pub fn set_bracket(&mut self, c: usize, a: usize, b: usize, value: f64) {
        let i = self.index(c, a, b);
        let j = self.index(c, b, a);
        self.values[i] = value;
        self.values[j] = -value;
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.dim).all(|c| {
            (0..self.dim).all(|a| (0..self.dim).all(|b| self.get(c, a, b) == -self.get(c, b, a)))
        })
    }

    pub fn is_abelian(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Frame, coframe and structure constants of the crystalline structure at a
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialFrame {
    pub frame: Mat,
    pub coframe: Mat,
    pub structure: StructureConstants,
}

impl MaterialFrame {
    /// Builds a frame and checks duality, orientation and antisymmetry.
    pub fn new(frame: Mat, coframe: Mat, structure: StructureConstants) -> Result<Self> {
        let f = Self {
            frame,
            coframe,
            structure,
        };
        f.validate()?;
        Ok(f)
    }

    /// Builds a frame from `frame` alone; the coframe is its inverse.
    pub fn from_frame(frame: Mat, structure: StructureConstants) -> Result<Self> {
        let coframe = frame
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular frame".into()))?;
        Self::new(frame, coframe, structure)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            frame: Mat::identity(dim, dim),
            coframe: Mat::identity(dim, dim),
            structure: StructureConstants::zero(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.nrows()
    }

    /// `|omega E - I|_inf`.
    pub fn duality_defect(&self) -> f64 {
        let d = self.dim();
        (&self.coframe * &self.frame - Mat::identity(d, d)).amax()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if !(d == 2 || d == 3) {
            return Err(Error::Precondition(format!("frame dimension {d} is not 2 or 3")));
        }
        if self.frame.shape() != (d, d) || self.coframe.shape() != (d, d) || self.structure.dim() != d
        {
            return Err(Error::Precondition("frame, coframe and structure sizes disagree".into()));
        }
        if self.duality_defect() > 1e-12 {
            return Err(Error::Precondition(format!(
                "coframe is not dual to frame (defect {:e})",
                self.duality_defect()
            )));
        }
        if self.frame.determinant() <= 0.0 {
            return Err(Error::Precondition("frame is not positively oriented".into()));
        }
        if !self.structure.is_antisymmetric() {
            return Err(Error::Precondition("structure constants are not antisymmetric".into()));
        }
        Ok(())
    }
}

/// A crystalline structure that can be evaluated at coordinate points.
pub trait FrameField: Send + Sync {
    fn dim(&self) -> usize;
    fn frame_at(&self, y: &[f64]) -> MaterialFrame;
}

/// The affine group `x -> e^{y1} x + y2`: `E_1 = d/dy1`, `E_2 = e^{y1} d/dy2`,
/// `[E_1, E_2] = E_2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AffineGroup;

/// The Heisenberg group with the left-invariant orthonormal frame
/// `E_1 = d/dy1`, `E_2 = d/dy2 + y1 d/dy3`, `E_3 = e^{-beta} d/dy3`, so that
/// `[E_1, E_2] = e^{beta} E_3`.
#[derive(Debug, Clone, Copy)]
pub struct HeisenbergGroup {
    pub beta: f64,
}

/// The translation-invariant frame of flat space (no dislocations).
#[derive(Debug, Clone, Copy)]
pub struct Abelian {
    pub dim: usize,
}

pub fn affine_frame(y: &[f64]) -> MaterialFrame {
    let s = y[0].exp();
    let frame = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, s]);
    let coframe = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, (-y[0]).exp()]);
    let mut structure = StructureConstants::zero(2);
    structure.set_bracket(1, 0, 1, 1.0);
    MaterialFrame {
        frame,
        coframe,
        structure,
    }
}

pub fn heisenberg_frame(y: &[f64], beta: f64) -> MaterialFrame {
    let x = y[0];
    let eb = beta.exp();
    #[rustfmt::skip]
    let frame = DMatrix::from_row_slice(3, 3, &[
        1.0, 0.0, 0.0,
        0.0, 1.0, 0.0,
        0.0, x,   1.0 / eb,
    ]);
    #[rustfmt::skip]
    let coframe = DMatrix::from_row_slice(3, 3, &[
        1.0, 0.0,     0.0,
        0.0, 1.0,     0.0,
        0.0, -eb * x, eb,
    ]);
    let mut structure = StructureConstants::zero(3);
    structure.set_bracket(2, 0, 1, eb);
    MaterialFrame {
        frame,
        coframe,
        structure,
    }
}

impl FrameField for AffineGroup {
    fn dim(&self) -> usize {
        2
    }
    fn frame_at(&self, y: &[f64]) -> MaterialFrame {
        affine_frame(y)
    }
}

impl FrameField for HeisenbergGroup {
    fn dim(&self) -> usize {
        3
    }
    fn frame_at(&self, y: &[f64]) -> MaterialFrame {
        heisenberg_frame(y, self.beta)
    }
}

impl FrameField for Abelian {
    fn dim(&self) -> usize {
        self.dim
    }
    fn frame_at(&self, _y: &[f64]) -> MaterialFrame {
        MaterialFrame::identity(self.dim)
    }
}

/// Components `lambda^C_ab` of the vector-valued dislocation 2-form.
#[derive(Debug, Clone, PartialEq)]
pub struct DislocationDensity {
    dim: usize,
    values: Vec<f64>,
}

impl DislocationDensity {
    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.values[(c * self.dim + a) * self.dim + b]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `lambda(u, v)` as a vector in the crystalline structure.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        (0..d)
            .map(|c| {
                let mut acc = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        acc += self.get(c, a, b) * u[a] * v[b];
                    }
                }
                acc
            })
            .collect()
    }
}

/// `lambda^C_ab = C^C_AB omega^A_a omega^B_b`.
pub fn dislocation_density(frame: &MaterialFrame) -> DislocationDensity {
    let d = frame.dim();
    let w = &frame.coframe;
    let mut values = vec![0.0; d * d * d];
    for c in 0..d {
        for a in 0..d {
            for b in 0..d {
                let mut acc = 0.0;
                for ca in 0..d {
                    for cb in 0..d {
                        let k = frame.structure.get(c, ca, cb);
                        if k != 0.0 {
                            acc += k * w[(ca, a)] * w[(cb, b)];
                        }
                    }
                }
                values[(c * d + a) * d + b] = acc;
            }
        }
    }
    DislocationDensity { dim: d, values }
}
