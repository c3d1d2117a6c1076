use std::path::PathBuf;

use thiserror::Error;

use crate::equilibrium::IterationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("point at normal-coordinate radius {radius} lies outside the chart bound {bound}")]
    ChartDomain { radius: f64, bound: f64 },

    #[error("element {cell} is inverted (det of deformation gradient = {det})")]
    InvertedElement { cell: usize, det: f64 },

    #[error("unsupported quadrature order {0} (expected 1, 2 or 4)")]
    UnsupportedOrder(usize),

    #[error("the gauge origin is not a mesh node")]
    OriginNotNode,

    #[error("conjugate gradient did not converge in {iterations} iterations (last relative residual {:e})", residual_history.last().copied().unwrap_or(f64::NAN))]
    CgNotConverged {
        iterations: usize,
        residual_history: Vec<f64>,
    },

    #[error("outer iteration did not converge after {} iterates", report.rows.len())]
    Diverged { report: Box<IterationReport> },

    #[error("outer iterate {iterate} inverted element {cell}")]
    InvertedIterate {
        iterate: usize,
        cell: usize,
        report: Box<IterationReport>,
    },

    #[error(transparent)]
    Mesh(#[from] MeshError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Mesh construction, parsing and validation failures.
#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("line {line}: expected `{expected}`")]
    Header { line: usize, expected: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("declared {declared} {what} but found {found}")]
    Count {
        what: &'static str,
        declared: usize,
        found: usize,
    },

    #[error("mesh dimension must be 2 or 3, got {0}")]
    Dimension(usize),

    #[error("mesh has no cells")]
    EmptyCells,

    #[error("cell {cell} references node {node}, but the mesh has {n_nodes} nodes")]
    DanglingNode {
        cell: usize,
        node: usize,
        n_nodes: usize,
    },

    #[error("cell {cell} has non-positive signed volume {volume}")]
    NonPositiveCell { cell: usize, volume: f64 },

    #[error("boundary facet {facet}: {message}")]
    Boundary { facet: usize, message: String },

    #[error("facet shared by more than two cells (cells {cells:?})")]
    NonManifold { cells: Vec<usize> },
}
