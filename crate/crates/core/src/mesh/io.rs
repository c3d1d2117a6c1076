//! ASCII mesh files.
//!
//! ```text
//! dim <d>
//! nodes <N>
//! <N lines of d coordinates>
//! cells <C>
//! <C lines of d+1 zero-based node indices>
//! boundary <B>
//! <B lines of d node indices followed by the owning cell index>
//! ```
//!
//! Coordinates are written in shortest round-trip form, so a save/load
//! cycle reproduces them bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, MeshError, Result};
use crate::mesh::{BoundaryFacet, Mesh};

pub fn write_mesh(mesh: &Mesh) -> String {
    let d = mesh.dim();
    let mut out = String::new();
    let _ = writeln!(out, "dim {d}");
    let _ = writeln!(out, "nodes {}", mesh.n_nodes());
    for n in 0..mesh.n_nodes() {
        let line: Vec<String> = mesh.node(n).iter().map(|x| format!("{x:?}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let _ = writeln!(out, "cells {}", mesh.n_cells());
    for c in 0..mesh.n_cells() {
        let line: Vec<String> = mesh.cell(c).iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    let _ = writeln!(out, "boundary {}", mesh.boundary_facets().len());
    for f in mesh.boundary_facets() {
        let line: Vec<String> = f.nodes.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{} {}", line.join(" "), f.cell);
    }
    out
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_mesh(mesh)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_mesh(&text)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let l = l.trim();
            if !l.is_empty() {
                return Some((i + 1, l));
            }
        }
        None
    }

    fn header(&mut self, key: &str) -> std::result::Result<usize, MeshError> {
        let Some((line, text)) = self.next() else {
            return Err(MeshError::Header {
                line: 0,
                expected: format!("{key} <count>"),
            });
        };
        let mut it = text.split_whitespace();
        let ok = it.next() == Some(key);
        let value = it.next().and_then(|v| v.parse::<usize>().ok());
        match (ok, value, it.next()) {
            (true, Some(v), None) => Ok(v),
            _ => Err(MeshError::Header {
                line,
                expected: format!("{key} <count>"),
            }),
        }
    }

    fn record<T: std::str::FromStr>(
        &mut self,
        what: &'static str,
        declared: usize,
        found: usize,
        width: usize,
    ) -> std::result::Result<Vec<T>, MeshError>
    where
        T::Err: std::fmt::Display,
    {
        let Some((line, text)) = self.next() else {
            return Err(MeshError::Count {
                what,
                declared,
                found,
            });
        };
        let values = text
            .split_whitespace()
            .map(|t| t.parse::<T>())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|e| MeshError::Parse {
                line,
                message: format!("{e}"),
            })?;
        if values.len() != width {
            return Err(MeshError::Parse {
                line,
                message: format!("expected {width} values, got {}", values.len()),
            });
        }
        Ok(values)
    }
}

pub fn parse_mesh(text: &str) -> std::result::Result<Mesh, MeshError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let dim = lines.header("dim")?;
    if dim != 2 && dim != 3 {
        return Err(MeshError::Dimension(dim));
    }
    let n_nodes = lines.header("nodes")?;
    let mut nodes = Vec::with_capacity(n_nodes * dim);
    for i in 0..n_nodes {
        let p: Vec<f64> = lines.record("nodes", n_nodes, i, dim)?;
        nodes.extend(p);
    }
    let n_cells = lines.header("cells")?;
    let mut cells = Vec::with_capacity(n_cells * (dim + 1));
    for i in 0..n_cells {
        let c: Vec<usize> = lines.record("cells", n_cells, i, dim + 1)?;
        cells.extend(c);
    }
    let n_boundary = lines.header("boundary")?;
    let mut boundary = Vec::with_capacity(n_boundary);
    for i in 0..n_boundary {
        let mut f: Vec<usize> = lines.record("boundary facets", n_boundary, i, dim + 1)?;
        let cell = f.pop().expect("width checked");
        boundary.push(BoundaryFacet { nodes: f, cell });
    }
    if let Some((line, _)) = lines.next() {
        return Err(MeshError::Parse {
            line,
            message: "trailing content after boundary section".into(),
        });
    }
    Mesh::new(dim, nodes, cells, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_ball_mesh, generate_disk_mesh};

    #[test]
    fn round_trip_is_exact() {
        for m in [generate_disk_mesh(1.0, 0.3).unwrap(), generate_ball_mesh(0.7, 0.3).unwrap()] {
            let back = parse_mesh(&write_mesh(&m)).unwrap();
            assert_eq!(back, m);
            assert!(m
                .coordinates()
                .iter()
                .zip(back.coordinates())
                .all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn negative_cell_names_index() {
        let text = "dim 2\nnodes 4\n0 0\n1 0\n0 1\n1 1\ncells 2\n0 1 2\n1 2 3\nboundary 0\n";
        match parse_mesh(text).unwrap_err() {
            MeshError::NonPositiveCell { cell, .. } => assert_eq!(cell, 1),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            parse_mesh("dim 2\nnodes 1\n0 0\ncells 0\nboundary 0\n").unwrap_err(),
            MeshError::EmptyCells
        ));
        assert!(matches!(
            parse_mesh("dim 2\nnodes 3\n0 0\n1 0\n").unwrap_err(),
            MeshError::Count { what: "nodes", declared: 3, found: 2 }
        ));
        assert!(matches!(
            parse_mesh("dim 2\nnodes 1\n0 zero\n").unwrap_err(),
            MeshError::Parse { line: 3, .. }
        ));
        assert!(matches!(
            parse_mesh("dimension 2\n").unwrap_err(),
            MeshError::Header { line: 1, .. }
        ));
        assert!(matches!(
            parse_mesh("dim 2\nnodes 3\n0 0\n1 0\n0 1\ncells 1\n0 1 7\nboundary 0\n").unwrap_err(),
            MeshError::DanglingNode { cell: 0, node: 7, .. }
        ));
    }
}
