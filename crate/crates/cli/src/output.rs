//! CSV, legacy VTK and summary writers. Floats use shortest round-trip
//! exponent form.

use std::fmt::Write as _;

use dislocq_core::equilibrium::CellStress;
use dislocq_core::linalg::Mat;
use dislocq_core::{DisplacementField, Mesh};

const AXES: [&str; 3] = ["1", "2", "3"];

pub fn displacement_csv(mesh: &Mesh, psi: &DisplacementField) -> String {
    let d = mesh.dim();
    let mut out = String::from("node");
    for a in &AXES[..d] {
        let _ = write!(out, ",y{a}");
    }
    for a in &AXES[..d] {
        let _ = write!(out, ",psi{a}");
    }
    out.push('\n');
    for n in 0..mesh.n_nodes() {
        let _ = write!(out, "{n}");
        for v in mesh.node(n).iter().chain(psi.at_node(n)) {
            let _ = write!(out, ",{v:e}");
        }
        out.push('\n');
    }
    out
}

fn tensor_header(out: &mut String, name: &str, d: usize) {
    for a in &AXES[..d] {
        for b in &AXES[..d] {
            let _ = write!(out, ",{name}{a}{b}");
        }
    }
}

fn tensor_values(out: &mut String, m: &Mat) {
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            let _ = write!(out, ",{:e}", m[(a, b)]);
        }
    }
}

/// One row per cell: material stress `S`, spatial stress `T` and energy
/// density at the centroid.
pub fn stress_csv(mesh: &Mesh, stresses: &[CellStress]) -> String {
    let d = mesh.dim();
    let mut out = String::from("cell");
    tensor_header(&mut out, "S", d);
    tensor_header(&mut out, "T", d);
    out.push_str(",energy_density\n");
    for (c, s) in stresses.iter().enumerate() {
        let _ = write!(out, "{c}");
        tensor_values(&mut out, &s.s);
        tensor_values(&mut out, &s.t);
        let _ = writeln!(out, ",{:e}", s.energy_density);
    }
    out
}

fn padded(m: &Mat) -> [[f64; 3]; 3] {
    let mut p = [[0.0; 3]; 3];
    for (a, row) in p.iter_mut().enumerate().take(m.nrows()) {
        for (b, v) in row.iter_mut().enumerate().take(m.ncols()) {
            *v = m[(a, b)];
        }
    }
    p
}

/// Legacy ASCII unstructured grid with the displacement as point vectors
/// and stresses and energy density as cell data.
pub fn vtk(mesh: &Mesh, psi: &DisplacementField, stresses: &[CellStress]) -> String {
    let d = mesh.dim();
    let (n, c) = (mesh.n_nodes(), mesh.n_cells());
    let mut out = String::from("# vtk DataFile Version 3.0\ndislocq equilibrium\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {n} double");
    let pad3 = |v: &[f64]| {
        let mut p = [0.0; 3];
        p[..v.len()].copy_from_slice(v);
        p
    };
    for k in 0..n {
        let p = pad3(mesh.node(k));
        let _ = writeln!(out, "{:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    let _ = writeln!(out, "CELLS {c} {}", c * (d + 2));
    for k in 0..c {
        let ids: Vec<String> = mesh.cell(k).iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{} {}", d + 1, ids.join(" "));
    }
    let _ = writeln!(out, "CELL_TYPES {c}");
    let kind = if d == 2 { 5 } else { 10 };
    for _ in 0..c {
        let _ = writeln!(out, "{kind}");
    }
    let _ = writeln!(out, "POINT_DATA {n}\nVECTORS displacement double");
    for k in 0..n {
        let p = pad3(psi.at_node(k));
        let _ = writeln!(out, "{:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    let _ = writeln!(out, "CELL_DATA {c}");
    for (name, pick) in [("material_stress", 0), ("spatial_stress", 1)] {
        let _ = writeln!(out, "TENSORS {name} double");
        for s in stresses {
            let t = padded(if pick == 0 { &s.s } else { &s.t });
            for row in t {
                let _ = writeln!(out, "{:e} {:e} {:e}", row[0], row[1], row[2]);
            }
        }
    }
    let _ = writeln!(out, "SCALARS energy_density double 1\nLOOKUP_TABLE default");
    for s in stresses {
        let _ = writeln!(out, "{:e}", s.energy_density);
    }
    out
}
