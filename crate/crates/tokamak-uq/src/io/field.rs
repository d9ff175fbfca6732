//! Nodal fields as legacy VTK and CSV.

use std::fmt::Write as _;

use tokamak_uq_core::mesh::NodalField;

use super::fmt_f64;

pub fn field_to_vtk(f: &NodalField, name: &str) -> String {
    let m = &*f.mesh;
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{name}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", m.vertex_count());
    for p in m.vertices() {
        let _ = writeln!(s, "{} {} 0", fmt_f64(p.x), fmt_f64(p.y));
    }
    let nt = m.triangle_count();
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in m.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}\nSCALARS {name} double 1\nLOOKUP_TABLE default", m.vertex_count());
    for v in &f.values {
        let _ = writeln!(s, "{}", fmt_f64(*v));
    }
    s
}

pub fn field_to_csv(f: &NodalField) -> String {
    let mut s = String::from("vertex_id,x,y,value\n");
    for (i, (p, v)) in f.mesh.vertices().iter().zip(&f.values).enumerate() {
        let _ = writeln!(s, "{i},{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(*v));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use tokamak_uq_core::mesh::TriMesh;

    #[test]
    fn csv_round_trips_values() {
        let m = Arc::new(TriMesh::rectangle(2, 2, 1.0, 2.0, 0.0, 1.0));
        let f = NodalField::from_fn(m.clone(), |p| p.x / 3.0 - p.y);
        let csv = field_to_csv(&f);
        let back: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(back, f.values);
        let vtk = field_to_vtk(&f, "psi");
        assert!(vtk.contains(&format!("POINT_DATA {}", m.vertex_count())));
        assert!(vtk.contains(&format!("CELLS {} {}", m.triangle_count(), 4 * m.triangle_count())));
    }
}
