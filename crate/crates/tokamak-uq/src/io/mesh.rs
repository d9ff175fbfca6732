//! Plain-text mesh format: `nodes N` then `x y axis gamma` lines, `elements M`
//! then `v1 v2 v3 tag` lines, 0-based indices.

use std::fmt::Write as _;
use std::path::Path;

use tokamak_uq_core::geometry::{Point, RegionTag};
use tokamak_uq_core::mesh::TriMesh;

use super::IoError;

pub fn load_mesh(path: &Path) -> Result<TriMesh, IoError> {
    parse_mesh(&super::read(path)?, path)
}

pub fn parse_mesh(text: &str, path: &Path) -> Result<TriMesh, IoError> {
    let err = |line: usize, msg: &str| IoError::Parse { path: path.to_path_buf(), msg: format!("line {line}: {msg}") };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let count = |lines: &mut dyn Iterator<Item = (usize, &str)>, key: &str| -> Result<usize, IoError> {
        let (ln, l) = lines.next().ok_or_else(|| err(0, &format!("missing '{key}' header")))?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(err(ln, &format!("expected '{key} <count>'")));
        }
        it.next().and_then(|s| s.parse().ok()).ok_or_else(|| err(ln, "bad count"))
    };
    let nn = count(&mut lines, "nodes")?;
    let mut verts = Vec::with_capacity(nn);
    let mut axis = Vec::with_capacity(nn);
    let mut gamma = Vec::with_capacity(nn);
    for _ in 0..nn {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "truncated node list"))?;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 4 {
            return Err(err(ln, "node line needs 4 fields"));
        }
        let x: f64 = f[0].parse().map_err(|_| err(ln, "bad x"))?;
        let y: f64 = f[1].parse().map_err(|_| err(ln, "bad y"))?;
        verts.push(Point::new(x, y));
        axis.push(f[2] == "1");
        gamma.push(f[3] == "1");
    }
    let ne = count(&mut lines, "elements")?;
    let mut tris = Vec::with_capacity(ne);
    let mut tags = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = lines.next().ok_or_else(|| err(0, "truncated element list"))?;
        let f: Vec<i64> = l
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| err(ln, "bad integer")))
            .collect::<Result<_, _>>()?;
        if f.len() != 4 || f[..3].iter().any(|&v| v < 0) {
            return Err(err(ln, "element line needs 3 vertex indices and a tag"));
        }
        tris.push([f[0] as usize, f[1] as usize, f[2] as usize]);
        tags.push(RegionTag::from_code(f[3]).ok_or_else(|| err(ln, "unknown region tag"))?);
    }
    TriMesh::new(verts, tris, tags, axis, gamma)
        .map_err(|e| IoError::Parse { path: path.to_path_buf(), msg: e.to_string() })
}

pub fn mesh_to_string(m: &TriMesh) -> String {
    let mut s = String::new();
    writeln!(s, "nodes {}", m.vertex_count()).unwrap();
    for v in 0..m.vertex_count() {
        let p = m.vertex(v);
        writeln!(s, "{:?} {:?} {} {}", p.x, p.y, m.is_axis(v) as u8, m.is_gamma(v) as u8).unwrap();
    }
    writeln!(s, "elements {}", m.triangle_count()).unwrap();
    for t in 0..m.triangle_count() {
        let [a, b, c] = m.triangle(t);
        writeln!(s, "{a} {b} {c} {}", m.tag(t).code()).unwrap();
    }
    s
}

pub fn save_mesh(m: &TriMesh, path: &Path) -> Result<(), IoError> {
    super::write(path, mesh_to_string(m).as_bytes())
}
