#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use tokamak_uq::io::{geometry::load_geometry, mesh::load_mesh};
use tokamak_uq_core::solver::elliptic_ke_split;
use tokamak_uq_core::geometry::{Point, ReactorGeometry};
use tokamak_uq_core::mesh::TriMesh;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn iter_like() -> (ReactorGeometry, Arc<TriMesh>) {
    let g = load_geometry(&data_dir().join("iter_like.geom")).expect("bundled geometry");
    let m = load_mesh(&data_dir().join("iter_like_coarse.mesh")).expect("bundled mesh");
    (g, Arc::new(m))
}

/// Flux of a unit circular filament of radius `a` at height `b`, evaluated at p.
pub fn filament(a: f64, b: f64, p: Point, mu0: f64) -> f64 {
    let dz = p.y - b;
    let s = (a + p.x) * (a + p.x) + dz * dz;
    let k2 = 4.0 * a * p.x / s;
    let kp2 = ((a - p.x) * (a - p.x) + dz * dz) / s;
    let (kk, ee) = elliptic_ke_split(k2, kp2);
    mu0 / std::f64::consts::PI * (a * p.x).sqrt() / k2.sqrt() * ((1.0 - k2 / 2.0) * kk - ee)
}
