//! Geometry documents (JSON).

use std::path::Path;

use tokamak_uq_core::geometry::ReactorGeometry;

use super::IoError;

pub fn load_geometry(path: &Path) -> Result<ReactorGeometry, IoError> {
    let text = super::read(path)?;
    parse_geometry(&text, path)
}

pub fn parse_geometry(text: &str, path: &Path) -> Result<ReactorGeometry, IoError> {
    let g: ReactorGeometry = serde_json::from_str(text)
        .map_err(|e| IoError::Parse { path: path.to_path_buf(), msg: e.to_string() })?;
    g.normalized().map_err(|source| IoError::Geometry { path: path.to_path_buf(), source })
}

pub fn geometry_to_string(g: &ReactorGeometry) -> String {
    serde_json::to_string_pretty(g).expect("geometry serializes")
}

pub fn save_geometry(g: &ReactorGeometry, path: &Path) -> Result<(), IoError> {
    super::write(path, geometry_to_string(g).as_bytes())
}
