//! Physics features of a flux field: axis, x-point, plasma boundary, strike
//! points and shaping.

pub mod boundary;
pub mod contour;
pub mod critical;
pub mod shaping;

use alloc::vec::Vec;

pub use boundary::{
    classify_boundary, critical_points, limiter_level, strike_points, BoundaryKind, BoundaryPolyline, Classification,
    CriticalPoints, XPoint,
};
pub use contour::{extract_contour, Polyline};
pub use critical::{
    find_axis, quadratic_stationary, recover_gradient, saddle_candidates, select_xpoint, sign_changes, Axis, RecoveredGradient,
};
pub use shaping::{shaping, ShapingParams};

use crate::geometry::{Point, ReactorGeometry};
use crate::mesh::NodalField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("no vertex inside the limiter")]
    NoInteriorVertex,
    #[error("no closed flux surface around the axis")]
    NoConfinement,
    #[error("degenerate boundary polyline")]
    DegenerateBoundary,
}

/// Everything the statistics need from one equilibrium.
#[derive(Clone, Debug, PartialEq)]
pub struct Features {
    pub kind: BoundaryKind,
    pub psi_ma: f64,
    pub psi_bd: f64,
    pub axis: Point,
    pub xpoint: Option<Point>,
    pub strike_points: Vec<Point>,
    pub contact_point: Option<Point>,
    pub shaping: ShapingParams,
    pub boundary: Vec<Point>,
    pub tie: bool,
}

pub fn analyze(f: &NodalField, g: &ReactorGeometry) -> Result<Features, FieldError> {
    let crit = critical_points(f)?;
    let c = classify_boundary(f, g, &crit)?;
    let sp = match c.boundary.kind {
        BoundaryKind::Diverted => {
            strike_points(f, c.boundary.psi_level, &g.divertor, c.xpoint.map(|x| x.point), crit.axis.point)
        }
        _ => Vec::new(),
    };
    let shp = shaping(&c.boundary.points)?;
    Ok(Features {
        kind: c.boundary.kind,
        psi_ma: crit.axis.value,
        psi_bd: c.boundary.psi_level,
        axis: crit.axis.point,
        xpoint: match c.boundary.kind {
            BoundaryKind::Limited => None,
            _ => c.xpoint.map(|x| x.point),
        },
        strike_points: sp,
        contact_point: c.contact_point,
        shaping: shp,
        boundary: c.boundary.points,
        tie: c.tie,
    })
}
