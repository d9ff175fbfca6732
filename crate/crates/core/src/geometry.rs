//! Reactor cross-section: coils, walls and the coupling circle.

use alloc::string::String;
use alloc::vec::Vec;

use crate::fmath::{hypot, sqrt};

/// Distance below which a point counts as lying on a wall polyline.
pub const SNAP_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "[f64; 2]", into = "[f64; 2]"))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        hypot(self.x - o.x, self.y - o.y)
    }

    pub fn norm(self) -> f64 {
        hypot(self.x, self.y)
    }

    pub fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        Point::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coil {
    pub id: u32,
    pub center: Point,
    pub width: f64,
    pub height: f64,
    #[cfg_attr(feature = "serde", serde(rename = "current"))]
    pub reference_current: f64,
}

impl Coil {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn corners(&self) -> [Point; 4] {
        let (hw, hh) = (0.5 * self.width, 0.5 * self.height);
        let c = self.center;
        [
            Point::new(c.x - hw, c.y - hh),
            Point::new(c.x + hw, c.y - hh),
            Point::new(c.x + hw, c.y + hh),
            Point::new(c.x - hw, c.y + hh),
        ]
    }

    pub fn contains(&self, p: Point) -> bool {
        (p.x - self.center.x).abs() <= 0.5 * self.width
            && (p.y - self.center.y).abs() <= 0.5 * self.height
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReactorGeometry {
    pub gamma_radius: f64,
    pub coils: Vec<Coil>,
    /// Closed first-wall polygon; the closing segment is implicit.
    pub limiter: Vec<Point>,
    /// Target plates as one open polyline.
    #[cfg_attr(feature = "serde", serde(default))]
    pub divertor: Vec<Point>,
    /// Closed outer vessel polygon.
    #[cfg_attr(feature = "serde", serde(default))]
    pub vessel_outer: Vec<Point>,
}

/// Membership tag of a point of the half-plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegionTag {
    Coil(usize),
    InsideLimiter,
    BetweenWalls,
    /// Inside Γ but outside the vessel and the coils.
    Vacuum,
    ExteriorOfGamma,
    OnStructure,
}

impl RegionTag {
    /// Integer code used in mesh files.
    pub fn code(self) -> i64 {
        match self {
            RegionTag::Vacuum => 0,
            RegionTag::InsideLimiter => 1,
            RegionTag::BetweenWalls => 2,
            RegionTag::OnStructure => 3,
            RegionTag::ExteriorOfGamma => 4,
            RegionTag::Coil(i) => 100 + i as i64,
        }
    }

    pub fn from_code(c: i64) -> Option<RegionTag> {
        Some(match c {
            0 => RegionTag::Vacuum,
            1 => RegionTag::InsideLimiter,
            2 => RegionTag::BetweenWalls,
            3 => RegionTag::OnStructure,
            4 => RegionTag::ExteriorOfGamma,
            c if c >= 100 => RegionTag::Coil((c - 100) as usize),
            _ => return None,
        })
    }

    pub fn in_vessel(self) -> bool {
        matches!(self, RegionTag::InsideLimiter | RegionTag::BetweenWalls)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("coil {0}: non-positive width or height")]
    CoilSize(u32),
    #[error("coil {0}: coil in x <= 0 half-plane")]
    CoilHalfPlane(u32),
    #[error("coil {0}: rectangle not strictly inside gamma (radius {1})")]
    CoilOutsideGamma(u32, f64),
    #[error("{0}: polyline needs at least {1} points")]
    TooFewPoints(&'static str, usize),
    #[error("{0}: point ({1}, {2}) outside gamma or in x <= 0")]
    WallOutside(&'static str, f64, f64),
    #[error("limiter polyline self-intersects at segments {0} and {1}")]
    LimiterNotSimple(usize, usize),
    #[error("gamma_radius must be positive")]
    BadRadius,
    #[error("current vector has {got} entries, geometry has {want} coils")]
    LengthMismatch { got: usize, want: usize },
    #[error("{0}")]
    Other(String),
}

/// Coil currents in amperes, one per coil.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurrentVector {
    pub values: Vec<f64>,
}

impl CurrentVector {
    pub fn new(values: Vec<f64>) -> Self {
        CurrentVector { values }
    }

    pub fn zeros(n: usize) -> Self {
        CurrentVector { values: alloc::vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, a: f64) -> Self {
        CurrentVector { values: self.values.iter().map(|v| a * v).collect() }
    }
}

impl ReactorGeometry {
    /// Drops a repeated closing point from closed polylines, then checks invariants.
    pub fn normalized(mut self) -> Result<Self, GeometryError> {
        for poly in [&mut self.limiter, &mut self.vessel_outer] {
            if poly.len() > 1 && poly.first() == poly.last() {
                poly.pop();
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let rho = self.gamma_radius;
        if !(rho > 0.0) {
            return Err(GeometryError::BadRadius);
        }
        for c in &self.coils {
            if !(c.width > 0.0 && c.height > 0.0) {
                return Err(GeometryError::CoilSize(c.id));
            }
            if c.center.x <= 0.0 || c.center.x - 0.5 * c.width <= 0.0 {
                return Err(GeometryError::CoilHalfPlane(c.id));
            }
            if c.corners().iter().any(|p| p.norm() >= rho) {
                return Err(GeometryError::CoilOutsideGamma(c.id, rho));
            }
        }
        if self.limiter.len() < 3 {
            return Err(GeometryError::TooFewPoints("limiter", 3));
        }
        if !self.vessel_outer.is_empty() && self.vessel_outer.len() < 3 {
            return Err(GeometryError::TooFewPoints("vessel_outer", 3));
        }
        for (name, poly) in [
            ("limiter", &self.limiter),
            ("divertor", &self.divertor),
            ("vessel_outer", &self.vessel_outer),
        ] {
            for p in poly.iter() {
                if p.norm() >= rho || p.x <= 0.0 {
                    return Err(GeometryError::WallOutside(name, p.x, p.y));
                }
            }
        }
        if let Some((i, j)) = closed_self_intersection(&self.limiter) {
            return Err(GeometryError::LimiterNotSimple(i, j));
        }
        Ok(())
    }

    pub fn coil_areas(&self) -> Vec<f64> {
        self.coils.iter().map(Coil::area).collect()
    }

    pub fn reference_currents(&self) -> CurrentVector {
        CurrentVector::new(self.coils.iter().map(|c| c.reference_current).collect())
    }

    pub fn coil_current_density(&self, i: &CurrentVector) -> Result<Vec<f64>, GeometryError> {
        if i.len() != self.coils.len() {
            return Err(GeometryError::LengthMismatch { got: i.len(), want: self.coils.len() });
        }
        Ok(self.coils.iter().zip(&i.values).map(|(c, cur)| cur / c.area()).collect())
    }

    /// Limiter segments including the closing one.
    pub fn limiter_segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        closed_segments(&self.limiter)
    }

    pub fn divertor_segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.divertor.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn in_limiter(&self, p: Point) -> bool {
        point_in_polygon(&self.limiter, p)
    }

    pub fn classify_point(&self, p: Point) -> RegionTag {
        if p.norm() > self.gamma_radius {
            return RegionTag::ExteriorOfGamma;
        }
        let near = |poly: &[Point], closed: bool| -> bool {
            let n = poly.len();
            let segs = if closed { n } else { n.saturating_sub(1) };
            (0..segs).any(|k| dist_point_segment(p, poly[k], poly[(k + 1) % n]) <= SNAP_TOL)
        };
        if near(&self.limiter, true)
            || near(&self.divertor, false)
            || (!self.vessel_outer.is_empty() && near(&self.vessel_outer, true))
        {
            return RegionTag::OnStructure;
        }
        if let Some(i) = self.coils.iter().position(|c| c.contains(p)) {
            return RegionTag::Coil(i);
        }
        if point_in_polygon(&self.limiter, p) {
            return RegionTag::InsideLimiter;
        }
        if !self.vessel_outer.is_empty() && point_in_polygon(&self.vessel_outer, p) {
            return RegionTag::BetweenWalls;
        }
        RegionTag::Vacuum
    }

    /// Largest distance from the origin over all structures.
    pub fn structure_extent(&self) -> f64 {
        let mut r: f64 = 0.0;
        for c in &self.coils {
            for p in c.corners() {
                r = r.max(p.norm());
            }
        }
        for p in self.limiter.iter().chain(&self.divertor).chain(&self.vessel_outer) {
            r = r.max(p.norm());
        }
        r
    }

    /// Geometry dilated by `c` about the origin; currents unchanged.
    pub fn dilated(&self, c: f64) -> ReactorGeometry {
        let s = |p: &Point| Point::new(c * p.x, c * p.y);
        ReactorGeometry {
            gamma_radius: c * self.gamma_radius,
            coils: self
                .coils
                .iter()
                .map(|k| Coil {
                    center: s(&k.center),
                    width: c * k.width,
                    height: c * k.height,
                    ..k.clone()
                })
                .collect(),
            limiter: self.limiter.iter().map(s).collect(),
            divertor: self.divertor.iter().map(s).collect(),
            vessel_outer: self.vessel_outer.iter().map(s).collect(),
        }
    }
}

pub fn closed_segments(poly: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = poly.len();
    (0..n).map(move |k| (poly[k], poly[(k + 1) % n]))
}

/// Crossing-number test; points on the boundary may go either way.
pub fn point_in_polygon(poly: &[Point], p: Point) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < xc {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut s = 0.0;
    for k in 0..n {
        s += poly[k].cross(poly[(k + 1) % n]);
    }
    0.5 * s
}

pub fn dist_point_segment(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let l2 = ab.dot(ab);
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / l2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

/// Intersection of segments ab and cd as (point, t on ab, u on cd).
/// Parallel segments never intersect here.
pub fn segment_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<(Point, f64, f64)> {
    let r = b.sub(a);
    let s = d.sub(c);
    let den = r.cross(s);
    let scale = sqrt(r.dot(r) * s.dot(s));
    if den.abs() <= 1e-14 * scale {
        return None;
    }
    let ca = c.sub(a);
    let t = ca.cross(s) / den;
    let u = ca.cross(r) / den;
    const E: f64 = 1e-12;
    if (-E..=1.0 + E).contains(&t) && (-E..=1.0 + E).contains(&u) {
        Some((a.lerp(b, t), t, u))
    } else {
        None
    }
}

fn closed_self_intersection(poly: &[Point]) -> Option<(usize, usize)> {
    let n = poly.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segment_intersection(a, b, c, d).is_some() {
                return Some((i, j));
            }
        }
    }
    None
}

impl core::fmt::Display for RegionTag {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RegionTag::Coil(i) => write!(f, "coil({i})"),
            RegionTag::InsideLimiter => f.write_str("inside_limiter"),
            RegionTag::BetweenWalls => f.write_str("between_walls"),
            RegionTag::Vacuum => f.write_str("vacuum"),
            RegionTag::ExteriorOfGamma => f.write_str("exterior_of_gamma"),
            RegionTag::OnStructure => f.write_str("on_structure"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn square() -> ReactorGeometry {
        ReactorGeometry {
            gamma_radius: 10.0,
            coils: vec![Coil {
                id: 1,
                center: Point::new(6.0, 0.0),
                width: 1.0,
                height: 1.0,
                reference_current: -1.4e6,
            }],
            limiter: vec![
                Point::new(1.0, -2.0),
                Point::new(4.0, -2.0),
                Point::new(4.0, 2.0),
                Point::new(1.0, 2.0),
            ],
            divertor: vec![],
            vessel_outer: vec![
                Point::new(0.5, -3.0),
                Point::new(5.0, -3.0),
                Point::new(5.0, 3.0),
                Point::new(0.5, 3.0),
            ],
        }
    }

    #[test]
    fn density_unit_area() {
        let g = square();
        let d = g.coil_current_density(&CurrentVector::new(vec![-1.4e6])).unwrap();
        assert_eq!(d, vec![-1.4e6]);
        let d = g.coil_current_density(&CurrentVector::zeros(1)).unwrap();
        assert_eq!(d, vec![0.0]);
        assert!(g.coil_current_density(&CurrentVector::zeros(2)).is_err());
    }

    #[test]
    fn density_two_square_metres() {
        let mut g = square();
        g.coils[0].width = 2.0;
        let d = g.coil_current_density(&CurrentVector::new(vec![3.0])).unwrap();
        assert_eq!(d[0], 1.5);
    }

    #[test]
    fn classify() {
        let g = square();
        assert_eq!(g.classify_point(Point::new(6.0, 0.0)), RegionTag::Coil(0));
        assert_eq!(g.classify_point(Point::new(20.0, 0.0)), RegionTag::ExteriorOfGamma);
        assert_eq!(g.classify_point(Point::new(2.0, 0.0)), RegionTag::InsideLimiter);
        assert_eq!(g.classify_point(Point::new(4.5, 0.0)), RegionTag::BetweenWalls);
        assert_eq!(g.classify_point(Point::new(4.0, 0.5)), RegionTag::OnStructure);
        assert_eq!(g.classify_point(Point::new(8.0, 5.0)), RegionTag::Vacuum);
    }

    #[test]
    fn invalid_coil() {
        let mut g = square();
        g.coils[0].center = Point::new(-1.0, 0.0);
        assert_eq!(g.validate(), Err(GeometryError::CoilHalfPlane(1)));
        let mut g = square();
        g.coils.clear();
        assert!(g.validate().is_ok());
    }

    #[test]
    fn self_intersecting_limiter() {
        let mut g = square();
        g.limiter.swap(1, 2);
        assert!(matches!(g.validate(), Err(GeometryError::LimiterNotSimple(..))));
    }

    #[test]
    fn segments_cross() {
        let (p, t, u) = segment_intersection(
            Point::new(0.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
            Point::new(2.0, 0.0),
        )
        .unwrap();
        assert!((p.x - 1.0).abs() < 1e-15 && (p.y - 1.0).abs() < 1e-15);
        assert!((t - 0.5).abs() < 1e-15 && (u - 0.5).abs() < 1e-15);
        assert!(segment_intersection(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0)
        )
        .is_none());
    }
}
