//! Luxon–Brown plasma current density and the initial guess.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::field::BoundaryKind;
use crate::fmath::powf;
use crate::geometry::{point_in_polygon, Point, RegionTag};
use crate::mesh::{NodalField, TriMesh};
use crate::quad::TRI3;

pub const MU0: f64 = 4.0e-7 * core::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct ProfileParams {
    pub alpha_p: f64,
    pub gamma_p: f64,
    pub beta_p: f64,
    pub lambda_s: f64,
    pub x0: f64,
    pub mu0: f64,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams { alpha_p: 2.0, gamma_p: 1.5, beta_p: 0.5, lambda_s: 0.0, x0: 6.2, mu0: MU0 }
    }
}

impl ProfileParams {
    /// Profile of the bundled ITER-like reference case (about 15 MA, diverted).
    pub fn reference() -> Self {
        ProfileParams { alpha_p: 2.0, gamma_p: 1.395, beta_p: 0.5978, lambda_s: 1.365461e6, x0: 6.2, mu0: MU0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SourceError {
    #[error("invalid profile parameter: {0}")]
    Profile(&'static str),
    #[error("psi at the axis equals psi at the boundary")]
    Normalization,
    #[error("initial guess needs positive semi-axes")]
    Ellipse,
}

impl ProfileParams {
    pub fn validate(&self) -> Result<(), SourceError> {
        if !(self.alpha_p > 0.0) {
            return Err(SourceError::Profile("alpha_p must be positive"));
        }
        if !(self.gamma_p > 0.0) {
            return Err(SourceError::Profile("gamma_p must be positive"));
        }
        if !(0.0..=1.0).contains(&self.beta_p) {
            return Err(SourceError::Profile("beta_p must lie in [0, 1]"));
        }
        if !(self.x0 > 0.0) {
            return Err(SourceError::Profile("x0 must be positive"));
        }
        if !(self.mu0 > 0.0) || !self.lambda_s.is_finite() {
            return Err(SourceError::Profile("mu0 and lambda_s must be finite, mu0 positive"));
        }
        Ok(())
    }

    /// Current density at radius x and normalized flux ψ_N.
    pub fn density(&self, x: f64, psi_n: f64) -> f64 {
        if !(psi_n < 1.0) {
            return 0.0;
        }
        let s = 1.0 - powf(psi_n.max(0.0), self.alpha_p);
        self.lambda_s * (self.beta_p * x / self.x0 + self.x0 * (1.0 - self.beta_p) / x) * powf(s, self.gamma_p)
    }
}

/// What the source needs to know about the current plasma.
#[derive(Clone, Debug, PartialEq)]
pub struct PlasmaState {
    /// Axis and boundary levels used to normalize the flux; sub-vertex fits
    /// where available.
    pub psi_ma: f64,
    pub psi_bd: f64,
    /// Level of the `boundary` polyline itself.
    pub boundary_level: f64,
    pub axis: Point,
    pub axis_vertex: Option<usize>,
    pub boundary_type: BoundaryKind,
    /// Triangles with at least one quadrature point inside the boundary.
    pub plasma_triangles: Vec<usize>,
    pub xpoint: Option<Point>,
    pub xpoint_vertex: Option<usize>,
    pub contact_point: Option<Point>,
    /// Closed boundary polyline, first point repeated.
    pub boundary: Vec<Point>,
    /// ψ_X and ψ_L coincided; diverted was preferred.
    pub tie: bool,
}

impl PlasmaState {
    pub fn psi_n(&self, psi: f64) -> f64 {
        (self.psi_ma - psi) / (self.psi_ma - self.psi_bd)
    }
}

/// Triangles of the limiter interior with quadrature points inside `boundary`,
/// plus the per-triangle inside mask.
pub fn plasma_region(m: &TriMesh, boundary: &[Point]) -> (Vec<usize>, Vec<[bool; 3]>) {
    let poly = match boundary {
        [a, .., b] if a == b => &boundary[..boundary.len() - 1],
        _ => boundary,
    };
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in poly {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let mut tris = Vec::new();
    let mut masks = Vec::new();
    for t in 0..m.triangle_count() {
        if m.tag(t) != RegionTag::InsideLimiter {
            continue;
        }
        let mut mask = [false; 3];
        for (k, (l, _)) in TRI3.iter().enumerate() {
            let p = m.bary_point(t, *l);
            mask[k] = p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1 && point_in_polygon(poly, p);
        }
        if mask.iter().any(|&b| b) {
            tris.push(t);
            masks.push(mask);
        }
    }
    (tris, masks)
}

/// Nodal load of the plasma current, plus its total ∫ j dA.
pub fn plasma_load(f: &NodalField, s: &PlasmaState, p: &ProfileParams) -> Result<(Vec<f64>, f64), SourceError> {
    if s.psi_ma == s.psi_bd {
        return Err(SourceError::Normalization);
    }
    let m = &*f.mesh;
    let (tris, masks) = plasma_region(m, &s.boundary);
    let mut load = vec![0.0; m.vertex_count()];
    let mut total = 0.0;
    for (&t, mask) in tris.iter().zip(&masks) {
        let a = m.area(t);
        let tri = m.triangle(t);
        for (k, (l, w)) in TRI3.iter().enumerate() {
            if !mask[k] {
                continue;
            }
            let x = m.bary_point(t, *l).x;
            let j = p.density(x, s.psi_n(f.eval_bary(t, *l)));
            total += w * a * j;
            for i in 0..3 {
                load[tri[i]] += w * a * j * l[i];
            }
        }
    }
    Ok((load, total))
}

/// Coil plus plasma load.
pub fn plasma_source(f: &NodalField, s: &PlasmaState, p: &ProfileParams, coil: &[f64]) -> Result<Vec<f64>, SourceError> {
    let (mut load, _) = plasma_load(f, s, p)?;
    for (l, c) in load.iter_mut().zip(coil) {
        *l += c;
    }
    Ok(load)
}

/// Elliptic paraboloid ψ₀ = K − ((x−x_c)²/a² + (y−y_c)²/b²), peaked at the
/// centre; ψ₀ = K − 1 on the ellipse. Axis vertices are set to 0.
pub fn initial_guess(m: Arc<TriMesh>, center: Point, a: f64, b: f64, k: f64) -> Result<NodalField, SourceError> {
    if !(a > 0.0 && b > 0.0) {
        return Err(SourceError::Ellipse);
    }
    let values = (0..m.vertex_count())
        .map(|v| {
            if m.is_axis(v) {
                return 0.0;
            }
            let p = m.vertex(v);
            let dx = (p.x - center.x) / a;
            let dy = (p.y - center.y) / b;
            k - (dx * dx + dy * dy)
        })
        .collect();
    Ok(NodalField::new(m, values))
}

/// The ellipse of the initial guess as a closed polyline.
pub fn ellipse_polyline(center: Point, a: f64, b: f64, n: usize) -> Vec<Point> {
    let mut v: Vec<Point> = (0..n)
        .map(|i| {
            let t = 2.0 * core::f64::consts::PI * i as f64 / n as f64;
            Point::new(center.x + a * crate::fmath::cos(t), center.y + b * crate::fmath::sin(t))
        })
        .collect();
    v.push(v[0]);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(m: &TriMesh) -> PlasmaState {
        let boundary = ellipse_polyline(Point::new(2.0, 0.0), 0.6, 0.8, 64);
        let (tris, _) = plasma_region(m, &boundary);
        PlasmaState {
            psi_ma: 1.0,
            psi_bd: 0.0,
            boundary_level: 0.0,
            axis: Point::new(2.0, 0.0),
            axis_vertex: None,
            boundary_type: BoundaryKind::Limited,
            plasma_triangles: tris,
            xpoint: None,
            xpoint_vertex: None,
            contact_point: None,
            boundary,
            tie: false,
        }
    }

    #[test]
    fn boundary_value_gives_no_current() {
        let m = Arc::new(TriMesh::rectangle(20, 20, 1.0, 3.0, -1.0, 1.0));
        let s = state(&m);
        let p = ProfileParams { lambda_s: 1e6, ..Default::default() };
        let f = NodalField::from_fn(m.clone(), |_| 0.0);
        let (load, total) = plasma_load(&f, &s, &p).unwrap();
        assert_eq!(total, 0.0);
        assert!(load.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pressure_only_and_linearity() {
        let p = ProfileParams { lambda_s: 3.0, beta_p: 1.0, ..Default::default() };
        let d = p.density(4.0, 0.5);
        assert!((d - 3.0 * (4.0 / 6.2) * (0.75f64).powf(1.5)).abs() < 1e-14);
        let m = Arc::new(TriMesh::rectangle(20, 20, 1.0, 3.0, -1.0, 1.0));
        let s = state(&m);
        let f = NodalField::from_fn(m.clone(), |q| 1.0 - ((q.x - 2.0) / 0.6).powi(2) - (q.y / 0.8).powi(2));
        let p1 = ProfileParams { lambda_s: 1e5, ..Default::default() };
        let p2 = ProfileParams { lambda_s: 3e5, ..Default::default() };
        let (_, t1) = plasma_load(&f, &s, &p1).unwrap();
        let (_, t2) = plasma_load(&f, &s, &p2).unwrap();
        assert!(t1 > 0.0);
        assert!((t2 - 3.0 * t1).abs() < 1e-12 * t2);
        let mut bad = s.clone();
        bad.psi_bd = bad.psi_ma;
        assert_eq!(plasma_load(&f, &bad, &p1).unwrap_err(), SourceError::Normalization);
    }

    #[test]
    fn guess_peaks_at_centre() {
        let m = Arc::new(TriMesh::rectangle(10, 10, 0.0, 4.0, -2.0, 2.0));
        let f = initial_guess(m.clone(), Point::new(2.0, 0.0), 1.0, 2.0, 5.0).unwrap();
        let (imax, _) = f.values.iter().enumerate().fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        assert_eq!(m.vertex(imax), Point::new(2.0, 0.0));
        assert_eq!(f.values[imax], 5.0);
        for v in 0..m.vertex_count() {
            if m.is_axis(v) {
                assert_eq!(f.values[v], 0.0);
            }
        }
        assert!(initial_guess(m, Point::new(2.0, 0.0), 0.0, 1.0, 1.0).is_err());
    }
}
