//! Elongation, triangularity and aspect ratio of a closed boundary.

use crate::geometry::Point;

use super::FieldError;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShapingParams {
    pub r_geo: f64,
    pub a_minor: f64,
    pub eps: f64,
    pub kappa_e: f64,
    pub delta_u: f64,
    pub delta_l: f64,
}

/// Shaping from the polyline extrema; tied extremal x values are averaged.
pub fn shaping(points: &[Point]) -> Result<ShapingParams, FieldError> {
    let pts = match points {
        [first, .., last] if first == last && points.len() > 1 => &points[..points.len() - 1],
        _ => points,
    };
    if pts.len() < 3 {
        return Err(FieldError::DegenerateBoundary);
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in pts {
        xmin = xmin.min(p.x);
        xmax = xmax.max(p.x);
        ymin = ymin.min(p.y);
        ymax = ymax.max(p.y);
    }
    let x_at = |y: f64| {
        let (s, n) = pts.iter().filter(|p| p.y == y).fold((0.0, 0usize), |(s, n), p| (s + p.x, n + 1));
        s / n as f64
    };
    let a = 0.5 * (xmax - xmin);
    if !(a > 0.0) || !(ymax > ymin) {
        return Err(FieldError::DegenerateBoundary);
    }
    let r = 0.5 * (xmax + xmin);
    Ok(ShapingParams {
        r_geo: r,
        a_minor: a,
        eps: a / r,
        kappa_e: (ymax - ymin) / (2.0 * a),
        delta_u: (r - x_at(ymax)) / a,
        delta_l: (r - x_at(ymin)) / a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use core::f64::consts::PI;

    fn ellipse(top_x: f64) -> Vec<Point> {
        // x ∈ [1,3], y ∈ [−2,2]; the top point moved to top_x.
        let mut v: Vec<Point> = (0..64)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 64.0;
                Point::new(2.0 + libm::cos(t), 2.0 * libm::sin(t))
            })
            .collect();
        v[16] = Point::new(top_x, 2.0);
        v[0] = Point::new(3.0, 0.0);
        v[32] = Point::new(1.0, 0.0);
        v[48] = Point::new(2.0, -2.0);
        v
    }

    #[test]
    fn symmetric_ellipse() {
        let s = shaping(&ellipse(2.0)).unwrap();
        assert_eq!((s.r_geo, s.a_minor, s.eps, s.kappa_e, s.delta_u, s.delta_l), (2.0, 1.0, 0.5, 2.0, 0.0, 0.0));
        let s = shaping(&ellipse(1.5)).unwrap();
        assert_eq!(s.delta_u, 0.5);
    }

    #[test]
    fn degenerate_rejected() {
        let line = [Point::new(1.0, 0.0), Point::new(2.0, 0.0), Point::new(3.0, 0.0)];
        assert_eq!(shaping(&line), Err(FieldError::DegenerateBoundary));
    }
}
