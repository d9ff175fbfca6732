//! Plasma boundary classification and strike points.

use alloc::vec::Vec;

use super::contour::{extract_contour, Polyline};
use super::critical::{find_axis, recover_gradient, saddle_candidates, select_xpoint, Axis};
use super::FieldError;
use crate::geometry::{dist_point_segment, segment_intersection, Point, ReactorGeometry};
use crate::mesh::{Locator, NodalField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum BoundaryKind {
    Diverted,
    Limited,
    WallContact,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::Diverted => "diverted",
            BoundaryKind::Limited => "limited",
            BoundaryKind::WallContact => "wall_contact",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPolyline {
    /// Closed: the first point is repeated at the end.
    pub points: Vec<Point>,
    pub psi_level: f64,
    pub kind: BoundaryKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XPoint {
    pub vertex: usize,
    pub point: Point,
    pub psi: f64,
    /// 0 for the innermost separatrix, then by decreasing ψ.
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoints {
    pub axis: Axis,
    pub xpoints: Vec<XPoint>,
    pub strike_points: Vec<Point>,
    pub contact_point: Option<Point>,
}

impl CriticalPoints {
    pub fn xpoint(&self) -> Option<&XPoint> {
        self.xpoints.first()
    }
}

/// Axis plus saddle points below the axis value. Candidates are grouped into
/// clusters of mutually adjacent vertices; within a cluster the smallest local
/// |∇ψ| wins, and clusters are ranked by decreasing ψ so that rank 0 is the
/// innermost separatrix.
pub fn critical_points(f: &NodalField) -> Result<CriticalPoints, FieldError> {
    let axis = find_axis(f)?;
    let cands: Vec<usize> = saddle_candidates(f).into_iter().filter(|&v| f.values[v] < axis.value).collect();
    let grad = recover_gradient(f);
    let m = &*f.mesh;
    let near = |a: usize, b: usize| {
        let na = m.vertex_neighbors(a);
        na.contains(&b) || na.iter().any(|&w| m.vertex_neighbors(w).contains(&b))
    };
    let mut cluster: Vec<usize> = (0..cands.len()).collect();
    for i in 0..cands.len() {
        for j in 0..i {
            if near(cands[i], cands[j]) {
                let (ri, rj) = (root(&mut cluster, i), root(&mut cluster, j));
                cluster[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..cands.len() {
        if root(&mut cluster, i) != i {
            continue;
        }
        let members: Vec<usize> = (0..cands.len()).filter(|&j| root(&mut cluster, j) == i).map(|j| cands[j]).collect();
        if let Some(v) = select_xpoint(f, &members, &grad) {
            reps.push(v);
        }
    }
    reps.sort_by(|&a, &b| f.values[b].partial_cmp(&f.values[a]).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
    let xpoints = reps
        .into_iter()
        .enumerate()
        .map(|(rank, v)| XPoint { vertex: v, point: m.vertex(v), psi: f.values[v], rank })
        .collect();
    Ok(CriticalPoints { axis, xpoints, strike_points: Vec::new(), contact_point: None })
}

fn root(p: &mut [usize], mut i: usize) -> usize {
    while p[i] != i {
        p[i] = p[p[i]];
        i = p[i];
    }
    i
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub boundary: BoundaryPolyline,
    /// The x-point used, if any.
    pub xpoint: Option<XPoint>,
    pub contact_point: Option<Point>,
    /// Tangency level ψ_L over the limiter and the point attaining it.
    pub psi_limiter: f64,
    pub limiter_point: Point,
    /// ψ_X and ψ_L agreed to rounding; diverted was preferred.
    pub tie: bool,
}

const SAMPLES_PER_SEGMENT: usize = 8;
const TIE_RTOL: f64 = 1e-9;
const SHALLOW_SADDLE: f64 = 0.1;

/// Largest field value over the limiter, sampled at eight points per segment
/// plus every mesh vertex lying on it. With an x-point, samples on the far side
/// of the x-point from the axis are skipped.
pub fn limiter_level(f: &NodalField, g: &ReactorGeometry, axis: Point, xpoint: Option<Point>) -> Option<(f64, Point)> {
    let m = &*f.mesh;
    let loc = Locator::new(m);
    let keep = |p: Point| match xpoint {
        Some(x) => p.sub(x).dot(axis.sub(x)) >= 0.0,
        None => true,
    };
    let mut best: Option<(f64, Point)> = None;
    let mut consider = |v: f64, p: Point| {
        if best.map_or(true, |(b, _)| v > b) {
            best = Some((v, p));
        }
    };
    let mut hint = None;
    for (a, b) in g.limiter_segments() {
        for j in 0..SAMPLES_PER_SEGMENT {
            let p = a.lerp(b, j as f64 / SAMPLES_PER_SEGMENT as f64);
            if !keep(p) {
                continue;
            }
            if let Some((t, l)) = loc.locate(m, p, hint).triangle() {
                hint = Some(t);
                consider(f.eval_bary(t, l), p);
            }
        }
    }
    let segs: Vec<(Point, Point)> = g.limiter_segments().collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(a, b) in &segs {
        x0 = x0.min(a.x.min(b.x));
        x1 = x1.max(a.x.max(b.x));
        y0 = y0.min(a.y.min(b.y));
        y1 = y1.max(a.y.max(b.y));
    }
    for v in 0..m.vertex_count() {
        let p = m.vertex(v);
        if p.x < x0 - 1e-9 || p.x > x1 + 1e-9 || p.y < y0 - 1e-9 || p.y > y1 + 1e-9 || !keep(p) {
            continue;
        }
        if segs.iter().any(|&(a, b)| dist_point_segment(p, a, b) <= 1e-9) {
            consider(f.values[v], p);
        }
    }
    best
}

fn hits_structure(loop_: &Polyline, g: &ReactorGeometry) -> bool {
    let structs: Vec<(Point, Point)> = g.limiter_segments().chain(g.divertor_segments()).collect();
    loop_.segments().any(|(a, b)| structs.iter().any(|&(c, d)| segment_intersection(a, b, c, d).is_some()))
}

/// Innermost closed level-set component enclosing `p`.
fn enclosing_loop(f: &NodalField, level: f64, p: Point) -> Option<Polyline> {
    extract_contour(f, level)
        .into_iter()
        .filter(|c| c.contains(p))
        .min_by(|a, b| a.area().partial_cmp(&b.area()).unwrap_or(core::cmp::Ordering::Equal))
}

/// Diverted if some x-point separatrix closes around the axis clear of every
/// structure; the lowest such level wins, giving the largest closed region.
/// Otherwise the limiter tangency level decides.
pub fn classify_boundary(f: &NodalField, g: &ReactorGeometry, crit: &CriticalPoints) -> Result<Classification, FieldError> {
    let axis = crit.axis;
    let xp = crit.xpoints.last().copied();
    let (psi_l, lpt) = limiter_level(f, g, axis.point, xp.map(|x| x.point)).ok_or(FieldError::NoConfinement)?;
    let depth = axis.value - limiter_level(f, g, axis.point, None).map_or(psi_l, |l| l.0);
    // Outermost first. Shallow saddles next to the axis are iteration noise
    // between two nearby maxima, not a separatrix.
    for x in crit.xpoints.iter().rev() {
        if axis.value - x.psi < SHALLOW_SADDLE * depth {
            continue;
        }
        let Some(sep) = enclosing_loop(f, x.psi, axis.point) else { continue };
        if hits_structure(&sep, g) {
            continue;
        }
        let (psi_l, lpt) = limiter_level(f, g, axis.point, Some(x.point)).ok_or(FieldError::NoConfinement)?;
        let tie = (psi_l - x.psi).abs() <= TIE_RTOL * (axis.value - x.psi).abs();
        return Ok(Classification {
            boundary: BoundaryPolyline { points: sep.points, psi_level: x.psi, kind: BoundaryKind::Diverted },
            xpoint: Some(*x),
            contact_point: None,
            psi_limiter: psi_l,
            limiter_point: lpt,
            tie,
        });
    }
    if !(psi_l < axis.value) {
        return Err(FieldError::NoConfinement);
    }
    let lp = enclosing_loop(f, psi_l, axis.point).ok_or(FieldError::NoConfinement)?;
    let kind = if xp.is_some() { BoundaryKind::WallContact } else { BoundaryKind::Limited };
    Ok(Classification {
        boundary: BoundaryPolyline { points: lp.points, psi_level: psi_l, kind },
        xpoint: xp,
        contact_point: Some(lpt),
        psi_limiter: psi_l,
        limiter_point: lpt,
        tie: false,
    })
}

/// Crossings of the ψ = ψ_BD legs with the divertor, sorted by x. With an
/// x-point, the leg nearest to it is followed both ways to its first hit;
/// otherwise every crossing of an open contour line is reported.
pub fn strike_points(
    f: &NodalField,
    psi_bd: f64,
    divertor: &[Point],
    xpoint: Option<Point>,
    axis: Point,
) -> Vec<Point> {
    if divertor.len() < 2 {
        return Vec::new();
    }
    let plates: Vec<(Point, Point)> = divertor.windows(2).map(|w| (w[0], w[1])).collect();
    let lines: Vec<Polyline> = extract_contour(f, psi_bd).into_iter().filter(|c| !c.contains(axis)).collect();
    let mut out = Vec::new();
    match xpoint {
        Some(x) => {
            let mut best: Option<(f64, usize, usize)> = None;
            for (li, l) in lines.iter().enumerate() {
                for (si, (a, b)) in l.segments().enumerate() {
                    let d = dist_point_segment(x, a, b);
                    if best.map_or(true, |(bd, _, _)| d < bd) {
                        best = Some((d, li, si));
                    }
                }
            }
            if let Some((_, li, si)) = best {
                let pts = &lines[li].points;
                let nseg = pts.len() - 1;
                let closed = lines[li].closed;
                for dir in [1isize, -1] {
                    let mut k = si as isize;
                    let mut steps = 0;
                    while steps < nseg {
                        if !closed && (k < 0 || k >= nseg as isize) {
                            break;
                        }
                        let kk = k.rem_euclid(nseg as isize) as usize;
                        let (a, b) = if dir > 0 { (pts[kk], pts[kk + 1]) } else { (pts[kk + 1], pts[kk]) };
                        let hit = plates
                            .iter()
                            .filter_map(|&(c, d)| segment_intersection(a, b, c, d))
                            .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap());
                        if let Some((p, _, _)) = hit {
                            out.push(p);
                            break;
                        }
                        k += dir;
                        steps += 1;
                    }
                }
            }
        }
        None => {
            for l in lines.iter().filter(|l| !l.closed) {
                for (a, b) in l.segments() {
                    for &(c, d) in &plates {
                        if let Some((p, _, _)) = segment_intersection(a, b, c, d) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap().then(a.y.partial_cmp(&b.y).unwrap()));
    out.dedup_by(|a, b| a.dist(*b) <= 1e-12);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Coil, ReactorGeometry};
    use crate::mesh::TriMesh;
    use alloc::sync::Arc;
    use alloc::vec;

    fn box_geometry(limiter: Vec<Point>, divertor: Vec<Point>) -> ReactorGeometry {
        ReactorGeometry {
            gamma_radius: 20.0,
            coils: Vec::<Coil>::new(),
            limiter,
            divertor,
            vessel_outer: Vec::new(),
        }
    }

    fn square(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Point> {
        vec![Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
    }

    fn tagged(nx: usize, x0: f64, x1: f64, y0: f64, y1: f64, g: &ReactorGeometry) -> Arc<TriMesh> {
        let mut m = TriMesh::rectangle(nx, nx, x0, x1, y0, y1);
        m.retag(g);
        Arc::new(m)
    }

    #[test]
    fn paraboloid_is_limited() {
        let g = box_geometry(square(1.5, 4.5, -1.5, 1.5), Vec::new());
        let m = tagged(40, 1.0, 5.0, -2.0, 2.0, &g);
        let f = NodalField::from_fn(m, |p| -((p.x - 3.2).powi(2) + p.y * p.y));
        let crit = critical_points(&f).unwrap();
        assert!(crit.xpoints.is_empty());
        let c = classify_boundary(&f, &g, &crit).unwrap();
        assert_eq!(c.boundary.kind, BoundaryKind::Limited);
        // Nearest limiter point to the centre is (4.5, 0): ψ_L = -1.3².
        assert!((c.boundary.psi_level + 1.69).abs() < 1e-12);
        let cp = c.contact_point.unwrap();
        assert!((cp.x - 4.5).abs() < 1e-12 && cp.y.abs() < 1e-12);
        for p in &c.boundary.points {
            assert!(((p.x - 3.2).hypot(p.y) - 1.3).abs() < 0.02);
        }
    }

    /// Maximum at (3, 0.2), saddle at (3, −1) with ψ_X = −0.48; the separatrix
    /// tops out at y = 0.8 and its legs reach x = 3 ± 0.959 at y = −1.8.
    fn diverted_field(p: Point) -> f64 {
        let (x, s) = (p.x - 3.0, p.y - 0.2);
        -x * x - s * s - s * s * s / 1.8
    }

    #[test]
    fn quartic_is_diverted() {
        let g = box_geometry(
            square(1.2, 4.8, -2.3, 2.3),
            vec![Point::new(1.5, -1.8), Point::new(4.5, -1.8)],
        );
        let m = tagged(60, 1.0, 5.0, -2.5, 2.5, &g);
        let f = NodalField::from_fn(m, diverted_field);
        let crit = critical_points(&f).unwrap();
        let x = crit.xpoint().unwrap();
        assert!((x.point.x - 3.0).abs() < 1e-9 && (x.point.y + 1.0).abs() < 0.05, "{:?}", x.point);
        assert!((x.psi + 0.48).abs() < 1e-3);
        let c = classify_boundary(&f, &g, &crit).unwrap();
        assert_eq!(c.boundary.kind, BoundaryKind::Diverted);
        assert_eq!(c.boundary.psi_level, x.psi);
        let h = 4.0 / 60.0;
        let d = c.boundary.points.iter().fold(f64::MAX, |d, p| d.min(p.dist(x.point)));
        assert!(d <= h * 1.5);
        let sp = strike_points(&f, x.psi, &g.divertor, Some(x.point), crit.axis.point);
        assert_eq!(sp.len(), 2);
        let leg = (0.48f64 - 4.0 + 8.0 / 1.8).sqrt();
        assert!((sp[0].x - (3.0 - leg)).abs() < 0.01 && (sp[1].x - (3.0 + leg)).abs() < 0.01, "{sp:?} {leg}");
        for p in sp {
            assert!((p.y + 1.8).abs() < 1e-12);
        }
        // Scaling the field keeps the classification.
        let f2 = NodalField::new(f.mesh.clone(), f.values.iter().map(|v| 4.0 * v).collect());
        let c2 = classify_boundary(&f2, &g, &critical_points(&f2).unwrap()).unwrap();
        assert_eq!(c2.boundary.kind, c.boundary.kind);
        assert_eq!(c2.boundary.points, c.boundary.points);
        assert_eq!(c2.boundary.psi_level, 4.0 * c.boundary.psi_level);
    }

    #[test]
    fn separatrix_through_wall_is_contact() {
        // A limiter tight enough to cut the separatrix at its widest.
        let g = box_geometry(square(2.5, 3.5, -2.3, 2.3), Vec::new());
        let m = tagged(60, 1.0, 5.0, -2.5, 2.5, &g);
        let f = NodalField::from_fn(m, diverted_field);
        let crit = critical_points(&f).unwrap();
        let c = classify_boundary(&f, &g, &crit).unwrap();
        assert_eq!(c.boundary.kind, BoundaryKind::WallContact);
        assert!(c.boundary.psi_level > crit.xpoint().unwrap().psi);
        assert!(c.contact_point.is_some());
    }

    #[test]
    fn straight_leg_hits_plate() {
        let m = Arc::new(TriMesh::rectangle(10, 10, 0.0, 1.0, 0.0, 1.0));
        let f = NodalField::from_fn(m, |p| p.x + 0.25 * p.y);
        let plate = [Point::new(0.0, 0.5), Point::new(1.0, 0.5)];
        let sp = strike_points(&f, 0.5, &plate, None, Point::new(5.0, 5.0));
        assert_eq!(sp.len(), 1);
        assert!((sp[0].x - 0.375).abs() < 1e-12 && (sp[0].y - 0.5).abs() < 1e-12);
        let parallel = [Point::new(0.0, 0.5), Point::new(0.1, 0.1)];
        let f2 = NodalField::from_fn(f.mesh.clone(), |p| p.x);
        assert!(strike_points(&f2, 0.5, &parallel, None, Point::new(5.0, 5.0)).is_empty());
    }
}
