//! Magnetic axis, saddle candidates and gradient recovery.

use alloc::vec;
use alloc::vec::Vec;

use super::FieldError;
use crate::geometry::{Point, RegionTag};
use crate::mesh::{NodalField, TriMesh};

/// Recovered nodal gradients; `fallback[v]` marks vertices that used the plain average.
#[derive(Clone, Debug)]
pub struct RecoveredGradient {
    pub grad: Vec<Point>,
    pub fallback: Vec<bool>,
}

/// Per-triangle gradient of the P1 field.
pub fn triangle_gradient(f: &NodalField, t: usize) -> Point {
    let m = &*f.mesh;
    let g = m.basis_gradients(t);
    let tri = m.triangle(t);
    let mut out = Point::new(0.0, 0.0);
    for k in 0..3 {
        out.x += f.values[tri[k]] * g[k].x;
        out.y += f.values[tri[k]] * g[k].y;
    }
    out
}

/// Patch recovery: least-squares linear fit of the incident triangle gradients
/// at their centroids, evaluated at the vertex.
pub fn recover_gradient(f: &NodalField) -> RecoveredGradient {
    let m = &*f.mesh;
    let tg: Vec<Point> = (0..m.triangle_count()).map(|t| triangle_gradient(f, t)).collect();
    let mut grad = vec![Point::new(0.0, 0.0); m.vertex_count()];
    let mut fallback = vec![false; m.vertex_count()];
    for v in 0..m.vertex_count() {
        let patch = m.vertex_triangles(v);
        if patch.is_empty() {
            fallback[v] = true;
            continue;
        }
        if patch.len() >= 3 {
            if let Some(g) = fit(m, v, patch, &tg) {
                grad[v] = g;
                continue;
            }
        }
        fallback[v] = true;
        let mut s = Point::new(0.0, 0.0);
        let mut w = 0.0;
        for &t in patch {
            let a = m.area(t);
            s.x += a * tg[t].x;
            s.y += a * tg[t].y;
            w += a;
        }
        grad[v] = Point::new(s.x / w, s.y / w);
    }
    RecoveredGradient { grad, fallback }
}

fn fit(m: &TriMesh, v: usize, patch: &[usize], tg: &[Point]) -> Option<Point> {
    let p = m.vertex(v);
    let h = m.local_edge_length(v);
    if h <= 0.0 {
        return None;
    }
    // Normal equations in scaled coordinates; rows are [1, dx/h, dy/h].
    let mut a = [[0.0f64; 3]; 3];
    let mut bx = [0.0f64; 3];
    let mut by = [0.0f64; 3];
    for &t in patch {
        let c = m.centroid(t);
        let r = [1.0, (c.x - p.x) / h, (c.y - p.y) / h];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += r[i] * r[j];
            }
            bx[i] += r[i] * tg[t].x;
            by[i] += r[i] * tg[t].y;
        }
    }
    let det = det3(&a);
    let n = patch.len() as f64;
    if !(det.abs() > 1e-8 * n * n * n) {
        return None;
    }
    Some(Point::new(cramer0(&a, &bx, det), cramer0(&a, &by, det)))
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// First unknown of a 3x3 system by Cramer's rule.
fn cramer0(a: &[[f64; 3]; 3], b: &[f64; 3], det: f64) -> f64 {
    let mut m = *a;
    for i in 0..3 {
        m[i][0] = b[i];
    }
    det3(&m) / det
}

/// Vertices whose whole star lies inside the limiter and off the axis.
pub fn is_plasma_vertex(m: &TriMesh, v: usize) -> bool {
    !m.is_axis(v)
        && !m.vertex_triangles(v).is_empty()
        && m.vertex_triangles(v).iter().all(|&t| m.tag(t) == RegionTag::InsideLimiter)
}

/// Cyclic sign changes of f(v) − f(w) over the angle-ordered neighbours;
/// zero differences keep the previous sign.
pub fn sign_changes(f: &NodalField, v: usize) -> usize {
    let nb = f.mesh.vertex_neighbors(v);
    let fv = f.values[v];
    let signs: Vec<i8> = nb
        .iter()
        .map(|&w| {
            let d = fv - f.values[w];
            if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    let Some(start) = signs.iter().position(|&s| s != 0) else { return 0 };
    let n = signs.len();
    let mut prev = signs[start];
    let mut changes = 0;
    for k in 1..=n {
        let s = signs[(start + k) % n];
        if s != 0 && s != prev {
            changes += 1;
            prev = s;
        }
    }
    changes
}

/// Interior-to-vessel vertices with at least four sign changes.
pub fn saddle_candidates(f: &NodalField) -> Vec<usize> {
    let m = &*f.mesh;
    (0..m.vertex_count())
        .filter(|&v| !m.is_boundary_vertex(v) && is_plasma_vertex(m, v) && sign_changes(f, v) >= 4)
        .collect()
}

/// Mean recovered |∇f| over v and its neighbours.
pub fn local_gradient_magnitude(f: &NodalField, grad: &RecoveredGradient, v: usize) -> f64 {
    let nb = f.mesh.vertex_neighbors(v);
    let mut s = grad.grad[v].norm();
    for &w in nb {
        s += grad.grad[w].norm();
    }
    s / (nb.len() + 1) as f64
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-14 * a.abs().max(b.abs())
}

/// The candidate with the smallest local gradient magnitude.
pub fn select_xpoint(f: &NodalField, candidates: &[usize], grad: &RecoveredGradient) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &v in candidates {
        let g = local_gradient_magnitude(f, grad, v);
        match best {
            Some((bv, bg)) if !(g < bg && !tied(g, bg)) && !(tied(g, bg) && v < bv) => {}
            _ => best = Some((v, g)),
        }
    }
    best.map(|b| b.0)
}

/// Stationary point of a least-squares quadratic over the two-ring patch of
/// `v`, with its value. None if the fit is singular or the point leaves the
/// patch.
pub fn quadratic_stationary(f: &NodalField, v: usize) -> Option<(Point, f64)> {
    let m = &*f.mesh;
    let mut patch: Vec<usize> = vec![v];
    for &w in m.vertex_neighbors(v) {
        for &u in core::iter::once(&w).chain(m.vertex_neighbors(w)) {
            if !patch.contains(&u) {
                patch.push(u);
            }
        }
    }
    if patch.len() < 8 {
        return None;
    }
    let c = m.vertex(v);
    let h = m.local_edge_length(v);
    let mut a = [[0.0f64; 6]; 6];
    let mut b = [0.0f64; 6];
    for &u in &patch {
        let d = m.vertex(u).sub(c);
        let d = Point::new(d.x / h, d.y / h);
        let phi = [1.0, d.x, d.y, d.x * d.x, d.x * d.y, d.y * d.y];
        for i in 0..6 {
            for j in 0..6 {
                a[i][j] += phi[i] * phi[j];
            }
            b[i] += phi[i] * f.values[u];
        }
    }
    let q = solve6(a, b)?;
    let (hxx, hxy, hyy) = (2.0 * q[3], q[4], 2.0 * q[5]);
    let det = hxx * hyy - hxy * hxy;
    let scale = hxx.abs().max(hyy.abs()).max(hxy.abs());
    if !(det.abs() > 1e-10 * scale * scale) {
        return None;
    }
    let dx = -(hyy * q[1] - hxy * q[2]) / det;
    let dy = -(hxx * q[2] - hxy * q[1]) / det;
    if dx * dx + dy * dy > 1.0 {
        return None;
    }
    let val = q[0] + q[1] * dx + q[2] * dy + q[3] * dx * dx + q[4] * dx * dy + q[5] * dy * dy;
    Some((Point::new(c.x + h * dx, c.y + h * dy), val))
}

fn solve6(mut a: [[f64; 6]; 6], mut b: [f64; 6]) -> Option<[f64; 6]> {
    for k in 0..6 {
        let p = (k..6).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap())?;
        if a[p][k].abs() < 1e-12 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..6 {
            let r = a[i][k] / a[k][k];
            for j in k..6 {
                a[i][j] -= r * a[k][j];
            }
            b[i] -= r * b[k];
        }
    }
    let mut x = [0.0; 6];
    for i in (0..6).rev() {
        let mut s = b[i];
        for j in i + 1..6 {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub vertex: usize,
    pub point: Point,
    pub value: f64,
    /// No strict local maximum inside the limiter; the global maximum was used.
    pub degenerate: bool,
}

/// Largest discrete local maximum among the vertices inside the limiter.
pub fn find_axis(f: &NodalField) -> Result<Axis, FieldError> {
    let m = &*f.mesh;
    let mut best: Option<usize> = None;
    let mut global: Option<usize> = None;
    for v in 0..m.vertex_count() {
        if !is_plasma_vertex(m, v) {
            continue;
        }
        let fv = f.values[v];
        if global.map_or(true, |g| fv > f.values[g]) {
            global = Some(v);
        }
        let nb = m.vertex_neighbors(v);
        let is_max = !m.is_boundary_vertex(v)
            && nb.iter().all(|&w| fv >= f.values[w]) && nb.iter().any(|&w| fv > f.values[w]);
        if is_max && best.map_or(true, |b| fv > f.values[b]) {
            best = Some(v);
        }
    }
    let g = global.ok_or(FieldError::NoInteriorVertex)?;
    let (vertex, degenerate) = match best {
        Some(b) => (b, false),
        None => (g, true),
    };
    Ok(Axis { vertex, point: m.vertex(vertex), value: f.values[vertex], degenerate })
}
