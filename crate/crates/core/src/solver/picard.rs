//! Damped Picard iteration inside the adaptive refinement loop.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::anderson::Anderson;
use super::assembly::coil_load;
use super::linear::FixedOperator;
use super::newton::{gmres, norm2, NewtonOptions};
use super::source::{ellipse_polyline, initial_guess, plasma_load, plasma_region, PlasmaState, ProfileParams};
use crate::field::{classify_boundary, critical_points, quadratic_stationary, BoundaryKind, FieldError};
use crate::fmath::powf;
use crate::geometry::{CurrentVector, Point, ReactorGeometry};
use crate::linalg::norm_inf;
use crate::mesh::{mark_near_separatrix, refine_marked, NodalField, TriMesh};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitialEllipse {
    pub center: Point,
    pub a: f64,
    pub b: f64,
    pub k: f64,
}

impl Default for InitialEllipse {
    fn default() -> Self {
        InitialEllipse { center: Point::new(6.2, 0.5), a: 1.8, b: 3.0, k: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct SolverOptions {
    /// Adaptive refinement count R.
    pub refinements: usize,
    pub theta: f64,
    pub max_iter: usize,
    /// Replaces the level tolerance schedule when set.
    pub tol_override: Option<f64>,
    /// Gauss points per Γ edge.
    pub boundary_order: usize,
    /// Band half-width for separatrix marking, relative to |ψ_BD|.
    pub mark_alpha: f64,
    pub method: NonlinearMethod,
    /// Anderson mixing depth for the Picard method; 0 gives plain damping.
    pub anderson_depth: usize,
    pub newton: NewtonOptions,
    pub initial: InitialEllipse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum NonlinearMethod {
    /// Damped fixed-point iteration with optional Anderson mixing.
    Picard,
    /// Jacobian-free Newton–Krylov on ψ − G(ψ), G being the Picard map.
    Newton,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            refinements: 2,
            theta: 0.7,
            max_iter: 50,
            tol_override: None,
            boundary_order: 4,
            mark_alpha: 0.05,
            method: NonlinearMethod::Newton,
            anderson_depth: 5,
            newton: NewtonOptions::default(),
            initial: InitialEllipse::default(),
        }
    }
}

impl SolverOptions {
    /// TOL(i) = 10^(−11 (i+1)/(R+1)).
    pub fn tolerance(&self, level: usize) -> f64 {
        self.tol_override
            .unwrap_or_else(|| powf(10.0, -11.0 * (level + 1) as f64 / (self.refinements + 1) as f64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum FailureKind {
    NoConfinement,
    NotConverged,
    Diverged,
    Numerical,
}

impl FailureKind {
    pub fn name(self) -> &'static str {
        match self {
            FailureKind::NoConfinement => "no_confinement",
            FailureKind::NotConverged => "not_converged",
            FailureKind::Diverged => "diverged",
            FailureKind::Numerical => "numerical",
        }
    }
}

/// A diagnosed solver failure, counted by the statistics rather than raised.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveFailure {
    pub kind: FailureKind,
    pub level: usize,
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid input: {0}")]
    Invalid(&'static str),
    #[error("solver failed ({}) at level {}", .0.kind.name(), .0.level)]
    Failed(SolveFailure),
}

#[derive(Clone, Debug)]
pub struct EquilibriumSolution {
    pub field: NodalField,
    /// None for vacuum (λ = 0) solves.
    pub state: Option<PlasmaState>,
    /// Picard iterations per level.
    pub iterations: Vec<usize>,
    pub residual_history: Vec<f64>,
    pub mesh_sequence: Vec<Arc<TriMesh>>,
    /// Total plasma current ∫ j dA on the final iterate.
    pub plasma_current: f64,
}

/// Field analysis of an iterate turned into the source's plasma state.
pub fn analyze_state(f: &NodalField, g: &ReactorGeometry) -> Result<PlasmaState, FieldError> {
    let crit = critical_points(f)?;
    let c = classify_boundary(f, g, &crit)?;
    let (plasma_triangles, _) = plasma_region(&f.mesh, &c.boundary.points);
    // Sub-vertex levels keep the source continuous as the extrema move
    // between vertices.
    let fit = |v: usize, fallback: f64| quadratic_stationary(f, v).map_or(fallback, |q| q.1);
    let psi_ma = fit(crit.axis.vertex, crit.axis.value).max(crit.axis.value);
    let psi_bd = match (c.boundary.kind, c.xpoint) {
        (BoundaryKind::Diverted, Some(x)) => fit(x.vertex, x.psi),
        _ => c.boundary.psi_level,
    };
    Ok(PlasmaState {
        psi_ma,
        psi_bd,
        boundary_level: c.boundary.psi_level,
        axis: crit.axis.point,
        axis_vertex: Some(crit.axis.vertex),
        boundary_type: c.boundary.kind,
        plasma_triangles,
        xpoint: c.xpoint.map(|x| x.point),
        xpoint_vertex: c.xpoint.map(|x| x.vertex),
        contact_point: c.contact_point,
        boundary: c.boundary.points,
        tie: c.tie,
    })
}

fn initial_state(m: &TriMesh, e: &InitialEllipse) -> PlasmaState {
    let boundary = ellipse_polyline(e.center, e.a, e.b, 128);
    let (plasma_triangles, _) = plasma_region(m, &boundary);
    PlasmaState {
        psi_ma: e.k,
        psi_bd: e.k - 1.0,
        boundary_level: e.k - 1.0,
        axis: e.center,
        axis_vertex: None,
        boundary_type: BoundaryKind::Limited,
        plasma_triangles,
        xpoint: None,
        xpoint_vertex: None,
        contact_point: None,
        boundary,
        tie: false,
    }
}

const DIVERGENCE_STREAK: usize = 3;

struct LevelParams {
    tol: f64,
    max_iter: usize,
    /// Iterations already spent on this level.
    start: usize,
}

type LevelOutcome = Result<(Vec<f64>, PlasmaState, f64, usize, bool), FailureKind>;

fn relative_update(old: &[f64], new: &[f64]) -> f64 {
    let scale = norm_inf(new);
    let diff = new.iter().zip(old).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale > 0.0 {
        diff / scale
    } else {
        0.0
    }
}

/// Tracks consecutive growth of the update norm.
struct Streak {
    last: f64,
    grow: usize,
}

impl Streak {
    fn push(&mut self, upd: f64) -> bool {
        if upd > self.last {
            self.grow += 1;
        } else {
            self.grow = 0;
        }
        self.last = upd;
        self.grow >= DIVERGENCE_STREAK
    }
}

fn picard_level(
    map: &dyn Fn(&[f64]) -> Result<(Vec<f64>, f64, PlasmaState), FailureKind>,
    mut psi: Vec<f64>,
    lp: &LevelParams,
    opts: &SolverOptions,
    history: &mut Vec<f64>,
) -> LevelOutcome {
    let mut mixer = Anderson::new(opts.anderson_depth, opts.theta);
    let mut streak = Streak { last: f64::MAX, grow: 0 };
    let mut it = lp.start;
    while it < lp.max_iter {
        it += 1;
        let (new, total, st) = map(&psi)?;
        let upd = relative_update(&psi, &new);
        history.push(upd);
        if upd <= lp.tol {
            return Ok((psi, st, total, it, true));
        }
        if streak.push(upd) {
            return Err(FailureKind::Diverged);
        }
        psi = mixer.step(&psi, &new);
    }
    let (_, total, st) = map(&psi)?;
    Ok((psi, st, total, it, false))
}

fn newton_level(
    map: &dyn Fn(&[f64]) -> Result<(Vec<f64>, f64, PlasmaState), FailureKind>,
    mut psi: Vec<f64>,
    lp: &LevelParams,
    nopts: &NewtonOptions,
    history: &mut Vec<f64>,
) -> LevelOutcome {
    let residual = |x: &[f64], gx: &[f64]| -> Vec<f64> { gx.iter().zip(x).map(|(a, b)| a - b).collect() };
    let (mut gx, mut total, mut st) = map(&psi)?;
    let mut f = residual(&psi, &gx);
    let mut streak = Streak { last: f64::MAX, grow: 0 };
    let mut it = lp.start;
    while it < lp.max_iter {
        it += 1;
        let upd = relative_update(&psi, &gx);
        history.push(upd);
        if upd <= lp.tol {
            return Ok((psi, st, total, it, true));
        }
        if streak.push(upd) {
            return Err(FailureKind::Diverged);
        }
        let fnorm = norm2(&f);
        let eps = 1e-7 * (1.0 + norm2(&psi));
        let jv = |v: &[f64]| -> Option<Vec<f64>> {
            let xp: Vec<f64> = psi.iter().zip(v).map(|(a, b)| a + eps * b).collect();
            let (gp, _, _) = map(&xp).ok()?;
            Some(gp.iter().zip(&xp).zip(&f).map(|((g1, x1), f0)| ((g1 - x1) - f0) / eps).collect())
        };
        let minus_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = gmres(jv, &minus_f, nopts.forcing, nopts.max_krylov).ok_or(FailureKind::NoConfinement)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=nopts.max_backtracks {
            let trial: Vec<f64> = psi.iter().zip(&step).map(|(a, d)| a + t * d).collect();
            if let Ok((gt, tt, stt)) = map(&trial) {
                let ft = residual(&trial, &gt);
                if norm2(&ft) <= (1.0 - 1e-4 * t) * fnorm {
                    psi = trial;
                    gx = gt;
                    f = ft;
                    total = tt;
                    st = stt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(FailureKind::Diverged);
        }
    }
    Ok((psi, st, total, it, false))
}

/// Free-boundary equilibrium for coil currents `currents` starting from `coarse`.
pub fn solve_free_boundary(
    g: &ReactorGeometry,
    coarse: Arc<TriMesh>,
    currents: &CurrentVector,
    p: &ProfileParams,
    opts: &SolverOptions,
) -> Result<EquilibriumSolution, SolveError> {
    solve_from(g, coarse, currents, p, opts, None)
}

/// As [`solve_free_boundary`], optionally warm-started from a field on `coarse`.
pub fn solve_from(
    g: &ReactorGeometry,
    coarse: Arc<TriMesh>,
    currents: &CurrentVector,
    p: &ProfileParams,
    opts: &SolverOptions,
    warm: Option<&NodalField>,
) -> Result<EquilibriumSolution, SolveError> {
    p.validate().map_err(|_| SolveError::Invalid("profile parameters"))?;
    if currents.len() != g.coils.len() {
        return Err(SolveError::Invalid("current vector length differs from the coil count"));
    }
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(SolveError::Invalid("damping must lie in (0, 1]"));
    }
    if let Some(w) = warm {
        if !Arc::ptr_eq(&w.mesh, &coarse) && *w.mesh != *coarse {
            return Err(SolveError::Invalid("warm start lives on a different mesh"));
        }
    }
    let fail = |kind, level, hist: &Vec<f64>| SolveError::Failed(SolveFailure { kind, level, residual_history: hist.clone() });
    let mut history = Vec::new();
    let mut iterations = Vec::new();
    let mut meshes = vec![coarse.clone()];
    let mut mesh = coarse;

    if p.lambda_s == 0.0 {
        let op = FixedOperator::new(&mesh, p.mu0, g.gamma_radius, opts.boundary_order)
            .map_err(|_| fail(FailureKind::Numerical, 0, &history))?;
        let load = coil_load(&mesh, g, currents).map_err(|_| SolveError::Invalid("coil load"))?;
        let psi = op.solve(&load);
        return Ok(EquilibriumSolution {
            field: NodalField::new(mesh, psi),
            state: None,
            iterations: vec![1],
            residual_history: history,
            mesh_sequence: meshes,
            plasma_current: 0.0,
        });
    }

    let (mut psi, mut state) = match warm {
        Some(w) => {
            let s = analyze_state(w, g).map_err(|_| fail(FailureKind::NoConfinement, 0, &history))?;
            (w.values.clone(), s)
        }
        None => {
            let e = &opts.initial;
            let f0 = initial_guess(mesh.clone(), e.center, e.a, e.b, e.k).map_err(|_| SolveError::Invalid("initial ellipse"))?;
            (f0.values, initial_state(&mesh, e))
        }
    };
    let mut ip = 0.0;
    for level in 0..=opts.refinements {
        let op = FixedOperator::new(&mesh, p.mu0, g.gamma_radius, opts.boundary_order)
            .map_err(|_| fail(FailureKind::Numerical, level, &history))?;
        let coil = coil_load(&mesh, g, currents).map_err(|_| SolveError::Invalid("coil load"))?;
        let tol = opts.tolerance(level);
        let map = |x: &[f64]| -> Result<(Vec<f64>, f64, PlasmaState), FailureKind> {
            let field = NodalField::new(mesh.clone(), x.to_vec());
            let st = analyze_state(&field, g).map_err(|_| FailureKind::NoConfinement)?;
            let (mut load, total) = plasma_load(&field, &st, p).map_err(|_| FailureKind::Numerical)?;
            for (l, c) in load.iter_mut().zip(&coil) {
                *l += c;
            }
            let new = op.solve(&load);
            if !new.iter().all(|v| v.is_finite()) {
                return Err(FailureKind::Numerical);
            }
            Ok((new, total, st))
        };
        let mut it = 0;
        // The guess has an arbitrary scale, so the first step is a full
        // Picard step from the guessed plasma state.
        if level == 0 && warm.is_none() {
            let field = NodalField::new(mesh.clone(), psi.clone());
            let (mut load, _) = plasma_load(&field, &state, p).map_err(|_| fail(FailureKind::Numerical, level, &history))?;
            for (l, c) in load.iter_mut().zip(&coil) {
                *l += c;
            }
            let new = op.solve(&load);
            history.push(relative_update(&psi, &new));
            psi = new;
            it = 1;
        }
        let lp = LevelParams { tol, max_iter: opts.max_iter, start: it };
        let out = match opts.method {
            NonlinearMethod::Picard => picard_level(&map, psi, &lp, opts, &mut history),
            NonlinearMethod::Newton => newton_level(&map, psi, &lp, &opts.newton, &mut history),
        };
        let (x, st, total, n, converged) = out.map_err(|k| fail(k, level, &history))?;
        psi = x;
        state = st;
        ip = total;
        it = n;
        iterations.push(it);
        if !converged {
            return Err(fail(FailureKind::NotConverged, level, &history));
        }
        if level < opts.refinements {
            let field = NodalField::new(mesh.clone(), psi.clone());
            let marked = mark_near_separatrix(&field, state.boundary_level, opts.mark_alpha)
                .map_err(|_| fail(FailureKind::Numerical, level, &history))?;
            let r = refine_marked(&mesh, &marked);
            psi = r.interpolate(&psi);
            mesh = Arc::new(r.mesh);
            meshes.push(mesh.clone());
            let field = NodalField::new(mesh.clone(), psi.clone());
            state = analyze_state(&field, g).map_err(|_| fail(FailureKind::NoConfinement, level + 1, &history))?;
        }
    }
    Ok(EquilibriumSolution {
        field: NodalField::new(mesh, psi),
        state: Some(state),
        iterations,
        residual_history: history,
        mesh_sequence: meshes,
        plasma_current: ip,
    })
}
