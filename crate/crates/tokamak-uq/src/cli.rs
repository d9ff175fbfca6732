//! Subcommands of the `tokamak-uq` binary.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tokamak_uq_core::field::{analyze, extract_contour, Features, Polyline};
use tokamak_uq_core::geometry::{CurrentVector, Point, ReactorGeometry};
use tokamak_uq_core::mesh::TriMesh;
use tokamak_uq_core::solver::{solve_free_boundary, EquilibriumSolution};
use tokamak_uq_core::sparse::build_surrogate;
use tokamak_uq_core::uq::{mean_relative_error, run_mc, McConfig, McReport, NoiseModel};

use crate::config::{CampaignConfig, EvaluatorKind};
use crate::eval::{mesh_hash, thread_pool, DirectEval, DirectSolver, SurrogateEval};
use crate::io::field::{field_to_csv, field_to_vtk};
use crate::io::geometry::load_geometry;
use crate::io::mesh::{load_mesh, save_mesh};
use crate::io::report::{feature_text, samples_csv, summary, summary_text, FeatureRecord, McSummary};
use crate::io::surrogate::{load_surrogate, manifest, save_surrogate, SurrogateFile};
use crate::io::svg::Svg;
use crate::io::{self, IoError};

#[derive(Debug, Parser)]
#[command(name = "tokamak-uq", version, about = "Free-boundary equilibria, sparse-grid surrogates and Monte Carlo campaigns")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// TOML campaign config; relative paths inside it resolve against its directory.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for Monte Carlo and comparison samples.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Surrogate level (build, refine) or highest compared level.
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// Relative half-width of the current perturbation.
    #[arg(long, global = true)]
    pub noise: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub evaluator: Option<EvaluatorArg>,
    /// Worker threads; falls back to TOKAMAK_UQ_THREADS.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EvaluatorArg {
    Direct,
    Surrogate,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium at the reference currents.
    Solve {
        /// Adaptive refinement passes (0 solves on the coarse mesh only).
        #[arg(long)]
        refinements: Option<usize>,
    },
    /// Sparse-grid surrogate from direct solves at the grid nodes.
    BuildSurrogate,
    /// Raise an existing surrogate to a higher level, solving only at new nodes.
    RefineSurrogate,
    /// Monte Carlo campaign with the direct solver or the surrogate.
    Mc {
        #[arg(long)]
        max_samples: Option<usize>,
    },
    /// Mean relative error of each surrogate level against direct solves.
    Compare {
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Print a saved feature report, campaign summary or surrogate file.
    Report {
        /// Defaults to the campaign summary in the output directory.
        path: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

type Res<T> = Result<T, CliError>;

/// Config file plus flag overrides; flags win.
pub fn resolve_config(g: &Global) -> Res<CampaignConfig> {
    let mut c = match &g.config {
        Some(p) => CampaignConfig::load(p)?,
        None => CampaignConfig::default(),
    };
    if let Some(s) = g.seed {
        c.mc.seed = s;
        c.compare.seed = s;
    }
    if let Some(l) = g.level {
        c.surrogate.level = l;
        c.compare.max_level = l;
    }
    if let Some(p) = g.noise {
        c.noise.fraction = p;
    }
    if let Some(e) = g.evaluator {
        c.mc.evaluator = match e {
            EvaluatorArg::Direct => EvaluatorKind::Direct,
            EvaluatorArg::Surrogate => EvaluatorKind::Surrogate,
        };
    }
    if let Some(j) = g.jobs {
        c.jobs = j;
    }
    if let Some(o) = &g.out {
        c.out = o.clone();
    }
    c.validate().map_err(CliError::Input)?;
    Ok(c)
}

pub fn run(cli: Cli) -> Res<()> {
    let cfg = resolve_config(&cli.global)?;
    match cli.command {
        Command::Solve { refinements } => cmd_solve(cfg, refinements),
        Command::BuildSurrogate => cmd_build_surrogate(&cfg),
        Command::RefineSurrogate => cmd_refine_surrogate(&cfg, cli.global.level),
        Command::Mc { max_samples } => cmd_mc(cfg, max_samples),
        Command::Compare { samples } => cmd_compare(&cfg, samples),
        Command::Report { path } => cmd_report(&cfg, path),
    }
}

fn load_inputs(cfg: &CampaignConfig) -> Res<(ReactorGeometry, Arc<TriMesh>)> {
    let g = load_geometry(&cfg.geometry)?;
    let m = load_mesh(&cfg.mesh)?;
    Ok((g, Arc::new(m)))
}

fn put(path: PathBuf, data: &[u8]) -> Res<()> {
    io::write(&path, data)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn noise_model(cfg: &CampaignConfig, g: &ReactorGeometry) -> Res<NoiseModel> {
    let r = g.reference_currents();
    let n = if cfg.noise.coils.is_empty() {
        NoiseModel::new(r, cfg.noise.fraction)
    } else {
        NoiseModel::with_active(r, cfg.noise.fraction, cfg.noise.coils.clone())
    };
    n.map_err(|e| CliError::Input(format!("noise model: {e}")))
}

fn reference_solve(cfg: &CampaignConfig, g: &ReactorGeometry, m: &Arc<TriMesh>) -> Res<EquilibriumSolution> {
    solve_free_boundary(g, m.clone(), &g.reference_currents(), &cfg.profile, &cfg.solver)
        .map_err(|e| CliError::Numerical(format!("reference solve: {e}")))
}

/// Direct solver on the common mesh, warm-started when configured.
/// Also returns the reference solution, which is not counted as a sample solve.
fn direct_solver(cfg: &CampaignConfig, g: &ReactorGeometry, m: &Arc<TriMesh>, need_reference: bool) -> Res<(DirectSolver, Option<EquilibriumSolution>)> {
    let mut s = DirectSolver::new(g.clone(), m.clone(), cfg.profile, cfg.solver)
        .map_err(|e| CliError::Input(format!("{}: {e}", cfg.mesh.display())))?;
    let reference = if cfg.warm_start || need_reference { Some(reference_solve(cfg, g, m)?) } else { None };
    if cfg.warm_start {
        if let Some(r) = &reference {
            s.set_warm_start(r);
        }
    }
    Ok((s, reference))
}

fn plot_solution(g: &ReactorGeometry, sol: &EquilibriumSolution, f: Option<&Features>) -> String {
    let mut svg = Svg::for_geometry(g);
    if let Some(f) = f {
        let span = f.psi_ma - f.psi_bd;
        let plasma = Polyline { points: f.boundary.clone(), closed: true };
        for k in 1..10 {
            let level = f.psi_bd + span * k as f64 / 10.0;
            for p in extract_contour(&sol.field, level).into_iter().filter(|p| p.points.iter().all(|&q| plasma.contains(q))) {
                svg.polyline(&p.points, p.closed, "#6a8fc7", 0.6, None);
            }
        }
        for p in extract_contour(&sol.field, f.psi_bd) {
            svg.polyline(&p.points, p.closed, "#1f4e9c", 0.8, None);
        }
        svg.polyline(&f.boundary, true, "#c0392b", 1.4, None);
        svg.marker(f.axis, "#000000", 10.0);
        if let Some(x) = f.xpoint {
            svg.marker(x, "#1e8f3a", 12.0);
        }
        for s in &f.strike_points {
            svg.marker(*s, "#e67e22", 12.0);
        }
        if let Some(c) = f.contact_point {
            svg.marker(c, "#8e44ad", 12.0);
        }
        svg.label(Point::new(g.gamma_radius * 0.05, g.gamma_radius * 0.9), f.kind.name());
    }
    svg.finish()
}

pub fn cmd_solve(mut cfg: CampaignConfig, refinements: Option<usize>) -> Res<()> {
    if let Some(r) = refinements {
        cfg.solver.refinements = r;
    }
    let (g, m) = load_inputs(&cfg)?;
    let t = Instant::now();
    let sol = reference_solve(&cfg, &g, &m)?;
    let seconds = t.elapsed().as_secs_f64();
    let features = analyze(&sol.field, &g);
    let out = &cfg.out;
    let final_mesh = sol.field.mesh.clone();
    save_mesh(&final_mesh, &out.join("solution.mesh"))?;
    eprintln!("wrote {}", out.join("solution.mesh").display());
    put(out.join("solution.vtk"), field_to_vtk(&sol.field, "psi").as_bytes())?;
    put(out.join("solution.csv"), field_to_csv(&sol.field).as_bytes())?;
    put(out.join("solution.svg"), plot_solution(&g, &sol, features.as_ref().ok()).as_bytes())?;
    put(out.join("solve_timing.json"), format!("{{\"seconds\": {seconds:.6}}}\n").as_bytes())?;
    match features {
        Ok(f) => {
            let rec = FeatureRecord::new(&f, sol.iterations.clone(), sol.plasma_current);
            let json = serde_json::to_string_pretty(&rec).expect("features serialize") + "\n";
            put(out.join("features.json"), json.as_bytes())?;
            print!("{}", feature_text(&rec));
            Ok(())
        }
        Err(e) => Err(CliError::Numerical(format!("feature analysis failed: {e}"))),
    }
}

fn write_surrogate(cfg: &CampaignConfig, f: &SurrogateFile, seconds: f64, calls: usize) -> Res<()> {
    let path = cfg.surrogate_path();
    save_surrogate(f, &path)?;
    eprintln!("wrote {}", path.display());
    put(path.with_extension("manifest"), manifest(f, Some(seconds), Some(calls)).as_bytes())?;
    if !f.surrogate.failures.is_empty() {
        eprintln!("warning: {} grid nodes failed and were filled from neighbours", f.surrogate.failures.len());
    }
    println!("level {} nodes {} solver calls {calls}", f.surrogate.level(), f.surrogate.node_count());
    Ok(())
}

pub fn cmd_build_surrogate(cfg: &CampaignConfig) -> Res<()> {
    let (g, m) = load_inputs(cfg)?;
    let noise = noise_model(cfg, &g)?;
    let (solver, _) = direct_solver(cfg, &g, &m, false)?;
    let pool = thread_pool(cfg.resolve_jobs());
    let t = Instant::now();
    let mut ev = DirectEval::new(&solver, &noise, &pool);
    let mut s = build_surrogate(&mut ev, noise.bounds(), cfg.surrogate.level).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.mesh_hash = mesh_hash(solver.common_mesh());
    let f = SurrogateFile { active: noise.active.clone(), surrogate: s };
    write_surrogate(cfg, &f, t.elapsed().as_secs_f64(), ev.calls)
}

pub fn cmd_refine_surrogate(cfg: &CampaignConfig, level: Option<u32>) -> Res<()> {
    let path = cfg.surrogate_path();
    let file = load_surrogate(&path)?;
    let (g, m) = load_inputs(cfg)?;
    let target = level.unwrap_or(file.surrogate.level() + 1);
    if target < file.surrogate.level() {
        return Err(CliError::Input(format!("{}: already at level {}", path.display(), file.surrogate.level())));
    }
    let noise = NoiseModel::with_active(g.reference_currents(), cfg.noise.fraction, file.active.clone())
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if noise.bounds() != file.surrogate.bounds {
        return Err(CliError::Input(format!("{}: parameter box differs from the configured noise", path.display())));
    }
    let (solver, _) = direct_solver(cfg, &g, &m, false)?;
    if mesh_hash(solver.common_mesh()) != file.surrogate.mesh_hash {
        return Err(CliError::Input(format!("{}: built on a different common mesh", path.display())));
    }
    let pool = thread_pool(cfg.resolve_jobs());
    let t = Instant::now();
    let mut ev = DirectEval::new(&solver, &noise, &pool);
    let mut s = file.surrogate;
    while s.level() < target {
        s = s.refine_level(&mut ev).map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    let f = SurrogateFile { active: file.active, surrogate: s };
    write_surrogate(cfg, &f, t.elapsed().as_secs_f64(), ev.calls)
}

/// Sample clouds over the machine, and a zoom on the annulus around the reference x-point.
fn plot_campaign(g: &ReactorGeometry, r: &McReport) -> (String, Option<String>) {
    let fs: Vec<_> = r.records.iter().filter_map(|s| s.features.as_ref()).collect();
    let xp: Vec<Point> = fs.iter().filter_map(|f| f.xpoint).collect();
    let sp: Vec<Point> = fs.iter().flat_map(|f| f.strike_points.iter().copied()).collect();
    let cp: Vec<Point> = fs.iter().filter_map(|f| f.contact_point).collect();
    let draw = |svg: &mut Svg, dot: f64| {
        svg.scatter(&sp, "#e67e22", dot);
        svg.scatter(&xp, "#1e8f3a", dot);
        svg.scatter(&cp, "#8e44ad", dot);
    };
    let mut full = Svg::for_geometry(g);
    draw(&mut full, 1.5);
    let zoom = r.annulus_center.map(|c| {
        let h = 1.5 * r.radii[2];
        let mut svg = Svg::window(Point::new(c.x - h, c.y - h), Point::new(c.x + h, c.y + h), 500.0);
        svg.outline(g);
        for rad in r.radii {
            let ring: Vec<Point> =
                (0..128).map(|k| k as f64 * std::f64::consts::TAU / 128.0).map(|a| Point::new(c.x + rad * a.cos(), c.y + rad * a.sin())).collect();
            svg.polyline(&ring, true, "#333333", 0.8, None);
        }
        draw(&mut svg, 3.0);
        svg.marker(c, "#000000", 10.0);
        svg.finish()
    });
    (full.finish(), zoom)
}

pub fn cmd_mc(mut cfg: CampaignConfig, max_samples: Option<usize>) -> Res<()> {
    if let Some(n) = max_samples {
        if n == 0 {
            return Err(CliError::Input("max_samples must be positive".into()));
        }
        cfg.mc.max_samples = n;
    }
    let (g, m) = load_inputs(&cfg)?;
    let noise = noise_model(&cfg, &g)?;
    let pool = thread_pool(cfg.resolve_jobs());
    let (solver, reference) = direct_solver(&cfg, &g, &m, true)?;
    let reference_xpoint = reference.as_ref().and_then(|r| analyze(&r.field, &g).ok()).and_then(|f| f.xpoint);
    let mc = McConfig {
        seed: cfg.mc.seed,
        stop_eps: cfg.mc.stop_eps,
        batch: cfg.mc.batch,
        max_samples: cfg.mc.max_samples,
        radii: cfg.mc.radii,
        reference_xpoint,
    };
    let t = Instant::now();
    let (report, calls) = match cfg.mc.evaluator {
        EvaluatorKind::Direct => {
            let mut ev = DirectEval::new(&solver, &noise, &pool);
            let r = run_mc(&mut ev, &noise, &mc).map_err(|e| CliError::Numerical(e.to_string()))?;
            (r, ev.calls)
        }
        EvaluatorKind::Surrogate => {
            let path = cfg.surrogate_path();
            let file = load_surrogate(&path)?;
            if file.active != noise.active {
                return Err(CliError::Input(format!("{}: surrogate drives coils {:?}, config perturbs {:?}", path.display(), file.active, noise.active)));
            }
            if file.surrogate.mesh_hash != mesh_hash(solver.common_mesh()) {
                return Err(CliError::Input(format!("{}: built on a different common mesh", path.display())));
            }
            if file.surrogate.bounds != noise.bounds() {
                eprintln!("warning: sampled box differs from the surrogate box; points outside are extrapolated");
            }
            let mut ev =
                SurrogateEval { surrogate: &file.surrogate, noise: &noise, mesh: solver.common_mesh().clone(), geometry: &g, pool: &pool };
            (run_mc(&mut ev, &noise, &mc).map_err(|e| CliError::Numerical(e.to_string()))?, 0)
        }
    };
    let wall = t.elapsed().as_secs_f64();
    let sum = summary(&report, cfg.mc.evaluator.name(), cfg.noise.fraction, &noise.active);
    let out = &cfg.out;
    put(out.join("mc_report.json"), (serde_json::to_string_pretty(&sum).expect("summary serializes") + "\n").as_bytes())?;
    put(out.join("mc_report.txt"), summary_text(&sum).as_bytes())?;
    put(out.join("mc_samples.csv"), samples_csv(&report, &noise.active).as_bytes())?;
    let (full, zoom) = plot_campaign(&g, &report);
    put(out.join("mc_scatter.svg"), full.as_bytes())?;
    if let Some(z) = zoom {
        put(out.join("mc_scatter_xpoint.svg"), z.as_bytes())?;
    }
    let timing = serde_json::json!({
        "evaluator": cfg.mc.evaluator.name(),
        "samples": report.n_samples,
        "solver_calls": calls,
        "mean_sample_seconds": report.mean_sample_seconds,
        "wall_seconds": wall,
        "sample_seconds": report.records.iter().map(|r| r.seconds).collect::<Vec<_>>(),
    });
    put(out.join("mc_timing.json"), (serde_json::to_string_pretty(&timing).expect("timing serializes") + "\n").as_bytes())?;
    print!("{}", summary_text(&sum));
    if calls > 0 {
        println!("solver calls   {calls}");
    }
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "campaign stopped at {} samples without reaching eps {} (last {:.4e})",
            report.n_samples,
            report.stop_eps,
            report.final_eps().unwrap_or(f64::INFINITY)
        )))
    }
}

/// One row per level: (level, nodes, mean relative sup error).
pub fn cmd_compare(cfg: &CampaignConfig, samples: Option<usize>) -> Res<()> {
    let n = samples.unwrap_or(cfg.compare.samples);
    if n == 0 {
        return Err(CliError::Input("empty sample set".into()));
    }
    let (g, m) = load_inputs(cfg)?;
    let noise = noise_model(cfg, &g)?;
    let pool = thread_pool(cfg.resolve_jobs());
    let (solver, _) = direct_solver(cfg, &g, &m, false)?;
    let draws: Vec<CurrentVector> = (0..n as u64).map(|k| noise.sample(cfg.compare.seed, k)).collect();
    let t = Instant::now();
    let exact: Vec<Option<Vec<f64>>> = {
        use rayon::prelude::*;
        let s = &solver;
        pool.install(|| draws.par_iter().map(|c| s.solve(c).ok().map(|r| r.common.values)).collect())
    };
    let kept: Vec<usize> = (0..n).filter(|&k| exact[k].is_some()).collect();
    if kept.is_empty() {
        return Err(CliError::Numerical("every direct sample failed".into()));
    }
    if kept.len() < n {
        eprintln!("warning: {} of {n} direct samples failed and are left out", n - kept.len());
    }
    let exact: Vec<Vec<f64>> = exact.into_iter().flatten().collect();
    let params: Vec<Vec<f64>> = kept.iter().map(|&k| noise.params_of(&draws[k])).collect();
    let direct_seconds = t.elapsed().as_secs_f64();

    let mut ev = DirectEval::new(&solver, &noise, &pool);
    let mut s = build_surrogate(&mut ev, noise.bounds(), 0).map_err(|e| CliError::Numerical(e.to_string()))?;
    let mut csv = String::from("level,nodes,E\n");
    println!("{:>5} {:>7} {:>12}", "level", "nodes", "E");
    loop {
        let approx: Vec<Vec<f64>> = params.iter().map(|x| s.eval_with(x, true).expect("dimension")).collect();
        let e = mean_relative_error(&approx, &exact).map_err(|e| CliError::Numerical(e.to_string()))?;
        csv.push_str(&format!("{},{},{}\n", s.level(), s.node_count(), io::fmt_f64(e)));
        println!("{:>5} {:>7} {:>12.4e}", s.level(), s.node_count(), e);
        if s.level() >= cfg.compare.max_level {
            break;
        }
        s = s.refine_level(&mut ev).map_err(|e| CliError::Numerical(e.to_string()))?;
    }
    put(cfg.out.join("compare.csv"), csv.as_bytes())?;
    let timing = serde_json::json!({
        "samples": n,
        "direct_failures": n - kept.len(),
        "direct_seconds": direct_seconds,
        "surrogate_solver_calls": ev.calls,
        "total_seconds": t.elapsed().as_secs_f64(),
    });
    put(cfg.out.join("compare_timing.json"), (serde_json::to_string_pretty(&timing).expect("timing serializes") + "\n").as_bytes())?;
    Ok(())
}

pub fn cmd_report(cfg: &CampaignConfig, path: Option<PathBuf>) -> Res<()> {
    let path = path.unwrap_or_else(|| cfg.out.join("mc_report.json"));
    print!("{}", render_report(&path)?);
    Ok(())
}

/// Text rendering of any artifact the other commands write.
pub fn render_report(path: &Path) -> Res<String> {
    if path.extension().is_some_and(|e| e == "bin") {
        return Ok(manifest(&load_surrogate(path)?, None, None));
    }
    let text = io::read(path)?;
    if let Ok(s) = serde_json::from_str::<McSummary>(&text) {
        return Ok(summary_text(&s));
    }
    if let Ok(f) = serde_json::from_str::<FeatureRecord>(&text) {
        return Ok(feature_text(&f));
    }
    Err(CliError::Input(format!("{}: not a campaign summary, feature report or surrogate file", path.display())))
}
