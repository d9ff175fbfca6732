//! Feature records and campaign summaries.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tokamak_uq_core::field::{Features, ShapingParams};
use tokamak_uq_core::geometry::Point;
use tokamak_uq_core::uq::{AnnulusCounts, FeatureMoments, KindCounts, McReport, SampleFeatures, StopRecord};

use super::fmt_f64;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub boundary_type: String,
    pub psi_ma: f64,
    pub psi_bd: f64,
    pub axis: Point,
    pub xpoint: Option<Point>,
    pub strike_points: Vec<Point>,
    pub contact_point: Option<Point>,
    pub shaping: ShapingParams,
    pub iterations: Vec<usize>,
    pub plasma_current: f64,
}

impl FeatureRecord {
    pub fn new(f: &Features, iterations: Vec<usize>, plasma_current: f64) -> Self {
        FeatureRecord {
            boundary_type: f.kind.name().to_string(),
            psi_ma: f.psi_ma,
            psi_bd: f.psi_bd,
            axis: f.axis,
            xpoint: f.xpoint,
            strike_points: f.strike_points.clone(),
            contact_point: f.contact_point,
            shaping: f.shaping,
            iterations,
            plasma_current,
        }
    }
}

/// Campaign summary without per-sample rows or wall times, so reruns compare byte for byte.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct McSummary {
    pub evaluator: String,
    pub seed: u64,
    pub noise_fraction: f64,
    pub active_coils: Vec<usize>,
    pub stop_eps: f64,
    pub batch: usize,
    pub n_samples: usize,
    pub converged: bool,
    pub final_eps: Option<f64>,
    pub boundary_types: KindCounts,
    pub features: Vec<FeatureMoments>,
    pub annulus_center: Option<Point>,
    pub radii: [f64; 3],
    pub annulus: Option<AnnulusCounts>,
    pub annulus_frequencies: Option<[f64; 3]>,
    pub history: Vec<StopRecord>,
}

pub fn summary(r: &McReport, evaluator: &str, noise_fraction: f64, active: &[usize]) -> McSummary {
    McSummary {
        evaluator: evaluator.to_string(),
        seed: r.seed,
        noise_fraction,
        active_coils: active.to_vec(),
        stop_eps: r.stop_eps,
        batch: r.batch,
        n_samples: r.n_samples,
        converged: r.converged,
        final_eps: r.final_eps(),
        boundary_types: r.kinds,
        features: r.features.clone(),
        annulus_center: r.annulus_center,
        radii: r.radii,
        annulus: r.annulus,
        annulus_frequencies: r.annulus.map(|a| a.frequencies()),
        history: r.history.clone(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn pt(p: Option<Point>) -> [String; 2] {
    [opt(p.map(|p| p.x)), opt(p.map(|p| p.y))]
}

pub const SAMPLE_HEADER: &str = "sample,boundary_type,xpoint_r,xpoint_z,axis_r,axis_z,strike_inner_r,strike_inner_z,\
strike_outer_r,strike_outer_z,contact_r,contact_z,r_geo,a_minor,eps,kappa,delta_u,delta_l";

/// One CSV row of sample features; empty cells where a feature is absent.
pub fn sample_row(index: u64, currents: &[f64], f: Option<&SampleFeatures>) -> String {
    let mut cells = vec![index.to_string()];
    match f {
        None => {
            cells.push("failed".into());
            cells.resize(cells.len() + 16, String::new());
        }
        Some(f) => {
            cells.push(f.kind.name().into());
            cells.extend(pt(f.xpoint));
            cells.extend(pt(Some(f.axis)));
            let two = f.strike_points.len() >= 2;
            cells.extend(pt(f.strike_points.first().copied().filter(|_| two)));
            cells.extend(pt(f.strike_points.last().copied().filter(|_| two)));
            cells.extend(pt(f.contact_point));
            let s = f.shaping;
            cells.extend([s.r_geo, s.a_minor, s.eps, s.kappa_e, s.delta_u, s.delta_l].map(fmt_f64));
        }
    }
    cells.extend(currents.iter().map(|c| fmt_f64(*c)));
    cells.join(",")
}

pub fn samples_csv(r: &McReport, active: &[usize]) -> String {
    let mut s = String::from(SAMPLE_HEADER);
    for a in active {
        let _ = write!(s, ",current_{a}");
    }
    s.push('\n');
    for rec in &r.records {
        let cur: Vec<f64> = active.iter().map(|&i| rec.currents.values[i]).collect();
        s.push_str(&sample_row(rec.index, &cur, rec.features.as_ref()));
        s.push('\n');
    }
    s
}

/// Plain-text rendering of a campaign summary.
pub fn summary_text(s: &McSummary) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "evaluator      {}", s.evaluator);
    let _ = writeln!(t, "seed           {}", s.seed);
    let _ = writeln!(t, "noise          {} on coils {:?}", s.noise_fraction, s.active_coils);
    let _ = writeln!(t, "samples        {} ({})", s.n_samples, if s.converged { "converged" } else { "not converged" });
    if let Some(e) = s.final_eps {
        let _ = writeln!(t, "final eps      {e:.4e} (threshold {})", s.stop_eps);
    }
    let k = s.boundary_types;
    let n = s.n_samples.max(1) as f64;
    let _ = writeln!(t, "boundary types");
    for (name, c) in [("diverted", k.diverted), ("limited", k.limited), ("wall_contact", k.wall_contact), ("failed", k.failed)] {
        let _ = writeln!(t, "  {name:<13}{c:>8} ({:.2}%)", 100.0 * c as f64 / n);
    }
    let _ = writeln!(t, "feature means and variances");
    for f in &s.features {
        if let Some(m) = f.mean {
            let v = f.variance.map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(t, "  {:<15}{:>8}  {m:>14.6}  {v:>12}", f.name, f.count);
        }
    }
    if let (Some(a), Some(c)) = (s.annulus, s.annulus_center) {
        let fr = a.frequencies();
        let _ = writeln!(t, "x-points around ({:.4}, {:.4})", c.x, c.y);
        for i in 0..3 {
            let _ = writeln!(t, "  r <= {:<8}{:>8} ({:.2}%)", s.radii[i], a.counts[i], 100.0 * fr[i]);
        }
        let _ = writeln!(t, "  beyond      {:>8}", a.beyond);
    }
    t
}

pub fn feature_text(f: &FeatureRecord) -> String {
    let mut t = String::new();
    let p = |p: Option<Point>| p.map(|p| format!("({:.6}, {:.6})", p.x, p.y)).unwrap_or_else(|| "-".into());
    let _ = writeln!(t, "boundary type  {}", f.boundary_type);
    let _ = writeln!(t, "psi axis       {:.10e}", f.psi_ma);
    let _ = writeln!(t, "psi boundary   {:.10e}", f.psi_bd);
    let _ = writeln!(t, "axis           {}", p(Some(f.axis)));
    let _ = writeln!(t, "x-point        {}", p(f.xpoint));
    for (i, s) in f.strike_points.iter().enumerate() {
        let _ = writeln!(t, "strike {i}       {}", p(Some(*s)));
    }
    let _ = writeln!(t, "contact        {}", p(f.contact_point));
    let s = f.shaping;
    let _ = writeln!(t, "R_geo {:.6}  a {:.6}  eps {:.6}  kappa {:.6}  delta_u {:.6}  delta_l {:.6}", s.r_geo, s.a_minor, s.eps, s.kappa_e, s.delta_u, s.delta_l);
    let _ = writeln!(t, "iterations     {:?}", f.iterations);
    let _ = writeln!(t, "plasma current {:.6e} A", f.plasma_current);
    t
}
