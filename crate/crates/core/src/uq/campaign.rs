use alloc::string::String;
use alloc::vec::Vec;

use super::{annulus_counts, AnnulusCounts, NoiseModel, UqError, WelfordState};
use crate::field::{BoundaryKind, Features, ShapingParams};
use crate::geometry::{CurrentVector, Point};

/// Feature summary kept per sample; the boundary polyline is dropped.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleFeatures {
    pub kind: BoundaryKind,
    pub axis: Point,
    pub xpoint: Option<Point>,
    /// Sorted by major radius.
    pub strike_points: Vec<Point>,
    pub contact_point: Option<Point>,
    pub shaping: ShapingParams,
}

impl From<&Features> for SampleFeatures {
    fn from(f: &Features) -> Self {
        let mut strike_points = f.strike_points.clone();
        strike_points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        SampleFeatures {
            kind: f.kind,
            axis: f.axis,
            xpoint: f.xpoint,
            strike_points,
            contact_point: f.contact_point,
            shaping: f.shaping,
        }
    }
}

/// What an evaluator returns for one current vector.
///
/// `monitored` is None when the evaluation itself failed (no field), `features`
/// is None when a field exists but holds no confined plasma. Both count as failures;
/// a field without features still feeds the monitored statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleResult {
    pub monitored: Option<Vec<f64>>,
    pub features: Option<SampleFeatures>,
    pub seconds: f64,
}

pub trait McEvaluator {
    /// One result per input, in input order. Implementations may evaluate in parallel.
    fn evaluate(&mut self, batch: &[CurrentVector]) -> Vec<SampleResult>;
}

impl<F: FnMut(&CurrentVector) -> SampleResult> McEvaluator for F {
    fn evaluate(&mut self, batch: &[CurrentVector]) -> Vec<SampleResult> {
        batch.iter().map(self).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct McConfig {
    pub seed: u64,
    pub stop_eps: f64,
    pub batch: usize,
    pub max_samples: usize,
    pub radii: [f64; 3],
    /// Centre for the annulus counts; the mean x-point when absent.
    pub reference_xpoint: Option<Point>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            seed: 0,
            stop_eps: 0.01,
            batch: 100,
            max_samples: 100_000,
            radii: [0.032, 0.048, 0.064],
            reference_xpoint: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StopRecord {
    pub n: usize,
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KindCounts {
    pub diverted: usize,
    pub limited: usize,
    pub wall_contact: usize,
    pub failed: usize,
}

impl KindCounts {
    pub fn total(&self) -> usize {
        self.diverted + self.limited + self.wall_contact + self.failed
    }

    fn add(&mut self, k: Option<BoundaryKind>) {
        match k {
            Some(BoundaryKind::Diverted) => self.diverted += 1,
            Some(BoundaryKind::Limited) => self.limited += 1,
            Some(BoundaryKind::WallContact) => self.wall_contact += 1,
            None => self.failed += 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureMoments {
    pub name: String,
    pub count: u64,
    pub mean: Option<f64>,
    /// None with fewer than two observations.
    pub variance: Option<f64>,
}

pub const FEATURE_NAMES: [&str; 16] = [
    "xpoint_r",
    "xpoint_z",
    "axis_r",
    "axis_z",
    "strike_inner_r",
    "strike_inner_z",
    "strike_outer_r",
    "strike_outer_z",
    "contact_r",
    "contact_z",
    "r_geo",
    "a_minor",
    "eps",
    "kappa",
    "delta_u",
    "delta_l",
];

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SampleRecord {
    pub index: u64,
    pub currents: CurrentVector,
    pub features: Option<SampleFeatures>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McReport {
    pub seed: u64,
    pub stop_eps: f64,
    pub batch: usize,
    pub n_samples: usize,
    pub converged: bool,
    pub history: Vec<StopRecord>,
    pub kinds: KindCounts,
    pub features: Vec<FeatureMoments>,
    pub annulus_center: Option<Point>,
    pub annulus: Option<AnnulusCounts>,
    pub radii: [f64; 3],
    pub mean_sample_seconds: f64,
    pub monitored: WelfordState,
    pub records: Vec<SampleRecord>,
}

impl McReport {
    pub fn feature(&self, name: &str) -> Option<&FeatureMoments> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn final_eps(&self) -> Option<f64> {
        self.history.last().map(|h| h.eps)
    }
}

fn feature_values(f: &SampleFeatures) -> [Option<f64>; 16] {
    let pt = |p: Option<Point>| (p.map(|p| p.x), p.map(|p| p.y));
    let (xr, xz) = pt(f.xpoint);
    let two = f.strike_points.len() >= 2;
    let (sir, siz) = pt(f.strike_points.first().copied().filter(|_| two));
    let (sor, soz) = pt(f.strike_points.last().copied().filter(|_| two));
    let (cr, cz) = pt(f.contact_point);
    let s = f.shaping;
    [
        xr,
        xz,
        Some(f.axis.x),
        Some(f.axis.y),
        sir,
        siz,
        sor,
        soz,
        cr,
        cz,
        Some(s.r_geo),
        Some(s.a_minor),
        Some(s.eps),
        Some(s.kappa_e),
        Some(s.delta_u),
        Some(s.delta_l),
    ]
}

/// Batched Monte Carlo with the 95% margin-of-error stopping rule.
///
/// Draw k uses stream k of the seed, so the campaign is reproducible for any
/// evaluator that is deterministic per input. Statistics are folded in sample order.
pub fn run_mc<E: McEvaluator + ?Sized>(eval: &mut E, noise: &NoiseModel, cfg: &McConfig) -> Result<McReport, UqError> {
    if !(cfg.stop_eps > 0.0) {
        return Err(UqError::InvalidConfig("stop_eps must be positive"));
    }
    if cfg.batch == 0 || cfg.max_samples == 0 {
        return Err(UqError::InvalidConfig("batch and max_samples must be at least 1"));
    }
    if !(cfg.radii[0] > 0.0 && cfg.radii[0] < cfg.radii[1] && cfg.radii[1] < cfg.radii[2]) {
        return Err(UqError::InvalidRadii);
    }
    let mut monitored: Option<WelfordState> = None;
    let mut feats: Vec<WelfordState> = (0..FEATURE_NAMES.len()).map(|_| WelfordState::new(1)).collect();
    let mut kinds = KindCounts::default();
    let mut history = Vec::new();
    let mut records = Vec::new();
    let mut seconds = 0.0;
    let mut n = 0usize;
    let mut converged = false;

    while n < cfg.max_samples {
        let len = cfg.batch.min(cfg.max_samples - n);
        let draws: Vec<CurrentVector> = (n..n + len).map(|k| noise.sample(cfg.seed, k as u64)).collect();
        let results = eval.evaluate(&draws);
        if results.len() != len {
            return Err(UqError::Dimension);
        }
        for (k, (c, r)) in draws.into_iter().zip(results).enumerate() {
            if let Some(v) = &r.monitored {
                monitored.get_or_insert_with(|| WelfordState::new(v.len())).update(v)?;
            }
            let feat = if r.monitored.is_some() { r.features } else { None };
            kinds.add(feat.as_ref().map(|f| f.kind));
            if let Some(f) = &feat {
                for (w, v) in feats.iter_mut().zip(feature_values(f)) {
                    if let Some(v) = v {
                        w.update(&[v])?;
                    }
                }
            }
            seconds += r.seconds;
            records.push(SampleRecord { index: (n + k) as u64, currents: c, features: feat, seconds: r.seconds });
        }
        n += len;
        if let Some(w) = monitored.as_ref().filter(|w| w.k >= 2) {
            let eps = w.campaign_scalar()?;
            history.push(StopRecord { n, eps });
            if eps <= cfg.stop_eps {
                converged = true;
                break;
            }
        }
    }

    let xpoints: Vec<Point> = records.iter().filter_map(|r| r.features.as_ref().and_then(|f| f.xpoint)).collect();
    let center = cfg.reference_xpoint.or_else(|| {
        (feats[0].k > 0).then(|| Point::new(feats[0].m[0], feats[1].m[0]))
    });
    let annulus = match center {
        Some(c) if !xpoints.is_empty() => Some(annulus_counts(&xpoints, c, cfg.radii)?),
        _ => None,
    };
    let features = FEATURE_NAMES
        .iter()
        .zip(&feats)
        .map(|(name, w)| FeatureMoments {
            name: (*name).into(),
            count: w.k,
            mean: (w.k > 0).then(|| w.m[0]),
            variance: w.variance().ok().map(|v| v[0]),
        })
        .collect();
    Ok(McReport {
        seed: cfg.seed,
        stop_eps: cfg.stop_eps,
        batch: cfg.batch,
        n_samples: n,
        converged,
        history,
        kinds,
        features,
        annulus_center: center,
        annulus,
        radii: cfg.radii,
        mean_sample_seconds: seconds / n as f64,
        monitored: monitored.unwrap_or_else(|| WelfordState::new(0)),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::fmath::sqrt;

    fn features_at(x: f64) -> SampleFeatures {
        SampleFeatures {
            kind: BoundaryKind::Diverted,
            axis: Point::new(6.3, 0.5),
            xpoint: Some(Point::new(x, -3.2)),
            strike_points: vec![Point::new(4.1, -3.6), Point::new(5.6, -4.3)],
            contact_point: None,
            shaping: ShapingParams { r_geo: 6.2, a_minor: 2.0, eps: 0.32, kappa_e: 1.9, delta_u: 0.5, delta_l: 0.5 },
        }
    }

    fn noise(p: f64) -> NoiseModel {
        NoiseModel::new(CurrentVector::new(vec![1.0e6, -2.0e6, 3.0e5]), p).unwrap()
    }

    #[test]
    fn deterministic_evaluator_stops_after_one_batch() {
        let mut ev = |_: &CurrentVector| SampleResult { monitored: Some(vec![1.0, 2.0]), features: Some(features_at(5.0)), seconds: 0.0 };
        let cfg = McConfig { batch: 37, ..McConfig::default() };
        let r = run_mc(&mut ev, &noise(0.01), &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.n_samples, 37);
        assert_eq!(r.history, vec![StopRecord { n: 37, eps: 0.0 }]);
        assert_eq!(r.kinds.diverted, 37);
        assert_eq!(r.annulus.unwrap().counts, [37, 0, 0]);
        assert_eq!(r.feature("kappa").unwrap().mean, Some(1.9));
    }

    #[test]
    fn identity_evaluator_matches_prediction() {
        // relative monitored values are uniform on [1 - a, 1 + a]; S = a / sqrt(3)
        let a = 0.5;
        let nm = noise(a);
        let reference = nm.reference.clone();
        let mut ev = |c: &CurrentVector| SampleResult {
            monitored: Some(c.values.iter().zip(&reference.values).map(|(v, r)| v / r).collect()),
            features: None,
            seconds: 0.0,
        };
        let cfg = McConfig { seed: 5, ..McConfig::default() };
        let r = run_mc(&mut ev, &nm, &cfg).unwrap();
        let s = a / sqrt(3.0);
        let predicted = (1.96 * s / cfg.stop_eps) * (1.96 * s / cfg.stop_eps);
        assert!(r.converged);
        assert!((r.n_samples as f64 - predicted).abs() <= 0.2 * predicted, "{} vs {predicted}", r.n_samples);
        assert!(r.final_eps().unwrap() <= cfg.stop_eps);
        assert_eq!(r.kinds.failed, r.n_samples);
        assert_eq!(r.n_samples % cfg.batch, 0);
    }

    #[test]
    fn max_samples_flags_non_converged() {
        let mut k = 0.0;
        let mut ev = |_: &CurrentVector| {
            k += 1.0;
            SampleResult { monitored: Some(vec![if (k as u64) % 2 == 0 { 1.0 } else { 3.0 }]), features: None, seconds: 0.0 }
        };
        let cfg = McConfig { batch: 30, max_samples: 100, ..McConfig::default() };
        let r = run_mc(&mut ev, &noise(0.01), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.n_samples, 100);
        assert_eq!(r.history.iter().map(|h| h.n).collect::<Vec<_>>(), vec![30, 60, 90, 100]);
    }

    #[test]
    fn failures_excluded_from_shaping() {
        let mut ev = |c: &CurrentVector| {
            let bad = c.values[0] > 1.0e6;
            SampleResult {
                monitored: (!bad).then(|| vec![c.values[0]]),
                features: Some(features_at(5.0 + (c.values[0] - 1.0e6) * 1e-9)),
                seconds: 0.5,
            }
        };
        let r = run_mc(&mut ev, &noise(0.01), &McConfig { batch: 200, ..McConfig::default() }).unwrap();
        assert_eq!(r.kinds.total(), r.n_samples);
        assert!(r.kinds.failed > 50 && r.kinds.diverted > 50);
        assert_eq!(r.feature("kappa").unwrap().count as usize, r.kinds.diverted);
        assert_eq!(r.mean_sample_seconds, 0.5);
    }

    #[test]
    fn reproducible() {
        let mut ev = |c: &CurrentVector| SampleResult {
            monitored: Some(c.values.clone()),
            features: Some(features_at(5.0 + c.values[2] * 1e-8)),
            seconds: 0.0,
        };
        let cfg = McConfig { seed: 99, stop_eps: 1e-3, ..McConfig::default() };
        let a = run_mc(&mut ev, &noise(0.01), &cfg).unwrap();
        let b = run_mc(&mut ev, &noise(0.01), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_config() {
        let mut ev = |_: &CurrentVector| SampleResult { monitored: None, features: None, seconds: 0.0 };
        assert!(run_mc(&mut ev, &noise(0.01), &McConfig { stop_eps: 0.0, ..McConfig::default() }).is_err());
        assert!(run_mc(&mut ev, &noise(0.01), &McConfig { batch: 0, ..McConfig::default() }).is_err());
    }
}
