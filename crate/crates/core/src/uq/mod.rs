//! Monte Carlo campaigns over coil-current noise.

mod campaign;
mod noise;
mod welford;

use alloc::vec::Vec;

pub use campaign::{
    run_mc, FeatureMoments, KindCounts, McConfig, McEvaluator, McReport, SampleFeatures, SampleRecord, SampleResult,
    StopRecord, FEATURE_NAMES,
};
pub use noise::NoiseModel;
pub use welford::{WelfordState, Z95};

use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum UqError {
    #[error("at least two samples are needed")]
    TooFewSamples,
    #[error("vector length mismatch")]
    Dimension,
    #[error("reference field is identically zero")]
    ZeroReference,
    #[error("radii must be positive and strictly ascending")]
    InvalidRadii,
    #[error("invalid campaign setting: {0}")]
    InvalidConfig(&'static str),
}

/// Points binned by distance from a reference: [0, r1], (r1, r2], (r2, r3] and beyond.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnnulusCounts {
    pub counts: [usize; 3],
    pub beyond: usize,
}

impl AnnulusCounts {
    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.beyond
    }

    pub fn frequencies(&self) -> [f64; 3] {
        let n = self.total().max(1) as f64;
        self.counts.map(|c| c as f64 / n)
    }
}

pub fn annulus_counts(points: &[Point], reference: Point, radii: [f64; 3]) -> Result<AnnulusCounts, UqError> {
    if !(radii[0] > 0.0 && radii[0] < radii[1] && radii[1] < radii[2] && radii[2].is_finite()) {
        return Err(UqError::InvalidRadii);
    }
    let mut out = AnnulusCounts::default();
    for p in points {
        let d = p.dist(reference);
        match radii.iter().position(|&r| d <= r) {
            Some(i) => out.counts[i] += 1,
            None => out.beyond += 1,
        }
    }
    Ok(out)
}

/// Mean over samples of |approx - exact|_inf / |exact|_inf.
pub fn mean_relative_error(approx: &[Vec<f64>], exact: &[Vec<f64>]) -> Result<f64, UqError> {
    if approx.len() != exact.len() || approx.is_empty() {
        return Err(UqError::Dimension);
    }
    let mut acc = 0.0;
    for (a, e) in approx.iter().zip(exact) {
        if a.len() != e.len() {
            return Err(UqError::Dimension);
        }
        let scale = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(UqError::ZeroReference);
        }
        let diff = a.iter().zip(e).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        acc += diff / scale;
    }
    Ok(acc / approx.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn annulus_basic() {
        let r = [0.032, 0.048, 0.064];
        let c = Point::new(5.0, -3.0);
        let at = vec![c; 7];
        assert_eq!(annulus_counts(&at, c, r).unwrap().counts, [7, 0, 0]);
        let ring: Vec<_> = (0..12)
            .map(|k| {
                let t = k as f64 * 0.5;
                Point::new(c.x + 0.04 * crate::fmath::cos(t), c.y + 0.04 * crate::fmath::sin(t))
            })
            .collect();
        let a = annulus_counts(&ring, c, r).unwrap();
        assert_eq!((a.counts, a.beyond), ([0, 12, 0], 0));
        let far = [Point::new(6.0, -3.0)];
        assert_eq!(annulus_counts(&far, c, r).unwrap().beyond, 1);
        assert!(annulus_counts(&far, c, [0.1, 0.1, 0.2]).is_err());
    }

    #[test]
    fn relative_error() {
        let a = vec![vec![1.0, -2.0, 0.5], vec![3.0, 0.0, 1.0]];
        assert_eq!(mean_relative_error(&a, &a).unwrap(), 0.0);
        let b: Vec<Vec<f64>> = a.iter().map(|v| v.iter().map(|x| 1.01 * x).collect()).collect();
        let e = mean_relative_error(&a, &b).unwrap();
        assert!((e - 0.01 / 1.01).abs() < 1e-14);
        assert_eq!(mean_relative_error(&a[..1], &[vec![0.0; 3]]), Err(UqError::ZeroReference));
    }
}
