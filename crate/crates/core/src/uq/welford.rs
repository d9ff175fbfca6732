use alloc::vec;
use alloc::vec::Vec;

use super::UqError;
use crate::fmath::sqrt;

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.96;

/// Running mean and sum of squared deviations, one entry per monitored component.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WelfordState {
    pub k: u64,
    pub m: Vec<f64>,
    pub s: Vec<f64>,
}

impl WelfordState {
    pub fn new(dim: usize) -> Self {
        WelfordState { k: 0, m: vec![0.0; dim], s: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn update(&mut self, x: &[f64]) -> Result<(), UqError> {
        if x.len() != self.dim() {
            return Err(UqError::Dimension);
        }
        self.k += 1;
        let k = self.k as f64;
        for ((m, s), &xi) in self.m.iter_mut().zip(self.s.iter_mut()).zip(x) {
            let d = xi - *m;
            *m += d / k;
            *s += d * (xi - *m);
        }
        Ok(())
    }

    pub fn mean(&self) -> &[f64] {
        &self.m
    }

    /// Unbiased sample variance; needs two samples.
    pub fn variance(&self) -> Result<Vec<f64>, UqError> {
        if self.k < 2 {
            return Err(UqError::TooFewSamples);
        }
        let d = (self.k - 1) as f64;
        Ok(self.s.iter().map(|s| s.max(0.0) / d).collect())
    }

    pub fn std_dev(&self) -> Result<Vec<f64>, UqError> {
        Ok(self.variance()?.into_iter().map(sqrt).collect())
    }

    /// 1.96 S_k / sqrt(k) per component.
    pub fn margin_of_error(&self) -> Result<Vec<f64>, UqError> {
        let rk = sqrt(self.k as f64);
        Ok(self.std_dev()?.into_iter().map(|s| Z95 * s / rk).collect())
    }

    /// Largest margin relative to max(|m_i|, 1e-3 max|m|). Zero when every margin is zero.
    pub fn campaign_scalar(&self) -> Result<f64, UqError> {
        let eps = self.margin_of_error()?;
        let floor = 1e-3 * self.m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut worst = 0.0f64;
        for (e, m) in eps.iter().zip(&self.m) {
            if *e == 0.0 {
                continue;
            }
            let den = m.abs().max(floor);
            if den == 0.0 {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(e / den);
        }
        Ok(worst)
    }
}
