use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::UqError;
use crate::geometry::CurrentVector;
use crate::sparse::ParamBox;

/// Uniform relative noise on a subset of coil currents; inactive coils stay at the reference.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    pub reference: CurrentVector,
    pub fraction: f64,
    pub active: Vec<usize>,
}

impl NoiseModel {
    /// Every coil perturbed.
    pub fn new(reference: CurrentVector, fraction: f64) -> Result<Self, UqError> {
        let active = (0..reference.len()).collect();
        Self::with_active(reference, fraction, active)
    }

    pub fn with_active(reference: CurrentVector, fraction: f64, active: Vec<usize>) -> Result<Self, UqError> {
        if !(fraction >= 0.0 && fraction.is_finite()) {
            return Err(UqError::InvalidConfig("noise fraction must be finite and non-negative"));
        }
        if active.is_empty() || active.windows(2).any(|w| w[0] >= w[1]) || active.iter().any(|&i| i >= reference.len()) {
            return Err(UqError::InvalidConfig("active coils must be sorted, distinct and in range"));
        }
        if reference.values.iter().any(|v| !v.is_finite()) {
            return Err(UqError::InvalidConfig("reference currents must be finite"));
        }
        Ok(NoiseModel { reference, fraction, active })
    }

    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn half_width(&self, coil: usize) -> f64 {
        self.fraction * self.reference.values[coil].abs()
    }

    /// Box over the active coils, the parameter domain of a surrogate.
    pub fn bounds(&self) -> ParamBox {
        let (lo, hi) = self
            .active
            .iter()
            .map(|&i| {
                let c = self.reference.values[i];
                let h = self.half_width(i);
                (c - h, c + h)
            })
            .unzip();
        ParamBox::new(lo, hi).expect("validated noise box")
    }

    pub fn params_of(&self, c: &CurrentVector) -> Vec<f64> {
        self.active.iter().map(|&i| c.values[i]).collect()
    }

    pub fn currents_of(&self, params: &[f64]) -> CurrentVector {
        let mut c = self.reference.clone();
        for (&i, &v) in self.active.iter().zip(params) {
            c.values[i] = v;
        }
        c
    }

    /// Draw number `index` of the campaign seeded with `seed`. Each draw owns a
    /// ChaCha8 stream so the result does not depend on evaluation order.
    pub fn sample(&self, seed: u64, index: u64) -> CurrentVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: RngCore>(&self, rng: &mut R) -> CurrentVector {
        let mut c = self.reference.clone();
        for &i in &self.active {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            c.values[i] += self.half_width(i) * (2.0 * u - 1.0);
        }
        c
    }
}
