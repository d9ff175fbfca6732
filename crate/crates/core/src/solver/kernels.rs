//! Complete elliptic integrals and the Γ coupling kernels N and M.

use core::f64::consts::{FRAC_PI_2, PI};

use crate::fmath::sqrt;
use crate::geometry::Point;

const AGM_MAX_ITER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("elliptic modulus {0} outside [0, 1)")]
    Modulus(f64),
    #[error("kernel N evaluated on the symmetry axis")]
    Axis,
    #[error("kernel M evaluated at coincident points")]
    Coincident,
}

/// K(k) and E(k) for modulus k in [0, 1).
pub fn elliptic_ke(k: f64) -> Result<(f64, f64), KernelError> {
    if !(0.0..1.0).contains(&k) {
        return Err(KernelError::Modulus(k));
    }
    Ok(elliptic_ke_split(k * k, (1.0 - k) * (1.0 + k)))
}

/// K and E from k² and the complementary k'² = 1 − k², passed separately so
/// callers near k = 1 can supply k'² without cancellation.
pub fn elliptic_ke_split(k2: f64, kp2: f64) -> (f64, f64) {
    let mut a = 1.0;
    let mut b = sqrt(kp2);
    let mut c = sqrt(k2);
    let mut pow2 = 0.5;
    let mut sum = pow2 * k2;
    for _ in 0..AGM_MAX_ITER {
        let an = 0.5 * (a + b);
        let bn = sqrt(a * b);
        // c_{n+1} = c_n² / (4 a_{n+1}) avoids the a − b cancellation.
        c = c * c / (4.0 * an);
        a = an;
        b = bn;
        let c2 = c * c;
        pow2 *= 2.0;
        sum += pow2 * c2;
        if c2 <= 1e-34 * a * a {
            break;
        }
    }
    let kk = FRAC_PI_2 / a;
    (kk, kk * (1.0 - sum))
}

/// N on Γ: (1/x)(1/δ₊ + 1/δ₋ − 1/ρ).
pub fn kernel_n(p: Point, rho: f64) -> Result<f64, KernelError> {
    if p.x <= 0.0 {
        return Err(KernelError::Axis);
    }
    let dp = sqrt(p.x * p.x + (rho + p.y) * (rho + p.y));
    let dm = sqrt(p.x * p.x + (rho - p.y) * (rho - p.y));
    Ok((1.0 / dp + 1.0 / dm - 1.0 / rho) / p.x)
}

/// Modulus κ between two points of the half-plane.
pub fn kappa(p1: Point, p2: Point) -> f64 {
    let dy = p1.y - p2.y;
    sqrt(4.0 * p1.x * p2.x / ((p1.x + p2.x) * (p1.x + p2.x) + dy * dy))
}

/// M(p1, p2) = κ/(2π(x₁x₂)^{3/2}) · ((2 − κ²)/(2 − 2κ²) E(κ) − K(κ)).
pub fn kernel_m(p1: Point, p2: Point) -> Result<f64, KernelError> {
    if p1 == p2 {
        return Err(KernelError::Coincident);
    }
    if p1.x <= 0.0 || p2.x <= 0.0 {
        return Err(KernelError::Axis);
    }
    Ok(kernel_m_unchecked(p1, p2))
}

/// Below this κ² the bracket is summed as a series to avoid cancellation.
const SERIES_M: f64 = 0.25;
const SERIES_TERMS: usize = 34;

pub(crate) fn kernel_m_unchecked(p1: Point, p2: Point) -> f64 {
    let dx = p1.x - p2.x;
    let dy = p1.y - p2.y;
    let sx = p1.x + p2.x;
    let den = sx * sx + dy * dy;
    let k2 = 4.0 * p1.x * p2.x / den;
    let kp2 = (dx * dx + dy * dy) / den;
    let xx = p1.x * p2.x;
    let pre = sqrt(k2) / (2.0 * PI * xx * sqrt(xx));
    pre * bracket(k2, kp2)
}

/// (2 − m)/(2(1 − m)) E − K as a function of m = κ².
fn bracket(m: f64, mp: f64) -> f64 {
    if m < SERIES_M {
        // Coefficients of K and E in powers of m: a_n = ((2n-1)!!/(2n)!!)^2, E has a_n/(1-2n).
        let mut a = 1.0;
        let mut s = 1.0;
        let mut s_prev;
        let mut mn = 1.0;
        let mut acc = 0.0;
        for n in 1..SERIES_TERMS {
            let r = (2 * n - 1) as f64 / (2 * n) as f64;
            a *= r * r;
            s_prev = s;
            s += a / (1.0 - 2.0 * n as f64);
            mn *= m;
            if n >= 2 {
                acc += (s - 0.5 * s_prev - a) * mn;
            }
        }
        FRAC_PI_2 * acc
    } else {
        let (k, e) = elliptic_ke_split(m, mp);
        (2.0 - m) / (2.0 * mp) * e - k
    }
}
