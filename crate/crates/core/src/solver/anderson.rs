//! Anderson mixing for the Picard map ψ ↦ G(ψ).

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

/// Keeps the last `depth` iterate and residual differences.
#[derive(Clone, Debug)]
pub struct Anderson {
    depth: usize,
    beta: f64,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    dx: VecDeque<Vec<f64>>,
    dr: VecDeque<Vec<f64>>,
}

impl Anderson {
    pub fn new(depth: usize, beta: f64) -> Self {
        Anderson { depth, beta, prev: None, dx: VecDeque::new(), dr: VecDeque::new() }
    }

    pub fn reset(&mut self) {
        self.prev = None;
        self.dx.clear();
        self.dr.clear();
    }

    /// Next iterate from x and g = G(x). With depth 0 this is plain damping.
    pub fn step(&mut self, x: &[f64], g: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = g.iter().zip(x).map(|(a, b)| a - b).collect();
        if self.depth > 0 {
            if let Some((px, pr)) = &self.prev {
                self.dx.push_back(x.iter().zip(px).map(|(a, b)| a - b).collect());
                self.dr.push_back(r.iter().zip(pr).map(|(a, b)| a - b).collect());
                if self.dx.len() > self.depth {
                    self.dx.pop_front();
                    self.dr.pop_front();
                }
            }
            self.prev = Some((x.to_vec(), r.clone()));
        }
        let mut out: Vec<f64> = x.iter().zip(&r).map(|(a, b)| a + self.beta * b).collect();
        let k = self.dr.len();
        if k == 0 {
            return out;
        }
        // γ = argmin |r − ΔR γ| via regularised normal equations.
        let mut a = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&self.dr[i], &self.dr[j]);
                a[i * k + j] = v;
                a[j * k + i] = v;
            }
            rhs[i] = dot(&self.dr[i], &r);
        }
        let tr: f64 = (0..k).map(|i| a[i * k + i]).sum();
        for i in 0..k {
            a[i * k + i] += 1e-12 * tr;
        }
        let Some(gamma) = cholesky_solve(&mut a, &mut rhs, k) else {
            self.reset();
            return out;
        };
        for (j, &gj) in gamma.iter().enumerate() {
            for ((o, dxv), drv) in out.iter_mut().zip(&self.dx[j]).zip(&self.dr[j]) {
                *o -= gj * (dxv + self.beta * drv);
            }
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = crate::fmath::sqrt(d);
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Some(b.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_map_with_unstable_mode() {
        // G(x) = A x + c with eigenvalues 1.6 and 0.3: plain iteration diverges.
        let g = |x: &[f64]| vec![1.6 * x[0] + 1.0, 0.3 * x[1] - 2.0];
        let fixed = [1.0 / (1.0 - 1.6), -2.0 / 0.7];
        let mut acc = Anderson::new(3, 0.7);
        let mut x = vec![0.0, 0.0];
        for _ in 0..30 {
            let gx = g(&x);
            x = acc.step(&x, &gx);
        }
        assert!((x[0] - fixed[0]).abs() < 1e-10 && (x[1] - fixed[1]).abs() < 1e-10, "{x:?}");
    }

    #[test]
    fn depth_zero_is_damping() {
        let mut acc = Anderson::new(0, 0.5);
        assert_eq!(acc.step(&[1.0, 2.0], &[3.0, 2.0]), vec![2.0, 2.0]);
        assert_eq!(acc.step(&[2.0, 2.0], &[3.0, 2.0]), vec![2.5, 2.0]);
    }
}
