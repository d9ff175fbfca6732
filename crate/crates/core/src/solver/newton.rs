//! Jacobian-free Newton–Krylov on F(ψ) = G(ψ) − ψ with backtracking.

use alloc::vec;
use alloc::vec::Vec;

use crate::fmath::sqrt;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct NewtonOptions {
    pub max_krylov: usize,
    /// Relative GMRES tolerance (forcing term).
    pub forcing: f64,
    pub max_backtracks: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_krylov: 30, forcing: 1e-3, max_backtracks: 8 }
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// GMRES without restart for J d = rhs, where `jv` applies J. Returns the
/// correction, or None if `jv` fails.
pub fn gmres(
    mut jv: impl FnMut(&[f64]) -> Option<Vec<f64>>,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    let n = rhs.len();
    let beta = norm2(rhs);
    if beta == 0.0 {
        return Some(vec![0.0; n]);
    }
    let mut basis: Vec<Vec<f64>> = vec![rhs.iter().map(|x| x / beta).collect()];
    let mut h: Vec<Vec<f64>> = Vec::new();
    let (mut cs, mut sn): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut g = vec![beta];
    let mut k = 0;
    while k < max_iter {
        let mut w = jv(&basis[k])?;
        let mut col = vec![0.0; k + 2];
        for (j, b) in basis.iter().enumerate() {
            let hj = dot(&w, b);
            col[j] = hj;
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= hj * bi;
            }
        }
        let hn = norm2(&w);
        col[k + 1] = hn;
        for j in 0..k {
            let t = cs[j] * col[j] + sn[j] * col[j + 1];
            col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
            col[j] = t;
        }
        let r = sqrt(col[k] * col[k] + col[k + 1] * col[k + 1]);
        let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (col[k] / r, col[k + 1] / r) };
        cs.push(c);
        sn.push(s);
        col[k] = r;
        col[k + 1] = 0.0;
        g.push(-s * g[k]);
        g[k] *= c;
        h.push(col);
        k += 1;
        if g[k].abs() <= tol * beta || hn <= 1e-14 * beta {
            break;
        }
        basis.push(w.iter().map(|x| x / hn).collect());
    }
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[j][i] * y[j];
        }
        y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
    }
    let mut d = vec![0.0; n];
    for (yj, b) in y.iter().zip(&basis) {
        for (di, bi) in d.iter_mut().zip(b) {
            *di += yj * bi;
        }
    }
    Some(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_solves_small_nonsymmetric() {
        let a = [[4.0, 1.0, 0.0], [2.0, 3.0, 1.0], [0.0, -1.0, 2.0]];
        let x = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i][j] * x[j]).sum()).collect();
        let jv = |v: &[f64]| -> Option<Vec<f64>> { Some((0..3).map(|i| (0..3).map(|j| a[i][j] * v[j]).sum()).collect()) };
        let d = gmres(jv, &b, 1e-14, 10).unwrap();
        for i in 0..3 {
            assert!((d[i] - x[i]).abs() < 1e-12, "{d:?}");
        }
    }

    #[test]
    fn gmres_zero_rhs() {
        let d = gmres(|v: &[f64]| Some(v.to_vec()), &[0.0, 0.0], 1e-10, 5).unwrap();
        assert_eq!(d, vec![0.0, 0.0]);
    }
}
