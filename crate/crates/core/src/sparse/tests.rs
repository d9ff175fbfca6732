use super::*;
use alloc::vec;
use alloc::vec::Vec;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit_box(d: usize) -> ParamBox {
    ParamBox::new(vec![0.0; d], vec![1.0; d]).unwrap()
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn scalar(f: impl Fn(&[f64]) -> f64) -> impl BatchEval {
    pointwise(move |x: &[f64]| Some(vec![f(x)]))
}

#[test]
fn constant_has_no_higher_surpluses() {
    let s = build_surrogate(&mut pointwise(|_: &[f64]| Some(vec![2.5, -1.0])), unit_box(3), 3).unwrap();
    assert_eq!(s.surplus(0), &[2.5, -1.0]);
    for k in 1..s.node_count() {
        assert!(s.surplus(k).iter().all(|v| v.abs() < 1e-15));
    }
    assert_eq!(s.eval(&[0.1, 0.7, 0.3]).unwrap(), vec![2.5, -1.0]);
}

#[test]
fn reproduces_samples_at_nodes() {
    let f = |x: &[f64]| (3.0 * x[0]).sin() * (1.0 + x[1] * x[1]).ln() + x[0];
    let b = ParamBox::new(vec![-1.0, 2.0], vec![1.5, 4.0]).unwrap();
    let s = build_surrogate(&mut scalar(f), b, 4).unwrap();
    for p in s.node_points() {
        let v = s.eval(&p).unwrap()[0];
        assert!((v - f(&p)).abs() <= 1e-10 * f(&p).abs().max(1e-300), "{p:?}");
    }
}

#[test]
fn linear_exact_from_level_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 1..=4 {
        let f = move |x: &[f64]| x.iter().enumerate().map(|(p, v)| (p as f64 + 1.0) * v).sum::<f64>() - 0.5;
        let b = ParamBox::new(vec![-2.0; d], vec![3.0; d]).unwrap();
        let s = build_surrogate(&mut scalar(f), b, 1).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..d).map(|_| -2.0 + 5.0 * uniform(&mut rng)).collect();
            assert!((s.eval(&x).unwrap()[0] - f(&x)).abs() < 1e-10);
        }
    }
}

#[test]
fn product_of_squares_level_three() {
    let f = |x: &[f64]| x[0] * x[0] * x[1] * x[1];
    let s = build_surrogate(&mut scalar(f), unit_box(2), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let x = [uniform(&mut rng), uniform(&mut rng)];
        assert!((s.eval(&x).unwrap()[0] - f(&x)).abs() <= 1e-8);
    }
}

#[test]
fn refine_matches_direct_build() {
    let f = |x: &[f64]| (-(x[0] - 0.3).powi(2) - 2.0 * (x[1] - 0.6).powi(2)).exp();
    let direct = build_surrogate(&mut scalar(f), unit_box(2), 3).unwrap();
    let coarse = build_surrogate(&mut scalar(f), unit_box(2), 2).unwrap();
    let calls = core::cell::Cell::new(0usize);
    let mut counting = pointwise(|x: &[f64]| {
        calls.set(calls.get() + 1);
        Some(vec![f(x)])
    });
    let fine = coarse.refine_level(&mut counting).unwrap();
    assert_eq!(calls.get() as u128, grid_size(2, 3) - grid_size(2, 2));
    assert_eq!(fine.grid, direct.grid);
    for (a, b) in fine.surpluses.iter().zip(&direct.surpluses) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert_eq!(&fine.surpluses[..coarse.surpluses.len()], &coarse.surpluses[..]);
    for p in coarse.node_points() {
        assert!((fine.eval(&p).unwrap()[0] - coarse.eval(&p).unwrap()[0]).abs() < 1e-12);
    }
}

#[test]
fn gaussian_self_convergence() {
    let f = |x: &[f64]| (-4.0 * ((x[0] - 0.4).powi(2) + (x[1] - 0.55).powi(2))).exp();
    let sup = |level: u32| {
        let s = build_surrogate(&mut scalar(f), unit_box(2), level).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        (0..1000).fold(0.0f64, |m, _| {
            let x = [uniform(&mut rng), uniform(&mut rng)];
            m.max((s.eval(&x).unwrap()[0] - f(&x)).abs())
        })
    };
    assert!(sup(5) < sup(3));
}

#[test]
fn outside_box_refused_unless_allowed() {
    let s = build_surrogate(&mut scalar(|x: &[f64]| x[0]), unit_box(1), 2).unwrap();
    assert_eq!(s.eval(&[1.5]), Err(SparseError::OutsideBox));
    assert!((s.eval_with(&[1.5], true).unwrap()[0] - 1.5).abs() < 1e-12);
    assert_eq!(s.eval(&[0.2, 0.3]), Err(SparseError::Dimension));
}

#[test]
fn failed_node_takes_nearest_sample() {
    let f = |x: &[f64]| x[0] + 10.0 * x[1];
    let mut flaky = pointwise(|x: &[f64]| if x[0] == 1.0 && x[1] == 0.5 { None } else { Some(vec![f(x)]) });
    let s = build_surrogate(&mut flaky, unit_box(2), 2).unwrap();
    assert_eq!(s.failures.len(), 1);
    let k = s.failures[0];
    assert_eq!(s.grid.nodes[k].point(), vec![1.0, 0.5]);
    // Level 1 holds (1, 0.5); its nearest sampled neighbour then is the centre.
    let v = s.eval(&[1.0, 0.5]).unwrap()[0];
    assert!((v - f(&[0.5, 0.5])).abs() < 1e-12, "{v}");
}

#[test]
fn zero_width_side() {
    let b = ParamBox::new(vec![0.0, 2.0], vec![1.0, 2.0]).unwrap();
    let s = build_surrogate(&mut scalar(|x: &[f64]| x[0] * x[1]), b, 2).unwrap();
    assert!((s.eval(&[0.3, 2.0]).unwrap()[0] - 0.6).abs() < 1e-12);
    assert!(s.eval(&[0.3, 2.1]).is_err());
}
