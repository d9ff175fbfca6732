use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use tokamak_uq_core::field::{recover_gradient, saddle_candidates, shaping};
use tokamak_uq_core::geometry::Point;
use tokamak_uq_core::mesh::{project_field, refine_marked, NodalField, TriMesh};
use tokamak_uq_core::sparse::{build_surrogate, grid_size, pointwise, ParamBox, SparseGrid};
use tokamak_uq_core::uq::{annulus_counts, WelfordState};

fn unit_box(d: usize) -> ParamBox {
    ParamBox::new(vec![-1.0; d], vec![2.0; d]).unwrap()
}

fn point_set(d: usize, level: u32) -> BTreeSet<Vec<u64>> {
    SparseGrid::new(d, level).nodes.iter().map(|n| n.point().iter().map(|x| x.to_bits()).collect()).collect()
}

#[test]
fn nested_grids() {
    for d in 1..=4 {
        for l in 0..5 {
            assert!(point_set(d, l).is_subset(&point_set(d, l + 1)), "d {d} level {l}");
        }
    }
}

#[test]
fn grid_size_matches_distinct_points() {
    for d in 1..=4 {
        for l in 0..=5 {
            assert_eq!(grid_size(d, l), point_set(d, l).len() as u128, "d {d} level {l}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Per-variable degree at most two. A product of d quadratics needs level d,
    /// so the level is drawn from d upwards.
    #[test]
    fn quadratic_reproduction(d in 1usize..=3, extra in 0u32..2, c in prop::collection::vec(-2.0f64..2.0, 27), x in prop::collection::vec(-1.0f64..2.0, 3)) {
        let f = move |p: &[f64]| {
            let mut acc = 0.0;
            for (k, ck) in c.iter().enumerate().take(3usize.pow(d as u32)) {
                let mut t = *ck;
                let mut r = k;
                for pi in p.iter().take(d) {
                    t *= pi.powi((r % 3) as i32);
                    r /= 3;
                }
                acc += t;
            }
            vec![acc]
        };
        let level = d.max(2) as u32 + extra;
        let s = build_surrogate(&mut pointwise(|p: &[f64]| Some(f(p))), unit_box(d), level).unwrap();
        let got = s.eval(&x[..d]).unwrap()[0];
        let want = f(&x[..d])[0];
        prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
    }

    #[test]
    fn vector_linearity(d in 1usize..=3, level in 0u32..4, a in -3.0f64..3.0, x in prop::collection::vec(-1.0f64..2.0, 3)) {
        let f = |p: &[f64]| vec![p.iter().map(|v| v.sin()).sum::<f64>(), p.iter().map(|v| (0.5 * v).exp()).product()];
        let g = |p: &[f64]| vec![p.iter().map(|v| v * v * v).sum::<f64>(), 1.0 / (2.0 + p[0])];
        let h = |p: &[f64]| f(p).iter().zip(g(p)).map(|(u, v)| a * u + v).collect::<Vec<_>>();
        let sf = build_surrogate(&mut pointwise(|p: &[f64]| Some(f(p))), unit_box(d), level).unwrap();
        let sg = build_surrogate(&mut pointwise(|p: &[f64]| Some(g(p))), unit_box(d), level).unwrap();
        let sh = build_surrogate(&mut pointwise(|p: &[f64]| Some(h(p))), unit_box(d), level).unwrap();
        for k in 0..sh.node_count() {
            for ((u, v), w) in sf.surplus(k).iter().zip(sg.surplus(k)).zip(sh.surplus(k)) {
                prop_assert!((a * u + v - w).abs() <= 1e-12 * (1.0 + w.abs()));
            }
        }
        let (u, v, w) = (sf.eval(&x[..d]).unwrap(), sg.eval(&x[..d]).unwrap(), sh.eval(&x[..d]).unwrap());
        for i in 0..2 {
            prop_assert!((a * u[i] + v[i] - w[i]).abs() <= 1e-12 * (1.0 + w[i].abs()));
        }
    }

    #[test]
    fn welford_matches_two_pass(data in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 2), 2..400), shift in -1e4f64..1e4) {
        let mut w = WelfordState::new(2);
        for x in &data {
            w.update(&[x[0] + shift, x[1]]).unwrap();
        }
        let n = data.len() as f64;
        let var = w.variance().unwrap();
        for i in 0..2 {
            let col: Vec<f64> = data.iter().map(|x| if i == 0 { x[0] + shift } else { x[1] }).collect();
            let mean = col.iter().sum::<f64>() / n;
            let v = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let scale = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            prop_assert!((w.m[i] - mean).abs() <= 1e-12 * scale);
            prop_assert!((var[i] - v).abs() <= 1e-12 * v.max(1e-12 * scale * scale));
        }
    }

    #[test]
    fn annulus_partitions(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..300), r1 in 0.01f64..0.3, g1 in 0.01f64..0.3, g2 in 0.01f64..0.3) {
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let a = annulus_counts(&pts, Point::new(0.0, 0.0), [r1, r1 + g1, r1 + g1 + g2]).unwrap();
        prop_assert_eq!(a.total(), pts.len());
    }

    #[test]
    fn shaping_ignores_order(n in 12usize..200, rot in 0usize..200, a in 0.5f64..2.0, k in 1.0f64..2.5, tri in -0.5f64..0.5) {
        let pts: Vec<Point> = (0..n)
            .map(|j| {
                let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                Point::new(6.0 + a * (t + tri * t.sin()).cos(), a * k * t.sin())
            })
            .collect();
        let base = shaping(&pts).unwrap();
        let mut r = pts.clone();
        r.rotate_left(rot % n);
        let mut rev = pts.clone();
        rev.reverse();
        prop_assert_eq!(shaping(&r).unwrap(), base);
        prop_assert_eq!(shaping(&rev).unwrap(), base);
    }

    #[test]
    fn linear_fields_have_no_saddles(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
        let m = Arc::new(TriMesh::rectangle(7, 6, 1.0, 3.0, -1.0, 1.0));
        let f = NodalField::from_fn(m.clone(), |p| a * p.x + b * p.y + c);
        prop_assert!(saddle_candidates(&f).is_empty());
        let g = recover_gradient(&f);
        for v in 0..m.vertex_count() {
            prop_assert!((g.grad[v].x - a).abs() < 1e-10 && (g.grad[v].y - b).abs() < 1e-10);
        }
    }

    #[test]
    fn refinement_keeps_mesh_valid(marks in prop::collection::vec(0usize..60, 1..15)) {
        let m = TriMesh::rectangle(6, 5, 1.0, 2.0, -1.0, 1.0);
        let marked: Vec<usize> = marks.into_iter().map(|t| t % m.triangle_count()).collect();
        let r = refine_marked(&m, &marked);
        prop_assert!(r.mesh.conformity_audit());
        prop_assert_eq!(&r.mesh.vertices()[..m.vertex_count()], m.vertices());
        let area = |m: &TriMesh| (0..m.triangle_count()).map(|t| m.area(t)).sum::<f64>();
        prop_assert!((area(&r.mesh) - area(&m)).abs() < 1e-12);
    }

    #[test]
    fn projection_is_linear(a in -3.0f64..3.0, marks in prop::collection::vec(0usize..60, 1..10)) {
        let src = TriMesh::rectangle(6, 5, 1.0, 2.0, -1.0, 1.0);
        let marked: Vec<usize> = marks.into_iter().map(|t| t % src.triangle_count()).collect();
        let src = Arc::new(refine_marked(&src, &marked).mesh);
        let dst = Arc::new(TriMesh::rectangle(5, 7, 1.0, 2.0, -1.0, 1.0));
        let f = NodalField::from_fn(src.clone(), |p| (3.0 * p.x).sin() + p.y);
        let g = NodalField::from_fn(src.clone(), |p| p.x * p.y * p.y);
        let h = NodalField::new(src.clone(), f.values.iter().zip(&g.values).map(|(u, v)| a * u + v).collect());
        let (pf, pg, ph) = (
            project_field(&f, dst.clone()).unwrap().field,
            project_field(&g, dst.clone()).unwrap().field,
            project_field(&h, dst.clone()).unwrap().field,
        );
        for i in 0..dst.vertex_count() {
            prop_assert!((a * pf.values[i] + pg.values[i] - ph.values[i]).abs() < 1e-10);
        }
    }
}
