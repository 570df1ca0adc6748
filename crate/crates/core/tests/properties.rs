//! Randomized invariants: homogeneity of the spray and projective
//! factor in y, exactness of the r/s split, and jet-vs-finite-difference
//! agreement for expression fields.

use finsler2d::betacalc::decompose;
use finsler2d::diffcore::{fd_x_jet, Direction, Point};
use finsler2d::expr::Expr;
use finsler2d::fields::{conformal_pair, flat_pair, DomainBox};
use finsler2d::phi::PhiFamily;
use finsler2d::spray::{projective_factor, spray_generic, AbMetric};
use proptest::prelude::*;

fn randers_metric() -> AbMetric {
    AbMetric::new(
        flat_pair(
            Expr::parse("0.2 + 0.1*x2").unwrap(),
            Expr::parse("0.1*x1").unwrap(),
            DomainBox::new((-1.0, 1.0), (-1.0, 1.0)),
        ),
        PhiFamily::RandersType { eps: 1.0, k: 0.0 },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spray_is_two_homogeneous_in_y(
        x1 in -0.8f64..0.8,
        x2 in -0.8f64..0.8,
        th in 0.0f64..std::f64::consts::TAU,
        lam in 0.2f64..5.0,
    ) {
        let metric = randers_metric();
        let p = Point::new(x1, x2);
        let y = Direction::new(th.cos(), th.sin());
        let ys = Direction::new(lam * y.y1, lam * y.y2);
        let g = spray_generic(&metric, &p, &y).unwrap();
        let gs = spray_generic(&metric, &p, &ys).unwrap();
        for i in 0..2 {
            let scale = 1.0 + g[i].abs() * lam * lam;
            prop_assert!((gs[i] - lam * lam * g[i]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn projective_factor_is_one_homogeneous_in_y(
        x1 in -0.8f64..0.8,
        x2 in -0.8f64..0.8,
        th in 0.0f64..std::f64::consts::TAU,
        lam in 0.2f64..5.0,
    ) {
        let metric = randers_metric();
        let p = Point::new(x1, x2);
        let y = Direction::new(th.cos(), th.sin());
        let ys = Direction::new(lam * y.y1, lam * y.y2);
        let a = projective_factor(&metric, &p, &y).unwrap();
        let b = projective_factor(&metric, &p, &ys).unwrap();
        prop_assert!((b - lam * a).abs() <= 1e-9 * (1.0 + a.abs() * lam));
    }

    #[test]
    fn covariant_derivative_splits_exactly(
        c1 in -0.5f64..0.5,
        c2 in -0.5f64..0.5,
        x1 in 0.6f64..1.4,
        x2 in 0.6f64..1.4,
    ) {
        let sigma = c1 * Expr::x1() + c2 * Expr::x2().square();
        let pair = conformal_pair(
            sigma,
            Expr::x2(),
            -Expr::x1(),
            0.3,
            DomainBox::new((0.5, 1.5), (0.5, 1.5)),
        )
        .unwrap();
        let d = decompose(&pair, &Point::new(x1, x2)).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let diff = (d.r[i][j] + d.s[i][j] - d.bij[i][j]).abs();
                prop_assert!(diff <= 1e-14 * (1.0 + d.bij[i][j].abs()));
            }
        }
        // the 1-form contraction of the antisymmetric part vanishes
        prop_assert!((d.s_i[0] * d.b_up[0] + d.s_i[1] * d.b_up[1]).abs() <= 1e-12);
    }

    #[test]
    fn expression_jets_match_finite_differences(
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        x1 in -0.5f64..0.5,
        x2 in -0.5f64..0.5,
    ) {
        let e = a * Expr::x1().square() * Expr::x2() + b * (0.3 * Expr::x1()).exp();
        let p = Point::new(x1, x2);
        let jet = finsler2d::diffcore::x_jet(|u, v| e.eval(u, v), &p).unwrap();
        let fd = fd_x_jet(|u, v| e.eval_f64(u, v), &p, 1e-3);
        let scale = 1.0 + a.abs() + b.abs();
        prop_assert!((jet.value - fd.value).abs() <= 1e-10 * scale);
        for k in 0..2 {
            prop_assert!((jet.grad[k] - fd.grad[k]).abs() <= 1e-6 * scale);
            for l in 0..2 {
                prop_assert!((jet.hess[k][l] - fd.hess[k][l]).abs() <= 1e-5 * scale);
            }
        }
    }
}
