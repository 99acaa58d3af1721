use std::f64::consts::PI;

use proptest::prelude::*;
use tritronquee::analysis::laplace_polar;
use tritronquee::bvp::{LineDomain, LineProblem};
use tritronquee::model_curve::branch_points;
use tritronquee::series::{cn_table_check, coefficients, leading_coefficient};
use tritronquee::spectral::{build_diff_ops, build_grid, interpolate};
use tritronquee::stokes_data::StokesVector;
use tritronquee::{BranchedPoint, Complex64, Error};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex(bound: f64) -> impl Strategy<Value = Complex64> {
    (-bound..bound, -bound..bound).prop_map(|(a, b)| c(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn leading_coefficients(t in complex(3.0)) {
        let a = coefficients(t, 20).unwrap();
        prop_assert_eq!(a[0], c(leading_coefficient(), 0.0));
        prop_assert_eq!(a[1], c(0.0, 0.0));
        prop_assert!((a[2] - 2.0 * t / leading_coefficient()).norm() < 1e-13 * (1.0 + t.norm()));
    }

    #[test]
    fn real_t_gives_real_coefficients(t in -3.0f64..3.0) {
        for a in coefficients(c(t, 0.0), 60).unwrap() {
            prop_assert!(a.im == 0.0);
        }
    }

    #[test]
    fn closed_form_table(t in complex(2.0)) {
        for r in cn_table_check(t) {
            prop_assert!(r < 1e-10, "{}", r);
        }
    }

    #[test]
    fn argument_selects_the_sheet(r in 0.1f64..50.0, th in -10.0f64..10.0) {
        let p = BranchedPoint::new(r, th).unwrap();
        let same = BranchedPoint::new(r, th + 6.0 * PI).unwrap();
        let next = BranchedPoint::new(r, th + 2.0 * PI).unwrap();
        prop_assert!((p.cbrt() - same.cbrt()).norm() < 1e-12 * r.cbrt());
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        prop_assert!((next.cbrt() - w * p.cbrt()).norm() < 1e-12 * r.cbrt());
        prop_assert!((p.cbrt().powi(3) - p.value()).norm() < 1e-12 * r);
    }

    #[test]
    fn model_curve_identities(r in 0.5f64..20.0, th in -PI..4.0 * PI, t in complex(1.0)) {
        let x = BranchedPoint::new(r, th).unwrap();
        match branch_points(x, t, None) {
            Ok(p) => {
                let scale = p.lambda5.norm().max(1.0);
                prop_assert!(p.cubic_residual() < 1e-10 * scale.powi(3));
                prop_assert!(p.quadratic_residuals().iter().all(|&e| e < 1e-10 * scale * scale));
                let (sum, tt, xx) = p.reconstruct();
                prop_assert!(sum.norm() < 1e-10 * scale);
                prop_assert!((tt - t).norm() < 1e-10 * scale * scale);
                prop_assert!((xx - x.value()).norm() < 1e-10 * scale.powi(3));
            }
            // the continuation may run into the degenerate locus
            Err(Error::DegenerateCurve { .. }) | Err(Error::BranchTracking { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn seven_rotations_are_the_identity(v in proptest::collection::vec(complex(2.0), 7), n in -20i32..20) {
        let s = StokesVector::from_centered(v.try_into().unwrap());
        prop_assert!(s.rotate(7).max_difference(&s) == 0.0);
        prop_assert!(s.rotate(n).rotate(-n).max_difference(&s) == 0.0);
        prop_assert!((s.rotate(n).validate() - s.validate()).abs() < 1e-12 * (1.0 + s.validate()));
    }

    #[test]
    fn derivatives_kill_constants(nc in 8usize..64, a in -20.0f64..0.0, w in 0.5f64..30.0) {
        let g = build_grid(nc, a, a + w).unwrap();
        let ops = build_diff_ops(&g);
        let ones = vec![c(1.0, 0.0); g.len()];
        for k in 1..=4 {
            let d = ops.apply(k, &ones);
            let scale = (2.0 * (nc * nc) as f64 / w).powi(k as i32);
            prop_assert!(d.iter().all(|z| z.norm() < 1e-12 * scale), "k = {}", k);
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials(nc in 6usize..40, q in -1.0f64..1.0) {
        let g = build_grid(nc, -2.0, 3.0).unwrap();
        let f = |s: f64| c(1.0 - s + 0.5 * s.powi(4), s.powi(5) * 0.1);
        let v: Vec<Complex64> = g.nodes.iter().map(|&s| f(s)).collect();
        let at = 0.5 + 2.5 * q;
        prop_assert!((interpolate(&g, &v, at).unwrap() - f(at)).norm() < 1e-10);
    }

    #[test]
    fn jacobian_is_the_derivative(phi in -PI..PI, t in complex(1.0), seed in -3.0f64..3.0) {
        let d = LineDomain { phi, b: c(0.0, 0.5), ..LineDomain::u0_real(t, 5.0, 32) };
        let d = LineDomain {
            arg_left: BranchedPoint::from_complex_near(d.x_at(d.xi_l), phi + PI).unwrap().argument,
            arg_right: BranchedPoint::from_complex_near(d.x_at(d.xi_r), phi).unwrap().argument,
            threshold: 1e-2,
            ..d
        };
        let p = LineProblem::new(d).unwrap();
        let state = |s: f64| -> Vec<Complex64> {
            p.x.iter().map(|z| c((0.3 * z.re + s).sin(), 0.2 * (0.5 * z.im - s).cos()) + 0.1 * z).collect()
        };
        let (u, dir) = (state(seed), state(1.0 - seed));
        // the residual is cubic in u, so the central difference is off by 40h²|d|³ only
        let h = 1e-5;
        let up: Vec<_> = u.iter().zip(&dir).map(|(a, b)| a + h * b).collect();
        let um: Vec<_> = u.iter().zip(&dir).map(|(a, b)| a - h * b).collect();
        let (rp, rm) = (p.residual(&up), p.residual(&um));
        let jv = p.jacobian(&u).mul_vec(&dir);
        let scale = jv.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = rp.iter().zip(&rm).zip(&jv).map(|((a, b), j)| ((a - b) / (2.0 * h) - j).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-6 * scale, "{} vs {}", err, scale);
    }

    #[test]
    fn laplace_preserves_constants(v in -5.0f64..5.0, nr in 3usize..20, nt in 3usize..20) {
        let r: Vec<f64> = (0..nr).map(|i| 1.0 + i as f64 * 0.2).collect();
        let th: Vec<f64> = (0..nt).map(|j| -0.5 + j as f64 * 0.1).collect();
        let field = vec![vec![v; nr]; nt];
        let out = laplace_polar(&r, &th, &[field]).unwrap();
        prop_assert!(out[0].iter().flatten().all(|w| (w - v).abs() < 1e-12 * (1.0 + v.abs())));
    }
}

#[test]
fn t0_sparsity() {
    for (k, a) in coefficients(c(0.0, 0.0), 140).unwrap().iter().enumerate() {
        if k % 7 != 0 {
            assert_eq!(*a, c(0.0, 0.0), "a_{k}");
        } else {
            assert!(a.norm() > 0.0);
        }
    }
}
