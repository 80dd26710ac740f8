mod common;

use common::{adaptive_simpson, crel, nested_simplex};
use num_complex::Complex64;
use proptest::prelude::*;

use llfisher::integrals::*;

fn plane(lambda: &[f64]) -> impl Fn(&[f64]) -> Complex64 + Sync + '_ {
    move |x: &[f64]| Complex64::from_polar(1.0, -lambda.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
}

#[test]
fn antiderivative_against_simpson() {
    let term = ExpPolyTerm::new(Complex64::new(0.7, -0.2), 2, 3.0);
    let (a, b) = (0.3, 2.9);
    let exact = antiderivative(&term, b) - antiderivative(&term, a);
    let num = adaptive_simpson(&|x| term.eval(x), a, b, 1e-13);
    assert!(crel(exact, num) < 1e-10, "{exact} vs {num}");
    let from_zero = primitive_from_zero(&term, b) - primitive_from_zero(&term, a);
    assert!(crel(from_zero, num) < 1e-10);
}

#[test]
fn two_particle_integral_against_nested_oracle() {
    let lambda = [1.3, -0.4];
    let l = 2.0;
    let sym = simplex_exp_integral(&SimplexIntegralRequest::plain(lambda.to_vec(), l)).unwrap();
    let oracle = nested_simplex(&plane(&lambda), 2, l, 8, 20);
    assert!(crel(sym, oracle) < 1e-9, "{sym} vs {oracle}");
    let dd = simplex_moments(&lambda, l, false).m0;
    assert!(crel(dd, oracle) < 1e-9);
}

#[test]
fn weighted_integrals_against_nested_oracle() {
    let lambda = [0.8, -1.7, 2.2];
    let l = 1.4;
    for (alpha, m, beta, n) in [(1, 1, 0, 1), (1, 3, 1, 2), (2, 2, 0, 1), (1, 2, 1, 2)] {
        let req = SimplexIntegralRequest::plain(lambda.to_vec(), l).with_powers(alpha, m, beta, n);
        let sym = simplex_exp_integral(&req).unwrap();
        let f = |x: &[f64]| plane(&lambda)(x) * x[m - 1].powi(alpha as i32) * x[n - 1].powi(beta as i32);
        let oracle = nested_simplex(&f, 3, l, 4, 16);
        assert!(crel(sym, oracle) < 1e-9, "({alpha},{m},{beta},{n}): {sym} vs {oracle}");
    }
    let mom = simplex_moments(&lambda, l, true);
    for m in 0..3 {
        let f = |x: &[f64]| plane(&lambda)(x) * x[m];
        assert!(crel(mom.coordinate_first(m), nested_simplex(&f, 3, l, 4, 16)) < 1e-9);
        for p in 0..3 {
            let g = |x: &[f64]| plane(&lambda)(x) * x[m] * x[p];
            assert!(crel(mom.coordinate_second(m, p), nested_simplex(&g, 3, l, 4, 16)) < 1e-9);
        }
    }
}

#[test]
fn coincident_and_vanishing_wavenumbers() {
    let l = 1.0;
    for lambda in [vec![0.0, 0.0, 0.0], vec![2.0, -2.0, 0.0], vec![1e-12, 0.5, -0.5], vec![3.0, 0.0, -3.0]] {
        let sym = simplex_exp_integral(&SimplexIntegralRequest::plain(lambda.clone(), l)).unwrap();
        let oracle = nested_simplex(&plane(&lambda), 3, l, 4, 16);
        assert!(crel(sym, oracle) < 1e-9, "{lambda:?}");
        assert!(crel(simplex_moments(&lambda, l, false).m0, oracle) < 1e-9);
    }
}

#[test]
fn quadrature_engine_matches_symbolic() {
    let lambda = [2.1, -0.6, 1.1];
    let l = 1.8;
    let sym = simplex_exp_integral(&SimplexIntegralRequest::plain(lambda.to_vec(), l)).unwrap();
    let quad: Complex64 = simplex_quadrature(plane(&lambda), 3, l, 48).unwrap();
    assert!(crel(quad, sym) < 1e-10);
}

#[test]
fn box_pieces_partition_the_cube() {
    // symmetric integrand, three bins, all ordered bin assignments for two particles
    let f = |x: &[f64]| (1.0 + x[0] * x[1]) * (-(x[0] - x[1]).powi(2)).exp();
    let edges = [0.0, 0.4, 1.1, 2.0];
    let full: f64 = box_quadrature(f, &[(0.0, 2.0), (0.0, 2.0)], 40).unwrap();
    let mut pieces = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            let iv = [(edges[a], edges[a + 1]), (edges[b], edges[b + 1])];
            let v: f64 = box_quadrature(f, &iv, 40).unwrap();
            pieces += v;
        }
    }
    assert!((pieces - full).abs() < 1e-6 * full.abs());
}

#[test]
fn box_sub_splitting_invariance() {
    let f = |x: &[f64]| (x[0] + 2.0 * x[1] + x[2]).cos() + x[0] * x[1] * x[2];
    let whole: f64 = box_quadrature(f, &[(0.0, 1.0), (0.5, 1.5), (-1.0, 0.0)], 24).unwrap();
    let mut split = 0.0;
    for (a, b) in [(0.0, 0.3), (0.3, 1.0)] {
        let v: f64 = box_quadrature(f, &[(a, b), (0.5, 1.5), (-1.0, 0.0)], 24).unwrap();
        split += v;
    }
    assert!((whole - split).abs() < 1e-10 * whole.abs().max(1.0));
}

#[test]
fn order_doubling_converges() {
    let lambda = [5.0, -3.0, 7.0];
    let l = 1.0;
    let a: Complex64 = simplex_quadrature(plane(&lambda), 3, l, 24).unwrap();
    let b: Complex64 = simplex_quadrature(plane(&lambda), 3, l, 48).unwrap();
    assert!((a - b).norm() < 1e-7);
    let zero_width: f64 = box_quadrature(|_| 1.0, &[(0.0, 1.0), (0.5, 0.5)], 8).unwrap();
    assert_eq!(zero_width, 0.0);
}

#[test]
fn invalid_requests_rejected() {
    assert!(simplex_exp_integral(&SimplexIntegralRequest::plain(vec![], 1.0)).is_err());
    assert!(simplex_exp_integral(&SimplexIntegralRequest::plain(vec![1.0], -1.0)).is_err());
    assert!(simplex_quadrature(|_| 1.0, 0, 1.0, 8).is_err());
    assert!(box_quadrature(|_| 1.0, &[(1.0, 0.0)], 8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_wavenumbers_match_nested(lambda in prop::collection::vec(-6.0f64..6.0, 1..=3), l in 0.3f64..2.5) {
        let n = lambda.len();
        let sym = simplex_exp_integral(&SimplexIntegralRequest::plain(lambda.clone(), l)).unwrap();
        let oracle = nested_simplex(&plane(&lambda), n, l, 6, 16);
        prop_assert!(crel(sym, oracle) < 1e-8 || (sym - oracle).norm() < 1e-12);
        let dd = simplex_moments(&lambda, l, false).m0;
        prop_assert!((dd - sym).norm() < 1e-9 * sym.norm().max(1e-3 * l.powi(n as i32)));
    }

    #[test]
    fn conjugate_symmetry(lambda in prop::collection::vec(-5.0f64..5.0, 1..=4), l in 0.2f64..3.0) {
        let neg: Vec<f64> = lambda.iter().map(|x| -x).collect();
        let a = simplex_moments(&lambda, l, true);
        let b = simplex_moments(&neg, l, true);
        let c = a.conj();
        prop_assert!((b.m0 - c.m0).norm() < 1e-12 * a.m0.norm().max(1.0));
        for (x, y) in b.m1.iter().zip(&c.m1) {
            prop_assert!((x - y).norm() < 1e-12 * x.norm().max(1.0));
        }
        for (x, y) in b.m2.iter().zip(&c.m2) {
            prop_assert!((x - y).norm() < 1e-12 * x.norm().max(1.0));
        }
    }
}
