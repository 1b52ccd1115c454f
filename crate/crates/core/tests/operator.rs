mod common;

use common::{quotient_rule, rel};
use hessq::concavity::{fd_hessian_oracle, fd_offdiag_oracle, normwise_deviation};
use hessq::operator::divided_difference;
use hessq::symfun::{elementary, EigenTuple};
use hessq::{LabError, Matrix64, QuotientOperator};
use proptest::prelude::*;

fn positive_tuple(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = EigenTuple<f64>> {
    n.prop_flat_map(|n| {
        proptest::collection::vec(-2.0f64..2.0, n)
            .prop_map(|e| EigenTuple::new(e.into_iter().map(|x| 10f64.powf(x)).collect()).unwrap())
    })
}

fn regime(n: usize, pick: bool) -> QuotientOperator {
    let k = if pick || n < 3 { n - 1 } else { n - 2 };
    QuotientOperator::new(n, k).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivatives_match_quotient_rule(lambda in positive_tuple(2..=7), pick in any::<bool>()) {
        let op = regime(lambda.n(), pick);
        let oracle = quotient_rule(lambda.values(), op.k());
        prop_assert!(rel(op.value(&lambda).unwrap(), oracle.f) < 1e-12);
        let grad = op.grad_diag(&lambda).unwrap();
        for (g, w) in grad.iter().zip(&oracle.grad) {
            prop_assert!(rel(*g, *w) < 1e-10);
        }
        let hess = op.hess_entries(&lambda).unwrap();
        let want = Matrix64::from_rows(&oracle.hess).unwrap();
        prop_assert!(normwise_deviation(&want, &hess.diag_block) < 1e-9);
    }

    #[test]
    fn offdiag_is_divided_difference(lambda in positive_tuple(2..=7), pick in any::<bool>()) {
        let op = regime(lambda.n(), pick);
        let oracle = quotient_rule(lambda.values(), op.k());
        let hess = op.hess_entries(&lambda).unwrap();
        let v = lambda.values();
        for p in 0..lambda.n() {
            for q in 0..lambda.n() {
                if p != q && (v[p] - v[q]).abs() >= 1e-3 {
                    let from_oracle = (oracle.grad[p] - oracle.grad[q]) / (v[p] - v[q]);
                    prop_assert!(rel(hess.offdiag[(p, q)], from_oracle) < 1e-8);
                    let dd = divided_difference(&op.grad_diag(&lambda).unwrap(), &lambda, p, q).unwrap();
                    prop_assert!(rel(-hess.offdiag[(p, q)], dd) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn value_is_homogeneous(lambda in positive_tuple(2..=8), t in 0.01f64..100.0, kf in 0.0f64..1.0) {
        let n = lambda.n();
        let k = 1 + ((kf * (n - 1) as f64) as usize).min(n - 2);
        let op = QuotientOperator::new(n, k).unwrap();
        let scaled = lambda.scaled(t).unwrap();
        let want = t.powi((n - k) as i32) * op.value(&lambda).unwrap();
        prop_assert!(rel(op.value(&scaled).unwrap(), want) < 1e-12);
    }

    #[test]
    fn h_and_g_diagonals(lambda in positive_tuple(2..=8), pick in any::<bool>(), shift in 0.1f64..10.0) {
        let op = regime(lambda.n(), pick);
        let grad = op.grad_diag(&lambda).unwrap();
        let sk = elementary(&lambda, op.k()).unwrap();
        let h = op.h_diag(&lambda).unwrap();
        let g = op.legendre_diag(&lambda, shift).unwrap();
        for i in 0..lambda.n() {
            prop_assert!(rel(h[i], sk * grad[i]) < 1e-12);
            let s = shift + lambda.values()[i];
            prop_assert!(rel(g[i], grad[i] * s * s) < 1e-12);
        }
    }

    #[test]
    fn eigen_bounds_hold(lambda in positive_tuple(2..=8), pick in any::<bool>()) {
        let op = regime(lambda.n(), pick);
        let r = op.eigen_bounds_check(&lambda).unwrap();
        prop_assert!(r.min_normalized_slack() >= -1e-12, "{:?}", r);
    }
}

#[test]
fn fd_oracle_agrees_on_fixed_tuples() {
    for v in [vec![3.0, 2.0, 1.0], vec![5.0, 5.0, 0.5, 0.2], vec![1.0, 1.0, 1.0, 1.0, 1.0], vec![40.0, 3.0, 0.7, 0.01]] {
        let lambda = EigenTuple::new(v).unwrap();
        for pick in [true, false] {
            let op = regime(lambda.n(), pick);
            let hess = op.hess_entries(&lambda).unwrap();
            let fd = fd_hessian_oracle(&op, &lambda).unwrap();
            let dev = normwise_deviation(&fd, &hess.diag_block);
            assert!(dev < 1e-6, "{:?} k={} dev={dev}", lambda, op.k());
            for p in 0..lambda.n() {
                for q in 0..lambda.n() {
                    if p != q {
                        let o: f64 = fd_offdiag_oracle(&op, &lambda, p, q).unwrap();
                        let scale = hess.offdiag.max_abs();
                        assert!((o - hess.offdiag[(p, q)]).abs() <= 1e-6 * scale, "{p} {q}");
                    }
                }
            }
        }
    }
}

#[test]
fn regime_and_domain_errors() {
    assert!(QuotientOperator::new(3, 3).is_err());
    let op = QuotientOperator::new(5, 2).unwrap();
    let lambda = EigenTuple::new(vec![1.0; 5]).unwrap();
    assert!(matches!(op.eigen_bounds_check(&lambda), Err(LabError::Unsupported(_))));
    let mixed = EigenTuple::new(vec![1.0, -1.0, 2.0]).unwrap();
    assert!(QuotientOperator::new(3, 2).unwrap().grad_diag(&mixed).is_err());
}

#[test]
fn isotropic_bounds_are_tight() {
    for n in 2usize..=8 {
        for k in [n - 1, n.saturating_sub(2)] {
            if k == 0 {
                continue;
            }
            let op = QuotientOperator::new(n, k).unwrap();
            let r = op.eigen_bounds_check(&EigenTuple::<f64>::isotropic(n, 2.5).unwrap()).unwrap();
            let tight: f64 = r.checks.iter().map(|c| c.normalized_slack().abs()).fold(f64::INFINITY, f64::min);
            assert!(tight <= 1e-12, "n={n} k={k} {:?}", r);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fd_oracle_agrees_across_six_decades(
        e in proptest::collection::vec(-3.0f64..3.0, 2..=7),
        kf in 0.0f64..1.0,
    ) {
        let lambda = EigenTuple::new(e.into_iter().map(|x| 10f64.powf(x)).collect()).unwrap();
        let n = lambda.n();
        let op = QuotientOperator::new(n, 1 + ((n - 1) as f64 * kf) as usize % (n - 1)).unwrap();
        let hess = op.hess_entries(&lambda).unwrap();
        prop_assert!(normwise_deviation(&fd_hessian_oracle(&op, &lambda).unwrap(), &hess.diag_block) < 1e-6);
        let scale = hess.offdiag.max_abs();
        for p in 0..n {
            for q in (p + 1)..n {
                let o = fd_offdiag_oracle(&op, &lambda, p, q).unwrap();
                prop_assert!((o - hess.offdiag[(p, q)]).abs() <= 1e-6 * scale);
            }
        }
    }
}
