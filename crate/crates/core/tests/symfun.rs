mod common;

use common::sigma_subsets;
use hessq::symfun::{elementary, elementary_minor, identity_residuals, EigenTuple};
use proptest::prelude::*;

fn tuple_strategy(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    n.prop_flat_map(|n| proptest::collection::vec(-3.0f64..3.0, n).prop_map(|e| e.into_iter().map(|x| 10f64.powf(x)).collect()))
}

#[test]
fn recurrence_matches_subset_enumeration() {
    for n in 2..=8 {
        let v: Vec<f64> = (0..n).map(|i| 0.5 + 0.37 * i as f64 - 0.05 * (i * i) as f64).collect();
        let t = EigenTuple::new(v).unwrap();
        let s = t.values();
        for k in 0..=n {
            let want = sigma_subsets(s, k, &[]);
            let got = elementary(&t, k).unwrap();
            assert!((got - want).abs() <= 1e-13 * want.abs().max(1.0), "n={n} k={k}");
            for i in 0..n {
                if k < n {
                    let got = elementary_minor(&t, k, &[i]).unwrap();
                    assert!((got - sigma_subsets(s, k, &[i])).abs() <= 1e-13 * got.abs().max(1.0));
                }
                for j in 0..n {
                    if i != j && k + 2 <= n {
                        let got = elementary_minor(&t, k, &[i, j]).unwrap();
                        assert!((got - sigma_subsets(s, k, &[i, j])).abs() <= 1e-13 * got.abs().max(1.0));
                    }
                }
            }
        }
    }
}

#[test]
fn mixed_sign_tuples_follow_enumeration() {
    let t = EigenTuple::new(vec![2.0, -1.5, 0.25, -3.0, 1.0]).unwrap();
    for k in 0..=5 {
        assert!((elementary(&t, k).unwrap() - sigma_subsets(t.values(), k, &[])).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn identities_hold_on_positive_tuples(v in tuple_strategy(2..=8), kf in 0.0f64..1.0) {
        let t = EigenTuple::new(v).unwrap();
        let n = t.n();
        let k = 1 + ((kf * (n - 1) as f64) as usize).min(n - 2);
        let r = identity_residuals(&t, k).unwrap();
        prop_assert!(r.max_normalized() <= 1e-12, "{:?}", r);
    }

    #[test]
    fn sigma_is_symmetric_and_homogeneous(v in tuple_strategy(2..=8), t in 0.1f64..10.0) {
        let a = EigenTuple::new(v.clone()).unwrap();
        let mut rev = v.clone();
        rev.reverse();
        let b = EigenTuple::new(rev).unwrap();
        let c = a.scaled(t).unwrap();
        for k in 0..=a.n() {
            let s = elementary(&a, k).unwrap();
            prop_assert_eq!(s, elementary(&b, k).unwrap());
            let sc = elementary(&c, k).unwrap();
            prop_assert!((sc - t.powi(k as i32) * s).abs() <= 1e-12 * sc.abs().max(1.0));
        }
    }
}
