use hessq::fields::calculus::{b_field, empirical_forcing, fd_hessian, jacobi_gap, jacobi_terms, PointFlag};
use hessq::fields::legendre::{gradient_map_monotonicity, legendre_field, DualGrid};
use hessq::fields::newton::{divergence_refinement, newton_divergence, refinement_fields};
use hessq::fields::{eigen_sym, ScalarField};
use hessq::stats::log_log_slope;
use hessq::{Matrix64, QuotientOperator};
use proptest::prelude::*;

/// Eigenvalues of a symmetric 3×3 matrix from the trigonometric solution of
/// its characteristic cubic, descending.
fn cubic_eigenvalues(a: &Matrix64) -> [f64; 3] {
    let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    let q = a.trace() / 3.0;
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q; 3];
    }
    let b = Matrix64::from_fn(3, |i, j| (a[(i, j)] - if i == j { q } else { 0.0 }) / p);
    let det = b[(0, 0)] * (b[(1, 1)] * b[(2, 2)] - b[(1, 2)] * b[(2, 1)]) - b[(0, 1)] * (b[(1, 0)] * b[(2, 2)] - b[(1, 2)] * b[(2, 0)])
        + b[(0, 2)] * (b[(1, 0)] * b[(2, 1)] - b[(1, 1)] * b[(2, 0)]);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

fn symmetric(n: usize) -> impl Strategy<Value = Matrix64> {
    proptest::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| Matrix64::from_fn(n, |i, j| v[i.min(j) * n + i.max(j)]))
}

fn rotation(n: usize, angles: &[f64]) -> Matrix64 {
    let mut q = Matrix64::identity(n);
    let mut it = angles.iter();
    for p in 0..n {
        for r in (p + 1)..n {
            let t = *it.next().unwrap();
            let mut g = Matrix64::identity(n);
            g[(p, p)] = t.cos();
            g[(r, r)] = t.cos();
            g[(p, r)] = -t.sin();
            g[(r, p)] = t.sin();
            q = &q * &g;
        }
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eigen_matches_cubic_formula(m in symmetric(3)) {
        let sp = eigen_sym(&m).unwrap();
        let want = cubic_eigenvalues(&m);
        for (a, b) in sp.eigenvalues.iter().zip(want) {
            prop_assert!((a - b).abs() <= 1e-10 * m.max_abs().max(1.0));
        }
    }

    #[test]
    fn eigen_reconstructs_and_is_invariant(
        n in 2usize..=6,
        seed in proptest::collection::vec(-5.0f64..5.0, 36),
        angles in proptest::collection::vec(0.0f64..6.3, 15),
    ) {
        let m = Matrix64::from_fn(n, |i, j| seed[i.min(j) * 6 + i.max(j)]);
        let sp = eigen_sym(&m).unwrap();
        let scale = m.max_abs();
        prop_assert!(sp.reconstruct().sub(&m).max_abs() <= 1e-10 * scale);
        let qtq = &sp.frame.transpose() * &sp.frame;
        prop_assert!(qtq.sub(&Matrix64::identity(n)).max_abs() <= 1e-10);
        let q = rotation(n, &angles);
        let conj = &(&q * &m) * &q.transpose();
        let conj = Matrix64::from_fn(n, |i, j| 0.5 * (conj[(i, j)] + conj[(j, i)]));
        let sp2 = eigen_sym(&conj).unwrap();
        for (a, b) in sp.eigenvalues.iter().zip(&sp2.eigenvalues) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn grid_hessian_exact_on_quadratics(m in symmetric(3), h in 0.01f64..0.5) {
        let f = ScalarField::from_fn(&[-2.0 * h; 3], &[2.0 * h; 3], &[5; 3], |x| 0.5 * m.quad_form(x)).unwrap();
        let d = fd_hessian(&f, &[2, 1, 3]).unwrap();
        prop_assert!(d.sub(&m).max_abs() <= 1e-9 * m.max_abs().max(1.0));
    }
}

#[test]
fn grid_hessian_second_order_on_analytic_field() {
    let u = |x: &[f64]| (0.7 * x[0] - 0.2 * x[1]).exp() + (x[0] * x[1]).sin() + x[1].powi(4);
    let x0: [f64; 2] = [0.3, -0.2];
    let exact = {
        let e = (0.7 * x0[0] - 0.2 * x0[1]).exp();
        let (s, c) = ((x0[0] * x0[1]).sin(), (x0[0] * x0[1]).cos());
        Matrix64::from_rows(&[
            vec![0.49 * e - x0[1] * x0[1] * s, -0.14 * e + c - x0[0] * x0[1] * s],
            vec![-0.14 * e + c - x0[0] * x0[1] * s, 0.04 * e - x0[0] * x0[0] * s + 12.0 * x0[1] * x0[1]],
        ])
        .unwrap()
    };
    let hs = [0.04, 0.02, 0.01];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let f = ScalarField::from_fn(&[x0[0] - h, x0[1] - h], &[x0[0] + h, x0[1] + h], &[3, 3], u).unwrap();
            fd_hessian(&f, &[1, 1]).unwrap().sub(&exact).max_abs()
        })
        .collect();
    assert!(log_log_slope(&hs, &errs).unwrap() >= 1.9);
}

#[test]
fn b_field_of_radial_quartic() {
    // u = |x|²/2 + |x|⁴/4 has top eigenvalue 1 + 3|x|²
    let u = |x: &[f64]| {
        let s: f64 = x.iter().map(|v| v * v).sum();
        0.5 * s + 0.25 * s * s
    };
    let mut prev = f64::INFINITY;
    for d in [11, 21, 41] {
        let f = ScalarField::from_fn(&[-0.5; 3], &[0.5; 3], &[d; 3], u).unwrap();
        let bf = b_field(&f).unwrap();
        let mut worst = 0.0f64;
        for lin in 0..f.len() {
            let idx = f.unravel(lin);
            match bf.flags[lin] {
                PointFlag::Simple => {
                    let s: f64 = f.coords(&idx).iter().map(|v| v * v).sum();
                    worst = worst.max((bf.b.values[lin] - (1.0 + 3.0 * s).ln()).abs());
                }
                PointFlag::Multiple(m) => assert!(m >= 2),
                PointFlag::Boundary => assert!(!f.has_margin(&idx, 1)),
                PointFlag::NonConvex => panic!("convex field flagged non-convex"),
            }
        }
        let centre = f.linear(&[d / 2; 3]);
        assert_eq!(bf.flags[centre], PointFlag::Multiple(3));
        assert!(worst < prev / 3.0, "{worst} {prev}");
        prev = worst;
    }
}

#[test]
fn jacobi_on_quadratics_returns_c() {
    let a = Matrix64::from_rows(&[vec![3.0, 0.5, 0.0], vec![0.5, 2.0, 0.2], vec![0.0, 0.2, 1.0]]).unwrap();
    let f = ScalarField::from_fn(&[-1.0; 3], &[1.0; 3], &[9; 3], |x| 0.5 * a.quad_form(x)).unwrap();
    for (k, c, big) in [(2, 0.3, 0.0), (2, 5.0, 2.0), (1, 1.0, 0.5)] {
        let r = jacobi_gap(&f, &QuotientOperator::new(3, k).unwrap(), c, big).unwrap();
        assert!((r.min_gap - big).abs() < 1e-8, "{:?}", r);
    }
}

#[test]
fn jacobi_admits_only_clean_stencils() {
    let a = [1.0, 2.0, 3.0];
    let u = |x: &[f64]| (0..3).map(|i| (a[i] * x[i]).exp()).sum::<f64>();
    let op = QuotientOperator::new(3, 2).unwrap();
    for d in [15, 25] {
        let f = ScalarField::from_fn(&[-0.5; 3], &[0.5; 3], &[d; 3], u).unwrap();
        let bf = b_field(&f).unwrap();
        let terms = jacobi_terms(&f, &op).unwrap();
        for p in &terms.points {
            for o in [[0, 0, 0], [1, 0, 0], [-1, 0, 0], [0, 1, 1], [0, -1, 1], [1, 0, -1]] {
                let j = f.linear(&f.offset(&p.index, &o).unwrap());
                assert_eq!(bf.flags[j], PointFlag::Simple);
            }
        }
        let big_c = empirical_forcing(&f, &op).unwrap();
        assert!(big_c > 0.0);
        let c = terms.max_c(big_c).unwrap();
        assert!(c > 0.0);
        let r = terms.report(c, big_c).unwrap();
        assert!(r.min_gap >= -1e-9 * big_c);
    }
}

#[test]
fn jacobi_excludes_multiplicity_plane() {
    // equal rates give λ₁ = λ₂ on the diagonal plane x₁ = x₂, which holds grid nodes
    let u = |x: &[f64]| x[0].exp() + x[1].exp() + 0.5 * (0.5 * x[2]).exp();
    let f = ScalarField::from_fn(&[-0.5; 3], &[0.5; 3], &[13; 3], u).unwrap();
    let bf = b_field(&f).unwrap();
    assert!(bf.count(|p| matches!(p, PointFlag::Multiple(_))) > 0);
    let terms = jacobi_terms(&f, &QuotientOperator::new(3, 2).unwrap()).unwrap();
    assert!(terms.excluded_multiple > 0);
    for p in &terms.points {
        assert_ne!(p.index[0], p.index[1]);
    }
}

#[test]
fn divergence_free_newton_tensor() {
    let smooth = |x: &[f64]| (x[0] + 0.3 * x[1]).exp() + (x[1] * x[2]).sin() + x[0].powi(4);
    let f = ScalarField::from_fn(&[-0.5; 3], &[0.5; 3], &[9; 3], smooth).unwrap();
    let d = newton_divergence(&f, 1).unwrap();
    assert!(d.max_residual <= 1e-12 * d.scale);

    let a = Matrix64::from_rows(&[vec![2.0, 0.3, 0.1], vec![0.3, 1.0, 0.0], vec![0.1, 0.0, 1.5]]).unwrap();
    let q = ScalarField::from_fn(&[-0.5; 3], &[0.5; 3], &[9; 3], |x| 0.5 * a.quad_form(x)).unwrap();
    for k in 1..=3 {
        let d = newton_divergence(&q, k).unwrap();
        assert!(d.max_residual <= 1e-9 * d.scale, "k={k} {}", d.max_residual);
    }

    let levels = refinement_fields(&smooth, &[-0.5; 3], &[0.5; 3], 8, 3).unwrap();
    for k in [2, 3] {
        let r = divergence_refinement(&levels, k).unwrap();
        assert!(r.slope.unwrap() >= 1.9, "{:?}", r);
    }

    let cubic = |x: &[f64]| x[0].powi(3) + x[1].powi(3) + x[0] * x[1] * x[2];
    let levels = refinement_fields(&cubic, &[-0.5; 3], &[0.5; 3], 8, 3).unwrap();
    let r = divergence_refinement(&levels, 2).unwrap();
    assert!(r.at_rounding_floor(), "{:?}", r);
}

#[test]
fn legendre_quadratics() {
    let h = 0.1;
    // (A + I)⁻¹ = ¼[[2,1],[1,2]], so x = (A+I)⁻¹y is a grid node for every y on a 4h lattice
    let a = Matrix64::from_rows(&[vec![5.0 / 3.0, -4.0 / 3.0], vec![-4.0 / 3.0, 5.0 / 3.0]]).unwrap();
    let f = ScalarField::from_fn(&[-2.0; 2], &[2.0; 2], &[41; 2], |x| 0.5 * a.quad_form(x)).unwrap();
    let r = legendre_field(&f, 1.0, Some(&DualGrid::centred(&[4.0 * h; 2], 6))).unwrap();
    assert!(r.matched >= 9);
    assert!(r.max_rel_error <= 1e-8, "{}", r.max_rel_error);
    let want = Matrix64::from_rows(&[vec![0.5, 0.25], vec![0.25, 0.5]]).unwrap();
    for lin in 0..r.w.len() {
        if !r.boundary[lin] {
            let y = r.w.coords(&r.w.unravel(lin));
            assert!((r.w.values[lin] - 0.5 * want.quad_form(&y)).abs() <= 1e-12);
        }
    }

    let iso = ScalarField::from_fn(&[-1.0; 3], &[1.0; 3], &[11; 3], |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>()).unwrap();
    let r = legendre_field(&iso, 1.0, Some(&DualGrid::centred(&[0.4; 3], 3))).unwrap();
    assert!(r.matched > 0 && r.max_rel_error <= 1e-8);
}

#[test]
fn gradient_map_is_uniformly_monotone() {
    let u = |x: &[f64]| x.iter().map(|v| 0.5 * v * v + 0.1 * v.powi(4)).sum::<f64>();
    let f = ScalarField::from_fn(&[-1.0; 3], &[1.0; 3], &[17; 3], u).unwrap();
    for shift in [0.5, 1.0, 3.0] {
        let r = gradient_map_monotonicity(&f, shift, 1000, 11).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.min_ratio >= 1.0);
    }
    let a = gradient_map_monotonicity(&f, 1.0, 200, 3).unwrap();
    assert_eq!(a, gradient_map_monotonicity(&f, 1.0, 200, 3).unwrap());
}
