//! Sampling verifiers for the two concavity inequalities of `σ_n/σ_{n−1}`
//! and `σ_n/σ_{n−2}`, the finite-difference oracle for the second-derivative
//! tensor, and the quantities of the induction lemma.
//!
//! For either regime the gap is
//!
//! ```text
//! [−Σ F^{ii,jj} ξ_i ξ_j − F^{11} ξ_1²/λ_1] − [−(2/F)(Σ F^{ii} ξ_i)² + c·F^{11} ξ_1²/λ_1]
//! ```
//!
//! with `c = 1` for `k = n−1` and `c = 1/(2(n−1))` for `k = n−2`. Batches are
//! judged by the gap normalized by `|LHS| + |RHS| + 1`.

use rayon::prelude::*;

use crate::error::{domain, LabError, Result};
use crate::linalg::Matrix;
use crate::operator::{QuotientOperator, SecondDerivativeTensor};
use crate::sampling;
use crate::scalar::Scalar;
use crate::symfun::{elementary_skipping, EigenTuple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// `k = n − 1`, `n ≥ 2`.
    NMinusOne,
    /// `k = n − 2`, `n ≥ 3`.
    NMinusTwo,
}

impl Lemma {
    pub fn operator(self, n: usize) -> Result<QuotientOperator> {
        match self {
            Lemma::NMinusOne => QuotientOperator::new(n, n.saturating_sub(1)),
            Lemma::NMinusTwo if n < 3 => {
                Err(LabError::Unsupported(format!("the k = n-2 inequality needs n >= 3, got {n}")))
            }
            Lemma::NMinusTwo => QuotientOperator::new(n, n - 2),
        }
    }

    pub fn for_operator(op: &QuotientOperator) -> Result<Self> {
        op.require_estimate_regime()?;
        Ok(if op.k() + 1 == op.n() { Lemma::NMinusOne } else { Lemma::NMinusTwo })
    }

    /// Coefficient of `F^{11}ξ_1²/λ_1` on the right-hand side.
    pub fn factor<T: Scalar>(self, n: usize) -> T {
        match self {
            Lemma::NMinusOne => T::one(),
            Lemma::NMinusTwo => T::one() / (T::lit(2.0) * T::from_usize_lossy(n - 1)),
        }
    }
}

/// Both sides of one concavity inequality at `(λ, ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEvaluation<T> {
    pub lhs: T,
    pub rhs: T,
    pub gap: T,
    /// `|lhs| + |rhs| + 1`
    pub scale: T,
}

impl<T: Scalar> GapEvaluation<T> {
    pub fn normalized(&self) -> T {
        self.gap / self.scale
    }
}

/// Gap assembled from precomputed first and second derivatives.
pub fn gap_from_parts<T: Scalar>(
    f: T,
    grad: &[T],
    diag_block: &Matrix<T>,
    lambda1: T,
    xi: &[T],
    factor: T,
) -> GapEvaluation<T> {
    let two = T::lit(2.0);
    let quad = diag_block.quad_form(xi);
    let edge = grad[0] * xi[0] * xi[0] / lambda1;
    let lin: T = grad.iter().zip(xi).map(|(&g, &x)| g * x).sum();
    let lhs = -quad - edge;
    let rhs = -two / f * lin * lin + factor * edge;
    GapEvaluation { lhs, rhs, gap: lhs - rhs, scale: lhs.abs() + rhs.abs() + T::one() }
}

fn gap_for<T: Scalar>(lemma: Lemma, lambda: &EigenTuple<T>, xi: &[T]) -> Result<GapEvaluation<T>> {
    let op = lemma.operator(lambda.n())?;
    if xi.len() != lambda.n() {
        return Err(domain!("xi has {} entries, expected {}", xi.len(), lambda.n()));
    }
    let f = op.value(lambda)?;
    let grad = op.grad_diag(lambda)?;
    let hess = op.hess_entries(lambda)?;
    Ok(gap_from_parts(f, &grad, &hess.diag_block, lambda.largest(), xi, lemma.factor(lambda.n())))
}

/// Concavity gap for `F = σ_n/σ_{n−1}`.
pub fn gap_nm1<T: Scalar>(lambda: &EigenTuple<T>, xi: &[T]) -> Result<GapEvaluation<T>> {
    gap_for(Lemma::NMinusOne, lambda, xi)
}

/// Concavity gap for `F = σ_n/σ_{n−2}`.
pub fn gap_nm2<T: Scalar>(lambda: &EigenTuple<T>, xi: &[T]) -> Result<GapEvaluation<T>> {
    gap_for(Lemma::NMinusTwo, lambda, xi)
}

/// Intermediate quantities of the `k = n − 2` argument, computed from the
/// reciprocal form `F = 1/Σ_{i≠j} 1/(λ_iλ_j)` without touching the tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct NMinusTwoDiagnostics<T> {
    /// `η_i = ξ_i/λ_i²`
    pub eta: Vec<T>,
    /// `Σ_{i≠j} η_iη_j + λ_1(Σ_{m≠1} 1/λ_m)η_1² + Σ_{i≠1} 2λ_i(Σ_{m≠i} 1/λ_m)η_i²`
    pub i_value: T,
    /// `F²·I − F^{11}ξ_1²/(2(n−1)λ_1)`, equal to the tensor gap.
    pub gap_via_i: T,
}

pub fn nm2_diagnostics<T: Scalar>(lambda: &EigenTuple<T>, xi: &[T]) -> Result<NMinusTwoDiagnostics<T>> {
    let n = lambda.n();
    Lemma::NMinusTwo.operator(n)?;
    lambda.require_positive()?;
    if xi.len() != n {
        return Err(domain!("xi has {} entries, expected {n}", xi.len()));
    }
    let v = lambda.values();
    let recip: Vec<T> = v.iter().map(|&l| T::one() / l).collect();
    let total: T = recip.iter().copied().sum();
    let mut pair_sum = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            pair_sum = pair_sum + recip[i] * recip[j];
        }
    }
    let f = T::one() / pair_sum;
    let eta: Vec<T> = xi.iter().zip(v).map(|(&x, &l)| x / (l * l)).collect();
    let eta_sum: T = eta.iter().copied().sum();
    let eta_sq: T = eta.iter().map(|&e| e * e).sum();
    let two = T::lit(2.0);
    let mut i_value = eta_sum * eta_sum - eta_sq + v[0] * (total - recip[0]) * eta[0] * eta[0];
    for i in 1..n {
        i_value = i_value + two * v[i] * (total - recip[i]) * eta[i] * eta[i];
    }
    let f11 = f * f / (v[0] * v[0]) * (total - recip[0]);
    let factor: T = Lemma::NMinusTwo.factor(n);
    Ok(NMinusTwoDiagnostics {
        eta,
        i_value,
        gap_via_i: f * f * i_value - factor * f11 * xi[0] * xi[0] / v[0],
    })
}

/// Parameters of a sampled verification batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchConfig {
    pub n: usize,
    pub samples: u64,
    pub seed: u64,
    /// Eigenvalues are log-uniform in `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
}

impl BatchConfig {
    pub fn new(n: usize, samples: u64, seed: u64) -> Self {
        Self { n, samples, seed, lo: 1e-3, hi: 1e3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness<T> {
    pub index: u64,
    pub lambda: EigenTuple<T>,
    pub xi: Vec<T>,
    pub evaluation: GapEvaluation<T>,
}

/// Outcome of a batch: the sample with the smallest normalized gap.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport<T> {
    pub lemma: Lemma,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub samples: u64,
    /// Smallest normalized gap over the batch.
    pub min_gap: T,
    /// Raw gap of the witness.
    pub gap: T,
    /// Normalization used for the witness.
    pub scale: T,
    pub witness: Witness<T>,
    /// `η` and `I` at the witness (only for `k = n − 2`).
    pub diagnostics: Option<NMinusTwoDiagnostics<T>>,
}

impl<T: Scalar> GapReport<T> {
    pub fn passes(&self, tol: T) -> bool {
        self.min_gap >= -tol
    }
}

/// Draws sample `index` of a batch.
pub fn draw_sample<T: Scalar>(config: &BatchConfig, index: u64) -> Result<(EigenTuple<T>, Vec<T>)> {
    let mut rng = sampling::stream(config.seed, index);
    let lambda = EigenTuple::new(sampling::log_uniform(&mut rng, config.n, config.lo, config.hi))?;
    let xi = sampling::unit_sphere(&mut rng, config.n);
    Ok((lambda, xi))
}

/// Source of the second-derivative tensor; [`QuotientOperator::hess_entries`]
/// in production, replaceable to exercise the failure path.
pub type TensorSource<'a, T> =
    &'a (dyn Fn(&QuotientOperator, &EigenTuple<T>) -> Result<SecondDerivativeTensor<T>> + Sync);

pub fn analytic_tensor<T: Scalar>(op: &QuotientOperator, lambda: &EigenTuple<T>) -> Result<SecondDerivativeTensor<T>> {
    op.hess_entries(lambda)
}

/// Verifies one lemma on a replayable batch, in parallel.
pub fn verify_batch<T: Scalar>(lemma: Lemma, config: &BatchConfig, tensor: TensorSource<'_, T>) -> Result<GapReport<T>> {
    let op = lemma.operator(config.n)?;
    if config.samples == 0 {
        return Err(LabError::InsufficientData("batch needs at least one sample".into()));
    }
    let factor: T = lemma.factor(config.n);
    let best = (0..config.samples)
        .into_par_iter()
        .map(|index| -> Result<(T, u64)> {
            let (lambda, xi) = draw_sample::<T>(config, index)?;
            let f = op.value(&lambda)?;
            let grad = op.grad_diag(&lambda)?;
            let hess = tensor(&op, &lambda)?;
            let ev = gap_from_parts(f, &grad, &hess.diag_block, lambda.largest(), &xi, factor);
            Ok((ev.normalized(), index))
        })
        .try_reduce_with(|a, b| {
            // smaller normalized gap wins; ties go to the lower index
            Ok(match a.0.partial_cmp(&b.0) {
                Some(std::cmp::Ordering::Less) => a,
                Some(std::cmp::Ordering::Greater) => b,
                _ if a.0.is_nan() => a,
                _ if b.0.is_nan() => b,
                _ => if a.1 <= b.1 { a } else { b },
            })
        })
        .expect("non-empty batch")?;

    let (lambda, xi) = draw_sample::<T>(config, best.1)?;
    let f = op.value(&lambda)?;
    let grad = op.grad_diag(&lambda)?;
    let hess = tensor(&op, &lambda)?;
    let evaluation = gap_from_parts(f, &grad, &hess.diag_block, lambda.largest(), &xi, factor);
    let diagnostics = match lemma {
        Lemma::NMinusTwo => Some(nm2_diagnostics(&lambda, &xi)?),
        Lemma::NMinusOne => None,
    };
    Ok(GapReport {
        lemma,
        n: op.n(),
        k: op.k(),
        seed: config.seed,
        samples: config.samples,
        min_gap: evaluation.normalized(),
        gap: evaluation.gap,
        scale: evaluation.scale,
        witness: Witness { index: best.1, lambda, xi, evaluation },
        diagnostics,
    })
}

/// Largest power of two not exceeding `min(1e-3·scale, room/4)`, so every
/// stencil point is exactly representable and stays in the positive cone.
fn fd_step<T: Scalar>(scale: T, room: T) -> Result<T> {
    let target = (T::lit(1e-3) * scale).min(T::lit(0.25) * room);
    let h = T::lit(2.0).powi(target.log2().floor().to_i32().unwrap_or(i32::MIN));
    if !(h > T::zero()) || !(h * h).is_normal() || h < T::lit(8.0) * room * T::epsilon() {
        return Err(LabError::Conditioning(format!("finite-difference step for scale {scale} underflows")));
    }
    Ok(h)
}

/// Distance from `λ_p` to the pole of `F` as a function of `λ_p` alone:
/// `F = λ_p σ_{n−1}(λ|p) / (λ_p σ_{k−1}(λ|p) + σ_k(λ|p))`.
fn pole_distance<T: Scalar>(op: &QuotientOperator, v: &[T], p: usize) -> T {
    v[p] + elementary_skipping(v, op.k(), [Some(p), None]) / elementary_skipping(v, op.k() - 1, [Some(p), None])
}

const D1: [(i32, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const D2: [(i32, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];

/// Fourth-order central differences of [`QuotientOperator::value`] in the
/// eigenvalue coordinates, with a step proportional to each coordinate's
/// distance from the nearest pole.
/// Returns the `F^{pp,rr}` block.
pub fn fd_hessian_oracle<T: Scalar>(op: &QuotientOperator, lambda: &EigenTuple<T>) -> Result<Matrix<T>> {
    lambda.require_positive()?;
    let v = lambda.values();
    let steps = (0..op.n()).map(|p| fd_step(pole_distance(op, v, p), v[p])).collect::<Result<Vec<T>>>()?;
    let n = op.n();
    let base = lambda.values().to_vec();
    let eval = |shifts: &[(usize, i32)]| -> Result<T> {
        let mut v = base.clone();
        for &(p, j) in shifts {
            v[p] = v[p] + T::from_i32(j).unwrap() * steps[p];
        }
        op.value(&EigenTuple::new(v)?)
    };
    let mut out = Matrix::zeros(n);
    for p in 0..n {
        let mut acc = T::zero();
        for &(j, w) in &D2 {
            acc = acc + T::lit(w) * eval(&[(p, j)])?;
        }
        out[(p, p)] = acc / (T::lit(12.0) * steps[p] * steps[p]);
        for r in (p + 1)..n {
            let mut acc = T::zero();
            for &(a, wa) in &D1 {
                for &(b, wb) in &D1 {
                    acc = acc + T::lit(wa * wb) * eval(&[(p, a), (r, b)])?;
                }
            }
            let mixed = acc / (T::lit(144.0) * steps[p] * steps[r]);
            out[(p, r)] = mixed;
            out[(r, p)] = mixed;
        }
    }
    Ok(out)
}

/// `F^{pq,qp}` by differentiating `F` along the symmetric perturbation
/// `diag(λ) + t(E_pq + E_qp)`, whose spectrum is known in closed form.
pub fn fd_offdiag_oracle<T: Scalar>(op: &QuotientOperator, lambda: &EigenTuple<T>, p: usize, q: usize) -> Result<T> {
    lambda.require_positive()?;
    if p == q || p >= op.n() || q >= op.n() {
        return Err(domain!("off-diagonal oracle needs distinct in-range indices, got {p}, {q}"));
    }
    let base = lambda.values().to_vec();
    let scale = (pole_distance(op, &base, p) * pole_distance(op, &base, q)).sqrt();
    let h = fd_step(scale, (base[p] * base[q]).sqrt())?;
    let half = T::lit(0.5);
    let mid = half * (base[p] + base[q]);
    let dev = half * (base[p] - base[q]);
    let eval = |t: T| -> Result<T> {
        let mut v = base.clone();
        let r = (dev * dev + t * t).sqrt();
        v[p] = mid + r;
        v[q] = mid - r;
        op.value(&EigenTuple::new(v)?)
    };
    let mut acc = T::zero();
    for &(j, w) in &D2 {
        acc = acc + T::lit(w) * eval(T::from_i32(j).unwrap() * h)?;
    }
    // d²/dt² F = 2 F^{pq,qp}
    Ok(acc / (T::lit(24.0) * h * h))
}

/// Largest entrywise deviation relative to the largest entry of `reference`.
pub fn normwise_deviation<T: Scalar>(reference: &Matrix<T>, candidate: &Matrix<T>) -> T {
    let scale = reference.max_abs();
    let diff = reference.sub(candidate).max_abs();
    if scale > T::zero() {
        diff / scale
    } else {
        diff
    }
}

/// Ratio `Σ|b_i σ_l^{ii}| / (εΣ H^{ii} b_i² + σ_k/ε)`: the smallest `C₀` for
/// which the induction inequality holds at this input.
pub fn induction_c0<T: Scalar>(
    op: &QuotientOperator,
    lambda: &EigenTuple<T>,
    b_grad: &[T],
    l: usize,
    eps: T,
    f_range: (T, T),
) -> Result<T> {
    let (a, h, sk) = induction_parts(op, lambda, l, f_range)?;
    if b_grad.len() != op.n() {
        return Err(domain!("gradient has {} entries, expected {}", b_grad.len(), op.n()));
    }
    if !(eps > T::zero()) {
        return Err(domain!("epsilon must be positive, got {eps}"));
    }
    let num: T = b_grad.iter().zip(&a).map(|(&b, &ai)| (b * ai).abs()).sum();
    let quad: T = b_grad.iter().zip(&h).map(|(&b, &hi)| hi * b * b).sum();
    Ok(num / (eps * quad + sk / eps))
}

/// Supremum of [`induction_c0`] over all gradients `b`, which is independent
/// of `ε`: `½·sqrt(Σ_i (σ_l^{ii})²/(H^{ii} σ_k))`.
pub fn induction_c0_sup<T: Scalar>(op: &QuotientOperator, lambda: &EigenTuple<T>, l: usize, f_range: (T, T)) -> Result<T> {
    let (a, h, sk) = induction_parts(op, lambda, l, f_range)?;
    let s: T = a.iter().zip(&h).map(|(&ai, &hi)| ai * ai / hi).sum();
    Ok(T::lit(0.5) * (s / sk).sqrt())
}

/// The gradient attaining [`induction_c0_sup`] for a given `ε`.
pub fn induction_extremal_gradient<T: Scalar>(
    op: &QuotientOperator,
    lambda: &EigenTuple<T>,
    l: usize,
    eps: T,
    f_range: (T, T),
) -> Result<Vec<T>> {
    let (a, h, sk) = induction_parts(op, lambda, l, f_range)?;
    let dir: Vec<T> = a.iter().zip(&h).map(|(&ai, &hi)| ai / hi).collect();
    let q: T = dir.iter().zip(&h).map(|(&d, &hi)| hi * d * d).sum();
    let t = (sk / q).sqrt() / eps;
    Ok(dir.into_iter().map(|d| d * t).collect())
}

fn induction_parts<T: Scalar>(
    op: &QuotientOperator,
    lambda: &EigenTuple<T>,
    l: usize,
    f_range: (T, T),
) -> Result<(Vec<T>, Vec<T>, T)> {
    op.require_estimate_regime()?;
    if l < 1 || l > op.k() {
        return Err(domain!("need 1 <= l <= k = {}, got l = {l}", op.k()));
    }
    let f = op.value(lambda)?;
    if f < f_range.0 || f > f_range.1 {
        return Err(LabError::Precondition(format!(
            "f = {f} lies outside the pinned range [{}, {}]",
            f_range.0, f_range.1
        )));
    }
    let v = lambda.values();
    let a: Vec<T> = (0..op.n()).map(|i| elementary_skipping(v, l - 1, [Some(i), None])).collect();
    let h = op.h_diag(lambda)?;
    let sk = elementary_skipping(v, op.k(), [None, None]);
    Ok((a, h, sk))
}

/// One row of an induction-constant sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct InductionRow<T> {
    pub lambda1: T,
    /// Largest supremum over the `f` grid.
    pub c0: T,
    /// The `f` value attaining it.
    pub worst_f: T,
}

/// For each `λ₁`, the supremum of the induction ratio over gradients and over
/// `f_points` values spread evenly across `f_range`, along the completion
/// `(λ₁, t, …, t)`.
pub fn induction_sweep<T: Scalar>(
    op: &QuotientOperator,
    l: usize,
    f_range: (T, T),
    f_points: usize,
    lambda1s: &[T],
) -> Result<Vec<InductionRow<T>>> {
    if f_points < 2 {
        return Err(LabError::InsufficientData("need at least two f grid points".into()));
    }
    lambda1s
        .iter()
        .map(|&l1| {
            let mut best = InductionRow { lambda1: l1, c0: T::neg_infinity(), worst_f: f_range.0 };
            for j in 0..f_points {
                let s = T::from_usize_lossy(j) / T::from_usize_lossy(f_points - 1);
                let f = f_range.0 + (f_range.1 - f_range.0) * s;
                let lambda = op.complete_tuple(l1, f)?;
                // the completion hits f to rounding; widen the pin by that much
                let slack = T::lit(1e-9) * f;
                let c = induction_c0_sup(op, &lambda, l, (f_range.0 - slack, f_range.1 + slack))?;
                if c > best.c0 {
                    best.c0 = c;
                    best.worst_f = f;
                }
            }
            Ok(best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn t(v: &[f64]) -> EigenTuple<f64> {
        EigenTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn nm1_examples() {
        let lam = t(&[1.0, 1.0, 1.0]);
        assert_eq!(gap_nm1(&lam, &[0.0; 3]).unwrap().gap, 0.0);
        let e = gap_nm1(&lam, &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(e.lhs, 1.0 / 27.0, max_relative = 1e-13);
        assert_relative_eq!(e.rhs, 1.0 / 27.0, max_relative = 1e-13);
        assert!(e.gap.abs() <= 1e-12);
        let e = gap_nm1(&lam, &[1.0, 1.0, 1.0]).unwrap();
        assert_relative_eq!(e.lhs, -1.0 / 9.0, max_relative = 1e-13);
        assert_relative_eq!(e.rhs, -5.0 / 9.0, max_relative = 1e-13);
        assert_relative_eq!(e.gap, 4.0 / 9.0, max_relative = 1e-13);
    }

    #[test]
    fn nm2_examples() {
        let lam = t(&[1.0, 1.0, 1.0]);
        assert_eq!(gap_nm2(&lam, &[0.0; 3]).unwrap().gap, 0.0);
        let e = gap_nm2(&lam, &[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(e.lhs, -2.0 / 27.0, max_relative = 1e-13);
        assert_relative_eq!(e.rhs, -13.0 / 54.0, max_relative = 1e-13);
        assert!((e.gap - 1.0 / 6.0).abs() <= 1e-12);
        let d = nm2_diagnostics(&lam, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(d.eta, vec![1.0, 0.0, 0.0]);
        assert_relative_eq!(d.i_value, 2.0, max_relative = 1e-14);
        assert_relative_eq!(d.gap_via_i, 1.0 / 6.0, max_relative = 1e-13);
    }

    #[test]
    fn nm2_rejects_small_n_and_nonpositive() {
        assert!(matches!(gap_nm2(&t(&[2.0, 1.0]), &[1.0, 0.0]), Err(LabError::Unsupported(_))));
        assert!(matches!(gap_nm1(&t(&[2.0, 1.0, 0.0]), &[1.0, 0.0, 0.0]), Err(LabError::Domain(_))));
        assert!(gap_nm1(&t(&[2.0, 1.0]), &[1.0]).is_err());
    }

    #[test]
    fn batch_replays_witness() {
        let cfg = BatchConfig::new(4, 500, 99);
        let rep = verify_batch::<f64>(Lemma::NMinusTwo, &cfg, &analytic_tensor).unwrap();
        assert!(rep.passes(1e-9));
        let (lam, xi) = draw_sample::<f64>(&cfg, rep.witness.index).unwrap();
        assert_eq!(lam, rep.witness.lambda);
        assert_eq!(gap_nm2(&lam, &xi).unwrap(), rep.witness.evaluation);
        assert!(rep.diagnostics.is_some());
    }

    #[test]
    fn corrupted_tensor_is_caught() {
        let cfg = BatchConfig::new(3, 200, 5);
        let bad = |op: &QuotientOperator, lam: &EigenTuple<f64>| {
            let mut h = op.hess_entries(lam)?;
            h.diag_block = h.diag_block.scale(-1.0);
            Ok(h)
        };
        let rep = verify_batch::<f64>(Lemma::NMinusOne, &cfg, &bad).unwrap();
        assert!(!rep.passes(1e-9));
    }

    #[test]
    fn fd_oracle_examples() {
        let op = QuotientOperator::new(3, 2).unwrap();
        let lam = t(&[3.0, 2.0, 1.0]);
        let fd = fd_hessian_oracle(&op, &lam).unwrap();
        let an = op.hess_entries(&lam).unwrap();
        assert!(normwise_deviation(&an.diag_block, &fd) < 1e-6);

        let op = QuotientOperator::new(3, 1).unwrap();
        let lam = t(&[1.0, 1.0, 1.0]);
        let fd = fd_hessian_oracle(&op, &lam).unwrap();
        let g = op.grad_diag(&lam).unwrap();
        let f = op.value(&lam).unwrap();
        for i in 0..3 {
            let expect = 2.0 * g[i] * g[i] / f - 2.0 * g[i] / lam.values()[i];
            assert_relative_eq!(fd[(i, i)], expect, max_relative = 1e-6);
        }
        for p in 0..3 {
            for q in 0..3 {
                if p != q {
                    let o = fd_offdiag_oracle(&op, &lam, p, q).unwrap();
                    assert_relative_eq!(o, op.hess_entries(&lam).unwrap().offdiag[(p, q)], max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn fd_step_underflow() {
        let op = QuotientOperator::new(2, 1).unwrap();
        let lam = t(&[1.0, 1e-305]);
        assert!(matches!(fd_hessian_oracle(&op, &lam), Err(LabError::Conditioning(_))));
        assert!(fd_hessian_oracle(&op, &t(&[1e10, 1e-10])).is_ok());
    }

    #[test]
    fn induction_examples() {
        let op = QuotientOperator::new(3, 2).unwrap();
        let lam = t(&[1.0, 1.0, 1.0]);
        let range = (0.1, 1.0);
        assert_eq!(induction_c0(&op, &lam, &[0.0; 3], 1, 1.0, range).unwrap(), 0.0);
        // σ_1^{11} = σ_0(λ|1) = 1
        assert_relative_eq!(induction_c0(&op, &lam, &[1.0, 0.0, 0.0], 1, 1.0, range).unwrap(), 0.3, max_relative = 1e-14);
        // σ_2^{11} = σ_1(λ|1) = 2
        assert_relative_eq!(induction_c0(&op, &lam, &[1.0, 0.0, 0.0], 2, 1.0, range).unwrap(), 0.6, max_relative = 1e-14);
        assert!(induction_c0(&op, &lam, &[1.0, 0.0, 0.0], 3, 1.0, range).is_err());
        assert!(induction_c0(&op, &lam, &[1.0, 0.0, 0.0], 0, 1.0, range).is_err());
        assert!(matches!(
            induction_c0(&op, &lam, &[1.0, 0.0, 0.0], 1, 1.0, (0.5, 2.0)),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn extremal_gradient_attains_sup() {
        let op = QuotientOperator::new(5, 3).unwrap();
        let lam = t(&[40.0, 3.0, 2.0, 1.5, 1.0]);
        let f = op.value(&lam).unwrap();
        let range = (f * 0.5, f * 2.0);
        for eps in [0.1, 1.0, 7.0] {
            let b = induction_extremal_gradient(&op, &lam, 2, eps, range).unwrap();
            let at = induction_c0(&op, &lam, &b, 2, eps, range).unwrap();
            let sup = induction_c0_sup(&op, &lam, 2, range).unwrap();
            assert_relative_eq!(at, sup, max_relative = 1e-12);
        }
    }
}
