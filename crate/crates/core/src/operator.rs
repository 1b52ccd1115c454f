//! The quotient operator `F = σ_n/σ_k` in a diagonal frame.
//!
//! Every derivative is written in a cancellation-free form: the gradient as
//! `F^{pp} = f·σ_k(λ|p)/(λ_p σ_k)`, the diagonal second derivatives through
//! `σ_{k−1}(λ|p)`, the mixed ones through the two-index minors of `μ = (λ|pr)`,
//! and the off-diagonal entries through
//! `−F^{pq,qp} = f·((λ_p+λ_q)σ_{k−1}(μ) + σ_k(μ))/(λ_pλ_qσ_k)`, which stays
//! valid when `λ_p = λ_q`. On the positive cone all of these are sums of
//! positive terms except the Newton-type difference `σ_{k−1}(μ)² − σ_k(μ)σ_{k−2}(μ)`.

use crate::error::{domain, LabError, Result};
use crate::linalg::Matrix;
use crate::scalar::{binomial, Scalar};
use crate::symfun::{elementary_all, elementary_skipping, EigenTuple};

/// `F = σ_n/σ_k` on `n × n` Hessians.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuotientOperator {
    n: usize,
    k: usize,
}

/// Second derivatives of `F` at a diagonal Hessian.
///
/// `diag_block[(p, r)] = F^{pp,rr}`; `offdiag[(p, q)] = F^{pq,qp}` for `p ≠ q`
/// (zero on the diagonal). Every other entry of the four-index tensor vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondDerivativeTensor<T> {
    pub diag_block: Matrix<T>,
    pub offdiag: Matrix<T>,
}

/// One inequality of the eigenvalue pinch bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck<T> {
    pub name: &'static str,
    pub lhs: T,
    pub rhs: T,
    /// `rhs − lhs` for an inequality `lhs ≤ rhs`.
    pub slack: T,
    pub scale: T,
}

impl<T: Scalar> BoundCheck<T> {
    fn new(name: &'static str, lhs: T, rhs: T) -> Self {
        Self { name, lhs, rhs, slack: rhs - lhs, scale: lhs.abs().max(rhs.abs()) }
    }

    pub fn normalized_slack(&self) -> T {
        if self.scale > T::zero() {
            self.slack / self.scale
        } else {
            self.slack
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport<T> {
    /// The instantiated `C(n)`.
    pub constant: T,
    pub constant_rule: &'static str,
    pub f: T,
    pub checks: Vec<BoundCheck<T>>,
}

impl<T: Scalar> BoundsReport<T> {
    pub fn min_normalized_slack(&self) -> T {
        self.checks.iter().map(BoundCheck::normalized_slack).fold(T::infinity(), T::min)
    }
}

/// One row of an ellipticity sweep along the completion `(λ₁, t, …, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub lambda1: T,
    pub t: T,
    pub min_g: T,
    pub max_g: T,
    /// `max G / min G`.
    pub ratio: T,
    /// `λ_{n−1}` of the completed tuple.
    pub lambda_nm1: T,
    pub min_g_scaled: T,
    pub max_g_scaled: T,
}

pub const CONSTANT_RULE: &str = "C(n)=binomial(n,k)";

/// Minors shared by all derivative formulas at one tuple.
struct Minors<T> {
    f: T,
    sk: T,
    /// `σ_k(λ|p)`
    drop_k: Vec<T>,
    /// `σ_{k−1}(λ|p)`
    drop_km1: Vec<T>,
}

impl QuotientOperator {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(domain!("dimension must be at least 2, got {n}"));
        }
        if k < 1 || k >= n {
            return Err(domain!("need 1 <= k <= n-1, got k = {k}, n = {n}"));
        }
        Ok(Self { n, k })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// True for the two regimes with an interior estimate, `k ∈ {n−1, n−2}`.
    pub fn is_estimate_regime(&self) -> bool {
        self.k + 1 == self.n || self.k + 2 == self.n
    }

    pub fn require_estimate_regime(&self) -> Result<()> {
        if self.is_estimate_regime() {
            Ok(())
        } else {
            Err(LabError::Unsupported(format!(
                "k must be n-1 or n-2, got n = {}, k = {}",
                self.n, self.k
            )))
        }
    }

    fn check<T: Scalar>(&self, lambda: &EigenTuple<T>) -> Result<()> {
        if lambda.n() != self.n {
            return Err(domain!("tuple has {} entries, operator expects {}", lambda.n(), self.n));
        }
        lambda.require_positive()
    }

    fn minors<T: Scalar>(&self, lambda: &EigenTuple<T>) -> Result<Minors<T>> {
        self.check(lambda)?;
        let v = lambda.values();
        let sn = v.iter().fold(T::one(), |acc, &x| acc * x);
        let sk = elementary_skipping(v, self.k, [None, None]);
        let mut drop_k = Vec::with_capacity(self.n);
        let mut drop_km1 = Vec::with_capacity(self.n);
        for p in 0..self.n {
            let e = elementary_all(v, self.k, [Some(p), None]);
            drop_k.push(e[self.k]);
            drop_km1.push(e[self.k - 1]);
        }
        Ok(Minors { f: sn / sk, sk, drop_k, drop_km1 })
    }

    /// `f = σ_n(λ)/σ_k(λ)`.
    pub fn value<T: Scalar>(&self, lambda: &EigenTuple<T>) -> Result<T> {
        self.check(lambda)?;
        let v = lambda.values();
        let sn = v.iter().fold(T::one(), |acc, &x| acc * x);
        Ok(sn / elementary_skipping(v, self.k, [None, None]))
    }

    /// `F^{pp}` for `p = 0..n`.
    pub fn grad_diag<T: Scalar>(&self, lambda: &EigenTuple<T>) -> Result<Vec<T>> {
        let m = self.minors(lambda)?;
        Ok(grad_from(&m, lambda.values()))
    }

    pub fn hess_entries<T: Scalar>(&self, lambda: &EigenTuple<T>) -> Result<SecondDerivativeTensor<T>> {
        let m = self.minors(lambda)?;
        let v = lambda.values();
        let n = self.n;
        let k = self.k;
        let grad = grad_from(&m, v);
        let mut diag_block = Matrix::zeros(n);
        let mut offdiag = Matrix::zeros(n);
        for p in 0..n {
            diag_block[(p, p)] = -(T::one() + T::one()) * m.drop_km1[p] * grad[p] / m.sk;
            for r in (p + 1)..n {
                // minors of μ = (λ|pr): σ_{k−2}, σ_{k−1}, σ_k
                let e = elementary_all(v, k, [Some(p), Some(r)]);
                let mu_k = e[k];
                let mu_km1 = e[k - 1];
                let mu_km2 = if k >= 2 { e[k - 2] } else { T::zero() };
                let newton = mu_km1 * mu_km1 - mu_k * mu_km2;
                let mixed = grad[p] * grad[r] / m.f + m.f * newton / (m.sk * m.sk);
                diag_block[(p, r)] = mixed;
                diag_block[(r, p)] = mixed;

                let neg = m.f * ((v[p] + v[r]) * mu_km1 + mu_k) / (v[p] * v[r] * m.sk);
                offdiag[(p, r)] = -neg;
                offdiag[(r, p)] = -neg;
            }
        }
        Ok(SecondDerivativeTensor { diag_block, offdiag })
    }

    /// `H^{ii} = σ_k F^{ii} = f·σ_k(λ|i)/λ_i`.
    pub fn h_diag<T: Scalar>(&self, lambda: &EigenTuple<T>) -> Result<Vec<T>> {
        let m = self.minors(lambda)?;
        Ok(lambda.values().iter().zip(&m.drop_k).map(|(&l, &dk)| m.f * dk / l).collect())
    }

    /// Checks the eigenvalue pinch bounds with `C(n) = binomial(n, k)`.
    pub fn eigen_bounds_check<T: Scalar>(&self, lambda: &EigenTuple<T>) -> Result<BoundsReport<T>> {
        self.require_estimate_regime()?;
        let f = self.value(lambda)?;
        let c: T = binomial(self.n, self.k);
        let v = lambda.values();
        let last = v[self.n - 1];
        let checks = if self.k + 1 == self.n {
            vec![BoundCheck::new("f <= lambda_n", f, last), BoundCheck::new("lambda_n <= C f", last, c * f)]
        } else {
            vec![
                BoundCheck::new("lambda_n <= sqrt(C f)", last, (c * f).sqrt()),
                BoundCheck::new("sqrt(f/C) <= lambda_(n-1)", (f / c).sqrt(), v[self.n - 2]),
            ]
        };
        Ok(BoundsReport { constant: c, constant_rule: CONSTANT_RULE, f, checks })
    }

    /// `G^{ii} = f·σ_k(λ|i)/(λ_iσ_k)·(K+λ_i)²`, the diagonal of the operator
    /// after the shifted Legendre transform.
    pub fn legendre_diag<T: Scalar>(&self, lambda: &EigenTuple<T>, shift: T) -> Result<Vec<T>> {
        if !(shift > T::zero()) {
            return Err(domain!("Legendre shift K must be positive, got {shift}"));
        }
        let m = self.minors(lambda)?;
        let v = lambda.values();
        Ok(v.iter()
            .zip(&m.drop_k)
            .map(|(&l, &dk)| {
                let s = shift + l;
                m.f * dk / (l * m.sk) * s * s
            })
            .collect())
    }

    /// Completes `(λ₁, t, …, t)` so that `F = f_target`.
    ///
    /// `F` is increasing in `t`, so the root is bracketed and bisected in
    /// log space. Fails when the target needs `t > λ₁`.
    pub fn complete_tuple<T: Scalar>(&self, lambda1: T, f_target: T) -> Result<EigenTuple<T>> {
        if !(lambda1 > T::zero()) || !(f_target > T::zero()) {
            return Err(domain!("completion needs positive lambda1 and target, got {lambda1}, {f_target}"));
        }
        let eval = |t: T| -> Result<T> {
            let mut v = vec![t; self.n];
            v[0] = lambda1;
            self.value(&EigenTuple::new(v)?)
        };
        let at_top = eval(lambda1)?;
        let rel = T::lit(64.0) * T::epsilon();
        if at_top < f_target * (T::one() - rel) {
            return Err(LabError::Infeasible(format!(
                "no completion (lambda1, t, ..., t) with t <= lambda1 = {lambda1} reaches f = {f_target}"
            )));
        }
        if at_top <= f_target {
            return EigenTuple::new(vec![lambda1; self.n]);
        }
        let mut hi = lambda1;
        let mut lo = lambda1;
        let tiny = T::min_positive_value().sqrt();
        loop {
            lo = lo * T::lit(1e-3);
            if lo < tiny {
                return Err(LabError::Infeasible(format!("target f = {f_target} is below the reachable range")));
            }
            if eval(lo)? < f_target {
                break;
            }
        }
        for _ in 0..400 {
            let mid = (lo * hi).sqrt();
            if mid <= lo || mid >= hi {
                break;
            }
            if eval(mid)? < f_target {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= rel * hi {
                break;
            }
        }
        let t = (lo * hi).sqrt();
        let mut v = vec![t; self.n];
        v[0] = lambda1;
        EigenTuple::new(v)
    }

    /// Tabulates `G^{ii}` along the completion family for each `λ₁`.
    pub fn ellipticity_sweep<T: Scalar>(&self, f_target: T, shift: T, lambda1s: &[T]) -> Result<Vec<SweepRow<T>>> {
        self.require_estimate_regime()?;
        lambda1s
            .iter()
            .map(|&l1| {
                let lambda = self.complete_tuple(l1, f_target)?;
                let g = self.legendre_diag(&lambda, shift)?;
                let min_g = g.iter().copied().fold(T::infinity(), T::min);
                let max_g = g.iter().copied().fold(T::neg_infinity(), T::max);
                let lambda_nm1 = lambda.values()[self.n - 2];
                Ok(SweepRow {
                    lambda1: l1,
                    t: lambda.smallest(),
                    min_g,
                    max_g,
                    ratio: max_g / min_g,
                    lambda_nm1,
                    min_g_scaled: min_g / lambda_nm1,
                    max_g_scaled: max_g / lambda_nm1,
                })
            })
            .collect()
    }
}

fn grad_from<T: Scalar>(m: &Minors<T>, v: &[T]) -> Vec<T> {
    v.iter().zip(&m.drop_k).map(|(&l, &dk)| m.f * dk / (l * m.sk)).collect()
}

/// `(F^{pp} − F^{qq})/(λ_q − λ_p)`, the divided-difference route to
/// `−F^{pq,qp}`; `None` when the two eigenvalues coincide.
pub fn divided_difference<T: Scalar>(grad: &[T], lambda: &EigenTuple<T>, p: usize, q: usize) -> Option<T> {
    let v = lambda.values();
    let gap = v[q] - v[p];
    if gap == T::zero() {
        None
    } else {
        Some((grad[p] - grad[q]) / gap)
    }
}

/// Relative spread `(max − min)/min` of a positive series.
pub fn relative_variation<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let (lo, hi) = values
        .into_iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| (lo.min(x), hi.max(x)));
    (hi - lo) / lo
}
