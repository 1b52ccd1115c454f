//! Elementary symmetric functions of an eigenvalue tuple.
//!
//! `σ_k` is evaluated with the one-pass prefix recurrence
//! `e_j <- e_j + x e_{j-1}` (descending `j`), which costs `O(nk)` and only
//! ever adds products of equally signed terms on the positive cone.
//! Deleted-index minors `σ_k(λ|i)` and `σ_k(λ|ij)` reuse the same pass with
//! the dropped entries skipped, so no temporary tuples are allocated.

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Eigenvalues of a symmetric matrix, stored sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTuple<T> {
    values: Vec<T>,
}

impl<T: Scalar> EigenTuple<T> {
    /// Sorts the input descending. Requires at least two finite entries.
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(domain!("eigen tuple needs n >= 2 entries, got {}", values.len()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain!("eigen tuple entries must be finite, got {bad}"));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite values compare"));
        Ok(Self { values })
    }

    /// `n` copies of `t`.
    pub fn isotropic(n: usize, t: T) -> Result<Self> {
        Self::new(vec![t; n])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn largest(&self) -> T {
        self.values[0]
    }

    #[inline]
    pub fn smallest(&self) -> T {
        self.values[self.values.len() - 1]
    }

    pub fn is_positive(&self) -> bool {
        self.smallest() > T::zero()
    }

    /// Errors unless every entry is strictly positive.
    pub fn require_positive(&self) -> Result<()> {
        if self.is_positive() {
            Ok(())
        } else {
            Err(domain!("operator is only analyzed on the positive cone; smallest eigenvalue is {}", self.smallest()))
        }
    }

    pub fn scaled(&self, t: T) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| v * t).collect())
    }
}

/// `σ_k` of an arbitrary slice, skipping up to two indices.
///
/// Returns zero for `k` beyond the number of retained entries, which is the
/// usual convention and keeps boundary cases in the derivative formulas free
/// of special-casing.
pub fn elementary_skipping<T: Scalar>(values: &[T], k: usize, skip: [Option<usize>; 2]) -> T {
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    let mut seen = 0usize;
    for (idx, &x) in values.iter().enumerate() {
        if skip[0] == Some(idx) || skip[1] == Some(idx) {
            continue;
        }
        seen += 1;
        for j in (1..=k.min(seen)).rev() {
            e[j] = e[j] + x * e[j - 1];
        }
    }
    e[k]
}

/// All of `σ_0, …, σ_m` for the slice with the given indices skipped.
pub fn elementary_all<T: Scalar>(values: &[T], m: usize, skip: [Option<usize>; 2]) -> Vec<T> {
    let mut e = vec![T::zero(); m + 1];
    e[0] = T::one();
    let mut seen = 0usize;
    for (idx, &x) in values.iter().enumerate() {
        if skip[0] == Some(idx) || skip[1] == Some(idx) {
            continue;
        }
        seen += 1;
        for j in (1..=m.min(seen)).rev() {
            e[j] = e[j] + x * e[j - 1];
        }
    }
    e
}

/// `σ_k(λ)` for `0 <= k <= n`.
pub fn elementary<T: Scalar>(lambda: &EigenTuple<T>, k: usize) -> Result<T> {
    if k > lambda.n() {
        return Err(domain!("k = {k} exceeds n = {}", lambda.n()));
    }
    Ok(elementary_skipping(lambda.values(), k, [None, None]))
}

/// `σ_k(λ|i)` or `σ_k(λ|ij)`; indices are zero-based positions in the
/// descending tuple.
pub fn elementary_minor<T: Scalar>(lambda: &EigenTuple<T>, k: usize, drop: &[usize]) -> Result<T> {
    let n = lambda.n();
    let skip = match *drop {
        [i] if i < n => [Some(i), None],
        [i, j] if i < n && j < n && i != j => [Some(i), Some(j)],
        [i, j] if i == j => return Err(domain!("duplicate dropped index {i}")),
        [] => return Err(domain!("drop set must hold one or two indices")),
        _ if drop.len() > 2 => return Err(domain!("drop set must hold one or two indices")),
        _ => return Err(domain!("dropped index out of range for n = {n}: {drop:?}")),
    };
    if k > n - drop.len() {
        return Err(domain!("k = {k} exceeds the {} retained entries", n - drop.len()));
    }
    Ok(elementary_skipping(lambda.values(), k, skip))
}

/// Absolute residuals of the four deleted-index identities, plus the
/// normalization `max(1, |σ_k|)` used when comparing against tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals<T> {
    /// `max_i |σ_k − λ_i σ_{k−1}(λ|i) − σ_k(λ|i)|`
    pub splitting: T,
    /// `|Σ_i σ_k(λ|i) − (n−k)σ_k|`
    pub minor_sum: T,
    /// `|Σ_i λ_i σ_{k−1}(λ|i) − kσ_k|`
    pub euler: T,
    /// `|Σ_i λ_i² σ_{k−1}(λ|i) − (σ_1σ_k − (k+1)σ_{k+1})|`
    pub second_moment: T,
    pub scale: T,
}

impl<T: Scalar> IdentityResiduals<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.splitting, self.minor_sum, self.euler, self.second_moment]
    }

    pub fn normalized(&self) -> [T; 4] {
        self.as_array().map(|r| r / self.scale)
    }

    pub fn max_normalized(&self) -> T {
        self.normalized().into_iter().fold(T::zero(), T::max)
    }
}

/// Sum of products carried as an unevaluated pair `hi + lo`, with the
/// rounding error of every product and addition recovered by `mul_add`.
struct Compensated<T> {
    hi: T,
    lo: T,
}

impl<T: Scalar> Compensated<T> {
    fn new() -> Self {
        Self { hi: T::zero(), lo: T::zero() }
    }

    fn add(&mut self, x: T) {
        let s = self.hi + x;
        let bp = s - self.hi;
        self.lo = self.lo + ((self.hi - (s - bp)) + (x - bp));
        self.hi = s;
    }

    fn add_prod(&mut self, a: T, b: T) {
        let p = a * b;
        self.add(p);
        self.lo = self.lo + a.mul_add(b, -p);
    }

    fn add_prod3(&mut self, a: T, b: T, c: T) {
        let p = a * b;
        let e = a.mul_add(b, -p);
        let q = p * c;
        self.add(q);
        self.lo = self.lo + p.mul_add(c, -q) + e * c;
    }

    fn value(&self) -> T {
        self.hi + self.lo
    }
}

/// Residuals of the four identities for the computed `σ` values.
///
/// The residual sums are accumulated with compensated arithmetic, so what
/// remains is the rounding carried by the `σ` values themselves.
pub fn identity_residuals<T: Scalar>(lambda: &EigenTuple<T>, k: usize) -> Result<IdentityResiduals<T>> {
    let n = lambda.n();
    if k < 1 || k >= n {
        return Err(domain!("identities need 1 <= k <= n-1, got k = {k}, n = {n}"));
    }
    let v = lambda.values();
    let full = elementary_all(v, k + 1, [None, None]);
    let (s1, sk, sk1) = (full[1], full[k], full[k + 1]);
    let kk = T::from_usize_lossy(k);

    let mut splitting = T::zero();
    let mut minor_sum = Compensated::new();
    let mut euler = Compensated::new();
    let mut second = Compensated::new();
    minor_sum.add_prod(-T::from_usize_lossy(n - k), sk);
    euler.add_prod(-kk, sk);
    second.add_prod(-s1, sk);
    second.add_prod(kk + T::one(), sk1);
    for (i, &li) in v.iter().enumerate() {
        let minor = elementary_all(v, k, [Some(i), None]);
        let (m_km1, m_k) = (minor[k - 1], minor[k]);
        let mut split = Compensated::new();
        split.add(sk);
        split.add_prod(-li, m_km1);
        split.add(-m_k);
        splitting = splitting.max(split.value().abs());
        minor_sum.add(m_k);
        euler.add_prod(li, m_km1);
        second.add_prod3(li, li, m_km1);
    }
    Ok(IdentityResiduals {
        splitting,
        minor_sum: minor_sum.value().abs(),
        euler: euler.value().abs(),
        second_moment: second.value().abs(),
        scale: T::one().max(sk.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(v: &[f64]) -> EigenTuple<f64> {
        EigenTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn construction_sorts_descending() {
        let t = tuple(&[1.0, 3.0, 2.0]);
        assert_eq!(t.values(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn construction_rejects_short_and_nonfinite() {
        assert!(EigenTuple::new(vec![1.0]).is_err());
        assert!(EigenTuple::new(vec![1.0, f64::NAN]).is_err());
        assert!(EigenTuple::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn elementary_examples() {
        assert_eq!(elementary(&tuple(&[1.0, 1.0, 1.0]), 2).unwrap(), 3.0);
        assert_eq!(elementary(&tuple(&[3.0, 2.0, 1.0]), 2).unwrap(), 11.0);
        assert_eq!(elementary(&tuple(&[3.0, 2.0, 1.0]), 0).unwrap(), 1.0);
        assert_eq!(elementary(&tuple(&[3.0, 2.0, 1.0]), 3).unwrap(), 6.0);
        assert!(elementary(&tuple(&[3.0, 2.0, 1.0]), 4).is_err());
    }

    #[test]
    fn minor_examples() {
        // drop the middle entry (position 1) -> 3 + 1
        assert_eq!(elementary_minor(&tuple(&[3.0, 2.0, 1.0]), 1, &[1]).unwrap(), 4.0);
        assert_eq!(elementary_minor(&tuple(&[1.0, 1.0, 1.0]), 2, &[0]).unwrap(), 1.0);
        assert_eq!(elementary_minor(&tuple(&[3.0, 2.0, 1.0]), 0, &[0, 2]).unwrap(), 1.0);
    }

    #[test]
    fn minor_errors() {
        let t = tuple(&[3.0, 2.0, 1.0]);
        assert!(elementary_minor(&t, 1, &[3]).is_err());
        assert!(elementary_minor(&t, 1, &[1, 1]).is_err());
        assert!(elementary_minor(&t, 1, &[]).is_err());
        assert!(elementary_minor(&t, 1, &[0, 1, 2]).is_err());
        assert!(elementary_minor(&t, 2, &[0, 1]).is_err());
    }

    #[test]
    fn residual_examples() {
        let r = identity_residuals(&tuple(&[3.0, 2.0, 1.0]), 1).unwrap();
        assert!(r.max_normalized() < 1e-15);
        let sum: f64 = (0..3).map(|i| elementary_minor(&tuple(&[3.0, 2.0, 1.0]), 1, &[i]).unwrap()).sum();
        assert_eq!(sum, 12.0);

        let r = identity_residuals(&tuple(&[1.0, 1.0, 1.0]), 2).unwrap();
        assert_eq!(r.as_array(), [0.0; 4]);

        let r = identity_residuals(&tuple(&[5.0, 1e-3]), 1).unwrap();
        assert!(r.max_normalized() < 1e-15);
    }

    #[test]
    fn residual_k_range() {
        let t = tuple(&[3.0, 2.0, 1.0]);
        assert!(identity_residuals(&t, 0).is_err());
        assert!(identity_residuals(&t, 3).is_err());
    }

    #[test]
    fn f32_path_matches() {
        let t = EigenTuple::<f32>::new(vec![3.0, 2.0, 1.0]).unwrap();
        assert_eq!(elementary(&t, 2).unwrap(), 11.0f32);
    }
}
