//! Scalar fields sampled on uniform axis-aligned grids.

use crate::error::{domain, Result};
use crate::scalar::Scalar;

/// Values on the grid `lower[i] + idx[i]·spacing[i]`, `0 <= idx[i] < dims[i]`,
/// stored with the last axis varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    pub lower: Vec<T>,
    pub spacing: Vec<T>,
    pub dims: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> ScalarField<T> {
    pub fn new(lower: Vec<T>, spacing: Vec<T>, dims: Vec<usize>, values: Vec<T>) -> Result<Self> {
        let n = dims.len();
        if n == 0 {
            return Err(domain!("field needs at least one axis"));
        }
        if lower.len() != n || spacing.len() != n {
            return Err(domain!("lower/spacing/dims lengths disagree"));
        }
        if spacing.iter().any(|h| !(h.is_finite() && *h > T::zero())) {
            return Err(domain!("spacing must be positive and finite"));
        }
        if lower.iter().any(|x| !x.is_finite()) {
            return Err(domain!("lower corner must be finite"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(domain!("every axis needs at least one node"));
        }
        let count: usize = dims.iter().product();
        if values.len() != count {
            return Err(domain!("expected {count} values, got {}", values.len()));
        }
        Ok(Self { lower, spacing, dims, values })
    }

    /// Samples `f` on `dims` nodes per axis spanning `[lower, upper]`.
    pub fn from_fn(lower: &[T], upper: &[T], dims: &[usize], f: impl Fn(&[T]) -> T) -> Result<Self> {
        if lower.len() != dims.len() || upper.len() != dims.len() {
            return Err(domain!("lower/upper/dims lengths disagree"));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(domain!("from_fn needs at least two nodes per axis"));
        }
        let spacing: Vec<T> = (0..dims.len())
            .map(|i| (upper[i] - lower[i]) / T::from_usize_lossy(dims[i] - 1))
            .collect();
        let count: usize = dims.iter().product();
        let mut field = Self::new(lower.to_vec(), spacing, dims.to_vec(), vec![T::zero(); count])?;
        let mut x = vec![T::zero(); dims.len()];
        for lin in 0..count {
            field.coords_into(&field.unravel(lin), &mut x);
            field.values[lin] = f(&x);
        }
        Ok(field)
    }

    /// Same grid with new values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        Self::new(self.lower.clone(), self.spacing.clone(), self.dims.clone(), values)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn upper(&self) -> Vec<T> {
        (0..self.n())
            .map(|i| self.lower[i] + self.spacing[i] * T::from_usize_lossy(self.dims[i] - 1))
            .collect()
    }

    pub fn linear(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn unravel(&self, mut lin: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n()];
        for a in (0..self.n()).rev() {
            idx[a] = lin % self.dims[a];
            lin /= self.dims[a];
        }
        idx
    }

    pub fn coords(&self, idx: &[usize]) -> Vec<T> {
        let mut x = vec![T::zero(); self.n()];
        self.coords_into(idx, &mut x);
        x
    }

    fn coords_into(&self, idx: &[usize], x: &mut [T]) {
        for a in 0..self.n() {
            x[a] = self.lower[a] + self.spacing[a] * T::from_usize_lossy(idx[a]);
        }
    }

    #[inline]
    pub fn at(&self, idx: &[usize]) -> T {
        self.values[self.linear(idx)]
    }

    /// Whether every axis index is at least `m` away from both ends.
    pub fn has_margin(&self, idx: &[usize], m: usize) -> bool {
        idx.iter().zip(&self.dims).all(|(&i, &d)| i >= m && i + m < d)
    }

    /// Index shifted by `offsets`, if it stays on the grid.
    pub fn offset(&self, idx: &[usize], offsets: &[isize]) -> Option<Vec<usize>> {
        idx.iter()
            .zip(offsets)
            .zip(&self.dims)
            .map(|((&i, &o), &d)| {
                let j = i as isize + o;
                (j >= 0 && (j as usize) < d).then_some(j as usize)
            })
            .collect()
    }

    /// Nearest node to `x`, if `x` lies inside the grid box.
    pub fn nearest(&self, x: &[T]) -> Option<Vec<usize>> {
        (0..self.n())
            .map(|a| {
                let s = ((x[a] - self.lower[a]) / self.spacing[a]).round();
                let i = s.to_f64_lossy();
                (i >= 0.0 && (i as usize) < self.dims[a]).then_some(i as usize)
            })
            .collect()
    }

    pub fn min_spacing(&self) -> T {
        self.spacing.iter().copied().fold(T::infinity(), T::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_roundtrip() {
        let f = ScalarField::from_fn(&[0.0, -1.0], &[1.0, 1.0], &[3, 5], |x| x[0] + 10.0 * x[1]).unwrap();
        assert_eq!(f.spacing, vec![0.5, 0.5]);
        for lin in 0..f.len() {
            assert_eq!(f.linear(&f.unravel(lin)), lin);
        }
        assert_eq!(f.at(&[2, 4]), 1.0 + 10.0);
        assert_eq!(f.upper(), vec![1.0, 1.0]);
        assert!(f.has_margin(&[1, 2], 1));
        assert!(!f.has_margin(&[1, 2], 2));
        assert_eq!(f.offset(&[0, 0], &[-1, 0]), None);
        assert_eq!(f.nearest(&[0.6, 0.1]), Some(vec![1, 2]));
    }

    #[test]
    fn invalid_grids() {
        assert!(ScalarField::new(vec![0.0], vec![0.0], vec![2], vec![0.0; 2]).is_err());
        assert!(ScalarField::new(vec![0.0], vec![1.0], vec![2], vec![0.0; 3]).is_err());
        assert!(ScalarField::<f64>::new(vec![], vec![], vec![], vec![]).is_err());
    }
}
