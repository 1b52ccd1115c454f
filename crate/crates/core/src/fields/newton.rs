//! Row divergence of the Newton tensor `σ_k^{ij}(D²u)`.

use rayon::prelude::*;

use super::calculus::fd_hessian;
use super::grid::ScalarField;
use crate::error::{domain, LabError, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::stats::log_log_slope;

/// `σ_0, …, σ_m` of a general square matrix, from power sums of its traces.
pub fn matrix_elementary<T: Scalar>(m: &Matrix<T>, upto: usize) -> Vec<T> {
    let mut power = Matrix::identity(m.dim());
    let mut p = Vec::with_capacity(upto + 1);
    p.push(T::from_usize_lossy(m.dim()));
    for _ in 0..upto {
        power = &power * m;
        p.push(power.trace());
    }
    let mut s = vec![T::one()];
    for j in 1..=upto {
        let mut acc = T::zero();
        for i in 1..=j {
            let term = s[j - i] * p[i];
            acc = if i % 2 == 1 { acc + term } else { acc - term };
        }
        s.push(acc / T::from_usize_lossy(j));
    }
    s
}

/// `∂σ_k/∂m_ij = Σ_{r<k} (−1)^r σ_{k−1−r}(M) M^r`.
pub fn newton_tensor<T: Scalar>(m: &Matrix<T>, k: usize) -> Result<Matrix<T>> {
    let n = m.dim();
    if k == 0 || k > n {
        return Err(domain!("Newton tensor needs 1 <= k <= n, got k = {k}, n = {n}"));
    }
    let s = matrix_elementary(m, k - 1);
    let mut power = Matrix::identity(n);
    let mut out = Matrix::zeros(n);
    for r in 0..k {
        let c = if r % 2 == 0 { s[k - 1 - r] } else { -s[k - 1 - r] };
        out = out.add(&power.scale(c));
        power = &power * m;
    }
    Ok(out)
}

/// One field per row `i` holding `Σ_j ∂_j σ_k^{ij}`; `NaN` within two cells
/// of the boundary.
#[derive(Debug, Clone)]
pub struct NewtonDivergence<T> {
    pub rows: Vec<ScalarField<T>>,
    /// Largest residual over rows and interior nodes.
    pub max_residual: T,
    /// `max(1, max|σ_k^{ij}| / min h)`: the size of one difference quotient.
    pub scale: T,
    /// Largest entry of the discrete `D²u`.
    pub hessian_max: T,
}

pub fn newton_divergence<T: Scalar>(field: &ScalarField<T>, k: usize) -> Result<NewtonDivergence<T>> {
    let n = field.n();
    if k == 0 || k > n {
        return Err(domain!("Newton tensor needs 1 <= k <= n, got k = {k}, n = {n}"));
    }
    if field.dims.iter().any(|&d| d < 5) {
        return Err(LabError::Stencil("divergence needs a two-cell margin around at least one node".into()));
    }
    let tensors: Vec<Option<Matrix<T>>> = (0..field.len())
        .into_par_iter()
        .map(|lin| {
            let idx = field.unravel(lin);
            if !field.has_margin(&idx, 1) {
                return Ok(None);
            }
            newton_tensor(&fd_hessian(field, &idx)?, k).map(Some)
        })
        .collect::<Result<_>>()?;
    let tensor_max = tensors.iter().flatten().fold(T::zero(), |m, t| m.max(t.max_abs()));
    let hessian_max = (0..field.len())
        .filter(|&l| tensors[l].is_some())
        .map(|l| fd_hessian(field, &field.unravel(l)).map(|h| h.max_abs()))
        .try_fold(T::zero(), |m, h| h.map(|h| m.max(h)))?;

    let residuals: Vec<Vec<T>> = (0..field.len())
        .into_par_iter()
        .map(|lin| {
            let idx = field.unravel(lin);
            if !field.has_margin(&idx, 2) {
                return vec![T::nan(); n];
            }
            let mut off = vec![0isize; n];
            (0..n)
                .map(|i| {
                    let mut acc = T::zero();
                    for j in 0..n {
                        off[j] = 1;
                        let up = tensors[field.linear(&field.offset(&idx, &off).unwrap())].as_ref().unwrap()[(i, j)];
                        off[j] = -1;
                        let down = tensors[field.linear(&field.offset(&idx, &off).unwrap())].as_ref().unwrap()[(i, j)];
                        off[j] = 0;
                        acc = acc + (up - down) / (T::lit(2.0) * field.spacing[j]);
                    }
                    acc
                })
                .collect()
        })
        .collect();

    let max_residual = residuals.iter().flatten().filter(|v| !v.is_nan()).fold(T::zero(), |m, v| m.max(v.abs()));
    let rows = (0..n)
        .map(|i| field.with_values(residuals.iter().map(|r| r[i]).collect()))
        .collect::<Result<_>>()?;
    Ok(NewtonDivergence { rows, max_residual, scale: T::one().max(tensor_max / field.min_spacing()), hessian_max })
}

/// Residuals of a quantity measured at successively halved spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement<T> {
    pub spacing: Vec<T>,
    pub residual: Vec<T>,
    /// `d ln residual / d ln h`; `None` when a residual is exactly zero.
    pub slope: Option<T>,
    /// Rounding-error estimate per level.
    pub floor: Vec<T>,
}

impl<T: Scalar> Refinement<T> {
    /// Every residual is within its rounding floor.
    pub fn at_rounding_floor(&self) -> bool {
        self.residual.iter().zip(&self.floor).all(|(r, f)| r <= f)
    }
}

/// Builds the fields for `levels` halvings of the cube `[lower, upper]^n`,
/// starting from `cells` cells per axis.
pub fn refinement_fields<T: Scalar>(
    u: &(dyn Fn(&[T]) -> T + Sync),
    lower: &[T],
    upper: &[T],
    cells: usize,
    levels: usize,
) -> Result<Vec<ScalarField<T>>> {
    (0..levels)
        .map(|l| {
            let d = cells * (1 << l) + 1;
            ScalarField::from_fn(lower, upper, &vec![d; lower.len()], u)
        })
        .collect()
}

/// Divergence residual of `newton_divergence` under grid halving.
///
/// Residuals are maximized over the physical nodes that are interior on the
/// coarsest level, so every level is measured on the same point set. The
/// floor models rounding pushed through three nested differences:
/// `64·ε·max(1, max|u|)·(1 + (k−1)·max(1, |D²u|)^{k−2}) / h³`.
pub fn divergence_refinement<T: Scalar>(fields: &[ScalarField<T>], k: usize) -> Result<Refinement<T>> {
    let coarse = fields.first().ok_or_else(|| LabError::InsufficientData("no refinement levels".into()))?;
    let probes: Vec<Vec<T>> = (0..coarse.len())
        .map(|l| coarse.unravel(l))
        .filter(|idx| coarse.has_margin(idx, 2))
        .map(|idx| coarse.coords(&idx))
        .collect();
    let mut spacing = Vec::new();
    let mut residual = Vec::new();
    let mut floor = Vec::new();
    for f in fields {
        let d = newton_divergence(f, k)?;
        let mut worst = T::zero();
        for x in &probes {
            let idx = f.nearest(x).ok_or_else(|| domain!("refinement levels cover different boxes"))?;
            for row in &d.rows {
                worst = worst.max(row.at(&idx).abs());
            }
        }
        let h = f.min_spacing();
        let umax = f.values.iter().fold(T::one(), |m, v| m.max(v.abs()));
        let amp = T::one() + T::from_usize_lossy(k - 1) * d.hessian_max.max(T::one()).powi(k.max(2) as i32 - 2);
        spacing.push(h);
        residual.push(worst);
        floor.push(T::lit(64.0) * T::epsilon() * umax * amp / (h * h * h));
    }
    let slope = log_log_slope(&spacing, &residual).ok();
    Ok(Refinement { spacing, residual, slope, floor })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_of_matrix_matches_eigenvalues() {
        let m = Matrix::from_diag(&[3.0, 2.0, 1.0]);
        assert_eq!(matrix_elementary(&m, 3), vec![1.0, 6.0, 11.0, 6.0]);
    }

    #[test]
    fn tensor_low_orders() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(newton_tensor(&m, 1).unwrap(), Matrix::identity(2));
        // σ_2 = det; its gradient is the cofactor matrix
        let t = newton_tensor(&m, 2).unwrap();
        assert_eq!(t, Matrix::from_rows(&[vec![3.0, -1.0], vec![-1.0, 2.0]]).unwrap());
        assert!(newton_tensor(&m, 3).is_err());
    }

    #[test]
    fn k1_divergence_vanishes() {
        let f = ScalarField::from_fn(&[-1.0, -1.0], &[1.0, 1.0], &[9, 9], |x: &[f64]| (x[0] * x[1]).sin() + x[0].exp()).unwrap();
        let d = newton_divergence(&f, 1).unwrap();
        assert_eq!(d.max_residual, 0.0);
    }

    #[test]
    fn margin_enforced() {
        let f = ScalarField::from_fn(&[0.0, 0.0], &[1.0, 1.0], &[4, 9], |x: &[f64]| x[0]).unwrap();
        assert!(matches!(newton_divergence(&f, 1), Err(LabError::Stencil(_))));
    }
}
