//! Cyclic Jacobi diagonalization for small symmetric matrices.

use crate::error::{domain, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::symfun::EigenTuple;

/// Eigen-decomposition `M = Q Λ Qᵀ` with eigenvalues sorted descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint<T> {
    /// Descending eigenvalues.
    pub eigenvalues: Vec<T>,
    /// Column `j` is the unit eigenvector of `eigenvalues[j]`.
    pub frame: Matrix<T>,
    /// Runs of eigenvalues closer than [`mult_tol`], as index lists.
    pub multiplicity_groups: Vec<Vec<usize>>,
}

/// Grouping tolerance for eigenvalue multiplicity, `1e-6·(1 + |λ₁|)`.
pub fn mult_tol<T: Scalar>(lambda1: T) -> T {
    T::lit(1e-6) * (T::one() + lambda1.abs())
}

impl<T: Scalar> SpectralPoint<T> {
    pub fn tuple(&self) -> Result<EigenTuple<T>> {
        EigenTuple::new(self.eigenvalues.clone())
    }

    /// Multiplicity of the largest eigenvalue.
    pub fn top_multiplicity(&self) -> usize {
        self.multiplicity_groups.first().map_or(0, Vec::len)
    }

    pub fn smallest(&self) -> T {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn largest(&self) -> T {
        self.eigenvalues[0]
    }

    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let lam = Matrix::from_diag(&self.eigenvalues);
        &(&self.frame * &lam) * &self.frame.transpose()
    }
}

/// Diagonalizes a symmetric matrix by cyclic Jacobi rotations.
///
/// Rejects inputs whose asymmetry exceeds `1e-12·‖M‖`; the symmetric part
/// is what gets diagonalized.
pub fn eigen_sym<T: Scalar>(m: &Matrix<T>) -> Result<SpectralPoint<T>> {
    let n = m.dim();
    if n == 0 {
        return Err(domain!("empty matrix"));
    }
    let norm = m.max_abs();
    if m.asymmetry() > T::lit(1e-12) * norm {
        return Err(domain!("matrix is not symmetric (asymmetry {})", m.asymmetry()));
    }
    let mut a = Matrix::from_fn(n, |i, j| T::lit(0.5) * (m[(i, j)] + m[(j, i)]));
    let mut q = Matrix::identity(n);
    let frob = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| a[(i, j)] * a[(i, j)]).sum::<T>().sqrt();
    let stop = T::epsilon() * frob;

    for _sweep in 0..64 {
        let off = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<T>()
            .sqrt();
        if off <= stop {
            break;
        }
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[(p, r)];
                if apr == T::zero() {
                    continue;
                }
                let (c, s) = rotation(a[(p, p)], a[(r, r)], apr);
                for j in 0..n {
                    let (x, y) = (a[(p, j)], a[(r, j)]);
                    a[(p, j)] = c * x - s * y;
                    a[(r, j)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (a[(i, p)], a[(i, r)]);
                    a[(i, p)] = c * x - s * y;
                    a[(i, r)] = s * x + c * y;
                }
                a[(p, r)] = T::zero();
                a[(r, p)] = T::zero();
                for i in 0..n {
                    let (x, y) = (q[(i, p)], q[(i, r)]);
                    q[(i, p)] = c * x - s * y;
                    q[(i, r)] = s * x + c * y;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).expect("finite eigenvalues"));
    let eigenvalues: Vec<T> = order.iter().map(|&i| a[(i, i)]).collect();
    let frame = Matrix::from_fn(n, |i, j| q[(i, order[j])]);
    let tol = mult_tol(eigenvalues[0]);
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for j in 1..n {
        if eigenvalues[j - 1] - eigenvalues[j] <= tol {
            groups.last_mut().unwrap().push(j);
        } else {
            groups.push(vec![j]);
        }
    }
    Ok(SpectralPoint { eigenvalues, frame, multiplicity_groups: groups })
}

/// `(c, s)` annihilating the `(p, r)` entry of `[[app, apr], [apr, arr]]`.
fn rotation<T: Scalar>(app: T, arr: T, apr: T) -> (T, T) {
    let theta = (arr - app) / (T::lit(2.0) * apr);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = T::one() / (t * t + T::one()).sqrt();
    (c, t * c)
}
