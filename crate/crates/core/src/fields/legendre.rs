//! Discrete Legendre transform of `u + K|x|²/2`.
//!
//! The conjugate `w(y) = max_x (x·y − g(x))` over grid nodes is computed one
//! axis at a time: conjugating along an axis and negating leaves a function
//! of the remaining primal axes and the finished dual axes, so `n` one-
//! dimensional transforms give the full sup. Each 1D transform walks the
//! lower convex hull of its samples with a single forward pointer.

use rand::Rng;
use rayon::prelude::*;

use super::calculus::{fd_gradient, fd_hessian};
use super::grid::ScalarField;
use super::spectral::eigen_sym;
use crate::error::{domain, LabError, Result};
use crate::linalg::Matrix;
use crate::sampling::stream;
use crate::scalar::Scalar;

/// Lattice of slopes `y` on which the conjugate is sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGrid<T> {
    pub lower: Vec<T>,
    pub spacing: Vec<T>,
    pub dims: Vec<usize>,
}

impl<T: Scalar> DualGrid<T> {
    /// Symmetric lattice `j·spacing`, `|j| <= half`, per axis.
    pub fn centred(spacing: &[T], half: usize) -> Self {
        Self {
            lower: spacing.iter().map(|&d| -d * T::from_usize_lossy(half)).collect(),
            spacing: spacing.to_vec(),
            dims: vec![2 * half + 1; spacing.len()],
        }
    }

    /// Box spanned by the discrete gradient of `g` over interior nodes,
    /// with as many nodes per axis as the primal grid.
    pub fn covering(field: &ScalarField<T>, shift: T) -> Result<Self> {
        let g = shifted(field, shift)?;
        let n = field.n();
        let mut lo = vec![T::infinity(); n];
        let mut hi = vec![T::neg_infinity(); n];
        for lin in 0..g.len() {
            let idx = g.unravel(lin);
            if g.has_margin(&idx, 1) {
                for (a, d) in fd_gradient(&g, &idx)?.into_iter().enumerate() {
                    lo[a] = lo[a].min(d);
                    hi[a] = hi[a].max(d);
                }
            }
        }
        if lo.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Stencil("field has no interior nodes".into()));
        }
        let dims = field.dims.clone();
        let spacing = (0..n)
            .map(|a| ((hi[a] - lo[a]) / T::from_usize_lossy(dims[a].max(2) - 1)).max(T::epsilon()))
            .collect();
        Ok(Self { lower: lo, spacing, dims })
    }

    fn coord(&self, axis: usize, j: usize) -> T {
        self.lower[axis] + self.spacing[axis] * T::from_usize_lossy(j)
    }
}

fn shifted<T: Scalar>(field: &ScalarField<T>, shift: T) -> Result<ScalarField<T>> {
    let half = T::lit(0.5) * shift;
    let values = (0..field.len())
        .map(|lin| {
            let x = field.coords(&field.unravel(lin));
            field.values[lin] + half * x.iter().map(|&v| v * v).sum::<T>()
        })
        .collect();
    field.with_values(values)
}

/// `max_i (x_i·y_j − v_i)` for ascending `x` and ascending `y`, with the
/// maximizing index.
pub fn conjugate_1d<T: Scalar>(x: &[T], v: &[T], y: &[T]) -> Vec<(T, usize)> {
    let mut hull: Vec<usize> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the chord a–i
            if (v[b] - v[a]) * (x[i] - x[a]) >= (v[i] - v[a]) * (x[b] - x[a]) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut p = 0;
    y.iter()
        .map(|&yj| {
            while p + 1 < hull.len() {
                let (a, b) = (hull[p], hull[p + 1]);
                if x[b] * yj - v[b] >= x[a] * yj - v[a] {
                    p += 1;
                } else {
                    break;
                }
            }
            let i = hull[p];
            (x[i] * yj - v[i], i)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LegendreReport<T> {
    /// Conjugate on the dual grid.
    pub w: ScalarField<T>,
    /// Maximizing primal node for every dual node.
    pub argmax: Vec<Vec<usize>>,
    /// Dual nodes whose maximizer touched the primal boundary along some axis.
    pub boundary: Vec<bool>,
    /// Dual nodes where `D²w` was compared with `(KI + D²u)⁻¹`.
    pub matched: usize,
    /// Largest `max|D²w − (KI+D²u)⁻¹| / max|(KI+D²u)⁻¹|` over matched nodes.
    pub max_rel_error: T,
    pub worst: Option<Vec<usize>>,
}

/// Discrete conjugate of `g = u + K|x|²/2` and the Hessian comparison at
/// dual nodes whose whole stencil maps to interior primal nodes.
pub fn legendre_field<T: Scalar>(field: &ScalarField<T>, shift: T, dual: Option<&DualGrid<T>>) -> Result<LegendreReport<T>> {
    if !(shift > T::zero() && shift.is_finite()) {
        return Err(domain!("shift K must be positive, got {shift}"));
    }
    require_convex(field)?;
    let n = field.n();
    let dual = match dual {
        Some(d) => d.clone(),
        None => DualGrid::covering(field, shift)?,
    };
    if dual.lower.len() != n || dual.spacing.len() != n || dual.dims.len() != n || dual.dims.contains(&0) {
        return Err(domain!("dual grid does not match the field dimension"));
    }
    let g = shifted(field, shift)?;

    // ψ holds the current partial transform on a mixed grid; axes < done
    // are still primal, the rest dual. Each pass transforms the last primal
    // axis, walking from the back.
    let mut dims = field.dims.clone();
    let mut psi: Vec<T> = g.values.iter().map(|&v| -v).collect();
    let mut edge = vec![false; psi.len()];
    let mut arg_steps: Vec<(Vec<usize>, Vec<usize>)> = Vec::with_capacity(n);
    for axis in (0..n).rev() {
        let xs: Vec<T> = (0..field.dims[axis])
            .map(|i| field.lower[axis] + field.spacing[axis] * T::from_usize_lossy(i))
            .collect();
        let ys: Vec<T> = (0..dual.dims[axis]).map(|j| dual.coord(axis, j)).collect();
        let outer: usize = dims[..axis].iter().product();
        let inner: usize = dims[axis + 1..].iter().product();
        let (nx, ny) = (dims[axis], ys.len());
        let mut out_dims = dims.clone();
        out_dims[axis] = ny;
        let lines: Vec<(usize, usize, Vec<(T, usize)>)> = (0..outer * inner)
            .into_par_iter()
            .map(|line| {
                let (o, q) = (line / inner, line % inner);
                let v: Vec<T> = (0..nx).map(|i| -psi[(o * nx + i) * inner + q]).collect();
                (o, q, conjugate_1d(&xs, &v, &ys))
            })
            .collect();
        let mut next = vec![T::zero(); outer * ny * inner];
        let mut next_edge = vec![false; next.len()];
        let mut arg = vec![0usize; next.len()];
        for (o, q, res) in lines {
            for (j, (val, i)) in res.into_iter().enumerate() {
                let dst = (o * ny + j) * inner + q;
                next[dst] = val;
                arg[dst] = i;
                next_edge[dst] = edge[(o * nx + i) * inner + q] || i == 0 || i + 1 == nx;
            }
        }
        psi = next;
        edge = next_edge;
        arg_steps.push((out_dims.clone(), arg));
        dims = out_dims;
    }

    let w = ScalarField::new(dual.lower.clone(), dual.spacing.clone(), dual.dims.clone(), psi)?;
    // Unwind the per-axis maximizers: axis 0 was transformed last.
    let argmax: Vec<Vec<usize>> = (0..w.len())
        .map(|lin| {
            let yidx = w.unravel(lin);
            let mut mixed = yidx.clone();
            for (step, axis) in (0..n).enumerate() {
                let (d, arg) = &arg_steps[n - 1 - step];
                let l = mixed.iter().zip(d).fold(0, |acc, (&i, &di)| acc * di + i);
                mixed[axis] = arg[l];
            }
            mixed
        })
        .collect();

    let checks: Vec<Option<(T, Vec<usize>)>> = (0..w.len())
        .into_par_iter()
        .map(|lin| {
            let yidx = w.unravel(lin);
            if !w.has_margin(&yidx, 1) {
                return Ok(None);
            }
            let stencil_ok = stencil_offsets(n).iter().all(|o| {
                let j = w.linear(&w.offset(&yidx, o).unwrap());
                !edge[j] && field.has_margin(&argmax[j], 1)
            });
            if !stencil_ok {
                return Ok(None);
            }
            let d2w = fd_hessian(&w, &yidx)?;
            let target = fd_hessian(field, &argmax[lin])?.add(&Matrix::identity(n).scale(shift)).inverse()?;
            let err = d2w.sub(&target).max_abs() / target.max_abs();
            Ok(Some((err, yidx)))
        })
        .collect::<Result<_>>()?;
    let mut matched = 0;
    let mut max_rel_error = T::zero();
    let mut worst = None;
    for (err, idx) in checks.into_iter().flatten() {
        matched += 1;
        if err > max_rel_error || worst.is_none() {
            max_rel_error = max_rel_error.max(err);
            worst = Some(idx);
        }
    }
    Ok(LegendreReport { w, argmax, boundary: edge, matched, max_rel_error, worst })
}

fn stencil_offsets(n: usize) -> Vec<Vec<isize>> {
    let mut out = vec![vec![0; n]];
    for a in 0..n {
        for s in [-1, 1] {
            let mut o = vec![0; n];
            o[a] = s;
            out.push(o);
        }
        for b in (a + 1)..n {
            for (sa, sb) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut o = vec![0; n];
                o[a] = sa;
                o[b] = sb;
                out.push(o);
            }
        }
    }
    out
}

fn require_convex<T: Scalar>(field: &ScalarField<T>) -> Result<()> {
    for lin in 0..field.len() {
        let idx = field.unravel(lin);
        if field.has_margin(&idx, 1) {
            let sp = eigen_sym(&fd_hessian(field, &idx)?)?;
            let tol = T::lit(1e-8) * (T::one() + sp.largest().abs());
            if sp.smallest() < -tol {
                return Err(LabError::Precondition(format!(
                    "field is not convex at {idx:?}: smallest Hessian eigenvalue {}",
                    sp.smallest()
                )));
            }
        }
    }
    Ok(())
}

/// Pairwise check of `|y(a) − y(b)| >= K|a − b|` for `y = Du + Kx`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport<T> {
    pub pairs: usize,
    pub violations: usize,
    /// Smallest `|Δy| / (K|Δx|)` seen.
    pub min_ratio: T,
}

/// Samples `pairs` distinct interior node pairs from the counter-based
/// stream `(seed, i)` and compares the discrete gradient map.
pub fn gradient_map_monotonicity<T: Scalar>(field: &ScalarField<T>, shift: T, pairs: usize, seed: u64) -> Result<MonotonicityReport<T>> {
    let n = field.n();
    if field.dims.iter().any(|&d| d < 3) {
        return Err(LabError::Stencil("monotonicity needs interior nodes".into()));
    }
    let g = shifted(field, shift)?;
    let tol = T::lit(1e-12);
    let results: Vec<T> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let mut draw = || -> Vec<usize> { (0..n).map(|a| rng.random_range(1..field.dims[a] - 1)).collect() };
            let a = draw();
            let mut b = draw();
            while b == a {
                b = draw();
            }
            let (ya, yb) = (fd_gradient(&g, &a)?, fd_gradient(&g, &b)?);
            let (xa, xb) = (field.coords(&a), field.coords(&b));
            let dy = (0..n).map(|j| (ya[j] - yb[j]) * (ya[j] - yb[j])).sum::<T>().sqrt();
            let dx = (0..n).map(|j| (xa[j] - xb[j]) * (xa[j] - xb[j])).sum::<T>().sqrt();
            Ok(dy / (shift * dx))
        })
        .collect::<Result<_>>()?;
    Ok(MonotonicityReport {
        pairs,
        violations: results.iter().filter(|&&r| r < T::one() - tol).count(),
        min_ratio: results.iter().copied().fold(T::infinity(), T::min),
    })
}
