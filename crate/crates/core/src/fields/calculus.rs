//! Finite-difference calculus on fields: Hessians, `b = ln λ₁`, and the
//! Jacobi-inequality gap estimator.

use rayon::prelude::*;

use super::grid::ScalarField;
use super::spectral::{eigen_sym, SpectralPoint};
use crate::error::{LabError, Result};
use crate::linalg::Matrix;
use crate::operator::QuotientOperator;
use crate::scalar::Scalar;
use crate::symfun::EigenTuple;

/// Central-difference gradient; needs a one-cell margin.
pub fn fd_gradient<T: Scalar>(field: &ScalarField<T>, idx: &[usize]) -> Result<Vec<T>> {
    require_margin(field, idx, 1)?;
    let n = field.n();
    let two = T::lit(2.0);
    Ok((0..n)
        .map(|a| {
            let mut off = vec![0isize; n];
            off[a] = 1;
            let up = field.at(&field.offset(idx, &off).unwrap());
            off[a] = -1;
            let down = field.at(&field.offset(idx, &off).unwrap());
            (up - down) / (two * field.spacing[a])
        })
        .collect())
}

/// Second-order central-difference Hessian.
///
/// Mixed entries use the compact four-corner stencil, so a one-cell margin
/// suffices. The result is symmetric by construction.
pub fn fd_hessian<T: Scalar>(field: &ScalarField<T>, idx: &[usize]) -> Result<Matrix<T>> {
    require_margin(field, idx, 1)?;
    let n = field.n();
    let centre = field.at(idx);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let sample = |off: &[isize]| field.at(&field.offset(idx, off).unwrap());
    let mut h = Matrix::zeros(n);
    let mut off = vec![0isize; n];
    for a in 0..n {
        off[a] = 1;
        let up = sample(&off);
        off[a] = -1;
        let down = sample(&off);
        off[a] = 0;
        let ha = field.spacing[a];
        h[(a, a)] = (up - two * centre + down) / (ha * ha);
        for b in (a + 1)..n {
            let mut corner = |sa: isize, sb: isize| {
                off[a] = sa;
                off[b] = sb;
                let v = sample(&off);
                off[a] = 0;
                off[b] = 0;
                v
            };
            let pp = corner(1, 1);
            let pm = corner(1, -1);
            let mp = corner(-1, 1);
            let mm = corner(-1, -1);
            let v = (pp - pm - mp + mm) / (four * ha * field.spacing[b]);
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    Ok(h)
}

fn require_margin<T: Scalar>(field: &ScalarField<T>, idx: &[usize], m: usize) -> Result<()> {
    if idx.len() != field.n() {
        return Err(LabError::Stencil(format!("index has {} axes, field has {}", idx.len(), field.n())));
    }
    if !field.has_margin(idx, m) {
        return Err(LabError::Stencil(format!("index {idx:?} is closer than {m} cells to the boundary")));
    }
    Ok(())
}

/// Offsets of every node touched by [`fd_hessian`] around a centre.
fn hessian_stencil(n: usize) -> Vec<Vec<isize>> {
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

/// Classification of a grid node in a [`BField`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFlag {
    /// Too close to the boundary for a Hessian.
    Boundary,
    /// Smallest Hessian eigenvalue below tolerance, or `λ₁ <= 0`.
    NonConvex,
    /// Largest eigenvalue repeated this many times.
    Multiple(usize),
    /// Convex with a simple largest eigenvalue.
    Simple,
}

/// `b = ln λ₁(D²u)` with a per-node flag mask and the spectra it came from.
#[derive(Debug, Clone)]
pub struct BField<T> {
    /// `NaN` wherever the flag is `Boundary` or `NonConvex`.
    pub b: ScalarField<T>,
    pub flags: Vec<PointFlag>,
    pub spectra: Vec<Option<SpectralPoint<T>>>,
}

impl<T: Scalar> BField<T> {
    pub fn count(&self, pred: impl Fn(PointFlag) -> bool) -> usize {
        self.flags.iter().filter(|&&f| pred(f)).count()
    }
}

/// Convexity tolerance on the smallest eigenvalue.
fn convex_tol<T: Scalar>(lambda1: T) -> T {
    T::lit(1e-8) * (T::one() + lambda1.abs())
}

pub fn b_field<T: Scalar>(field: &ScalarField<T>) -> Result<BField<T>> {
    let per_point: Vec<(T, PointFlag, Option<SpectralPoint<T>>)> = (0..field.len())
        .into_par_iter()
        .map(|lin| {
            let idx = field.unravel(lin);
            if !field.has_margin(&idx, 1) {
                return Ok((T::nan(), PointFlag::Boundary, None));
            }
            let sp = eigen_sym(&fd_hessian(field, &idx)?)?;
            let l1 = sp.largest();
            if l1 <= T::zero() || sp.smallest() < -convex_tol(l1) {
                return Ok((T::nan(), PointFlag::NonConvex, Some(sp)));
            }
            let m = sp.top_multiplicity();
            let flag = if m > 1 { PointFlag::Multiple(m) } else { PointFlag::Simple };
            Ok((l1.ln(), flag, Some(sp)))
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(per_point.len());
    let mut flags = Vec::with_capacity(per_point.len());
    let mut spectra = Vec::with_capacity(per_point.len());
    for (v, f, s) in per_point {
        values.push(v);
        flags.push(f);
        spectra.push(s);
    }
    Ok(BField { b: field.with_values(values)?, flags, spectra })
}

/// Per-node ingredients of the Jacobi inequality, in the eigenframe of `D²u`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiPoint<T> {
    pub index: Vec<usize>,
    pub lambda: EigenTuple<T>,
    /// `Σ_i F^{ii} b_ii`
    pub drift: T,
    /// `Σ_i F^{ii} b_i²`
    pub energy: T,
}

#[derive(Debug, Clone)]
pub struct JacobiTerms<T> {
    pub points: Vec<JacobiPoint<T>>,
    pub excluded_multiple: usize,
    pub excluded_other: usize,
}

/// A node is admitted when every node of its `b` Hessian stencil is simple
/// and strictly positive definite.
pub fn jacobi_terms<T: Scalar>(field: &ScalarField<T>, op: &QuotientOperator) -> Result<JacobiTerms<T>> {
    let n = field.n();
    if op.n() != n {
        return Err(LabError::Domain(format!("operator dimension {} does not match field dimension {n}", op.n())));
    }
    op.require_estimate_regime()?;
    let bf = b_field(field)?;
    let stencil = hessian_stencil(n);

    enum Outcome<T> {
        Admitted(JacobiPoint<T>),
        Multiple,
        Other,
    }
    let outcomes: Vec<Outcome<T>> = (0..field.len())
        .into_par_iter()
        .map(|lin| {
            let idx = field.unravel(lin);
            if !field.has_margin(&idx, 2) {
                return Ok(Outcome::Other);
            }
            let mut multiple = false;
            for off in &stencil {
                let j = field.linear(&field.offset(&idx, off).unwrap());
                match bf.flags[j] {
                    PointFlag::Simple => {}
                    PointFlag::Multiple(_) => multiple = true,
                    _ => return Ok(Outcome::Other),
                }
            }
            if multiple {
                return Ok(Outcome::Multiple);
            }
            let sp = bf.spectra[lin].as_ref().expect("simple nodes carry spectra");
            if sp.smallest() <= T::zero() {
                return Ok(Outcome::Other);
            }
            let lambda = sp.tuple()?;
            let grad_f = op.grad_diag(&lambda)?;
            let db = fd_gradient(&bf.b, &idx)?;
            let d2b = fd_hessian(&bf.b, &idx)?;
            let mut drift = T::zero();
            let mut energy = T::zero();
            for i in 0..n {
                let e = sp.frame.column(i);
                let bi: T = e.iter().zip(&db).map(|(&x, &y)| x * y).sum();
                drift = drift + grad_f[i] * d2b.quad_form(&e);
                energy = energy + grad_f[i] * bi * bi;
            }
            Ok(Outcome::Admitted(JacobiPoint { index: idx, lambda, drift, energy }))
        })
        .collect::<Result<_>>()?;

    let mut terms = JacobiTerms { points: Vec::new(), excluded_multiple: 0, excluded_other: 0 };
    for o in outcomes {
        match o {
            Outcome::Admitted(p) => terms.points.push(p),
            Outcome::Multiple => terms.excluded_multiple += 1,
            Outcome::Other => terms.excluded_other += 1,
        }
    }
    Ok(terms)
}

#[derive(Debug, Clone)]
pub struct JacobiReport<T> {
    pub c: T,
    pub big_c: T,
    /// `min_x Σ F^{ii}b_ii − cΣ F^{ii}b_i² + C`
    pub min_gap: T,
    pub witness: Vec<usize>,
    pub admitted: usize,
    pub excluded_multiple: usize,
    pub excluded_other: usize,
    /// Largest `c` keeping the minimum nonnegative for this `C`; `None`
    /// when no `c` works.
    pub c_max: Option<T>,
}

impl<T: Scalar> JacobiTerms<T> {
    pub fn report(&self, c: T, big_c: T) -> Result<JacobiReport<T>> {
        let first = self.points.first().ok_or_else(|| LabError::EmptyDomain("no admitted points".into()))?;
        let mut min_gap = T::infinity();
        let mut witness = first.index.clone();
        for p in &self.points {
            let g = p.drift - c * p.energy + big_c;
            if g < min_gap {
                min_gap = g;
                witness = p.index.clone();
            }
        }
        Ok(JacobiReport {
            c,
            big_c,
            min_gap,
            witness,
            admitted: self.points.len(),
            excluded_multiple: self.excluded_multiple,
            excluded_other: self.excluded_other,
            c_max: self.max_c(big_c),
        })
    }

    pub fn max_c(&self, big_c: T) -> Option<T> {
        let mut best = T::infinity();
        for p in &self.points {
            let a = p.drift + big_c;
            if p.energy > T::zero() {
                best = best.min(a / p.energy);
            } else if a < T::zero() {
                return None;
            }
        }
        Some(best)
    }
}

pub fn jacobi_gap<T: Scalar>(field: &ScalarField<T>, op: &QuotientOperator, c: T, big_c: T) -> Result<JacobiReport<T>> {
    jacobi_terms(field, op)?.report(c, big_c)
}

/// Sup over admitted nodes of `max(0, −f₁₁)/λ₁ + 2f₁²/(λ₁ f)`, with `f = F(D²u)`
/// and derivatives taken along the top eigenvector. This is the part of
/// the Jacobi inequality that depends on the right-hand side.
pub fn empirical_forcing<T: Scalar>(field: &ScalarField<T>, op: &QuotientOperator) -> Result<T> {
    let n = field.n();
    let bf = b_field(field)?;
    let f_values: Vec<T> = (0..field.len())
        .into_par_iter()
        .map(|lin| match (&bf.flags[lin], &bf.spectra[lin]) {
            (PointFlag::Simple | PointFlag::Multiple(_), Some(sp)) if sp.smallest() > T::zero() => {
                sp.tuple().and_then(|l| op.value(&l)).unwrap_or(T::nan())
            }
            _ => T::nan(),
        })
        .collect();
    let f_field = field.with_values(f_values)?;
    let stencil = hessian_stencil(n);
    let sup = (0..field.len())
        .into_par_iter()
        .filter_map(|lin| {
            let idx = field.unravel(lin);
            if !field.has_margin(&idx, 2) || bf.flags[lin] != PointFlag::Simple {
                return None;
            }
            if stencil.iter().any(|o| !f_field.at(&field.offset(&idx, o).unwrap()).is_finite()) {
                return None;
            }
            let sp = bf.spectra[lin].as_ref()?;
            let e1 = sp.frame.column(0);
            let l1 = sp.largest();
            let f = f_field.at(&idx);
            let df = fd_gradient(&f_field, &idx).ok()?;
            let d2f = fd_hessian(&f_field, &idx).ok()?;
            let f1: T = e1.iter().zip(&df).map(|(&x, &y)| x * y).sum();
            let f11 = d2f.quad_form(&e1);
            Some(T::zero().max(-f11) / l1 + T::lit(2.0) * f1 * f1 / (l1 * f))
        })
        .reduce(|| T::neg_infinity(), T::max);
    if sup == T::neg_infinity() {
        return Err(LabError::EmptyDomain("no admitted points for the forcing estimate".into()));
    }
    Ok(sup)
}
