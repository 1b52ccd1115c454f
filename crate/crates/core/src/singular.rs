//! The explicit family `u^σ(x) = (1 + x₁²)(σ + |x'|²)^{α/2}`, `x' = (x₂, …, x_n)`,
//! with `α = 2 − 2/(n − k)` and `1 <= k <= n − 3`.
//!
//! At `σ = 0` the limit is Lipschitz but its gradient is only `C^{α−1}` across
//! the `x₁` axis. The routines here evaluate the closed-form jet, the
//! quotient `σ_n/σ_k` of its Hessian, a sampled convexity radius, the
//! gradient Hölder exponent and the `σ → 0` limit.
//!
//! The family is rotationally symmetric in `x'`, so every sampling routine
//! works on the half-plane `x = (x₁, ρ, 0, …, 0)`, `ρ >= 0`.

use rayon::prelude::*;

use crate::error::{domain, LabError, Result};
use crate::fields::eigen_sym;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::stats::log_log_slope;
use crate::symfun::{elementary, EigenTuple};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularFamily<T> {
    n: usize,
    k: usize,
    sigma: T,
}

/// Closed-form value, gradient and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    pub u: T,
    pub grad: Vec<T>,
    pub hess: Matrix<T>,
}

/// `b^e` through `exp(e ln b)`; zero for `b = 0` and `e > 0`.
fn pow<T: Scalar>(base: T, e: T) -> T {
    if base == T::zero() {
        return if e > T::zero() { T::zero() } else { T::infinity() };
    }
    (e * base.ln()).exp()
}

impl<T: Scalar> SingularFamily<T> {
    pub fn new(n: usize, k: usize, sigma: T) -> Result<Self> {
        if n < 4 {
            return Err(LabError::Unsupported(format!(
                "the family needs 1 <= k <= n-3, which is vacuous for n = {n}"
            )));
        }
        if k < 1 || k + 3 > n {
            return Err(domain!("the family needs 1 <= k <= n-3, got n = {n}, k = {k}"));
        }
        if !(sigma >= T::zero() && sigma.is_finite()) {
            return Err(domain!("sigma must be finite and nonnegative, got {sigma}"));
        }
        Ok(Self { n, k, sigma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn with_sigma(&self, sigma: T) -> Result<Self> {
        Self::new(self.n, self.k, sigma)
    }

    /// `2 − 2/(n − k)`.
    pub fn alpha(&self) -> T {
        T::lit(2.0) - T::lit(2.0) / T::from_usize_lossy(self.n - self.k)
    }

    /// Exponent of `σ + |x'|²` left in `σ_n/σ_k`: `(n−k)α/2 − (n−k−1)`.
    pub fn exponent_cancellation(&self) -> T {
        let m = T::from_usize_lossy(self.n - self.k);
        m * self.alpha() / T::lit(2.0) - (m - T::one())
    }

    /// Sharp gradient Hölder exponent `α − 1 = 1 − 2/(n−k)`.
    pub fn holder_threshold(&self) -> T {
        self.alpha() - T::one()
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n {
            return Err(domain!("point has {} coordinates, family lives in dimension {}", x.len(), self.n));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(domain!("point coordinates must be finite"));
        }
        Ok(())
    }

    fn s(&self, x: &[T]) -> T {
        self.sigma + x[1..].iter().map(|&v| v * v).sum::<T>()
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        self.check_point(x)?;
        Ok((T::one() + x[0] * x[0]) * pow(self.s(x), self.alpha() / T::lit(2.0)))
    }

    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_point(x)?;
        let a = self.alpha();
        let s = self.s(x);
        let two = T::lit(2.0);
        let mut g = vec![T::zero(); self.n];
        g[0] = two * x[0] * pow(s, a / two);
        if s > T::zero() {
            let p = pow(s, a / two - T::one());
            let lead = (T::one() + x[0] * x[0]) * a * p;
            for i in 1..self.n {
                g[i] = lead * x[i];
            }
        }
        Ok(g)
    }

    pub fn hessian(&self, x: &[T]) -> Result<Matrix<T>> {
        self.check_point(x)?;
        let s = self.s(x);
        if s == T::zero() {
            return Err(LabError::SingularPoint("second derivatives are unbounded on the axis x' = 0 when sigma = 0".into()));
        }
        let a = self.alpha();
        let two = T::lit(2.0);
        let w = T::one() + x[0] * x[0];
        let p0 = pow(s, a / two);
        let p1 = pow(s, a / two - T::one());
        let p2 = pow(s, a / two - two);
        let mut h = Matrix::zeros(self.n);
        h[(0, 0)] = two * p0;
        for i in 1..self.n {
            let v = two * a * x[0] * x[i] * p1;
            h[(0, i)] = v;
            h[(i, 0)] = v;
            h[(i, i)] = w * p2 * (a * (a - two) * x[i] * x[i] + a * s);
            for j in (i + 1)..self.n {
                let v = w * p2 * a * (a - two) * x[i] * x[j];
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        Ok(h)
    }

    pub fn eval_jet(&self, x: &[T]) -> Result<Jet<T>> {
        Ok(Jet { u: self.value(x)?, grad: self.gradient(x)?, hess: self.hessian(x)? })
    }

    /// `σ_n(D²u^σ)/σ_k(D²u^σ)` at `x`.
    pub fn quotient_f(&self, x: &[T]) -> Result<T> {
        let sp = eigen_sym(&self.hessian(x)?)?;
        let lambda = EigenTuple::new(sp.eigenvalues)?;
        Ok(elementary(&lambda, self.n)? / elementary(&lambda, self.k)?)
    }

    /// `(x₁, ρ, 0, …, 0)`.
    pub fn plane_point(&self, x1: T, rho: T) -> Vec<T> {
        let mut x = vec![T::zero(); self.n];
        x[0] = x1;
        x[1] = rho;
        x
    }
}

/// Fourth-order finite-difference check of the closed-form jet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JetResidual<T> {
    pub grad: T,
    pub hess: T,
    /// `max(grad, hess) / max(1, |∇u|∞, |D²u|∞)`.
    pub relative: T,
}

pub fn fd_jet_check<T: Scalar>(fam: &SingularFamily<T>, x: &[T], h: T) -> Result<JetResidual<T>> {
    fam.check_point(x)?;
    if !(h > T::zero()) {
        return Err(domain!("step must be positive"));
    }
    let rho = x[1..].iter().map(|&v| v * v).sum::<T>().sqrt();
    if fam.sigma == T::zero() && rho < T::lit(10.0) * h {
        return Err(LabError::Conditioning(format!(
            "point is {rho} from the singular axis, closer than 10 steps of {h}"
        )));
    }
    let n = fam.n;
    let jet = fam.eval_jet(x)?;
    let u = |d: &[(usize, T)]| -> Result<T> {
        let mut y = x.to_vec();
        for &(a, t) in d {
            y[a] = y[a] + t;
        }
        fam.value(&y)
    };
    let (one, two, eight, twelve) = (T::one(), T::lit(2.0), T::lit(8.0), T::lit(12.0));
    let mut grad_err = T::zero();
    let mut hess_err = T::zero();
    let u0 = u(&[])?;
    for a in 0..n {
        let (p1, m1, p2, m2) = (u(&[(a, h)])?, u(&[(a, -h)])?, u(&[(a, two * h)])?, u(&[(a, -two * h)])?);
        let d1 = (eight * (p1 - m1) - (p2 - m2)) / (twelve * h);
        grad_err = grad_err.max((d1 - jet.grad[a]).abs());
        let d2 = (T::lit(16.0) * (p1 + m1) - T::lit(30.0) * u0 - (p2 + m2)) / (twelve * h * h);
        hess_err = hess_err.max((d2 - jet.hess[(a, a)]).abs());
        for b in (a + 1)..n {
            let mixed = |t: T| -> Result<T> {
                Ok((u(&[(a, t), (b, t)])? - u(&[(a, t), (b, -t)])? - u(&[(a, -t), (b, t)])? + u(&[(a, -t), (b, -t)])?)
                    / (T::lit(4.0) * t * t))
            };
            let d = (T::lit(4.0) * mixed(h)? - mixed(two * h)?) / T::lit(3.0);
            hess_err = hess_err.max((d - jet.hess[(a, b)]).abs());
        }
    }
    let gmax = jet.grad.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let scale = one.max(gmax).max(jet.hess.max_abs());
    Ok(JetResidual { grad: grad_err, hess: hess_err, relative: grad_err.max(hess_err) / scale })
}

/// Outcome of the sampled convexity search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexRadius<T> {
    /// Largest sampled radius whose closed ball contains only convex samples.
    pub radius: T,
    /// Cell size of the `(x₁, ρ)` sampling grid.
    pub cell: T,
    /// Smallest radius at which a non-convex sample was seen, if any.
    pub first_failure: Option<T>,
}

/// Samples `|x| <= r_max` on a `(x₁, ρ)` grid with `resolution` cells per
/// `r_max`; at `σ = 0` nodes with `ρ < 10` cells are skipped.
pub fn convex_radius<T: Scalar>(fam: &SingularFamily<T>, resolution: usize, r_max: T) -> Result<ConvexRadius<T>> {
    if resolution < 2 {
        return Err(domain!("resolution must be at least 2"));
    }
    let cell = r_max / T::from_usize_lossy(resolution);
    let guard = if fam.sigma == T::zero() { 10 } else { 0 };
    // u is even in x₁, so x₁ >= 0 suffices
    let samples: Vec<(T, bool)> = (0..=resolution)
        .into_par_iter()
        .flat_map_iter(|i| (guard..=resolution).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let (x1, rho) = (cell * T::from_usize_lossy(i), cell * T::from_usize_lossy(j));
            let r = (x1 * x1 + rho * rho).sqrt();
            (r <= r_max * (T::one() + T::epsilon())).then_some((x1, rho, r))
        })
        .map(|(x1, rho, r)| {
            let hess = fam.hessian(&fam.plane_point(x1, rho))?;
            let sp = eigen_sym(&hess)?;
            Ok((r, sp.smallest() >= -T::lit(1e-12) * hess.max_abs()))
        })
        .collect::<Result<_>>()?;
    let first_failure = samples.iter().filter(|s| !s.1).map(|s| s.0).fold(None, |m: Option<T>, r| Some(m.map_or(r, |m| m.min(r))));
    let radius = samples
        .iter()
        .filter(|s| first_failure.is_none_or(|f| s.0 < f))
        .map(|s| s.0)
        .fold(T::zero(), T::max);
    Ok(ConvexRadius { radius, cell, first_failure })
}

/// Fit of `ln|Du(0, r e₂) − Du(0)|` against `ln r`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderEstimate<T> {
    pub radii: Vec<T>,
    pub increments: Vec<T>,
    /// The fitted slope, which estimates the gradient Hölder exponent.
    pub exponent: T,
    /// `1 − 2/(n − k)`.
    pub threshold: T,
}

pub fn holder_estimate<T: Scalar>(fam: &SingularFamily<T>, radii: &[T]) -> Result<HolderEstimate<T>> {
    if fam.sigma != T::zero() {
        return Err(LabError::Precondition("the Hölder estimate is taken on the sigma = 0 limit".into()));
    }
    if radii.len() < 3 {
        return Err(LabError::InsufficientData(format!("need at least 3 radii, got {}", radii.len())));
    }
    if radii.iter().any(|&r| !(r > T::zero() && r.is_finite())) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(domain!("radii must be positive and strictly decreasing"));
    }
    let origin = fam.gradient(&vec![T::zero(); fam.n])?;
    let increments: Vec<T> = radii
        .iter()
        .map(|&r| {
            let g = fam.gradient(&fam.plane_point(T::zero(), r))?;
            Ok(g.iter().zip(&origin).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>().sqrt())
        })
        .collect::<Result<_>>()?;
    let exponent = log_log_slope(radii, &increments)?;
    Ok(HolderEstimate { radii: radii.to_vec(), increments, exponent, threshold: fam.holder_threshold() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityRow<T> {
    pub sigma: T,
    /// `sup |u^σ − u⁰|` over the ball.
    pub u_distance: T,
    /// `sup |f^σ − f⁰|` over the annulus `R/2 <= ρ <= R` inside the ball.
    pub f_distance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityReport<T> {
    pub radius: T,
    pub tolerance: T,
    pub rows: Vec<ViscosityRow<T>>,
    pub u_monotone: bool,
    pub f_monotone: bool,
    pub u_final_below: bool,
    pub f_final_below: bool,
}

impl<T: Scalar> ViscosityReport<T> {
    pub fn passes(&self) -> bool {
        self.u_monotone && self.f_monotone && self.u_final_below && self.f_final_below
    }
}

/// Compares `u^σ` and `f^σ` with their `σ = 0` limits on `B_R`, sampled
/// on a `(x₁, ρ)` grid of `resolution` cells per `R` that includes the axis.
pub fn viscosity_limit_check<T: Scalar>(
    n: usize,
    k: usize,
    sigmas: &[T],
    radius: T,
    resolution: usize,
    tolerance: T,
) -> Result<ViscosityReport<T>> {
    if sigmas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(domain!("sigma list must be strictly decreasing"));
    }
    if resolution < 2 || !(radius > T::zero()) {
        return Err(domain!("need a positive radius and at least 2 cells"));
    }
    let limit = SingularFamily::new(n, k, T::zero())?;
    let cell = radius / T::from_usize_lossy(resolution);
    let mut ball = Vec::new();
    for i in 0..=resolution {
        for j in 0..=resolution {
            let (x1, rho) = (cell * T::from_usize_lossy(i), cell * T::from_usize_lossy(j));
            if x1 * x1 + rho * rho <= radius * radius * (T::one() + T::epsilon()) {
                ball.push((x1, rho));
            }
        }
    }
    let half = radius / T::lit(2.0);
    let annulus: Vec<(T, T)> = ball.iter().copied().filter(|&(_, rho)| rho >= half).collect();
    let u0: Vec<T> = ball.iter().map(|&(a, b)| limit.value(&limit.plane_point(a, b))).collect::<Result<_>>()?;
    let f0: Vec<T> = annulus.iter().map(|&(a, b)| limit.quotient_f(&limit.plane_point(a, b))).collect::<Result<_>>()?;

    let rows: Vec<ViscosityRow<T>> = sigmas
        .par_iter()
        .map(|&sigma| {
            let fam = limit.with_sigma(sigma)?;
            let mut u_distance = T::zero();
            for (p, &base) in ball.iter().zip(&u0) {
                u_distance = u_distance.max((fam.value(&fam.plane_point(p.0, p.1))? - base).abs());
            }
            let mut f_distance = T::zero();
            for (p, &base) in annulus.iter().zip(&f0) {
                f_distance = f_distance.max((fam.quotient_f(&fam.plane_point(p.0, p.1))? - base).abs());
            }
            Ok(ViscosityRow { sigma, u_distance, f_distance })
        })
        .collect::<Result<_>>()?;
    let mono = |get: fn(&ViscosityRow<T>) -> T| rows.windows(2).all(|w| get(&w[1]) <= get(&w[0]));
    let below = |get: fn(&ViscosityRow<T>) -> T| rows.last().is_none_or(|r| get(r) < tolerance);
    Ok(ViscosityReport {
        radius,
        tolerance,
        u_monotone: mono(|r| r.u_distance),
        f_monotone: mono(|r| r.f_distance),
        u_final_below: below(|r| r.u_distance),
        f_final_below: below(|r| r.f_distance),
        rows,
    })
}

/// One sample of a profile export.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow<T> {
    pub x: Vec<T>,
    pub u: T,
    pub grad_norm: T,
    pub eigenvalues: Vec<T>,
    pub f: T,
}

/// Jet summary along `x = (x₁, ρ, 0, …)` for each `ρ`.
pub fn profile<T: Scalar>(fam: &SingularFamily<T>, x1: T, rhos: &[T]) -> Result<Vec<ProfileRow<T>>> {
    rhos.iter()
        .map(|&rho| {
            let x = fam.plane_point(x1, rho);
            let jet = fam.eval_jet(&x)?;
            let sp = eigen_sym(&jet.hess)?;
            let lambda = EigenTuple::new(sp.eigenvalues.clone())?;
            let f = elementary(&lambda, fam.n)? / elementary(&lambda, fam.k)?;
            Ok(ProfileRow {
                u: jet.u,
                grad_norm: jet.grad.iter().map(|&g| g * g).sum::<T>().sqrt(),
                eigenvalues: sp.eigenvalues,
                f,
                x,
            })
        })
        .collect()
}
