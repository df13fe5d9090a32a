//! Coefficient-level Adomian decomposition for `u_t = alpha u_xx + beta |u|^2 u_x`.
//!
//! Writing the solution as `u(x, t) = sum_j v_j(x) t^j`, the nonlinearity
//! `|u|^2 u_x` expands into `sum_n B_n(x) t^n` with
//!
//! ```text
//! B_n = sum_{j=0}^{n} v'_{n-j} sum_{k=0}^{j} v_k conj(v_{j-k})
//! ```
//!
//! and the coefficients obey `v_{k+1} = (alpha v_k'' + beta B_k) / (k + 1)`.
//! The series produced this way is the Taylor expansion of the solution
//! about `t = 0`; see [`crate::tpoly`] for the integral-form recurrence that
//! arrives at the same coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec, RealField};

/// Complex coefficients of `u_t = alpha u_xx + beta |u|^2 u_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    alpha: Complex64,
    beta: Complex64,
}

impl ModelParams {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParams("coefficients must be finite".into()));
        }
        if alpha == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidParams("alpha must be nonzero".into()));
        }
        Ok(Self { alpha, beta })
    }

    /// `i u_t + a u_xx + i b |u|^2 u_x = 0`, i.e. `alpha = i a`, `beta = -b`.
    pub fn from_eq1(a: f64, b: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, a), Complex64::new(-b, 0.0))
    }

    /// `u_t + i a u_xx - b |u|^2 u_x = 0`, i.e. `alpha = -i a`, `beta = b`.
    pub fn from_eq3(a: f64, b: f64) -> Result<Self> {
        Self::new(Complex64::new(0.0, -a), Complex64::new(b, 0.0))
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    /// Parameters of the same equation in the time variable `c t`.
    pub fn time_scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.alpha * c, self.beta * c)
    }

    /// Right-hand side `alpha u_xx + beta |u|^2 u_x`.
    pub fn rhs(&self, u: &ComplexField) -> ComplexField {
        let uxx = u.diff(2).expect("order 2 is supported");
        let ux = u.diff(1).expect("order 1 is supported");
        let (alpha, beta) = (self.alpha, self.beta);
        let mut out = uxx.scale(alpha);
        let nonlinear = u.zip_with(&ux, |z, dz| z.norm_sqr() * dz);
        out.add_scaled(beta, &nonlinear);
        out
    }
}

/// Truncated t-power series `sum_{j<=N} v_j(x) t^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSeries {
    params: ModelParams,
    coeffs: Vec<ComplexField>,
}

impl TaylorSeries {
    pub fn new(params: ModelParams, coeffs: Vec<ComplexField>) -> Result<Self> {
        let first = coeffs.first().ok_or_else(|| {
            Error::InvalidParams("a series needs at least one coefficient".into())
        })?;
        for c in &coeffs[1..] {
            first.ensure_same_grid(c)?;
        }
        Ok(Self { params, coeffs })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn coeffs(&self) -> &[ComplexField] {
        &self.coeffs
    }

    pub fn coefficient(&self, j: usize) -> Option<&ComplexField> {
        self.coeffs.get(j)
    }

    /// Highest power of `t` kept.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn grid(&self) -> &GridSpec {
        self.coeffs[0].grid()
    }

    /// Horner evaluation of the partial sum through `t^upto`.
    pub fn evaluate(&self, t: f64, upto: usize) -> Result<ComplexField> {
        if upto > self.order() {
            return Err(Error::OrderOutOfRange {
                requested: upto,
                available: self.order(),
            });
        }
        let mut acc = self.coeffs[upto].clone();
        for c in self.coeffs[..upto].iter().rev() {
            acc = acc.zip_with(c, |a, v| a * t + v);
        }
        Ok(acc)
    }

    /// Largest coefficient-wise relative sup-norm distance to `other`,
    /// each order normalized by the sup-norm of `other`'s coefficient.
    pub fn max_relative_deviation(&self, other: &TaylorSeries) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.relative_distance(b))
            .fold(0.0, f64::max)
    }
}

/// Incremental evaluator of the Adomian polynomials `B_n`.
///
/// Derivatives `v_j'` and inner convolutions `C_j = sum_k v_k conj(v_{j-k})`
/// are computed once when `v_j` is pushed and reused by every later `B_n`.
#[derive(Debug, Clone)]
pub struct AdomianSweep {
    coeffs: Vec<ComplexField>,
    derivs: Vec<ComplexField>,
    inner: Vec<RealField>,
}

impl AdomianSweep {
    pub fn new() -> Self {
        Self {
            coeffs: Vec::new(),
            derivs: Vec::new(),
            inner: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn push(&mut self, v: ComplexField) -> Result<()> {
        if let Some(first) = self.coeffs.first() {
            first.ensure_same_grid(&v)?;
        }
        self.derivs.push(v.diff(1)?);
        self.coeffs.push(v);
        let j = self.coeffs.len() - 1;
        self.inner.push(modulus_coefficient(&self.coeffs, j));
        Ok(())
    }

    pub fn derivative(&self, j: usize) -> Option<&ComplexField> {
        self.derivs.get(j)
    }

    /// `B_n` from the cached pieces.
    pub fn polynomial(&self, n: usize) -> Result<ComplexField> {
        if n >= self.coeffs.len() {
            return Err(Error::InsufficientCoefficients {
                order: n,
                needed: n + 1,
                got: self.coeffs.len(),
            });
        }
        let mut out = ComplexField::zeros(*self.coeffs[0].grid());
        for j in 0..=n {
            out = &out + &self.derivs[n - j].real_times(&self.inner[j]);
        }
        Ok(out)
    }
}

impl Default for AdomianSweep {
    fn default() -> Self {
        Self::new()
    }
}

/// `C_j = sum_{k=0}^{j} v_k conj(v_{j-k})`, the t^j coefficient of `|u|^2`.
///
/// The terms `k` and `j - k` are complex conjugates, so `C_j` is real and
/// is summed pairwise as `2 Re(v_k conj(v_{j-k}))`.
pub fn modulus_coefficient(v: &[ComplexField], j: usize) -> RealField {
    let mut acc = RealField::zeros(*v[0].grid());
    for k in 0..=j / 2 {
        let l = j - k;
        if k < l {
            acc.add_scaled(2.0, &v[k].re_conj_product(&v[l]));
        } else {
            acc.add_scaled(1.0, &v[k].re_conj_product(&v[k]));
        }
    }
    acc
}

/// Adomian polynomial `B_n` of `|u|^2 u_x` for the coefficients `v_0..`.
pub fn adomian_polynomial(v: &[ComplexField], n: usize) -> Result<ComplexField> {
    if v.len() < n + 1 {
        return Err(Error::InsufficientCoefficients {
            order: n,
            needed: n + 1,
            got: v.len(),
        });
    }
    let mut sweep = AdomianSweep::new();
    for c in &v[..=n] {
        sweep.push(c.clone())?;
    }
    sweep.polynomial(n)
}

/// `v_{k+1} = (alpha v_k'' + beta B_k) / (k + 1)`.
pub fn taylor_step(
    v_k: &ComplexField,
    b_k: &ComplexField,
    k: usize,
    params: &ModelParams,
) -> Result<ComplexField> {
    v_k.ensure_same_grid(b_k)?;
    let mut next = v_k.diff(2)?.scale(params.alpha());
    next.add_scaled(params.beta(), b_k);
    Ok(next.scale(Complex64::new(1.0 / (k as f64 + 1.0), 0.0)))
}

/// Taylor coefficients `v_0 = u0, v_1, ..., v_order` of the solution.
pub fn build_series(u0: &ComplexField, params: &ModelParams, order: usize) -> Result<TaylorSeries> {
    if !u0.is_finite() {
        return Err(Error::NonFiniteCoefficient { order: 0 });
    }
    let mut sweep = AdomianSweep::new();
    let mut coeffs = vec![u0.clone()];
    sweep.push(u0.clone())?;
    for k in 0..order {
        let b_k = sweep.polynomial(k)?;
        let next = taylor_step(&coeffs[k], &b_k, k, params)?;
        if !next.is_finite() {
            return Err(Error::NonFiniteCoefficient { order: k + 1 });
        }
        sweep.push(next.clone())?;
        coeffs.push(next);
    }
    TaylorSeries::new(*params, coeffs)
}
