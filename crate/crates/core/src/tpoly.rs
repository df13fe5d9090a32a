//! Integral-form Adomian recurrence over explicit polynomials in `t`.
//!
//! Each correction `u_k(x, t)` is kept as a general [`TPolynomial`] and
//! advanced by `u_{k+1} = int_0^t (alpha u_k,xx + beta A_k) dt'`, where the
//! time-level Adomian polynomial is
//! `A_k = sum_j (u_{k-j})_x sum_i u_i conj(u_{j-i})`. Nothing here assumes
//! that `u_k` is a single power of `t`; [`monomial_check`] measures it.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::adm::ModelParams;
use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec};

/// Coefficients at or below this sup-norm are treated as exact zeros.
pub const ZERO_THRESHOLD: f64 = 1e-300;

/// Sparse polynomial in `t` with field-valued coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TPolynomial {
    grid: GridSpec,
    terms: BTreeMap<usize, ComplexField>,
}

impl TPolynomial {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            terms: BTreeMap::new(),
        }
    }

    /// `field * t^degree`.
    pub fn monomial(degree: usize, field: ComplexField) -> Self {
        let mut p = Self::zero(*field.grid());
        p.accumulate(degree, field);
        p
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, degree: usize) -> Option<&ComplexField> {
        self.terms.get(&degree)
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &ComplexField)> {
        self.terms.iter().map(|(&d, f)| (d, f))
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    /// Adds `field * t^degree` and drops the entry if it cancels to zero.
    pub fn accumulate(&mut self, degree: usize, field: ComplexField) {
        assert_eq!(&self.grid, field.grid(), "fields live on different grids");
        let sum = match self.terms.remove(&degree) {
            Some(existing) => &existing + &field,
            None => field,
        };
        if sum.sup_norm() > ZERO_THRESHOLD {
            self.terms.insert(degree, sum);
        }
    }

    fn ensure_same_grid(&self, other: &TPolynomial) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn map_terms(&self, f: impl Fn(&ComplexField) -> Result<ComplexField>) -> Result<Self> {
        let mut out = Self::zero(self.grid);
        for (&d, c) in &self.terms {
            out.accumulate(d, f(c)?);
        }
        Ok(out)
    }

    pub fn add(&self, other: &TPolynomial) -> Result<TPolynomial> {
        self.ensure_same_grid(other)?;
        let mut out = self.clone();
        for (&d, c) in &other.terms {
            out.accumulate(d, c.clone());
        }
        Ok(out)
    }

    /// Cauchy product; coefficients multiply pointwise in `x`.
    pub fn mul(&self, other: &TPolynomial) -> Result<TPolynomial> {
        self.ensure_same_grid(other)?;
        let mut out = Self::zero(self.grid);
        for (&da, a) in &self.terms {
            for (&db, b) in &other.terms {
                out.accumulate(da + db, a * b);
            }
        }
        Ok(out)
    }

    /// Cauchy product `Re(self * conj(other))`, stored with zero imaginary part.
    pub fn re_conj_mul(&self, other: &TPolynomial) -> Result<TPolynomial> {
        self.ensure_same_grid(other)?;
        let mut out = Self::zero(self.grid);
        for (&da, a) in &self.terms {
            for (&db, b) in &other.terms {
                out.accumulate(da + db, a.re_conj_product(b).to_complex());
            }
        }
        Ok(out)
    }

    pub fn conj(&self) -> TPolynomial {
        self.map_terms(|c| Ok(c.conj()))
            .expect("conjugation cannot fail")
    }

    pub fn scale(&self, s: Complex64) -> TPolynomial {
        self.map_terms(|c| Ok(c.scale(s)))
            .expect("scaling cannot fail")
    }

    /// Spatial derivative of every coefficient.
    pub fn diff_x(&self, order: u32) -> Result<TPolynomial> {
        self.map_terms(|c| c.diff(order))
    }

    /// `int_0^t p(t') dt'`: degree `m` maps to `m + 1` with weight `1/(m+1)`.
    pub fn integrate_t(&self) -> TPolynomial {
        let mut out = Self::zero(self.grid);
        for (&d, c) in &self.terms {
            out.accumulate(d + 1, c.scale(Complex64::new(1.0 / (d as f64 + 1.0), 0.0)));
        }
        out
    }

    pub fn evaluate(&self, t: f64) -> ComplexField {
        let mut acc = ComplexField::zeros(self.grid);
        for (&d, c) in &self.terms {
            acc.add_scaled(Complex64::new(t.powi(d as i32), 0.0), c);
        }
        acc
    }
}

/// Time-level Adomian polynomial `A_k` built from `u_0..u_k`.
pub fn time_level_adomian(u_terms: &[TPolynomial], k: usize) -> Result<TPolynomial> {
    if u_terms.len() < k + 1 {
        return Err(Error::InsufficientCoefficients {
            order: k,
            needed: k + 1,
            got: u_terms.len(),
        });
    }
    let grid = *u_terms[0].grid();
    let mut out = TPolynomial::zero(grid);
    for j in 0..=k {
        // Expansion of |u|^2: the i and j-i terms are conjugate pairs.
        let mut inner = TPolynomial::zero(grid);
        for i in 0..=j / 2 {
            let l = j - i;
            let pair = u_terms[i].re_conj_mul(&u_terms[l])?;
            let weight = if i < l { 2.0 } else { 1.0 };
            inner = inner.add(&pair.scale(Complex64::new(weight, 0.0)))?;
        }
        out = out.add(&u_terms[k - j].diff_x(1)?.mul(&inner)?)?;
    }
    Ok(out)
}

/// One integral-form step: `u_{k+1} = int_0^t (alpha u_k,xx + beta A_k) dt'`
/// with `u_k` the last entry of `u_terms`.
pub fn adm_step_integral(
    u_terms: &[TPolynomial],
    a_k: &TPolynomial,
    params: &ModelParams,
) -> Result<TPolynomial> {
    let u_k = u_terms
        .last()
        .ok_or_else(|| Error::InvalidParams("integral step needs at least u_0".into()))?;
    if u_k.grid() != a_k.grid() {
        return Err(Error::GridMismatch);
    }
    let integrand = u_k
        .diff_x(2)?
        .scale(params.alpha())
        .add(&a_k.scale(params.beta()))?;
    Ok(integrand.integrate_t())
}

/// Runs the integral-form recurrence from `u_0 = u0` through `u_order`.
pub fn integral_pipeline(
    u0: &ComplexField,
    params: &ModelParams,
    order: usize,
) -> Result<Vec<TPolynomial>> {
    let mut terms = vec![TPolynomial::monomial(0, u0.clone())];
    for k in 0..order {
        let a_k = time_level_adomian(&terms, k)?;
        let next = adm_step_integral(&terms, &a_k, params)?;
        if next.terms().any(|(_, c)| !c.is_finite()) {
            return Err(Error::NonFiniteCoefficient { order: k + 1 });
        }
        terms.push(next);
    }
    Ok(terms)
}

/// Size of every coefficient of `u_k` other than `t^k`, relative to the
/// `t^k` coefficient. Zero for the zero polynomial, infinite when only
/// off-degree terms are present.
pub fn monomial_check(u_k: &TPolynomial, k: usize) -> f64 {
    if u_k.is_zero() {
        return 0.0;
    }
    let stray = u_k
        .terms()
        .filter(|&(d, _)| d != k)
        .map(|(_, c)| c.sup_norm())
        .fold(0.0, f64::max);
    match u_k.coefficient(k) {
        Some(main) => stray / main.sup_norm(),
        None => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sech_profile;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn grid() -> GridSpec {
        GridSpec::new(0.0, 2.0 * PI, 64).unwrap()
    }

    #[test]
    fn canonical_form_drops_cancelled_terms() {
        let g = grid();
        let f = ComplexField::plane_wave(g, c(1.0, 0.0), 1.0);
        let p = TPolynomial::monomial(2, f.clone());
        let q = TPolynomial::monomial(2, -&f);
        assert!(p.add(&q).unwrap().is_zero());
        assert!(TPolynomial::monomial(3, ComplexField::zeros(g)).is_zero());
    }

    #[test]
    fn product_and_integration_degrees() {
        let g = grid();
        let one = ComplexField::constant(g, c(1.0, 0.0));
        // (1 + t) * (1 + t) = 1 + 2t + t^2
        let mut p = TPolynomial::monomial(0, one.clone());
        p.accumulate(1, one.clone());
        let sq = p.mul(&p).unwrap();
        assert_eq!(sq.degree(), Some(2));
        assert!((sq.coefficient(1).unwrap().values()[0] - c(2.0, 0.0)).norm() < 1e-15);
        let int = sq.integrate_t();
        assert_eq!(int.degree(), Some(3));
        assert!((int.coefficient(3).unwrap().values()[0] - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((int.evaluate(1.0).values()[7] - c(7.0 / 3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn constant_solution_has_no_correction() {
        let g = grid();
        let u0 = TPolynomial::monomial(0, ComplexField::constant(g, c(0.4, -0.2)));
        let p = ModelParams::from_eq3(5.0, 10.0).unwrap();
        let a0 = time_level_adomian(std::slice::from_ref(&u0), 0).unwrap();
        let u1 = adm_step_integral(&[u0], &a0, &p).unwrap();
        let size = u1.terms().map(|(_, f)| f.sup_norm()).fold(0.0, f64::max);
        assert!(size < 1e-13);
    }

    #[test]
    fn linear_plane_wave_step() {
        let g = grid();
        let kappa = 3.0;
        let p = ModelParams::new(c(0.5, 2.0), c(0.0, 0.0)).unwrap();
        let u0 = TPolynomial::monomial(0, ComplexField::plane_wave(g, c(1.0, 0.0), kappa));
        let a0 = TPolynomial::zero(g);
        let u1 = adm_step_integral(&[u0], &a0, &p).unwrap();
        assert_eq!(u1.terms().count(), 1);
        let expect = ComplexField::plane_wave(g, -p.alpha() * kappa * kappa, kappa);
        assert!(u1.coefficient(1).unwrap().relative_distance(&expect) < 1e-13);
    }

    #[test]
    fn pipeline_terms_are_monomials() {
        let g = GridSpec::new(-64.0, 128.0, 256).unwrap();
        let u0 = sech_profile(g, 1.0, 0.5, 0.0, 0.0);
        let p = ModelParams::from_eq3(5.0, 10.0).unwrap();
        let terms = integral_pipeline(&u0, &p, 8).unwrap();
        for (k, u) in terms.iter().enumerate() {
            assert!(monomial_check(u, k) <= 1e-12, "u_{k}");
            assert_eq!(u.degree(), Some(k));
        }
    }

    #[test]
    fn monomial_check_detects_corruption() {
        let g = GridSpec::new(-64.0, 128.0, 256).unwrap();
        let u0 = sech_profile(g, 1.0, 0.5, 0.0, 0.0);
        let p = ModelParams::from_eq3(5.0, 10.0).unwrap();
        let terms = integral_pipeline(&u0, &p, 3).unwrap();
        assert_eq!(monomial_check(&terms[0], 0), 0.0);

        let main = terms[3].coefficient(3).unwrap().clone();
        let mut corrupted = terms[3].clone();
        corrupted.accumulate(2, main.scale(c(1e-3, 0.0)));
        let score = monomial_check(&corrupted, 3);
        assert!(score >= 1e-3 * (1.0 - 1e-12), "score {score}");

        assert_eq!(monomial_check(&TPolynomial::zero(g), 4), 0.0);
        assert_eq!(
            monomial_check(&TPolynomial::monomial(1, main), 2),
            f64::INFINITY
        );
    }

    #[test]
    fn step_rejects_grid_mismatch() {
        let p = ModelParams::from_eq3(1.0, 1.0).unwrap();
        let u0 = TPolynomial::monomial(0, ComplexField::constant(grid(), c(1.0, 0.0)));
        let other = TPolynomial::zero(GridSpec::new(0.0, 1.0, 8).unwrap());
        assert_eq!(
            adm_step_integral(&[u0], &other, &p),
            Err(Error::GridMismatch)
        );
    }
}
