//! Periodic one-dimensional grids, sampled fields and spectral differentiation.
//!
//! Every field lives on a [`GridSpec`] with `n` equispaced samples over a
//! periodic interval of length `L`. Spatial derivatives are computed in
//! Fourier space, so they are exact (to round-off) for band-limited data.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use realfft::RealFftPlanner;

use crate::error::{Error, Result};

/// Fourier modes weaker than this fraction of the strongest mode are
/// zeroed before differentiating, so that round-off is not amplified by
/// repeated application of `k^2`.
pub const SPECTRAL_NOISE_FLOOR: f64 = 1e-13;

thread_local! {
    static PLANNER: RefCell<RealFftPlanner<f64>> = RefCell::new(RealFftPlanner::new());
}

/// Derivatives of the two real fields `re` and `im`, i.e. of `re + i im`
/// split into parts. The noise floor is taken relative to the strongest
/// mode of either part.
fn spectral_diff(
    grid: &GridSpec,
    re: &[f64],
    im: &[f64],
    order: u32,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.n();
    let multiplier = |m: usize| -> Complex64 {
        let k = grid.wavenumber(m);
        match order {
            // An odd derivative has no real-valued image of the Nyquist bin.
            1 if m == n / 2 => Complex64::new(0.0, 0.0),
            1 => Complex64::new(0.0, k),
            _ => Complex64::new(-k * k, 0.0),
        }
    };
    if order != 1 && order != 2 {
        return Err(Error::UnsupportedDerivative(order));
    }

    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);

        let mut spectra = Vec::with_capacity(2);
        for part in [re, im] {
            let mut input = part.to_vec();
            let mut spectrum = forward.make_output_vec();
            forward
                .process(&mut input, &mut spectrum)
                .expect("buffer sizes come from the plan");
            spectra.push(spectrum);
        }
        let peak = spectra
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let floor = SPECTRAL_NOISE_FLOOR * peak;
        let scale = 1.0 / n as f64;

        let mut out = spectra.into_iter().map(|mut spectrum| {
            for (m, z) in spectrum.iter_mut().enumerate() {
                if z.norm() <= floor {
                    *z = Complex64::new(0.0, 0.0);
                } else {
                    *z *= multiplier(m) * scale;
                }
            }
            // The inverse real transform needs real DC and Nyquist bins.
            spectrum[0].im = 0.0;
            spectrum[n / 2].im = 0.0;
            let mut values = inverse.make_output_vec();
            inverse
                .process(&mut spectrum, &mut values)
                .expect("buffer sizes come from the plan");
            values
        });
        let dre = out.next().expect("two parts");
        let dim = out.next().expect("two parts");
        Ok((dre, dim))
    })
}

/// Derivatives of `p` and `q` computed exactly as `diff` computes the
/// real and imaginary parts of `p + i q`.
pub fn diff_pair(p: &RealField, q: &RealField, order: u32) -> Result<(RealField, RealField)> {
    if p.grid != q.grid {
        return Err(Error::GridMismatch);
    }
    let (dp, dq) = spectral_diff(&p.grid, &p.values, &q.values, order)?;
    Ok((
        RealField::from_raw(p.grid, dp),
        RealField::from_raw(q.grid, dq),
    ))
}

/// Periodic uniform grid `x_m = x0 + m * length / n`, `m = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x0: f64,
    length: f64,
    n: usize,
}

impl GridSpec {
    /// Validates and builds a grid. `n` must be a power of two no smaller than 8.
    pub fn new(x0: f64, length: f64, n: usize) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::InvalidGrid(format!("x0 must be finite (got {x0})")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite (got {length})"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "point count must be a power of two >= 8 (got {n})"
            )));
        }
        Ok(Self { x0, length, n })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `h = L / n`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn point(&self, m: usize) -> f64 {
        self.x0 + m as f64 * self.spacing()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |m| self.point(m))
    }

    /// Angular wavenumber of FFT bin `m` (standard FFT ordering).
    pub fn wavenumber(&self, m: usize) -> f64 {
        let n = self.n as isize;
        let m = m as isize;
        let signed = if m <= n / 2 { m } else { m - n };
        2.0 * PI * signed as f64 / self.length
    }

    /// Largest resolved wavenumber `pi / h`.
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    /// True when `exp(i k x)` is periodic on this grid, i.e. `k L` is a
    /// multiple of `2 pi` (to a relative tolerance of 1e-9).
    pub fn is_commensurate(&self, k: f64) -> bool {
        let cycles = k * self.length / (2.0 * PI);
        (cycles - cycles.round()).abs() <= 1e-9 * cycles.abs().max(1.0)
    }
}

/// Complex samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    /// Wraps samples, rejecting wrong lengths and non-finite values.
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some(m) = values.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFiniteSample {
                index: m,
                x: grid.point(m),
            });
        }
        Ok(Self { grid, values })
    }

    /// Unchecked constructor for results of internal arithmetic.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        Self::from_raw(grid, grid.points().map(f).collect())
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, Complex64::new(0.0, 0.0))
    }

    pub fn constant(grid: GridSpec, c: Complex64) -> Self {
        Self::from_raw(grid, vec![c; grid.n()])
    }

    /// `amplitude * exp(i k x)`.
    pub fn plane_wave(grid: GridSpec, amplitude: Complex64, k: f64) -> Self {
        Self::from_fn(grid, |x| amplitude * Complex64::from_polar(1.0, k * x))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }

    pub(crate) fn ensure_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Spectral derivative of order 1 or 2 of the periodic extension.
    ///
    /// Real and imaginary parts are transformed separately, so the result
    /// commutes exactly with conjugation and agrees bit-for-bit with
    /// [`diff_pair`] on the split parts.
    pub fn diff(&self, order: u32) -> Result<ComplexField> {
        let re: Vec<f64> = self.values.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.values.iter().map(|z| z.im).collect();
        let (dre, dim) = spectral_diff(&self.grid, &re, &im, order)?;
        Ok(Self::from_raw(
            self.grid,
            dre.into_iter()
                .zip(dim)
                .map(|(a, b)| Complex64::new(a, b))
                .collect(),
        ))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Discrete L2 norm `sqrt(h * sum |f|^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn conj(&self) -> ComplexField {
        self.map(|z| z.conj())
    }

    /// Pointwise `|f|^2` as a complex field with zero imaginary part.
    pub fn abs_sqr(&self) -> ComplexField {
        self.map(|z| Complex64::new(z.norm_sqr(), 0.0))
    }

    pub fn scale(&self, c: Complex64) -> ComplexField {
        self.map(|z| z * c)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexField {
        Self::from_raw(self.grid, self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn zip_with(
        &self,
        other: &ComplexField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> ComplexField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// `self += c * other`, in place.
    pub fn add_scaled(&mut self, c: Complex64, other: &ComplexField) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    /// Pointwise `Re(self * conj(other))`.
    pub fn re_conj_product(&self, other: &ComplexField) -> RealField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        RealField::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .collect(),
        )
    }

    /// Pointwise product with a real field.
    pub fn real_times(&self, r: &RealField) -> ComplexField {
        assert_eq!(&self.grid, r.grid(), "fields live on different grids");
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(r.values())
                .map(|(z, &c)| Complex64::new(z.re * c, z.im * c))
                .collect(),
        )
    }

    pub fn real_part(&self) -> RealField {
        RealField::from_raw(self.grid, self.values.iter().map(|z| z.re).collect())
    }

    pub fn imag_part(&self) -> RealField {
        RealField::from_raw(self.grid, self.values.iter().map(|z| z.im).collect())
    }

    /// `sup|self - other| / sup|other|`, falling back to the absolute
    /// difference when `other` vanishes.
    pub fn relative_distance(&self, other: &ComplexField) -> f64 {
        let diff = (self - other).sup_norm();
        let scale = other.sup_norm();
        if scale > 0.0 {
            diff / scale
        } else {
            diff
        }
    }
}

impl Add for &ComplexField {
    type Output = ComplexField;
    fn add(self, rhs: Self) -> ComplexField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexField {
    type Output = ComplexField;
    fn sub(self, rhs: Self) -> ComplexField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &ComplexField {
    type Output = ComplexField;
    fn mul(self, rhs: Self) -> ComplexField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Neg for &ComplexField {
    type Output = ComplexField;
    fn neg(self) -> ComplexField {
        self.map(|z| -z)
    }
}

/// Real samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some(m) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample {
                index: m,
                x: grid.point(m),
            });
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(grid, grid.points().map(f).collect())
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::from_raw(grid, vec![0.0; grid.n()])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField::from_raw(
            self.grid,
            self.values
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect(),
        )
    }

    /// Spectral derivative.
    pub fn diff(&self, order: u32) -> Result<RealField> {
        let zeros = vec![0.0; self.values.len()];
        let (d, _) = spectral_diff(&self.grid, &self.values, &zeros, order)?;
        Ok(Self::from_raw(self.grid, d))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn zip_with(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> RealField {
        Self::from_raw(self.grid, self.values.iter().map(|v| v * c).collect())
    }

    pub fn add_scaled(&mut self, c: f64, other: &RealField) {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }
}

impl Mul for &RealField {
    type Output = RealField;
    fn mul(self, rhs: Self) -> RealField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Add for &RealField {
    type Output = RealField;
    fn add(self, rhs: Self) -> RealField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

/// Sech-shaped bump `amplitude * sech(width * (x - center)) * exp(i k x)`.
pub fn sech_profile(
    grid: GridSpec,
    amplitude: f64,
    width: f64,
    center: f64,
    k: f64,
) -> ComplexField {
    ComplexField::from_fn(grid, |x| {
        Complex64::from_polar(amplitude / (width * (x - center)).cosh(), k * x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_spacing() {
        let g = GridSpec::new(-20.0, 40.0, 256).unwrap();
        assert_eq!(g.spacing(), 0.15625);
        assert_eq!(g.point(0), -20.0);
        assert_eq!(g.point(255), -20.0 + 255.0 * 0.15625);
    }

    #[test]
    fn two_pi_grid_admits_integer_wavenumbers() {
        let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
        for k in -5..=5 {
            assert!(g.is_commensurate(k as f64));
        }
        assert!(!g.is_commensurate(0.5));
        assert!((g.wavenumber(1) - 1.0).abs() < 1e-15);
        assert!((g.wavenumber(63) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(
            GridSpec::new(0.0, 40.0, 100),
            Err(Error::InvalidGrid(_))
        ));
        assert!(GridSpec::new(0.0, 40.0, 4).is_err());
        assert!(GridSpec::new(0.0, 0.0, 64).is_err());
        assert!(GridSpec::new(0.0, -1.0, 64).is_err());
        assert!(GridSpec::new(f64::NAN, 1.0, 64).is_err());
    }

    #[test]
    fn field_rejects_non_finite_and_wrong_length() {
        let g = GridSpec::new(0.0, 1.0, 8).unwrap();
        assert!(matches!(
            ComplexField::new(g, vec![c(0.0, 0.0); 7]),
            Err(Error::LengthMismatch {
                expected: 8,
                got: 7
            })
        ));
        let mut v = vec![c(1.0, 0.0); 8];
        v[3] = c(f64::NAN, 0.0);
        assert!(matches!(
            ComplexField::new(g, v),
            Err(Error::NonFiniteSample { index: 3, .. })
        ));
    }

    #[test]
    fn plane_wave_is_eigenfunction() {
        let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
        for k in [1.0, -3.0, 7.0] {
            let f = ComplexField::plane_wave(g, c(1.0, 0.0), k);
            let d1 = f.diff(1).unwrap();
            let expect1 = f.scale(c(0.0, k));
            assert!((&d1 - &expect1).sup_norm() < 1e-12);
            let d2 = f.diff(2).unwrap();
            let expect2 = f.scale(c(-k * k, 0.0));
            assert!((&d2 - &expect2).sup_norm() < 1e-11);
        }
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = GridSpec::new(-3.0, 10.0, 32).unwrap();
        let f = ComplexField::constant(g, c(2.5, -1.0));
        assert!(f.diff(1).unwrap().sup_norm() < 1e-14);
        assert!(f.diff(2).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn unsupported_derivative_order() {
        let g = GridSpec::new(0.0, 1.0, 8).unwrap();
        let f = ComplexField::zeros(g);
        assert!(matches!(f.diff(3), Err(Error::UnsupportedDerivative(3))));
        assert!(matches!(f.diff(0), Err(Error::UnsupportedDerivative(0))));
    }

    // Fourth-order centered differences as an independent check on the
    // spectral second derivative of a sech profile.
    fn fd4_second(f: &ComplexField) -> Vec<Complex64> {
        let v = f.values();
        let n = v.len();
        let h = f.grid().spacing();
        (0..n)
            .map(|m| {
                let at = |o: isize| v[((m as isize + o).rem_euclid(n as isize)) as usize];
                (-at(2) + at(1) * 16.0 - at(0) * 30.0 + at(-1) * 16.0 - at(-2)) / (12.0 * h * h)
            })
            .collect()
    }

    #[test]
    fn spectral_second_derivative_matches_fourth_order_fd() {
        let mut errors = Vec::new();
        for n in [256usize, 512] {
            let g = GridSpec::new(-32.0, 64.0, n).unwrap();
            let f = sech_profile(g, 1.0, 1.0, 0.0, 0.0);
            let spectral = f.diff(2).unwrap();
            let fd = fd4_second(&f);
            let err = spectral
                .values()
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let h = g.spacing();
            assert!(err < h.powi(4), "n={n}: err {err:e} vs h^4 {:e}", h.powi(4));
            errors.push(err);
        }
        // FD error dominates and shrinks ~16x when h halves.
        let ratio = errors[0] / errors[1];
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
        let cst = ComplexField::constant(g, c(3.0, -4.0));
        assert!((cst.sup_norm() - 5.0).abs() < 1e-15);
        let zero = ComplexField::zeros(g);
        assert_eq!(zero.sup_norm(), 0.0);
        assert_eq!(zero.l2_norm(), 0.0);
        let wave = ComplexField::plane_wave(g, c(1.0, 0.0), 3.0);
        assert!((wave.l2_norm() - (2.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn real_field_derivative_is_real() {
        let g = GridSpec::new(-16.0, 32.0, 128).unwrap();
        let f = RealField::from_fn(g, |x| (-(x * x) / 4.0).exp());
        let d = f.diff(1).unwrap();
        let cd = f.to_complex().diff(1).unwrap();
        assert!(cd.imag_part().sup_norm() < 1e-14);
        assert!((&d.to_complex() - &cd).sup_norm() < 1e-15);
    }

    fn smooth_field(g: GridSpec, coeffs: &[(f64, f64)]) -> ComplexField {
        ComplexField::from_fn(g, |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(m, &(re, im))| {
                    let k = m as f64 - (coeffs.len() / 2) as f64;
                    c(re, im) * Complex64::from_polar(1.0, k * x)
                })
                .sum()
        })
    }

    proptest! {
        #[test]
        fn diff_is_linear(
            fa in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7),
            fb in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7),
            a in (-2.0..2.0f64, -2.0..2.0f64),
            b in (-2.0..2.0f64, -2.0..2.0f64),
            order in 1u32..=2,
        ) {
            let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
            let f = smooth_field(g, &fa);
            let h = smooth_field(g, &fb);
            let (a, b) = (c(a.0, a.1), c(b.0, b.1));
            let combo = &f.scale(a) + &h.scale(b);
            let lhs = combo.diff(order).unwrap();
            let rhs = &f.diff(order).unwrap().scale(a) + &h.diff(order).unwrap().scale(b);
            let scale = rhs.sup_norm().max(1e-300);
            prop_assert!((&lhs - &rhs).sup_norm() / scale < 1e-12);
        }

        #[test]
        fn repeated_first_derivative_matches_second(
            fa in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9),
        ) {
            let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
            let f = smooth_field(g, &fa);
            let twice = f.diff(1).unwrap().diff(1).unwrap();
            let direct = f.diff(2).unwrap();
            prop_assert!(twice.relative_distance(&direct) < 1e-10);
        }

        #[test]
        fn norms_are_absolutely_homogeneous(
            fa in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5),
            re in -10.0..10.0f64,
            im in -10.0..10.0f64,
        ) {
            let g = GridSpec::new(-1.0, 3.0, 32).unwrap();
            let f = smooth_field(g, &fa);
            let s = c(re, im);
            let scaled = f.scale(s);
            let tol = 1e-13 * (1.0 + s.norm() * f.sup_norm());
            prop_assert!((scaled.sup_norm() - s.norm() * f.sup_norm()).abs() <= tol);
            prop_assert!((scaled.l2_norm() - s.norm() * f.l2_norm()).abs() <= tol * 3.0);
        }
    }
}
