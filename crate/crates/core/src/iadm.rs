//! Improved ADM: the real/imaginary split `u = u1 + i u2`.
//!
//! With `alpha = ar + i ai`, `beta = br + i bi` and `N = u1^2 + u2^2` the
//! equation separates into
//!
//! ```text
//! u1_t = ar u1_xx - ai u2_xx + N (br u1_x - bi u2_x)
//! u2_t = ai u1_xx + ar u2_xx + N (bi u1_x + br u2_x)
//! ```
//!
//! and the ADM is applied to this real system with its own real Adomian
//! polynomials `P_n = sum_j p'_{n-j} N_j`, `Q_n = sum_j q'_{n-j} N_j`,
//! `N_j = sum_k (p_k p_{j-k} + q_k q_{j-k})`.

use num_complex::Complex64;

use crate::adm::{ModelParams, TaylorSeries};
use crate::error::{Error, Result};
use crate::field::{diff_pair, ComplexField, GridSpec, RealField};

/// 2x2 real coupling matrices of the split system; row `r` is the
/// equation for `u_{r+1}`, column `c` the field `u_{c+1}` it acts on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealCoupling {
    pub dispersion: [[f64; 2]; 2],
    pub nonlinear: [[f64; 2]; 2],
}

impl RealCoupling {
    /// True when neither equation feeds the other.
    pub fn is_decoupled(&self) -> bool {
        self.dispersion[0][1] == 0.0
            && self.dispersion[1][0] == 0.0
            && self.nonlinear[0][1] == 0.0
            && self.nonlinear[1][0] == 0.0
    }
}

pub fn split_real_system(params: &ModelParams) -> RealCoupling {
    let (a, b) = (params.alpha(), params.beta());
    RealCoupling {
        dispersion: [[a.re, -a.im], [a.im, a.re]],
        nonlinear: [[b.re, -b.im], [b.im, b.re]],
    }
}

/// Taylor coefficients of `u1` and `u2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSeriesPair {
    params: ModelParams,
    series1: Vec<RealField>,
    series2: Vec<RealField>,
}

impl RealSeriesPair {
    pub fn new(
        params: ModelParams,
        series1: Vec<RealField>,
        series2: Vec<RealField>,
    ) -> Result<Self> {
        if series1.is_empty() || series1.len() != series2.len() {
            return Err(Error::InvalidParams(format!(
                "real series need equal nonzero lengths (got {} and {})",
                series1.len(),
                series2.len()
            )));
        }
        let grid = series1[0].grid();
        if series1.iter().chain(&series2).any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            params,
            series1,
            series2,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn series1(&self) -> &[RealField] {
        &self.series1
    }

    pub fn series2(&self) -> &[RealField] {
        &self.series2
    }

    pub fn order(&self) -> usize {
        self.series1.len() - 1
    }

    pub fn grid(&self) -> &GridSpec {
        self.series1[0].grid()
    }

    pub fn evaluate1(&self, t: f64) -> RealField {
        horner_real(&self.series1, t)
    }

    pub fn evaluate2(&self, t: f64) -> RealField {
        horner_real(&self.series2, t)
    }
}

fn horner_real(coeffs: &[RealField], t: f64) -> RealField {
    let mut acc = coeffs[coeffs.len() - 1].clone();
    for c in coeffs[..coeffs.len() - 1].iter().rev() {
        acc = acc.zip_with(c, |a, v| a * t + v);
    }
    acc
}

/// Real Adomian bookkeeping for the split nonlinearity.
struct RealSweep {
    p: Vec<RealField>,
    q: Vec<RealField>,
    dp: Vec<RealField>,
    dq: Vec<RealField>,
    modulus: Vec<RealField>,
}

impl RealSweep {
    fn new() -> Self {
        Self {
            p: Vec::new(),
            q: Vec::new(),
            dp: Vec::new(),
            dq: Vec::new(),
            modulus: Vec::new(),
        }
    }

    fn push(&mut self, p: RealField, q: RealField) -> Result<()> {
        let (dp, dq) = diff_pair(&p, &q, 1)?;
        self.dp.push(dp);
        self.dq.push(dq);
        self.p.push(p);
        self.q.push(q);
        let j = self.p.len() - 1;
        // N_j pairs the k and j-k terms, which contribute equally.
        let mut acc = RealField::zeros(*self.p[0].grid());
        for k in 0..=j / 2 {
            let l = j - k;
            let pair = modulus_pair(&self.p[k], &self.q[k], &self.p[l], &self.q[l]);
            acc.add_scaled(if k < l { 2.0 } else { 1.0 }, &pair);
        }
        self.modulus.push(acc);
        Ok(())
    }

    /// `(P_n, Q_n)`.
    fn polynomials(&self, n: usize) -> (RealField, RealField) {
        let grid = *self.p[0].grid();
        let mut pn = RealField::zeros(grid);
        let mut qn = RealField::zeros(grid);
        for j in 0..=n {
            pn = &pn + &(&self.dp[n - j] * &self.modulus[j]);
            qn = &qn + &(&self.dq[n - j] * &self.modulus[j]);
        }
        (pn, qn)
    }
}

/// `p_a p_b + q_a q_b`.
fn modulus_pair(pa: &RealField, qa: &RealField, pb: &RealField, qb: &RealField) -> RealField {
    let values = (0..pa.values().len())
        .map(|i| pa.values()[i] * pb.values()[i] + qa.values()[i] * qb.values()[i])
        .collect();
    RealField::from_raw(*pa.grid(), values)
}

/// Real-arithmetic ADM for the split system through order `order`.
pub fn iadm_build(u0: &ComplexField, params: &ModelParams, order: usize) -> Result<RealSeriesPair> {
    if !u0.is_finite() {
        return Err(Error::NonFiniteCoefficient { order: 0 });
    }
    let coupling = split_real_system(params);
    let [[d11, d12], [d21, d22]] = coupling.dispersion;
    let [[g11, g12], [g21, g22]] = coupling.nonlinear;

    let mut sweep = RealSweep::new();
    sweep.push(u0.real_part(), u0.imag_part())?;
    for k in 0..order {
        let (pxx, qxx) = diff_pair(&sweep.p[k], &sweep.q[k], 2)?;
        let (pn, qn) = sweep.polynomials(k);
        let inv = 1.0 / (k as f64 + 1.0);
        let combine = |wp: f64, wq: f64, gp: f64, gq: f64| {
            let values = (0..pxx.values().len())
                .map(|i| {
                    let dispersive = wp * pxx.values()[i] + wq * qxx.values()[i];
                    let nonlinear = gp * pn.values()[i] + gq * qn.values()[i];
                    (dispersive + nonlinear) * inv
                })
                .collect();
            RealField::new(*pxx.grid(), values)
        };
        let next = combine(d11, d12, g11, g12).and_then(|p| Ok((p, combine(d21, d22, g21, g22)?)));
        let (next_p, next_q) = match next {
            Ok(pair) => pair,
            Err(_) => return Err(Error::NonFiniteCoefficient { order: k + 1 }),
        };
        sweep.push(next_p, next_q)?;
    }
    RealSeriesPair::new(*params, sweep.p, sweep.q)
}

/// `v_j = series1[j] + i series2[j]`.
pub fn recombine(pair: &RealSeriesPair) -> TaylorSeries {
    let coeffs = pair
        .series1
        .iter()
        .zip(&pair.series2)
        .map(|(re, im)| {
            re.to_complex()
                .zip_with(&im.to_complex(), |a, b| Complex64::new(a.re, b.re))
        })
        .collect();
    TaylorSeries::new(pair.params, coeffs).expect("pair invariants guarantee a valid series")
}
