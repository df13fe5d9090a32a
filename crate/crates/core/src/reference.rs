//! Independent references: a method-of-lines RK4 integrator, a closed-form
//! travelling-wave evaluator with PDE-residual validation, and a
//! finite-difference estimator of Taylor coefficients in `t`.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::adm::ModelParams;
use crate::error::{Error, Result};
use crate::field::{ComplexField, GridSpec};
use crate::text::sci;

/// Residual threshold below which a travelling-wave spec is accepted.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;

/// Default time step of the finite-difference Taylor oracle.
pub const DEFAULT_ORACLE_STEP: f64 = 1e-3;

/// Highest Taylor order the oracle estimates.
pub const MAX_ORACLE_ORDER: usize = 4;

/// Phase correction `theta(s)` of the travelling variable `s = x - nu t`.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseFunction {
    Constant(f64),
    Linear {
        slope: f64,
        offset: f64,
    },
    /// Natural cubic spline through `(s, theta)` knots, held constant
    /// beyond the end knots.
    Tabulated(CubicSpline),
}

impl PhaseFunction {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            PhaseFunction::Constant(c) => *c,
            PhaseFunction::Linear { slope, offset } => slope * s + offset,
            PhaseFunction::Tabulated(spline) => spline.eval(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    /// Natural spline; knots must be strictly increasing, at least two.
    pub fn natural(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidSoliton(format!(
                "spline needs >= 2 knots with matching values (got {} knots, {} values)",
                n,
                values.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] <= w[0])
            || knots.iter().chain(&values).any(|v| !v.is_finite())
        {
            return Err(Error::InvalidSoliton(
                "spline knots must be finite and strictly increasing".into(),
            ));
        }
        // Tridiagonal solve for the second derivatives, natural ends.
        let mut second = vec![0.0; n];
        let mut u = vec![0.0; n];
        for i in 1..n - 1 {
            let sig = (knots[i] - knots[i - 1]) / (knots[i + 1] - knots[i - 1]);
            let p = sig * second[i - 1] + 2.0;
            second[i] = (sig - 1.0) / p;
            let slope_r = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
            let slope_l = (values[i] - values[i - 1]) / (knots[i] - knots[i - 1]);
            u[i] = (6.0 * (slope_r - slope_l) / (knots[i + 1] - knots[i - 1]) - sig * u[i - 1]) / p;
        }
        second[n - 1] = 0.0;
        for i in (0..n - 1).rev() {
            second[i] = second[i] * second[i + 1] + u[i];
        }
        Ok(Self {
            knots,
            values,
            second,
        })
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.knots.len();
        if s <= self.knots[0] {
            return self.values[0];
        }
        if s >= self.knots[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.knots.partition_point(|&k| k <= s).min(n - 1);
        let lo = hi - 1;
        let h = self.knots[hi] - self.knots[lo];
        let a = (self.knots[hi] - s) / h;
        let b = (s - self.knots[lo]) / h;
        a * self.values[lo]
            + b * self.values[hi]
            + ((a * a * a - a) * self.second[lo] + (b * b * b - b) * self.second[hi]) * h * h / 6.0
    }
}

/// Parameters of `u = sqrt(gamma + sign eta sech(lambda s)) exp(i[omega t - k x + theta(s)])`
/// with `s = x - nu t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSpec {
    pub gamma: f64,
    pub eta: f64,
    pub lambda: f64,
    pub nu: f64,
    pub omega: f64,
    pub k: f64,
    /// `+1` or `-1`.
    pub sign: i8,
    pub theta: PhaseFunction,
    /// Kept for provenance; enters no formula.
    pub b_const: f64,
}

impl SolitonSpec {
    fn check(&self, grid: &GridSpec) -> Result<()> {
        if self.sign != 1 && self.sign != -1 {
            return Err(Error::InvalidSoliton(format!(
                "sign must be +1 or -1 (got {})",
                self.sign
            )));
        }
        let finite = [
            self.gamma,
            self.eta,
            self.lambda,
            self.nu,
            self.omega,
            self.k,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSoliton("parameters must be finite".into()));
        }
        if !grid.is_commensurate(self.k) {
            return Err(Error::InvalidSoliton(format!(
                "carrier wavenumber k = {} is not commensurate with domain length {} (k L must be a multiple of 2 pi)",
                self.k,
                grid.length()
            )));
        }
        Ok(())
    }
}

/// Evaluates the travelling-wave field at time `t`.
pub fn soliton_eval(spec: &SolitonSpec, grid: &GridSpec, t: f64) -> Result<ComplexField> {
    spec.check(grid)?;
    let mut values = Vec::with_capacity(grid.n());
    for (m, x) in grid.points().enumerate() {
        let s = x - spec.nu * t;
        let arg = spec.gamma + f64::from(spec.sign) * spec.eta / (spec.lambda * s).cosh();
        if arg < 0.0 {
            return Err(Error::Domain {
                index: m,
                x,
                value: arg,
            });
        }
        let phase = spec.omega * t - spec.k * x + spec.theta.eval(s);
        values.push(Complex64::from_polar(arg.sqrt(), phase));
    }
    ComplexField::new(*grid, values)
}

/// Sup-norm of `u_t - alpha u_xx - beta |u|^2 u_x`, with `u_t` from a
/// centered difference of step `dt_fd`.
pub fn residual(
    spec: &SolitonSpec,
    params: &ModelParams,
    grid: &GridSpec,
    t: f64,
    dt_fd: f64,
) -> Result<f64> {
    if !(dt_fd > 0.0 && dt_fd.is_finite()) {
        return Err(Error::InvalidSoliton(format!(
            "dt_fd must be positive (got {dt_fd})"
        )));
    }
    let u = soliton_eval(spec, grid, t)?;
    let forward = soliton_eval(spec, grid, t + dt_fd)?;
    let backward = soliton_eval(spec, grid, t - dt_fd)?;
    let ut = (&forward - &backward).scale(Complex64::new(0.5 / dt_fd, 0.0));
    Ok((&ut - &params.rhs(&u)).sup_norm())
}

/// Time-stepping settings for [`integrate_mol`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub store_every: usize,
    /// Stability constant in `dt <= c_stab h^2 / |alpha|`.
    pub c_stab: f64,
}

impl IntegratorConfig {
    pub const DEFAULT_C_STAB: f64 = 0.2;

    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            store_every: 1,
            c_stab: Self::DEFAULT_C_STAB,
        }
    }

    /// Largest step allowed on `grid` for `params`.
    pub fn max_stable_dt(&self, grid: &GridSpec, params: &ModelParams) -> f64 {
        self.c_stab * grid.spacing().powi(2) / params.alpha().norm()
    }

    pub fn validate(&self, grid: &GridSpec, params: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidIntegrator(format!(
                "dt must be positive (got {})",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidIntegrator(format!(
                "t_end must be nonnegative (got {})",
                self.t_end
            )));
        }
        if self.store_every == 0 {
            return Err(Error::InvalidIntegrator("store_every must be >= 1".into()));
        }
        if !(self.c_stab > 0.0 && self.c_stab.is_finite()) {
            return Err(Error::InvalidIntegrator(format!(
                "c_stab must be positive (got {})",
                self.c_stab
            )));
        }
        let limit = self.max_stable_dt(grid, params);
        if self.dt > limit {
            return Err(Error::InvalidIntegrator(format!(
                "dt = {} exceeds the stability bound {limit:e} (c_stab h^2 / |alpha|)",
                self.dt
            )));
        }
        Ok(())
    }
}

fn rk4_step(u: &ComplexField, params: &ModelParams, dt: f64) -> ComplexField {
    let half = Complex64::new(0.5 * dt, 0.0);
    let k1 = params.rhs(u);
    let mut stage = u.clone();
    stage.add_scaled(half, &k1);
    let k2 = params.rhs(&stage);
    let mut stage = u.clone();
    stage.add_scaled(half, &k2);
    let k3 = params.rhs(&stage);
    let mut stage = u.clone();
    stage.add_scaled(Complex64::new(dt, 0.0), &k3);
    let k4 = params.rhs(&stage);

    let sixth = Complex64::new(dt / 6.0, 0.0);
    let third = Complex64::new(dt / 3.0, 0.0);
    let mut next = u.clone();
    next.add_scaled(sixth, &k1);
    next.add_scaled(third, &k2);
    next.add_scaled(third, &k3);
    next.add_scaled(sixth, &k4);
    next
}

/// Steps `u` forward by `duration` in `steps` equal RK4 steps.
fn advance(
    u: ComplexField,
    params: &ModelParams,
    t0: f64,
    duration: f64,
    steps: usize,
) -> Result<ComplexField> {
    let dt = duration / steps as f64;
    let mut u = u;
    for s in 0..steps {
        u = rk4_step(&u, params, dt);
        if !u.is_finite() {
            return Err(Error::BlowUp {
                t: t0 + (s + 1) as f64 * dt,
            });
        }
    }
    Ok(u)
}

fn step_count(duration: f64, dt: f64) -> usize {
    // Tolerate round-off when duration is an integer multiple of dt.
    ((duration / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Classical RK4 on the semi-discrete system `u_t = alpha D2 u + beta |u|^2 D1 u`.
///
/// The step is shrunk to `t_end / ceil(t_end / dt)` so that `t_end` is hit
/// exactly. Snapshots are taken at `t = 0`, every `store_every` steps, and
/// at `t_end`.
pub fn integrate_mol(
    u0: &ComplexField,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, ComplexField)>> {
    cfg.validate(u0.grid(), params)?;
    let mut snapshots = vec![(0.0, u0.clone())];
    if cfg.t_end == 0.0 {
        return Ok(snapshots);
    }
    let steps = step_count(cfg.t_end, cfg.dt);
    let dt = cfg.t_end / steps as f64;
    let mut u = u0.clone();
    for s in 1..=steps {
        u = rk4_step(&u, params, dt);
        let t = if s == steps { cfg.t_end } else { s as f64 * dt };
        if !u.is_finite() {
            return Err(Error::BlowUp { t });
        }
        if s % cfg.store_every == 0 || s == steps {
            snapshots.push((t, u.clone()));
        }
    }
    Ok(snapshots)
}

/// Solution at each requested time (in any order), integrating with steps
/// no longer than `cfg.dt` and landing exactly on every requested time.
pub fn integrate_to_times(
    u0: &ComplexField,
    params: &ModelParams,
    cfg: &IntegratorConfig,
    times: &[f64],
) -> Result<Vec<(f64, ComplexField)>> {
    cfg.validate(u0.grid(), params)?;
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut out: Vec<Option<ComplexField>> = vec![None; times.len()];
    let mut t = 0.0;
    let mut u = u0.clone();
    for idx in order {
        let target = times[idx];
        if !(target >= 0.0 && target.is_finite()) {
            return Err(Error::InvalidIntegrator(format!(
                "requested time {target} is not >= 0"
            )));
        }
        if target > t {
            u = advance(u, params, t, target - t, step_count(target - t, cfg.dt))?;
            t = target;
        }
        out[idx] = Some(u.clone());
    }
    Ok(times
        .iter()
        .zip(out)
        .map(|(&t, u)| (t, u.expect("every time visited")))
        .collect())
}

/// Centered finite-difference weights (Fornberg) for derivative `order`
/// at 0 from samples at `offsets`.
pub fn fd_weights(offsets: &[f64], order: usize) -> Vec<f64> {
    let n = offsets.len();
    assert!(order < n, "need more points than the derivative order");
    // c[i][k]: weight of point i for derivative k.
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Snapshots `u(m dt_fd)` for `m = -4..=4`, negative times from the
/// time-reversed system.
fn oracle_snapshots(
    u0: &ComplexField,
    params: &ModelParams,
    dt_fd: f64,
) -> Result<Vec<ComplexField>> {
    let half = MAX_ORACLE_ORDER;
    let probe = IntegratorConfig::new(1.0, 0.0);
    let stable = probe.max_stable_dt(u0.grid(), params);
    let substeps = step_count(dt_fd, stable).max(8);

    let reversed = ModelParams::new(-params.alpha(), -params.beta())?;
    let mut forward = Vec::with_capacity(half);
    let mut backward = Vec::with_capacity(half);
    let (mut uf, mut ub) = (u0.clone(), u0.clone());
    for m in 1..=half {
        uf = advance(uf, params, (m - 1) as f64 * dt_fd, dt_fd, substeps)?;
        ub = advance(ub, &reversed, (m - 1) as f64 * dt_fd, dt_fd, substeps)?;
        forward.push(uf.clone());
        backward.push(ub.clone());
    }
    let mut out: Vec<ComplexField> = backward.into_iter().rev().collect();
    out.push(u0.clone());
    out.extend(forward);
    Ok(out)
}

fn oracle_from_snapshots(snaps: &[ComplexField], j: usize, dt_fd: f64) -> ComplexField {
    let half = MAX_ORACLE_ORDER as i32;
    let offsets: Vec<f64> = (-half..=half).map(f64::from).collect();
    let weights = fd_weights(&offsets, j);
    let factorial: f64 = (1..=j).map(|k| k as f64).product();
    let norm = 1.0 / (dt_fd.powi(j as i32) * factorial);
    let mut acc = ComplexField::zeros(*snaps[0].grid());
    for (w, u) in weights.iter().zip(snaps) {
        acc.add_scaled(Complex64::new(w * norm, 0.0), u);
    }
    acc
}

fn check_oracle_args(j: usize, dt_fd: f64) -> Result<()> {
    if j == 0 || j > MAX_ORACLE_ORDER {
        return Err(Error::UnsupportedOracleOrder(j));
    }
    if !(dt_fd > 0.0 && dt_fd.is_finite()) {
        return Err(Error::InvalidIntegrator(format!(
            "dt_fd must be positive (got {dt_fd})"
        )));
    }
    Ok(())
}

/// Finite-difference estimate of the Taylor coefficient
/// `v_j = (1/j!) d^j u / dt^j` at `t = 0`, `1 <= j <= 4`.
///
/// Uses the nine-point centered stencil on integrator snapshots at
/// `t = m dt_fd`, `m = -4..=4`.
pub fn taylor_oracle(
    u0: &ComplexField,
    params: &ModelParams,
    j: usize,
    dt_fd: f64,
) -> Result<ComplexField> {
    check_oracle_args(j, dt_fd)?;
    let snaps = oracle_snapshots(u0, params, dt_fd)?;
    Ok(oracle_from_snapshots(&snaps, j, dt_fd))
}

/// [`taylor_oracle`] for every `j` in `1..=max_j`, sharing one set of
/// snapshots.
pub fn taylor_oracle_upto(
    u0: &ComplexField,
    params: &ModelParams,
    max_j: usize,
    dt_fd: f64,
) -> Result<Vec<ComplexField>> {
    check_oracle_args(max_j, dt_fd)?;
    let snaps = oracle_snapshots(u0, params, dt_fd)?;
    Ok((1..=max_j)
        .map(|j| oracle_from_snapshots(&snaps, j, dt_fd))
        .collect())
}

/// Plain-text snapshot dump: a `# t=<value>` line per snapshot followed by
/// one `x re(u) im(u)` row per grid point.
pub fn format_snapshots(snapshots: &[(f64, ComplexField)]) -> String {
    let mut out = String::new();
    for (t, u) in snapshots {
        writeln!(out, "# t={}", sci(*t)).unwrap();
        for (x, z) in u.grid().points().zip(u.values()) {
            writeln!(out, "{} {} {}", sci(x), sci(z.re), sci(z.im)).unwrap();
        }
    }
    out
}

/// Parses the output of [`format_snapshots`] back onto `grid`.
pub fn parse_snapshots(text: &str, grid: &GridSpec) -> Result<Vec<(f64, ComplexField)>> {
    let bad = |msg: String| Error::InvalidParams(format!("snapshot file: {msg}"));
    let mut out = Vec::new();
    let mut current: Option<(f64, Vec<Complex64>)> = None;
    let finish =
        |cur: Option<(f64, Vec<Complex64>)>, out: &mut Vec<(f64, ComplexField)>| -> Result<()> {
            if let Some((t, values)) = cur {
                out.push((t, ComplexField::new(*grid, values)?));
            }
            Ok(())
        };
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(t) = rest.trim().strip_prefix("t=") {
                let t: f64 = t
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("line {}: bad time {t:?}", lineno + 1)))?;
                finish(current.take(), &mut out)?;
                current = Some((t, Vec::new()));
            }
            continue;
        }
        let cols: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(format!("line {}: expected three numbers", lineno + 1)))?;
        if cols.len() != 3 {
            return Err(bad(format!("line {}: expected `x re im`", lineno + 1)));
        }
        current
            .get_or_insert_with(|| (0.0, Vec::new()))
            .1
            .push(Complex64::new(cols[1], cols[2]));
    }
    finish(current, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adm::build_series;
    use crate::field::sech_profile;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flat_spec(gamma: f64, k: f64, omega: f64) -> SolitonSpec {
        SolitonSpec {
            gamma,
            eta: 0.0,
            lambda: 1.0,
            nu: 0.0,
            omega,
            k,
            sign: 1,
            theta: PhaseFunction::Constant(0.0),
            b_const: 0.0,
        }
    }

    #[test]
    fn fornberg_weights_known_stencils() {
        let w = fd_weights(&[-1.0, 0.0, 1.0], 1);
        assert_eq!(w, vec![-0.5, 0.0, 0.5]);
        let w = fd_weights(&[-1.0, 0.0, 1.0], 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let w = fd_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn fornberg_weights_are_exact_on_polynomials() {
        let offsets: Vec<f64> = (-4..=4).map(f64::from).collect();
        for order in 1..=4usize {
            let w = fd_weights(&offsets, order);
            for p in 0..=8i32 {
                let got: f64 = w.iter().zip(&offsets).map(|(w, x)| w * x.powi(p)).sum();
                let expect = if p as usize == order {
                    (1..=order).map(|k| k as f64).product()
                } else {
                    0.0
                };
                assert!((got - expect).abs() < 1e-9, "order {order}, x^{p}: {got}");
            }
        }
    }

    #[test]
    fn spline_interpolates_knots_and_lines() {
        let s = CubicSpline::natural(vec![0.0, 1.0, 2.5, 4.0], vec![1.0, 3.0, 6.0, 9.0]).unwrap();
        assert!((s.eval(1.0) - 3.0).abs() < 1e-14);
        assert!((s.eval(2.5) - 6.0).abs() < 1e-14);
        assert_eq!(s.eval(-5.0), 1.0);
        assert_eq!(s.eval(10.0), 9.0);
        let line = CubicSpline::natural(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 6.0]).unwrap();
        assert!((line.eval(2.2) - 4.4).abs() < 1e-14);
        assert!(CubicSpline::natural(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(CubicSpline::natural(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn flat_soliton_is_constant_modulus() {
        let g = GridSpec::new(0.0, 2.0 * PI, 32).unwrap();
        let spec = flat_spec(4.0, 0.0, 1.5);
        let u = soliton_eval(&spec, &g, 0.7).unwrap();
        let expect = ComplexField::constant(g, Complex64::from_polar(2.0, 1.5 * 0.7));
        assert!((&u - &expect).sup_norm() < 1e-14);
    }

    #[test]
    fn soliton_at_time_zero() {
        let g = GridSpec::new(-16.0, 32.0, 64).unwrap();
        let k = 2.0 * PI * 3.0 / 32.0;
        let spec = SolitonSpec {
            gamma: 1.0,
            eta: 0.5,
            lambda: 0.8,
            nu: 2.0,
            omega: 3.0,
            k,
            sign: -1,
            theta: PhaseFunction::Constant(0.0),
            b_const: 7.0,
        };
        let u = soliton_eval(&spec, &g, 0.0).unwrap();
        let expect = ComplexField::from_fn(g, |x| {
            Complex64::from_polar((1.0 - 0.5 / (0.8 * x).cosh()).sqrt(), -k * x)
        });
        assert!((&u - &expect).sup_norm() < 1e-14);
    }

    #[test]
    fn soliton_domain_and_commensurability_errors() {
        let g = GridSpec::new(-8.0, 16.0, 32).unwrap();
        let mut spec = flat_spec(0.2, 0.0, 0.0);
        spec.eta = 1.0;
        spec.sign = -1;
        match soliton_eval(&spec, &g, 0.0) {
            Err(Error::Domain { index, x, value }) => {
                assert!(value < 0.0);
                assert_eq!(x, g.point(index));
            }
            other => panic!("expected domain error, got {other:?}"),
        }
        let spec = flat_spec(1.0, 0.3, 0.0);
        assert!(matches!(
            soliton_eval(&spec, &g, 0.0),
            Err(Error::InvalidSoliton(_))
        ));
    }

    #[test]
    fn constant_solution_has_zero_residual() {
        let g = GridSpec::new(-8.0, 16.0, 32).unwrap();
        let p = ModelParams::from_eq3(5.0, 123.0).unwrap();
        let r = residual(&flat_spec(2.0, 0.0, 0.0), &p, &g, 0.3, 1e-4).unwrap();
        assert!(r < 1e-13, "{r}");
    }

    #[test]
    fn linear_plane_wave_residual() {
        // exp(i kappa x - alpha kappa^2 t) with alpha = -i: omega = kappa^2, k = -kappa.
        let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
        let p = ModelParams::from_eq3(1.0, 0.0).unwrap();
        let kappa = 1.0;
        let r = residual(&flat_spec(1.0, -kappa, kappa * kappa), &p, &g, 0.2, 1e-4).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    #[test]
    fn nonlinear_plane_wave_is_valid_and_perturbations_are_not() {
        // omega = a k^2 - b gamma k solves the eq3 form exactly.
        let g = GridSpec::new(-16.0, 32.0, 128).unwrap();
        let (a, b, gamma) = (5.0, 10.0, 0.25);
        let k = 2.0 * PI / 32.0;
        let p = ModelParams::from_eq3(a, b).unwrap();
        let good = flat_spec(gamma, k, a * k * k - b * gamma * k);
        assert!(residual(&good, &p, &g, 0.0, 1e-4).unwrap() <= RESIDUAL_TOLERANCE);

        let mut shifted = good.clone();
        shifted.omega *= 1.3;
        assert!(residual(&shifted, &p, &g, 0.0, 1e-4).unwrap() >= 1e-2);
        let mut bumped = good.clone();
        bumped.eta = 0.1;
        assert!(residual(&bumped, &p, &g, 0.0, 1e-4).unwrap() >= 1e-2);
    }

    #[test]
    fn constant_state_is_preserved_by_integrator() {
        let g = GridSpec::new(0.0, 2.0 * PI, 32).unwrap();
        let u0 = ComplexField::constant(g, c(0.6, 0.8));
        let p = ModelParams::from_eq3(5.0, 10.0).unwrap();
        let snaps = integrate_mol(&u0, &p, &IntegratorConfig::new(1e-3, 0.5)).unwrap();
        for (_, u) in &snaps {
            assert!((u - &u0).sup_norm() < 1e-13);
        }
    }

    #[test]
    fn integrator_plane_wave_and_snapshot_schedule() {
        let g = GridSpec::new(0.0, 2.0 * PI, 32).unwrap();
        let p = ModelParams::from_eq3(5.0, 0.0).unwrap();
        let kappa = 1.0;
        let u0 = ComplexField::plane_wave(g, c(1.0, 0.0), kappa);
        let cfg = IntegratorConfig {
            store_every: 1000,
            ..IntegratorConfig::new(1e-4, 0.5)
        };
        let snaps = integrate_mol(&u0, &p, &cfg).unwrap();
        let times: Vec<f64> = snaps.iter().map(|(t, _)| *t).collect();
        assert_eq!(times.len(), 6);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 0.5);
        let exact = ComplexField::plane_wave(g, (-p.alpha() * kappa * kappa * 0.5).exp(), kappa);
        assert!((&snaps.last().unwrap().1 - &exact).sup_norm() < 1e-9);
    }

    #[test]
    fn integrator_validates_configuration() {
        let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
        let p = ModelParams::from_eq3(5.0, 0.0).unwrap();
        let u0 = ComplexField::zeros(g);
        let cfg = IntegratorConfig::new(0.1, 1.0);
        assert!(matches!(
            integrate_mol(&u0, &p, &cfg),
            Err(Error::InvalidIntegrator(_))
        ));
        let cfg = IntegratorConfig {
            store_every: 0,
            ..IntegratorConfig::new(1e-4, 1.0)
        };
        assert!(integrate_mol(&u0, &p, &cfg).is_err());
        let cfg = IntegratorConfig::new(1e-4, -1.0);
        assert!(integrate_mol(&u0, &p, &cfg).is_err());
    }

    #[test]
    fn blow_up_reports_time() {
        // Anti-diffusive real alpha is violently unstable on grid noise.
        let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
        let p = ModelParams::new(c(-1.0, 0.0), c(0.0, 0.0)).unwrap();
        let u0 = ComplexField::plane_wave(g, c(1.0, 0.0), 30.0);
        let cfg = IntegratorConfig::new(1e-3, 1000.0);
        match integrate_mol(&u0, &p, &cfg) {
            Err(Error::BlowUp { t }) => assert!(t > 0.0 && t < 1000.0),
            other => panic!("expected blow-up, got {:?}", other.map(|s| s.len())),
        }
    }

    #[test]
    fn integrate_to_times_matches_schedule() {
        let g = GridSpec::new(0.0, 2.0 * PI, 32).unwrap();
        let p = ModelParams::from_eq3(1.0, 0.0).unwrap();
        let u0 = ComplexField::plane_wave(g, c(1.0, 0.0), 2.0);
        let cfg = IntegratorConfig::new(1e-3, 1.0);
        let out = integrate_to_times(&u0, &p, &cfg, &[0.3, 0.0, 0.1]).unwrap();
        assert_eq!(out[1].1, u0);
        for (t, u) in &out {
            let exact = ComplexField::plane_wave(g, (-p.alpha() * 4.0 * t).exp(), 2.0);
            assert!((u - &exact).sup_norm() < 1e-10);
        }
    }

    #[test]
    fn oracle_rejects_unsupported_orders() {
        let g = GridSpec::new(0.0, 2.0 * PI, 32).unwrap();
        let u0 = ComplexField::zeros(g);
        let p = ModelParams::from_eq3(1.0, 1.0).unwrap();
        assert_eq!(
            taylor_oracle(&u0, &p, 5, 1e-3),
            Err(Error::UnsupportedOracleOrder(5))
        );
        assert_eq!(
            taylor_oracle(&u0, &p, 0, 1e-3),
            Err(Error::UnsupportedOracleOrder(0))
        );
    }

    #[test]
    fn first_order_oracle_is_the_right_hand_side() {
        let g = GridSpec::new(-64.0, 128.0, 256).unwrap();
        let u0 = sech_profile(g, 1.0, 0.5, 0.0, 0.0);
        let p = ModelParams::from_eq3(5.0, 10.0).unwrap();
        let dt_fd = DEFAULT_ORACLE_STEP;
        let est = taylor_oracle(&u0, &p, 1, dt_fd).unwrap();
        let rhs = p.rhs(&u0);
        assert!(est.relative_distance(&rhs) <= 10.0 * dt_fd * dt_fd);
    }

    #[test]
    fn second_order_oracle_on_plane_wave() {
        let g = GridSpec::new(0.0, 2.0 * PI, 64).unwrap();
        let p = ModelParams::from_eq3(5.0, 0.0).unwrap();
        let kappa = 1.0;
        let u0 = ComplexField::plane_wave(g, c(1.0, 0.0), kappa);
        let est = taylor_oracle(&u0, &p, 2, 1e-3).unwrap();
        let lam = p.alpha() * kappa * kappa;
        let expect = ComplexField::plane_wave(g, lam * lam / 2.0, kappa);
        assert!(est.relative_distance(&expect) < 1e-6);
    }

    #[test]
    fn oracle_agrees_with_series_on_sech() {
        let g = GridSpec::new(-64.0, 128.0, 256).unwrap();
        let u0 = sech_profile(g, 1.0, 0.5, 0.0, 0.0);
        let p = ModelParams::from_eq3(5.0, 10.0).unwrap();
        let series = build_series(&u0, &p, 4).unwrap();
        let est = taylor_oracle_upto(&u0, &p, 3, 1e-3).unwrap();
        for (j, e) in est.iter().enumerate() {
            let rel = e.relative_distance(&series.coeffs()[j + 1]);
            assert!(rel < 1e-5, "v_{}: {rel:e}", j + 1);
        }
    }

    #[test]
    fn snapshot_text_round_trips() {
        let g = GridSpec::new(-1.0, 2.0, 8).unwrap();
        let a = ComplexField::from_fn(g, |x| c(x, -x * x / 3.0));
        let b = a.conj();
        let text = format_snapshots(&[(0.0, a.clone()), (0.25, b.clone())]);
        assert!(text.starts_with("# t=0.0000000000000000e0\n"));
        let back = parse_snapshots(&text, &g).unwrap();
        assert_eq!(back, vec![(0.0, a), (0.25, b)]);
        assert!(parse_snapshots("1 2\n", &g).is_err());
    }
}
