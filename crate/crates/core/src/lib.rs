//! Series-solution laboratory for Chen-Lee-Liu type equations
//! `u_t = alpha u_xx + beta |u|^2 u_x` on a periodic domain.
//!
//! * [`field`]: grids, sampled fields, spectral derivatives and norms.
//! * [`adm`]: Adomian polynomials and the coefficient recurrence.
//! * [`tpoly`]: the integral-form recurrence over explicit t-polynomials.
//! * [`iadm`]: the real/imaginary split variant.
//! * [`reference`]: RK4 method of lines, travelling waves, Taylor oracle.
//! * [`analysis`]: error tables, radius estimates, divergence verdicts.

pub mod adm;
pub mod analysis;
pub mod error;
pub mod field;
pub mod iadm;
pub mod reference;
pub mod text;
pub mod tpoly;

pub use adm::{
    adomian_polynomial, build_series, modulus_coefficient, taylor_step, AdomianSweep, ModelParams,
    TaylorSeries,
};
pub use analysis::{
    divergence_report, error_table, radius_estimate, ClauseOutcome, DivergenceReport, ErrorRow,
    RadiusReport,
};
pub use error::{Error, Result};
pub use field::{diff_pair, sech_profile, ComplexField, GridSpec, RealField};
pub use iadm::{iadm_build, recombine, split_real_system, RealCoupling, RealSeriesPair};
pub use reference::{
    integrate_mol, integrate_to_times, residual, soliton_eval, taylor_oracle, taylor_oracle_upto,
    CubicSpline, IntegratorConfig, PhaseFunction, SolitonSpec,
};
pub use tpoly::{
    adm_step_integral, integral_pipeline, monomial_check, time_level_adomian, TPolynomial,
};
