//! Run configuration: a sectioned TOML file, resolved and validated once.

use std::fs;
use std::path::{Path, PathBuf};

use adomian_core::reference::parse_snapshots;
use adomian_core::{
    sech_profile, soliton_eval, ComplexField, CubicSpline, GridSpec, IntegratorConfig, ModelParams,
    PhaseFunction, SolitonSpec,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialSection>,
    #[serde(default)]
    pub series: SeriesSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Eq1,
    Eq3,
    Custom,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub preset: Preset,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_im: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_re: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_im: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x0: f64,
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    PlaneWave {
        amplitude_re: f64,
        #[serde(default)]
        amplitude_im: f64,
        k: f64,
    },
    SechProfile {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        k: f64,
    },
    /// The `[soliton]` block evaluated at `t = 0`.
    Soliton,
    /// A snapshot file of `x re im` rows; relative paths are taken from
    /// the config file's directory.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSection {
    pub order: usize,
}

impl Default for SeriesSection {
    fn default() -> Self {
        Self { order: 12 }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSection {
    pub dt: f64,
    pub t_end: f64,
    pub store_every: usize,
    pub c_stab: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 0.5,
            store_every: 100,
            c_stab: IntegratorConfig::DEFAULT_C_STAB,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub times: Vec<f64>,
    /// Truncation orders for the error table; empty means `0..=order`.
    pub orders: Vec<usize>,
    pub tail_window: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            times: vec![0.3, 0.5],
            orders: Vec::new(),
            tail_window: adomian_core::analysis::DEFAULT_TAIL_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub dt_fd: f64,
    pub max_j: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            dt_fd: adomian_core::reference::DEFAULT_ORACLE_STEP,
            max_j: adomian_core::reference::MAX_ORACLE_ORDER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaForm {
    Constant,
    Linear,
    Tabulated,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonSection {
    pub gamma: f64,
    pub eta: f64,
    pub lambda: f64,
    pub nu: f64,
    pub omega: f64,
    pub k: f64,
    pub sign: i8,
    #[serde(default)]
    pub b_const: f64,
    #[serde(default = "default_theta")]
    pub theta: ThetaForm,
    #[serde(default)]
    pub theta_value: f64,
    #[serde(default)]
    pub theta_slope: f64,
    #[serde(default)]
    pub theta_offset: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theta_knots: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub theta_values: Vec<f64>,
    /// Time at which the residual is evaluated.
    #[serde(default)]
    pub t: f64,
    #[serde(default = "default_residual_step")]
    pub dt_fd: f64,
}

fn default_theta() -> ThetaForm {
    ThetaForm::Constant
}

fn default_residual_step() -> f64 {
    1e-4
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Loaded, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { config, base })
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        let need =
            |v: Option<f64>, name: &str| v.ok_or_else(|| invalid(name, "required for this preset"));
        let params = match m.preset {
            Preset::Eq1 => ModelParams::from_eq1(need(m.a, "model.a")?, need(m.b, "model.b")?),
            Preset::Eq3 => ModelParams::from_eq3(need(m.a, "model.a")?, need(m.b, "model.b")?),
            Preset::Custom => ModelParams::new(
                Complex64::new(
                    need(m.alpha_re, "model.alpha_re")?,
                    need(m.alpha_im, "model.alpha_im")?,
                ),
                Complex64::new(
                    need(m.beta_re, "model.beta_re")?,
                    need(m.beta_im, "model.beta_im")?,
                ),
            ),
        };
        params.map_err(|e| invalid("model", e))
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.grid.x0, self.grid.length, self.grid.n).map_err(|e| invalid("grid", e))
    }

    pub fn integrator(
        &self,
        grid: &GridSpec,
        params: &ModelParams,
    ) -> Result<IntegratorConfig, CliError> {
        let s = &self.integrator;
        let cfg = IntegratorConfig {
            dt: s.dt,
            t_end: s.t_end,
            store_every: s.store_every,
            c_stab: s.c_stab,
        };
        cfg.validate(grid, params)
            .map_err(|e| invalid("integrator", e))?;
        Ok(cfg)
    }

    pub fn soliton_spec(&self) -> Result<SolitonSpec, CliError> {
        let s = self
            .soliton
            .as_ref()
            .ok_or_else(|| invalid("soliton", "section is required"))?;
        let theta = match s.theta {
            ThetaForm::Constant => PhaseFunction::Constant(s.theta_value),
            ThetaForm::Linear => PhaseFunction::Linear {
                slope: s.theta_slope,
                offset: s.theta_offset,
            },
            ThetaForm::Tabulated => PhaseFunction::Tabulated(
                CubicSpline::natural(s.theta_knots.clone(), s.theta_values.clone())
                    .map_err(|e| invalid("soliton.theta_knots", e))?,
            ),
        };
        if !(s.dt_fd > 0.0 && s.dt_fd.is_finite()) {
            return Err(invalid(
                "soliton.dt_fd",
                format!("must be positive (got {})", s.dt_fd),
            ));
        }
        Ok(SolitonSpec {
            gamma: s.gamma,
            eta: s.eta,
            lambda: s.lambda,
            nu: s.nu,
            omega: s.omega,
            k: s.k,
            sign: s.sign,
            theta,
            b_const: s.b_const,
        })
    }

    /// Analysis times, each checked against the integration horizon.
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let t_end = self.integrator.t_end;
        if self.analysis.times.is_empty() {
            return Err(invalid("analysis.times", "at least one time is required"));
        }
        for &t in &self.analysis.times {
            if !(t >= 0.0 && t <= t_end) {
                return Err(invalid(
                    "analysis.times",
                    format!("{t} lies outside the integration horizon [0, {t_end}]"),
                ));
            }
        }
        Ok(self.analysis.times.clone())
    }

    pub fn orders(&self) -> Result<Vec<usize>, CliError> {
        let n = self.series.order;
        if self.analysis.orders.is_empty() {
            return Ok((0..=n).collect());
        }
        if let Some(&bad) = self.analysis.orders.iter().find(|&&o| o > n) {
            return Err(invalid(
                "analysis.orders",
                format!("order {bad} exceeds series.order = {n}"),
            ));
        }
        Ok(self.analysis.orders.clone())
    }

    /// Comment lines echoing the resolved configuration.
    pub fn provenance(&self, command: &str, params: &ModelParams) -> String {
        let body = toml::to_string(self).expect("config serializes");
        let mut out = format!("# adomian {command}\n");
        out.push_str(&format!(
            "# resolved alpha = ({}, {})\n# resolved beta = ({}, {})\n",
            adomian_core::text::sci(params.alpha().re),
            adomian_core::text::sci(params.alpha().im),
            adomian_core::text::sci(params.beta().re),
            adomian_core::text::sci(params.beta().im),
        ));
        for line in body.lines() {
            if line.is_empty() {
                out.push_str("#\n");
            } else {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }
}

/// A parsed config together with the directory relative paths refer to.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn initial_field(&self, grid: &GridSpec) -> Result<ComplexField, CliError> {
        let initial = self
            .config
            .initial
            .as_ref()
            .ok_or_else(|| invalid("initial", "section is required"))?;
        match initial {
            InitialSection::Constant { re, im } => {
                if !(re.is_finite() && im.is_finite()) {
                    return Err(invalid("initial", "constant value must be finite"));
                }
                Ok(ComplexField::constant(*grid, Complex64::new(*re, *im)))
            }
            InitialSection::PlaneWave {
                amplitude_re,
                amplitude_im,
                k,
            } => {
                if !grid.is_commensurate(*k) {
                    return Err(invalid(
                        "initial.k",
                        format!("{k} is not commensurate with length {} (k L must be a multiple of 2 pi)", grid.length()),
                    ));
                }
                let field = ComplexField::plane_wave(
                    *grid,
                    Complex64::new(*amplitude_re, *amplitude_im),
                    *k,
                );
                finite(field, "initial")
            }
            InitialSection::SechProfile {
                amplitude,
                width,
                center,
                k,
            } => {
                if width.is_nan() || *width <= 0.0 {
                    return Err(invalid(
                        "initial.width",
                        format!("must be positive (got {width})"),
                    ));
                }
                if !grid.is_commensurate(*k) {
                    return Err(invalid(
                        "initial.k",
                        format!("{k} is not commensurate with length {} (k L must be a multiple of 2 pi)", grid.length()),
                    ));
                }
                finite(
                    sech_profile(*grid, *amplitude, *width, *center, *k),
                    "initial",
                )
            }
            InitialSection::Soliton => {
                let spec = self.config.soliton_spec()?;
                soliton_eval(&spec, grid, 0.0).map_err(CliError::from_core("soliton"))
            }
            InitialSection::File { path } => {
                let full = self.base.join(path);
                let text = fs::read_to_string(&full).map_err(|e| {
                    invalid(
                        "initial.path",
                        format!("cannot read {}: {e}", full.display()),
                    )
                })?;
                let mut snaps =
                    parse_snapshots(&text, grid).map_err(|e| invalid("initial.path", e))?;
                if snaps.is_empty() {
                    return Err(invalid("initial.path", "file holds no samples"));
                }
                Ok(snaps.swap_remove(0).1)
            }
        }
    }
}

fn finite(field: ComplexField, name: &str) -> Result<ComplexField, CliError> {
    if field.is_finite() {
        Ok(field)
    } else {
        Err(invalid(
            name,
            "profile parameters produce non-finite samples",
        ))
    }
}
