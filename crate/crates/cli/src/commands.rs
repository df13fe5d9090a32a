//! Subcommand bodies. Each returns the files it wants written, in order;
//! nothing here touches the filesystem.

use std::fmt::Write as _;

use adomian_core::analysis::{
    divergence_report, format_divergence, format_error_table, format_radius,
};
use adomian_core::reference::{format_snapshots, RESIDUAL_TOLERANCE};
use adomian_core::text::sci;
use adomian_core::{
    build_series, error_table, iadm_build, integrate_to_times, radius_estimate, recombine,
    residual, taylor_oracle_upto, ComplexField, GridSpec, ModelParams, TaylorSeries,
};

use crate::config::Loaded;
use crate::error::CliError;

/// Deviation bound for the ADM/IADM comparison.
pub const IADM_TOLERANCE: f64 = 1e-12;

pub struct Output {
    pub name: &'static str,
    pub body: String,
}

/// Shared setup for the subcommands that start from an initial field.
struct Setup {
    params: ModelParams,
    grid: GridSpec,
    u0: ComplexField,
    header: String,
}

fn setup(loaded: &Loaded, command: &str) -> Result<Setup, CliError> {
    let config = &loaded.config;
    let params = config.params()?;
    let grid = config.grid()?;
    let u0 = loaded.initial_field(&grid)?;
    Ok(Setup {
        params,
        grid,
        u0,
        header: config.provenance(command, &params),
    })
}

fn series(setup: &Setup, order: usize) -> Result<TaylorSeries, CliError> {
    build_series(&setup.u0, &setup.params, order).map_err(CliError::from_core("series"))
}

pub fn expand(loaded: &Loaded) -> Result<Vec<Output>, CliError> {
    let setup = setup(loaded, "expand")?;
    let s = series(&setup, loaded.config.series.order)?;
    let mut body = setup.header.clone();
    body.push('x');
    for j in 0..=s.order() {
        write!(body, ",v{j}_re,v{j}_im").unwrap();
    }
    body.push('\n');
    for (m, x) in setup.grid.points().enumerate() {
        body.push_str(&sci(x));
        for c in s.coeffs() {
            let z = c.values()[m];
            write!(body, ",{},{}", sci(z.re), sci(z.im)).unwrap();
        }
        body.push('\n');
    }
    Ok(vec![Output {
        name: "series.csv",
        body,
    }])
}

pub fn compare(loaded: &Loaded) -> Result<Vec<Output>, CliError> {
    let config = &loaded.config;
    let setup = setup(loaded, "compare")?;
    let cfg = config.integrator(&setup.grid, &setup.params)?;
    let times = config.times()?;
    let orders = config.orders()?;
    let s = series(&setup, config.series.order)?;
    let reference = integrate_to_times(&setup.u0, &setup.params, &cfg, &times)
        .map_err(CliError::from_core("reference"))?;
    let rows =
        error_table(&s, &reference, &times, &orders).map_err(CliError::from_core("error table"))?;
    Ok(vec![
        Output {
            name: "error_table.csv",
            body: format!("{}{}", setup.header, format_error_table(&rows)),
        },
        Output {
            name: "reference.txt",
            body: format!("{}{}", setup.header, format_snapshots(&reference)),
        },
    ])
}

pub fn iadm_check(loaded: &Loaded) -> Result<Vec<Output>, CliError> {
    let setup = setup(loaded, "iadm-check")?;
    let order = loaded.config.series.order;
    let adm = series(&setup, order)?;
    let pair = iadm_build(&setup.u0, &setup.params, order).map_err(CliError::from_core("iadm"))?;
    let iadm = recombine(&pair);
    let mut body = setup.header.clone();
    body.push_str("order,deviation\n");
    let mut worst = 0.0f64;
    for (j, (a, b)) in iadm.coeffs().iter().zip(adm.coeffs()).enumerate() {
        let dev = a.relative_distance(b);
        worst = worst.max(dev);
        writeln!(body, "{j},{}", sci(dev)).unwrap();
    }
    writeln!(body, "# max_deviation={}", sci(worst)).unwrap();
    writeln!(body, "# tolerance={}", sci(IADM_TOLERANCE)).unwrap();
    writeln!(
        body,
        "# verdict={}",
        if worst <= IADM_TOLERANCE {
            "pass"
        } else {
            "fail"
        }
    )
    .unwrap();
    Ok(vec![Output {
        name: "iadm_check.csv",
        body,
    }])
}

pub fn radius(loaded: &Loaded) -> Result<Vec<Output>, CliError> {
    let config = &loaded.config;
    let setup = setup(loaded, "radius")?;
    let window = config.analysis.tail_window;
    let order = config.series.order;
    if order < window + 2 {
        return Err(CliError::config(format!(
            "series.order: {order} is too short for analysis.tail_window = {window} (need order >= tail_window + 2)"
        )));
    }
    let cfg = config.integrator(&setup.grid, &setup.params)?;
    let s = series(&setup, order)?;
    let report = radius_estimate(&s, window).map_err(CliError::from_core("radius"))?;
    let verdict = divergence_report(&s, &setup.params, &report, &cfg)
        .map_err(CliError::from_core("divergence"))?;
    Ok(vec![
        Output {
            name: "radius.csv",
            body: format!("{}{}", setup.header, format_radius(&report)),
        },
        Output {
            name: "divergence.txt",
            body: format!("{}{}", setup.header, format_divergence(&verdict)),
        },
    ])
}

pub fn oracle(loaded: &Loaded) -> Result<Vec<Output>, CliError> {
    let config = &loaded.config;
    let setup = setup(loaded, "oracle")?;
    let (dt_fd, max_j) = (config.oracle.dt_fd, config.oracle.max_j);
    if max_j == 0 || max_j > adomian_core::reference::MAX_ORACLE_ORDER {
        return Err(CliError::config(format!(
            "oracle.max_j: must lie in 1..={} (got {max_j})",
            adomian_core::reference::MAX_ORACLE_ORDER
        )));
    }
    let s = series(&setup, config.series.order.max(max_j))?;
    let estimates = taylor_oracle_upto(&setup.u0, &setup.params, max_j, dt_fd)
        .map_err(CliError::from_core("oracle"))?;
    let mut body = setup.header.clone();
    body.push_str("j,relative_deviation,sup_deviation\n");
    for (j, est) in (1..=max_j).zip(&estimates) {
        let v = &s.coeffs()[j];
        writeln!(
            body,
            "{j},{},{}",
            sci(est.relative_distance(v)),
            sci((est - v).sup_norm())
        )
        .unwrap();
    }
    Ok(vec![Output {
        name: "oracle.csv",
        body,
    }])
}

pub fn soliton_validate(loaded: &Loaded) -> Result<Vec<Output>, CliError> {
    let config = &loaded.config;
    let params = config.params()?;
    let grid = config.grid()?;
    let spec = config.soliton_spec()?;
    let section = config.soliton.as_ref().expect("checked by soliton_spec");
    let value = residual(&spec, &params, &grid, section.t, section.dt_fd)
        .map_err(CliError::from_core("soliton"))?;
    let mut body = config.provenance("soliton-validate", &params);
    writeln!(body, "t = {}", sci(section.t)).unwrap();
    writeln!(body, "dt_fd = {}", sci(section.dt_fd)).unwrap();
    writeln!(body, "residual = {}", sci(value)).unwrap();
    writeln!(body, "threshold = {}", sci(RESIDUAL_TOLERANCE)).unwrap();
    writeln!(
        body,
        "verdict = {}",
        if value <= RESIDUAL_TOLERANCE {
            "valid"
        } else {
            "invalid"
        }
    )
    .unwrap();
    Ok(vec![Output {
        name: "residual.txt",
        body,
    }])
}
