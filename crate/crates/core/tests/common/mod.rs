#![allow(dead_code)]

use adomian_core::{ComplexField, GridSpec};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

pub fn two_pi_grid(n: usize) -> GridSpec {
    GridSpec::new(0.0, 2.0 * PI, n).unwrap()
}

/// Trigonometric polynomial with random complex amplitudes on modes
/// `-max_mode..=max_mode`, decaying like `1 / (1 + |m|)^2`.
pub fn random_smooth(grid: GridSpec, seed: u64, max_mode: i32, scale: f64) -> ComplexField {
    let mut rng = StdRng::seed_from_u64(seed);
    let modes: Vec<(i32, Complex64)> = (-max_mode..=max_mode)
        .map(|m| {
            let decay = scale / (1.0 + f64::from(m.abs())).powi(2);
            (
                m,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay,
            )
        })
        .collect();
    ComplexField::from_fn(grid, |x| {
        modes
            .iter()
            .map(|&(m, c)| c * Complex64::from_polar(1.0, f64::from(m) * x))
            .sum()
    })
}
