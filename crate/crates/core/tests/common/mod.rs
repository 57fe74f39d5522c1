//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use geoquant::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Straight re-implementation of the quantile loss.
pub fn loss_direct(rows: &[[f64; 2]], u: [f64; 2], p: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for x in rows {
        let dx = x[0] - p[0];
        let dy = x[1] - p[1];
        total += (dx * dx + dy * dy).sqrt() + u[0] * dx + u[1] * dy;
    }
    total / rows.len() as f64
}

/// Minimizer of the loss by nested grid search: a 61 x 61 grid over a box, re-centred on the
/// best node and shrunk until the spacing is below `spacing`.
pub fn grid_argmin(rows: &[[f64; 2]], u: [f64; 2], spacing: f64) -> [f64; 2] {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for x in rows {
        for j in 0..2 {
            lo[j] = lo[j].min(x[j]);
            hi[j] = hi[j].max(x[j]);
        }
    }
    let diam = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3);
    // extreme quantiles leave the hull by a factor growing like 1/sqrt(1 - |u|)
    let reach = diam * (1.0 + 4.0 / (1.0 - (u[0] * u[0] + u[1] * u[1]).sqrt()).sqrt());
    let mut center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let mut half = reach;
    const STEPS: i32 = 30;
    loop {
        let h = half / STEPS as f64;
        let mut best = (f64::INFINITY, center);
        for a in -STEPS..=STEPS {
            for b in -STEPS..=STEPS {
                let p = [center[0] + a as f64 * h, center[1] + b as f64 * h];
                let v = loss_direct(rows, u, p);
                if v < best.0 {
                    best = (v, p);
                }
            }
        }
        center = best.1;
        if h < spacing {
            return center;
        }
        half = 4.0 * h;
    }
}

pub fn gaussian_rows(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            [
                rng.sample::<f64, _>(rand_distr::StandardNormal),
                rng.sample::<f64, _>(rand_distr::StandardNormal),
            ]
        })
        .collect()
}

pub fn uniform_rows(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-1.0..3.0)])
        .collect()
}

pub fn dataset(rows: &[[f64; 2]]) -> Dataset {
    Dataset::from_rows(rows).unwrap()
}

/// Row-major rotation by `theta`, optionally followed by the reflection `y -> -y`.
pub fn orthogonal(theta: f64, reflect: bool) -> [f64; 4] {
    let (s, c) = theta.sin_cos();
    if reflect {
        [c, s, s, -c]
    } else {
        [c, -s, s, c]
    }
}

pub fn apply(a: &[f64; 4], x: &[f64]) -> [f64; 2] {
    [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]]
}

pub fn transpose(a: &[f64; 4]) -> [f64; 4] {
    [a[0], a[2], a[1], a[3]]
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}
