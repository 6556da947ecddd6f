//! Finite-difference Hamiltonian residuals and exchange-symmetry fuzzing.

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gausspoly::GaussPolyFunction;
use crate::model::{ground_energy, ground_state, ModelParams};

pub const FD_STEP: f64 = 1e-3;
/// Points where `|psi|` is below this fraction of its largest value on the
/// stencil are skipped: the relative residual is meaningless on a node.
pub const NODE_THRESHOLD: f64 = 1e-3;
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_relative: f64,
    pub evaluated: usize,
    pub skipped: usize,
    pub step: f64,
}

/// `max |H psi - E0 psi| / (E0 |psi|)` over `points`, with the Laplacian
/// from five-point central differences.
pub fn schrodinger_residual(params: &ModelParams, points: &[Vec<f64>]) -> Result<ResidualReport> {
    residual(&ground_state(params), ground_energy(params), params, points)
}

fn residual(psi: &GaussPolyFunction, e0: f64, params: &ModelParams, points: &[Vec<f64>]) -> Result<ResidualReport> {
    let dim = 2 * params.n();
    let h = FD_STEP;
    let mut report = ResidualReport {
        max_relative: 0.0,
        evaluated: 0,
        skipped: 0,
        step: h,
    };
    for x in points {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        let centre = psi.evaluate(x)?;
        let mut y = x.clone();
        let mut laplacian = 0.0;
        let mut largest = centre.abs();
        for i in 0..dim {
            let mut at = |d: f64| -> Result<f64> {
                y[i] = x[i] + d;
                let v = psi.evaluate(&y)?;
                y[i] = x[i];
                Ok(v)
            };
            let (m2, m1, p1, p2) = (at(-2.0 * h)?, at(-h)?, at(h)?, at(2.0 * h)?);
            largest = largest.max(m2.abs()).max(m1.abs()).max(p1.abs()).max(p2.abs());
            laplacian += (-m2 + 16.0 * m1 - 30.0 * centre + 16.0 * p1 - p2) / (12.0 * h * h);
        }
        if centre.abs() < NODE_THRESHOLD * largest || centre == 0.0 {
            report.skipped += 1;
            continue;
        }
        let h_psi = -0.5 * laplacian + params.potential(x) * centre;
        let rel = (h_psi - e0 * centre).abs() / (e0 * centre.abs());
        report.max_relative = report.max_relative.max(rel);
        report.evaluated += 1;
    }
    Ok(report)
}

/// Points drawn from the Gaussian part of `|psi|^2`.
pub fn sample_points(psi: &GaussPolyFunction, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let a = psi.kernel().a() * 2.0;
    let chol = a.cholesky().ok_or(Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?;
    let lt = chol.l().transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = psi.num_vars();
    (0..count)
        .map(|_| {
            let z = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            let x = lt
                .solve_upper_triangular(&z)
                .ok_or(Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?;
            Ok(x.iter().copied().collect())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub max_antisymmetry_error: f64,
    pub max_species_swap_error: f64,
    pub identity_error: f64,
    /// Cross-species single swaps that changed the value; logged only.
    pub cross_species_changed: usize,
    pub passed: bool,
}

// Size of the terms summed to evaluate psi at x, the scale of its rounding error.
pub(crate) fn magnitude(psi: &GaussPolyFunction, x: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for (m, c) in psi.poly().terms() {
        let mut t = c.abs();
        for (i, xi) in x.iter().enumerate() {
            t *= xi.abs().powi(m.get(i) as i32);
        }
        s += t;
    }
    Ok(s * psi.kernel().evaluate(x)?)
}

/// Random same-species transpositions must flip the sign of `psi`, and the
/// exchange of the two species must leave it unchanged. `psi` has `n`
/// species-a coordinates followed by `n` species-b ones.
pub fn permutation_fuzz(psi: &GaussPolyFunction, n: usize, trials: usize, seed: u64) -> Result<FuzzReport> {
    if psi.num_vars() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: psi.num_vars(),
        });
    }
    let points = sample_points(psi, trials, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF022);
    let mut report = FuzzReport {
        trials,
        max_antisymmetry_error: 0.0,
        max_species_swap_error: 0.0,
        identity_error: 0.0,
        cross_species_changed: 0,
        passed: true,
    };
    for x in &points {
        let v = psi.evaluate(x)?;
        let scale = magnitude(psi, x)?.max(f64::MIN_POSITIVE);
        report.identity_error = report.identity_error.max((psi.evaluate(&x.clone())? - v).abs() / scale);
        if n >= 2 {
            let species = if rng.random_bool(0.5) { 0 } else { n };
            let mut pair: Vec<usize> = (species..species + n).collect();
            pair.shuffle(&mut rng);
            let mut y = x.clone();
            y.swap(pair[0], pair[1]);
            let err = (psi.evaluate(&y)? + v).abs() / scale;
            report.max_antisymmetry_error = report.max_antisymmetry_error.max(err);
        }
        let mut y = x.clone();
        for i in 0..n {
            y.swap(i, n + i);
        }
        let err = (psi.evaluate(&y)? - v).abs() / scale;
        report.max_species_swap_error = report.max_species_swap_error.max(err);
        let mut y = x.clone();
        y.swap(rng.random_range(0..n), n + rng.random_range(0..n));
        if (psi.evaluate(&y)? - v).abs() > ANTISYMMETRY_TOL * scale {
            report.cross_species_changed += 1;
        }
    }
    report.passed = report.max_antisymmetry_error <= ANTISYMMETRY_TOL
        && report.max_species_swap_error <= ANTISYMMETRY_TOL
        && report.identity_error == 0.0;
    Ok(report)
}
