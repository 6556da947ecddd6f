//! Spatial correlations: joint distributions, corrected and Gaussian widths,
//! and the coherence of the pair matrix.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gausspoly::{FactoredGaussPoly, GaussianKernel, RealPoly};
use crate::model::{ground_state_factors, ModelParams};
use crate::rdm::{
    gaussian_widths_pair_ab, gaussian_widths_pair_aa, gaussian_widths_single, rdm_labels, reduce_ground_state,
    Bipartition,
};

/// Default number of grid points per axis.
pub const DEFAULT_RESOLUTION: usize = 201;

const ROOT_SCAN_INTERVALS: usize = 40_000;
const ROOT_TOL: f64 = 1e-13;

/// A square grid `[min, max]^2` with `resolution` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    min: f64,
    max: f64,
    resolution: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, resolution: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidParameter(format!("grid range [{min}, {max}] is empty or not finite")));
        }
        if resolution < 2 {
            return Err(Error::InvalidParameter(format!("grid resolution must be at least 2, got {resolution}")));
        }
        Ok(Self { min, max, resolution })
    }

    /// `[-half_width, half_width]^2`.
    pub fn symmetric(half_width: f64, resolution: usize) -> Result<Self> {
        Self::new(-half_width, half_width, resolution)
    }

    /// `[-6 sigma, 6 sigma]^2` with `sigma` the larger one-body Gaussian width.
    pub fn default_for(params: &ModelParams) -> Self {
        let w = gaussian_widths_single(params);
        let half = 6.0 * w.sigma_plus.max(w.sigma_minus);
        Self {
            min: -half,
            max: half,
            resolution: DEFAULT_RESOLUTION,
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.resolution - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.resolution)
            .map(|i| if i + 1 == self.resolution { self.max } else { self.min + i as f64 * h })
            .collect()
    }
}

/// Values `f(axis[i], axis[j])` stored row-major in `values[i * n + j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridValues {
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridValues {
    fn tabulate(grid: &Grid, f: impl Fn(f64, f64) -> Result<f64> + Sync) -> Result<Self> {
        let axis = grid.points();
        let rows: Vec<Vec<f64>> = axis
            .par_iter()
            .map(|&x| axis.iter().map(|&y| f(x, y)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(Self {
            axis,
            values: rows.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis.len() + j]
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let n = self.axis.len();
        let h = if n > 1 { self.axis[1] - self.axis[0] } else { 0.0 };
        let w = |i: usize| if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += w(i) * w(j) * self.get(i, j);
            }
        }
        s * h * h
    }
}

/// Diagonal and anti-diagonal widths of one distribution, corrected and
/// Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub diagonal: f64,
    pub antidiagonal: f64,
    pub gaussian_diagonal: f64,
    pub gaussian_antidiagonal: f64,
    pub n: usize,
    pub lambda: f64,
}

/// Which reduced matrix a width report describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthKind {
    Single,
    PairAb,
    PairAa,
}

fn selection(rows: &[&[f64]]) -> DMatrix<f64> {
    let cols = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// `rho_ab` over `(x_a, x_b, x_a', x_b')`. A single pair is in a pure state.
pub fn pair_ab_density(params: &ModelParams) -> Result<FactoredGaussPoly> {
    if params.n() > 1 {
        return Ok(reduce_ground_state(params, Bipartition::pair_ab())?.factored().clone());
    }
    let psi = ground_state_factors(params);
    let labels = rdm_labels(1, 1);
    let left = psi.compose(&selection(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]]), labels.clone())?;
    let right = psi.compose(&selection(&[&[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]), labels)?;
    left.mul(&right)
}

pub fn pair_aa_density(params: &ModelParams) -> Result<FactoredGaussPoly> {
    if params.n() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a same-species pair needs N >= 2, got N = {}",
            params.n()
        )));
    }
    Ok(reduce_ground_state(params, Bipartition::pair_aa())?.factored().clone())
}

// Restriction of a two-particle matrix to its diagonal X = X'.
fn pair_diagonal(rho: &FactoredGaussPoly) -> Result<FactoredGaussPoly> {
    let m = selection(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]]);
    rho.compose(&m, vec!["x1".into(), "x2".into()])
}

fn second_moment(dist: &FactoredGaussPoly, direction: &[f64]) -> Result<f64> {
    let n = dist.num_vars();
    let mut lin = RealPoly::zero(n);
    for (i, &w) in direction.iter().enumerate() {
        lin = lin.add(&RealPoly::variable(n, i)?.scale(&w))?;
    }
    let weight = FactoredGaussPoly::new(
        dist.labels().to_vec(),
        GaussianKernel::constant(n, 0.0),
        vec![lin.clone(), lin],
    )?;
    let m2 = dist.mul(&weight)?.integrate_all()?;
    let norm = dist.integrate_all()?;
    if !(m2 >= 0.0) || !(norm > 0.0) {
        return Err(Error::InternalConsistency(format!(
            "second moment {m2} with normalization {norm}"
        )));
    }
    Ok(m2 / norm)
}

/// `D_ab(x_a, x_b) = rho_ab(x_a, x_b; x_a, x_b)` on the grid.
pub fn joint_distribution_ab(params: &ModelParams, grid: &Grid) -> Result<GridValues> {
    let d = pair_diagonal(&pair_ab_density(params)?)?;
    GridValues::tabulate(grid, |x, y| d.evaluate(&[x, y]))
}

/// `D_aa(x_a, x_a') = rho_aa(x_a, x_a'; x_a, x_a')` on the grid.
pub fn joint_distribution_aa(params: &ModelParams, grid: &Grid) -> Result<GridValues> {
    let d = pair_diagonal(&pair_aa_density(params)?)?;
    GridValues::tabulate(grid, |x, y| d.evaluate(&[x, y]))
}

/// `rho_a(x, x')` on the grid.
pub fn one_body_matrix(params: &ModelParams, grid: &Grid) -> Result<GridValues> {
    let rho = reduce_ground_state(params, Bipartition::single())?;
    GridValues::tabulate(grid, |x, y| rho.evaluate(&[x], &[y]))
}

/// `(sigma_a^d, sigma_a^ad)`: the rms of `rho_a(x, x)` and the farthest
/// critical point of `rho_a(x, -x)`.
pub fn corrected_width_single(params: &ModelParams) -> Result<(f64, f64)> {
    let rho = reduce_ground_state(params, Bipartition::single())?;
    let diag = rho.diagonal()?;
    let sigma_d = second_moment(&diag, &[1.0])?.sqrt();
    let anti = rho
        .factored()
        .compose(&selection(&[&[1.0], &[-1.0]]), vec!["x".into()])?
        .expand();
    let a = anti.kernel().a()[(0, 0)];
    let b = anti.kernel().b()[0];
    // rho_a(x, -x) is even; odd coefficients are rounding residue
    let mut p = univariate_coefficients(anti.poly());
    p.iter_mut().skip(1).step_by(2).for_each(|v| *v = 0.0);
    // d/dx [P exp(-a x^2 / 2 + b x)] = (P' + (b - a x) P) exp(...)
    let mut q = vec![0.0; p.len() + 1];
    for (k, &c) in p.iter().enumerate() {
        if k > 0 {
            q[k - 1] += k as f64 * c;
        }
        q[k] += b * c;
        q[k + 1] -= a * c;
    }
    let sigma_ad = largest_positive_root(&q, 10.0 * gaussian_widths_single(params).sigma_minus)?.unwrap_or(0.0);
    Ok((sigma_d, sigma_ad))
}

/// `(sigma_ab^d, sigma_ab^ad)`: rms of `(x_a + x_b)/sqrt 2` and
/// `(x_a - x_b)/sqrt 2` under `D_ab`.
pub fn corrected_width_pair_ab(params: &ModelParams) -> Result<(f64, f64)> {
    let d = pair_diagonal(&pair_ab_density(params)?)?;
    diagonal_widths(&d)
}

/// `(sigma_aa^d, sigma_aa^ad)` under `D_aa`.
pub fn corrected_width_pair_aa(params: &ModelParams) -> Result<(f64, f64)> {
    let d = pair_diagonal(&pair_aa_density(params)?)?;
    diagonal_widths(&d)
}

fn diagonal_widths(d: &FactoredGaussPoly) -> Result<(f64, f64)> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok((second_moment(d, &[s, s])?.sqrt(), second_moment(d, &[s, -s])?.sqrt()))
}

/// `(2 kappa1)^{-1/2}`, the Gaussian scale of a same-species separation.
pub fn rms_separation_gaussian(params: &ModelParams) -> f64 {
    (2.0 * params.kappa1()).powf(-0.5)
}

/// Corrected widths next to the Gaussian widths of the same distribution.
/// The Gaussian values are the standard deviations of the Gaussian factor
/// along each axis: `sigma_+, sigma_-` for the one-body matrix,
/// `sigma_4, sigma_3` for `D_ab` and `sigma_p, (2 kappa1)^{-1/2}` for `D_aa`.
pub fn width_report(params: &ModelParams, kind: WidthKind) -> Result<WidthReport> {
    let ((diagonal, antidiagonal), (gaussian_diagonal, gaussian_antidiagonal)) = match kind {
        WidthKind::Single => {
            let w = gaussian_widths_single(params);
            (corrected_width_single(params)?, (w.sigma_plus, w.sigma_minus))
        }
        WidthKind::PairAb => {
            let w = gaussian_widths_pair_ab(params);
            (corrected_width_pair_ab(params)?, (w.sigma4, w.sigma3))
        }
        WidthKind::PairAa => {
            let w = gaussian_widths_pair_aa(params);
            (corrected_width_pair_aa(params)?, (w.sigma_p, rms_separation_gaussian(params)))
        }
    };
    Ok(WidthReport {
        diagonal,
        antidiagonal,
        gaussian_diagonal,
        gaussian_antidiagonal,
        n: params.n(),
        lambda: params.lambda(),
    })
}

/// `rho_ab(x, x; x', x')` for repeated evaluation.
#[derive(Clone, Debug)]
pub struct CoherenceProbe {
    rho: FactoredGaussPoly,
}

impl CoherenceProbe {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Ok(Self {
            rho: pair_ab_density(params)?,
        })
    }

    pub fn value(&self, x: f64, x_prime: f64) -> Result<f64> {
        self.rho.evaluate(&[x, x, x_prime, x_prime])
    }

    /// `ln |rho_ab(x, x; x', x')|`.
    pub fn log_abs_value(&self, x: f64, x_prime: f64) -> Result<f64> {
        Ok(self.rho.log_abs_evaluate(&[x, x, x_prime, x_prime])?.0)
    }
}

/// `|rho_ab(x, x; x', x')|`, the coherence between a pair at `x` and at `x'`.
pub fn odlro_check(params: &ModelParams, x: f64, x_prime: f64) -> Result<f64> {
    Ok(CoherenceProbe::new(params)?.value(x, x_prime)?.abs())
}

fn univariate_coefficients(p: &RealPoly) -> Vec<f64> {
    let mut c = vec![0.0; p.degree() + 1];
    for (m, v) in p.terms() {
        c[m.get(0) as usize] += v;
    }
    c
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

// Largest positive root of an odd polynomial: a dense sign scan of
// `(0, hint]`, then a coarser scan out to the Fujiwara bound, then bisection.
fn largest_positive_root(coeffs: &[f64], hint: f64) -> Result<Option<f64>> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::RootFinding(format!("non-finite coefficients {coeffs:?}")));
    }
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= 1e-14 * scale) {
        c.pop();
    }
    let d = c.len() - 1;
    if d == 0 {
        return Ok(None);
    }
    let lead = c[d];
    let bound = 2.0
        * (1..=d)
            .map(|k| {
                let r = (c[d - k] / lead).abs();
                if k == d { (r / 2.0).powf(1.0 / k as f64) } else { r.powf(1.0 / k as f64) }
            })
            .fold(0.0f64, f64::max);
    if !(bound > 0.0) {
        return Ok(None);
    }
    let hint = hint.min(bound);
    let mut nodes: Vec<f64> = (1..=ROOT_SCAN_INTERVALS)
        .map(|i| hint * i as f64 / ROOT_SCAN_INTERVALS as f64)
        .collect();
    let mut x = hint;
    while x < bound {
        x = (x * 1.001).min(bound);
        nodes.push(x);
    }
    let mut bracket = None;
    for w in nodes.windows(2) {
        let (fa, fb) = (horner(&c, w[0]), horner(&c, w[1]));
        if fa == 0.0 {
            bracket = Some((w[0], w[0]));
        } else if fb != 0.0 && (fa > 0.0) != (fb > 0.0) {
            bracket = Some((w[0], w[1]));
        }
    }
    if let Some(&last) = nodes.last() {
        if horner(&c, last) == 0.0 {
            bracket = Some((last, last));
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(None);
    };
    let (a0, b0) = (lo, hi);
    let flo = horner(&c, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= ROOT_TOL * hi.max(1.0) || mid <= lo || mid >= hi {
            return Ok(Some(mid));
        }
        let fm = horner(&c, mid);
        if fm == 0.0 {
            return Ok(Some(mid));
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::RootFinding(format!(
        "bisection on [{a0:e}, {b0:e}] stalled at [{lo:e}, {hi:e}] for a degree-{d} polynomial"
    )))
}
