//! Brute-force versions of the model's integrals, built from pointwise
//! evaluation of the ground state only.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::decay::decay_rate;
use super::quadrature::{integrate, tensor_gauss_hermite, Estimate, Frame, QuadratureSpec};
use crate::error::{Error, Result};
use crate::gausspoly::{FactoredGaussPoly, GaussPolyFunction, GaussianKernel, RealPoly};
use crate::model::{ground_state, single_species_ground_state, ModelParams};
use crate::rdm::{Bipartition, PairAaWidths, PairAbWidths, SingleWidths};

// Generic offsets for decay rays; they keep the ray off the Pauli zeros.
const RAY_ORIGIN: [f64; 8] = [0.137, -0.291, 0.413, 0.058, -0.362, 0.221, -0.119, 0.307];

/// Gauss-Hermite node count that integrates a polynomial of total degree
/// `degree` times the frame Gaussian exactly, with one node to spare so the
/// coarse companion rule is exact too.
pub fn exact_nodes(degree: usize) -> usize {
    degree / 2 + 2
}

fn vandermonde_degree(n: usize) -> usize {
    n * (n - 1)
}

fn squared_frame(psi: &GaussPolyFunction) -> Result<Frame> {
    Frame::from_kernel(&psi.kernel().powi(2))
}

/// `integral |psi|^2` for the ground state.
pub fn norm_squared(params: &ModelParams, spec: Option<QuadratureSpec>) -> Result<Estimate> {
    let psi = ground_state(params);
    let spec = spec.unwrap_or_else(|| QuadratureSpec::gauss_hermite(exact_nodes(2 * vandermonde_degree(params.n()))));
    let f = |x: &[f64]| psi.evaluate(x).map_or(f64::NAN, |v| v * v);
    integrate(&f, &squared_frame(&psi)?, &spec)
}

/// `integral |psi_A|^2` for the single-species state.
pub fn single_species_norm_squared(n: usize, lambda: f64) -> Result<Estimate> {
    let psi = single_species_ground_state(n, lambda)?;
    let spec = QuadratureSpec::gauss_hermite(exact_nodes(n * (n - 1)));
    let f = |x: &[f64]| psi.evaluate(x).map_or(f64::NAN, |v| v * v);
    integrate(&f, &squared_frame(&psi)?, &spec)
}

/// `<psi|H|psi> / <psi|psi>` with the kinetic term as `1/2 |grad psi|^2` and
/// the gradient taken analytically.
pub fn energy_expectation(params: &ModelParams) -> Result<f64> {
    let psi = ground_state(params);
    let d = psi.num_vars();
    let derivs: Vec<RealPoly> = (0..d).map(|i| psi.poly().derivative(i)).collect();
    let a = psi.kernel().a().clone();
    let b = psi.kernel().b().clone();
    let density = |x: &[f64]| -> Result<f64> {
        let p = psi.poly().evaluate(x)?;
        let k = psi.kernel().evaluate(x)?;
        let xv = DVector::from_column_slice(x);
        let ax = &a * &xv;
        let mut grad2 = 0.0;
        for i in 0..d {
            let g = derivs[i].evaluate(x)? + (b[i] - ax[i]) * p;
            grad2 += g * g;
        }
        Ok((0.5 * grad2 + params.potential(x) * p * p) * k * k)
    };
    let deg = 2 * vandermonde_degree(params.n()) + 4;
    let spec = QuadratureSpec::gauss_hermite(exact_nodes(deg));
    let frame = squared_frame(&psi)?;
    let num = integrate(&|x: &[f64]| density(x).unwrap_or(f64::NAN), &frame, &spec)?;
    let den = norm_squared(params, Some(spec))?;
    Ok(num.value / den.value)
}

/// `<(w . x)^2>` under `|psi|^2`.
pub fn second_moment(params: &ModelParams, weights: &[f64]) -> Result<f64> {
    let psi = ground_state(params);
    if weights.len() != psi.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: psi.num_vars(),
            found: weights.len(),
        });
    }
    let spec = QuadratureSpec::gauss_hermite(exact_nodes(2 * vandermonde_degree(params.n()) + 2));
    let f = |x: &[f64]| {
        let s: f64 = x.iter().zip(weights).map(|(a, b)| a * b).sum();
        psi.evaluate(x).map_or(f64::NAN, |v| s * s * v * v)
    };
    let frame = squared_frame(&psi)?;
    Ok(integrate(&f, &frame, &spec)?.value / norm_squared(params, Some(spec))?.value)
}

/// Corrected widths from second moments of `|psi|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentWidths {
    pub single_d: f64,
    pub pair_ab_d: f64,
    pub pair_ab_ad: f64,
    pub pair_aa: Option<(f64, f64)>,
}

pub fn moment_widths(params: &ModelParams) -> Result<MomentWidths> {
    let n = params.n();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let unit = |pairs: &[(usize, f64)]| {
        let mut w = vec![0.0; 2 * n];
        for &(i, v) in pairs {
            w[i] = v;
        }
        w
    };
    let pair_aa = if n >= 2 {
        Some((
            second_moment(params, &unit(&[(0, s), (1, s)]))?.sqrt(),
            second_moment(params, &unit(&[(0, s), (1, -s)]))?.sqrt(),
        ))
    } else {
        None
    };
    Ok(MomentWidths {
        single_d: second_moment(params, &unit(&[(0, 1.0)]))?.sqrt(),
        pair_ab_d: second_moment(params, &unit(&[(0, s), (n, s)]))?.sqrt(),
        pair_ab_ad: second_moment(params, &unit(&[(0, s), (n, -s)]))?.sqrt(),
        pair_aa,
    })
}

/// `rho_a(x, x') = integral psi(x, r) psi(x', r) dr` over the other `2N - 1`
/// coordinates.
pub fn one_body_element(params: &ModelParams, x: f64, x_prime: f64) -> Result<f64> {
    let psi = ground_state(params);
    one_body_with(&psi, params.n(), x, x_prime)
}

fn one_body_with(psi: &GaussPolyFunction, n: usize, x: f64, x_prime: f64) -> Result<f64> {
    let d = psi.num_vars();
    let a = psi.kernel().a();
    let rest = d - 1;
    let arr = DMatrix::from_fn(rest, rest, |i, j| 2.0 * a[(i + 1, j + 1)]);
    let lin = DVector::from_fn(rest, |i, _| -(x + x_prime) * a[(i + 1, 0)]);
    let centre = arr
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite { index: 0, pivot: 0.0 })?
        .solve(&lin);
    let frame = Frame::new(centre, arr)?;
    let nodes = vandermonde_degree(n) + 1;
    let f = |r: &[f64]| {
        let mut p = Vec::with_capacity(d);
        p.push(x);
        p.extend_from_slice(r);
        let mut q = p.clone();
        q[0] = x_prime;
        match (psi.evaluate(&p), psi.evaluate(&q)) {
            (Ok(u), Ok(v)) => u * v,
            _ => f64::NAN,
        }
    };
    tensor_gauss_hermite(&f, &frame, nodes)
}

/// Farthest critical point of `rho_a(x, -x)`: sign changes of its slope on a
/// dense grid over `[0, 8 s]`, `s` the widest scale of `|psi|^2`, refined by
/// bisection on a fourth-order difference quotient.
pub fn antidiagonal_critical_point(params: &ModelParams, intervals: usize) -> Result<f64> {
    let psi = ground_state(params);
    let n = params.n();
    let reach = 8.0 * squared_frame(&psi)?.widest_scale();
    let step = reach / intervals as f64;
    let phi = |x: f64| one_body_with(&psi, n, x, -x);
    let grid: Vec<f64> = (0..=intervals).map(|i| phi(i as f64 * step)).collect::<Result<_>>()?;
    // differences approximate the slope at the interval midpoints
    let diffs: Vec<f64> = grid.windows(2).map(|w| w[1] - w[0]).collect();
    let mut bracket = None;
    for i in 0..diffs.len() - 1 {
        let (s0, s1) = (diffs[i], diffs[i + 1]);
        if s0 != 0.0 && s1 != 0.0 && (s0 > 0.0) != (s1 > 0.0) {
            bracket = Some(((i as f64 + 0.5) * step, (i as f64 + 1.5) * step));
        }
    }
    let Some((mut lo, mut hi)) = bracket else {
        return Ok(0.0);
    };
    let h = 1e-4 * reach;
    let slope = |x: f64| -> Result<f64> {
        Ok((8.0 * (phi(x + h)? - phi(x - h)?) - (phi(x + 2.0 * h)? - phi(x - 2.0 * h)?)) / (12.0 * h))
    };
    let flo = slope(lo)?;
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        let fm = slope(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `Tr rho^2` for the bipartition, as the integral of
/// `psi(X, Y) psi(X', Y) psi(X', Y') psi(X, Y')` over all four blocks.
pub fn purity_quadrature(params: &ModelParams, bip: Bipartition) -> Result<f64> {
    let n = params.n();
    let psi = ground_state(params);
    let kept: Vec<usize> = (0..bip.kept_a()).chain(n..n + bip.kept_b()).collect();
    let traced: Vec<usize> = (0..2 * n).filter(|i| !kept.contains(i)).collect();
    let (k, t) = (kept.len(), traced.len());
    let dim = 2 * k + 2 * t;
    // z = (X, X', Y, Y'); copy c of psi reads X from `xs[c]` and Y from `ys[c]`
    let xs = [0, k, k, 0];
    let ys = [2 * k, 2 * k, 2 * k + t, 2 * k + t];
    let maps: Vec<Vec<usize>> = (0..4)
        .map(|c| {
            let mut m = vec![0; 2 * n];
            for (j, &v) in kept.iter().enumerate() {
                m[v] = xs[c] + j;
            }
            for (j, &v) in traced.iter().enumerate() {
                m[v] = ys[c] + j;
            }
            m
        })
        .collect();
    let mut kernel = GaussianKernel::constant(dim, 0.0);
    for m in &maps {
        kernel = kernel.mul(&psi.kernel().embed(dim, m)?)?;
    }
    let frame = Frame::from_kernel(&kernel)?;
    let spec = QuadratureSpec::gauss_hermite(exact_nodes(4 * vandermonde_degree(n)));
    let f = |z: &[f64]| {
        let mut prod = 1.0;
        let mut x = vec![0.0; 2 * n];
        for m in &maps {
            for (i, &j) in m.iter().enumerate() {
                x[i] = z[j];
            }
            match psi.evaluate(&x) {
                Ok(v) => prod *= v,
                Err(_) => return f64::NAN,
            }
        }
        prod
    };
    Ok(integrate(&f, &frame, &spec)?.value)
}

/// Width of `exp(-t^2 / (4 sigma^2))` along `direction`, read off the decay of
/// a constructed density matrix.
pub fn decay_width(rho: &FactoredGaussPoly, direction: &[f64]) -> Result<f64> {
    let d = rho.num_vars();
    let origin: Vec<f64> = (0..d).map(|i| RAY_ORIGIN[i % RAY_ORIGIN.len()] * (1.0 + (i / 8) as f64)).collect();
    let log_abs = |x: &[f64]| rho.log_abs_evaluate(x).map(|v| v.0);
    Ok(decay_rate(&log_abs, &origin, direction)?.sigma())
}

/// Decay widths along the directions of `widths`, paired with the closed form.
pub fn single_decay_widths(rho: &FactoredGaussPoly, widths: &SingleWidths) -> Result<Vec<(f64, f64)>> {
    widths
        .directions()
        .iter()
        .map(|(s, u)| Ok((*s, decay_width(rho, u)?)))
        .collect()
}

pub fn pair_ab_decay_widths(rho: &FactoredGaussPoly, widths: &PairAbWidths) -> Result<Vec<(f64, f64)>> {
    widths
        .directions()
        .iter()
        .map(|(s, u)| Ok((*s, decay_width(rho, u)?)))
        .collect()
}

pub fn pair_aa_decay_widths(rho: &FactoredGaussPoly, widths: &PairAaWidths) -> Result<Vec<(f64, f64)>> {
    widths
        .directions()
        .iter()
        .map(|(s, u)| Ok((*s, decay_width(rho, u)?)))
        .collect()
}
