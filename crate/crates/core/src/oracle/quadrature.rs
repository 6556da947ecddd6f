//! Brute-force integration over R^d: tensor Gauss-Hermite, nested adaptive
//! Gauss-Kronrod and importance-sampled Monte Carlo.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gausspoly::GaussianKernel;

pub const MAX_TENSOR_DIM: usize = 8;
pub const MAX_ADAPTIVE_DIM: usize = 3;
pub const DEFAULT_MC_SAMPLES: u64 = 10_000_000;
pub const DEFAULT_SEED: u64 = 0x5EED;
const MAX_TENSOR_POINTS: f64 = 2e9;
const MC_CHUNK: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    GaussHermite,
    Adaptive,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    /// Nodes per axis for Gauss-Hermite, Kronrod panels per axis for the
    /// adaptive scheme.
    pub nodes: usize,
    pub samples: u64,
    /// Half-width of the adaptive box in standard deviations of the frame.
    pub range_scale: f64,
    pub seed: u64,
}

impl QuadratureSpec {
    pub fn gauss_hermite(nodes: usize) -> Self {
        Self {
            scheme: Scheme::GaussHermite,
            nodes,
            samples: 0,
            range_scale: 0.0,
            seed: 0,
        }
    }

    pub fn adaptive(range_scale: f64) -> Self {
        Self {
            scheme: Scheme::Adaptive,
            nodes: 8,
            samples: 0,
            range_scale,
            seed: 0,
        }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Self {
            scheme: Scheme::MonteCarlo,
            nodes: 0,
            samples,
            range_scale: 0.0,
            seed,
        }
    }

    pub fn describe(&self) -> String {
        match self.scheme {
            Scheme::GaussHermite => format!("tensor Gauss-Hermite, {} nodes per axis", self.nodes),
            Scheme::Adaptive => format!("adaptive Gauss-Kronrod on +-{} sigma", self.range_scale),
            Scheme::MonteCarlo => format!("Monte Carlo, {} samples, seed {:#x}", self.samples, self.seed),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self.scheme {
            Scheme::GaussHermite => {
                if self.nodes < 2 {
                    return Err(Error::InvalidParameter(format!("need at least 2 nodes, got {}", self.nodes)));
                }
                if dim > MAX_TENSOR_DIM {
                    return Err(Error::Capacity(format!(
                        "tensor quadrature in {dim} dimensions exceeds the cap of {MAX_TENSOR_DIM}"
                    )));
                }
                if (self.nodes as f64).powi(dim as i32) > MAX_TENSOR_POINTS {
                    return Err(Error::Capacity(format!("{}^{dim} tensor nodes", self.nodes)));
                }
            }
            Scheme::Adaptive => {
                if dim > MAX_ADAPTIVE_DIM {
                    return Err(Error::Capacity(format!(
                        "adaptive quadrature in {dim} dimensions exceeds the cap of {MAX_ADAPTIVE_DIM}"
                    )));
                }
                if self.nodes < 2 || !(self.range_scale > 0.0) {
                    return Err(Error::InvalidParameter("adaptive box must be non-empty".into()));
                }
            }
            Scheme::MonteCarlo => {
                if self.samples < 2 {
                    return Err(Error::InvalidParameter(format!("need at least 2 samples, got {}", self.samples)));
                }
            }
        }
        Ok(())
    }
}

/// Reference Gaussian `exp(-1/2 (x - mu)^T A (x - mu))` that fixes node
/// placement, box orientation and the Monte Carlo proposal.
#[derive(Clone, Debug)]
pub struct Frame {
    center: DVector<f64>,
    axes: DMatrix<f64>,
    precisions: DVector<f64>,
}

impl Frame {
    pub fn new(center: DVector<f64>, a: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != center.len() || a.ncols() != center.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                found: a.nrows(),
            });
        }
        let eig = SymmetricEigen::new((&a + a.transpose()) * 0.5);
        if let Some((index, &pivot)) = eig.eigenvalues.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
            return Err(Error::NotPositiveDefinite { index, pivot });
        }
        Ok(Self {
            center,
            axes: eig.eigenvectors,
            precisions: eig.eigenvalues,
        })
    }

    /// `exp(-|x|^2)`.
    pub fn standard(dim: usize) -> Self {
        Self {
            center: DVector::zeros(dim),
            axes: DMatrix::identity(dim, dim),
            precisions: DVector::from_element(dim, 2.0),
        }
    }

    /// The Gaussian of `kernel`, centred at its maximum.
    pub fn from_kernel(kernel: &GaussianKernel) -> Result<Self> {
        let chol = kernel.a().clone().cholesky().ok_or(Error::NotPositiveDefinite {
            index: 0,
            pivot: kernel.a().symmetric_eigenvalues().min(),
        })?;
        Self::new(chol.solve(kernel.b()), kernel.a().clone())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Largest standard deviation of the reference Gaussian.
    pub fn widest_scale(&self) -> f64 {
        self.precisions.iter().fold(0.0f64, |m, &l| m.max(l.powf(-0.5)))
    }

    // x = mu + Q diag(s) y
    fn map(&self, scales: &[f64], y: &[f64], x: &mut [f64]) {
        let d = self.dim();
        for i in 0..d {
            let mut v = self.center[i];
            for j in 0..d {
                v += self.axes[(i, j)] * scales[j] * y[j];
            }
            x[i] = v;
        }
    }
}

/// Value with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Gauss-Hermite nodes and weights for the weight `exp(-x^2)`, by the
/// Golub-Welsch eigenvalue method.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::zeros(n, n);
    for k in 1..n {
        let off = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = off;
        j[(k - 1, k)] = off;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // symmetrize away the eigensolver's rounding
    for i in 0..n / 2 {
        let (x, w) = (0.5 * (pairs[n - 1 - i].0 - pairs[i].0), 0.5 * (pairs[i].1 + pairs[n - 1 - i].1));
        pairs[i] = (-x, w);
        pairs[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// `integral of f over R^d`, where `d` is the frame dimension.
pub fn integrate(f: &(dyn Fn(&[f64]) -> f64 + Sync), frame: &Frame, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate(frame.dim())?;
    match spec.scheme {
        Scheme::GaussHermite => {
            let fine = tensor_gauss_hermite(f, frame, spec.nodes)?;
            let coarse = tensor_gauss_hermite(f, frame, spec.nodes - 1)?;
            Ok(Estimate {
                value: fine,
                error: (fine - coarse).abs(),
            })
        }
        Scheme::Adaptive => adaptive(f, frame, spec),
        Scheme::MonteCarlo => monte_carlo(f, frame, spec.samples, spec.seed),
    }
}

pub(crate) fn tensor_gauss_hermite(f: &(dyn Fn(&[f64]) -> f64 + Sync), frame: &Frame, nodes: usize) -> Result<f64> {
    let d = frame.dim();
    let (x, w) = gauss_hermite(nodes);
    // e^{-|y|^2} weight against a frame whose exponent is -|y|^2
    let scales: Vec<f64> = frame.precisions.iter().map(|l| (2.0 / l).sqrt()).collect();
    let jac: f64 = scales.iter().product();
    if d == 0 {
        return Ok(f(&[]));
    }
    let total = nodes.pow(d as u32 - 1);
    let slices: Vec<Result<f64>> = (0..nodes)
        .into_par_iter()
        .map(|first| {
            let mut y = vec![0.0; d];
            let mut pt = vec![0.0; d];
            let mut idx = vec![0usize; d];
            idx[0] = first;
            let mut sum = 0.0;
            for flat in 0..total {
                let mut r = flat;
                for k in 1..d {
                    idx[k] = r % nodes;
                    r /= nodes;
                }
                let mut weight = 1.0;
                let mut r2 = 0.0;
                for k in 0..d {
                    y[k] = x[idx[k]];
                    weight *= w[idx[k]];
                    r2 += y[k] * y[k];
                }
                frame.map(&scales, &y, &mut pt);
                let v = f(&pt);
                if !v.is_finite() {
                    return Err(Error::NonFinite(first * total + flat));
                }
                sum += weight * v * r2.exp();
            }
            Ok(sum)
        })
        .collect();
    let mut sum = 0.0;
    for s in slices {
        sum += s?;
    }
    Ok(jac * sum)
}

const KRONROD_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const KRONROD_W: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_W: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod(f: &mut dyn FnMut(f64) -> Result<f64>, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut k = KRONROD_W[7] * fc;
    let mut g = GAUSS_W[3] * fc;
    for i in 0..7 {
        let s = f(c - h * KRONROD_X[i])? + f(c + h * KRONROD_X[i])?;
        k += KRONROD_W[i] * s;
        if i % 2 == 1 {
            g += GAUSS_W[i / 2] * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 15-point Gauss-Kronrod on `[a, b]`, starting from
/// `panels` equal pieces.
pub fn adaptive_1d(
    f: &mut dyn FnMut(f64) -> Result<f64>,
    a: f64,
    b: f64,
    panels: usize,
    rel_tol: f64,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let h = (b - a) / panels as f64;
    for k in 0..panels {
        let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let (value, error) = kronrod(f, lo, hi)?;
        heap.push(Panel { a: lo, b: hi, value, error });
    }
    for _ in 0..2000 {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        if err <= rel_tol * total.abs() || err < 1e-300 {
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = kronrod(f, lo, hi)?;
            heap.push(Panel { a: lo, b: hi, value, error });
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    Ok(Estimate {
        value: panels.iter().map(|p| p.value).sum(),
        error: panels.iter().map(|p| p.error).sum(),
    })
}

fn adaptive(f: &(dyn Fn(&[f64]) -> f64 + Sync), frame: &Frame, spec: &QuadratureSpec) -> Result<Estimate> {
    let d = frame.dim();
    let scales: Vec<f64> = frame.precisions.iter().map(|l| l.powf(-0.5)).collect();
    let jac: f64 = scales.iter().product();
    let r = spec.range_scale;
    let mut y = vec![0.0; d];
    let mut pt = vec![0.0; d];
    let mut count = 0usize;
    let est = nested(f, frame, &scales, r, spec.nodes, 0, &mut y, &mut pt, &mut count)?;
    Ok(Estimate {
        value: jac * est.value,
        error: jac * est.error,
    })
}

#[allow(clippy::too_many_arguments)]
fn nested(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    frame: &Frame,
    scales: &[f64],
    r: f64,
    panels: usize,
    level: usize,
    y: &mut Vec<f64>,
    pt: &mut Vec<f64>,
    count: &mut usize,
) -> Result<Estimate> {
    let d = frame.dim();
    if d == 0 {
        return Ok(Estimate { value: f(&[]), error: 0.0 });
    }
    let mut g = |t: f64| -> Result<f64> {
        y[level] = t;
        if level + 1 == d {
            frame.map(scales, y, pt);
            let v = f(pt);
            *count += 1;
            if !v.is_finite() {
                return Err(Error::NonFinite(*count));
            }
            Ok(v)
        } else {
            Ok(nested(f, frame, scales, r, panels, level + 1, y, pt, count)?.value)
        }
    };
    adaptive_1d(&mut g, -r, r, panels, 1e-13)
}

fn monte_carlo(f: &(dyn Fn(&[f64]) -> f64 + Sync), frame: &Frame, samples: u64, seed: u64) -> Result<Estimate> {
    let d = frame.dim();
    let scales: Vec<f64> = frame.precisions.iter().map(|l| l.powf(-0.5)).collect();
    // log of the proposal normalization (2 pi)^{d/2} prod sigma_i
    let log_norm = 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln() + scales.iter().map(|s| s.ln()).sum::<f64>();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut z = vec![0.0; d];
            let mut pt = vec![0.0; d];
            let (mut s1, mut s2) = (0.0, 0.0);
            let end = ((c + 1) * MC_CHUNK).min(samples);
            for i in c * MC_CHUNK..end {
                let mut r2 = 0.0;
                for v in z.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                    r2 += *v * *v;
                }
                frame.map(&scales, &z, &mut pt);
                let fx = f(&pt);
                if !fx.is_finite() {
                    return Err(Error::NonFinite(i as usize));
                }
                let w = fx * (0.5 * r2 + log_norm).exp();
                s1 += w;
                s2 += w * w;
            }
            Ok((s1, s2))
        })
        .collect();
    let (mut s1, mut s2) = (0.0, 0.0);
    for p in partial {
        let (a, b) = p?;
        s1 += a;
        s2 += b;
    }
    let n = samples as f64;
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(Estimate {
        value: mean,
        error: (var / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_hermite_integrates_gaussian() {
        let est = integrate(&|x: &[f64]| (-x[0] * x[0]).exp(), &Frame::standard(1), &QuadratureSpec::gauss_hermite(20)).unwrap();
        assert!((est.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
        let (x, w) = gauss_hermite(5);
        assert_eq!(x[2], 0.0);
        assert_relative_eq!(w.iter().sum::<f64>(), std::f64::consts::PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn second_moment() {
        // (1/4) sqrt(pi/2)
        let want = 0.25 * (std::f64::consts::PI / 2.0).sqrt();
        let f = |x: &[f64]| x[0] * x[0] * (-2.0 * x[0] * x[0]).exp();
        let gh = integrate(&f, &Frame::standard(1), &QuadratureSpec::gauss_hermite(30)).unwrap();
        assert_relative_eq!(gh.value, want, max_relative = 1e-12);
        let ad = integrate(&f, &Frame::standard(1), &QuadratureSpec::adaptive(12.0)).unwrap();
        assert_relative_eq!(ad.value, want, max_relative = 1e-12);
    }

    #[test]
    fn principal_axes_make_gauss_hermite_exact() {
        let a = DMatrix::from_row_slice(2, 2, &[400.0, 399.0, 399.0, 400.0]);
        let frame = Frame::new(DVector::from_vec(vec![0.3, -0.1]), a.clone()).unwrap();
        let f = |x: &[f64]| {
            let (u, v) = (x[0] - 0.3, x[1] + 0.1);
            (1.0 + x[0] * x[1]) * (-0.5 * (400.0 * u * u + 798.0 * u * v + 400.0 * v * v)).exp()
        };
        let est = integrate(&f, &frame, &QuadratureSpec::gauss_hermite(4)).unwrap();
        // 2 pi / sqrt(det A) * (1 + E[xy]), E[xy] = mu_x mu_y + (A^{-1})_{01}
        let det: f64 = 400.0 * 400.0 - 399.0 * 399.0;
        let want = 2.0 * std::f64::consts::PI / det.sqrt() * (1.0 + (-0.03) + (-399.0 / det));
        assert_relative_eq!(est.value, want, max_relative = 1e-13);
        assert!(est.error < 1e-13);
        let ad = integrate(&f, &frame, &QuadratureSpec::adaptive(12.0)).unwrap();
        assert_relative_eq!(ad.value, want, max_relative = 1e-11);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_consistent() {
        let f = |x: &[f64]| (1.0 + x[0] * x[0]) * (-x[0] * x[0] - x[1] * x[1]).exp();
        let spec = QuadratureSpec::monte_carlo(200_000, DEFAULT_SEED);
        let a = integrate(&f, &Frame::standard(2), &spec).unwrap();
        let b = integrate(&f, &Frame::standard(2), &spec).unwrap();
        assert_eq!(a, b);
        let want = 1.5 * std::f64::consts::PI;
        assert!((a.value - want).abs() < 4.0 * a.error, "{a:?}");
        let c = integrate(&f, &Frame::standard(2), &QuadratureSpec::monte_carlo(200_000, 7)).unwrap();
        assert_ne!(a.value, c.value);
    }

    #[test]
    fn caps_and_non_finite_values() {
        let f = |_: &[f64]| 1.0;
        assert!(matches!(
            integrate(&f, &Frame::standard(9), &QuadratureSpec::gauss_hermite(2)),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            integrate(&f, &Frame::standard(4), &QuadratureSpec::adaptive(5.0)),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            integrate(&|_: &[f64]| f64::NAN, &Frame::standard(1), &QuadratureSpec::gauss_hermite(3)),
            Err(Error::NonFinite(_))
        ));
        assert!(Frame::new(DVector::zeros(2), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
    }
}
