//! Hamiltonian parameters, normal modes, spectrum and ground states.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gausspoly::{
    numbered_labels, vandermonde, FactoredGaussPoly, GaussPolyFunction, GaussianKernel, Rational,
};

/// Dimensionless parameters of the N-pair Hamiltonian (hbar = m = omega = 1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams {
    n: usize,
    lambda: f64,
    kappa1: f64,
    kappa2: f64,
}

/// Coupling just inside the repulsive bound-state limit, `1/(2N) - 1e-6`.
pub fn lambda_star(n: usize) -> f64 {
    1.0 / (2.0 * n as f64) - 1e-6
}

/// Validates `(N, Lambda)` and derives the mode frequencies.
pub fn make_params(n: usize, lambda: f64) -> Result<ModelParams> {
    ModelParams::new(n, lambda)
}

impl ModelParams {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("N must be at least 1".into()));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("Lambda must be finite, got {lambda}")));
        }
        let nf = n as f64;
        if 1.0 - 2.0 * nf * lambda <= 0.0 {
            return Err(Error::NoBoundState {
                n,
                lambda,
                condition: "2*N*Lambda < 1",
            });
        }
        Ok(Self {
            n,
            lambda,
            kappa1: (1.0 - nf * lambda).sqrt(),
            kappa2: (1.0 - 2.0 * nf * lambda).sqrt(),
        })
    }

    /// Parameters at a given value of the product `N * Lambda`.
    pub fn from_n_lambda(n: usize, n_lambda: f64) -> Result<Self> {
        Self::new(n, n_lambda / n.max(1) as f64)
    }

    /// The preset `Lambda* = 1/(2N) - 1e-6`.
    pub fn repulsive_limit(n: usize) -> Result<Self> {
        Self::new(n, lambda_star(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_lambda(&self) -> f64 {
        self.n as f64 * self.lambda
    }

    /// Frequency of the relative modes, `sqrt(1 - N Lambda)`.
    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    /// Frequency of the species centre-of-mass difference, `sqrt(1 - 2 N Lambda)`.
    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    /// Frequencies of the 2N normal modes in basis order.
    pub fn mode_frequencies(&self) -> Vec<f64> {
        let mut w = vec![1.0];
        w.extend(std::iter::repeat(self.kappa1).take(2 * self.n - 2));
        w.push(self.kappa2);
        w
    }

    /// Potential energy at a configuration of the 2N coordinates.
    pub fn potential(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let trap: f64 = x.iter().map(|v| v * v).sum::<f64>() * 0.5;
        let mut inter = 0.0;
        for i in 0..n {
            for j in n..2 * n {
                inter += (x[i] - x[j]).powi(2);
            }
        }
        trap - 0.5 * self.lambda * inter
    }
}

/// Excitation numbers of the 2N normal modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantumNumbers {
    n: Vec<usize>,
}

impl QuantumNumbers {
    pub fn new(n: Vec<usize>) -> Result<Self> {
        if n.is_empty() || n.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "expected 2N quantum numbers, got {}",
                n.len()
            )));
        }
        Ok(Self { n })
    }

    /// Lowest fermionic configuration: relative modes filled 1..N-1 per species.
    pub fn ground(pairs: usize) -> Self {
        let mut n = vec![0];
        n.extend(1..pairs);
        n.extend(1..pairs);
        n.push(0);
        Self { n }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.n
    }
}

/// Orthogonal matrix whose rows are the normal-mode vectors.
#[derive(Clone, Debug)]
pub struct NormalModeBasis {
    n: usize,
    vectors: DMatrix<f64>,
}

impl NormalModeBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.vectors.row(i).iter().copied().collect()
    }
}

/// Normal-mode basis for N pairs: total centre of mass, species-a relative
/// modes, species-b relative modes, species centre-of-mass difference.
pub fn normal_mode_basis(n: usize) -> NormalModeBasis {
    let dim = 2 * n;
    let mut v = DMatrix::zeros(dim, dim);
    let norm = 1.0 / (dim as f64).sqrt();
    for j in 0..dim {
        v[(0, j)] = norm;
        v[(dim - 1, j)] = if j < n { norm } else { -norm };
    }
    for i in 2..=n {
        let s = 1.0 / ((i * (i - 1)) as f64).sqrt();
        for j in 1..=i {
            let e = if j < i { -s } else { (i - 1) as f64 * s };
            v[(i - 1, j - 1)] = e;
            v[(n - 1 + i - 1, j - 1 + n)] = e;
        }
    }
    NormalModeBasis { n, vectors: v }
}

/// `n_1 + 1/2 + kappa1 (n_2 + ... + n_{2N-1} + N - 1) + kappa2 (n_{2N} + 1/2)`.
pub fn energy_level(params: &ModelParams, qn: &QuantumNumbers) -> Result<f64> {
    let n = params.n();
    let q = qn.as_slice();
    if q.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: q.len(),
        });
    }
    let rel: usize = q[1..2 * n - 1].iter().sum();
    Ok(q[0] as f64
        + 0.5
        + params.kappa1() * (rel as f64 + n as f64 - 1.0)
        + params.kappa2() * (q[2 * n - 1] as f64 + 0.5))
}

/// `kappa1 (N^2 - 1) + (kappa2 + 1) / 2`.
pub fn ground_energy(params: &ModelParams) -> f64 {
    let n = params.n() as f64;
    params.kappa1() * (n * n - 1.0) + 0.5 * (params.kappa2() + 1.0)
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

// ln of 2^{N(N-1)/2} / (N! pi^{N/2} prod_{k<N} k!), the squared free-fermion constant.
fn ln_free_constant_sq(n: usize) -> f64 {
    let nf = n as f64;
    let prod: f64 = (0..n).map(ln_factorial).sum();
    0.5 * nf * (nf - 1.0) * 2f64.ln() - ln_factorial(n) - 0.5 * nf * std::f64::consts::PI.ln() - prod
}

/// Normalization of the hybrid ground state.
pub fn normalization_constant(params: &ModelParams) -> f64 {
    ln_normalization_constant(params).exp()
}

pub fn ln_normalization_constant(params: &ModelParams) -> f64 {
    let n = params.n() as f64;
    0.25 * params.kappa2().ln() + 0.5 * (n * n - 1.0) * params.kappa1().ln() + ln_free_constant_sq(params.n())
}

/// Normalization of the single-species N-fermion ground state.
pub fn single_species_normalization(n: usize, lambda: f64) -> Result<f64> {
    let kappa1 = single_species_kappa(n, lambda)?;
    let nf = n as f64;
    Ok((0.25 * (nf * nf - 1.0) * kappa1.ln() + 0.5 * ln_free_constant_sq(n)).exp())
}

fn single_species_kappa(n: usize, lambda: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("Lambda must be finite, got {lambda}")));
    }
    let k = 1.0 - n as f64 * lambda;
    if k <= 0.0 {
        return Err(Error::NoBoundState {
            n,
            lambda,
            condition: "N*Lambda < 1",
        });
    }
    Ok(k.sqrt())
}

/// Coordinate labels `x1 .. x2N` (species a first).
pub fn coordinate_labels(n: usize) -> Vec<String> {
    numbered_labels("x", 2 * n)
}

/// Quadratic form `A` of the ground state written as `exp(-1/2 x^T A x)`.
pub fn ground_state_quadratic_form(params: &ModelParams) -> DMatrix<f64> {
    let n = params.n();
    let nf = n as f64;
    let dim = 2 * n;
    let mut a = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let si = if i < n { 1.0 } else { -1.0 };
            let sj = if j < n { 1.0 } else { -1.0 };
            a[(i, j)] = (1.0 + params.kappa2() * si * sj) / (2.0 * nf);
        }
    }
    let k = params.kappa1() / nf;
    for block in [0, n] {
        for i in block..block + n {
            for j in block..block + n {
                if i == j {
                    a[(i, i)] += k * (n as f64 - 1.0);
                } else {
                    a[(i, j)] -= k;
                }
            }
        }
    }
    a
}

/// The ground state as a Gaussian kernel times the two Vandermonde factors,
/// kept separate.
pub fn ground_state_factors(params: &ModelParams) -> FactoredGaussPoly {
    let n = params.n();
    let dim = 2 * n;
    let a_vars: Vec<usize> = (0..n).collect();
    let b_vars: Vec<usize> = (n..dim).collect();
    let va = vandermonde::<Rational>(dim, &a_vars).expect("valid indices").to_real();
    let vb = vandermonde::<Rational>(dim, &b_vars).expect("valid indices").to_real();
    let kernel = GaussianKernel::new(
        ground_state_quadratic_form(params),
        DVector::zeros(dim),
        ln_normalization_constant(params),
    )
    .expect("symmetric by construction");
    let factors = if n == 1 { vec![] } else { vec![va, vb] };
    FactoredGaussPoly::new(coordinate_labels(n), kernel, factors).expect("consistent dimensions")
}

/// Normalized ground state over `x1 .. x2N`.
pub fn ground_state(params: &ModelParams) -> GaussPolyFunction {
    ground_state_factors(params).expand()
}

/// Single-species ground state over `x1 .. xN` for coupling `lambda`.
pub fn single_species_ground_state(n: usize, lambda: f64) -> Result<GaussPolyFunction> {
    let kappa1 = single_species_kappa(n, lambda)?;
    let nf = n as f64;
    let mut a = DMatrix::from_element(n, n, 1.0 / nf);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                a[(i, i)] += kappa1 * (nf - 1.0) / nf;
            } else {
                a[(i, j)] -= kappa1 / nf;
            }
        }
    }
    let c = single_species_normalization(n, lambda)?.ln();
    let kernel = GaussianKernel::new(a, DVector::zeros(n), c)?;
    let vars: Vec<usize> = (0..n).collect();
    let poly = vandermonde::<Rational>(n, &vars)?.to_real();
    GaussPolyFunction::new(numbered_labels("x", n), kernel, poly)
}

/// Ground state assembled as `kappa2^{1/4} psi_A psi_B exp(-(kappa2 - 1) N (R_a - R_b)^2 / 4)`.
pub fn ground_state_factorized(params: &ModelParams) -> GaussPolyFunction {
    let n = params.n();
    let nf = n as f64;
    let dim = 2 * n;
    let labels = coordinate_labels(n);
    let single = single_species_ground_state(n, params.lambda())
        .expect("NL < 1 follows from 2NL < 1 for attractive and weak repulsive couplings");
    let a_map: Vec<usize> = (0..n).collect();
    let b_map: Vec<usize> = (n..dim).collect();
    let psi_a = single.embed(labels.clone(), &a_map).expect("valid map");
    let psi_b = single.embed(labels.clone(), &b_map).expect("valid map");
    let mut d = DMatrix::zeros(dim, dim);
    let w = (params.kappa2() - 1.0) / (2.0 * nf);
    for i in 0..dim {
        for j in 0..dim {
            let si = if i < n { 1.0 } else { -1.0 };
            let sj = if j < n { 1.0 } else { -1.0 };
            d[(i, j)] = w * si * sj;
        }
    }
    let cross = GaussPolyFunction::from_kernel(
        labels,
        GaussianKernel::new(d, DVector::zeros(dim), 0.25 * params.kappa2().ln()).expect("symmetric"),
    )
    .expect("consistent");
    psi_a.mul(&psi_b).and_then(|p| p.mul(&cross)).expect("same labels")
}

/// Asymptotic regime used by [`volume_fraction`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VolumeRegime {
    NonInteracting,
    StrongRepulsive,
    StrongAttractive,
}

/// Regime matching the sign of the coupling.
pub fn volume_regime(params: &ModelParams) -> VolumeRegime {
    if params.lambda() == 0.0 {
        VolumeRegime::NonInteracting
    } else if params.lambda() > 0.0 {
        VolumeRegime::StrongRepulsive
    } else {
        VolumeRegime::StrongAttractive
    }
}

/// Ratio of occupied to available volume in one of the asymptotic regimes.
/// No interpolation between regimes is attempted.
pub fn volume_fraction(params: &ModelParams, regime: VolumeRegime) -> Result<f64> {
    let found = volume_regime(params);
    if found != regime {
        return Err(Error::InvalidParameter(format!(
            "regime {regime:?} does not apply at Lambda = {} ({found:?})",
            params.lambda()
        )));
    }
    Ok(match regime {
        VolumeRegime::NonInteracting => 1.0,
        VolumeRegime::StrongRepulsive => std::f64::consts::SQRT_2,
        VolumeRegime::StrongAttractive => 1.0 / (-params.n_lambda()).sqrt(),
    })
}
