//! Reduced density matrices for arbitrary bipartitions, purities and the
//! closed-form Gaussian widths.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gausspoly::{
    binomial, vandermonde, FactoredGaussPoly, MAX_TERM_PRODUCTS, GaussPolyFunction, Rational, RealPoly,
};
use crate::model::{ground_state_factors, ModelParams};

/// Largest pair count accepted by the reduction routines.
pub const MAX_REDUCE_N: usize = 5;

/// Kept particles `(M_a, M_b)`; the rest are traced out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    kept_a: usize,
    kept_b: usize,
}

impl Bipartition {
    pub fn new(kept_a: usize, kept_b: usize, n: usize) -> Result<Self> {
        if kept_a > n || kept_b > n || (kept_a == n && kept_b == n) || kept_a + kept_b == 0 {
            return Err(Error::InvalidBipartition { kept_a, kept_b, n });
        }
        Ok(Self { kept_a, kept_b })
    }

    /// All species-a particles against all species-b particles.
    pub fn species(n: usize) -> Self {
        Self { kept_a: n, kept_b: 0 }
    }

    pub fn single() -> Self {
        Self { kept_a: 1, kept_b: 0 }
    }

    pub fn pair_ab() -> Self {
        Self { kept_a: 1, kept_b: 1 }
    }

    pub fn pair_aa() -> Self {
        Self { kept_a: 2, kept_b: 0 }
    }

    pub fn kept_a(&self) -> usize {
        self.kept_a
    }

    pub fn kept_b(&self) -> usize {
        self.kept_b
    }

    pub fn kept(&self) -> usize {
        self.kept_a + self.kept_b
    }

    /// `C(N, M_a) C(N, M_b)`.
    pub fn binomial_factor(&self, n: usize) -> f64 {
        binomial(n, self.kept_a) * binomial(n, self.kept_b)
    }

    /// Whether the bipartition is one of `(1,0)`, `(1,1)`, `(2,0)`, `(N,0)`.
    pub fn is_standard(&self, n: usize) -> bool {
        matches!((self.kept_a, self.kept_b), (1, 0) | (1, 1) | (2, 0)) || (self.kept_a == n && self.kept_b == 0)
    }

    /// The traced-out particles. A pure state gives both sides the same purity.
    pub fn complement(&self, n: usize) -> Option<Self> {
        if self.kept_a > n || self.kept_b > n {
            return None;
        }
        Self::new(n - self.kept_a, n - self.kept_b, n).ok()
    }

    fn check(&self, n: usize) -> Result<()> {
        Self::new(self.kept_a, self.kept_b, n).map(|_| ())
    }
}

/// Rows are the centre-of-mass and relative-coordinate vectors of an
/// `m`-particle block.
pub fn com_relative_matrix(m: usize) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(m, m);
    if m == 0 {
        return u;
    }
    let s = 1.0 / (m as f64).sqrt();
    for j in 0..m {
        u[(0, j)] = s;
    }
    for i in 2..=m {
        let w = 1.0 / ((i * (i - 1)) as f64).sqrt();
        for j in 1..i {
            u[(i - 1, j - 1)] = -w;
        }
        u[(i - 1, i - 1)] = (i - 1) as f64 * w;
    }
    u
}

// Variable layout of the product psi(X, Y) psi(X', Y): [X, X', Y_a, Y_b].
#[derive(Clone, Copy)]
struct Layout {
    n: usize,
    ka: usize,
    kb: usize,
}

impl Layout {
    fn k(&self) -> usize {
        self.ka + self.kb
    }

    fn dim(&self) -> usize {
        2 * self.k() + (self.n - self.ka) + (self.n - self.kb)
    }

    fn ya(&self) -> std::ops::Range<usize> {
        let s = 2 * self.k();
        s..s + self.n - self.ka
    }

    fn yb(&self) -> std::ops::Range<usize> {
        let s = 2 * self.k() + self.n - self.ka;
        s..s + self.n - self.kb
    }

    // Product index of original coordinate `i` in copy `primed`.
    fn map(&self, primed: bool) -> Vec<usize> {
        let n = self.n;
        let off = if primed { self.k() } else { 0 };
        (0..2 * n)
            .map(|i| {
                if i < n {
                    if i < self.ka {
                        off + i
                    } else {
                        self.ya().start + i - self.ka
                    }
                } else {
                    let j = i - n;
                    if j < self.kb {
                        off + self.ka + j
                    } else {
                        self.yb().start + j - self.kb
                    }
                }
            })
            .collect()
    }

    fn x_a(&self, primed: bool) -> Vec<usize> {
        let off = if primed { self.k() } else { 0 };
        (off..off + self.ka).collect()
    }

    fn x_b(&self, primed: bool) -> Vec<usize> {
        let off = if primed { self.k() } else { 0 };
        (off + self.ka..off + self.k()).collect()
    }

    fn labels(&self) -> Vec<String> {
        let mut l = rdm_labels(self.ka, self.kb);
        l.extend((1..=self.n - self.ka).map(|i| format!("za{i}")));
        l.extend((1..=self.n - self.kb).map(|i| format!("zb{i}")));
        l
    }

    // x_old = M x_new, with Y blocks expressed through COM/relative coordinates.
    fn transform(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::identity(d, d);
        for range in [self.ya(), self.yb()] {
            let u = com_relative_matrix(range.len()).transpose();
            for (i, r) in range.clone().enumerate() {
                for (j, c) in range.clone().enumerate() {
                    m[(r, c)] = u[(i, j)];
                }
            }
        }
        m
    }
}

/// Labels `xa1.., xb1.., xa1'.., xb1'..` of a reduced density matrix.
pub fn rdm_labels(ka: usize, kb: usize) -> Vec<String> {
    let mut l = Vec::new();
    for prime in ["", "'"] {
        l.extend((1..=ka).map(|i| format!("xa{i}{prime}")));
        l.extend((1..=kb).map(|i| format!("xb{i}{prime}")));
    }
    l
}

fn cross_product(dim: usize, xs: &[usize], ys: &[usize]) -> RealPoly {
    let mut p = RealPoly::one(dim);
    for &x in xs {
        for &y in ys {
            let d = RealPoly::variable(dim, x)
                .and_then(|v| v.sub(&RealPoly::variable(dim, y)?))
                .expect("valid indices");
            p = p.mul(&d).expect("same dimension");
        }
    }
    p
}

/// A reduced density matrix `rho(X, X')` over `M_a + M_b` unprimed and as
/// many primed coordinates (species a first within each group).
#[derive(Clone, Debug)]
pub struct ReducedDensityMatrix {
    func: FactoredGaussPoly,
    bipartition: Bipartition,
    params: ModelParams,
    raw_trace: f64,
}

#[derive(Serialize)]
struct RdmDoc<'a> {
    n: usize,
    lambda: f64,
    kept_a: usize,
    kept_b: usize,
    raw_trace: f64,
    function: &'a GaussPolyFunction,
}

impl ReducedDensityMatrix {
    pub fn bipartition(&self) -> Bipartition {
        self.bipartition
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// Trace before the final renormalization.
    pub fn raw_trace(&self) -> f64 {
        self.raw_trace
    }

    pub fn factored(&self) -> &FactoredGaussPoly {
        &self.func
    }

    /// The matrix as a single polynomial times Gaussian.
    pub fn func(&self) -> GaussPolyFunction {
        self.func.expand()
    }

    /// Number of unprimed coordinates.
    pub fn kept(&self) -> usize {
        self.bipartition.kept()
    }

    pub fn evaluate(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        let k = self.kept();
        if x.len() != k || x_prime.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: if x.len() != k { x.len() } else { x_prime.len() },
            });
        }
        let mut p = x.to_vec();
        p.extend_from_slice(x_prime);
        self.func.evaluate(&p)
    }

    /// `(ln |rho|, sign)` at `(x, x')`.
    pub fn log_abs_evaluate(&self, x: &[f64], x_prime: &[f64]) -> Result<(f64, f64)> {
        let mut p = x.to_vec();
        p.extend_from_slice(x_prime);
        self.func.log_abs_evaluate(&p)
    }

    /// `rho(X, X)` as a function of `X`.
    pub fn diagonal(&self) -> Result<FactoredGaussPoly> {
        let k = self.kept();
        let mut m = DMatrix::zeros(2 * k, k);
        for i in 0..k {
            m[(i, i)] = 1.0;
            m[(k + i, i)] = 1.0;
        }
        self.func.compose(&m, self.func.labels()[..k].to_vec())
    }

    /// `Tr rho`.
    pub fn trace(&self) -> Result<f64> {
        self.diagonal()?.integrate_all()
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> Result<f64> {
        purity(self)
    }

    pub fn to_json(&self) -> Result<String> {
        let f = self.func();
        let doc = RdmDoc {
            n: self.n(),
            lambda: self.params.lambda(),
            kept_a: self.bipartition.kept_a(),
            kept_b: self.bipartition.kept_b(),
            raw_trace: self.raw_trace,
            function: &f,
        };
        serde_json::to_string(&doc).map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn check_capacity(params: &ModelParams) -> Result<()> {
    if params.n() > MAX_REDUCE_N {
        return Err(Error::Capacity(format!(
            "reduced density matrices are limited to N <= {MAX_REDUCE_N}, got N = {}",
            params.n()
        )));
    }
    Ok(())
}

fn finish(
    product: FactoredGaussPoly,
    layout: Layout,
    bip: Bipartition,
    params: &ModelParams,
) -> Result<ReducedDensityMatrix> {
    let labels = product.labels().to_vec();
    let transformed = product.compose(&layout.transform(), labels)?;
    let traced: Vec<usize> = layout.ya().chain(layout.yb()).collect();
    let func = transformed.integrate_out(&traced)?;
    let mut rho = ReducedDensityMatrix {
        func,
        bipartition: bip,
        params: *params,
        raw_trace: 1.0,
    };
    let trace = rho.trace()?;
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(Error::InternalConsistency(format!(
            "reduced density matrix has non-positive trace {trace}"
        )));
    }
    rho.func = rho.func.scale(1.0 / trace);
    rho.raw_trace = trace;
    Ok(rho)
}

/// `rho(X, X') = integral psi(X, Y) psi(X', Y) dY` for a wave function over
/// `x1 .. x2N` (species a first), given in factored form.
pub fn reduce_factored(
    psi: &FactoredGaussPoly,
    bip: Bipartition,
    params: &ModelParams,
) -> Result<ReducedDensityMatrix> {
    check_capacity(params)?;
    let n = params.n();
    bip.check(n)?;
    if psi.num_vars() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: psi.num_vars(),
        });
    }
    let layout = Layout {
        n,
        ka: bip.kept_a(),
        kb: bip.kept_b(),
    };
    let d = layout.dim();
    let labels = layout.labels();
    let embed = |primed: bool| -> Result<FactoredGaussPoly> {
        let map = layout.map(primed);
        let kernel = psi.kernel().embed(d, &map)?;
        let factors = psi
            .factors()
            .iter()
            .map(|f| f.embed(d, &map))
            .collect::<Result<Vec<_>>>()?;
        FactoredGaussPoly::new(labels.clone(), kernel, factors)
    };
    let product = embed(false)?.mul(&embed(true)?)?;
    finish(product, layout, bip, params)
}

/// Generic reduction of an expanded wave function.
pub fn reduce(psi: &GaussPolyFunction, bip: Bipartition, params: &ModelParams) -> Result<ReducedDensityMatrix> {
    reduce_factored(&psi.to_factored(), bip, params)
}

/// Reduction of the hybrid ground state. Each Vandermonde factor is split
/// into kept, mixed and traced parts so that only the mixed products take
/// part in the elimination.
pub fn reduce_ground_state(params: &ModelParams, bip: Bipartition) -> Result<ReducedDensityMatrix> {
    check_capacity(params)?;
    let n = params.n();
    bip.check(n)?;
    let layout = Layout {
        n,
        ka: bip.kept_a(),
        kb: bip.kept_b(),
    };
    let d = layout.dim();
    let psi = ground_state_factors(params);
    let kernel = psi
        .kernel()
        .embed(d, &layout.map(false))?
        .mul(&psi.kernel().embed(d, &layout.map(true))?)?;
    let ya: Vec<usize> = layout.ya().collect();
    let yb: Vec<usize> = layout.yb().collect();
    let mut factors = Vec::new();
    if n > 1 {
        for primed in [false, true] {
            let xa = layout.x_a(primed);
            let xb = layout.x_b(primed);
            factors.push(vandermonde::<Rational>(d, &xa)?.to_real());
            factors.push(vandermonde::<Rational>(d, &xb)?.to_real());
            factors.push(cross_product(d, &xa, &ya));
            factors.push(cross_product(d, &xb, &yb));
        }
        let va = vandermonde::<Rational>(d, &ya)?.to_real();
        let vb = vandermonde::<Rational>(d, &yb)?.to_real();
        factors.extend([va.clone(), va, vb.clone(), vb]);
    }
    factors.retain(|f| f.degree() > 0 || f.coefficient(&vec![0; d]) != 1.0);
    let product = FactoredGaussPoly::new(layout.labels(), kernel, factors)?;
    finish(product, layout, bip, params)
}

/// `Tr rho^2 = integral rho(X, X')^2 dX dX'`.
pub fn purity(rho: &ReducedDensityMatrix) -> Result<f64> {
    let k = rho.kept();
    let (ka, kb) = (rho.bipartition.kept_a(), rho.bipartition.kept_b());
    let mut m = DMatrix::zeros(2 * k, 2 * k);
    for (start, len) in [(0, ka), (ka, kb), (k, ka), (k + ka, kb)] {
        let u = com_relative_matrix(len).transpose();
        for i in 0..len {
            for j in 0..len {
                m[(start + i, start + j)] = u[(i, j)];
            }
        }
    }
    // Every variable of the largest factor meets its own copy in the square.
    let largest = rho.func.factors().iter().map(|f| f.len()).max().unwrap_or(1) as f64;
    if largest * largest > MAX_TERM_PRODUCTS {
        return Err(Error::Capacity(format!(
            "squaring a {largest}-term factor exceeds the elimination budget"
        )));
    }
    let f = rho.func.compose(&m, rho.func.labels().to_vec())?;
    let p = f.square().integrate_all()?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::PurityOutOfRange(p));
    }
    Ok(p)
}

/// `Tr rho^2` of the ground state, evaluated on the side of the cut that
/// keeps fewer particles. The other side is tried if the first exceeds the
/// capacity limits.
pub fn ground_state_purity(params: &ModelParams, bip: Bipartition) -> Result<f64> {
    bip.check(params.n())?;
    let mut sides = vec![bip];
    if let Some(c) = bip.complement(params.n()) {
        if c.kept() < bip.kept() {
            sides.insert(0, c);
        } else {
            sides.push(c);
        }
    }
    let mut last = None;
    for side in sides {
        match reduce_ground_state(params, side).and_then(|rho| purity(&rho)) {
            Err(e @ Error::Capacity(_)) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one side was tried"))
}

/// `Tr rho_{N_a}^2 = 2 sqrt(kappa2) / (1 + kappa2)`.
pub fn purity_species_closed(params: &ModelParams) -> f64 {
    let k2 = params.kappa2();
    2.0 * k2.sqrt() / (1.0 + k2)
}

/// Closed-form one-body matrix for a single pair (N = 1).
pub fn single_particle_closed(params: &ModelParams, x: f64, x_prime: f64) -> Result<f64> {
    if params.n() != 1 {
        return Err(Error::InvalidParameter(format!(
            "closed-form one-body matrix requires N = 1, got N = {}",
            params.n()
        )));
    }
    let k2 = params.kappa2();
    let pref = (2.0 * k2 / (std::f64::consts::PI * (k2 + 1.0))).sqrt();
    let s = x + x_prime;
    let d = x - x_prime;
    Ok(pref * (-k2 * s * s / (2.0 * (1.0 + k2)) - (1.0 + k2) * d * d / 8.0).exp())
}

/// Gaussian widths of the one-body matrix along `x = x'` and `x = -x'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingleWidths {
    pub sigma_plus: f64,
    pub sigma_minus: f64,
}

/// Gaussian widths of the a-b pair matrix along its four principal
/// directions in `(x_a, x_b, x_a', x_b')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairAbWidths {
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub sigma4: f64,
}

/// Gaussian widths of the a-a pair matrix along the centre-of-mass
/// directions in `(x_1, x_2, x_1', x_2')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairAaWidths {
    pub sigma_p: f64,
    pub sigma_m: f64,
}

fn width(precision_times_two: f64) -> f64 {
    precision_times_two.powf(-0.5)
}

pub fn gaussian_widths_single(params: &ModelParams) -> SingleWidths {
    let (k1, k2, n) = (params.kappa1(), params.kappa2(), params.n() as f64);
    SingleWidths {
        sigma_plus: width(4.0 * k1 * k2 * n / (k1 + k2 * (k1 + 2.0 * (n - 1.0)))),
        sigma_minus: width((k2 + 2.0 * k1 * (n - 1.0) + 1.0) / n),
    }
}

impl SingleWidths {
    /// `(sigma, unit direction)` pairs in `(x, x')`.
    pub fn directions(&self) -> [(f64, [f64; 2]); 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        [(self.sigma_plus, [s, s]), (self.sigma_minus, [s, -s])]
    }
}

pub fn gaussian_widths_pair_ab(params: &ModelParams) -> PairAbWidths {
    let (k1, k2, n) = (params.kappa1(), params.kappa2(), params.n() as f64);
    PairAbWidths {
        sigma1: width(2.0 * (k2 + k1 * (n - 1.0)) / n),
        sigma2: width(2.0 * (k1 * (n - 1.0) + 1.0) / n),
        sigma3: width(2.0 * k1 * k2 * n / (k1 + k2 * (n - 1.0))),
        sigma4: width(2.0 * k1 * n / (k1 + n - 1.0)),
    }
}

impl PairAbWidths {
    /// `(sigma, unit direction)` pairs in `(x_a, x_b, x_a', x_b')`.
    pub fn directions(&self) -> [(f64, [f64; 4]); 4] {
        [
            (self.sigma1, [0.5, -0.5, -0.5, 0.5]),
            (self.sigma2, [0.5, 0.5, -0.5, -0.5]),
            (self.sigma3, [0.5, -0.5, 0.5, -0.5]),
            (self.sigma4, [0.5, 0.5, 0.5, 0.5]),
        ]
    }
}

pub fn gaussian_widths_pair_aa(params: &ModelParams) -> PairAaWidths {
    let (k1, k2, n) = (params.kappa1(), params.kappa2(), params.n() as f64);
    PairAaWidths {
        sigma_p: width(2.0 * k1 * k2 * n / (k1 + k2 * (k1 + n - 2.0))),
        sigma_m: width(2.0 * (k2 + k1 * (n - 2.0) + 1.0) / n),
    }
}

impl PairAaWidths {
    /// `(sigma, unit direction)` pairs in `(x_1, x_2, x_1', x_2')`.
    pub fn directions(&self) -> [(f64, [f64; 4]); 2] {
        [
            (self.sigma_p, [0.5, 0.5, 0.5, 0.5]),
            (self.sigma_m, [0.5, 0.5, -0.5, -0.5]),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ground_state, make_params};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(2, 2, 2).is_err());
        assert!(Bipartition::new(0, 0, 2).is_err());
        assert!(Bipartition::new(3, 0, 2).is_err());
        assert!(Bipartition::new(0, 1, 2).is_ok());
        assert_eq!(Bipartition::new(2, 1, 3).unwrap().binomial_factor(3), 9.0);
        assert!(!Bipartition::new(2, 1, 3).unwrap().is_standard(3));
        assert!(Bipartition::species(3).is_standard(3));
    }

    #[test]
    fn complementary_sides_share_purity() {
        let p = make_params(3, -0.7).unwrap();
        for (ka, kb) in [(1, 0), (1, 1), (2, 1), (3, 0)] {
            let bip = Bipartition::new(ka, kb, 3).unwrap();
            let c = bip.complement(3).unwrap();
            assert_eq!((c.kept_a(), c.kept_b()), (3 - ka, 3 - kb));
            let direct = purity(&reduce_ground_state(&p, bip).unwrap()).unwrap();
            let other = purity(&reduce_ground_state(&p, c).unwrap()).unwrap();
            assert_relative_eq!(direct, other, max_relative = 1e-11);
            assert_relative_eq!(ground_state_purity(&p, bip).unwrap(), direct, max_relative = 1e-11);
        }
        assert!(Bipartition::species(2).complement(2).is_some());
    }

    #[test]
    fn com_relative_is_orthogonal() {
        for m in 1..6 {
            let u = com_relative_matrix(m);
            assert!((&u * u.transpose() - DMatrix::identity(m, m)).amax() < 1e-14);
        }
    }

    #[test]
    fn single_pair_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &l in &[-3.0, -0.4, 0.0, 0.3] {
            let p = make_params(1, l).unwrap();
            let rho = reduce_ground_state(&p, Bipartition::single()).unwrap();
            for _ in 0..100 {
                let x: f64 = rng.random_range(-2.0..2.0);
                let xp: f64 = rng.random_range(-2.0..2.0);
                let exact = single_particle_closed(&p, x, xp).unwrap();
                assert!((rho.evaluate(&[x], &[xp]).unwrap() - exact).abs() <= 1e-10 * exact.max(1e-3));
            }
            assert!((rho.raw_trace() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn generic_and_split_reductions_agree() {
        let p = make_params(2, -0.8).unwrap();
        let psi = ground_state(&p);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for bip in [Bipartition::single(), Bipartition::pair_ab(), Bipartition::pair_aa(), Bipartition::new(2, 1, 2).unwrap()] {
            let a = reduce(&psi, bip, &p).unwrap();
            let b = reduce_ground_state(&p, bip).unwrap();
            let k = bip.kept();
            for _ in 0..20 {
                let x: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
                let y: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
                let va = a.evaluate(&x, &y).unwrap();
                let vb = b.evaluate(&x, &y).unwrap();
                assert!((va - vb).abs() < 1e-11, "{bip:?}: {va} vs {vb}");
            }
        }
    }

    #[test]
    fn species_purity_matches_closed_form() {
        let p = make_params(2, -1.0).unwrap();
        let rho = reduce_ground_state(&p, Bipartition::species(2)).unwrap();
        assert_relative_eq!(rho.purity().unwrap(), 0.9241763718304448, max_relative = 1e-10);
        assert_relative_eq!(purity_species_closed(&p), 0.9241763718304448, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_purity_at_repulsive_limit() {
        let p = ModelParams::repulsive_limit(2).unwrap();
        assert_relative_eq!(purity_species_closed(&p), 0.08926419071857672, max_relative = 1e-9);
    }

    #[test]
    fn free_purities_hit_slater_bound() {
        for n in 2..=3 {
            let p = make_params(n, 0.0).unwrap();
            let r = reduce_ground_state(&p, Bipartition::single()).unwrap();
            assert_relative_eq!(r.purity().unwrap(), 1.0 / n as f64, max_relative = 1e-10);
            let r = reduce_ground_state(&p, Bipartition::species(n)).unwrap();
            assert_relative_eq!(r.purity().unwrap(), 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn hermitian_and_pauli() {
        let p = make_params(3, -2.0).unwrap();
        let rho = reduce_ground_state(&p, Bipartition::pair_aa()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = rho.evaluate(&x, &y).unwrap();
            let b = rho.evaluate(&y, &x).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-6));
            assert_eq!(rho.evaluate(&[x[0], x[0]], &[x[0], x[0]]).unwrap(), 0.0);
        }
    }

    #[test]
    fn widths_are_free_at_zero_coupling() {
        let p = make_params(3, 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = gaussian_widths_single(&p);
        assert_relative_eq!(w.sigma_plus, s, max_relative = 1e-15);
        assert_relative_eq!(w.sigma_minus, s, max_relative = 1e-15);
        let w = gaussian_widths_pair_ab(&p);
        for v in [w.sigma1, w.sigma2, w.sigma3, w.sigma4] {
            assert_relative_eq!(v, s, max_relative = 1e-15);
        }
        let w = gaussian_widths_pair_aa(&p);
        assert_relative_eq!(w.sigma_p, w.sigma_m, max_relative = 1e-15);
    }

    #[test]
    fn strong_attraction_localizes_along_diagonal() {
        let w = gaussian_widths_single(&make_params(2, -100.0).unwrap());
        assert!(w.sigma_plus > w.sigma_minus);
    }

    // The kernel of each constructed matrix has the closed-form widths as
    // eigen-directions with precision 1 / (2 sigma^2).
    fn assert_principal(rho: &ReducedDensityMatrix, dirs: &[(f64, Vec<f64>)]) {
        let a = rho.factored().kernel().a();
        for (sigma, u) in dirs {
            let u = nalgebra::DVector::from_column_slice(u);
            let au = a * &u;
            let expected = 1.0 / (2.0 * sigma * sigma);
            assert!((&au - &u * expected).amax() < 1e-9 * expected, "{au} vs {expected}");
        }
    }

    #[test]
    fn widths_are_kernel_eigen_directions() {
        for &(n, l) in &[(1, -1.0), (2, -10.0), (3, -10.0), (3, 0.1), (4, 1.0 / 16.0)] {
            let p = make_params(n, l).unwrap();
            let rho = reduce_ground_state(&p, Bipartition::single()).unwrap();
            let dirs: Vec<_> = gaussian_widths_single(&p).directions().iter().map(|(s, u)| (*s, u.to_vec())).collect();
            assert_principal(&rho, &dirs);
            if n >= 2 {
                let rho = reduce_ground_state(&p, Bipartition::pair_ab()).unwrap();
                let dirs: Vec<_> = gaussian_widths_pair_ab(&p).directions().iter().map(|(s, u)| (*s, u.to_vec())).collect();
                assert_principal(&rho, &dirs);
                let rho = reduce_ground_state(&p, Bipartition::pair_aa()).unwrap();
                let dirs: Vec<_> = gaussian_widths_pair_aa(&p).directions().iter().map(|(s, u)| (*s, u.to_vec())).collect();
                assert_principal(&rho, &dirs);
            }
        }
    }
}
