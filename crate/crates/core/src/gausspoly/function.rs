use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::GaussianKernel;
use super::moments::{binomial, double_factorial_odd};
use super::poly::{Monomial, RealPoly};
use crate::error::{Error, Result};

/// Relative pruning threshold applied after every elimination step. Terms
/// this far below the largest one are rounding residue of cancellations.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-17;

// Relative size below which an off-diagonal kernel entry is treated as zero.
const COUPLING_TOL: f64 = 1e-14;

/// A Gaussian kernel times a polynomial, over labelled variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussPolyDoc", into = "GaussPolyDoc")]
pub struct GaussPolyFunction {
    labels: Vec<String>,
    kernel: GaussianKernel,
    poly: RealPoly,
}

/// A Gaussian kernel times a product of polynomial factors. Integration merges
/// only the factors that involve the variable being eliminated, which keeps
/// intermediate term counts far below those of the expanded product.
#[derive(Clone, Debug)]
pub struct FactoredGaussPoly {
    labels: Vec<String>,
    kernel: GaussianKernel,
    factors: Vec<RealPoly>,
}

fn check_labels(labels: &[String]) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::LabelMismatch(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::InvalidIndex { index: i, num_vars: n });
        }
        if seen[i] {
            return Err(Error::DuplicateIndex(i));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Labels `prefix1 .. prefixN`.
pub fn numbered_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn singularity_ratio(m: &DMatrix<f64>) -> f64 {
    let det = m.determinant();
    let norms: f64 = m.row_iter().map(|r| r.norm()).product();
    if norms == 0.0 {
        0.0
    } else {
        det.abs() / norms
    }
}

impl GaussPolyFunction {
    pub fn new(labels: Vec<String>, kernel: GaussianKernel, poly: RealPoly) -> Result<Self> {
        let n = labels.len();
        if kernel.num_vars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: kernel.num_vars(),
            });
        }
        if poly.num_vars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: poly.num_vars(),
            });
        }
        check_labels(&labels)?;
        Ok(Self { labels, kernel, poly })
    }

    /// The constant function 1.
    pub fn unit(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, GaussianKernel::constant(n, 0.0), RealPoly::one(n))
    }

    pub fn from_kernel(labels: Vec<String>, kernel: GaussianKernel) -> Result<Self> {
        let n = kernel.num_vars();
        Self::new(labels, kernel, RealPoly::one(n))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kernel(&self) -> &GaussianKernel {
        &self.kernel
    }

    pub fn poly(&self) -> &RealPoly {
        &self.poly
    }

    pub fn num_vars(&self) -> usize {
        self.labels.len()
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                found: labels.len(),
            });
        }
        check_labels(&labels)?;
        self.labels = labels;
        Ok(self)
    }

    /// Multiplies by a non-zero scalar.
    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.kernel.shift_log(s.abs().ln());
        if s < 0.0 {
            out.poly = out.poly.neg();
        }
        out
    }

    /// Pointwise product of two functions over identical labels.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.labels != other.labels {
            return Err(Error::LabelMismatch(format!(
                "{:?} vs {:?}",
                self.labels, other.labels
            )));
        }
        Ok(Self {
            labels: self.labels.clone(),
            kernel: self.kernel.mul(&other.kernel)?,
            poly: self.poly.mul(&other.poly)?,
        })
    }

    /// `f(M x)` for an invertible square `M`.
    pub fn substitute_linear(&self, m: &DMatrix<f64>) -> Result<Self> {
        let n = self.num_vars();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if m.nrows() != n { m.nrows() } else { m.ncols() },
            });
        }
        let ratio = singularity_ratio(m);
        if !(ratio > 1e-12) {
            return Err(Error::SingularMap { det: m.determinant() });
        }
        self.compose(m, self.labels.clone())
    }

    /// `f(M y)` where `M` has shape `(num_vars, new_labels.len())`; no
    /// invertibility requirement.
    pub fn compose(&self, m: &DMatrix<f64>, new_labels: Vec<String>) -> Result<Self> {
        if m.ncols() != new_labels.len() {
            return Err(Error::DimensionMismatch {
                expected: new_labels.len(),
                found: m.ncols(),
            });
        }
        let kernel = self.kernel.compose(m)?;
        let poly = self.poly.substitute_affine(m, None)?;
        Self::new(new_labels, kernel, poly)
    }

    /// Places the function into a larger variable set; variable `i` becomes
    /// `mapping[i]` of `new_labels`.
    pub fn embed(&self, new_labels: Vec<String>, mapping: &[usize]) -> Result<Self> {
        let n = new_labels.len();
        let kernel = self.kernel.embed(n, mapping)?;
        let poly = self.poly.embed(n, mapping)?;
        Self::new(new_labels, kernel, poly)
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        let e = self.kernel.exponent(point)?;
        Ok(e.exp() * self.poly.evaluate_unchecked(point))
    }

    /// `(ln |f|, sign f)` at `point`, usable far beyond the range where
    /// `evaluate` underflows.
    pub fn log_abs_evaluate(&self, point: &[f64]) -> Result<(f64, f64)> {
        let e = self.kernel.exponent(point)?;
        let p = self.poly.evaluate_unchecked(point);
        Ok((e + p.abs().ln(), p.signum()))
    }

    pub fn to_factored(&self) -> FactoredGaussPoly {
        FactoredGaussPoly {
            labels: self.labels.clone(),
            kernel: self.kernel.clone(),
            factors: vec![self.poly.clone()],
        }
    }

    /// Exact marginal over the variables in `subset`.
    pub fn integrate_out(&self, subset: &[usize]) -> Result<Self> {
        Ok(self.to_factored().integrate_out(subset)?.expand())
    }

    /// Integral over all variables.
    pub fn integrate_all(&self) -> Result<f64> {
        self.to_factored().integrate_all()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

impl FactoredGaussPoly {
    pub fn new(labels: Vec<String>, kernel: GaussianKernel, factors: Vec<RealPoly>) -> Result<Self> {
        let n = labels.len();
        if kernel.num_vars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: kernel.num_vars(),
            });
        }
        for f in &factors {
            if f.num_vars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: f.num_vars(),
                });
            }
        }
        check_labels(&labels)?;
        Ok(Self {
            labels,
            kernel,
            factors,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kernel(&self) -> &GaussianKernel {
        &self.kernel
    }

    pub fn factors(&self) -> &[RealPoly] {
        &self.factors
    }

    pub fn num_vars(&self) -> usize {
        self.labels.len()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.labels != other.labels {
            return Err(Error::LabelMismatch(format!(
                "{:?} vs {:?}",
                self.labels, other.labels
            )));
        }
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self {
            labels: self.labels.clone(),
            kernel: self.kernel.mul(&other.kernel)?,
            factors,
        })
    }

    /// Multiplies by a non-zero scalar.
    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.kernel.shift_log(s.abs().ln());
        if s < 0.0 {
            let n = out.num_vars();
            out.factors.push(RealPoly::constant(n, -1.0));
        }
        out
    }

    /// `f^2`, keeping the factor structure.
    pub fn square(&self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(self.factors.iter().cloned());
        Self {
            labels: self.labels.clone(),
            kernel: self.kernel.powi(2),
            factors,
        }
    }

    /// `f(M y)` where `M` has shape `(num_vars, new_labels.len())`. Rounding
    /// residue of cancelled terms is pruned at [`DEFAULT_PRUNE_TOL`] relative
    /// to each factor's typical size under the new kernel.
    pub fn compose(&self, m: &DMatrix<f64>, new_labels: Vec<String>) -> Result<Self> {
        if m.ncols() != new_labels.len() {
            return Err(Error::DimensionMismatch {
                expected: new_labels.len(),
                found: m.ncols(),
            });
        }
        let kernel = self.kernel.compose(m)?;
        let scales = variable_scales(&kernel, &vec![true; m.ncols()]);
        let factors = self
            .factors
            .iter()
            .map(|f| {
                let mut g = f.substitute_affine(m, None)?;
                g.prune(DEFAULT_PRUNE_TOL, &scales);
                Ok(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(new_labels, kernel, factors)
    }

    /// Multiplies out all factors.
    pub fn expand(&self) -> GaussPolyFunction {
        let n = self.num_vars();
        let mut sorted: Vec<&RealPoly> = self.factors.iter().collect();
        sorted.sort_by_key(|f| f.len());
        let poly = sorted
            .into_iter()
            .fold(RealPoly::one(n), |acc, f| acc.mul_unchecked(f));
        GaussPolyFunction {
            labels: self.labels.clone(),
            kernel: self.kernel.clone(),
            poly,
        }
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        let e = self.kernel.exponent(point)?;
        let p: f64 = self
            .factors
            .iter()
            .map(|f| f.evaluate_unchecked(point))
            .product();
        Ok(e.exp() * p)
    }

    pub fn log_abs_evaluate(&self, point: &[f64]) -> Result<(f64, f64)> {
        let mut log = self.kernel.exponent(point)?;
        let mut sign = 1.0;
        for f in &self.factors {
            let v = f.evaluate_unchecked(point);
            log += v.abs().ln();
            sign *= v.signum();
        }
        Ok((log, sign))
    }

    /// Exact marginal over `subset`, by successive completion of the square.
    pub fn integrate_out(&self, subset: &[usize]) -> Result<Self> {
        self.integrate_out_with(subset, DEFAULT_PRUNE_TOL)
    }

    pub fn integrate_out_with(&self, subset: &[usize], prune_tol: f64) -> Result<Self> {
        let n = self.num_vars();
        check_subset(n, subset)?;
        let mut state = Elimination {
            kernel: self.kernel.clone(),
            factors: self.factors.clone(),
            active: vec![true; n],
            prune_tol,
        };
        let mut remaining: Vec<usize> = subset.to_vec();
        while !remaining.is_empty() {
            let pick = state.choose(&remaining);
            let v = remaining.remove(pick);
            state.eliminate(v)?;
        }
        Ok(state.finish(&self.labels))
    }

    /// Integral over every variable.
    pub fn integrate_all(&self) -> Result<f64> {
        let all: Vec<usize> = (0..self.num_vars()).collect();
        let r = self.integrate_out(&all)?;
        r.evaluate(&[])
    }
}

// Typical magnitude of each active variable: the marginal standard deviation
// when the active block is positive definite, else the diagonal width.
fn variable_scales(kernel: &GaussianKernel, active: &[bool]) -> Vec<f64> {
    let n = active.len();
    let idx: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
    let mut s = vec![1.0; n];
    if idx.is_empty() {
        return s;
    }
    let a = kernel.a();
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])]);
    if let Some(ch) = sub.cholesky() {
        let inv = ch.inverse();
        for (k, &i) in idx.iter().enumerate() {
            s[i] = inv[(k, k)].sqrt();
        }
    } else {
        for &i in &idx {
            let d = a[(i, i)];
            s[i] = if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 };
        }
    }
    s
}

/// Largest intermediate polynomial an elimination step may build.
pub const MAX_INTERMEDIATE_TERMS: f64 = 3.0e7;

/// Largest number of term products an elimination step may perform.
pub const MAX_TERM_PRODUCTS: f64 = 2.0e9;

// Bounds the merged product by both the product of term counts and the
// number of monomials available in its variables and degree.
fn check_merge_size(v: usize, involved: &[RealPoly], shift: &RealPoly) -> Result<()> {
    let n = shift.num_vars();
    let mut used = vec![false; n];
    let mut degree = 0;
    let mut products = 1.0f64;
    for f in involved.iter().chain(std::iter::once(shift)) {
        for (u, flag) in f.variables().into_iter().enumerate() {
            used[u] |= flag;
        }
    }
    for f in involved {
        degree += f.degree();
        products *= f.len() as f64;
    }
    let m = used.iter().filter(|&&u| u).count();
    let terms = products.min(binomial(degree + m, m));
    if terms > MAX_INTERMEDIATE_TERMS || products > MAX_TERM_PRODUCTS {
        return Err(Error::Capacity(format!(
            "eliminating variable {v} needs up to {terms:.3e} terms from {products:.3e} products"
        )));
    }
    Ok(())
}

struct Elimination {
    kernel: GaussianKernel,
    factors: Vec<RealPoly>,
    active: Vec<bool>,
    prune_tol: f64,
}

impl Elimination {
    fn coupled(&self, v: usize) -> usize {
        let a = self.kernel.a();
        let mut k = (0..self.active.len())
            .filter(|&w| {
                w != v
                    && self.active[w]
                    && a[(v, w)].abs() > COUPLING_TOL * (a[(v, v)] * a[(w, w)]).abs().sqrt()
            })
            .count();
        if self.kernel.b()[v] != 0.0 {
            k += 1;
        }
        k
    }

    // Estimated term count produced by eliminating `v`.
    fn cost(&self, v: usize) -> f64 {
        let mut size = 1.0f64;
        let mut deg = 0usize;
        for f in &self.factors {
            let d = f.degree_in(v);
            if d > 0 {
                size *= f.len() as f64;
                deg += d;
            }
        }
        if deg == 0 {
            return 0.0;
        }
        let k = self.coupled(v);
        size * binomial(deg + k, k)
    }

    fn choose(&self, remaining: &[usize]) -> usize {
        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        for (i, &v) in remaining.iter().enumerate() {
            let c = self.cost(v);
            if c < best_cost {
                best_cost = c;
                best = i;
            }
        }
        best
    }

    fn eliminate(&mut self, v: usize) -> Result<()> {
        let n = self.active.len();
        let piv = self.kernel.a()[(v, v)];
        if !(piv > 0.0) || !piv.is_finite() {
            return Err(Error::NotPositiveDefinite { index: v, pivot: piv });
        }

        // Couplings at the rounding level of the diagonal are cancellation
        // residue; dropping them keeps decoupled blocks decoupled.
        {
            let (a, _, _) = self.kernel.parts_mut();
            for w in 0..n {
                if w != v && self.active[w] {
                    let cut = COUPLING_TOL * (a[(v, v)] * a[(w, w)]).abs().sqrt();
                    if a[(v, w)].abs() <= cut {
                        a[(v, w)] = 0.0;
                        a[(w, v)] = 0.0;
                    }
                }
            }
        }

        // Conditional mean of v given the other active variables.
        let bv = self.kernel.b()[v];
        let mut shift = RealPoly::zero(n);
        if bv != 0.0 {
            shift.add_term(Monomial::one(), bv / piv);
        }
        for w in 0..n {
            if w != v && self.active[w] {
                let coef = -self.kernel.a()[(v, w)] / piv;
                if coef != 0.0 {
                    let mut m = Monomial::one();
                    m.set(w, 1);
                    shift.add_term(m, coef);
                }
            }
        }

        let (involved, rest): (Vec<RealPoly>, Vec<RealPoly>) =
            std::mem::take(&mut self.factors)
                .into_iter()
                .partition(|f| f.involves(v));
        self.factors = rest;

        // Kernel: completing the square.
        {
            let (a, b, c) = self.kernel.parts_mut();
            let col: Vec<f64> = (0..n).map(|w| a[(w, v)]).collect();
            *c += bv * bv / (2.0 * piv) + 0.5 * (2.0 * std::f64::consts::PI / piv).ln();
            for w in 0..n {
                if w == v || !self.active[w] || col[w] == 0.0 {
                    continue;
                }
                b[w] -= col[w] * bv / piv;
                for u in 0..n {
                    if u == v || !self.active[u] || col[u] == 0.0 {
                        continue;
                    }
                    a[(w, u)] -= col[w] * col[u] / piv;
                }
            }
            for w in 0..n {
                a[(w, v)] = 0.0;
                a[(v, w)] = 0.0;
            }
            b[v] = 0.0;
        }
        self.active[v] = false;

        if involved.is_empty() {
            return Ok(());
        }
        let mut involved = involved;
        involved.sort_by_key(|f| f.len());
        check_merge_size(v, &involved, &shift)?;
        let merged = involved
            .iter()
            .skip(1)
            .fold(involved[0].clone(), |acc, f| acc.mul_unchecked(f));
        let parts = merged.split_by_var(v);
        let deg = parts.len() - 1;

        // E[p(u + shift)] for u ~ N(0, 1/piv): smooth the coefficients of
        // v^k with the Gaussian moments, then evaluate at the shift by Horner.
        let mut smoothed = Vec::with_capacity(deg + 1);
        for k in 0..=deg {
            let mut g = RealPoly::zero(n);
            for j in 0..=(deg - k) / 2 {
                let p = &parts[k + 2 * j];
                if p.is_zero() {
                    continue;
                }
                let w = binomial(k + 2 * j, 2 * j) * double_factorial_odd(j) * piv.powi(-(j as i32));
                g.add_scaled(p, w);
            }
            smoothed.push(g);
            if shift.is_zero() {
                break;
            }
        }
        let mut result = smoothed.pop().expect("at least one coefficient");
        while let Some(g) = smoothed.pop() {
            let mut next = g;
            next.add_product(&result, &shift);
            result = next;
        }
        let scales = self.scales();
        result.prune(self.prune_tol, &scales);
        self.factors.push(result);
        Ok(())
    }

    fn scales(&self) -> Vec<f64> {
        variable_scales(&self.kernel, &self.active)
    }

    fn finish(self, labels: &[String]) -> FactoredGaussPoly {
        let keep = &self.active;
        let kernel = self.kernel.restrict(keep);
        let new_labels: Vec<String> = labels
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(l, _)| l.clone())
            .collect();
        let m = new_labels.len();
        let mut constant = 1.0;
        let mut factors = Vec::new();
        for f in &self.factors {
            let f = f.compact(keep);
            if f.degree() == 0 {
                constant *= f.coefficient(&vec![0u16; m]);
            } else {
                factors.push(f);
            }
        }
        let mut kernel = kernel;
        if constant == 0.0 {
            factors = vec![RealPoly::zero(m)];
        } else {
            kernel.shift_log(constant.abs().ln());
            if constant < 0.0 {
                factors.push(RealPoly::constant(m, -1.0));
            }
        }
        FactoredGaussPoly {
            labels: new_labels,
            kernel,
            factors,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    exps: Vec<u16>,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussPolyDoc {
    labels: Vec<String>,
    #[serde(rename = "A")]
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
    terms: Vec<TermDoc>,
}

impl From<GaussPolyFunction> for GaussPolyDoc {
    fn from(f: GaussPolyFunction) -> Self {
        let n = f.num_vars();
        let a = f.kernel.a();
        GaussPolyDoc {
            a: (0..n * n).map(|k| a[(k / n, k % n)]).collect(),
            b: f.kernel.b().iter().copied().collect(),
            c: f.kernel.c(),
            terms: f
                .poly
                .sorted_terms()
                .into_iter()
                .map(|(exps, &c)| TermDoc { exps, coeff: c })
                .collect(),
            labels: f.labels,
        }
    }
}

impl TryFrom<GaussPolyDoc> for GaussPolyFunction {
    type Error = Error;

    fn try_from(d: GaussPolyDoc) -> Result<Self> {
        let n = d.labels.len();
        if d.a.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: d.a.len(),
            });
        }
        let kernel = GaussianKernel::new(
            DMatrix::from_row_slice(n, n, &d.a),
            DVector::from_vec(d.b),
            d.c,
        )?;
        let poly = RealPoly::from_terms(n, d.terms.into_iter().map(|t| (t.exps, t.coeff)))?;
        GaussPolyFunction::new(d.labels, kernel, poly)
    }
}
