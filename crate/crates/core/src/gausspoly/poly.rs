//! Sparse multivariate polynomials keyed by exponent vectors.

use std::collections::hash_map::Entry;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use super::moments::double_factorial_odd;
use crate::error::{Error, Result};

/// Largest number of variables a polynomial may have.
pub const MAX_VARS: usize = 32;

/// Largest exponent of a single variable.
pub const MAX_EXPONENT: u16 = 255;

const HIGH_BITS: u64 = 0x8080_8080_8080_8080;

/// Exponent vector packed one byte per variable. Variable 0 occupies the most
/// significant byte, so the derived order is lexicographic.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial([u64; MAX_VARS / 8]);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    /// Panics if there are more than [`MAX_VARS`] entries or an entry exceeds
    /// [`MAX_EXPONENT`].
    pub fn from_exponents(exps: &[u16]) -> Self {
        assert!(exps.len() <= MAX_VARS, "at most {MAX_VARS} variables are supported");
        let mut m = Self::default();
        for (i, &e) in exps.iter().enumerate() {
            m.set(i, e);
        }
        m
    }

    #[inline]
    fn slot(i: usize) -> (usize, u32) {
        (i / 8, 56 - 8 * (i % 8) as u32)
    }

    #[inline]
    pub fn get(&self, i: usize) -> u16 {
        let (w, s) = Self::slot(i);
        ((self.0[w] >> s) & 0xff) as u16
    }

    #[inline]
    pub fn set(&mut self, i: usize, e: u16) {
        assert!(e <= MAX_EXPONENT, "exponent {e} exceeds {MAX_EXPONENT}");
        let (w, s) = Self::slot(i);
        self.0[w] = (self.0[w] & !(0xff << s)) | ((e as u64) << s);
    }

    /// The first `n` exponents.
    pub fn exponents(&self, n: usize) -> Vec<u16> {
        (0..n).map(|i| self.get(i)).collect()
    }

    pub fn degree(&self) -> usize {
        self.0
            .iter()
            .map(|w| w.to_be_bytes().iter().map(|&b| b as usize).sum::<usize>())
            .sum()
    }

    /// Exponent-wise sum. Panics on exponent overflow.
    #[inline]
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = [0u64; MAX_VARS / 8];
        for k in 0..MAX_VARS / 8 {
            let (a, b) = (self.0[k], other.0[k]);
            let low = (a & !HIGH_BITS) + (b & !HIGH_BITS);
            let sum = low ^ ((a ^ b) & HIGH_BITS);
            let carry = (a & b | (a | b) & !sum) & HIGH_BITS;
            assert!(carry == 0, "exponent overflow in polynomial product");
            out[k] = sum;
        }
        Self(out)
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = (0..MAX_VARS).rev().find(|&i| self.get(i) > 0).map_or(0, |i| i + 1);
        write!(f, "{:?}", self.exponents(last))
    }
}

/// Exact rational coefficients, used for the interaction-independent combinatorics.
pub type Rational = BigRational;

/// Ring of polynomial coefficients.
pub trait Coefficient:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Add<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coefficient for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coefficient for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// A polynomial in `num_vars` variables stored as a map from exponent vector to
/// coefficient. No stored coefficient is exactly zero.
#[derive(Clone, PartialEq)]
pub struct SparsePolynomial<C> {
    num_vars: usize,
    terms: FxHashMap<Monomial, C>,
}

pub type RealPoly = SparsePolynomial<f64>;
pub type ExactPoly = SparsePolynomial<Rational>;

fn unit_monomial(i: usize) -> Monomial {
    let mut m = Monomial::one();
    m.set(i, 1);
    m
}

fn check_exponents(exps: &[u16]) -> Result<()> {
    if exps.len() > MAX_VARS {
        return Err(Error::Capacity(format!(
            "polynomials support at most {MAX_VARS} variables, got {}",
            exps.len()
        )));
    }
    if let Some(&e) = exps.iter().find(|&&e| e > MAX_EXPONENT) {
        return Err(Error::Capacity(format!("exponent {e} exceeds {MAX_EXPONENT}")));
    }
    Ok(())
}

impl<C: Coefficient> SparsePolynomial<C> {
    /// Panics if `num_vars` exceeds [`MAX_VARS`].
    pub fn zero(num_vars: usize) -> Self {
        assert!(num_vars <= MAX_VARS, "at most {MAX_VARS} variables are supported");
        Self {
            num_vars,
            terms: FxHashMap::default(),
        }
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, C::one())
    }

    pub fn constant(num_vars: usize, c: C) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(Monomial::one(), c);
        p
    }

    /// The polynomial `x_index`.
    pub fn variable(num_vars: usize, index: usize) -> Result<Self> {
        if index >= num_vars {
            return Err(Error::InvalidIndex { index, num_vars });
        }
        let mut p = Self::zero(num_vars);
        p.add_term(unit_monomial(index), C::one());
        Ok(p)
    }

    /// Panics on more than [`MAX_VARS`] variables or an exponent above
    /// [`MAX_EXPONENT`]; [`Self::from_terms`] reports these as errors.
    pub fn monomial(exps: &[u16], c: C) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(Monomial::from_exponents(exps), c);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u16>, C)>,
    {
        check_exponents(&vec![0; num_vars])?;
        let mut p = Self::zero(num_vars);
        for (exps, c) in terms {
            if exps.len() != num_vars {
                return Err(Error::DimensionMismatch {
                    expected: num_vars,
                    found: exps.len(),
                });
            }
            check_exponents(&exps)?;
            p.add_term(Monomial::from_exponents(&exps), c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Number of stored (non-zero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in storage order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    /// Terms in lexicographic exponent order, for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(Vec<u16>, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v.into_iter().map(|(m, c)| (m.exponents(self.num_vars), c)).collect()
    }

    pub fn coefficient(&self, exps: &[u16]) -> C {
        if check_exponents(exps).is_err() {
            return C::zero();
        }
        self.terms
            .get(&Monomial::from_exponents(exps))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> usize {
        self.terms.keys().map(|m| m.get(var) as usize).max().unwrap_or(0)
    }

    /// Flags the variables that occur in some term.
    pub fn variables(&self) -> Vec<bool> {
        let mut mask = Monomial::one();
        for m in self.terms.keys() {
            for k in 0..MAX_VARS / 8 {
                mask.0[k] |= m.0[k];
            }
        }
        (0..self.num_vars).map(|i| mask.get(i) > 0).collect()
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.get(var) > 0)
    }

    fn check_dims(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: other.num_vars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(*m, c.clone());
        }
    }

    /// `self += a * b`.
    pub(crate) fn add_product(&mut self, a: &Self, b: &Self) {
        self.terms.reserve(a.len().min(b.len()));
        for (m1, c1) in &a.terms {
            for (m2, c2) in &b.terms {
                self.add_term(m1.mul(m2), c1.clone() * c2.clone());
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, -c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            out.add_term(*m, c.clone() * s.clone());
        }
        out
    }

    /// Pointwise product; errors when the variable counts differ.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: FxHashMap<Monomial, C> = FxHashMap::with_capacity_and_hasher(
            (small.len() * large.len()).min(1 << 16),
            Default::default(),
        );
        for (m1, c1) in &small.terms {
            for (m2, c2) in &large.terms {
                let prod = c1.clone() * c2.clone();
                match acc.entry(m1.mul(m2)) {
                    Entry::Occupied(mut e) => {
                        let v = e.get_mut();
                        *v = v.clone() + prod;
                    }
                    Entry::Vacant(e) => {
                        e.insert(prod);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Self {
            num_vars: self.num_vars,
            terms: acc,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.num_vars);
        for _ in 0..k {
            out = out.mul_unchecked(self);
        }
        out
    }

    /// Evaluates the polynomial at `point` in double precision.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: point.len(),
            });
        }
        Ok(self.evaluate_unchecked(point))
    }

    pub(crate) fn evaluate_unchecked(&self, point: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64();
            for (i, x) in point.iter().enumerate() {
                let e = m.get(i);
                if e > 0 {
                    t *= x.powi(e as i32);
                }
            }
            sum += t;
        }
        sum
    }

    /// Converts the coefficients to double precision.
    pub fn to_real(&self) -> RealPoly {
        let mut out = RealPoly::zero(self.num_vars);
        for (m, c) in &self.terms {
            out.add_term(*m, c.to_f64());
        }
        out
    }

    /// Re-embeds the polynomial into `new_num_vars` variables; variable `i`
    /// becomes variable `mapping[i]`.
    pub fn embed(&self, new_num_vars: usize, mapping: &[usize]) -> Result<Self> {
        if mapping.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: mapping.len(),
            });
        }
        for &j in mapping {
            if j >= new_num_vars {
                return Err(Error::InvalidIndex {
                    index: j,
                    num_vars: new_num_vars,
                });
            }
        }
        if new_num_vars > MAX_VARS {
            return Err(Error::Capacity(format!(
                "polynomials support at most {MAX_VARS} variables, got {new_num_vars}"
            )));
        }
        let mut out = Self::zero(new_num_vars);
        for (m, c) in &self.terms {
            let mut nm = Monomial::one();
            for (i, &j) in mapping.iter().enumerate() {
                nm.set(j, nm.get(j) + m.get(i));
            }
            out.add_term(nm, c.clone());
        }
        Ok(out)
    }

    /// Drops the variables whose `keep` flag is false. Those variables must not
    /// appear in any term.
    pub(crate) fn compact(&self, keep: &[bool]) -> Self {
        let n = keep.iter().filter(|&&k| k).count();
        let mut out = Self::zero(n);
        for (m, c) in &self.terms {
            let mut nm = Monomial::one();
            let mut j = 0;
            for (i, &k) in keep.iter().enumerate() {
                if k {
                    nm.set(j, m.get(i));
                    j += 1;
                } else {
                    debug_assert_eq!(m.get(i), 0);
                }
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Exchanges the roles of the variables according to `perm`: the result
    /// evaluated at x equals self evaluated at (x[perm[0]], x[perm[1]], ...).
    pub fn permute_vars(&self, perm: &[usize]) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            let mut nm = Monomial::one();
            for (i, &p) in perm.iter().enumerate() {
                nm.set(p, nm.get(p) + m.get(i));
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Partial derivative with respect to `var`.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.get(var);
            if e == 0 {
                continue;
            }
            let mut nm = *m;
            nm.set(var, e - 1);
            out.add_term(nm, c.clone() * C::from_i64(e as i64));
        }
        out
    }

    /// Groups the terms by their power of `var`: entry `k` holds the
    /// coefficient polynomial of `var^k` (with `var` removed from it).
    pub(crate) fn split_by_var(&self, var: usize) -> Vec<Self> {
        let deg = self.degree_in(var);
        let mut out = vec![Self::zero(self.num_vars); deg + 1];
        for (m, c) in &self.terms {
            let k = m.get(var) as usize;
            let mut nm = *m;
            nm.set(var, 0);
            out[k].add_term(nm, c.clone());
        }
        out
    }
}

impl RealPoly {
    /// Substitutes every variable by a linear form: variable `i` of `self`
    /// becomes `sum_j forms[(i, j)] y_j + offsets[i]` in `new_num_vars` variables.
    pub fn substitute_affine(
        &self,
        forms: &nalgebra::DMatrix<f64>,
        offsets: Option<&[f64]>,
    ) -> Result<RealPoly> {
        if forms.nrows() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: forms.nrows(),
            });
        }
        let new_n = forms.ncols();
        // Variables mapped to a single new variable are handled by exponent
        // shifts; only the remaining part of each monomial is expanded.
        let mut simple: Vec<Option<(usize, f64)>> = Vec::with_capacity(self.num_vars);
        let mut linear: Vec<RealPoly> = Vec::with_capacity(self.num_vars);
        for i in 0..self.num_vars {
            let offset = offsets.map_or(0.0, |o| o[i]);
            let nz: Vec<usize> = (0..new_n).filter(|&j| forms[(i, j)] != 0.0).collect();
            simple.push(if offset == 0.0 && nz.len() == 1 {
                Some((nz[0], forms[(i, nz[0])]))
            } else {
                None
            });
            let mut p = RealPoly::constant(new_n, offset);
            for &j in &nz {
                p.add_term(unit_monomial(j), forms[(i, j)]);
            }
            linear.push(p);
        }
        let mut powers: Vec<Vec<RealPoly>> = linear
            .iter()
            .map(|p| vec![RealPoly::one(new_n), p.clone()])
            .collect();
        let mut expanded: FxHashMap<Monomial, RealPoly> = FxHashMap::default();
        let mut out = RealPoly::zero(new_n);
        if new_n > MAX_VARS {
            return Err(Error::Capacity(format!(
                "polynomials support at most {MAX_VARS} variables, got {new_n}"
            )));
        }
        for (m, c) in &self.terms {
            let mut shift = Monomial::one();
            let mut coef = *c;
            let mut rest = Monomial::one();
            for i in 0..self.num_vars {
                let e = m.get(i);
                if e == 0 {
                    continue;
                }
                match simple[i] {
                    Some((j, w)) => {
                        shift.set(j, shift.get(j) + e);
                        coef *= w.powi(e as i32);
                    }
                    None => rest.set(i, e),
                }
            }
            if !expanded.contains_key(&rest) {
                let mut term = RealPoly::one(new_n);
                for i in 0..self.num_vars {
                    let e = rest.get(i);
                    if e == 0 {
                        continue;
                    }
                    let e = e as usize;
                    while powers[i].len() <= e {
                        let next = powers[i].last().unwrap().mul_unchecked(&linear[i]);
                        powers[i].push(next);
                    }
                    term = term.mul_unchecked(&powers[i][e]);
                }
                expanded.insert(rest, term);
            }
            for (tm, tc) in &expanded[&rest].terms {
                out.add_term(tm.mul(&shift), tc * coef);
            }
        }
        out.prune_exact_dust();
        Ok(out)
    }

    /// `self += s * other`.
    pub(crate) fn add_scaled(&mut self, other: &RealPoly, s: f64) {
        for (m, c) in &other.terms {
            self.add_term(*m, c * s);
        }
    }

    /// Removes terms whose expected magnitude under independent Gaussians of
    /// the given scales falls below `rel_tol` times the largest one.
    pub fn prune(&mut self, rel_tol: f64, scales: &[f64]) {
        if self.terms.is_empty() {
            return;
        }
        // |c| times a bound on E|x^m| for independent Gaussians of the given
        // scales, so that high powers are not undercounted.
        let weight = |m: &Monomial, c: f64| -> f64 {
            let mut w = c.abs();
            for (i, s) in scales.iter().enumerate() {
                let e = m.get(i) as usize;
                if e > 0 {
                    let moment = if e % 2 == 0 {
                        double_factorial_odd(e / 2)
                    } else {
                        (double_factorial_odd(e / 2) * double_factorial_odd(e / 2 + 1)).sqrt()
                    };
                    w *= s.powi(e as i32) * moment;
                }
            }
            w
        };
        let max = self
            .terms
            .iter()
            .map(|(m, &c)| weight(m, c))
            .fold(0.0_f64, f64::max);
        if max == 0.0 || !max.is_finite() {
            return;
        }
        let cut = rel_tol * max;
        self.terms.retain(|m, c| weight(m, *c) >= cut);
    }

    fn prune_exact_dust(&mut self) {
        self.terms.retain(|_, c| *c != 0.0);
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl<C: Coefficient> fmt::Debug for SparsePolynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let terms = self.sorted_terms();
        for (k, (m, c)) in terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?}", c)?;
            for (i, &e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn x(n: usize, i: usize) -> RealPoly {
        RealPoly::variable(n, i).unwrap()
    }

    #[test]
    fn monomial_product() {
        let p = x(1, 0).mul(&x(1, 0)).unwrap();
        assert_eq!(p, RealPoly::monomial(&[2], 1.0));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let err = x(1, 0).mul(&x(2, 0)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn zero_terms_are_never_stored() {
        let p = x(2, 0).sub(&x(2, 0)).unwrap();
        assert!(p.is_zero());
        let q = RealPoly::from_terms(2, vec![(vec![1, 0], 0.0), (vec![0, 1], 2.0)]).unwrap();
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn derivative_and_split() {
        // 3 x^2 y + y
        let p = RealPoly::from_terms(2, vec![(vec![2, 1], 3.0), (vec![0, 1], 1.0)]).unwrap();
        let d = p.derivative(0);
        assert_eq!(d, RealPoly::monomial(&[1, 1], 6.0));
        let parts = p.split_by_var(0);
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0], RealPoly::monomial(&[0, 1], 1.0));
        assert!(parts[1].is_zero());
        assert_eq!(parts[2], RealPoly::monomial(&[0, 1], 3.0));
    }

    #[test]
    fn affine_substitution_matches_evaluation() {
        let p = RealPoly::from_terms(2, vec![(vec![2, 1], 3.0), (vec![0, 3], -1.0), (vec![0, 0], 0.5)])
            .unwrap();
        let m = nalgebra::DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 0.0, 1.5, -1.0]);
        let off = [0.25, -0.75];
        let q = p.substitute_affine(&m, Some(&off)).unwrap();
        let y = [0.3, -1.1, 2.0];
        let xs = [
            y[0] - 2.0 * y[1] + 0.5 * y[2] + off[0],
            1.5 * y[1] - y[2] + off[1],
        ];
        let lhs = q.evaluate(&y).unwrap();
        let rhs = p.evaluate(&xs).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn packed_monomials() {
        let a = Monomial::from_exponents(&[1, 0, 7]);
        let b = Monomial::from_exponents(&[0, 9, 1]);
        assert_eq!(a.mul(&b).exponents(3), vec![1, 9, 8]);
        assert_eq!(a.mul(&b).degree(), 18);
        assert!(b < a);
        let mut far = Monomial::one();
        far.set(MAX_VARS - 1, 200);
        assert_eq!(far.get(MAX_VARS - 1), 200);
        assert_eq!(far.degree(), 200);
    }

    #[test]
    #[should_panic(expected = "exponent overflow")]
    fn exponent_overflow_panics() {
        let a = Monomial::from_exponents(&[0, 200]);
        let _ = a.mul(&a);
    }

    #[test]
    fn capacity_limits_are_errors() {
        assert!(matches!(
            RealPoly::from_terms(MAX_VARS + 1, vec![]),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(
            RealPoly::from_terms(1, vec![(vec![300], 1.0)]),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(x(2, 0).embed(MAX_VARS + 1, &[0, 1]), Err(Error::Capacity(_))));
    }

    #[test]
    fn sorted_terms_are_lexicographic() {
        let p = RealPoly::from_terms(2, vec![(vec![0, 2], 1.0), (vec![1, 0], 2.0), (vec![0, 0], 3.0)]).unwrap();
        let order: Vec<Vec<u16>> = p.sorted_terms().into_iter().map(|(m, _)| m).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 2], vec![1, 0]]);
    }

    fn arb_poly(num_vars: usize) -> impl Strategy<Value = RealPoly> {
        prop::collection::vec(
            (prop::collection::vec(0u16..=2, num_vars), -3.0f64..3.0),
            1..8,
        )
        .prop_map(move |terms| RealPoly::from_terms(num_vars, terms).unwrap())
    }

    proptest! {
        // Degree <= 4 products evaluated at random points.
        #[test]
        fn product_evaluates_pointwise(
            p in arb_poly(2),
            q in arb_poly(2),
            pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 100),
        ) {
            let pq = p.mul(&q).unwrap();
            for (a, b) in pts {
                let pt = [a, b];
                let lhs = pq.evaluate(&pt).unwrap();
                let rhs = p.evaluate(&pt).unwrap() * q.evaluate(&pt).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()) * 10.0);
            }
        }
    }
}
