//! Hermite polynomials, Vandermonde products and antisymmetrization.

use super::poly::{Coefficient, ExactPoly, Rational, SparsePolynomial};
use crate::error::{Error, Result};

/// Largest subset accepted by [`antisymmetrize`]; the sum has `size!` terms.
pub const ANTISYMMETRIZE_CAP: usize = 8;

/// Physicists' Hermite polynomial `H_n` in one variable, exact coefficients.
pub fn hermite(n: usize) -> ExactPoly {
    let mut prev = ExactPoly::one(1);
    if n == 0 {
        return prev;
    }
    let two_x = ExactPoly::monomial(&[1], Rational::from_i64(2));
    let mut cur = two_x.clone();
    for k in 1..n {
        // H_{k+1} = 2x H_k - 2k H_{k-1}
        let next = two_x
            .mul_unchecked(&cur)
            .add(&prev.scale(&Rational::from_i64(-2 * k as i64)))
            .expect("univariate");
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_n(x_var)` embedded into a polynomial of `num_vars` variables.
pub fn hermite_in(num_vars: usize, var: usize, n: usize) -> Result<ExactPoly> {
    hermite(n).embed(num_vars, &[var])
}

/// Product of pairwise differences `prod_{i<j} (x_{vars[i]} - x_{vars[j]})`.
pub fn vandermonde<C: Coefficient>(num_vars: usize, vars: &[usize]) -> Result<SparsePolynomial<C>> {
    check_subset(num_vars, vars)?;
    let mut out = SparsePolynomial::<C>::one(num_vars);
    for (i, &vi) in vars.iter().enumerate() {
        for &vj in &vars[i + 1..] {
            let diff = SparsePolynomial::<C>::variable(num_vars, vi)?
                .sub(&SparsePolynomial::<C>::variable(num_vars, vj)?)?;
            out = out.mul_unchecked(&diff);
        }
    }
    Ok(out)
}

fn check_subset(num_vars: usize, subset: &[usize]) -> Result<()> {
    let mut seen = vec![false; num_vars];
    for &i in subset {
        if i >= num_vars {
            return Err(Error::InvalidIndex { index: i, num_vars });
        }
        if seen[i] {
            return Err(Error::DuplicateIndex(i));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Signed sum of `p` over all permutations of the variables in `subset`.
pub fn antisymmetrize<C: Coefficient>(
    p: &SparsePolynomial<C>,
    subset: &[usize],
) -> Result<SparsePolynomial<C>> {
    let n = p.num_vars();
    check_subset(n, subset)?;
    if subset.len() > ANTISYMMETRIZE_CAP {
        return Err(Error::AntisymmetrizationCap {
            size: subset.len(),
            cap: ANTISYMMETRIZE_CAP,
        });
    }
    let k = subset.len();
    let mut out = SparsePolynomial::<C>::zero(n);
    let mut order: Vec<usize> = (0..k).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut add_current = |order: &[usize], sign: i64, out: &mut SparsePolynomial<C>| {
        for (slot, &src) in order.iter().enumerate() {
            perm[subset[src]] = subset[slot];
        }
        let term = p.permute_vars(&perm);
        let term = if sign < 0 { term.neg() } else { term };
        *out = out.add(&term).expect("same dimension");
    };

    // Heap's algorithm; each swap flips the sign.
    let mut sign = 1i64;
    add_current(&order, sign, &mut out);
    let mut c = vec![0usize; k];
    let mut i = 1;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                order.swap(0, i);
            } else {
                order.swap(c[i], i);
            }
            sign = -sign;
            add_current(&order, sign, &mut out);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(out)
}
