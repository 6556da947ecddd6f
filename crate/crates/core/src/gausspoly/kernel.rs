use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `exp(-1/2 x^T A x + b^T x + c)` with symmetric `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianKernel {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
}

impl GaussianKernel {
    /// Builds a kernel, symmetrizing `a`. Fails when the shapes disagree or `a`
    /// is visibly asymmetric.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let scale = a.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!(
                        "quadratic form is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self { a, b, c })
    }

    /// The constant kernel `exp(c)` in `n` variables.
    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            a: DMatrix::zeros(n, n),
            b: DVector::zeros(n),
            c,
        }
    }

    /// `exp(-1/2 sum_i w_i x_i^2)`.
    pub fn diagonal(weights: &[f64]) -> Self {
        let n = weights.len();
        Self {
            a: DMatrix::from_diagonal(&DVector::from_column_slice(weights)),
            b: DVector::zeros(n),
            c: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut DMatrix<f64>, &mut DVector<f64>, &mut f64) {
        (&mut self.a, &mut self.b, &mut self.c)
    }

    /// Multiplies the kernel by `exp(delta)`.
    pub fn shift_log(&mut self, delta: f64) {
        self.c += delta;
    }

    /// The exponent `-1/2 x^T A x + b^T x + c` at `x`.
    pub fn exponent(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                found: x.len(),
            });
        }
        Ok(self.exponent_unchecked(x))
    }

    pub(crate) fn exponent_unchecked(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let mut quad = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.a[(i, j)] * x[j];
            }
            quad += x[i] * row;
        }
        let lin: f64 = x.iter().zip(self.b.iter()).map(|(xi, bi)| xi * bi).sum();
        -0.5 * quad + lin + self.c
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.exponent(x).map(f64::exp)
    }

    /// Product of two kernels over the same variables.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.num_vars() != other.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                found: other.num_vars(),
            });
        }
        Ok(Self {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            c: self.c + other.c,
        })
    }

    /// `k(x)^p`.
    pub fn powi(&self, p: i32) -> Self {
        let s = p as f64;
        Self {
            a: &self.a * s,
            b: &self.b * s,
            c: self.c * s,
        }
    }

    /// Kernel of `x -> k(M x)` where `M` has shape `(self.num_vars, new_vars)`.
    pub fn compose(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                found: m.nrows(),
            });
        }
        let a = m.transpose() * &self.a * m;
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self {
            a,
            b: m.transpose() * &self.b,
            c: self.c,
        })
    }

    /// Re-embeds into `new_n` variables; variable `i` becomes `mapping[i]`.
    pub fn embed(&self, new_n: usize, mapping: &[usize]) -> Result<Self> {
        let n = self.num_vars();
        if mapping.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mapping.len(),
            });
        }
        if let Some(&bad) = mapping.iter().find(|&&j| j >= new_n) {
            return Err(Error::InvalidIndex {
                index: bad,
                num_vars: new_n,
            });
        }
        let mut a = DMatrix::zeros(new_n, new_n);
        let mut b = DVector::zeros(new_n);
        for i in 0..n {
            b[mapping[i]] += self.b[i];
            for j in 0..n {
                a[(mapping[i], mapping[j])] += self.a[(i, j)];
            }
        }
        Ok(Self { a, b, c: self.c })
    }

    /// Keeps the variables flagged in `keep`, dropping the others.
    pub(crate) fn restrict(&self, keep: &[bool]) -> Self {
        let idx: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).collect();
        let m = idx.len();
        let a = DMatrix::from_fn(m, m, |i, j| self.a[(idx[i], idx[j])]);
        let b = DVector::from_fn(m, |i, _| self.b[idx[i]]);
        Self { a, b, c: self.c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn product_adds_exponents() {
        let k = GaussianKernel::diagonal(&[2.0]);
        let kk = k.mul(&k).unwrap();
        assert_relative_eq!(kk.evaluate(&[0.7]).unwrap(), (-2.0f64 * 0.49).exp(), max_relative = 1e-15);
    }

    #[test]
    fn rotation_invariance() {
        let k = GaussianKernel::diagonal(&[2.0, 2.0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(2, 2, &[s, -s, s, s]);
        let r = k.compose(&m).unwrap();
        assert_relative_eq!(r.a()[(0, 0)], 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.a()[(0, 1)], 0.0, epsilon = 1e-15);
        assert_relative_eq!(r.a()[(1, 1)], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(GaussianKernel::new(a, DVector::zeros(2), 0.0).is_err());
    }

    #[test]
    fn embedding_matches_evaluation() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let k = GaussianKernel::new(a, DVector::from_vec(vec![0.1, -0.2]), 0.4).unwrap();
        let e = k.embed(3, &[2, 0]).unwrap();
        let v = e.evaluate(&[0.5, 9.0, -1.2]).unwrap();
        assert_relative_eq!(v, k.evaluate(&[-1.2, 0.5]).unwrap(), max_relative = 1e-15);
    }
}
