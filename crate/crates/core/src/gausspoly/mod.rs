//! Closed algebra of polynomial-times-Gaussian functions with exact
//! marginalization.

mod function;
mod kernel;
mod moments;
mod poly;
mod special;

pub use function::{
    numbered_labels, FactoredGaussPoly, GaussPolyFunction, DEFAULT_PRUNE_TOL, MAX_INTERMEDIATE_TERMS,
    MAX_TERM_PRODUCTS,
};
pub use kernel::GaussianKernel;
pub use moments::{binomial, gamma_half_integer, gaussian_even_moment, gaussian_shifted_moment};
pub use poly::{Coefficient, ExactPoly, Monomial, Rational, RealPoly, SparsePolynomial, MAX_EXPONENT, MAX_VARS};
pub use special::{antisymmetrize, hermite, hermite_in, vandermonde, ANTISYMMETRIZE_CAP};
