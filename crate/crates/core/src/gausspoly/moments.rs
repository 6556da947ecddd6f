//! One-dimensional Gaussian moments.

use crate::error::{Error, Result};

/// `Gamma(k + 1/2)` for non-negative integer `k`.
pub fn gamma_half_integer(k: usize) -> f64 {
    let mut g = std::f64::consts::PI.sqrt();
    for j in 0..k {
        g *= j as f64 + 0.5;
    }
    g
}

/// Binomial coefficient as a float; exact up to the range used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut b = 1.0;
    for j in 0..k {
        b = b * (n - j) as f64 / (j + 1) as f64;
    }
    b.round()
}

/// `(2k - 1)!!`, with `(-1)!! = 1`.
pub(crate) fn double_factorial_odd(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (2 * j - 1) as f64)
}

/// `integral of exp(-kappa z^2) z^n dz` over the real line.
pub fn gaussian_even_moment(kappa: f64, n: usize) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::NonPositiveWidth(kappa));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let k = n / 2;
    Ok(kappa.powf(-(n as f64 + 1.0) / 2.0) * gamma_half_integer(k))
}

/// `integral of exp(-alpha z^2 + beta z) z^n dz` over the real line.
pub fn gaussian_shifted_moment(alpha: f64, beta: f64, n: usize) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::NonPositiveWidth(alpha));
    }
    let shift = beta / (2.0 * alpha);
    let mut sum = 0.0;
    for k in 0..=n / 2 {
        sum += binomial(n, 2 * k)
            * alpha.powf(-(k as f64 + 0.5))
            * shift.powi((n - 2 * k) as i32)
            * gamma_half_integer(k);
    }
    Ok((beta * beta / (4.0 * alpha)).exp() * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        simpson(f, a, m, fa, flm, fm, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, tol / 2.0, depth - 1)
    }

    fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let panels = 64;
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                let hi = lo + h;
                simpson(f, lo, hi, f(lo), f(0.5 * (lo + hi)), f(hi), 1e-16, 30)
            })
            .sum()
    }

    #[test]
    fn even_moment_values() {
        assert_relative_eq!(gaussian_even_moment(1.0, 0).unwrap(), std::f64::consts::PI.sqrt(), max_relative = 1e-15);
        assert_eq!(gaussian_even_moment(2.0, 3).unwrap(), 0.0);
        // 2^{-3/2} Gamma(3/2), frozen from adaptive quadrature of x^2 exp(-2x^2)
        assert_relative_eq!(gaussian_even_moment(2.0, 2).unwrap(), 0.3133285343288751, max_relative = 1e-14);
        let q = adaptive(&|x: f64| x * x * (-2.0 * x * x).exp(), -12.0, 12.0);
        assert_relative_eq!(gaussian_even_moment(2.0, 2).unwrap(), q, max_relative = 1e-10);
    }

    #[test]
    fn non_positive_width_is_rejected() {
        assert!(matches!(gaussian_even_moment(0.0, 2), Err(Error::NonPositiveWidth(_))));
        assert!(matches!(gaussian_shifted_moment(-1.0, 0.0, 0), Err(Error::NonPositiveWidth(_))));
    }

    #[test]
    fn shifted_moment_values() {
        assert_relative_eq!(gaussian_shifted_moment(1.0, 0.0, 0).unwrap(), std::f64::consts::PI.sqrt(), max_relative = 1e-15);
        assert_eq!(gaussian_shifted_moment(1.0, 0.0, 1).unwrap(), 0.0);
        let q = adaptive(&|x: f64| x * x * (-x * x + 2.0 * x).exp(), -12.0, 14.0);
        assert_relative_eq!(gaussian_shifted_moment(1.0, 2.0, 2).unwrap(), q, max_relative = 1e-10);
    }

    #[test]
    fn shifted_with_zero_beta_is_even_moment() {
        for &alpha in &[0.3, 1.0, 2.5, 17.0] {
            for n in 0..=20 {
                let a = gaussian_shifted_moment(alpha, 0.0, n).unwrap();
                let b = gaussian_even_moment(alpha, n).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn shifted_moment_against_quadrature() {
        for &(alpha, beta, n) in &[(0.5, -1.3, 3usize), (2.0, 0.7, 5), (1.3, 3.0, 6)] {
            let c = beta / (2.0 * alpha);
            let q = adaptive(
                &|x: f64| x.powi(n as i32) * (-alpha * x * x + beta * x).exp(),
                c - 40.0 / alpha.sqrt(),
                c + 40.0 / alpha.sqrt(),
            );
            assert_relative_eq!(gaussian_shifted_moment(alpha, beta, n).unwrap(), q, max_relative = 1e-10);
        }
    }
}
