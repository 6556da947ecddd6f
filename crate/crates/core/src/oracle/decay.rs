//! Gaussian decay rates read off a function along a ray.

use serde::Serialize;

use crate::error::{Error, Result};

/// Fit of `g(t) = -alpha t^2 + power ln t + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub alpha: f64,
    pub power: f64,
    pub offset: f64,
    pub t0: f64,
}

impl DecayFit {
    /// The width `sigma` of `exp(-t^2 / (4 sigma^2))`.
    pub fn sigma(&self) -> f64 {
        0.5 / self.alpha.sqrt()
    }
}

// alpha * t0^2 the fit aims for; polynomial prefactors then perturb alpha by
// O(t0^-4) relative.
const TARGET_EXPONENT: f64 = 1e4;

/// Decay of `|f|` along `origin + t u`, from `log_abs = ln |f|`. The value at
/// `t` is averaged with the one at `-t` so that odd corrections of the
/// prefactor cancel; `origin` should be generic so the ray misses the zeros
/// of the prefactor.
pub fn decay_rate(log_abs: &dyn Fn(&[f64]) -> Result<f64>, origin: &[f64], direction: &[f64]) -> Result<DecayFit> {
    if origin.len() != direction.len() {
        return Err(Error::DimensionMismatch {
            expected: origin.len(),
            found: direction.len(),
        });
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("decay direction must be non-zero".into()));
    }
    let u: Vec<f64> = direction.iter().map(|v| v / norm).collect();
    let g = |t: f64| -> Result<f64> {
        let plus: Vec<f64> = origin.iter().zip(&u).map(|(o, d)| o + t * d).collect();
        let minus: Vec<f64> = origin.iter().zip(&u).map(|(o, d)| o - t * d).collect();
        let v = 0.5 * (log_abs(&plus)? + log_abs(&minus)?);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::RootFinding(format!("ln |f| is not finite at distance {t} along the ray")))
        }
    };
    let mut t0 = 1.0;
    let mut fit = fit_three(&g, t0)?;
    for _ in 0..4 {
        if !(fit.alpha > 0.0) {
            return Err(Error::InternalConsistency(format!(
                "no Gaussian decay along the ray (alpha = {})",
                fit.alpha
            )));
        }
        let want = (TARGET_EXPONENT / fit.alpha).sqrt();
        if (want / t0 - 1.0).abs() < 0.5 {
            break;
        }
        t0 = want;
        fit = fit_three(&g, t0)?;
    }
    Ok(fit)
}

// Solves g(t) = -alpha t^2 + p ln t + c at t0, 2 t0 and 4 t0.
fn fit_three(g: &dyn Fn(f64) -> Result<f64>, t0: f64) -> Result<DecayFit> {
    let (g1, g2, g4) = (g(t0)?, g(2.0 * t0)?, g(4.0 * t0)?);
    let ln2 = std::f64::consts::LN_2;
    // g2 - g1 = -3 alpha t0^2 + p ln 2, g4 - g2 = -12 alpha t0^2 + p ln 2
    let alpha = -((g4 - g2) - (g2 - g1)) / (9.0 * t0 * t0);
    let power = ((g2 - g1) + 3.0 * alpha * t0 * t0) / ln2;
    let offset = g1 + alpha * t0 * t0 - power * t0.ln();
    Ok(DecayFit { alpha, power, offset, t0 })
}
