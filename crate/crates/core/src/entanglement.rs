//! The hybrid entanglement measure and the two reference entropies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gausspoly::binomial;
use crate::model::ModelParams;
use crate::rdm::{ground_state_purity, Bipartition};

/// Negative values of epsilon above this are rounding and read as zero.
pub const NEGATIVE_EPSILON_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglementResult {
    pub bipartition: Bipartition,
    pub n: usize,
    pub lambda: f64,
    pub purity: f64,
    pub binomial_factor: f64,
    pub epsilon: f64,
    /// Set when a small negative epsilon was clamped to zero.
    pub clamped_from: Option<f64>,
    /// `"extrapolated bipartition"` for cuts other than `(1,0)`, `(1,1)`,
    /// `(2,0)` and `(N,0)`.
    pub label: Option<String>,
}

fn check_purity(purity: f64) -> Result<()> {
    if !(purity > 0.0 && purity <= 1.0) {
        return Err(Error::PurityOutOfRange(purity));
    }
    Ok(())
}

/// `S_L = 1 - Tr rho^2`.
pub fn linear_entropy(purity: f64) -> Result<f64> {
    check_purity(purity)?;
    Ok(1.0 - purity)
}

/// `S_F = 1 - 2 Tr rho^2`, for one-body matrices of identical fermions.
pub fn fermionic_entropy(purity: f64) -> Result<f64> {
    check_purity(purity)?;
    if purity > 0.5 + NEGATIVE_EPSILON_TOL {
        return Err(Error::InvalidParameter(format!(
            "purity {purity} exceeds 1/2, so it does not belong to a fermionic one-body matrix"
        )));
    }
    Ok(1.0 - 2.0 * purity)
}

/// `epsilon = 1 - C(N, M_a) C(N, M_b) Tr rho^2` for the ground state.
pub fn epsilon(params: &ModelParams, bip: Bipartition) -> Result<EntanglementResult> {
    let purity = ground_state_purity(params, bip)?;
    epsilon_from_purity(params, bip, purity)
}

/// `epsilon` from an already computed purity.
pub fn epsilon_from_purity(params: &ModelParams, bip: Bipartition, purity: f64) -> Result<EntanglementResult> {
    let n = params.n();
    let factor = bip.binomial_factor(n);
    let raw = 1.0 - factor * purity;
    let (eps, clamped_from) = if raw < -NEGATIVE_EPSILON_TOL {
        return Err(Error::InternalConsistency(format!(
            "purity {purity} exceeds the Slater bound 1/{factor} for ({}, {}) at N = {n}, Lambda = {}",
            bip.kept_a(),
            bip.kept_b(),
            params.lambda()
        )));
    } else if raw < 0.0 {
        (0.0, Some(raw))
    } else {
        (raw, None)
    };
    Ok(EntanglementResult {
        bipartition: bip,
        n,
        lambda: params.lambda(),
        purity,
        binomial_factor: factor,
        epsilon: eps,
        clamped_from,
        label: (!bip.is_standard(n)).then(|| "extrapolated bipartition".to_string()),
    })
}

/// `epsilon_a`, one particle of species a.
pub fn epsilon_a(params: &ModelParams) -> Result<EntanglementResult> {
    epsilon(params, Bipartition::single())
}

/// `epsilon_ab`, one particle of each species.
pub fn epsilon_ab(params: &ModelParams) -> Result<EntanglementResult> {
    if params.n() == 1 {
        return Err(Error::InvalidBipartition {
            kept_a: 1,
            kept_b: 1,
            n: 1,
        });
    }
    epsilon(params, Bipartition::pair_ab())
}

/// `epsilon_aa`, two particles of species a.
pub fn epsilon_aa(params: &ModelParams) -> Result<EntanglementResult> {
    if params.n() < 2 {
        return Err(Error::InvalidBipartition {
            kept_a: 2,
            kept_b: 0,
            n: params.n(),
        });
    }
    epsilon(params, Bipartition::pair_aa())
}

/// `epsilon_{N_a|N_b}`, species a against species b.
pub fn epsilon_species(params: &ModelParams) -> Result<EntanglementResult> {
    epsilon(params, Bipartition::species(params.n()))
}

/// `(1 + sqrt(1 - 2 N Lambda) - 2 (1 - 2 N Lambda)^{1/4}) / (1 + sqrt(1 - 2 N Lambda))`.
pub fn epsilon_species_closed(params: &ModelParams) -> f64 {
    let k2 = params.kappa2();
    (1.0 + k2 - 2.0 * k2.sqrt()) / (1.0 + k2)
}

/// `C(N, M)^{-1}`, the purity of an M-body marginal of a Slater determinant.
pub fn slater_purity_bound(n: usize, m: usize) -> Result<f64> {
    if m > n {
        return Err(Error::InvalidParameter(format!("cannot keep {m} of {n} particles")));
    }
    Ok(1.0 / binomial(n, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_params;
    use crate::rdm::purity_species_closed;
    use approx::assert_relative_eq;

    #[test]
    fn entropies() {
        assert_eq!(linear_entropy(1.0).unwrap(), 0.0);
        assert_eq!(linear_entropy(0.5).unwrap(), 0.5);
        assert_eq!(fermionic_entropy(0.5).unwrap(), 0.0);
        assert_eq!(fermionic_entropy(0.25).unwrap(), 0.5);
        assert!(matches!(linear_entropy(0.0), Err(Error::PurityOutOfRange(_))));
        assert!(matches!(linear_entropy(1.2), Err(Error::PurityOutOfRange(_))));
        assert!(fermionic_entropy(0.8).is_err());
        // 1 - 2 5^{1/4} / (1 + sqrt 5)
        let p = make_params(2, -1.0).unwrap();
        assert_relative_eq!(
            linear_entropy(purity_species_closed(&p)).unwrap(),
            0.07582362816955520,
            max_relative = 1e-12
        );
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(epsilon_species_closed(&make_params(3, 0.0).unwrap()), 0.0);
        let p = make_params(2, 0.25 - 1e-6).unwrap();
        assert_relative_eq!(epsilon_species_closed(&p), 0.9107358092814233, max_relative = 1e-12);
        // strong attraction: 1 - 2 / (2 N |Lambda|)^{1/4}
        let p = make_params(2, -1e6).unwrap();
        let approx = 1.0 - 2.0 / (4e6f64).powf(0.25);
        assert!((epsilon_species_closed(&p) - approx).abs() < 1e-3);
    }

    #[test]
    fn collapse_in_n_lambda() {
        for &nl in &[-7.0, -1.0, 0.2, 0.49] {
            let a = epsilon_species_closed(&ModelParams::from_n_lambda(2, nl).unwrap());
            let b = epsilon_species_closed(&ModelParams::from_n_lambda(5, nl).unwrap());
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn slater_bound() {
        assert_eq!(slater_purity_bound(4, 0).unwrap(), 1.0);
        assert_relative_eq!(slater_purity_bound(4, 2).unwrap(), 1.0 / 6.0, max_relative = 1e-15);
        assert!(slater_purity_bound(2, 3).is_err());
    }

    #[test]
    fn species_epsilon_pipeline() {
        let p = make_params(2, -1.0).unwrap();
        let e = epsilon_species(&p).unwrap();
        assert_relative_eq!(e.epsilon, epsilon_species_closed(&p), epsilon = 1e-12);
        assert_eq!(e.binomial_factor, 1.0);
        assert!(e.label.is_none());
    }

    #[test]
    fn free_system_has_no_entanglement() {
        let p = make_params(3, 0.0).unwrap();
        for (ka, kb) in [(1, 0), (1, 1), (2, 0), (2, 1), (3, 0)] {
            let e = epsilon(&p, Bipartition::new(ka, kb, 3).unwrap()).unwrap();
            assert!(e.epsilon.abs() < 1e-8, "{e:?}");
            assert_eq!(e.label.is_some(), (ka, kb) == (2, 1));
        }
    }

    #[test]
    fn negative_epsilon_handling() {
        let p = make_params(2, 0.0).unwrap();
        let bip = Bipartition::single();
        let e = epsilon_from_purity(&p, bip, 0.5 + 1e-10).unwrap();
        assert_eq!(e.epsilon, 0.0);
        assert!(e.clamped_from.is_some());
        assert!(matches!(
            epsilon_from_purity(&p, bip, 0.5 + 1e-6),
            Err(Error::InternalConsistency(_))
        ));
    }
}
