use harmonium::correlations::{corrected_width_pair_aa, corrected_width_pair_ab, corrected_width_single, rms_separation_gaussian};
use harmonium::entanglement::{epsilon_a, epsilon_aa, epsilon_ab, epsilon_species};
use harmonium::model::{ground_energy, ModelParams};
use harmonium::rdm::{gaussian_widths_pair_aa, gaussian_widths_pair_ab, gaussian_widths_single};
use harmonium::Result as CoreResult;

use crate::UsageError;

/// Registered scalar outputs, in ascending name order.
pub const QUANTITIES: &[&str] = &[
    "energy",
    "epsilon_a",
    "epsilon_aa",
    "epsilon_ab",
    "epsilon_species",
    "purity_a",
    "purity_aa",
    "purity_ab",
    "purity_species",
    "widths_a_ad",
    "widths_a_d",
    "widths_a_sigma_minus",
    "widths_a_sigma_plus",
    "widths_aa_ad",
    "widths_aa_d",
    "widths_aa_separation",
    "widths_aa_sigma_m",
    "widths_aa_sigma_p",
    "widths_ab_ad",
    "widths_ab_d",
    "widths_ab_sigma1",
    "widths_ab_sigma2",
    "widths_ab_sigma3",
    "widths_ab_sigma4",
];

pub fn check_names(names: &[String]) -> std::result::Result<(), UsageError> {
    if names.is_empty() {
        return Err(UsageError("no quantity requested; see `harmonium quantities`".into()));
    }
    for name in names {
        if !QUANTITIES.contains(&name.as_str()) {
            return Err(UsageError(format!(
                "unknown quantity `{name}`; known quantities: {}",
                QUANTITIES.join(", ")
            )));
        }
    }
    Ok(())
}

/// Names must already have passed `check_names`.
pub fn evaluate(name: &str, p: &ModelParams) -> CoreResult<f64> {
    Ok(match name {
        "energy" => ground_energy(p),
        "epsilon_a" => epsilon_a(p)?.epsilon,
        "epsilon_aa" => epsilon_aa(p)?.epsilon,
        "epsilon_ab" => epsilon_ab(p)?.epsilon,
        "epsilon_species" => epsilon_species(p)?.epsilon,
        "purity_a" => epsilon_a(p)?.purity,
        "purity_aa" => epsilon_aa(p)?.purity,
        "purity_ab" => epsilon_ab(p)?.purity,
        "purity_species" => epsilon_species(p)?.purity,
        "widths_a_d" => corrected_width_single(p)?.0,
        "widths_a_ad" => corrected_width_single(p)?.1,
        "widths_a_sigma_plus" => gaussian_widths_single(p).sigma_plus,
        "widths_a_sigma_minus" => gaussian_widths_single(p).sigma_minus,
        "widths_aa_d" => corrected_width_pair_aa(p)?.0,
        "widths_aa_ad" => corrected_width_pair_aa(p)?.1,
        "widths_aa_separation" => rms_separation_gaussian(p),
        "widths_aa_sigma_p" => gaussian_widths_pair_aa(p).sigma_p,
        "widths_aa_sigma_m" => gaussian_widths_pair_aa(p).sigma_m,
        "widths_ab_d" => corrected_width_pair_ab(p)?.0,
        "widths_ab_ad" => corrected_width_pair_ab(p)?.1,
        "widths_ab_sigma1" => gaussian_widths_pair_ab(p).sigma1,
        "widths_ab_sigma2" => gaussian_widths_pair_ab(p).sigma2,
        "widths_ab_sigma3" => gaussian_widths_pair_ab(p).sigma3,
        "widths_ab_sigma4" => gaussian_widths_pair_ab(p).sigma4,
        other => unreachable!("unregistered quantity {other}"),
    })
}

/// Parses `a,b,c` or `start:stop:step` (both ends included when `stop` is
/// hit to within rounding).
pub fn parse_values(text: &str) -> std::result::Result<Vec<f64>, UsageError> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| UsageError(format!("`{s}` is not a finite number")))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(UsageError(format!("range `{text}` must be start:stop:step")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if !(step > 0.0) || stop < start {
            return Err(UsageError(format!("range `{text}` needs start <= stop and a positive step")));
        }
        let span = (stop - start) / step;
        let count = (span + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    } else {
        text.split(',').map(num).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use harmonium::model::make_params;

    #[test]
    fn registry_is_sorted_and_complete() {
        assert!(QUANTITIES.windows(2).all(|w| w[0] < w[1]));
        let p = make_params(2, -1.0).unwrap();
        for q in QUANTITIES {
            let v = evaluate(q, &p).unwrap();
            assert!(v.is_finite(), "{q} = {v}");
        }
    }

    #[test]
    fn names_are_validated() {
        assert!(check_names(&[]).is_err());
        assert!(check_names(&["energy".into(), "bogus".into()]).is_err());
        assert!(check_names(&["epsilon_species".into()]).is_ok());
    }

    #[test]
    fn ranges_include_the_end() {
        assert_eq!(parse_values("0:0.3:0.1").unwrap().len(), 4);
        assert_eq!(parse_values("-1,2.5").unwrap(), vec![-1.0, 2.5]);
        assert_eq!(parse_values("1:1:0.5").unwrap(), vec![1.0]);
        assert!(parse_values("1:0:0.5").is_err());
        assert!(parse_values("0:1").is_err());
        assert!(parse_values("x").is_err());
    }
}
