//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use harmonium::correlations::{corrected_width_single, joint_distribution_aa, CoherenceProbe, Grid};
use harmonium::entanglement::{
    epsilon_a, epsilon_aa, epsilon_ab, epsilon_species, epsilon_species_closed, EntanglementResult,
};
use harmonium::model::{ground_energy, ground_state, lambda_star, make_params, ModelParams};
use harmonium::oracle::{
    decay_rate, energy_expectation, lambda_grid, norm_squared, permutation_fuzz, product_state_check, sample_points,
    schrodinger_residual, single_species_norm_squared, slater_bound_checks, width_checks, OracleReport,
    QuadratureSpec, DEFAULT_MC_SAMPLES, DEFAULT_SEED,
};
use harmonium::rdm::{gaussian_widths_pair_ab, ground_state_purity, purity_species_closed, Bipartition};

struct Outcome {
    passed: bool,
    detail: String,
}

type Check = harmonium::Result<Outcome>;

fn worst_failure(reports: &[OracleReport]) -> String {
    match reports.iter().find(|r| !r.passed) {
        Some(r) => format!(
            "{} failed: closed form {:e}, oracle {:e} (tolerance {:e})",
            r.quantity, r.closed_form, r.oracle_value, r.tolerance
        ),
        None => format!("{} oracle comparisons within tolerance", reports.len()),
    }
}

fn normalization() -> Check {
    let start = Instant::now();
    let mut worst_tensor = 0.0f64;
    let mut worst_mc = 0.0f64;
    let mut worst_mc_in_se = 0.0f64;
    for n in 1..=3 {
        for &l in &lambda_grid(n) {
            let p = make_params(n, l)?;
            if n <= 2 {
                worst_tensor = worst_tensor.max((norm_squared(&p, None)?.value - 1.0).abs());
            } else {
                let mc = norm_squared(&p, Some(QuadratureSpec::monte_carlo(DEFAULT_MC_SAMPLES, DEFAULT_SEED)))?;
                worst_mc = worst_mc.max((mc.value - 1.0).abs());
                worst_mc_in_se = worst_mc_in_se.max((mc.value - 1.0).abs() / mc.error);
            }
        }
    }
    let elapsed = start.elapsed();
    Ok(Outcome {
        passed: worst_tensor <= 1e-8 && worst_mc <= 1e-8 && elapsed < Duration::from_secs(600),
        detail: format!(
            "tensor N<=2 max |I-1| = {worst_tensor:.2e}; Monte Carlo N=3 max |I-1| = {worst_mc:.2e} \
             ({worst_mc_in_se:.2} standard errors, {DEFAULT_MC_SAMPLES} samples); {:.0?}",
            elapsed
        ),
    })
}

fn species_purity() -> Check {
    let mut worst = 0.0f64;
    for n in 1..=3 {
        for &l in &[-3.0, -1.0, 0.1 / n as f64, lambda_star(n)] {
            let p = make_params(n, l)?;
            let pipeline = ground_state_purity(&p, Bipartition::species(n))?;
            worst = worst.max((pipeline - purity_species_closed(&p)).abs());
        }
    }
    Ok(Outcome {
        passed: worst <= 1e-8,
        detail: format!("max |pipeline - closed form| = {worst:.2e} over 12 points"),
    })
}

fn energy() -> Check {
    let mut worst_energy = 0.0f64;
    for n in 1..=2 {
        for &l in &[-10.0, -1.0, 0.0, 0.1 / n as f64, lambda_star(n)] {
            let p = make_params(n, l)?;
            let e0 = ground_energy(&p);
            worst_energy = worst_energy.max((energy_expectation(&p)? - e0).abs() / e0);
        }
    }
    let mut worst_residual = 0.0f64;
    for &(n, l) in &[(1, 0.0), (1, -1.0), (2, -1.0), (2, 0.2)] {
        let p = make_params(n, l)?;
        let pts = sample_points(&ground_state(&p), 50, DEFAULT_SEED)?;
        worst_residual = worst_residual.max(schrodinger_residual(&p, &pts)?.max_relative);
    }
    Ok(Outcome {
        passed: worst_energy <= 1e-4 && worst_residual < 1e-5,
        detail: format!("max relative energy error {worst_energy:.2e}; max residual {worst_residual:.2e}"),
    })
}

fn slater_bound() -> Check {
    let mut reports = slater_bound_checks(2, 1.0)?;
    reports.extend(slater_bound_checks(3, 1.0)?);
    Ok(Outcome {
        passed: reports.iter().all(|r| r.passed),
        detail: worst_failure(&reports),
    })
}

type Measure = fn(&ModelParams) -> harmonium::Result<EntanglementResult>;

const MEASURES: [(&str, Measure); 4] = [
    ("epsilon_a", epsilon_a),
    ("epsilon_ab", epsilon_ab),
    ("epsilon_aa", epsilon_aa),
    ("epsilon_species", epsilon_species),
];

fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    hi - lo
}

fn epsilon_properties() -> Check {
    let mut problems = Vec::new();
    for n in 2..=4 {
        let p = make_params(n, 0.0)?;
        for (name, f) in MEASURES {
            let e = f(&p)?.epsilon;
            if e.abs() > 1e-8 {
                problems.push(format!("{name}(N={n}, Lambda=0) = {e:e}"));
            }
        }
    }
    let attractive: Vec<f64> = (1..=50).map(|i| -0.2 * i as f64).collect();
    let repulsive: Vec<f64> = (1..=50).map(|i| 0.499 * i as f64 / 50.0).collect();
    for n in 2..=3 {
        for (regime, grid) in [("attractive", &attractive), ("repulsive", &repulsive)] {
            for (name, f) in MEASURES {
                let values = grid
                    .iter()
                    .map(|&nl| Ok(f(&ModelParams::from_n_lambda(n, nl)?)?.epsilon))
                    .collect::<harmonium::Result<Vec<_>>>()?;
                if !values.windows(2).all(|w| w[1] > w[0]) {
                    problems.push(format!("{name} not increasing in N|Lambda| at N={n} ({regime})"));
                }
            }
        }
    }
    for &nl in &[-1.0, -5.0] {
        for (name, f) in &MEASURES[..3] {
            let values = (2..=4)
                .map(|n| Ok(f(&ModelParams::from_n_lambda(n, nl)?)?.epsilon))
                .collect::<harmonium::Result<Vec<_>>>()?;
            if !values.windows(2).all(|w| w[1] < w[0]) {
                problems.push(format!("{name} not decreasing in N at N*Lambda={nl}: {values:?}"));
            }
        }
    }
    // the curves are compared through the closed form; the generic pipeline
    // is reported next to it
    let mut collapse = 0.0f64;
    let mut pipeline_spread = 0.0f64;
    for i in 0..=40 {
        let nl = -10.0 + i as f64 * (10.499 / 40.0);
        let closed = (2..=5)
            .map(|n| Ok(epsilon_species_closed(&ModelParams::from_n_lambda(n, nl)?)))
            .collect::<harmonium::Result<Vec<_>>>()?;
        let pipeline = (2..=5)
            .map(|n| Ok(epsilon_species(&ModelParams::from_n_lambda(n, nl)?)?.epsilon))
            .collect::<harmonium::Result<Vec<_>>>()?;
        collapse = collapse.max(spread(&closed));
        pipeline_spread = pipeline_spread.max(spread(&pipeline));
    }
    if collapse >= 1e-12 {
        problems.push(format!("species curves for N=2..5 deviate by {collapse:e}"));
    }
    Ok(Outcome {
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!(
                "zero at Lambda=0, monotone on 50-point grids, ordered in N, collapse deviation {collapse:.1e} \
                 (reduce+purity pipeline: {pipeline_spread:.1e})"
            )
        } else {
            problems.join("; ")
        },
    })
}

fn repulsive_limit() -> Check {
    let e = epsilon_species(&make_params(2, 0.25 - 1e-6)?)?.epsilon;
    Ok(Outcome {
        passed: (e - 0.9107).abs() <= 1e-3,
        detail: format!("epsilon_species(N=2, Lambda=1/4-1e-6) = {e:.10}"),
    })
}

fn pauli_structure() -> Check {
    let mut diagonal_nonzero = 0;
    for &(n, l) in &[(2, -1.0), (2, 0.2), (3, -100.0)] {
        let p = make_params(n, l)?;
        let g = joint_distribution_aa(&p, &Grid::symmetric(3.0, 61)?)?;
        diagonal_nonzero += (0..g.len()).filter(|&i| g.get(i, i) != 0.0).count();
    }
    let mut worst = 0.0f64;
    let mut all_passed = true;
    for n in 1..=3 {
        let p = make_params(n, -1.3)?;
        let r = permutation_fuzz(&ground_state(&p), n, 1000, DEFAULT_SEED)?;
        all_passed &= r.passed;
        worst = worst.max(r.max_antisymmetry_error).max(r.max_species_swap_error);
    }
    Ok(Outcome {
        passed: diagonal_nonzero == 0 && all_passed,
        detail: format!(
            "{diagonal_nonzero} non-zero D_aa(x,x) values; worst exchange error {worst:.1e} over 1000 trials per N"
        ),
    })
}

fn widths() -> Check {
    let mut reports = Vec::new();
    for n in 1..=3 {
        for &l in &[-1.0, -100.0, -2500.0] {
            reports.extend(width_checks(&make_params(n, l)?, 1.0)?);
        }
    }
    let free = corrected_width_single(&make_params(1, 0.0)?)?.0;
    let exact = free == std::f64::consts::FRAC_1_SQRT_2;
    Ok(Outcome {
        passed: exact && reports.iter().all(|r| r.passed),
        detail: format!("{}; sigma_a^d(N=1, Lambda=0) = {free:?}", worst_failure(&reports)),
    })
}

fn no_odlro() -> Check {
    let mut problems = Vec::new();
    let mut slopes = Vec::new();
    for &(n, l) in &[(1, -1.0), (2, -1.0), (3, 0.1)] {
        let p = make_params(n, l)?;
        let probe = CoherenceProbe::new(&p)?;
        let log_abs = |x: &[f64]| probe.log_abs_value(x[0], x[1]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // along t (1, -1)/sqrt 2 the separation squared is 2 t^2
        let fit = decay_rate(&log_abs, &[0.0137, -0.0211], &[s, -s])?;
        let slope = -fit.alpha / 2.0;
        let sigma2 = gaussian_widths_pair_ab(&p).sigma2;
        let expected = -1.0 / (sigma2 * sigma2);
        slopes.push(format!("N={n} Lambda={l}: slope {slope:.6}, -1/sigma2^2 = {expected:.6}"));
        if ((slope - expected) / expected).abs() > 1e-6 {
            problems.push(format!("N={n} Lambda={l}"));
        }
        let ratio = probe.value(-5.0, 5.0)?.abs() / probe.value(0.0, 0.0)?.abs();
        if !(ratio < 1e-10) {
            problems.push(format!("coherence ratio {ratio:e} at separation 10 for N={n}"));
        }
    }
    Ok(Outcome {
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            slopes.join("; ")
        } else {
            format!("mismatch at {}; {}", problems.join(", "), slopes.join("; "))
        },
    })
}

fn product_states() -> Check {
    let mut reports = Vec::new();
    for n in 2..=3 {
        reports.push(product_state_check(n, DEFAULT_SEED, 1.0)?);
        let norm = single_species_norm_squared(n, 0.0)?.value;
        reports.push(OracleReport::absolute(format!("single-species norm N={n}"), 1.0, norm, "tensor Gauss-Hermite", 1e-8));
    }
    Ok(Outcome {
        passed: reports.iter().all(|r| r.passed),
        detail: worst_failure(&reports),
    })
}

fn verify_command() -> Check {
    let dir = tempfile::tempdir().map_err(|e| harmonium::Error::InternalConsistency(e.to_string()))?;
    let report = dir.path().join("verify.json");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_harmonium"))
        .args(["verify", "--n-max", "2", "--output"])
        .arg(&report)
        .status()
        .map_err(|e| harmonium::Error::InternalConsistency(e.to_string()))?;
    let elapsed = start.elapsed();
    Ok(Outcome {
        passed: status.success() && elapsed < Duration::from_secs(300),
        detail: format!("exit {:?} after {elapsed:.1?}", status.code()),
    })
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("normalization", normalization),
        ("species-bipartition purity", species_purity),
        ("ground-state energy", energy),
        ("Slater-bound identity", slater_bound),
        ("epsilon properties", epsilon_properties),
        ("repulsive-limit value", repulsive_limit),
        ("Pauli and exchange structure", pauli_structure),
        ("widths", widths),
        ("no off-diagonal long-range order", no_odlro),
        ("single-species product states", product_states),
        ("verify command", verify_command),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!("error: {e}"),
        });
        failed += usize::from(!outcome.passed);
        println!(
            "{} {:>2} {name}: {} [{:.1?}]",
            if outcome.passed { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail,
            start.elapsed()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
