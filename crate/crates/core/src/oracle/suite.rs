//! The full oracle run behind `harmonium verify`.

use serde::Serialize;

use super::integrals::{
    antidiagonal_critical_point, energy_expectation, moment_widths, norm_squared, one_body_element,
    pair_aa_decay_widths, pair_ab_decay_widths, purity_quadrature, single_decay_widths, single_species_norm_squared,
};
use super::quadrature::{integrate, Frame, QuadratureSpec, DEFAULT_MC_SAMPLES, DEFAULT_SEED};
use super::residual::{magnitude, permutation_fuzz, sample_points, schrodinger_residual};
use crate::correlations::{
    corrected_width_pair_aa, corrected_width_pair_ab, corrected_width_single, pair_aa_density, pair_ab_density,
    rms_separation_gaussian,
};
use crate::error::Result;
use crate::model::{
    ground_energy, ground_state, lambda_star, make_params, single_species_ground_state, ModelParams,
};
use crate::rdm::{
    gaussian_widths_pair_aa, gaussian_widths_pair_ab, gaussian_widths_single, purity, purity_species_closed,
    reduce_ground_state, single_particle_closed, Bipartition,
};

/// One comparison of a closed form against an oracle value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub quantity: String,
    pub closed_form: f64,
    pub oracle_value: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub spec: String,
    pub tolerance: f64,
    pub relative: bool,
    pub passed: bool,
}

impl OracleReport {
    pub fn absolute(quantity: impl Into<String>, closed_form: f64, oracle_value: f64, spec: impl Into<String>, tol: f64) -> Self {
        Self::build(quantity.into(), closed_form, oracle_value, spec.into(), tol, false)
    }

    pub fn relative(quantity: impl Into<String>, closed_form: f64, oracle_value: f64, spec: impl Into<String>, tol: f64) -> Self {
        Self::build(quantity.into(), closed_form, oracle_value, spec.into(), tol, true)
    }

    fn build(quantity: String, closed_form: f64, oracle_value: f64, spec: String, tolerance: f64, relative: bool) -> Self {
        let abs_err = (closed_form - oracle_value).abs();
        let rel_err = if closed_form != 0.0 { abs_err / closed_form.abs() } else { abs_err };
        let err = if relative { rel_err } else { abs_err };
        Self {
            quantity,
            closed_form,
            oracle_value,
            abs_err,
            rel_err,
            spec,
            tolerance,
            relative,
            passed: err <= tolerance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub n_max: usize,
    pub seed: u64,
    pub mc_samples: u64,
    /// Multiplies every tolerance; values below 1 tighten the suite.
    pub tolerance_scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            n_max: 2,
            seed: DEFAULT_SEED,
            mc_samples: DEFAULT_MC_SAMPLES,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<OracleReport>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &OracleReport> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Couplings sampled for each `N`.
pub fn lambda_grid(n: usize) -> Vec<f64> {
    vec![-10.0, -1.0, 0.0, 0.1 / n as f64, lambda_star(n)]
}

pub fn run_verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let tol = |t: f64| t * opts.tolerance_scale;
    for n in 1..=opts.n_max {
        for &l in &lambda_grid(n) {
            let p = make_params(n, l)?;
            let est = norm_squared(&p, None)?;
            checks.push(OracleReport::absolute(
                format!("norm N={n} Lambda={l}"),
                1.0,
                est.value,
                "tensor Gauss-Hermite on principal axes",
                tol(1e-8),
            ));
        }
        let p = make_params(n, -1.0)?;
        checks.push(monte_carlo_norm(&p, opts)?);
        if n <= 2 {
            checks.push(OracleReport::relative(
                format!("energy N={n} Lambda=-1"),
                ground_energy(&p),
                energy_expectation(&p)?,
                "<psi|H|psi> by tensor Gauss-Hermite",
                tol(1e-4),
            ));
        }
        for &l in &[-1.0, 0.0, 0.4 / n as f64] {
            let p = make_params(n, l)?;
            let pts = sample_points(&ground_state(&p), 50, opts.seed)?;
            let r = schrodinger_residual(&p, &pts)?;
            checks.push(OracleReport::absolute(
                format!("Schrodinger residual N={n} Lambda={l}"),
                0.0,
                r.max_relative,
                format!("5-point stencil h={}, {} points, {} skipped", r.step, r.evaluated, r.skipped),
                tol(1e-5),
            ));
        }
        let fuzz = permutation_fuzz(&ground_state(&p), n, 1000, opts.seed)?;
        checks.push(OracleReport::absolute(
            format!("antisymmetry N={n}"),
            0.0,
            fuzz.max_antisymmetry_error.max(fuzz.max_species_swap_error),
            "1000 random transpositions and species swaps",
            tol(1e-12),
        ));
        for &l in &[-3.0, -1.0, 0.1 / n as f64, lambda_star(n)] {
            let p = make_params(n, l)?;
            let rho = reduce_ground_state(&p, Bipartition::species(n))?;
            checks.push(OracleReport::absolute(
                format!("species purity N={n} Lambda={l}"),
                purity_species_closed(&p),
                purity(&rho)?,
                "reduce + purity pipeline",
                tol(1e-8),
            ));
            if n <= 2 {
                checks.push(OracleReport::absolute(
                    format!("species purity quadrature N={n} Lambda={l}"),
                    purity_species_closed(&p),
                    purity_quadrature(&p, Bipartition::species(n))?,
                    "tensor Gauss-Hermite over four copies of psi",
                    tol(1e-8),
                ));
            }
        }
        checks.extend(slater_bound_checks(n, opts.tolerance_scale)?);
        for &l in &[-1.0, -100.0] {
            checks.extend(width_checks(&make_params(n, l)?, opts.tolerance_scale)?);
        }
        if n >= 2 {
            checks.push(product_state_check(n, opts.seed, opts.tolerance_scale)?);
            checks.push(OracleReport::absolute(
                format!("single-species norm N={n}"),
                1.0,
                single_species_norm_squared(n, 0.0)?.value,
                "tensor Gauss-Hermite",
                tol(1e-8),
            ));
        }
    }
    let p = make_params(1, -1.0)?;
    for &(x, y) in &[(0.0, 0.0), (0.5, -0.4), (1.1, 0.7)] {
        checks.push(OracleReport::relative(
            format!("one-body matrix N=1 at ({x}, {y})"),
            single_particle_closed(&p, x, y)?,
            one_body_element(&p, x, y)?,
            "Gauss-Hermite over the partner coordinate",
            tol(1e-10),
        ));
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        options: *opts,
        checks,
        passed,
    })
}

fn monte_carlo_norm(p: &ModelParams, opts: &VerifyOptions) -> Result<OracleReport> {
    let psi = ground_state(p);
    let frame = Frame::from_kernel(&psi.kernel().powi(2))?;
    let spec = QuadratureSpec::monte_carlo(opts.mc_samples, opts.seed);
    let f = |x: &[f64]| psi.evaluate(x).map_or(f64::NAN, |v| v * v);
    let est = integrate(&f, &frame, &spec)?;
    let tensor = norm_squared(p, None)?;
    // three combined standard errors, floored at rounding level for
    // zero-variance integrands
    let combined = (est.error * est.error + tensor.error * tensor.error).sqrt();
    let r = OracleReport::absolute(
        format!("Monte Carlo norm N={} Lambda={}", p.n(), p.lambda()),
        tensor.value,
        est.value,
        format!("{} (standard error {:e})", spec.describe(), est.error),
        (3.0 * combined).max(1e-12) * opts.tolerance_scale,
    );
    Ok(r)
}

/// At Lambda = 0 the hybrid state is the product of two single-species
/// states; compared at 100 sampled points.
pub fn product_state_check(n: usize, seed: u64, tolerance_scale: f64) -> Result<OracleReport> {
    let tol = |t: f64| t * tolerance_scale;
    let p = make_params(n, 0.0)?;
    let psi = ground_state(&p);
    let single = single_species_ground_state(n, 0.0)?;
    let mut worst = 0.0f64;
    for x in sample_points(&psi, 100, seed)? {
        let v = psi.evaluate(&x)?;
        let w = single.evaluate(&x[..n])? * single.evaluate(&x[n..])?;
        worst = worst.max((v - w).abs() / magnitude(&psi, &x)?.max(f64::MIN_POSITIVE));
    }
    Ok(OracleReport::absolute(
        format!("product of single-species states N={n}"),
        0.0,
        worst,
        "largest pointwise difference at 100 points, relative to the size of the summed terms",
        tol(1e-12),
    ))
}

/// Purity of every bipartition at Lambda = 0 against `1 / (C(N, M_a) C(N, M_b))`.
pub fn slater_bound_checks(n: usize, tolerance_scale: f64) -> Result<Vec<OracleReport>> {
    let tol = |t: f64| t * tolerance_scale;
    let p = make_params(n, 0.0)?;
    let mut out = Vec::new();
    for ka in 0..=n {
        for kb in 0..=n {
            let Ok(bip) = Bipartition::new(ka, kb, n) else {
                continue;
            };
            let rho = reduce_ground_state(&p, bip)?;
            out.push(OracleReport::absolute(
                format!("Slater bound N={n} ({ka},{kb})"),
                1.0 / bip.binomial_factor(n),
                purity(&rho)?,
                "reduce + purity pipeline at Lambda=0",
                tol(1e-8),
            ));
        }
    }
    Ok(out)
}

/// Gaussian widths against decay-rate extraction and corrected widths
/// against quadrature moments and the anti-diagonal scan.
pub fn width_checks(p: &ModelParams, tolerance_scale: f64) -> Result<Vec<OracleReport>> {
    let tol = |t: f64| t * tolerance_scale;
    let n = p.n();
    let l = p.lambda();
    let mut out = Vec::new();
    let single = reduce_ground_state(p, Bipartition::single())?;
    for (i, (closed, oracle)) in single_decay_widths(single.factored(), &gaussian_widths_single(p))?
        .into_iter()
        .enumerate()
    {
        out.push(OracleReport::relative(
            format!("one-body Gaussian width {} N={n} Lambda={l}", ["sigma+", "sigma-"][i]),
            closed,
            oracle,
            "decay-rate extraction",
            tol(1e-6),
        ));
    }
    let ab = pair_ab_density(p)?;
    for (i, (closed, oracle)) in pair_ab_decay_widths(&ab, &gaussian_widths_pair_ab(p))?
        .into_iter()
        .enumerate()
    {
        out.push(OracleReport::relative(
            format!("a-b Gaussian width sigma{} N={n} Lambda={l}", i + 1),
            closed,
            oracle,
            "decay-rate extraction",
            tol(1e-6),
        ));
    }
    let moments = moment_widths(p)?;
    let (d, ad) = corrected_width_single(p)?;
    out.push(OracleReport::relative(
        format!("sigma_a^d N={n} Lambda={l}"),
        d,
        moments.single_d,
        "second moment of |psi|^2",
        tol(1e-6),
    ));
    let scan = antidiagonal_critical_point(p, 400)?;
    out.push(OracleReport::absolute(
        format!("sigma_a^ad N={n} Lambda={l}"),
        ad,
        scan,
        "dense scan of the quadrature one-body matrix",
        tol(1e-6) * ad.max(1.0),
    ));
    let (d, ad) = corrected_width_pair_ab(p)?;
    out.push(OracleReport::relative(format!("sigma_ab^d N={n} Lambda={l}"), d, moments.pair_ab_d, "second moment of |psi|^2", tol(1e-6)));
    out.push(OracleReport::relative(format!("sigma_ab^ad N={n} Lambda={l}"), ad, moments.pair_ab_ad, "second moment of |psi|^2", tol(1e-6)));
    if let Some((md, mad)) = moments.pair_aa {
        let aa = pair_aa_density(p)?;
        let w = gaussian_widths_pair_aa(p);
        for (i, (closed, oracle)) in pair_aa_decay_widths(&aa, &w)?.into_iter().enumerate() {
            out.push(OracleReport::relative(
                format!("a-a Gaussian width {} N={n} Lambda={l}", ["sigma_p", "sigma_m"][i]),
                closed,
                oracle,
                "decay-rate extraction",
                tol(1e-6),
            ));
        }
        out.push(OracleReport::relative(
            format!("a-a separation scale N={n} Lambda={l}"),
            rms_separation_gaussian(p),
            super::integrals::decay_width(&aa, &[0.5, -0.5, 0.5, -0.5])?,
            "decay-rate extraction",
            tol(1e-6),
        ));
        let (d, ad) = corrected_width_pair_aa(p)?;
        out.push(OracleReport::relative(format!("sigma_aa^d N={n} Lambda={l}"), d, md, "second moment of |psi|^2", tol(1e-6)));
        out.push(OracleReport::relative(format!("sigma_aa^ad N={n} Lambda={l}"), ad, mad, "second moment of |psi|^2", tol(1e-6)));
    }
    Ok(out)
}
