//! Independent brute-force checks: quadrature, Monte Carlo, decay-rate
//! extraction, finite-difference residuals and exchange fuzzing.

mod decay;
mod integrals;
mod quadrature;
mod residual;
mod suite;

pub use decay::{decay_rate, DecayFit};
pub use integrals::{
    antidiagonal_critical_point, decay_width, energy_expectation, exact_nodes, moment_widths, norm_squared,
    one_body_element, pair_aa_decay_widths, pair_ab_decay_widths, purity_quadrature, second_moment,
    single_decay_widths, single_species_norm_squared, MomentWidths,
};
pub use quadrature::{
    adaptive_1d, gauss_hermite, integrate, Estimate, Frame, QuadratureSpec, Scheme, DEFAULT_MC_SAMPLES, DEFAULT_SEED,
    MAX_ADAPTIVE_DIM, MAX_TENSOR_DIM,
};
pub use residual::{
    permutation_fuzz, sample_points, schrodinger_residual, FuzzReport, ResidualReport, ANTISYMMETRY_TOL, FD_STEP,
    NODE_THRESHOLD,
};
pub use suite::{
    lambda_grid, product_state_check, run_verify, slater_bound_checks, width_checks, OracleReport, VerifyOptions,
    VerifyReport,
};
