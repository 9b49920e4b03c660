//! Approximate Bayesian inference on scalar functionals of a copula.
//!
//! The pipeline: draw functional proposals from a prior, weight each by the
//! exponentially tilted empirical likelihood of the moment condition on a
//! fresh pseudo-data realization, resample with replacement. Alongside live
//! the exact copula samplers and population oracles used as experiment
//! truths, and the frequentist/parametric baselines the simulations compare
//! against.

pub mod baselines;
pub mod betel;
pub mod copula;
pub mod data;
pub mod engine;
pub mod error;
pub mod functionals;
pub mod quad;
pub mod rng;

pub use baselines::{
    chain_to_rho, freq_interval, mh_theta_chain, rho_asymptotic_variance, spearman_from_theta,
    FreqMethod, FrequentistInterval, ThetaChain, TruncNormalPrior,
};
pub use betel::{log_betel, solve_moments, solve_tilt, BetelSolution, BetelStatus};
pub use copula::{
    copula_cdf, copula_log_density, pearson_from_spearman, sample_copula, true_functional,
    CopulaFamily, CopulaSpec,
};
pub use data::{DataMatrix, PseudoData};
pub use engine::{
    draw_pseudo_data, effective_sample_size, resample, run_abscop, summarize, ColumnPosterior,
    MarginalFamily, MarginalSource, PosteriorSummary, PriorSpec, PseudoTensor, WeightedPosterior,
};
pub use error::{Error, Result};
pub use functionals::{
    empirical_copula_at, estimate, moment_vector, pseudo_observations, ranks, rho_normalizer,
    FunctionalKind, MomentBasis, MomentVector,
};
