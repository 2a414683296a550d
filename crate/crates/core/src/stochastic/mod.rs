//! The two-step Gaussian model, the φ-bounded one-step model, chi-distribution
//! closed forms and Monte Carlo probes of the Gaussian concentration bounds.

pub mod chi;
pub mod instance;
pub mod montecarlo;
pub mod rng;

pub use chi::{
    chi_inverse_moment, chi_inverse_moment_quadrature, chi_pdf, chi_square_tail, d_max_bound, integrate, TailBound,
};
pub use instance::{
    grid_origins, one_step_sample, perturb, perturb_unrestricted, single_point_origins, uniform_origins, Instance,
    OneStepSpec,
};
pub use montecarlo::{
    mc_ball_mass, mc_dominance, mc_inverse_norm_mean, mc_inverse_norm_power, mc_line_closeness, mc_tail_exceedance,
    DominanceSample, Frequency,
};
pub use rng::{derive_seed, stream_rng};
