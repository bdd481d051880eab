//! Finite-blocklength wiretap deception metrics and the blocklength
//! optimizer behind them.
//!
//! A transmitter sends a ciphertext and a key as two short packets; the
//! legitimate receiver should decode both while the eavesdropper should
//! decode the ciphertext but lose the key, so that a random litter word
//! deceives it into accepting a falsified plaintext. The crate provides:
//!
//! - [`metrics`]: the closed-form erasure probabilities under the
//!   normal approximation and the derived security metrics (leakage-failure
//!   probability, effective deception rate, throughput).
//! - [`qbounds`]: a high-precision Q-function and the exponential tangent
//!   bounds that turn the deception rate into a touching concave surrogate.
//! - [`solver`]: the majorization / block-coordinate / fractional-programming
//!   optimizer of the two blocklengths, an exhaustive grid oracle, and the
//!   conventional baseline without deceptive ciphering.
//! - [`linkmodel`]: a desk-scale cipher/litter-code realization and a
//!   Monte-Carlo outcome simulator validating the analytic metrics.

mod erf;
pub mod error;
pub mod linkmodel;
pub mod metrics;
pub mod qbounds;
pub mod solver;

pub use error::{Error, Result};
pub use metrics::{
    check_feasible, db_to_linear, deception_rate, dispersion, erasure_prob, erasure_prob_grad,
    evaluate, leakage_failure, non_perception, omega, shannon_capacity, throughput,
    CodeAllocation, ConstraintSlack, ErasureProfile, Feasibility, LinkConfig, Receiver,
    Thresholds,
};
pub use qbounds::{
    bound_coeffs, epsilon_hat, q_function, q_lower_bound, q_upper_bound, rd_surrogate,
    surrogate_factors, BoundAnchor, BoundCoeffs,
};
pub use solver::{
    baseline_pls, concave_max_1d, feasible_interval, fp_solve_key, fp_solve_msg,
    fp_y_closed_form, grid_oracle, solve, Component, GridOracle, InitStrategy, Interval,
    IterationTrace, Layer, SolveResult, SolverConfig, SurfacePoint, TraceRecord,
};
