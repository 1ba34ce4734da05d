//! Numerical building blocks shared by every model: dense row-major
//! matrices, Cholesky factorization with jitter escalation, triangular
//! solves, multivariate-normal sampling, Sobol point sets and central
//! finite differences.
//!
//! All randomness flows through an explicitly passed [`Rng`]; nothing in
//! this crate touches a global generator.

mod diff;
mod linalg;
mod matrix;
mod optim;
mod random;
mod sobol;
mod special;

pub use diff::finite_diff_grad;
pub use linalg::{
    cholesky, cholesky_inverse, log_det_from_cholesky, semidefinite_cholesky, semidefinite_row, semidefinite_tol,
    solve_lower_vec, solve_upper_vec, tri_solve, Cholesky,
};
pub use matrix::{axpy, dot, Matrix};
pub(crate) use matrix::gemm;
pub use optim::Adam;
pub use random::{mix_seed, mvn_sample, rng_from_seed, standard_normal, stream_rng, Rng};
pub use sobol::{latin_hypercube, sobol_points, sobol_points_or_lhs, SobolDraw, SOBOL_MAX_DIM};
pub use special::{gamma_logpdf, ln_gamma, normal_cdf, normal_pdf, normal_quantile};
