//! Spectra of the self-affine measure with `R = [[2,1],[0,2]]` and digits
//! `{(0,0), (1,0)}`: construction, orthogonality and completeness checks,
//! and Beurling density and dimension estimation.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod completeness;
pub mod density;
pub mod error;
pub mod measure;
mod numeric;
pub mod report;
pub mod spectra;
pub mod sweep;
pub mod tolerances;

pub use completeness::{
    default_grid, jp_check_points, jp_spectrum_check, q_lambda_truncated,
    summation_identity_residual, verify_family, QReport,
};
pub use density::{
    banach_density, banach_dimension, beurling_dimension, brute_force_count, count_in_ball,
    dimension_upper_bound, upper_beurling_density, CenterPolicy, CountingProfile, DensityEstimate,
    DimensionEstimate, RadiusSchedule,
};
pub use error::{Error, Result};
pub use measure::{empirical_fourier, ComplexValue, Point2, SelfAffineSystem};
pub use numeric::{fmt_g17, least_squares_slope, pairwise_sum, sin_pi, sinc_pi};
pub use report::VerificationReport;
pub use spectra::{
    check_orthogonal_combinatorial, gram_matrix, spectrum_window, BetaFamily, CustomBeta,
    GramMatrix, Spectrum,
};
