//! Numeric tolerances used by verdicts in `verify`, `sweep` and the
//! acceptance suite. Reports print the tolerance they were judged against.

/// Product vs closed-form Fourier transform.
pub const FOURIER_AGREEMENT: f64 = 1e-9;
pub const FOURIER_PRODUCT_DEPTH: usize = 40;

/// Zero-set union search depth.
pub const ZERO_SET_KMAX: u32 = 30;

/// Gram matrix off-diagonal magnitude.
pub const GRAM_OFF_DIAGONAL: f64 = 1e-12;
pub const GRAM_WINDOW: u64 = 200;

/// Terms in the truncated completeness sum and the deficit it must reach.
pub const Q_TERMS: usize = 10_000;
pub const Q_MAX_DEFICIT: f64 = 2.1e-4;

/// `summation_identity_residual(xi, N) <= IDENTITY_RESIDUAL_FACTOR / N`.
pub const IDENTITY_RESIDUAL_FACTOR: f64 = 3.0;

/// Absolute error on a dimension estimate.
pub const DIMENSION_ABS: f64 = 0.03;
/// Relative error on a density estimate.
pub const DENSITY_REL: f64 = 0.05;
/// Dimension-zero families.
pub const EXPONENTIAL_DIMENSION_MAX: f64 = 0.05;
/// Additive slack on the `2 / (ln h)^t` density bound of the power-log family.
pub const POWER_LOG_SLACK: f64 = 0.05;

/// Dimension window for the scaled power-law family at `t = 0.5`.
pub const SCALED_DIMENSION_RANGE: (f64, f64) = (0.47, 0.53);

/// Off-origin centres may beat the origin by at most this many points.
pub const CENTER_SLACK: u128 = 2;

/// Empirical vs exact characteristic function.
pub const MONTE_CARLO_ABS: f64 = 0.005;
pub const MONTE_CARLO_SAMPLES: usize = 1_000_000;

/// Slack over the dimension upper bound 1.
pub const UPPER_BOUND_SLACK: f64 = 0.03;
