//! Numerical thresholds shared across the analysis modules.
//!
//! Every cut that turns a floating-point quantity into a discrete decision
//! (rank, multiplicity, root distinctness, cone sign) lives here.

/// Relative tolerance (times the matrix norm) for merging computed
/// eigenvalues into one cluster.
pub const EIGEN_CLUSTER_REL: f64 = 1e-8;

/// Singular values below this fraction of the largest count as zero when
/// computing ranks, kernels and cokernels.
pub const RANK_REL: f64 = 1e-10;

/// Relative bound on the imaginary part of an eigenvalue cluster before it is
/// reported as non-real.
pub const IMAG_REL: f64 = 1e-7;

/// `|det L(rho)|` below this (relative to `|L(rho)|^N`) marks a characteristic point.
pub const CHARACTERISTIC_REL: f64 = 1e-9;

/// Minimum pairwise gap, relative to the root scale, for roots to count as distinct.
pub const ROOT_GAP_REL: f64 = 1e-7;

/// Imaginary parts of univariate roots below this (relative) count as real.
pub const ROOT_IMAG_REL: f64 = 1e-7;

/// Coefficient cut for polynomial identities computed in floating point.
pub const POLY_COEFF: f64 = 1e-10;

/// Sign tolerance for symplectic pairings, relative to `|X| |Y|`.
pub const SIGMA_SIGN_REL: f64 = 1e-9;

/// Bracket magnitude (relative to gradient norms) treated as zero.
pub const BRACKET_REL: f64 = 1e-10;

/// Values of `|f|` below this are dropped from order fits.
pub const ORDER_FLOOR: f64 = 1e-14;

/// Maximum RMS residual of a log-log order fit before it is flagged unreliable.
pub const ORDER_FIT_RESIDUAL: f64 = 0.1;

/// Default number of transverse directions in the strict hyperbolicity test.
pub const TSH_SAMPLES: usize = 200;

/// Default number of boundary rays sampled for the propagation cone.
pub const CONE_RAYS: usize = 2000;

/// Largest `h * sqrt(kappa)` accepted before a mode grid is under-resolved.
pub const MAX_SCALED_SPACING: f64 = 0.5;
