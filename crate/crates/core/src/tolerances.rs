//! Numerical thresholds used across the crate.
//!
//! Every threshold that decides an integer (a kernel dimension, a sign count,
//! a resonance flag) lives here so that the decisions can be audited in one
//! place.

use std::f64::consts::FRAC_PI_2;

/// Singular values of an orthonormalised frame block below this count as
/// kernel. Frames are normalised first, so the threshold is relative to the
/// unit scale of the frame.
pub const KERNEL_TOL: f64 = 1e-8;

/// Largest entry of `MᵀJM − J` accepted for a matrix labelled symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

/// Local error target of one integrator step (max-abs, relative to the
/// size of the current solution).
pub const STEP_LOCAL_TOL: f64 = 1e-10;

/// Symplectic drift a single step may add before it is rejected.
pub const STEP_DRIFT_TOL: f64 = 1e-12;

/// Steps between two projections back onto the symplectic group.
pub const PROJECTION_PERIOD: usize = 64;

/// Minimum number of stored samples per unit of normalised time.
pub const MIN_SAMPLES_PER_UNIT: usize = 256;

/// Normalised Galerkin eigenvalues below this magnitude are taken to be
/// truncations of kernel directions when the d-window is chosen.
pub const ZERO_EIGEN_TOL: f64 = 1e-7;

/// A group of eigenvalues this many times smaller than the rest of the
/// spectrum of `A − B` is treated as a kernel still converging; the level
/// is raised until it drops below [`ZERO_EIGEN_TOL`] or stops shrinking.
pub const NEAR_ZERO_CLUSTER_RATIO: f64 = 1e-3;

/// Upper bound on the d-window.
pub const D_CAP: f64 = 0.1;

/// Matrix entries below this fraction of the largest entry are ignored when
/// a Gram matrix is split into independent blocks.
pub const BLOCK_SPLIT_TOL: f64 = 1e-13;

/// Smallest perturbation used for splitting numbers.
pub const SPLITTING_EPS_FLOOR: f64 = 1e-4;

/// Eigenvalues within this distance of the unit circle are elliptic.
pub const UNIT_CIRCLE_TOL: f64 = 1e-6;

/// Spectral arguments closer than this are merged into one point.
pub const ARGUMENT_MERGE_TOL: f64 = 1e-6;

/// `kθ/2π` within this distance of an integer makes a ceiling ambiguous.
pub const RESONANCE_TOL: f64 = 1e-9;

/// Default number of interior points of the θ scan over `(0, π)`.
pub const THETA_GRID: usize = 180;

/// Allowed violation of the brake symmetry of a coefficient.
pub const BRAKE_SYMMETRY_TOL: f64 = 1e-10;

/// Allowed asymmetry of a coefficient matrix.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Residual budget of the symmetric normal form.
pub const NORMAL_FORM_TOL: f64 = 1e-9;

/// Largest accepted phase increment between consecutive winding samples.
pub const PHASE_STEP_MAX: f64 = FRAC_PI_2;

/// A crossing is accepted when the smallest frame singular value at the
/// refined minimum is below this.
pub const CROSSING_TOL: f64 = 1e-7;

/// Singular values below this at an accepted crossing add to its dimension.
pub const CROSSING_DIM_TOL: f64 = 1e-5;
