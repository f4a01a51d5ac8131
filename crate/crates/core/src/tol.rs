//! Numerical tolerances shared by the library, its tests and the CLI.
//!
//! Every threshold that decides pass/fail somewhere in the crate lives here so
//! the library and its verification code cannot drift apart.

/// Symmetry check applied before a Jacobi eigendecomposition.
pub const SYMMETRY: f64 = 1e-10;

/// Jacobi sweeps stop once the off-diagonal Frobenius norm drops below this.
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-12;

/// Upper bound on cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Smallest admissible pivot in the normal-equations solve and in rank counting.
pub const PIVOT: f64 = 1e-10;

/// Distance from ±1/2 tolerated when snapping an extracted phase-map entry.
pub const SNAP: f64 = 1e-9;

/// Entries closer than this to ±1/2 count as exact when validating a phase map.
pub const SNAP_EXACT: f64 = 1e-12;

/// Largest accepted residual `‖M·angles − centered‖∞` after a decomposition.
pub const RESIDUAL: f64 = 1e-9;

/// Agreement required between the two simulators and between solve routes.
pub const SIMULATOR_AGREEMENT: f64 = 1e-10;

/// Entrywise agreement for closed-form gate identities.
pub const IDENTITY: f64 = 1e-12;

/// Training stops once the full-batch MSE falls below this value.
pub const TRAIN_STOP_LOSS: f64 = 1e-6;

/// A snapped weight matrix is lattice-structured when no weight moved further than this.
pub const LATTICE_DEVIATION: f64 = 0.1;

/// Column blocks are reported as duplicates when they agree to this tolerance.
pub const BLOCK_MATCH: f64 = 1e-2;
