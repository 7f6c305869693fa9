//! Phase-space propagators for time-dependent dissipative quadratic
//! Hamiltonians.
//!
//! The library integrates the complex symplectic resolvent `R(t, τ)` of a
//! family of quadratic forms `q_t`, builds the Weyl symbol and the two-point
//! Gaussian kernel of the evolution operator from it, and computes the
//! singular spaces that confine propagated Gabor singularities. A spectral
//! time-stepping reference and an STFT-based wave-front detector (both for
//! one space dimension) close the loop numerically.
//!
//! Modules follow the pipeline:
//!
//! * [`symplectic`] — complex symplectic form, quadratic forms, Hamilton maps
//! * [`family`] — time-dependent coefficient families, built-in operators,
//!   JSON config ingestion
//! * [`resolvent`] — adaptive integration of `dR/dt = 2i F_t R` with the
//!   jointly integrated log-prefactor
//! * [`symbol`] — generalized Mehler symbol, Riccati matrix, Moyal transport
//!   checks
//! * [`fio`] — Gaussian kernels, grid propagation, Hermite–Mehler identity
//! * [`oracle`] — direct spectral time-stepping of the quadratic operator
//! * [`singular`] — autonomous and time-dependent singular spaces
//! * [`wavefront`] — wave-front prediction and STFT decay detection
//! * [`verify`] — aggregated invariant suites for the CLI

pub mod family;
pub mod fio;
pub mod grid;
pub mod linalg;
pub mod oracle;
pub mod resolvent;
pub mod singular;
pub mod symbol;
pub mod symplectic;
pub mod verify;
pub mod wavefront;

use num_complex::Complex64;

/// Complex dense matrix used throughout (dimensions are `2n × 2n` with small `n`).
pub type CMat = nalgebra::DMatrix<Complex64>;
/// Complex dense vector.
pub type CVec = nalgebra::DVector<Complex64>;
/// Real dense matrix.
pub type RMat = nalgebra::DMatrix<f64>;
/// Real dense vector.
pub type RVec = nalgebra::DVector<f64>;

/// Errors shared by every module.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("argument out of range: {0}")]
    Range(String),
    #[error("det(R+I) degeneracy crossing in [{lo}, {hi}]")]
    Degenerate { lo: f64, hi: f64 },
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("integrator exceeded its step budget near t = {0}")]
    StepBudget(f64),
    #[error("kernel is distributional; no pointwise action")]
    Distributional,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Maps indices `0..n` through `f`, in parallel when the `parallel` feature is on.
pub(crate) fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
