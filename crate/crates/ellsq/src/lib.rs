//! Exact combinatorics and spectral statistics of squares of elliptic random
//! matrices.
//!
//! An elliptic random matrix has jointly Gaussian entry pairs
//! `(X_ij, X_ji)` with unit variances and correlation rho; the object of
//! study is the squared-singular-value matrix `W = X^2 X*^2 / N^2`. This
//! crate computes the limiting moment polynomials `M_k(rho)` by recurrence
//! ([`moments`]), cross-checks them against brute-force weighted chord
//! diagram sums ([`chords`]), converts between moments and free cumulants
//! over non-crossing partitions ([`ncpart`]), evaluates the closed-form
//! R-transform and numerically inverts the Cauchy transform to densities
//! ([`spectral`]), and samples finite matrices to compare ([`mc`]). The free
//! cumulants come out as type-B Narayana polynomials, whose exact identity
//! suite lives in [`narayana`].
//!
//! Data-parallel loops use rayon when the default `parallel` feature is on;
//! disabling it swaps in sequential equivalents with bit-identical results.

pub mod chords;
pub mod mc;
pub mod moments;
pub mod narayana;
pub mod ncpart;
pub mod poly;
pub mod rng;
pub mod spectral;
pub mod verify;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    InvalidArgument(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("branch continuation ambiguous near z = {z}")]
    BranchAmbiguity { z: num_complex::Complex64 },
    #[error("evaluation on a branch cut at z = {z}")]
    BranchCut { z: num_complex::Complex64 },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Caps the rayon worker count from `ELLIPTIC_THREADS` (0 or unset = auto).
/// Call once at startup; later calls are ignored. A no-op in sequential
/// builds.
pub fn init_thread_pool_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("ELLIPTIC_THREADS") {
            if let Ok(k) = v.trim().parse::<usize>() {
                if k > 0 {
                    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
                }
            }
        }
    }
}
