//! Numerical laboratory for the infrared structure of a dressed non-relativistic
//! electron coupled to the quantized radiation field.
//!
//! The library studies one fiber of the translation-invariant model at fixed total
//! momentum `p`: a two-component spinor coupled to transverse photons with an
//! infrared regularization scale `sigma` and a fixed ultraviolet cutoff at `|k| = 1`.
//! Everything is organized around two routes to the same physics:
//!
//! * **closed-form / quadrature route** ([`kernels`], [`representation`],
//!   [`scattering`]): the soft-photon cloud amplitude `v(k, lambda)`, its
//!   `L^2` norms, coherent-state overlaps and the diagnostics built from them;
//! * **operator route** ([`fockspace`], [`hamiltonian`], [`spectral`]): a truncated
//!   Fock-space realization of the fiber Hamiltonian on a finite photon mode grid,
//!   solved by a deterministic block eigensolver.
//!
//! The two routes are kept independent so each can serve as the other's check:
//! the log-divergence of the photon number, the equivalence/inequivalence
//! dichotomy of the asymptotic photon representations, and the cell-decomposition
//! scaffolding for scattering states are all computed both ways where the model
//! permits.
//!
//! Units: photon momenta are dimensionless with the ultraviolet edge at
//! `|k| = 1`; the infrared scale satisfies `sigma <= 1/2`; the coupling `alpha`
//! and the fiber momentum `p` (with `|p| < 1/3`) are the remaining parameters.

pub mod fockspace;
pub mod hamiltonian;
pub mod kernels;
pub mod quad;
pub mod representation;
pub mod scattering;
pub mod solver;
pub mod spectral;
pub mod vec3;

use thiserror::Error;

/// Complex scalar used everywhere a phase can appear.
pub type C64 = num_complex::Complex64;

/// Library-wide error type. Variants carry enough context for a caller to map
/// them onto process exit codes without string matching.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("parameter `{name}` = {value} violates: {constraint}")]
    Domain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// The requested quantity is a genuinely divergent integral, not a bug.
    #[error("divergent quantity: {what}")]
    Divergent { what: String },

    /// A truncated construction lost more mass than the caller allowed.
    #[error("truncation defect {defect:.3e} exceeds threshold {threshold:.3e}")]
    Truncation { defect: f64, threshold: f64 },

    /// The iterative eigensolver ran out of iterations before the residual target.
    #[error("eigensolver stalled at residual {residual:.3e} (target {target:.3e}) after {iterations} iterations")]
    NoConvergence {
        residual: f64,
        target: f64,
        iterations: usize,
    },

    /// A linear solve inside a derived quantity failed to converge.
    #[error("inner linear solve stalled at residual {residual:.3e} after {iterations} iterations")]
    LinearSolve { residual: f64, iterations: usize },

    /// A basis or matrix would exceed the configured size cap.
    #[error("dimension {requested} exceeds configured cap {cap}")]
    Resource { requested: usize, cap: usize },

    /// Not enough data points for the requested fit or scan.
    #[error("insufficient data: {what}")]
    InsufficientData { what: String },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {error:.3e} > tolerance {tolerance:.3e}")]
    Quadrature { error: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
