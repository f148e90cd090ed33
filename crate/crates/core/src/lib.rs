//! Gaussian-picture simulation of two coupled harmonic oscillators damped by
//! a correlated common environment.
//!
//! The crate builds the drift and diffusion matrices of the moment equations,
//! propagates moments and covariances, analyses the non-Hermitian spectrum
//! that governs synchronization, solves for stationary states and evaluates
//! Rényi-2 information measures on the resulting Gaussian states.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod gauss_info;
pub mod linalg;
pub mod model;
pub mod optimize;
pub mod steady;

pub use dynamics::{
    classify_regime, eigenspectrum, propagate_covariance, propagate_moments, sync_diagnostics,
    CovarianceState, IntegratorSettings, MomentState, PhysicalityPolicy, Regime, SpectralResult,
    Trajectory,
};
pub use error::{Error, Result};
pub use gauss_info::{
    classical_correlations, discord_lower_bound, gaussian_discord, info_report,
    ladder_to_quadrature, mutual_information, physicality_check, renyi2_entropy,
    symplectic_eigenvalues, InfoReport, Modes, QuadratureCovariance,
};
pub use model::{
    build_diffusion_matrix, build_dynamical_matrix, build_lindblad_ops, critical_xi, gamma12,
    validate_params, SystemParams,
};
pub use steady::{closed_form_steady, flux, singular_xi, solve_lyapunov, FluxReport, SteadyState};
