use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is out of range ({constraint})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("parameter `{name}` is not finite")]
    NonFinite { name: &'static str },
    #[error("γ₁₂ = 0: no cross-relaxation, threshold undefined")]
    ZeroDamping,
    #[error("integration step too large: dt·max|Re eig W| = {ratio:.3e} > {limit}")]
    StepTooLarge { ratio: f64, limit: f64 },
    #[error("covariance lost physicality at t = {t}: min eig(σ + iΩ/2) = {violation:.3e}")]
    PhysicalityLost { t: f64, violation: f64 },
    #[error(
        "no unique steady state: slowest mode damping {min_damping:.3e} is below {tolerance:e}"
    )]
    NoUniqueSteadyState { min_damping: f64, tolerance: f64 },
    #[error("dynamics are unstable: max Re eig W = {max_real:.3e} > 0")]
    Unstable { max_real: f64 },
    #[error("stationary Lyapunov system is numerically singular (residual {residual:.3e})")]
    SingularSolve { residual: f64 },
    #[error("closed-form steady state needs ω₁ = ω₂ (got δ = {detuning})")]
    DetuningNotZero { detuning: f64 },
    #[error("closed-form Δ is singular: |γ² − γ₁₂²ξ²| = {denominator:.3e}")]
    DeltaSingular { denominator: f64 },
    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("measurement optimization did not converge (relative change {relative_change:.3e})")]
    OptimizationDidNotConverge { relative_change: f64 },
    #[error("moment amplitude {amplitude:.3e} below {floor:e}; phase undefined")]
    AmplitudeUnderflow { amplitude: f64, floor: f64 },
    #[error("result is not finite")]
    NonFiniteResult,
}

pub type Result<T> = std::result::Result<T, Error>;
