//! Time evolution of moments and covariances, plus the non-Hermitian
//! spectrum of the reduced moment matrix.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauss_info::{ladder_to_quadrature, physicality_check, Physicality};
use crate::linalg::{c, hermitize, re, CMat2, CMat4, C64, I};
use crate::model::{
    build_diffusion_matrix, build_dynamical_matrix, discriminant, gamma12, reduced_matrix,
    DiffusionMatrix, SystemParams,
};

/// Gap below which two eigenvalue components count as coincident.
pub const REGIME_TOL: f64 = 1e-9;
/// Eigenvector condition number above which the moment propagator switches
/// to a matrix exponential.
pub const EP_CONDITION_LIMIT: f64 = 1e8;
/// Largest allowed dt·max|Re eig W|.
pub const STEP_STABILITY_LIMIT: f64 = 0.1;
/// Physicality tolerance applied to emitted covariance samples.
pub const PHYSICALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Normal,
    ExceptionalPoint,
    Synchronized,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Normal => "normal",
            Regime::ExceptionalPoint => "exceptional_point",
            Regime::Synchronized => "synchronized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResult {
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    /// |Re λ₊ − Re λ₋|
    pub gap_real: f64,
    /// |Im λ₊ − Im λ₋|
    pub gap_imag: f64,
    pub regime: Regime,
}

/// λ± = ½(ω₁+ω₂−iγ) ± ½√((2g−iξγ₁₂)² + δ²), with λ₊ the branch of larger
/// real part (larger imaginary part on a tie).
pub fn eigenspectrum(p: &SystemParams) -> SpectralResult {
    let center = c(0.5 * (p.omega1 + p.omega2), -0.5 * p.gamma);
    let root = 0.5 * discriminant(p.g, p.xi, gamma12(p), p.detuning()).sqrt();
    let (mut lp, mut lm) = (center + root, center - root);
    let swap = if (lp.re - lm.re).abs() <= REGIME_TOL {
        lp.im < lm.im
    } else {
        lp.re < lm.re
    };
    if swap {
        std::mem::swap(&mut lp, &mut lm);
    }
    let gap_real = (lp.re - lm.re).abs();
    let gap_imag = (lp.im - lm.im).abs();
    let regime = if gap_real < REGIME_TOL && gap_imag > REGIME_TOL {
        Regime::Synchronized
    } else if gap_real < REGIME_TOL && gap_imag < REGIME_TOL && p.gamma > 0.0 {
        Regime::ExceptionalPoint
    } else {
        Regime::Normal
    };
    SpectralResult {
        lambda_plus: lp,
        lambda_minus: lm,
        gap_real,
        gap_imag,
        regime,
    }
}

pub fn classify_regime(p: &SystemParams) -> Regime {
    eigenspectrum(p).regime
}

/// Moments `(⟨a₁⟩, ⟨a₁†⟩, ⟨a₂⟩, ⟨a₂†⟩)` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub t: f64,
    pub x: [C64; 4],
}

impl MomentState {
    /// Coherent displacements α₁, α₂ at time `t`.
    pub fn displaced(t: f64, alpha1: C64, alpha2: C64) -> Self {
        Self {
            t,
            x: [alpha1, alpha1.conj(), alpha2, alpha2.conj()],
        }
    }

    pub fn a1(&self) -> C64 {
        self.x[0]
    }

    pub fn a2(&self) -> C64 {
        self.x[2]
    }

    /// Largest violation of ⟨aᵢ†⟩ = conj⟨aᵢ⟩.
    pub fn pairing_defect(&self) -> f64 {
        (self.x[1] - self.x[0].conj())
            .norm()
            .max((self.x[3] - self.x[2].conj()).norm())
    }
}

/// Which route produced a moment propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorRoute {
    Eigendecomposition,
    MatrixExponential,
}

/// exp(−iMt) for the reduced matrix.
pub fn moment_propagator(m: &CMat2, t: f64) -> (CMat2, PropagatorRoute) {
    if t == 0.0 {
        return (CMat2::identity(), PropagatorRoute::Eigendecomposition);
    }
    let a = m.map(|z| -I * z * t);
    match eigen_propagator(m, t) {
        Some(u) => (u, PropagatorRoute::Eigendecomposition),
        None => (a.exp(), PropagatorRoute::MatrixExponential),
    }
}

fn eigen_propagator(m: &CMat2, t: f64) -> Option<CMat2> {
    let tr = m.trace();
    let det = m.determinant();
    let root = (tr * tr - 4.0 * det).sqrt();
    let l = [(tr + root) * 0.5, (tr - root) * 0.5];
    // Columns: eigenvectors of a 2×2 matrix from either row of (M − λI).
    let vec_for = |lam: C64| -> Vector2<C64> {
        let (b, cc) = (m[(0, 1)], m[(1, 0)]);
        let v1 = Vector2::new(b, lam - m[(0, 0)]);
        let v2 = Vector2::new(lam - m[(1, 1)], cc);
        let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
        if v.norm() == 0.0 {
            // M is already diagonal
            if (lam - m[(0, 0)]).norm() <= (lam - m[(1, 1)]).norm() {
                Vector2::new(re(1.0), re(0.0))
            } else {
                Vector2::new(re(0.0), re(1.0))
            }
        } else {
            v / re(v.norm())
        }
    };
    let mut v0 = vec_for(l[0]);
    let mut v1 = vec_for(l[1]);
    if (l[0] - l[1]).norm() == 0.0 && m[(0, 1)].norm() == 0.0 && m[(1, 0)].norm() == 0.0 {
        v0 = Vector2::new(re(1.0), re(0.0));
        v1 = Vector2::new(re(0.0), re(1.0));
    }
    let v = CMat2::from_columns(&[v0, v1]);
    let inv = v.try_inverse()?;
    let cond = v.norm() * inv.norm();
    if !cond.is_finite() || cond > EP_CONDITION_LIMIT {
        return None;
    }
    let phases = CMat2::from_diagonal(&Vector2::new((-I * l[0] * t).exp(), (-I * l[1] * t).exp()));
    Some(v * phases * inv)
}

/// Exact moments at `x0.t + t` (the source term of the moment equation is zero).
pub fn propagate_moments(p: &SystemParams, x0: &MomentState, t: f64) -> Result<MomentState> {
    let (u, _) = moment_propagator(&reduced_matrix(p), t);
    let a = u * Vector2::new(x0.x[0], x0.x[2]);
    if !(a[0].re.is_finite() && a[0].im.is_finite() && a[1].re.is_finite() && a[1].im.is_finite()) {
        return Err(Error::NonFiniteResult);
    }
    Ok(MomentState {
        t: x0.t + t,
        x: [a[0], a[0].conj(), a[1], a[1].conj()],
    })
}

/// Covariance Θᵢⱼ = ½⟨{δxᵢ†, δxⱼ}⟩ in the ladder ordering.
///
/// With this index convention `Θ[(0, 2)] = ⟨a₁†a₂⟩` and the equation of motion
/// reads `dΘ/dt = conj(W)Θ + ΘWᵀ + D`, i.e. `Θᵀ` obeys `WΘᵀ + ΘᵀW† + D`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    pub t: f64,
    pub theta: CMat4,
}

impl CovarianceState {
    pub fn vacuum(t: f64) -> Self {
        Self {
            t,
            theta: CMat4::identity() * re(0.5),
        }
    }

    pub fn thermal(t: f64, nbar1: f64, nbar2: f64) -> Self {
        let mut theta = CMat4::zeros();
        for (k, n) in [(0, nbar1), (1, nbar1), (2, nbar2), (3, nbar2)] {
            theta[(k, k)] = re(n + 0.5);
        }
        Self { t, theta }
    }

    /// ⟨a₁†a₁⟩ + ½
    pub fn theta11(&self) -> f64 {
        self.theta[(0, 0)].re
    }

    /// ⟨a₂†a₂⟩ + ½
    pub fn theta22(&self) -> f64 {
        self.theta[(2, 2)].re
    }

    /// ⟨a₁†a₂⟩
    pub fn theta12(&self) -> C64 {
        self.theta[(0, 2)]
    }
}

/// Right-hand side of the covariance equation of motion.
pub fn covariance_rhs(w: &CMat4, d: &CMat4, theta: &CMat4) -> CMat4 {
    w.map(|z| z.conj()) * theta + theta * w.transpose() + d
}

/// What to do with samples that violate Θ + iΩ ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhysicalityPolicy {
    /// Abort with [`Error::PhysicalityLost`].
    #[default]
    Enforce,
    /// Keep going; the violation is recorded on the sample.
    Record,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub t_end: f64,
    /// Emit every `stride`-th step.
    pub stride: usize,
    pub physicality: PhysicalityPolicy,
}

impl IntegratorSettings {
    /// 200 steps per period of ω₁.
    pub fn default_for(p: &SystemParams, t_end: f64) -> Self {
        Self {
            dt: 2.0 * std::f64::consts::PI / p.omega1 / 200.0,
            t_end,
            stride: 1,
            physicality: PhysicalityPolicy::Enforce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub moments: MomentState,
    pub covariance: CovarianceState,
    /// Smallest eigenvalue of σ + iΩ/2 (non-negative when physical).
    pub min_uncertainty_eig: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: SystemParams,
    pub settings: IntegratorSettings,
    pub condition_limit: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.moments.t)
    }

    pub fn moments(&self) -> Vec<MomentState> {
        self.samples.iter().map(|s| s.moments).collect()
    }
}

/// Error raised while producing a trajectory, tagged with the sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryError {
    pub sample_index: usize,
    pub source: Error,
}

impl std::fmt::Display for TrajectoryError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sample {}: {}", self.sample_index, self.source)
    }
}

impl std::error::Error for TrajectoryError {}

fn rk4_step(w: &CMat4, d: &CMat4, theta: &CMat4, dt: f64) -> CMat4 {
    let h = re(dt);
    let half = re(0.5 * dt);
    let k1 = covariance_rhs(w, d, theta);
    let k2 = covariance_rhs(w, d, &(theta + k1 * half));
    let k3 = covariance_rhs(w, d, &(theta + k2 * half));
    let k4 = covariance_rhs(w, d, &(theta + k3 * h));
    theta + (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * (h / re(6.0))
}

/// Integrate the covariance from `theta0` to `t_end` with fixed-step RK4,
/// co-propagating the moments in closed form.
pub fn propagate_covariance(
    p: &SystemParams,
    x0: &MomentState,
    theta0: &CovarianceState,
    settings: &IntegratorSettings,
) -> std::result::Result<Trajectory, TrajectoryError> {
    propagate_with_diffusion(p, &build_diffusion_matrix(p), x0, theta0, settings)
}

pub(crate) fn propagate_with_diffusion(
    p: &SystemParams,
    diffusion: &DiffusionMatrix,
    x0: &MomentState,
    theta0: &CovarianceState,
    settings: &IntegratorSettings,
) -> std::result::Result<Trajectory, TrajectoryError> {
    let fail = |sample_index, source| TrajectoryError {
        sample_index,
        source,
    };
    let dt = settings.dt;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(fail(
            0,
            Error::OutOfRange {
                name: "dt",
                value: dt,
                constraint: "> 0",
            },
        ));
    }
    let w = build_dynamical_matrix(p).w;
    let d = diffusion.complex();
    let spectrum = eigenspectrum(p);
    // Re eig W = Im λ± for the a-sector (the a†-sector is its conjugate).
    let max_rate = spectrum
        .lambda_plus
        .im
        .abs()
        .max(spectrum.lambda_minus.im.abs());
    let ratio = dt * max_rate;
    if ratio > STEP_STABILITY_LIMIT {
        return Err(fail(
            0,
            Error::StepTooLarge {
                ratio,
                limit: STEP_STABILITY_LIMIT,
            },
        ));
    }

    let steps = (settings.t_end / dt + 1e-9).floor().max(0.0) as usize;
    let stride = settings.stride.max(1);
    let m = reduced_matrix(p);
    let mut theta = hermitize(&theta0.theta);
    let mut samples = Vec::with_capacity(steps / stride + 2);

    for step in 0..=steps {
        if step % stride == 0 || step == steps {
            let t = theta0.t + step as f64 * dt;
            let (u, _) = moment_propagator(&m, t - theta0.t);
            let a = u * Vector2::new(x0.x[0], x0.x[2]);
            let moments = MomentState {
                t,
                x: [a[0], a[0].conj(), a[1], a[1].conj()],
            };
            let index = samples.len();
            let sigma =
                ladder_to_quadrature(&CovarianceState { t, theta }).map_err(|e| fail(index, e))?;
            let min_eig = match physicality_check(&sigma) {
                Physicality::Pass { min_eigenvalue } => min_eigenvalue,
                Physicality::Violation { min_eigenvalue } => min_eigenvalue,
            };
            if min_eig < -PHYSICALITY_TOL && settings.physicality == PhysicalityPolicy::Enforce {
                return Err(fail(
                    index,
                    Error::PhysicalityLost {
                        t,
                        violation: min_eig,
                    },
                ));
            }
            if !theta.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(fail(index, Error::NonFiniteResult));
            }
            samples.push(Sample {
                moments,
                covariance: CovarianceState { t, theta },
                min_uncertainty_eig: min_eig,
            });
        }
        if step < steps {
            theta = hermitize(&rk4_step(&w, &d, &theta, dt));
        }
    }

    Ok(Trajectory {
        params: *p,
        settings: *settings,
        condition_limit: EP_CONDITION_LIMIT,
        samples,
    })
}

/// Amplitude floor below which a phase is meaningless.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SyncDiagnostics {
    /// Unwrapped arg⟨a₁⟩ − arg⟨a₂⟩.
    pub relative_phase: Vec<f64>,
    /// |⟨a₁⟩| / |⟨a₂⟩|
    pub amplitude_ratio: Vec<f64>,
    /// Least-squares slope of ln|⟨a₁⟩| over the second half of the run.
    pub decay_rate_fit: f64,
}

/// Continue `raw` onto the branch nearest `previous`.
pub fn unwrap_phase(previous: f64, raw: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    raw + two_pi * ((previous - raw) / two_pi).round()
}

pub fn sync_diagnostics(moments: &[MomentState]) -> Result<SyncDiagnostics> {
    let mut relative_phase = Vec::with_capacity(moments.len());
    let mut amplitude_ratio = Vec::with_capacity(moments.len());
    for s in moments {
        let (a1, a2) = (s.a1(), s.a2());
        for amp in [a1.norm(), a2.norm()] {
            if amp < AMPLITUDE_FLOOR {
                return Err(Error::AmplitudeUnderflow {
                    amplitude: amp,
                    floor: AMPLITUDE_FLOOR,
                });
            }
        }
        let raw = a1.arg() - a2.arg();
        let phase = match relative_phase.last() {
            Some(&prev) => unwrap_phase(prev, raw),
            None => raw,
        };
        relative_phase.push(phase);
        amplitude_ratio.push(a1.norm() / a2.norm());
    }

    let tail = &moments[moments.len() / 2..];
    let decay_rate_fit = if tail.len() < 2 {
        0.0
    } else {
        let n = tail.len() as f64;
        let (st, sy) = tail.iter().fold((0.0, 0.0), |(st, sy), s| {
            (st + s.t, sy + s.a1().norm().ln())
        });
        let (mt, my) = (st / n, sy / n);
        let (sxy, sxx) = tail.iter().fold((0.0, 0.0), |(sxy, sxx), s| {
            let dt = s.t - mt;
            (sxy + dt * (s.a1().norm().ln() - my), sxx + dt * dt)
        });
        sxy / sxx
    };
    Ok(SyncDiagnostics {
        relative_phase,
        amplitude_ratio,
        decay_rate_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, max_abs_diff};
    use crate::steady::solve_lyapunov;
    use nalgebra::Schur;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn weak_coupling(xi: f64) -> SystemParams {
        SystemParams {
            omega1: 1.0,
            omega2: 1.0,
            g: 0.1,
            gamma: 0.1,
            xi,
            nbar1: 0.0,
            nbar2: 0.0,
        }
    }

    fn solver_eigs(m: &CMat2) -> [C64; 2] {
        let e = Schur::new(*m).eigenvalues().unwrap();
        [e[0], e[1]]
    }

    #[test]
    fn decoupled_spectrum() {
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.3,
            g: 0.0,
            gamma: 0.2,
            xi: 0.0,
            nbar1: 0.0,
            nbar2: 0.0,
        };
        let s = eigenspectrum(&p);
        assert!((s.lambda_plus - c(1.3, -0.1)).norm() < 1e-15);
        assert!((s.lambda_minus - c(1.0, -0.1)).norm() < 1e-15);
        assert_eq!(s.regime, Regime::Normal);
    }

    #[test]
    fn synchronized_spectrum() {
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.2,
            g: 0.0,
            gamma: 0.5,
            xi: 0.8,
            nbar1: 0.0,
            nbar2: 0.0,
        };
        let s = eigenspectrum(&p);
        let split = 0.5 * 0.12f64.sqrt();
        assert!((s.lambda_plus - c(1.1, -0.25 + split)).norm() < 1e-12);
        assert!((s.lambda_minus - c(1.1, -0.25 - split)).norm() < 1e-12);
        assert!((s.lambda_plus.im + 0.0768).abs() < 1e-4);
        assert_eq!(s.regime, Regime::Synchronized);
        // oracle: general-purpose eigensolver
        let e = solver_eigs(&reduced_matrix(&p));
        let mut ims = [e[0].im, e[1].im];
        ims.sort_by(f64::total_cmp);
        assert!((ims[1] - s.lambda_plus.im).abs() < 1e-10);
        assert!((ims[0] - s.lambda_minus.im).abs() < 1e-10);
    }

    #[test]
    fn undamped_mode_at_full_correlation() {
        let s = eigenspectrum(&weak_coupling(1.0));
        assert!((s.lambda_plus - c(1.1, -0.1)).norm() < 1e-14);
        assert!((s.lambda_minus - c(0.9, 0.0)).norm() < 1e-14);
        let s = eigenspectrum(&weak_coupling(-1.0));
        let ims = [s.lambda_plus.im, s.lambda_minus.im];
        assert_eq!(ims.iter().filter(|v| v.abs() < 1e-12).count(), 1);
        assert_eq!(ims.iter().filter(|v| (**v + 0.1).abs() < 1e-12).count(), 1);
    }

    #[test]
    fn exceptional_point_regime() {
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.2,
            g: 0.0,
            gamma: 0.5,
            xi: 0.4,
            nbar1: 0.0,
            nbar2: 0.0,
        };
        let s = eigenspectrum(&p);
        assert!(s.gap_real < 1e-6 && s.gap_imag < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn closed_form_matches_eigensolver(
            w1 in 0.5f64..2.0, w2 in 0.5f64..2.0, g in 0.0f64..0.5,
            gamma in 0.0f64..1.0, xi in -1.0f64..=1.0, n1 in 0.0f64..3.0, n2 in 0.0f64..3.0,
        ) {
            let p = SystemParams { omega1: w1, omega2: w2, g, gamma, xi, nbar1: n1, nbar2: n2 };
            let s = eigenspectrum(&p);
            let e = solver_eigs(&reduced_matrix(&p));
            let direct = (s.lambda_plus - e[0]).norm().max((s.lambda_minus - e[1]).norm());
            let swapped = (s.lambda_plus - e[1]).norm().max((s.lambda_minus - e[0]).norm());
            prop_assert!(direct.min(swapped) < 1e-10);
        }

        #[test]
        fn propagator_composes(
            g in 0.0f64..0.5, gamma in 0.0f64..1.0, xi in -1.0f64..=1.0,
            t1 in 0.0f64..20.0, t2 in 0.0f64..20.0,
        ) {
            let p = SystemParams { omega1: 1.0, omega2: 1.15, g, gamma, xi, nbar1: 0.3, nbar2: 1.0 };
            let x0 = MomentState::displaced(0.0, c(1.0, 0.2), c(-0.4, 0.5));
            let once = propagate_moments(&p, &x0, t1 + t2).unwrap();
            let twice = propagate_moments(&p, &propagate_moments(&p, &x0, t1).unwrap(), t2).unwrap();
            for k in 0..4 {
                prop_assert!((once.x[k] - twice.x[k]).norm() < 1e-10);
            }
            prop_assert!(once.pairing_defect() == 0.0);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let x0 = MomentState::displaced(0.0, c(0.3, -0.7), c(1.0, 0.0));
        let x = propagate_moments(&weak_coupling(0.5), &x0, 0.0).unwrap();
        for k in 0..4 {
            assert!((x.x[k] - x0.x[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn single_damped_mode() {
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.4,
            g: 0.0,
            gamma: 0.3,
            xi: 0.0,
            nbar1: 0.0,
            nbar2: 0.0,
        };
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.0, 0.0));
        for tau in [0.5, 3.0, 17.0] {
            let x = propagate_moments(&p, &x0, tau).unwrap();
            let expected = (c(-0.15, -1.0) * tau).exp();
            assert!((x.a1() - expected).norm() < 1e-14);
            assert_eq!(x.a2().norm(), 0.0);
        }
    }

    #[test]
    fn exceptional_point_uses_matrix_exponential() {
        // (ξγ₁₂)² = δ² exactly
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.5,
            g: 0.0,
            gamma: 1.0,
            xi: 0.5,
            nbar1: 0.0,
            nbar2: 0.0,
        };
        let m = reduced_matrix(&p);
        let (u, route) = moment_propagator(&m, 2.0);
        assert_eq!(route, PropagatorRoute::MatrixExponential);
        // Jordan form: exp(At) = e^{λt}(I + (A − λI)t) for a defective 2×2.
        let a = m.map(|z| -I * z);
        let lam = a.trace() * 0.5;
        let n = a - CMat2::identity() * lam;
        let expected = (CMat2::identity() + n * re(2.0)) * (lam * 2.0).exp();
        assert!((u - expected).norm() < 1e-12);
    }

    #[test]
    fn anti_correlated_bath_locks_in_phase() {
        let p = weak_coupling(-1.0);
        let period = 2.0 * PI;
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.5, 0.0));
        let times: Vec<f64> = (0..=2000)
            .map(|k| k as f64 * 100.0 * period / 2000.0)
            .collect();
        let states: Vec<_> = times
            .iter()
            .map(|&t| propagate_moments(&p, &x0, t).unwrap())
            .collect();
        let diag = sync_diagnostics(&states).unwrap();
        let last = *diag.relative_phase.last().unwrap();
        let wrapped = last.rem_euclid(2.0 * PI);
        assert!(wrapped.min(2.0 * PI - wrapped) < 1e-3, "phase {last}");
        assert!(diag.decay_rate_fit.abs() < 1e-6);
        // locked within 5 periods: transient e^{-γt} with γ = 0.1 at t = 5·2π is e^{-π}
        let k5 = times.iter().position(|&t| t >= 5.0 * period).unwrap();
        let later = diag.relative_phase[k5..].iter().all(|ph| {
            let w = ph.rem_euclid(2.0 * PI);
            w.min(2.0 * PI - w) < 0.2
        });
        assert!(later);
    }

    #[test]
    fn correlated_bath_locks_anti_phase() {
        let p = weak_coupling(1.0);
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.5, 0.0));
        let states: Vec<_> = (0..=1000)
            .map(|k| propagate_moments(&p, &x0, k as f64 * 0.6).unwrap())
            .collect();
        let diag = sync_diagnostics(&states).unwrap();
        let tail = &diag.relative_phase[900..];
        let spread = tail.iter().cloned().fold(f64::MIN, f64::max)
            - tail.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-3);
        let w = tail[0].rem_euclid(2.0 * PI);
        assert!((w - PI).abs() < 1e-3);
    }

    #[test]
    fn uncorrelated_decay_rate() {
        let p = weak_coupling(0.0);
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.5, 0.0));
        let states: Vec<_> = (0..=10000)
            .map(|k| propagate_moments(&p, &x0, k as f64 * 50.0 * 2.0 * PI / 10000.0).unwrap())
            .collect();
        let diag = sync_diagnostics(&states).unwrap();
        assert!(
            (diag.decay_rate_fit + 0.05).abs() < 0.05 * 0.05,
            "{}",
            diag.decay_rate_fit
        );
    }

    #[test]
    fn underflow_is_reported() {
        let p = weak_coupling(1.0);
        // purely symmetric displacement decays completely when ξ = +1
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(1.0, 0.0));
        let states = vec![propagate_moments(&p, &x0, 400.0).unwrap()];
        assert!(matches!(
            sync_diagnostics(&states),
            Err(Error::AmplitudeUnderflow { .. })
        ));
    }

    fn strong_coupling(xi: f64) -> SystemParams {
        SystemParams {
            omega1: 1.0,
            omega2: 1.0,
            g: 1.0,
            gamma: 0.1,
            xi,
            nbar1: 0.5,
            nbar2: 0.5,
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let p = strong_coupling(0.5);
        let ss = solve_lyapunov(&p).unwrap();
        let theta0 = CovarianceState {
            t: 0.0,
            theta: ss.theta,
        };
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.5, 0.0));
        let settings = IntegratorSettings {
            t_end: 100.0 * 2.0 * PI,
            stride: 200,
            ..IntegratorSettings::default_for(&p, 0.0)
        };
        let traj = propagate_covariance(&p, &x0, &theta0, &settings).unwrap();
        for s in &traj.samples {
            assert!(max_abs_diff(&s.covariance.theta, &ss.theta) < 1e-9);
        }
    }

    #[test]
    fn single_mode_thermalization() {
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.3,
            g: 0.0,
            gamma: 0.2,
            xi: 0.0,
            nbar1: 1.5,
            nbar2: 0.5,
        };
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.0, 0.0));
        let settings = IntegratorSettings {
            t_end: 30.0,
            ..IntegratorSettings::default_for(&p, 0.0)
        };
        let traj = propagate_covariance(&p, &x0, &CovarianceState::vacuum(0.0), &settings).unwrap();
        for s in traj.samples.iter().step_by(97) {
            let t = s.covariance.t;
            let expected = 2.0 + (0.5 - 2.0) * (-0.2 * t).exp();
            assert!((s.covariance.theta11() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn long_time_limit_matches_lyapunov_solution() {
        let p = strong_coupling(0.5);
        let settings = IntegratorSettings {
            t_end: 600.0,
            stride: 1000,
            ..IntegratorSettings::default_for(&p, 0.0)
        };
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.0, 0.0));
        let traj = propagate_covariance(&p, &x0, &CovarianceState::vacuum(0.0), &settings).unwrap();
        let last = traj.samples.last().unwrap();
        let ss = solve_lyapunov(&p).unwrap();
        assert!(max_abs_diff(&last.covariance.theta, &ss.theta) < 1e-8);
    }

    #[test]
    fn rk4_converges_at_fourth_order() {
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.2,
            g: 0.3,
            gamma: 0.5,
            xi: 0.4,
            nbar1: 1.0,
            nbar2: 0.2,
        };
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.0, 0.0));
        let run = |dt: f64| {
            let s = IntegratorSettings {
                dt,
                t_end: 4.0,
                stride: 1,
                physicality: PhysicalityPolicy::Record,
            };
            propagate_covariance(&p, &x0, &CovarianceState::vacuum(0.0), &s)
                .unwrap()
                .samples
                .last()
                .unwrap()
                .covariance
                .theta
        };
        let (a, b, cc) = (run(0.1), run(0.05), run(0.025));
        let order = (frobenius(&(a - b)) / frobenius(&(b - cc))).log2();
        assert!(order >= 3.5, "observed order {order}");
    }

    #[test]
    fn unitary_evolution_preserves_symplectic_spectrum() {
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.3,
            g: 0.25,
            gamma: 0.0,
            xi: 0.0,
            nbar1: 0.0,
            nbar2: 0.0,
        };
        let theta0 = CovarianceState::thermal(0.0, 1.2, 0.1);
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.0, 1.0));
        let settings = IntegratorSettings {
            t_end: 40.0,
            stride: 50,
            ..IntegratorSettings::default_for(&p, 0.0)
        };
        let traj = propagate_covariance(&p, &x0, &theta0, &settings).unwrap();
        for s in &traj.samples {
            let nu = crate::gauss_info::symplectic_eigenvalues(
                &ladder_to_quadrature(&s.covariance).unwrap(),
            )
            .unwrap();
            assert!((nu[0] - 1.7).abs() < 1e-9 && (nu[1] - 0.6).abs() < 1e-9);
            assert!(crate::linalg::hermiticity_defect(&s.covariance.theta) < 1e-12);
            assert!(s.moments.pairing_defect() < 1e-12);
        }
    }

    #[test]
    fn step_guard() {
        let p = strong_coupling(0.0);
        let settings = IntegratorSettings {
            dt: 5.0,
            t_end: 10.0,
            stride: 1,
            physicality: PhysicalityPolicy::Enforce,
        };
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.0, 0.0));
        let err =
            propagate_covariance(&p, &x0, &CovarianceState::vacuum(0.0), &settings).unwrap_err();
        assert!(matches!(err.source, Error::StepTooLarge { .. }));
    }

    #[test]
    fn zero_length_run_returns_initial_condition() {
        let p = strong_coupling(0.2);
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.0, 0.0));
        let settings = IntegratorSettings::default_for(&p, 0.0);
        let traj = propagate_covariance(&p, &x0, &CovarianceState::vacuum(0.0), &settings).unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.samples[0].moments, x0);
    }

    #[test]
    fn diffusion_leaves_the_physical_set_at_zero_temperature() {
        // Under the printed diffusion matrix the damped normal mode of a
        // T = 0, ξ = +1 run relaxes to variance ¼, below the vacuum.
        let p = weak_coupling(1.0);
        let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.5, 0.0));
        let settings = IntegratorSettings::default_for(&p, 20.0 * 2.0 * PI);
        let err =
            propagate_covariance(&p, &x0, &CovarianceState::vacuum(0.0), &settings).unwrap_err();
        assert!(matches!(err.source, Error::PhysicalityLost { .. }));

        let recorded = IntegratorSettings {
            physicality: PhysicalityPolicy::Record,
            ..settings
        };
        let traj = propagate_covariance(&p, &x0, &CovarianceState::vacuum(0.0), &recorded).unwrap();
        let last = traj.samples.last().unwrap();
        let sym = (last.covariance.theta11()
            + last.covariance.theta22()
            + 2.0 * last.covariance.theta12().re)
            / 2.0;
        assert!((sym - 0.25).abs() < 1e-3);
        assert!(last.min_uncertainty_eig < -0.2);
    }
}
