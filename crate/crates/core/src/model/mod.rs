//! Physical parameters and the matrices that drive the Gaussian dynamics.
//!
//! The moment vector is ordered `(a₁, a₁†, a₂, a₂†)`. Indices 0 and 2 form the
//! annihilation sector, 1 and 3 the creation sector.

mod lindblad;

pub use lindblad::{AssembledGenerator, LindbladCoefficients};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, re, CMat2, CMat4, RMat4, C64, I};

/// Tolerance used to flag the Δ singularity |ξ·γ₁₂| ≈ γ.
pub const DELTA_SINGULARITY_TOL: f64 = 1e-9;

/// Physical inputs of the two-oscillator model. Frequencies, coupling and
/// rates share one unit; `omega1 = 1` conventionally fixes the time scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    pub g: f64,
    pub gamma: f64,
    pub xi: f64,
    pub nbar1: f64,
    pub nbar2: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega1: 1.0,
            omega2: 1.0,
            g: 0.0,
            gamma: 0.1,
            xi: 0.0,
            nbar1: 0.0,
            nbar2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamWarning {
    /// |ξ·γ₁₂| is within tolerance of γ, where the closed-form Δ blows up.
    DeltaSingularity,
}

/// Parameters that passed [`validate_params`], with any warnings attached.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams {
    pub params: SystemParams,
    pub warnings: Vec<ParamWarning>,
    /// |ξ|·γ₁₂ ≥ |δ|: the decoupled (g = 0) synchronization condition holds.
    /// Informational only.
    pub synchronized_regime: bool,
}

impl SystemParams {
    /// Detuning δ = ω₁ − ω₂.
    pub fn detuning(&self) -> f64 {
        self.omega1 - self.omega2
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    /// Swap the roles of the two oscillators.
    pub fn swapped(self) -> Self {
        Self {
            omega1: self.omega2,
            omega2: self.omega1,
            nbar1: self.nbar2,
            nbar2: self.nbar1,
            ..self
        }
    }

    pub fn validate(&self) -> Result<ValidatedParams> {
        validate_params(*self)
    }
}

pub fn validate_params(p: SystemParams) -> Result<ValidatedParams> {
    let fields = [
        ("omega1", p.omega1),
        ("omega2", p.omega2),
        ("g", p.g),
        ("gamma", p.gamma),
        ("xi", p.xi),
        ("nbar1", p.nbar1),
        ("nbar2", p.nbar2),
    ];
    for (name, value) in fields {
        if !value.is_finite() {
            return Err(Error::NonFinite { name });
        }
    }
    if !(-1.0..=1.0).contains(&p.xi) {
        return Err(Error::OutOfRange {
            name: "xi",
            value: p.xi,
            constraint: "-1 <= xi <= 1",
        });
    }
    for (name, value) in [("gamma", p.gamma), ("nbar1", p.nbar1), ("nbar2", p.nbar2)] {
        if value < 0.0 {
            return Err(Error::OutOfRange {
                name,
                value,
                constraint: ">= 0",
            });
        }
    }

    let g12 = gamma12(&p);
    let mut warnings = Vec::new();
    if ((p.xi * g12).abs() - p.gamma).abs() < DELTA_SINGULARITY_TOL {
        warnings.push(ParamWarning::DeltaSingularity);
    }
    Ok(ValidatedParams {
        params: p,
        warnings,
        synchronized_regime: p.xi.abs() * g12 >= p.detuning().abs(),
    })
}

/// Temperature-dependent cross-relaxation rate
/// γ₁₂ = γ(√((n̄₁+1)(n̄₂+1)) − √(n̄₁n̄₂)).
pub fn gamma12(p: &SystemParams) -> f64 {
    p.gamma * (((p.nbar1 + 1.0) * (p.nbar2 + 1.0)).sqrt() - (p.nbar1 * p.nbar2).sqrt())
}

/// Drift matrix of the moment equations.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    /// Full 4×4 drift, `dx/dt = W x`.
    pub w: CMat4,
    /// Reduced 2×2 matrix with `d(⟨a₁⟩,⟨a₂⟩)/dt = −i M (⟨a₁⟩,⟨a₂⟩)`.
    pub m: CMat2,
}

impl DynamicalMatrix {
    /// The annihilation-sector block of W.
    pub fn a_block(&self) -> CMat2 {
        sector_block(&self.w, 0)
    }

    /// The creation-sector block of W.
    pub fn adag_block(&self) -> CMat2 {
        sector_block(&self.w, 1)
    }
}

fn sector_block(w: &CMat4, offset: usize) -> CMat2 {
    CMat2::new(
        w[(offset, offset)],
        w[(offset, offset + 2)],
        w[(offset + 2, offset)],
        w[(offset + 2, offset + 2)],
    )
}

/// Embed a 2×2 annihilation-sector drift into the 4×4 ladder ordering,
/// filling the creation sector with its complex conjugate.
pub(crate) fn embed_sectors(a: &CMat2) -> CMat4 {
    let mut w = CMat4::zeros();
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        w[(2 * i, 2 * j)] = a[(i, j)];
        w[(2 * i + 1, 2 * j + 1)] = a[(i, j)].conj();
    }
    w
}

pub fn reduced_matrix(p: &SystemParams) -> CMat2 {
    let half_gamma = 0.5 * p.gamma;
    let off = c(p.g, -0.5 * p.xi * gamma12(p));
    CMat2::new(c(p.omega1, -half_gamma), off, off, c(p.omega2, -half_gamma))
}

pub fn build_dynamical_matrix(p: &SystemParams) -> DynamicalMatrix {
    let m = reduced_matrix(p);
    let a = m.map(|z| -I * z);
    DynamicalMatrix {
        w: embed_sectors(&a),
        m,
    }
}

/// Diffusion matrix D (stored with positive sign) so that
/// `dΘ/dt = conj(W)Θ + ΘWᵀ + D` for the covariance as stored in
/// [`crate::dynamics::CovarianceState`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionMatrix {
    pub d: RMat4,
}

impl DiffusionMatrix {
    pub fn complex(&self) -> CMat4 {
        self.d.map(re)
    }
}

pub fn build_diffusion_matrix(p: &SystemParams) -> DiffusionMatrix {
    let d1 = p.gamma * (0.5 + p.nbar1);
    let d2 = p.gamma * (0.5 + p.nbar2);
    let cross = p.xi * p.gamma * (p.nbar1 * p.nbar2).sqrt();
    let mut d = RMat4::from_diagonal(&nalgebra::Vector4::new(d1, d1, d2, d2));
    for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
        d[(i, j)] = cross;
    }
    DiffusionMatrix { d }
}

pub fn build_lindblad_ops(p: &SystemParams) -> LindbladCoefficients {
    LindbladCoefficients::new(p)
}

/// How a synchronization threshold was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    /// g = 0: ξ_crit = |δ|/γ₁₂.
    Analytic,
    /// g ≠ 0: bisection for the ξ minimizing |λ₊ − λ₋|.
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalXi {
    pub xi: f64,
    /// |δ|/γ₁₂, the decoupled-oscillator threshold (may exceed 1).
    pub decoupled_value: f64,
    pub method: ThresholdMethod,
}

const CRITICAL_XI_TOL: f64 = 1e-10;

/// Onset of spontaneous synchronization. `Ok(None)` means the threshold lies
/// outside the physical range ξ ∈ [0, 1].
pub fn critical_xi(p: &SystemParams) -> Result<Option<CriticalXi>> {
    let g12 = gamma12(p);
    if g12 == 0.0 {
        return Err(Error::ZeroDamping);
    }
    let delta = p.detuning().abs();
    let decoupled_value = delta / g12;

    if p.g == 0.0 {
        return Ok((decoupled_value <= 1.0).then_some(CriticalXi {
            xi: decoupled_value,
            decoupled_value,
            method: ThresholdMethod::Analytic,
        }));
    }

    // |disc(ξ)|² has a single stationary point in ξ > 0; its slope divided
    // by ξ changes sign there.
    let slope = |xi: f64| -> f64 {
        let disc = discriminant(p.g, xi, g12, delta);
        let ddisc = 2.0 * c(2.0 * p.g, -xi * g12) * c(0.0, -g12);
        2.0 * (disc.conj() * ddisc).re / xi
    };
    let mut lo = 1e-12;
    let mut hi = 1.0;
    if slope(lo) >= 0.0 || slope(hi) <= 0.0 {
        return Ok(None);
    }
    while hi - lo > CRITICAL_XI_TOL {
        let mid = 0.5 * (lo + hi);
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(CriticalXi {
        xi: 0.5 * (lo + hi),
        decoupled_value,
        method: ThresholdMethod::Bisection,
    }))
}

/// (2g − iξγ₁₂)² + δ²
pub(crate) fn discriminant(g: f64, xi: f64, g12: f64, delta: f64) -> C64 {
    let z = c(2.0 * g, -xi * g12);
    z * z + re(delta * delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn detuned_pair(xi: f64) -> SystemParams {
        SystemParams {
            omega1: 1.0,
            omega2: 1.2,
            g: 0.0,
            gamma: 0.5,
            xi,
            nbar1: 0.0,
            nbar2: 0.0,
        }
    }

    #[test]
    fn detuned_pair_parameters_are_valid_without_warnings() {
        let v = validate_params(detuned_pair(0.5)).unwrap();
        assert!(v.warnings.is_empty());
        assert_eq!(v.params, detuned_pair(0.5));
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        assert!(matches!(
            validate_params(detuned_pair(1.5)),
            Err(Error::OutOfRange { name: "xi", .. })
        ));
        let mut p = detuned_pair(0.0);
        p.gamma = -0.1;
        assert!(matches!(
            validate_params(p),
            Err(Error::OutOfRange { name: "gamma", .. })
        ));
        let mut p = detuned_pair(0.0);
        p.nbar2 = -1.0;
        assert!(matches!(
            validate_params(p),
            Err(Error::OutOfRange { name: "nbar2", .. })
        ));
        let mut p = detuned_pair(0.0);
        p.g = f64::NAN;
        assert!(matches!(
            validate_params(p),
            Err(Error::NonFinite { name: "g" })
        ));
        p.g = 0.0;
        p.omega2 = f64::INFINITY;
        assert!(matches!(validate_params(p), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn delta_singularity_is_flagged() {
        let p = SystemParams {
            gamma: 0.5,
            xi: 1.0,
            ..detuned_pair(1.0)
        };
        let v = validate_params(p).unwrap();
        assert_eq!(v.warnings, vec![ParamWarning::DeltaSingularity]);
    }

    #[test]
    fn gamma12_values() {
        assert_eq!(gamma12(&detuned_pair(0.0)), 0.5);
        let p = SystemParams {
            gamma: 1.0,
            nbar1: 1.0,
            nbar2: 2.0,
            ..Default::default()
        };
        // √6 − √2
        assert!((gamma12(&p) - 1.035_276_180_410_083).abs() < 1e-12);
        let p = SystemParams { gamma: 0.0, ..p };
        assert_eq!(gamma12(&p), 0.0);
    }

    #[test]
    fn decoupled_limit_is_diagonal() {
        let dm = build_dynamical_matrix(&SystemParams {
            g: 0.0,
            xi: 0.0,
            ..detuned_pair(0.0)
        });
        assert_eq!(dm.m[(0, 1)], c(0.0, -0.0));
        assert_eq!(dm.m[(0, 0)], c(1.0, -0.25));
        assert_eq!(dm.m[(1, 1)], c(1.2, -0.25));
        for (i, j) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
            assert_eq!(dm.w[(i, j)].norm(), 0.0);
        }
    }

    #[test]
    fn detuned_pair_off_diagonal_entry() {
        let p = SystemParams {
            g: 0.04,
            ..detuned_pair(0.6)
        };
        let m = build_dynamical_matrix(&p).m;
        assert!((m[(0, 1)] - c(0.04, -0.15)).norm() < 1e-15);
        assert!((m[(1, 0)] - c(0.04, -0.15)).norm() < 1e-15);
    }

    #[test]
    fn dynamical_matrix_structure() {
        let p = SystemParams {
            omega1: 0.9,
            omega2: 1.3,
            g: 0.2,
            gamma: 0.3,
            xi: -0.4,
            nbar1: 0.5,
            nbar2: 1.5,
        };
        let dm = build_dynamical_matrix(&p);
        // no mixing between a and a† sectors
        for (i, j) in [
            (0, 1),
            (1, 0),
            (0, 3),
            (3, 0),
            (1, 2),
            (2, 1),
            (2, 3),
            (3, 2),
        ] {
            assert_eq!(dm.w[(i, j)], C64::new(0.0, 0.0));
        }
        let minus_i_m = dm.m.map(|z| -I * z);
        assert_eq!(dm.a_block(), minus_i_m);
        assert_eq!(dm.adag_block(), dm.a_block().map(|z| z.conj()));
    }

    #[test]
    fn diffusion_examples() {
        let d = build_diffusion_matrix(&SystemParams {
            gamma: 0.3,
            xi: 0.7,
            ..Default::default()
        })
        .d;
        assert_eq!(d, RMat4::identity() * 0.15);

        let d = build_diffusion_matrix(&SystemParams {
            gamma: 1.0,
            xi: 1.0,
            nbar1: 1.0,
            nbar2: 1.0,
            ..Default::default()
        })
        .d;
        for k in 0..4 {
            assert_eq!(d[(k, k)], 1.5);
        }
        assert_eq!(d[(0, 2)], 1.0);
        assert_eq!(d[(3, 1)], 1.0);

        let p = SystemParams {
            gamma: 0.2,
            xi: 0.0,
            nbar1: 2.0,
            nbar2: 0.3,
            ..Default::default()
        };
        let d = build_diffusion_matrix(&p).d;
        assert!((d[(0, 0)] - 0.2 * 2.5).abs() < 1e-15);
        assert_eq!(d[(0, 2)], 0.0);
    }

    #[test]
    fn critical_xi_decoupled() {
        let cx = critical_xi(&detuned_pair(0.0)).unwrap().unwrap();
        assert!((cx.xi - 0.4).abs() < 1e-12);
        assert_eq!(cx.method, ThresholdMethod::Analytic);

        let resonant = SystemParams {
            omega2: 1.0,
            ..detuned_pair(0.0)
        };
        assert_eq!(critical_xi(&resonant).unwrap().unwrap().xi, 0.0);

        let far = SystemParams {
            omega2: 1.6,
            ..detuned_pair(0.0)
        };
        assert_eq!(critical_xi(&far).unwrap(), None);

        let undamped = SystemParams {
            gamma: 0.0,
            ..detuned_pair(0.0)
        };
        assert_eq!(critical_xi(&undamped), Err(Error::ZeroDamping));
    }

    #[test]
    fn critical_xi_is_linear_in_detuning() {
        let base = critical_xi(&detuned_pair(0.0)).unwrap().unwrap().xi;
        for k in [0.25, 0.5, 1.5, 2.0] {
            let p = SystemParams {
                omega2: 1.0 + 0.2 * k,
                ..detuned_pair(0.0)
            };
            let xi = critical_xi(&p).unwrap().unwrap().xi;
            assert!((xi - k * base).abs() < 1e-12);
        }
    }

    #[test]
    fn critical_xi_with_coupling_matches_stationary_point() {
        // |disc|² is quadratic in u = ξ²γ₁₂² with minimum at u = δ² − 4g².
        let p = SystemParams {
            g: 0.04,
            ..detuned_pair(0.0)
        };
        let cx = critical_xi(&p).unwrap().unwrap();
        let expected = (0.04f64 - 4.0 * 0.04 * 0.04).sqrt() / 0.5;
        assert_eq!(cx.method, ThresholdMethod::Bisection);
        assert!((cx.xi - expected).abs() < 1e-9, "{} vs {}", cx.xi, expected);
        // and it really is the minimum of the eigenvalue splitting
        let split = |xi: f64| discriminant(0.04, xi, 0.5, 0.2).norm();
        assert!(split(cx.xi) <= split(cx.xi + 1e-4));
        assert!(split(cx.xi) <= split(cx.xi - 1e-4));

        // strong coupling: no avoided crossing in (0, 1]
        let strong = SystemParams { g: 0.2, ..p };
        assert_eq!(critical_xi(&strong).unwrap(), None);
    }
}
