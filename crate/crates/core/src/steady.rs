//! Stationary covariance: dense Kronecker solve, the ω₁ = ω₂ closed form,
//! singular-ξ locations and the steady-state flux of quanta.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::eigenspectrum;
use crate::error::{Error, Result};
use crate::linalg::{c, frobenius, hermitize, re, CMat4, C64};
use crate::model::{build_diffusion_matrix, build_dynamical_matrix, gamma12, SystemParams};

/// Damping below which the slowest mode counts as undamped.
pub const UNDAMPED_TOL: f64 = 1e-9;
/// Threshold on |γ² − γ₁₂²ξ²| for the closed form.
pub const DELTA_DENOMINATOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyMethod {
    NumericSolve,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub theta: CMat4,
    /// ‖conj(W)Θ̃ + Θ̃Wᵀ + D‖_F
    pub residual: f64,
    pub method: SteadyMethod,
}

impl SteadyState {
    pub fn theta11(&self) -> f64 {
        self.theta[(0, 0)].re
    }

    pub fn theta22(&self) -> f64 {
        self.theta[(2, 2)].re
    }

    /// ⟨a₁†a₂⟩
    pub fn theta12(&self) -> C64 {
        self.theta[(0, 2)]
    }
}

/// Residual of the stationary equation for a candidate Θ̃.
pub fn stationary_residual(w: &CMat4, d: &CMat4, theta: &CMat4) -> f64 {
    frobenius(&crate::dynamics::covariance_rhs(w, d, theta))
}

/// Solve conj(W)Θ + ΘWᵀ = −D by LU on the 16×16 row-major vectorization
/// (conj(W) ⊗ I + I ⊗ W) vec Θ = −vec D.
pub(crate) fn solve_stationary(w: &CMat4, d: &CMat4) -> Option<CMat4> {
    let wc = w.map(|z| z.conj());
    let k = DMatrix::<C64>::from_fn(16, 16, |r, col| {
        let (i, j) = (r / 4, r % 4);
        let (k, l) = (col / 4, col % 4);
        let mut v = re(0.0);
        if j == l {
            v += wc[(i, k)];
        }
        if i == k {
            v += w[(j, l)];
        }
        v
    });
    let rhs = DVector::<C64>::from_fn(16, |r, _| -d[(r / 4, r % 4)]);
    let x = k.lu().solve(&rhs)?;
    Some(CMat4::from_fn(|i, j| x[4 * i + j]))
}

/// Numeric steady state for arbitrary parameters.
pub fn solve_lyapunov(p: &SystemParams) -> Result<SteadyState> {
    solve_with_diffusion(p, &build_diffusion_matrix(p).complex())
}

pub(crate) fn solve_with_diffusion(p: &SystemParams, d: &CMat4) -> Result<SteadyState> {
    // Re eig W = Im λ± on both sectors.
    let s = eigenspectrum(p);
    let rates = [s.lambda_plus.im, s.lambda_minus.im];
    let min_damping = rates.iter().map(|r| r.abs()).fold(f64::INFINITY, f64::min);
    if min_damping < UNDAMPED_TOL {
        return Err(Error::NoUniqueSteadyState {
            min_damping,
            tolerance: UNDAMPED_TOL,
        });
    }
    let max_real = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_real > 0.0 {
        return Err(Error::Unstable { max_real });
    }
    let w = build_dynamical_matrix(p).w;
    let theta = solve_stationary(&w, d).ok_or(Error::SingularSolve {
        residual: f64::INFINITY,
    })?;
    let theta = hermitize(&theta);
    let residual = stationary_residual(&w, d, &theta);
    if !residual.is_finite() || residual > 1e-6 * frobenius(d).max(1.0) {
        return Err(Error::SingularSolve { residual });
    }
    Ok(SteadyState {
        theta,
        residual,
        method: SteadyMethod::NumericSolve,
    })
}

/// Shared factor of the closed form:
/// (γ₁₂(n̄₁+n̄₂+1) + 2γ√(n̄₁n̄₂)) / (2(γ² − γ₁₂²ξ²)).
pub fn closed_form_delta(p: &SystemParams) -> Result<f64> {
    let g12 = gamma12(p);
    let denominator = p.gamma * p.gamma - g12 * g12 * p.xi * p.xi;
    if denominator.abs() < DELTA_DENOMINATOR_TOL {
        return Err(Error::DeltaSingular {
            denominator: denominator.abs(),
        });
    }
    Ok(
        (g12 * (p.nbar1 + p.nbar2 + 1.0) + 2.0 * p.gamma * (p.nbar1 * p.nbar2).sqrt())
            / (2.0 * denominator),
    )
}

/// Closed-form steady state for ω₁ = ω₂.
pub fn closed_form_steady(p: &SystemParams) -> Result<SteadyState> {
    let detuning = p.detuning();
    if detuning != 0.0 {
        return Err(Error::DetuningNotZero { detuning });
    }
    let delta = closed_form_delta(p)?;
    let g12 = gamma12(p);
    let (g, gamma, xi) = (p.g, p.gamma, p.xi);
    let bias = p.nbar2 - p.nbar1;
    let denom = 4.0 * g * g + gamma * gamma;
    let transfer = if denom == 0.0 {
        0.0
    } else {
        2.0 * g * g / denom
    };
    let flow = if denom == 0.0 { 0.0 } else { g * gamma / denom };

    let t11 = p.nbar1 + 0.5 + transfer * bias + xi * xi * g12 * delta;
    let t22 = p.nbar2 + 0.5 - transfer * bias + xi * xi * g12 * delta;
    let t12 = c(gamma * xi * delta, flow * bias);

    let mut theta = CMat4::zeros();
    theta[(0, 0)] = re(t11);
    theta[(1, 1)] = re(t11);
    theta[(2, 2)] = re(t22);
    theta[(3, 3)] = re(t22);
    theta[(0, 2)] = t12;
    theta[(2, 0)] = t12.conj();
    theta[(1, 3)] = t12.conj();
    theta[(3, 1)] = t12;

    let w = build_dynamical_matrix(p).w;
    let d = build_diffusion_matrix(p).complex();
    Ok(SteadyState {
        theta,
        residual: stationary_residual(&w, &d, &theta),
        method: SteadyMethod::ClosedForm,
    })
}

/// Candidate singular correlation strengths (positive branch; ±ξ are both singular).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularXi {
    /// √(1/(n̄₁+n̄₂+1)), the occupation-based estimate.
    pub xi_occupation: f64,
    /// γ/γ₁₂, the root of the closed form's denominator.
    pub xi_denominator: f64,
}

pub fn singular_xi(p: &SystemParams) -> SingularXi {
    let g12 = gamma12(p);
    SingularXi {
        xi_occupation: (1.0 / (p.nbar1 + p.nbar2 + 1.0)).sqrt(),
        xi_denominator: if g12 == 0.0 {
            f64::INFINITY
        } else {
            p.gamma / g12
        },
    }
}

/// Smallest ξ ∈ [0, 1] at which `solve_lyapunov` stops returning a steady
/// state, located by a coarse scan followed by bisection on solver success.
/// `None` when the whole interval is solvable.
pub fn divergence_xi(p: &SystemParams, tol: f64) -> Option<f64> {
    let ok = |xi: f64| solve_lyapunov(&p.with_xi(xi)).is_ok();
    if !ok(0.0) {
        return Some(0.0);
    }
    let n = 1000;
    let first_bad = (1..=n).find(|&k| !ok(k as f64 / n as f64))?;
    let (mut lo, mut hi) = (
        (first_bad - 1) as f64 / n as f64,
        first_bad as f64 / n as f64,
    );
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    /// 2gγ(n̄₂−n̄₁)/(4g²+γ²)
    pub j: f64,
    /// γ(n₁ − n̄₁) = 2g Im Θ̃₁₂, the net inflow into mode 1 implied by the state.
    pub j_state: f64,
    /// |γ(n̄₁ − (Θ̃₁₁−½)) − ig(Θ̃₁₂ − Θ̃₂₁)|
    pub continuity_residual: f64,
    /// Population balance of mode 1 including the correlated-damping term
    /// −ξγ₁₂ Re Θ̃₁₂.
    pub balance_residual: f64,
    /// sign(n̄₂ − n̄₁)
    pub direction: i8,
}

pub fn flux(p: &SystemParams, ss: &SteadyState) -> FluxReport {
    let bias = p.nbar2 - p.nbar1;
    let denom = 4.0 * p.g * p.g + p.gamma * p.gamma;
    let j = if denom == 0.0 {
        0.0
    } else {
        2.0 * p.g * p.gamma * bias / denom
    };
    let t12 = ss.theta12();
    let t21 = ss.theta[(2, 0)];
    let n1 = ss.theta11() - 0.5;
    let inflow = c(0.0, p.g) * (t12 - t21);
    let bath = re(p.gamma * (p.nbar1 - n1));
    let continuity_residual = (bath - inflow).norm();
    let balance = bath - inflow - re(p.xi * gamma12(p) * t12.re);
    FluxReport {
        j,
        j_state: 2.0 * p.g * t12.im,
        continuity_residual,
        balance_residual: balance.norm(),
        direction: if bias > 0.0 {
            1
        } else if bias < 0.0 {
            -1
        } else {
            0
        },
    }
}
