//! Correlated Lindblad channels and an independent assembly of the drift and
//! diffusion matrices from them via the adjoint dissipator.
//!
//! Each dissipative channel is linear in the ladder operators,
//! `L = Σ_m ℓ_m x_m`. For such channels the adjoint dissipator obeys
//! `D†(AB) = D†(A)B + A D†(B) + [L†, A][B, L]`, which gives the moment drift
//! and the constant (diffusion) term of the symmetrized covariance directly
//! from the commutators `[x_j, L]`.

use nalgebra::Vector4;

use super::{embed_sectors, SystemParams};
use crate::linalg::{re, CMat2, CMat4, RMat4, C64, I};

/// Amplitudes of the correlated channels
/// `L± = √((1±ξ)/2) (L₁ ± L₂)`, built for both thermal processes
/// (lowering with rate γ(n̄ᵢ+1), raising with rate γn̄ᵢ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladCoefficients {
    /// √(γ(n̄ᵢ+1)) per mode.
    pub lowering: [f64; 2],
    /// √(γ n̄ᵢ) per mode.
    pub raising: [f64; 2],
    /// √((1+ξ)/2)
    pub symmetric_weight: f64,
    /// √((1−ξ)/2)
    pub antisymmetric_weight: f64,
    hamiltonian: [[f64; 2]; 2],
}

/// Drift and diffusion reconstructed from the channel amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledGenerator {
    pub drift: CMat4,
    /// Constant term of `d/dt ½⟨{δx_i†, δx_j}⟩`.
    pub diffusion: RMat4,
}

impl LindbladCoefficients {
    pub fn new(p: &SystemParams) -> Self {
        Self {
            lowering: [
                (p.gamma * (p.nbar1 + 1.0)).sqrt(),
                (p.gamma * (p.nbar2 + 1.0)).sqrt(),
            ],
            raising: [(p.gamma * p.nbar1).sqrt(), (p.gamma * p.nbar2).sqrt()],
            symmetric_weight: ((1.0 + p.xi) / 2.0).max(0.0).sqrt(),
            antisymmetric_weight: ((1.0 - p.xi) / 2.0).max(0.0).sqrt(),
            hamiltonian: [[p.omega1, p.g], [p.g, p.omega2]],
        }
    }

    /// Ladder-basis coefficient vectors ℓ of the four dissipative channels
    /// (L↓₊, L↓₋, L↑₊, L↑₋).
    pub fn channels(&self) -> [Vector4<C64>; 4] {
        let [l1, l2] = self.lowering;
        let [r1, r2] = self.raising;
        let (ws, wa) = (self.symmetric_weight, self.antisymmetric_weight);
        [
            Vector4::new(re(ws * l1), re(0.0), re(ws * l2), re(0.0)),
            Vector4::new(re(wa * l1), re(0.0), re(-wa * l2), re(0.0)),
            Vector4::new(re(0.0), re(ws * r1), re(0.0), re(ws * r2)),
            Vector4::new(re(0.0), re(wa * r1), re(0.0), re(-wa * r2)),
        ]
    }

    pub fn assemble(&self) -> AssembledGenerator {
        let h = self.hamiltonian;
        let coherent =
            CMat2::new(re(h[0][0]), re(h[0][1]), re(h[1][0]), re(h[1][1])).map(|z| -I * z);
        let mut drift = embed_sectors(&coherent);
        let mut diffusion = CMat4::zeros();

        // [x_j, x_m] for the ladder ordering (a₁, a₁†, a₂, a₂†).
        let mut comm = CMat4::zeros();
        comm[(0, 1)] = re(1.0);
        comm[(1, 0)] = re(-1.0);
        comm[(2, 3)] = re(1.0);
        comm[(3, 2)] = re(-1.0);
        let partner = |m: usize| m ^ 1;

        for ell in self.channels() {
            // c_j = [x_j, L]
            let cj = comm * ell;
            for j in 0..4 {
                for m in 0..4 {
                    drift[(j, m)] +=
                        0.5 * cj[j] * ell[partner(m)].conj() + 0.5 * cj[partner(j)].conj() * ell[m];
                    diffusion[(j, m)] +=
                        0.5 * (cj[j].conj() * cj[m] + cj[partner(m)].conj() * cj[partner(j)]);
                }
            }
        }
        AssembledGenerator {
            drift,
            diffusion: diffusion.map(|z| z.re),
        }
    }
}
