//! Gaussian-state information measures in the quadrature picture.
//!
//! Quadratures follow `a = (x + ip)/√2`, ordered `(x₁, p₁, x₂, p₂)`, so the
//! vacuum is `σ = ½I` and physical states satisfy `σ + (i/2)Ω ≥ 0` with
//! `Ω = diag(J, J)`, `J = [[0, 1], [−1, 0]]`.

use nalgebra::{Cholesky, Matrix2, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::CovarianceState;
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigenvalues, hermiticity_defect, re, CMat4, RMat4};
use crate::optimize::{nelder_mead, NelderMeadOptions};

pub type RMat2 = Matrix2<f64>;

/// Mutual information above which a value is reported as divergent.
pub const DIVERGENCE_NATS: f64 = 50.0;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const PHYSICALITY_CHECK_TOL: f64 = 1e-10;
pub const DISCORD_CLIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCovariance {
    pub sigma: RMat4,
}

impl QuadratureCovariance {
    pub fn new(sigma: RMat4) -> Self {
        Self { sigma }
    }

    pub fn vacuum() -> Self {
        Self::new(RMat4::identity() * 0.5)
    }

    pub fn thermal(nbar1: f64, nbar2: f64) -> Self {
        Self::new(RMat4::from_diagonal(&nalgebra::Vector4::new(
            nbar1 + 0.5,
            nbar1 + 0.5,
            nbar2 + 0.5,
            nbar2 + 0.5,
        )))
    }

    pub fn block_a(&self) -> RMat2 {
        self.sigma.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_b(&self) -> RMat2 {
        self.sigma.fixed_view::<2, 2>(2, 2).into_owned()
    }

    /// Inter-mode block Γ (rows: mode A, columns: mode B).
    pub fn block_c(&self) -> RMat2 {
        self.sigma.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// S σ Sᵀ
    pub fn transformed(&self, s: &RMat4) -> Self {
        Self::new(s * self.sigma * s.transpose())
    }
}

/// Symplectic form Ω for two modes.
pub fn omega() -> RMat4 {
    let mut o = RMat4::zeros();
    o[(0, 1)] = 1.0;
    o[(1, 0)] = -1.0;
    o[(2, 3)] = 1.0;
    o[(3, 2)] = -1.0;
    o
}

/// Column k maps quadrature k to the ladder components: x = T q.
fn ladder_basis() -> CMat4 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut t = CMat4::zeros();
    for m in 0..2 {
        let (a, ad) = (2 * m, 2 * m + 1);
        t[(a, a)] = re(s);
        t[(a, ad)] = c(0.0, s);
        t[(ad, a)] = re(s);
        t[(ad, ad)] = c(0.0, -s);
    }
    t
}

/// σ = Tᵀ Θ conj(T), the inverse of Θ = conj(T) σ Tᵀ.
pub fn ladder_to_quadrature(theta: &CovarianceState) -> Result<QuadratureCovariance> {
    let deviation = hermiticity_defect(&theta.theta);
    if deviation > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let t = ladder_basis();
    let sigma = t.transpose() * theta.theta * t.map(|z| z.conj());
    let sigma = sigma.map(|z| z.re);
    Ok(QuadratureCovariance::new((sigma + sigma.transpose()) * 0.5))
}

pub fn quadrature_to_ladder(sigma: &QuadratureCovariance, t: f64) -> CovarianceState {
    let tm = ladder_basis();
    CovarianceState {
        t,
        theta: tm.map(|z| z.conj()) * sigma.sigma.map(re) * tm.transpose(),
    }
}

/// Williamson spectrum (ν₊, ν₋), descending, from the two-mode invariants.
pub fn symplectic_eigenvalues(sigma: &QuadratureCovariance) -> Result<[f64; 2]> {
    if Cholesky::new(sigma.sigma).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let delta = sigma.block_a().determinant()
        + sigma.block_b().determinant()
        + 2.0 * sigma.block_c().determinant();
    let det = sigma.sigma.determinant();
    let root = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let plus = (0.5 * (delta + root)).sqrt();
    let minus = (0.5 * (delta - root)).max(0.0).sqrt();
    Ok([plus, minus])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Physicality {
    Pass { min_eigenvalue: f64 },
    Violation { min_eigenvalue: f64 },
}

impl Physicality {
    pub fn is_pass(&self) -> bool {
        matches!(self, Physicality::Pass { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match *self {
            Physicality::Pass { min_eigenvalue } | Physicality::Violation { min_eigenvalue } => {
                min_eigenvalue
            }
        }
    }
}

/// Smallest eigenvalue of σ + (i/2)Ω.
pub fn physicality_check(sigma: &QuadratureCovariance) -> Physicality {
    let m: CMat4 = sigma.sigma.map(re) + omega().map(|v| c(0.0, 0.5 * v));
    let min_eigenvalue = hermitian_eigenvalues(&m)[0];
    if min_eigenvalue >= -PHYSICALITY_CHECK_TOL {
        Physicality::Pass { min_eigenvalue }
    } else {
        Physicality::Violation { min_eigenvalue }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modes {
    All,
    A,
    B,
}

fn positive_det2(m: &RMat2) -> Result<f64> {
    if Cholesky::new(*m).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(m.determinant())
}

/// S₂ = ½ ln det σ' + N' ln 2 on the selected modes.
pub fn renyi2_entropy(sigma: &QuadratureCovariance, modes: Modes) -> Result<f64> {
    let ln2 = std::f64::consts::LN_2;
    match modes {
        Modes::All => {
            if Cholesky::new(sigma.sigma).is_none() {
                return Err(Error::NotPositiveDefinite);
            }
            Ok(0.5 * sigma.sigma.determinant().ln() + 2.0 * ln2)
        }
        Modes::A => Ok(0.5 * positive_det2(&sigma.block_a())?.ln() + ln2),
        Modes::B => Ok(0.5 * positive_det2(&sigma.block_b())?.ln() + ln2),
    }
}

/// I₂ = ½ ln(det σ_A det σ_B / det σ).
pub fn mutual_information(sigma: &QuadratureCovariance) -> Result<f64> {
    if Cholesky::new(sigma.sigma).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let da = positive_det2(&sigma.block_a())?;
    let db = positive_det2(&sigma.block_b())?;
    let value = 0.5 * (da * db / sigma.sigma.determinant()).ln();
    if value.is_nan() {
        return Err(Error::NonFiniteResult);
    }
    Ok(value)
}

fn rotation(phi: f64) -> RMat2 {
    let (s, c) = phi.sin_cos();
    RMat2::new(c, -s, s, c)
}

/// Pure single-mode seed ½R(φ) diag(eʳ, e⁻ʳ) R(φ)ᵀ.
pub fn seed_covariance(r: f64, phi: f64) -> RMat2 {
    let rot = rotation(phi);
    rot * RMat2::new(0.5 * r.exp(), 0.0, 0.0, 0.5 * (-r).exp()) * rot.transpose()
}

fn conditional_objective(sigma: &QuadratureCovariance, inv: &RMat2) -> f64 {
    let a = sigma.block_a();
    let g = sigma.block_c();
    let cond = a - g * inv * g.transpose();
    0.5 * (a.determinant() / cond.determinant()).ln()
}

/// ½ ln(det σ_A / det(σ_A − Γ(σ_B + Σ)⁻¹Γᵀ)) for a general-dyne seed on B.
pub fn measurement_objective(sigma: &QuadratureCovariance, r: f64, phi: f64) -> f64 {
    match (sigma.block_b() + seed_covariance(r, phi)).try_inverse() {
        Some(inv) => conditional_objective(sigma, &inv),
        None => f64::NAN,
    }
}

/// Limit r → +∞: homodyne detection of the quadrature along (−sin φ, cos φ).
pub fn homodyne_objective(sigma: &QuadratureCovariance, phi: f64) -> f64 {
    let v = Vector2::new(-phi.sin(), phi.cos());
    let b = sigma.block_b();
    let inv = v * v.transpose() / (v.transpose() * b * v)[(0, 0)];
    conditional_objective(sigma, &inv)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSeed {
    /// Squeezing parameter; ±∞ for homodyne.
    pub r: f64,
    pub phi: f64,
}

impl MeasurementSeed {
    pub fn is_homodyne(&self) -> bool {
        self.r.is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalCorrelations {
    pub j2: f64,
    pub seed: MeasurementSeed,
}

fn seed_objective(sigma: &QuadratureCovariance, seed: &MeasurementSeed) -> f64 {
    if seed.is_homodyne() {
        homodyne_objective(sigma, seed.phi)
    } else {
        measurement_objective(sigma, seed.r, seed.phi)
    }
}

/// Points on or outside the unit circle map to homodyne seeds.
fn seed_from_disk(y: [f64; 2]) -> MeasurementSeed {
    let rho = y[0].hypot(y[1]);
    let phi = (0.5 * y[1].atan2(y[0])).rem_euclid(std::f64::consts::PI);
    if rho >= 1.0 - 1e-15 {
        MeasurementSeed {
            r: f64::INFINITY,
            phi,
        }
    } else {
        MeasurementSeed {
            r: 2.0 * rho.atanh(),
            phi,
        }
    }
}

fn disk_from_seed(seed: &MeasurementSeed) -> [f64; 2] {
    // diag(e⁻ʳ, eʳ) at angle φ equals diag(eʳ, e⁻ʳ) at φ + π/2
    let (r, phi) = if seed.r < 0.0 {
        (-seed.r, seed.phi + std::f64::consts::FRAC_PI_2)
    } else {
        (seed.r, seed.phi)
    };
    let rho = if r.is_infinite() {
        1.0
    } else {
        (0.5 * r).tanh()
    };
    [rho * (2.0 * phi).cos(), rho * (2.0 * phi).sin()]
}

const GRID_R: usize = 32;
const GRID_PHI: usize = 16;
const R_LIMIT: f64 = 6.0;
const MAX_ROUNDS: usize = 20;

/// Golden-section maximization of a π-periodic function around `center`.
fn refine_periodic<F: Fn(f64) -> f64>(f: F, center: f64, half_width: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (center - half_width, center + half_width);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a < 1e-13 {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x.rem_euclid(std::f64::consts::PI), f(x))
}

/// 𝒥₂(A|B): supremum over pure Gaussian measurements on mode B.
pub fn classical_correlations(sigma: &QuadratureCovariance) -> Result<ClassicalCorrelations> {
    if Cholesky::new(sigma.sigma).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let pi = std::f64::consts::PI;
    let dphi = pi / GRID_PHI as f64;

    // coarse grid, including the heterodyne row r = 0
    let mut best = (measurement_objective(sigma, 0.0, 0.0), 0.0, 0.0);
    let rows = (0..GRID_R)
        .map(|k| -R_LIMIT + 2.0 * R_LIMIT * k as f64 / (GRID_R - 1) as f64)
        .chain(std::iter::once(0.0));
    for r in rows {
        for l in 0..GRID_PHI {
            let phi = l as f64 * dphi;
            let v = measurement_objective(sigma, r, phi);
            if !v.is_finite() {
                return Err(Error::NonFiniteResult);
            }
            if v > best.0 {
                best = (v, r, phi);
            }
        }
    }

    let mut hom = (f64::NEG_INFINITY, 0.0);
    for l in 0..GRID_PHI {
        let phi = l as f64 * dphi;
        let v = homodyne_objective(sigma, phi);
        if v > hom.0 {
            hom = (v, phi);
        }
    }
    let (hom_phi, hom_val) = refine_periodic(|phi| homodyne_objective(sigma, phi), hom.1, dphi);

    // Local refinement runs on the unit disk y = tanh(r/2)(cos 2φ, sin 2φ),
    // where homodyne seeds sit on the boundary and the objective stays smooth.
    // Simplex rounds restart from the incumbent until a round no longer
    // improves the objective by more than the relative tolerance.
    let objective = |y: [f64; 2]| {
        let seed = seed_from_disk(y);
        -seed_objective(sigma, &seed)
    };
    let opts = NelderMeadOptions {
        max_iter: 2000,
        initial_step: [0.1, 0.1],
        ..Default::default()
    };
    let (start, start_f) = if hom_val > best.0 {
        (
            MeasurementSeed {
                r: f64::INFINITY,
                phi: hom_phi,
            },
            hom_val,
        )
    } else {
        (
            MeasurementSeed {
                r: best.1,
                phi: best.2,
            },
            best.0,
        )
    };
    let mut y = disk_from_seed(&start);
    let mut f = -start_f;
    let mut converged = false;
    let mut relative_change = f64::INFINITY;
    for k in 0..MAX_ROUNDS {
        let round = nelder_mead(objective, y, &opts);
        relative_change = (f - round.f).max(0.0) / (round.f.abs() + opts.abs_floor);
        if round.f < f {
            y = round.x;
            f = round.f;
        }
        if (k > 0 || round.converged) && relative_change <= opts.rel_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::OptimizationDidNotConverge { relative_change });
    }
    let (j2, seed) = (-f, seed_from_disk(y));
    if !j2.is_finite() {
        return Err(Error::NonFiniteResult);
    }
    Ok(ClassicalCorrelations {
        j2: j2.max(0.0),
        seed,
    })
}

fn clip_discord(d: f64) -> f64 {
    if (-DISCORD_CLIP_TOL..0.0).contains(&d) {
        0.0
    } else {
        d
    }
}

/// 𝒟₂ = I₂ − 𝒥₂.
pub fn gaussian_discord(sigma: &QuadratureCovariance) -> Result<f64> {
    let i2 = mutual_information(sigma)?;
    let j2 = classical_correlations(sigma)?.j2;
    Ok(clip_discord(i2 - j2))
}

/// Lower bound on 𝒟₂ obtained by removing the coherences the measurement
/// can extract: the conditional state of A is itself physical, so
/// det σ̃_A ≥ ¼ and 𝒥₂ ≤ S₂(A). Hence 𝒟₂ ≥ max(0, I₂ − S₂(A)).
pub fn discord_lower_bound(theta: &CovarianceState) -> Result<f64> {
    let sigma = ladder_to_quadrature(theta)?;
    lower_bound_from_quadrature(&sigma)
}

fn lower_bound_from_quadrature(sigma: &QuadratureCovariance) -> Result<f64> {
    let i2 = mutual_information(sigma)?;
    let s_a = renyi2_entropy(sigma, Modes::A)?;
    Ok((i2 - s_a).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoReport {
    pub s2_a: f64,
    pub s2_b: f64,
    pub s2_ab: f64,
    pub i2: f64,
    pub j2: f64,
    pub d2: f64,
    pub d2_lower: f64,
    pub nu: [f64; 2],
    pub seed: MeasurementSeed,
    /// I₂ exceeded the divergence threshold and is reported as +∞.
    pub divergent: bool,
}

pub fn info_report(sigma: &QuadratureCovariance) -> Result<InfoReport> {
    let nu = symplectic_eigenvalues(sigma)?;
    let s2_a = renyi2_entropy(sigma, Modes::A)?;
    let s2_b = renyi2_entropy(sigma, Modes::B)?;
    let s2_ab = renyi2_entropy(sigma, Modes::All)?;
    let i2 = mutual_information(sigma)?;
    let cc = classical_correlations(sigma)?;
    if i2 > DIVERGENCE_NATS {
        return Ok(InfoReport {
            s2_a,
            s2_b,
            s2_ab,
            i2: f64::INFINITY,
            j2: cc.j2,
            d2: f64::INFINITY,
            d2_lower: f64::INFINITY,
            nu,
            seed: cc.seed,
            divergent: true,
        });
    }
    Ok(InfoReport {
        s2_a,
        s2_b,
        s2_ab,
        i2,
        j2: cc.j2,
        d2: clip_discord(i2 - cc.j2),
        d2_lower: (i2 - s2_a).max(0.0),
        nu,
        seed: cc.seed,
        divergent: false,
    })
}

/// Random two-mode symplectic matrix: local rotations and squeezers around
/// a beam splitter and a two-mode squeezer.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, max_squeeze: f64) -> RMat4 {
    let pi = std::f64::consts::PI;
    let mut s = RMat4::identity();
    for _ in 0..2 {
        s = local_symplectic(
            &rotation(rng.random_range(0.0..2.0 * pi)),
            &rotation(rng.random_range(0.0..2.0 * pi)),
        ) * s;
        s = local_symplectic(
            &squeezer(rng.random_range(-max_squeeze..=max_squeeze)),
            &squeezer(rng.random_range(-max_squeeze..=max_squeeze)),
        ) * s;
        s = beam_splitter(rng.random_range(0.0..pi)) * s;
        s = two_mode_squeezer(rng.random_range(-max_squeeze..=max_squeeze)) * s;
    }
    s
}

pub fn squeezer(r: f64) -> RMat2 {
    RMat2::new(r.exp(), 0.0, 0.0, (-r).exp())
}

pub fn local_symplectic(sa: &RMat2, sb: &RMat2) -> RMat4 {
    let mut s = RMat4::zeros();
    s.fixed_view_mut::<2, 2>(0, 0).copy_from(sa);
    s.fixed_view_mut::<2, 2>(2, 2).copy_from(sb);
    s
}

pub fn beam_splitter(theta: f64) -> RMat4 {
    let (sn, cs) = theta.sin_cos();
    let i2 = RMat2::identity();
    let mut s = RMat4::zeros();
    s.fixed_view_mut::<2, 2>(0, 0).copy_from(&(i2 * cs));
    s.fixed_view_mut::<2, 2>(0, 2).copy_from(&(i2 * sn));
    s.fixed_view_mut::<2, 2>(2, 0).copy_from(&(i2 * -sn));
    s.fixed_view_mut::<2, 2>(2, 2).copy_from(&(i2 * cs));
    s
}

pub fn two_mode_squeezer(r: f64) -> RMat4 {
    let z = RMat2::new(1.0, 0.0, 0.0, -1.0);
    let i2 = RMat2::identity();
    let mut s = RMat4::zeros();
    s.fixed_view_mut::<2, 2>(0, 0).copy_from(&(i2 * r.cosh()));
    s.fixed_view_mut::<2, 2>(0, 2).copy_from(&(z * r.sinh()));
    s.fixed_view_mut::<2, 2>(2, 0).copy_from(&(z * r.sinh()));
    s.fixed_view_mut::<2, 2>(2, 2).copy_from(&(i2 * r.cosh()));
    s
}

/// Random physical state: a thermal Williamson form with ν ∈ [½, 3] under a
/// random symplectic transformation.
pub fn random_physical_state<R: Rng + ?Sized>(rng: &mut R) -> QuadratureCovariance {
    let n1 = rng.random_range(0.0..2.5);
    let n2 = rng.random_range(0.0..2.5);
    let s = random_symplectic(rng, 0.6);
    QuadratureCovariance::thermal(n1, n2).transformed(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use crate::steady::solve_lyapunov;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn equal_temperature_state(xi: f64) -> QuadratureCovariance {
        let p = SystemParams {
            omega1: 1.0,
            omega2: 1.0,
            g: 1.0,
            gamma: 0.1,
            xi,
            nbar1: 0.5,
            nbar2: 0.5,
        };
        let ss = solve_lyapunov(&p).unwrap();
        ladder_to_quadrature(&CovarianceState {
            t: 0.0,
            theta: ss.theta,
        })
        .unwrap()
    }

    /// x = (a + a†)/√2, p = (a − a†)/(i√2), written out entry by entry.
    fn oracle_quadrature(theta: &CMat4) -> RMat4 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // rows: quadratures, columns: ladder components (a₁, a₁†, a₂, a₂†)
        let mut q = CMat4::zeros();
        for m in 0..2 {
            q[(2 * m, 2 * m)] = re(s);
            q[(2 * m, 2 * m + 1)] = re(s);
            q[(2 * m + 1, 2 * m)] = c(0.0, -s);
            q[(2 * m + 1, 2 * m + 1)] = c(0.0, s);
        }
        // σ_kl = Σ ½⟨{q_k, q_l}⟩ with q_k = Σ_i Q_ki x_i and Θ_ij = ½⟨{x_i†, x_j}⟩;
        // q_k is Hermitian so q_k = q_k† = Σ_i conj(Q_ki) x_i†.
        (q.map(|z| z.conj()) * theta * q.transpose()).map(|z| z.re)
    }

    #[test]
    fn vacuum_and_thermal_conversion() {
        let s = ladder_to_quadrature(&CovarianceState::vacuum(0.0)).unwrap();
        assert!((s.sigma - RMat4::identity() * 0.5).abs().max() < 1e-15);
        let s = ladder_to_quadrature(&CovarianceState::thermal(0.0, 1.5, 0.25)).unwrap();
        assert!(
            (s.sigma - QuadratureCovariance::thermal(1.5, 0.25).sigma)
                .abs()
                .max()
                < 1e-15
        );
    }

    #[test]
    fn conversion_matches_explicit_quadratures() {
        let sigma = equal_temperature_state(0.5);
        let theta = quadrature_to_ladder(&sigma, 0.0).theta;
        assert!((oracle_quadrature(&theta) - sigma.sigma).abs().max() < 1e-13);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let mut theta = CovarianceState::vacuum(0.0);
        theta.theta[(0, 2)] = re(0.1);
        assert!(matches!(
            ladder_to_quadrature(&theta),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn symplectic_spectrum_examples() {
        assert_eq!(
            symplectic_eigenvalues(&QuadratureCovariance::vacuum()).unwrap(),
            [0.5, 0.5]
        );
        let nu = symplectic_eigenvalues(&QuadratureCovariance::thermal(1.0, 0.0)).unwrap();
        assert!((nu[0] - 1.5).abs() < 1e-15 && (nu[1] - 0.5).abs() < 1e-15);
        assert!(matches!(
            symplectic_eigenvalues(&QuadratureCovariance::new(RMat4::zeros())),
            Err(Error::NotPositiveDefinite)
        ));
    }

    fn oracle_symplectic(sigma: &QuadratureCovariance) -> [f64; 2] {
        let eig = (omega() * sigma.sigma).complex_eigenvalues();
        let mut pos: Vec<f64> = eig.iter().map(|z| z.im).filter(|v| *v > 0.0).collect();
        pos.sort_by(|a, b| b.total_cmp(a));
        [pos[0], pos[1]]
    }

    #[test]
    fn correlated_steady_state_spectrum() {
        let sigma = equal_temperature_state(0.5);
        let nu = symplectic_eigenvalues(&sigma).unwrap();
        let oracle = oracle_symplectic(&sigma);
        assert!((nu[0] - oracle[0]).abs() < 1e-10 && (nu[1] - oracle[1]).abs() < 1e-10);
        assert!(nu[1] >= 0.5 - 1e-10);
    }

    #[test]
    fn physicality_examples() {
        assert!(physicality_check(&QuadratureCovariance::vacuum()).is_pass());
        let v = physicality_check(&QuadratureCovariance::new(RMat4::identity() * 0.25));
        assert!(!v.is_pass());
        assert!((v.min_eigenvalue() + 0.25).abs() < 1e-14);
    }

    #[test]
    fn entropy_examples() {
        let vac = QuadratureCovariance::vacuum();
        assert!(renyi2_entropy(&vac, Modes::All).unwrap().abs() < 1e-15);
        let th = QuadratureCovariance::thermal(0.5, 0.5);
        let oracle = 2.0 * (2.0f64 * 0.5 + 1.0).ln();
        assert!((renyi2_entropy(&th, Modes::All).unwrap() - oracle).abs() < 1e-14);
        assert!((oracle - 1.3863).abs() < 1e-4);

        let tmsv = QuadratureCovariance::vacuum().transformed(&two_mode_squeezer(0.8));
        assert!(renyi2_entropy(&tmsv, Modes::All).unwrap().abs() < 1e-12);
        let (sa, sb) = (
            renyi2_entropy(&tmsv, Modes::A).unwrap(),
            renyi2_entropy(&tmsv, Modes::B).unwrap(),
        );
        assert!((sa - sb).abs() < 1e-12 && sa > 0.5);
    }

    #[test]
    fn product_state_has_no_correlations() {
        let p = SystemParams {
            g: 0.0,
            gamma: 0.2,
            nbar1: 0.4,
            nbar2: 1.3,
            ..Default::default()
        };
        let sigma = ladder_to_quadrature(&CovarianceState {
            t: 0.0,
            theta: solve_lyapunov(&p).unwrap().theta,
        })
        .unwrap();
        assert!(mutual_information(&sigma).unwrap().abs() < 1e-14);
        let cc = classical_correlations(&sigma).unwrap();
        assert!(cc.j2.abs() < 1e-14);
        assert!(gaussian_discord(&sigma).unwrap().abs() < 1e-14);
        assert_eq!(lower_bound_from_quadrature(&sigma).unwrap(), 0.0);
        for (r, phi) in [(0.0, 0.0), (2.0, 1.0), (-3.0, 2.5)] {
            assert!(measurement_objective(&sigma, r, phi).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_state_objective_symmetry() {
        // Swapping the modes of a swap-symmetric state leaves the objective
        // unchanged; rotating both modes by π/2 does too for a passive state.
        let sigma = equal_temperature_state(0.5);
        let rot = local_symplectic(
            &rotation(std::f64::consts::FRAC_PI_2),
            &rotation(std::f64::consts::FRAC_PI_2),
        );
        let rotated = sigma.transformed(&rot);
        for (r, phi) in [(0.3, 0.2), (1.5, 1.9), (-2.0, 0.7)] {
            let a = measurement_objective(&sigma, r, phi);
            let b = measurement_objective(&rotated, r, phi + std::f64::consts::FRAC_PI_2);
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn grid_oracle(sigma: &QuadratureCovariance) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for k in 0..400 {
            let r = 6.0 * (k as f64 - 200.0) / 200.0;
            for l in 0..180 {
                let phi = (l as f64).to_radians();
                best = best.max(measurement_objective(sigma, r, phi));
            }
        }
        best
    }

    #[test]
    fn correlated_steady_state_discord() {
        let sigma = equal_temperature_state(0.5);
        let i2 = mutual_information(&sigma).unwrap();
        let cc = classical_correlations(&sigma).unwrap();
        let d2 = gaussian_discord(&sigma).unwrap();
        assert!(d2 > 0.0 && d2 <= i2);
        assert!((i2 - d2 - cc.j2).abs() < 1e-12);
        assert!((cc.j2 - grid_oracle(&sigma)).abs() < 1e-6);
        assert!(lower_bound_from_quadrature(&sigma).unwrap() <= d2 + 1e-9);
    }

    #[test]
    fn homodyne_optimum_is_found() {
        // A two-mode squeezed thermal state mixed on a beam splitter and
        // locally squeezed: not passive, the optimum need not be heterodyne.
        let s = local_symplectic(&squeezer(0.9), &squeezer(-0.4)) * two_mode_squeezer(0.7);
        let sigma = QuadratureCovariance::thermal(0.3, 0.1).transformed(&s);
        let cc = classical_correlations(&sigma).unwrap();
        assert!(cc.j2 >= grid_oracle(&sigma) - 1e-9);
        let mut hom = f64::NEG_INFINITY;
        for l in 0..1800 {
            hom = hom.max(homodyne_objective(&sigma, (l as f64 / 10.0).to_radians()));
        }
        assert!(cc.j2 >= hom - 1e-9);
    }

    #[test]
    fn lower_bound_and_report_on_random_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let sigma = random_physical_state(&mut rng);
            assert!(physicality_check(&sigma).is_pass());
            let rep = info_report(&sigma).unwrap();
            assert!(rep.i2 >= -1e-12);
            assert!(rep.j2 >= 0.0 && rep.d2 >= 0.0 && rep.d2 <= rep.i2 + 1e-12);
            assert!(rep.d2_lower <= rep.d2 + 1e-9);
            assert!(rep.j2 <= rep.s2_a + 1e-9);
            assert!(rep.nu[1] >= 0.5 - 1e-10);
        }
    }

    fn arb_state() -> impl Strategy<Value = QuadratureCovariance> {
        any::<u64>().prop_map(|seed| random_physical_state(&mut ChaCha8Rng::seed_from_u64(seed)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn ladder_round_trip(sigma in arb_state()) {
            let theta = quadrature_to_ladder(&sigma, 0.0);
            let back = ladder_to_quadrature(&theta).unwrap();
            let scale = sigma.sigma.abs().max().max(1.0);
            prop_assert!((back.sigma - sigma.sigma).abs().max() < 1e-13 * scale);
            let again = quadrature_to_ladder(&back, 0.0);
            prop_assert!(crate::linalg::max_abs_diff(&again.theta, &theta.theta) < 1e-13 * scale);
            prop_assert!((oracle_quadrature(&theta.theta) - sigma.sigma).abs().max() < 1e-13 * scale);
        }

        #[test]
        fn williamson_invariance(sigma in arb_state(), seed in any::<u64>()) {
            let s = random_symplectic(&mut ChaCha8Rng::seed_from_u64(seed), 0.5);
            prop_assert!((s * omega() * s.transpose() - omega()).abs().max() < 1e-12);
            let moved = sigma.transformed(&s);
            let (a, b) = (symplectic_eigenvalues(&sigma).unwrap(), symplectic_eigenvalues(&moved).unwrap());
            prop_assert!((a[0] - b[0]).abs() < 1e-10 * a[0].max(1.0));
            prop_assert!((a[1] - b[1]).abs() < 1e-10 * a[0].max(1.0));
            let (da, db) = (sigma.sigma.determinant(), moved.sigma.determinant());
            prop_assert!((da - db).abs() < 1e-10 * da.max(1.0));
            let oracle = oracle_symplectic(&sigma);
            prop_assert!((a[0] - oracle[0]).abs() < 1e-9 && (a[1] - oracle[1]).abs() < 1e-9);
        }

        #[test]
        fn local_symplectic_invariance(sigma in arb_state(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pi = std::f64::consts::PI;
            let sa = rotation(rng.random_range(0.0..pi)) * squeezer(rng.random_range(-0.5..0.5));
            let sb = rotation(rng.random_range(0.0..pi)) * squeezer(rng.random_range(-0.5..0.5));
            let moved = sigma.transformed(&local_symplectic(&sa, &sb));
            let (r0, r1) = (info_report(&sigma).unwrap(), info_report(&moved).unwrap());
            prop_assert!((r0.i2 - r1.i2).abs() < 1e-9);
            prop_assert!((r0.j2 - r1.j2).abs() < 1e-9, "{} vs {}", r0.j2, r1.j2);
            prop_assert!((r0.d2 - r1.d2).abs() < 1e-9);
        }

        #[test]
        fn entropy_is_additive_on_products(n1 in 0.0f64..3.0, n2 in 0.0f64..3.0, r1 in -1.0f64..1.0, r2 in -1.0f64..1.0) {
            let s = local_symplectic(&squeezer(r1), &squeezer(r2));
            let sigma = QuadratureCovariance::thermal(n1, n2).transformed(&s);
            let total = renyi2_entropy(&sigma, Modes::All).unwrap();
            let parts = renyi2_entropy(&sigma, Modes::A).unwrap() + renyi2_entropy(&sigma, Modes::B).unwrap();
            prop_assert!((total - parts).abs() < 1e-12);
            prop_assert!(mutual_information(&sigma).unwrap().abs() < 1e-12);
        }
    }
}
