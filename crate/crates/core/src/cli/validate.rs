//! Self-consistency corpus run by the `validate` subcommand.

use nalgebra::Schur;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::commands::provenance;
use super::config::RunConfig;
use super::table::{Cell, ResultTable};
use super::CliError;
use crate::dynamics::{
    eigenspectrum, propagate_covariance, CovarianceState, IntegratorSettings, MomentState,
    PhysicalityPolicy,
};
use crate::gauss_info::{
    classical_correlations, discord_lower_bound, gaussian_discord, homodyne_objective,
    ladder_to_quadrature, local_symplectic, measurement_objective, mutual_information,
    quadrature_to_ladder, random_physical_state, random_symplectic, renyi2_entropy, squeezer,
    symplectic_eigenvalues, Modes, QuadratureCovariance,
};
use crate::linalg::{c, frobenius, hermitian_eigenvalues, max_abs_diff};
use crate::model::{
    build_diffusion_matrix, build_dynamical_matrix, build_lindblad_ops, reduced_matrix,
    SystemParams,
};
use crate::steady::{closed_form_steady, flux, solve_with_diffusion, SteadyState};

const INFO_CORPUS: usize = 50;
const TRAJECTORY_CORPUS: usize = 16;
const GRID_R: usize = 400;
const GRID_PHI: usize = 180;
const GRID_R_LIMIT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    AtMost,
    AtLeast,
}

/// Gate checks fail the run; findings record known departures of closed-form
/// relations from the numerics and never fail it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Gate,
    Finding,
}

struct Check {
    name: &'static str,
    samples: usize,
    measured: f64,
    bound: f64,
    relation: Relation,
    class: Class,
}

impl Check {
    fn status(&self) -> &'static str {
        let ok = match self.relation {
            Relation::AtMost => self.measured <= self.bound,
            Relation::AtLeast => self.measured >= self.bound,
        };
        match (ok, self.class) {
            (true, _) => "pass",
            (false, Class::Gate) => "FAIL",
            (false, Class::Finding) => "finding",
        }
    }
}

/// Uniform draw over ω ∈ [0.5, 2], g ∈ [0, 0.5], γ ∈ [0, 1], ξ ∈ [−1, 1], n̄ ∈ [0, 3].
pub fn draw_params<R: Rng + ?Sized>(rng: &mut R) -> SystemParams {
    SystemParams {
        omega1: rng.random_range(0.5..=2.0),
        omega2: rng.random_range(0.5..=2.0),
        g: rng.random_range(0.0..=0.5),
        gamma: rng.random_range(0.0..=1.0),
        xi: rng.random_range(-1.0..=1.0),
        nbar1: rng.random_range(0.0..=3.0),
        nbar2: rng.random_range(0.0..=3.0),
    }
}

/// Brute-force 𝒥₂ over a uniform (r, φ) grid plus a homodyne row.
pub fn grid_j2(sigma: &QuadratureCovariance, n_r: usize, n_phi: usize) -> f64 {
    let pi = std::f64::consts::PI;
    let mut best = f64::NEG_INFINITY;
    for k in 0..n_phi {
        let phi = pi * k as f64 / n_phi as f64;
        best = best.max(homodyne_objective(sigma, phi));
        for j in 0..n_r {
            let r = -GRID_R_LIMIT + 2.0 * GRID_R_LIMIT * j as f64 / (n_r - 1) as f64;
            best = best.max(measurement_objective(sigma, r, phi));
        }
    }
    best
}

/// Smaller symplectic eigenvalue; 0 for matrices that are not positive definite.
fn nu_minus(sigma: &QuadratureCovariance) -> f64 {
    symplectic_eigenvalues(sigma).map(|nu| nu[1]).unwrap_or(0.0)
}

fn eigen_error(p: &SystemParams) -> f64 {
    let s = eigenspectrum(p);
    let e = Schur::new(reduced_matrix(p))
        .eigenvalues()
        .expect("2x2 Schur");
    let (a, b) = (e[0], e[1]);
    let direct = (s.lambda_plus - a).norm().max((s.lambda_minus - b).norm());
    let crossed = (s.lambda_plus - b).norm().max((s.lambda_minus - a).norm());
    direct.min(crossed)
}

fn as_state(ss: &SteadyState) -> CovarianceState {
    CovarianceState {
        t: 0.0,
        theta: ss.theta,
    }
}

fn max_of(v: impl IntoIterator<Item = f64>) -> (usize, f64) {
    v.into_iter()
        .fold((0, f64::NEG_INFINITY), |(n, m), x| (n + 1, m.max(x)))
}

fn min_of(v: impl IntoIterator<Item = f64>) -> (usize, f64) {
    v.into_iter()
        .fold((0, f64::INFINITY), |(n, m), x| (n + 1, m.min(x)))
}

fn check(
    name: &'static str,
    (samples, measured): (usize, f64),
    relation: Relation,
    bound: f64,
    class: Class,
) -> Check {
    Check {
        name,
        samples,
        measured,
        bound,
        relation,
        class,
    }
}

fn param_checks(draws: &[SystemParams], flip: bool) -> Vec<Check> {
    use Class::*;
    use Relation::*;
    let mut out = Vec::new();

    let eig: Vec<f64> = draws.par_iter().map(eigen_error).collect();
    out.push(check("eigen_closed_form", max_of(eig), AtMost, 1e-10, Gate));

    let (drift, diffusion): (Vec<f64>, Vec<f64>) = draws
        .par_iter()
        .map(|p| {
            let gen = build_lindblad_ops(p).assemble();
            let drift = max_abs_diff(&gen.drift, &build_dynamical_matrix(p).w);
            let diffusion = (gen.diffusion - build_diffusion_matrix(p).d).abs().max();
            (drift, diffusion)
        })
        .unzip();
    out.push(check(
        "dissipator_drift_roundtrip",
        max_of(drift),
        AtMost,
        1e-12,
        Gate,
    ));
    out.push(check(
        "dissipator_diffusion_roundtrip",
        max_of(diffusion),
        AtMost,
        1e-12,
        Finding,
    ));

    // Stationary states under the (optionally sign-flipped) diffusion.
    let steady: Vec<Option<(SystemParams, SteadyState, f64)>> = draws
        .par_iter()
        .map(|p| {
            let mut d = build_diffusion_matrix(p).complex();
            if flip {
                d = -d;
            }
            let norm = frobenius(&d);
            solve_with_diffusion(p, &d).ok().map(|ss| (*p, ss, norm))
        })
        .collect();
    let steady: Vec<_> = steady.into_iter().flatten().collect();

    out.push(check(
        "lyapunov_residual",
        max_of(
            steady
                .iter()
                .map(|(_, ss, n)| ss.residual / n.max(f64::MIN_POSITIVE)),
        ),
        AtMost,
        1e-10,
        Gate,
    ));
    out.push(check(
        "steady_positivity",
        min_of(
            steady
                .iter()
                .map(|(_, ss, _)| hermitian_eigenvalues(&ss.theta)[0]),
        ),
        AtLeast,
        -1e-10,
        Gate,
    ));
    let nus: Vec<f64> = steady
        .par_iter()
        .map(|(_, ss, _)| {
            ladder_to_quadrature(&as_state(ss))
                .map(|s| nu_minus(&s))
                .unwrap_or(0.0)
        })
        .collect();
    out.push(check(
        "steady_symplectic_eigenvalue",
        min_of(nus),
        AtLeast,
        0.5 - 1e-10,
        Finding,
    ));

    let fluxes: Vec<_> = steady.iter().map(|(p, ss, _)| flux(p, ss)).collect();
    out.push(check(
        "flux_formula_vs_state",
        max_of(fluxes.iter().map(|f| (f.j - f.j_state).abs())),
        AtMost,
        1e-10,
        Finding,
    ));
    out.push(check(
        "continuity_residual",
        max_of(fluxes.iter().map(|f| f.continuity_residual)),
        AtMost,
        1e-10,
        Finding,
    ));
    out.push(check(
        "population_balance",
        max_of(
            steady
                .iter()
                .zip(&fluxes)
                .map(|((_, ss, _), f)| f.balance_residual / ss.theta11().abs().max(1.0)),
        ),
        AtMost,
        1e-10,
        Gate,
    ));

    // Resonant variants for the closed form and flux invariance.
    let resonant: Vec<SystemParams> = draws
        .iter()
        .map(|p| SystemParams {
            omega2: p.omega1,
            ..*p
        })
        .collect();
    let closed = |p: &SystemParams| -> Option<f64> {
        let num = solve_with_diffusion(p, &build_diffusion_matrix(p).complex()).ok()?;
        let cf = closed_form_steady(p).ok()?;
        Some(max_abs_diff(&num.theta, &cf.theta) / num.theta11().abs().max(1.0))
    };
    let uncorrelated: Vec<f64> = resonant
        .par_iter()
        .filter_map(|p| closed(&p.with_xi(0.0)))
        .collect();
    out.push(check(
        "closed_form_vs_numeric_xi0",
        max_of(uncorrelated),
        AtMost,
        1e-9,
        Gate,
    ));
    let correlated: Vec<f64> = resonant.par_iter().filter_map(closed).collect();
    out.push(check(
        "closed_form_vs_numeric",
        max_of(correlated),
        AtMost,
        1e-9,
        Finding,
    ));

    let spread: Vec<f64> = resonant
        .par_iter()
        .filter_map(|p| {
            let js: Option<Vec<f64>> = [-0.9, 0.0, 0.9]
                .iter()
                .map(|&xi| {
                    let q = p.with_xi(xi);
                    let ss =
                        solve_with_diffusion(&q, &build_diffusion_matrix(&q).complex()).ok()?;
                    Some(flux(&q, &ss).j_state)
                })
                .collect();
            let js = js?;
            let hi = js.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = js.iter().cloned().fold(f64::INFINITY, f64::min);
            Some(hi - lo)
        })
        .collect();
    out.push(check(
        "state_flux_xi_invariance",
        max_of(spread),
        AtMost,
        1e-12,
        Finding,
    ));

    out
}

fn trajectory_checks(draws: &[SystemParams]) -> Vec<Check> {
    let subset: Vec<SystemParams> = draws
        .iter()
        .filter(|p| p.gamma >= 0.05)
        .take(TRAJECTORY_CORPUS)
        .copied()
        .collect();
    let results: Vec<(f64, f64)> = subset
        .par_iter()
        .map(|p| {
            let x0 = MomentState::displaced(0.0, c(1.0, 0.0), c(0.5, 0.0));
            let mut settings = IntegratorSettings::default_for(p, 20.0);
            settings.physicality = PhysicalityPolicy::Record;
            let min_nu =
                match propagate_covariance(p, &x0, &CovarianceState::vacuum(0.0), &settings) {
                    Ok(traj) => traj
                        .samples
                        .iter()
                        .map(|s| {
                            ladder_to_quadrature(&s.covariance)
                                .map(|q| nu_minus(&q))
                                .unwrap_or(0.0)
                        })
                        .fold(f64::INFINITY, f64::min),
                    Err(_) => f64::NAN,
                };
            // Starting at the stationary state must stay there.
            let drift = match solve_with_diffusion(p, &build_diffusion_matrix(p).complex()) {
                Ok(ss) => {
                    let mut s = IntegratorSettings::default_for(p, 10.0);
                    s.physicality = PhysicalityPolicy::Record;
                    match propagate_covariance(p, &x0, &as_state(&ss), &s) {
                        Ok(traj) => traj
                            .samples
                            .iter()
                            .map(|x| max_abs_diff(&x.covariance.theta, &ss.theta))
                            .fold(0.0, f64::max),
                        Err(_) => f64::INFINITY,
                    }
                }
                Err(_) => f64::NAN,
            };
            (min_nu, drift)
        })
        .collect();
    vec![
        check(
            "trajectory_symplectic_eigenvalue",
            min_of(results.iter().map(|r| r.0).filter(|v| !v.is_nan())),
            Relation::AtLeast,
            0.5 - 1e-10,
            Class::Finding,
        ),
        check(
            "trajectory_fixed_point",
            max_of(results.iter().map(|r| r.1).filter(|v| !v.is_nan())),
            Relation::AtMost,
            1e-9,
            Class::Gate,
        ),
    ]
}

fn info_checks(rng: &mut ChaCha8Rng) -> Vec<Check> {
    use Class::*;
    use Relation::*;
    let states: Vec<QuadratureCovariance> = (0..INFO_CORPUS)
        .map(|_| random_physical_state(rng))
        .collect();
    let transforms: Vec<_> = (0..INFO_CORPUS)
        .map(|_| random_symplectic(rng, 0.6))
        .collect();
    let products: Vec<QuadratureCovariance> = (0..INFO_CORPUS)
        .map(|_| {
            let n1 = rng.random_range(0.0..2.5);
            let n2 = rng.random_range(0.0..2.5);
            let (r1, r2) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            QuadratureCovariance::thermal(n1, n2)
                .transformed(&local_symplectic(&squeezer(r1), &squeezer(r2)))
        })
        .collect();

    let mut out = Vec::new();
    let vacuum = renyi2_entropy(&QuadratureCovariance::vacuum(), Modes::All).unwrap_or(f64::NAN);
    out.push(check(
        "vacuum_entropy",
        (1, vacuum.abs()),
        AtMost,
        1e-14,
        Gate,
    ));

    let round_trip: Vec<f64> = states
        .iter()
        .map(|s| {
            ladder_to_quadrature(&quadrature_to_ladder(s, 0.0))
                .map(|b| (b.sigma - s.sigma).abs().max())
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    out.push(check(
        "ladder_round_trip",
        max_of(round_trip),
        AtMost,
        1e-13,
        Gate,
    ));

    let williamson: Vec<f64> = states
        .iter()
        .zip(&transforms)
        .map(|(s, t)| {
            match (
                symplectic_eigenvalues(s),
                symplectic_eigenvalues(&s.transformed(t)),
            ) {
                (Ok(a), Ok(b)) => (a[0] - b[0]).abs().max((a[1] - b[1]).abs()),
                _ => f64::INFINITY,
            }
        })
        .collect();
    out.push(check(
        "williamson_invariance",
        max_of(williamson),
        AtMost,
        1e-10,
        Gate,
    ));

    let product: Vec<f64> = products
        .iter()
        .map(|s| {
            let i2 = mutual_information(s).unwrap_or(f64::INFINITY);
            let d2 = gaussian_discord(s).unwrap_or(f64::INFINITY);
            i2.abs().max(d2.abs())
        })
        .collect();
    out.push(check(
        "product_state_zero",
        max_of(product),
        AtMost,
        1e-10,
        Gate,
    ));

    let measures: Vec<(f64, f64, f64, f64)> = states
        .par_iter()
        .map(|s| {
            let i2 = mutual_information(s).unwrap_or(f64::NAN);
            let j2 = classical_correlations(s).map(|c| c.j2).unwrap_or(f64::NAN);
            let grid = grid_j2(s, GRID_R, GRID_PHI);
            let lower = discord_lower_bound(&quadrature_to_ladder(s, 0.0)).unwrap_or(f64::NAN);
            (i2, j2, grid, lower)
        })
        .collect();
    out.push(check(
        "discord_bounds",
        min_of(measures.iter().map(|&(i2, j2, _, _)| {
            let d2 = i2 - j2;
            d2.min(i2 - d2)
        })),
        AtLeast,
        -1e-9,
        Gate,
    ));
    out.push(check(
        "optimizer_vs_grid",
        max_of(measures.iter().map(|&(_, j2, grid, _)| grid - j2)),
        AtMost,
        1e-6,
        Gate,
    ));
    out.push(check(
        "discord_lower_bound",
        max_of(measures.iter().map(|&(i2, j2, _, lower)| lower - (i2 - j2))),
        AtMost,
        1e-9,
        Gate,
    ));
    out
}

/// Run every check on a corpus seeded by `cfg.seed`.
pub fn run_validate(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let n = cfg.validate.corpus_size;
    if n == 0 {
        return Err(CliError::Config(super::ConfigError::Invalid(
            "validate.corpus_size must be >= 1".into(),
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let draws: Vec<SystemParams> = (0..n).map(|_| draw_params(&mut rng)).collect();

    let mut checks = param_checks(&draws, cfg.validate.flip_diffusion_sign);
    checks.extend(trajectory_checks(&draws));
    checks.extend(info_checks(&mut rng));

    let mut table = ResultTable::new([
        "check", "samples", "measured", "relation", "bound", "class", "status",
    ]);
    table.provenance = provenance(cfg, "validate");
    table.provenance.push(format!(
        "corpus: {n} draws with omega in [0.5,2], g in [0,0.5], gamma in [0,1], xi in [-1,1], nbar in [0,3]; {INFO_CORPUS} random Gaussian states"
    ));
    table.provenance.push(format!(
        "note: optimizer_vs_grid uses a {GRID_R}x{GRID_PHI} (r, phi) grid on r in [-{GRID_R_LIMIT},{GRID_R_LIMIT}] plus homodyne"
    ));
    table.provenance.push(
        "note: class=finding rows compare closed-form relations against the numerics; they never fail the run".into(),
    );
    if cfg.validate.flip_diffusion_sign {
        table
            .provenance
            .push("mutation: diffusion sign flipped in the stationary solve".into());
    }
    for ch in &checks {
        table.push(vec![
            Cell::from(ch.name),
            Cell::Int(ch.samples as i64),
            Cell::Num(ch.measured),
            Cell::from(match ch.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
            }),
            Cell::Num(ch.bound),
            Cell::from(match ch.class {
                Class::Gate => "gate",
                Class::Finding => "finding",
            }),
            Cell::from(ch.status()),
        ]);
    }
    Ok(table)
}

/// True when any row carries status `FAIL`.
pub fn validation_failed(table: &ResultTable) -> bool {
    let Some(k) = table.column("status") else {
        return false;
    };
    table.rows.iter().any(|r| r[k].as_str() == Some("FAIL"))
}
