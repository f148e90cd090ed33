use rayon::prelude::*;

use super::config::{InitialCovariance, RunConfig, SweepAxis, SweepConfig};
use super::table::{Cell, ResultTable};
use super::CliError;
use crate::dynamics::{
    eigenspectrum, propagate_covariance, unwrap_phase, CovarianceState, IntegratorSettings,
    MomentState, PhysicalityPolicy, AMPLITUDE_FLOOR,
};
use crate::error::Error;
use crate::gauss_info::{info_report, ladder_to_quadrature, physicality_check};
use crate::linalg::c;
use crate::model::{critical_xi, validate_params, ParamWarning};
use crate::steady::{divergence_xi, flux, singular_xi, solve_lyapunov};

pub(crate) fn provenance(cfg: &RunConfig, subcommand: &str) -> Vec<String> {
    vec![
        format!("gaussync {}", env!("CARGO_PKG_VERSION")),
        format!("subcommand: {subcommand}"),
        format!("config: {}", cfg.echo()),
    ]
}

fn key_columns(cfg: &RunConfig) -> Vec<String> {
    let mut cols = Vec::new();
    if let Some(s) = &cfg.series {
        cols.push(format!("series_{}", s.axis.name()));
    }
    if let Some(s) = &cfg.sweep {
        cols.push(s.axis.name().to_string());
    }
    cols
}

fn key_cells(series: Option<f64>, sweep: Option<f64>) -> Vec<Cell> {
    series.into_iter().chain(sweep).map(Cell::Num).collect()
}

fn warning_notes(cfg: &RunConfig) -> Vec<String> {
    let mut notes = Vec::new();
    for (series, sweep) in cfg.points() {
        let p = cfg.point_params(series, sweep);
        if let Ok(v) = validate_params(p) {
            for w in v.warnings {
                match w {
                    ParamWarning::DeltaSingularity => notes.push(format!(
                        "warning: |xi*gamma12| ~ gamma at xi={} (closed-form singularity)",
                        p.xi
                    )),
                }
            }
        }
    }
    notes
}

/// Eigenvalue branches λ± across the sweep.
pub fn run_spectrum(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let mut cfg = cfg.clone();
    if cfg.sweep.is_none() {
        cfg.sweep = Some(SweepConfig {
            axis: SweepAxis::Xi,
            start: -1.0,
            stop: 1.0,
            count: 201,
        });
        cfg.check().map_err(CliError::Config)?;
    }
    let mut columns = key_columns(&cfg);
    columns.extend(
        [
            "re_lambda_plus",
            "re_lambda_minus",
            "im_lambda_plus_offset",
            "im_lambda_minus_offset",
            "im_lambda_plus",
            "im_lambda_minus",
            "gap_real",
            "gap_imag",
            "regime",
            "xi_crit",
        ]
        .map(String::from),
    );
    let mut table = ResultTable::new(columns);
    table.provenance = provenance(&cfg, "spectrum");
    table.provenance.push(
        "note: im_lambda_*_offset = Im(lambda) + gamma/2; raw imaginary parts in im_lambda_*"
            .into(),
    );
    table
        .provenance
        .push("note: xi_crit is nan when no threshold exists in (0, 1] or gamma12 = 0".into());
    table.provenance.extend(warning_notes(&cfg));

    let rows: Vec<Vec<Cell>> = cfg
        .points()
        .into_par_iter()
        .map(|(series, sweep)| {
            let p = cfg.point_params(series, sweep);
            let s = eigenspectrum(&p);
            let xi_crit = match critical_xi(&p) {
                Ok(Some(t)) => t.xi,
                _ => f64::NAN,
            };
            let mut row = key_cells(series, sweep);
            row.extend([
                Cell::Num(s.lambda_plus.re),
                Cell::Num(s.lambda_minus.re),
                Cell::Num(s.lambda_plus.im + 0.5 * p.gamma),
                Cell::Num(s.lambda_minus.im + 0.5 * p.gamma),
                Cell::Num(s.lambda_plus.im),
                Cell::Num(s.lambda_minus.im),
                Cell::Num(s.gap_real),
                Cell::Num(s.gap_imag),
                Cell::from(s.regime.label()),
                Cell::Num(xi_crit),
            ]);
            row
        })
        .collect();
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

fn settings_for(cfg: &RunConfig, p: &crate::model::SystemParams) -> IntegratorSettings {
    let mut s = IntegratorSettings::default_for(p, cfg.integrator.t_end);
    if let Some(dt) = cfg.integrator.dt {
        s.dt = dt;
    }
    s.stride = cfg.integrator.stride;
    s.physicality = if cfg.integrator.allow_unphysical {
        PhysicalityPolicy::Record
    } else {
        PhysicalityPolicy::Enforce
    };
    s
}

/// Moments and covariance along time for every sweep point.
pub fn run_trajectory(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let mut columns = key_columns(cfg);
    columns.extend(
        [
            "t",
            "re_a1",
            "im_a1",
            "re_a2",
            "im_a2",
            "theta11",
            "theta22",
            "re_theta12",
            "im_theta12",
            "abs_theta12",
            "relative_phase",
            "envelope",
            "amplitude_ratio",
            "min_uncertainty_eig",
        ]
        .map(String::from),
    );
    let mut table = ResultTable::new(columns);
    table.provenance = provenance(cfg, "trajectory");
    let dt_note = match cfg.integrator.dt {
        Some(dt) => format!("dt: {dt:.16e}"),
        None => "dt: 2*pi/omega1/200 (200 steps per period)".into(),
    };
    table.provenance.push(dt_note);
    table.provenance.push(
        "note: relative_phase = unwrapped arg<a1> - arg<a2> (nan once an amplitude drops below 1e-12); envelope = |<a1>|".into(),
    );
    table.provenance.push(
        "note: min_uncertainty_eig = smallest eigenvalue of sigma + i*Omega/2 (negative means the uncertainty relation is violated)".into(),
    );
    table.provenance.extend(warning_notes(cfg));

    let init = &cfg.initial;
    let results: Vec<Result<Vec<Vec<Cell>>, CliError>> = cfg
        .points()
        .into_par_iter()
        .enumerate()
        .map(|(index, (series, sweep))| {
            let p = cfg.point_params(series, sweep);
            let x0 = MomentState::displaced(
                0.0,
                c(init.alpha1[0], init.alpha1[1]),
                c(init.alpha2[0], init.alpha2[1]),
            );
            let theta0 = match init.covariance {
                InitialCovariance::Vacuum => CovarianceState::vacuum(0.0),
                InitialCovariance::Thermal => CovarianceState::thermal(0.0, p.nbar1, p.nbar2),
            };
            let traj =
                propagate_covariance(&p, &x0, &theta0, &settings_for(cfg, &p)).map_err(|e| {
                    CliError::Solver(format!(
                        "trajectory point {index}: row {}: {}",
                        e.sample_index, e.source
                    ))
                })?;
            let mut phase: Option<f64> = None;
            let mut rows = Vec::with_capacity(traj.samples.len());
            for s in &traj.samples {
                let (a1, a2) = (s.moments.a1(), s.moments.a2());
                let rel = if a1.norm() < AMPLITUDE_FLOOR || a2.norm() < AMPLITUDE_FLOOR {
                    f64::NAN
                } else {
                    let raw = a1.arg() - a2.arg();
                    let v = match phase {
                        Some(prev) if prev.is_finite() => unwrap_phase(prev, raw),
                        _ => raw,
                    };
                    phase = Some(v);
                    v
                };
                let t12 = s.covariance.theta12();
                let mut row = key_cells(series, sweep);
                row.extend(
                    [
                        s.moments.t,
                        a1.re,
                        a1.im,
                        a2.re,
                        a2.im,
                        s.covariance.theta11(),
                        s.covariance.theta22(),
                        t12.re,
                        t12.im,
                        t12.norm(),
                        rel,
                        a1.norm(),
                        if a2.norm() > 0.0 {
                            a1.norm() / a2.norm()
                        } else {
                            f64::NAN
                        },
                        s.min_uncertainty_eig,
                    ]
                    .map(Cell::Num),
                );
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();
    for r in results {
        for row in r? {
            table.push(row);
        }
    }
    Ok(table)
}

const STEADY_COLUMNS: [&str; 26] = [
    "status",
    "theta11",
    "theta22",
    "re_theta12",
    "im_theta12",
    "residual",
    "j",
    "j_state",
    "continuity_residual",
    "balance_residual",
    "s2_a",
    "s2_b",
    "s2_ab",
    "i2",
    "j2",
    "d2",
    "d2_lower",
    "nu1",
    "nu2",
    "min_uncertainty_eig",
    "divergent",
    "seed_r",
    "seed_phi",
    "xi_occupation",
    "xi_denominator",
    "dist_xi_denominator",
];

/// Stationary state, flux and information measures per sweep point.
pub fn run_steady(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let mut columns = key_columns(cfg);
    columns.extend(STEADY_COLUMNS.map(String::from));
    let mut table = ResultTable::new(columns);
    table.provenance = provenance(cfg, "steady");
    table.provenance.push(
        "note: divergent=1 marks I2 > 50 nats or an undamped mode; such I2 are reported as inf"
            .into(),
    );
    table.provenance.push(
        "note: xi_occupation = sqrt(1/(nbar1+nbar2+1)); xi_denominator = gamma/gamma12; dist_xi_denominator = |xi| - xi_denominator".into(),
    );
    table
        .provenance
        .push("note: seed_r = inf denotes a homodyne measurement at angle seed_phi".into());
    table.provenance.extend(warning_notes(cfg));

    if matches!(&cfg.sweep, Some(s) if s.axis == SweepAxis::Xi) {
        let series: Vec<Option<f64>> = match &cfg.series {
            Some(s) => s.values.iter().map(|v| Some(*v)).collect(),
            None => vec![None],
        };
        for sv in series {
            let p = cfg.point_params(sv, None);
            let sx = singular_xi(&p);
            let empirical = divergence_xi(&p, 1e-10)
                .map(|v| format!("{v:.10}"))
                .unwrap_or_else(|| "none in [0,1]".into());
            let label = match (&cfg.series, sv) {
                (Some(s), Some(v)) => format!(" [{}={v}]", s.axis.name()),
                _ => String::new(),
            };
            table.provenance.push(format!(
                "asymptote{label}: empirical |xi| = {empirical}; xi_occupation = {:.10}; xi_denominator = {:.10}",
                sx.xi_occupation, sx.xi_denominator
            ));
        }
    }

    let rows: Vec<Vec<Cell>> = cfg
        .points()
        .into_par_iter()
        .map(|(series, sweep)| {
            let p = cfg.point_params(series, sweep);
            let mut row = key_cells(series, sweep);
            row.extend(steady_row(&p));
            row
        })
        .collect();
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

fn steady_row(p: &crate::model::SystemParams) -> Vec<Cell> {
    let nan = f64::NAN;
    let sx = singular_xi(p);
    let tail = [
        Cell::Num(sx.xi_occupation),
        Cell::Num(sx.xi_denominator),
        Cell::Num(p.xi.abs() - sx.xi_denominator),
    ];
    let flagged = |status: &str, i2: f64, divergent: i64| {
        let mut row = vec![Cell::from(status)];
        row.extend([nan; 12].map(Cell::Num));
        row.push(Cell::Num(i2));
        row.extend([nan; 6].map(Cell::Num));
        row.push(Cell::Int(divergent));
        row.extend([nan; 2].map(Cell::Num));
        row.extend(tail.clone());
        row
    };
    let ss = match solve_lyapunov(p) {
        Ok(ss) => ss,
        Err(Error::NoUniqueSteadyState { .. }) => {
            return flagged("no_unique_steady_state", f64::INFINITY, 1)
        }
        Err(Error::Unstable { .. }) => return flagged("unstable", nan, 0),
        Err(_) => return flagged("singular", nan, 0),
    };
    let f = flux(p, &ss);
    let t12 = ss.theta12();
    let mut row = vec![
        Cell::from("ok"),
        Cell::Num(ss.theta11()),
        Cell::Num(ss.theta22()),
        Cell::Num(t12.re),
        Cell::Num(t12.im),
        Cell::Num(ss.residual),
        Cell::Num(f.j),
        Cell::Num(f.j_state),
        Cell::Num(f.continuity_residual),
        Cell::Num(f.balance_residual),
    ];
    let state = CovarianceState {
        t: 0.0,
        theta: ss.theta,
    };
    let sigma = ladder_to_quadrature(&state);
    let min_eig = sigma
        .as_ref()
        .map(|s| physicality_check(s).min_eigenvalue())
        .unwrap_or(nan);
    match sigma.and_then(|s| info_report(&s)) {
        Ok(r) => {
            row.extend(
                [
                    r.s2_a, r.s2_b, r.s2_ab, r.i2, r.j2, r.d2, r.d2_lower, r.nu[0], r.nu[1],
                    min_eig,
                ]
                .map(Cell::Num),
            );
            row.push(Cell::Int(r.divergent as i64));
            row.push(Cell::Num(r.seed.r));
            row.push(Cell::Num(r.seed.phi));
        }
        Err(_) => {
            row[0] = Cell::from("info_unavailable");
            row.extend([nan; 9].map(Cell::Num));
            row.push(Cell::Num(min_eig));
            row.push(Cell::Int(0));
            row.extend([nan; 2].map(Cell::Num));
        }
    }
    row.extend(tail);
    debug_assert_eq!(row.len(), STEADY_COLUMNS.len());
    row
}
