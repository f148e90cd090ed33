//! Derivative-free simplex minimization in two dimensions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop once (f_max − f_min) ≤ rel_tol·(|f_min| + abs_floor).
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub initial_step: [f64; 2],
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            rel_tol: 1e-10,
            abs_floor: 1e-12,
            initial_step: [0.25, 0.1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: [f64; 2],
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final (f_max − f_min)/(|f_min| + abs_floor).
    pub relative_spread: f64,
}

pub fn nelder_mead<F>(f: F, x0: [f64; 2], opts: &NelderMeadOptions) -> Minimum
where
    F: Fn([f64; 2]) -> f64,
{
    let mut simplex = [
        x0,
        [x0[0] + opts.initial_step[0], x0[1]],
        [x0[0], x0[1] + opts.initial_step[1]],
    ];
    let mut values = simplex.map(&f);

    let spread = |v: &[f64; 3]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / (lo.abs() + opts.abs_floor)
    };

    let mut iterations = 0;
    while iterations < opts.max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);
        if spread(&values) <= opts.rel_tol {
            break;
        }
        iterations += 1;

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };

        let xr = along(-1.0);
        let fr = f(xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                simplex[2] = xe;
                values[2] = fe;
            } else {
                simplex[2] = xr;
                values[2] = fr;
            }
            continue;
        }
        if fr < values[1] {
            simplex[2] = xr;
            values[2] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[2] {
            let x = along(-0.5);
            (x, f(x))
        } else {
            let x = along(0.5);
            (x, f(x))
        };
        if fc < values[2].min(fr) {
            simplex[2] = xc;
            values[2] = fc;
            continue;
        }
        // shrink toward the best vertex
        for k in 1..3 {
            simplex[k] = [
                simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
            ];
            values[k] = f(simplex[k]);
        }
    }

    let best = (0..3)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    let relative_spread = spread(&values);
    Minimum {
        x: simplex[best],
        f: values[best],
        iterations,
        converged: relative_spread <= opts.rel_tol,
        relative_spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: [f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(
            f,
            [-1.2, 1.0],
            &NelderMeadOptions {
                rel_tol: 1e-14,
                abs_floor: 1e-14,
                ..Default::default()
            },
        );
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn shifted_quadratic() {
        let f = |x: [f64; 2]| 3.0 + (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 1.1).powi(2);
        let m = nelder_mead(f, [0.0, 0.0], &NelderMeadOptions::default());
        assert!(m.converged);
        assert!((m.f - 3.0).abs() < 1e-9);
    }

    #[test]
    fn constant_function_converges_immediately() {
        let m = nelder_mead(|_| 0.0, [1.0, 2.0], &NelderMeadOptions::default());
        assert!(m.converged);
        assert_eq!(m.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let f = |x: [f64; 2]| x[0] * x[0] + x[1] * x[1] + 1.0;
        let m = nelder_mead(
            f,
            [50.0, -80.0],
            &NelderMeadOptions {
                max_iter: 3,
                ..Default::default()
            },
        );
        assert!(!m.converged);
    }
}
