//! Downhill simplex minimization with dimension-adaptive coefficients.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
    /// Stop when the spread of simplex values falls below this ...
    pub ftol: f64,
    /// ... and every vertex lies within this distance of the best one.
    pub xtol: f64,
    pub max_evals: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            ftol: 1e-10,
            xtol: 1e-10,
            max_evals: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub iterations: usize,
    pub converged: bool,
}

struct Budgeted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Budgeted<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// Minimizes `f` from `x0`.
pub fn minimize(
    f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let mut obj = Budgeted { f, evals: 0 };
    let (x, fx, iterations, converged) = run(&mut obj, x0, opts, opts.max_evals);
    NelderMeadResult {
        x,
        f: fx,
        evals: obj.evals,
        iterations,
        converged,
    }
}

/// Minimizes `f`, rebuilding the simplex around the incumbent after each
/// convergence until a restart no longer improves by more than `ftol` or the
/// evaluation budget is spent. Guards against premature collapse of the
/// simplex in higher dimensions.
pub fn minimize_restarting(
    f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let mut obj = Budgeted { f, evals: 0 };
    let mut best_x = x0.to_vec();
    let mut best_f = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut step = opts.initial_step;
    while obj.evals < opts.max_evals {
        let local = NelderMeadOptions {
            initial_step: step,
            ..*opts
        };
        let remaining = opts.max_evals - obj.evals;
        let (x, fx, it, conv) = run(&mut obj, &best_x, &local, remaining);
        iterations += it;
        let improvement = best_f - fx;
        if fx < best_f {
            best_f = fx;
            best_x = x;
        }
        converged = conv;
        if !conv || improvement.abs() <= opts.ftol {
            break;
        }
        step = (step * 0.5).max(1e-3);
    }
    NelderMeadResult {
        x: best_x,
        f: best_f,
        evals: obj.evals,
        iterations,
        converged,
    }
}

fn run<F: FnMut(&[f64]) -> f64>(
    obj: &mut Budgeted<F>,
    x0: &[f64],
    opts: &NelderMeadOptions,
    budget: usize,
) -> (Vec<f64>, f64, usize, bool) {
    let n = x0.len();
    let start = obj.evals;
    if n == 0 {
        let v = obj.call(x0);
        return (Vec::new(), v, 0, true);
    }
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let (gamma, rho, sigma) = if n == 1 {
        (2.0, 0.5, 0.5)
    } else {
        (gamma, rho, sigma)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| obj.call(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();
    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (best, worst, second_worst) = (order[0], order[n], order[n - 1]);

        let spread = values[worst] - values[best];
        let size = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= opts.ftol && size <= opts.xtol {
            converged = true;
            break;
        }
        if obj.evals - start >= budget {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                *c += x / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = obj.call(&xr);
        if fr < values[best] {
            let xe = along(alpha * gamma);
            let fe = obj.call(&xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second_worst] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[worst] {
            let xc = along(alpha * rho);
            let fc = obj.call(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = obj.call(&xc);
            (xc, fc)
        };
        if fc < values[worst].min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[best].clone();
        for &k in &order[1..] {
            for (x, a) in simplex[k].iter_mut().zip(&anchor) {
                *x = a + sigma * (*x - a);
            }
            values[k] = obj.call(&simplex[k]);
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    (
        simplex.swap_remove(best),
        values[best],
        iterations,
        converged,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        x.windows(2)
            .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
            .sum()
    }

    #[test]
    fn quadratic_bowl() {
        let r = minimize(
            |x| {
                x.iter()
                    .enumerate()
                    .map(|(i, v)| (i as f64 + 1.0) * (v - 1.0).powi(2))
                    .sum()
            },
            &[0.0; 5],
            &NelderMeadOptions::default(),
        );
        assert!(r.converged);
        assert!(r.f < 1e-10);
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-4));
    }

    #[test]
    fn rosenbrock_2d() {
        let opts = NelderMeadOptions {
            max_evals: 5000,
            ..Default::default()
        };
        let r = minimize_restarting(rosenbrock, &[-1.2, 1.0], &opts);
        assert!(r.f < 1e-12, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn one_dimensional() {
        let r = minimize(
            |x| (x[0] - 0.3).powi(2),
            &[2.0],
            &NelderMeadOptions::default(),
        );
        assert!((r.x[0] - 0.3).abs() < 1e-8);
    }

    #[test]
    fn respects_budget() {
        let opts = NelderMeadOptions {
            max_evals: 50,
            ftol: 0.0,
            xtol: 0.0,
            ..Default::default()
        };
        let r = minimize_restarting(rosenbrock, &[0.0; 6], &opts);
        assert!(!r.converged);
        // the final shrink step may overrun by at most n evaluations
        assert!(r.evals <= 50 + 7);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let r = minimize(
            |x| {
                if x[0] < 0.0 {
                    f64::NAN
                } else {
                    (x[0] - 1.0).powi(2)
                }
            },
            &[0.5],
            &Default::default(),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-6);
    }
}
