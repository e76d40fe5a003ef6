//! Maximization of the inequality value over states and settings, and the
//! parameter scans built on it.
//!
//! Every search coordinate is an unconstrained angle or amplitude; states and
//! configurations are rebuilt from the coordinates so that each evaluated
//! point is feasible. Restarts are independent and run in parallel; results
//! are merged by value with ties going to the lower restart index.

pub mod nelder_mead;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{evaluate, evaluate_resolved, ghz_closed_form, InequalityReport};
use crate::nlhv::verify::case_seed;
use crate::quantum::PureState;
use crate::settings::{
    ghz_optimal_settings, parametrized_config, reference_settings, MeasurementConfig,
    SettingsParams,
};
use crate::states::{arbitrary3_unchecked, ghz, w3, StateFamilySpec};
use nelder_mead::{minimize_restarting, NelderMeadOptions};

/// Two restart values closer than this count as the same optimum.
pub const CONVERGENCE_TOL: f64 = 1e-8;

pub const DEFAULT_RESTARTS: usize = 32;
pub const DEFAULT_MAX_EVALS: usize = 20_000;

/// Which state parameters are searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSearch {
    Fixed {
        state: StateFamilySpec,
    },
    /// Generalized W family; `None` marks a free angle.
    W3 {
        xi: Option<f64>,
        eta: Option<f64>,
    },
    /// Five-parameter canonical three-qubit form, all of `(mu, phi)` free.
    Arbitrary3,
    /// Every amplitude of an `n`-qubit state free.
    Generic {
        n: usize,
    },
}

impl StateSearch {
    pub fn n_qubits(&self) -> usize {
        match self {
            Self::Fixed { state } => state.n_qubits(),
            Self::W3 { .. } | Self::Arbitrary3 => 3,
            Self::Generic { n } => *n,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Self::Fixed { .. } => 0,
            Self::W3 { xi, eta } => usize::from(xi.is_none()) + usize::from(eta.is_none()),
            Self::Arbitrary3 => 6,
            Self::Generic { n } => 2 << n,
        }
    }
}

/// Which settings are searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SettingsSearch {
    /// Full feasible parametrization: triad rotation, Alice phases and free
    /// partner directions.
    Free,
    /// Explicit three-party settings; only theta can vary.
    Reference,
    /// n-party GHZ settings; only theta can vary.
    GhzOptimal,
    /// A fixed configuration, theta included.
    Fixed { config: Box<MeasurementConfig> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThetaSearch {
    Free,
    Fixed { theta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizeSpec {
    pub state: StateSearch,
    pub settings: SettingsSearch,
    pub theta: ThetaSearch,
    pub restarts: usize,
    pub max_evals: usize,
    pub seed: u64,
    /// Starting point of restart 0 in place of a random draw, in the layout
    /// of [`OptimizeResult::params`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
}

impl MaximizeSpec {
    pub fn new(
        state: StateSearch,
        settings: SettingsSearch,
        theta: ThetaSearch,
        seed: u64,
    ) -> Self {
        Self {
            state,
            settings,
            theta,
            restarts: DEFAULT_RESTARTS,
            max_evals: DEFAULT_MAX_EVALS,
            seed,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_value: f64,
    pub state: StateFamilySpec,
    pub config: MeasurementConfig,
    pub theta: f64,
    pub report: InequalityReport,
    /// Raw search coordinates of the best point.
    pub params: Vec<f64>,
    pub best_restart: usize,
    /// Best value reached by each restart.
    pub restart_values: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    pub converged: bool,
}

/// Decoded search space: maps coordinates to a state and configuration.
struct Problem<'a> {
    spec: &'a MaximizeSpec,
    n: usize,
    state_dim: usize,
    theta_dim: usize,
    settings_dim: usize,
}

/// `[0, pi]` image of an unconstrained angle.
fn fold_theta(t: f64) -> f64 {
    0.5 * PI * (1.0 - t.cos())
}

impl<'a> Problem<'a> {
    fn new(spec: &'a MaximizeSpec) -> Result<Self> {
        let n = spec.state.n_qubits();
        if let StateSearch::Fixed { state } = &spec.state {
            state.validate()?;
        }
        if let StateSearch::Generic { n } = spec.state {
            if !(2..=8).contains(&n) {
                return Err(Error::Unsupported(format!(
                    "generic state search over {n} qubits"
                )));
            }
        }
        if let ThetaSearch::Fixed { theta } = spec.theta {
            if !(theta.is_finite() && (0.0..=PI).contains(&theta)) {
                return Err(Error::ThetaOutOfRange(theta));
            }
        }
        let theta_free = matches!(spec.theta, ThetaSearch::Free);
        let settings_dim = match &spec.settings {
            SettingsSearch::Free => SettingsParams::len_for(n),
            SettingsSearch::Reference => {
                if n != 3 {
                    return Err(Error::PartyMismatch {
                        state: n,
                        config: 3,
                    });
                }
                0
            }
            SettingsSearch::GhzOptimal => {
                ghz_optimal_settings(n, 0.5)?;
                0
            }
            SettingsSearch::Fixed { config } => {
                if config.n != n {
                    return Err(Error::PartyMismatch {
                        state: n,
                        config: config.n,
                    });
                }
                config.resolve()?;
                0
            }
        };
        let theta_dim =
            usize::from(theta_free && !matches!(spec.settings, SettingsSearch::Fixed { .. }));
        Ok(Self {
            spec,
            n,
            state_dim: spec.state.dim(),
            theta_dim,
            settings_dim,
        })
    }

    fn dim(&self) -> usize {
        self.state_dim + self.theta_dim + self.settings_dim
    }

    fn state_spec(&self, p: &[f64]) -> StateFamilySpec {
        match &self.spec.state {
            StateSearch::Fixed { state } => state.clone(),
            StateSearch::W3 { xi, eta } => {
                let mut it = p.iter().copied();
                let xi = xi.unwrap_or_else(|| it.next().expect("xi coordinate"));
                let eta = eta.unwrap_or_else(|| it.next().expect("eta coordinate"));
                StateFamilySpec::W3 { xi, eta }
            }
            StateSearch::Arbitrary3 => {
                let (mu, phi) = decode_arbitrary3(p);
                StateFamilySpec::Arbitrary3 { mu, phi }
            }
            StateSearch::Generic { .. } => {
                let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                let amplitudes = if norm > 0.0 {
                    p.chunks(2).map(|c| [c[0] / norm, c[1] / norm]).collect()
                } else {
                    let mut a = vec![[0.0, 0.0]; p.len() / 2];
                    a[0] = [1.0, 0.0];
                    a
                };
                StateFamilySpec::Explicit { amplitudes }
            }
        }
    }

    fn state(&self, p: &[f64]) -> PureState {
        match &self.spec.state {
            StateSearch::Arbitrary3 => {
                let (mu, phi) = decode_arbitrary3(p);
                arbitrary3_unchecked(mu, phi)
            }
            StateSearch::W3 { .. } => match self.state_spec(p) {
                StateFamilySpec::W3 { xi, eta } => w3(xi, eta),
                _ => unreachable!(),
            },
            StateSearch::Generic { .. } => PureState::from_unnormalized(
                p.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect(),
            )
            .unwrap_or_else(|_| PureState::basis(self.n, 0).expect("valid qubit count")),
            StateSearch::Fixed { state } => state.build().expect("validated state"),
        }
    }

    fn config(&self, p: &[f64]) -> MeasurementConfig {
        let theta = match self.spec.theta {
            ThetaSearch::Fixed { theta } => theta,
            ThetaSearch::Free => p.first().map_or(0.0, |&t| fold_theta(t)),
        };
        let rest = &p[self.theta_dim..];
        match &self.spec.settings {
            SettingsSearch::Free => {
                parametrized_config(self.n, theta, &SettingsParams::from_slice(self.n, rest))
                    .expect("finite parameters")
            }
            SettingsSearch::Reference => reference_settings(theta).expect("theta in range"),
            SettingsSearch::GhzOptimal => {
                ghz_optimal_settings(self.n, theta).expect("valid n and theta")
            }
            SettingsSearch::Fixed { config } => (**config).clone(),
        }
    }

    fn split<'p>(&self, p: &'p [f64]) -> (&'p [f64], &'p [f64]) {
        p.split_at(self.state_dim)
    }

    fn value(&self, p: &[f64]) -> f64 {
        let (sp, cp) = self.split(p);
        if sp.iter().chain(cp).any(|x| !x.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let state = self.state(sp);
        let config = self.config(cp);
        debug_assert!(config.validate().is_empty(), "{:?}", config.validate());
        evaluate_resolved(&state, &config.resolve_unchecked())
            .map_or(f64::NEG_INFINITY, |r| r.total)
    }

    fn random_start(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.dim());
        match &self.spec.state {
            StateSearch::Fixed { .. } => {}
            StateSearch::W3 { .. } => {
                p.extend((0..self.state_dim).map(|_| rng.random_range(0.0..PI)))
            }
            StateSearch::Arbitrary3 => {
                p.extend((0..5).map(|_| rng.random_range(-1.0..1.0)));
                p.push(rng.random_range(0.0..PI));
            }
            StateSearch::Generic { .. } => {
                p.extend((0..self.state_dim).map(|_| rng.random_range(-1.0..1.0)))
            }
        }
        p.extend((0..self.theta_dim).map(|_| rng.random_range(0.0..PI)));
        p.extend((0..self.settings_dim).map(|_| rng.random_range(-PI..PI)));
        p
    }
}

/// `mu_i = y_i^2 / |y|^2`, `phi = fold(t)`.
fn decode_arbitrary3(p: &[f64]) -> ([f64; 5], f64) {
    let norm: f64 = p[..5].iter().map(|y| y * y).sum();
    let mu = if norm > 0.0 {
        std::array::from_fn(|i| p[i] * p[i] / norm)
    } else {
        [0.2; 5]
    };
    (mu, fold_theta(p[5]))
}

struct RestartOutcome {
    params: Vec<f64>,
    value: f64,
    evals: usize,
    iterations: usize,
}

/// Multi-start downhill-simplex maximization of the inequality value.
pub fn maximize(spec: &MaximizeSpec) -> Result<OptimizeResult> {
    let problem = Problem::new(spec)?;
    let restarts = spec.restarts.max(1);
    if let Some(init) = &spec.initial {
        if init.len() != problem.dim() {
            return Err(Error::Unsupported(format!(
                "initial point has {} coordinates, search space has {}",
                init.len(),
                problem.dim()
            )));
        }
    }
    let opts = NelderMeadOptions {
        max_evals: spec.max_evals.max(1),
        ..Default::default()
    };

    let outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(case_seed(spec.seed, 100, r));
            let x0 = match (&spec.initial, r) {
                (Some(init), 0) => init.clone(),
                _ => problem.random_start(&mut rng),
            };
            let res = minimize_restarting(|p| -problem.value(p), &x0, &opts);
            RestartOutcome {
                value: -res.f,
                params: res.x,
                evals: res.evals,
                iterations: res.iterations,
            }
        })
        .collect();

    let best_restart = outcomes.iter().enumerate().fold(0, |best, (i, o)| {
        if o.value > outcomes[best].value {
            i
        } else {
            best
        }
    });
    let best = &outcomes[best_restart];
    let near_best = outcomes
        .iter()
        .filter(|o| o.value >= best.value - CONVERGENCE_TOL)
        .count();

    let (sp, cp) = problem.split(&best.params);
    let state_spec = problem.state_spec(sp);
    let config = problem.config(cp);
    // report through the public evaluation path
    let report = evaluate(&problem.state(sp), &config)?;
    Ok(OptimizeResult {
        best_value: report.total,
        theta: config.theta,
        state: state_spec,
        config,
        report,
        params: best.params.clone(),
        best_restart,
        restart_values: outcomes.iter().map(|o| o.value).collect(),
        evaluations: outcomes.iter().map(|o| o.evals).sum(),
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
        restarts,
        seed: spec.seed,
        converged: near_best >= 2 || restarts == 1,
    })
}

/// Evenly spaced grid including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridRange {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.end
                } else {
                    self.start + step * k as f64
                }
            })
            .collect()
    }

    fn check(&self, what: &str) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidScan(format!(
                "{what} grid needs at least 2 points"
            )));
        }
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::InvalidScan(format!("{what} range is not finite")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SettingsMode {
    /// Explicit three-party settings at a fixed theta.
    Fixed { theta: f64 },
    /// Settings and theta maximized at every grid point.
    Optimized {
        restarts: usize,
        max_evals: usize,
        seed: u64,
    },
}

/// Sweep of the generalized W family over `(xi, eta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub xi: GridRange,
    pub eta: GridRange,
    pub mode: SettingsMode,
}

impl ScanSpec {
    /// Six `xi` curves from `pi/12` to `pi/2`, `eta` over `[0, pi/2]`.
    pub fn standard_grid(eta_points: usize, mode: SettingsMode) -> Self {
        Self {
            xi: GridRange {
                start: PI / 12.0,
                end: PI / 2.0,
                count: 6,
            },
            eta: GridRange {
                start: 0.0,
                end: PI / 2.0,
                count: eta_points,
            },
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.xi.check("xi")?;
        self.eta.check("eta")?;
        match self.mode {
            SettingsMode::Fixed { theta }
                if !(theta.is_finite() && (0.0..=PI).contains(&theta)) =>
            {
                Err(Error::ThetaOutOfRange(theta))
            }
            SettingsMode::Optimized { restarts: 0, .. } => {
                Err(Error::InvalidScan("restarts must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub xi: f64,
    pub eta: f64,
    pub value: f64,
}

/// Inequality value over the W-family grid, rows in `xi`-major order.
///
/// In optimized mode each `xi` curve is traced along `eta` with restart 0
/// warm-started from the previous grid point's optimum.
pub fn scan_w_family(spec: &ScanSpec) -> Result<Vec<ScanRow>> {
    spec.validate()?;
    let xis = spec.xi.values();
    let etas = spec.eta.values();
    let curves: Vec<Result<Vec<ScanRow>>> = xis
        .par_iter()
        .enumerate()
        .map(|(xi_index, &xi)| match spec.mode {
            SettingsMode::Fixed { theta } => {
                let cfg = reference_settings(theta)?;
                etas.iter()
                    .map(|&eta| {
                        Ok(ScanRow {
                            xi,
                            eta,
                            value: evaluate(&w3(xi, eta), &cfg)?.total,
                        })
                    })
                    .collect()
            }
            SettingsMode::Optimized {
                restarts,
                max_evals,
                seed,
            } => {
                let mut warm: Option<Vec<f64>> = None;
                let mut rows = Vec::with_capacity(etas.len());
                for (eta_index, &eta) in etas.iter().enumerate() {
                    let spec = MaximizeSpec {
                        state: StateSearch::Fixed {
                            state: StateFamilySpec::W3 { xi, eta },
                        },
                        settings: SettingsSearch::Free,
                        theta: ThetaSearch::Free,
                        restarts,
                        max_evals,
                        seed: case_seed(seed, xi_index as u64, eta_index),
                        initial: warm.take(),
                    };
                    let res = maximize(&spec)?;
                    rows.push(ScanRow {
                        xi,
                        eta,
                        value: res.best_value,
                    });
                    warm = Some(res.params);
                }
                Ok(rows)
            }
        })
        .collect();
    let mut out = Vec::with_capacity(xis.len() * etas.len());
    for c in curves {
        out.extend(c?);
    }
    Ok(out)
}

/// Default theta grid: 181 even points on `[0, pi]` plus the peak and the
/// upper end of the violation window.
pub fn default_theta_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..181).map(|k| PI * k as f64 / 180.0).collect();
    g.push(crate::optimal_theta());
    g.push(crate::inequality::violation_window().1);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub theta: f64,
    pub value: f64,
    pub closed_form: f64,
}

/// GHZ_3 under the explicit settings, evaluated on `grid`.
pub fn scan_theta_curve(grid: &[f64]) -> Result<Vec<ThetaRow>> {
    let g = ghz(3)?;
    grid.iter()
        .map(|&theta| {
            let value = evaluate(&g, &reference_settings(theta)?)?.total;
            Ok(ThetaRow {
                theta,
                value,
                closed_form: ghz_closed_form(theta),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{max_quantum_value, optimal_theta};

    fn quick(state: StateSearch, settings: SettingsSearch, seed: u64) -> MaximizeSpec {
        MaximizeSpec {
            restarts: 4,
            max_evals: 4000,
            ..MaximizeSpec::new(state, settings, ThetaSearch::Free, seed)
        }
    }

    #[test]
    fn theta_only_search_finds_peak() {
        let spec = quick(
            StateSearch::Fixed {
                state: StateFamilySpec::Ghz { n: 3 },
            },
            SettingsSearch::Reference,
            1,
        );
        let r = maximize(&spec).unwrap();
        assert!((r.best_value - max_quantum_value()).abs() < 1e-9);
        assert!((r.theta - optimal_theta()).abs() < 1e-5);
        assert!(r.converged);
        assert_eq!(r.restart_values.len(), 4);
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = quick(
            StateSearch::W3 {
                xi: Some(1.0),
                eta: None,
            },
            SettingsSearch::Free,
            9,
        );
        let a = maximize(&spec).unwrap();
        let b = maximize(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reported_value_matches_public_evaluate() {
        let spec = quick(StateSearch::Arbitrary3, SettingsSearch::Free, 3);
        let r = maximize(&spec).unwrap();
        let again = evaluate(&r.state.build().unwrap(), &r.config).unwrap();
        assert!((again.total - r.best_value).abs() < 1e-10);
        assert!(r.config.validate().is_empty());
        assert!(r.best_value <= max_quantum_value() + 1e-9);
    }

    #[test]
    fn never_below_a_coarse_grid() {
        // fixed W state, settings from the explicit family on a theta grid
        let state = StateFamilySpec::W3 { xi: 1.2, eta: 0.6 };
        let psi = state.build().unwrap();
        let grid_best = (0..=20)
            .map(|k| {
                evaluate(&psi, &reference_settings(PI * k as f64 / 20.0).unwrap())
                    .unwrap()
                    .total
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let r = maximize(&quick(
            StateSearch::Fixed { state },
            SettingsSearch::Free,
            5,
        ))
        .unwrap();
        assert!(
            r.best_value >= grid_best - 1e-12,
            "{} < {grid_best}",
            r.best_value
        );
    }

    #[test]
    fn warm_start_length_checked() {
        let mut spec = quick(StateSearch::Arbitrary3, SettingsSearch::Reference, 0);
        spec.initial = Some(vec![0.0; 3]);
        assert!(maximize(&spec).is_err());
    }

    #[test]
    fn incompatible_searches_rejected() {
        let spec = quick(
            StateSearch::Fixed {
                state: StateFamilySpec::Ghz { n: 4 },
            },
            SettingsSearch::Reference,
            0,
        );
        assert!(maximize(&spec).is_err());
        let spec = quick(
            StateSearch::Fixed {
                state: StateFamilySpec::Ghz { n: 2 },
            },
            SettingsSearch::GhzOptimal,
            0,
        );
        assert!(maximize(&spec).is_err());
    }

    #[test]
    fn grid_values_hit_endpoints() {
        let g = GridRange {
            start: 0.0,
            end: PI / 2.0,
            count: 5,
        }
        .values();
        assert_eq!(g.len(), 5);
        assert_eq!(g[4], PI / 2.0);
        assert!((g[2] - PI / 4.0).abs() < 1e-15);
        let bad = ScanSpec {
            xi: GridRange {
                start: 0.0,
                end: 1.0,
                count: 1,
            },
            ..ScanSpec::standard_grid(4, SettingsMode::Fixed { theta: 0.5 })
        };
        assert!(scan_w_family(&bad).is_err());
    }

    #[test]
    fn fixed_mode_scan_shape() {
        let rows = scan_w_family(&ScanSpec::standard_grid(
            8,
            SettingsMode::Fixed {
                theta: optimal_theta(),
            },
        ))
        .unwrap();
        assert_eq!(rows.len(), 48);
        assert!(rows.windows(2).all(|w| w[0].xi <= w[1].xi));
        assert!(rows.iter().all(|r| r.value <= max_quantum_value() + 1e-9));
    }

    #[test]
    fn theta_curve_matches_closed_form() {
        let grid = default_theta_grid();
        assert!(grid.contains(&optimal_theta()));
        let rows = scan_theta_curve(&grid).unwrap();
        for r in &rows {
            assert!((r.value - r.closed_form).abs() < 1e-10);
        }
        let peak = rows
            .iter()
            .max_by(|a, b| a.value.total_cmp(&b.value))
            .unwrap();
        assert_eq!(peak.theta, optimal_theta());
        assert!((peak.value - max_quantum_value()).abs() < 1e-12);
        assert!((rows[0].value - 6.0).abs() < 1e-12);
        let beyond: Vec<_> = rows.iter().filter(|r| r.theta > optimal_theta()).collect();
        assert!(beyond.windows(2).all(|w| w[1].value < w[0].value));
    }
}
