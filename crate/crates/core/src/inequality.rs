//! The multipartite Leggett-type inequality
//!
//! `I_n = sum_{i=1..3} |Q_{i i..i} + Q_{i' i..i}| + 2|sin(theta/2)| <= 6`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{correlation, CorrelationValue, PureState};
use crate::settings::{MeasurementConfig, ResolvedSettings};

/// Bound obeyed by every Leggett-type non-local hidden variable model, for
/// any party count.
pub const LEGGETT_BOUND: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub theta: f64,
    /// `Q_1, Q_1', Q_2, Q_2', Q_3, Q_3'`.
    pub q_terms: [CorrelationValue; 6],
    /// `|Q_i + Q_i'|`.
    pub term_sums: [f64; 3],
    pub theta_term: f64,
    pub total: f64,
    pub bound: f64,
    pub violation: f64,
}

impl InequalityReport {
    /// Assembles a report from the six correlations in `q_terms` order.
    pub fn from_correlations(theta: f64, q: [f64; 6]) -> Self {
        let term_sums = [
            (q[0] + q[1]).abs(),
            (q[2] + q[3]).abs(),
            (q[4] + q[5]).abs(),
        ];
        let theta_term = 2.0 * (theta / 2.0).sin().abs();
        let total = term_sums.iter().sum::<f64>() + theta_term;
        Self {
            theta,
            q_terms: q.map(CorrelationValue::new),
            term_sums,
            theta_term,
            total,
            bound: LEGGETT_BOUND,
            violation: total - LEGGETT_BOUND,
        }
    }

    pub fn violates(&self) -> bool {
        self.total > self.bound
    }

    /// CSV column names matching [`csv_row`](Self::csv_row).
    pub const CSV_HEADER: [&'static str; 9] = [
        "theta",
        "q1",
        "q1p",
        "q2",
        "q2p",
        "q3",
        "q3p",
        "total",
        "violation",
    ];

    /// `theta, q1..q6, total, violation`.
    pub fn csv_row(&self) -> [f64; 9] {
        let q = self.q_terms.map(CorrelationValue::get);
        [
            self.theta,
            q[0],
            q[1],
            q[2],
            q[3],
            q[4],
            q[5],
            self.total,
            self.violation,
        ]
    }
}

/// Evaluates `I_n` for `state` under a validated configuration.
pub fn evaluate(state: &PureState, config: &MeasurementConfig) -> Result<InequalityReport> {
    if state.n_qubits() != config.n {
        return Err(Error::PartyMismatch {
            state: state.n_qubits(),
            config: config.n,
        });
    }
    let resolved = config.resolve()?;
    evaluate_resolved(state, &resolved)
}

pub(crate) fn evaluate_resolved(
    state: &PureState,
    settings: &ResolvedSettings,
) -> Result<InequalityReport> {
    let mut q = [0.0; 6];
    for (slot, dirs) in q.iter_mut().zip(&settings.tuples) {
        *slot = correlation(state, dirs)?.get();
    }
    Ok(InequalityReport::from_correlations(settings.theta, q))
}

/// Evaluates many configurations against one state. Output order follows
/// `configs`.
pub fn evaluate_batch(
    state: &PureState,
    configs: &[MeasurementConfig],
) -> Vec<Result<InequalityReport>> {
    configs.par_iter().map(|cfg| evaluate(state, cfg)).collect()
}

/// GHZ value under the explicit three-party settings:
/// `6 cos(theta/2) + 2 sin(theta/2)`.
pub fn ghz_closed_form(theta: f64) -> f64 {
    let (s, c) = (theta / 2.0).sin_cos();
    6.0 * c + 2.0 * s
}

/// `(0, 4 arctan(1/3))`: the range of theta over which the GHZ value exceeds
/// the bound.
pub fn violation_window() -> (f64, f64) {
    (0.0, 4.0 * (1.0f64 / 3.0).atan())
}

/// Upper end of the violation window located by bisection on
/// `ghz_closed_form(theta) - 6` over `[2 arctan(1/3), pi]`.
pub fn violation_window_numeric() -> (f64, f64) {
    let f = |t: f64| ghz_closed_form(t) - LEGGETT_BOUND;
    let (mut lo, mut hi) = (crate::optimal_theta(), std::f64::consts::PI);
    debug_assert!(f(lo) > 0.0 && f(hi) < 0.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.0, 0.5 * (lo + hi))
}
