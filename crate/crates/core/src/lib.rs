//! Numerical laboratory for multipartite Leggett-type inequalities.
//!
//! The crate is split along the lines of the computation:
//!
//! - [`quantum`]: dense n-qubit statevectors and full correlation functions
//!   `<(a.sigma) (x) (b.sigma) (x) ...>`.
//! - [`settings`]: Alice's three setting pairs tied to an orthonormal triad,
//!   the partners' settings, and a feasible-by-construction parametrization.
//! - [`inequality`]: the value `I_n = sum_i |Q_i + Q_i'| + 2|sin(theta/2)|`
//!   against the non-local hidden variable bound 6.
//! - [`states`]: GHZ, generalized W and five-parameter three-qubit states.
//! - [`nlhv`]: probability decompositions, positivity constraints and
//!   Monte Carlo checks of the bound for sampled Leggett models.
//! - [`optimizer`]: multi-start downhill simplex and parameter scans.

pub mod error;
pub mod inequality;
pub mod nlhv;
pub mod optimizer;
pub mod quantum;
pub mod settings;
pub mod states;

mod vec3;

pub use error::{Error, Result};
pub use inequality::{evaluate, ghz_closed_form, InequalityReport, LEGGETT_BOUND};
pub use quantum::{correlation, BlochVector, CorrelationValue, PureState};
pub use settings::{reference_settings, MeasurementConfig, Violation};
pub use states::StateFamilySpec;

/// Angle at which the GHZ value peaks: `2 arctan(1/3)`.
pub fn optimal_theta() -> f64 {
    2.0 * (1.0f64 / 3.0).atan()
}

/// Maximal quantum value `2 sqrt(10)`.
pub fn max_quantum_value() -> f64 {
    2.0 * 10f64.sqrt()
}
