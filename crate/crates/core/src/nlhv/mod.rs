//! Non-local hidden variable side of the inequality.
//!
//! A three-party subensemble distribution `P(alpha, beta, gamma)` over
//! outcomes `+-1` is equivalent to seven signed moments (the L-coefficients)
//! through
//!
//! `P = 1/8 [1 + alpha L_A + beta L_B + gamma L_C + alpha beta L_AB
//!          + alpha gamma L_AC + beta gamma L_BC + alpha beta gamma L_ABC]`.
//!
//! Positivity of the eight probabilities is the only constraint; the checks
//! here follow the chain from positivity to the single-pair step inequality
//! `|L_A +- L_BC| <= 1 +- L_ABC`, then to the two-setting triangle step, and
//! finally to the bound 6 on sampled models.

mod model;
pub mod verify;

pub use model::{
    model_inequality_value, sample_leggett_model, sample_leggett_model_with, sample_malus_pair,
    sample_subensemble, EnsembleModel, ModelVariant, PolarizationCoupling, SamplerOptions,
    Subensemble, SubensembleDistribution,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::BlochVector;

/// Tolerance for probability sums and the derived inequalities.
pub const PROB_TOL: f64 = 1e-12;

/// Outcomes `(alpha, beta, gamma)` in the order of the eight positivity
/// constraints: `+++, ++-, +-+, +--, -++, -+-, --+, ---`.
pub const OUTCOMES: [(f64, f64, f64); 8] = [
    (1.0, 1.0, 1.0),
    (1.0, 1.0, -1.0),
    (1.0, -1.0, 1.0),
    (1.0, -1.0, -1.0),
    (-1.0, 1.0, 1.0),
    (-1.0, 1.0, -1.0),
    (-1.0, -1.0, 1.0),
    (-1.0, -1.0, -1.0),
];

/// Marginals and correlation coefficients of one subensemble distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub ab: f64,
    pub ac: f64,
    pub bc: f64,
    pub abc: f64,
}

impl LCoefficients {
    pub const ZERO: LCoefficients = LCoefficients {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        ab: 0.0,
        ac: 0.0,
        bc: 0.0,
        abc: 0.0,
    };

    /// `1 + alpha L_A + ... + alpha beta gamma L_ABC` for one outcome, i.e.
    /// eight times its probability.
    pub fn weighted_mass(&self, (al, be, ga): (f64, f64, f64)) -> f64 {
        1.0 + al * self.a
            + be * self.b
            + ga * self.c
            + al * be * self.ab
            + al * ga * self.ac
            + be * ga * self.bc
            + al * be * ga * self.abc
    }

    /// Rebuilds the outcome distribution.
    pub fn probabilities(&self) -> [f64; 8] {
        OUTCOMES.map(|o| self.weighted_mass(o) / 8.0)
    }
}

fn check_distribution(probs: &[f64; 8]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidDistribution("non-finite probability".into()));
    }
    if let Some(p) = probs.iter().find(|&&p| p < -PROB_TOL) {
        return Err(Error::InvalidDistribution(format!(
            "negative probability {p}"
        )));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {sum}"
        )));
    }
    Ok(())
}

/// Signed moments of an eight-outcome distribution.
pub fn l_coefficients(probs: &[f64; 8]) -> Result<LCoefficients> {
    check_distribution(probs)?;
    let mut l = LCoefficients::ZERO;
    for (p, &(al, be, ga)) in probs.iter().zip(&OUTCOMES) {
        l.a += al * p;
        l.b += be * p;
        l.c += ga * p;
        l.ab += al * be * p;
        l.ac += al * ga * p;
        l.bc += be * ga * p;
        l.abc += al * be * ga * p;
    }
    Ok(l)
}

/// Left-hand sides of the eight positivity constraints, in [`OUTCOMES`] order.
/// All are nonnegative iff `l` comes from a genuine distribution.
pub fn check_positivity(l: &LCoefficients) -> [f64; 8] {
    OUTCOMES.map(|o| l.weighted_mass(o))
}

/// Largest value of `|L_A +- L_BC| - (1 +- L_ABC)` over both signs;
/// nonpositive when the step inequality holds.
pub fn step_inequality_slack(l: &LCoefficients) -> f64 {
    let plus = (l.a + l.bc).abs() - (1.0 + l.abc);
    let minus = (l.a - l.bc).abs() - (1.0 - l.abc);
    plus.max(minus)
}

/// `|L_A +- L_BC| <= 1 +- L_ABC` for both signs, within [`PROB_TOL`].
pub fn check_step_inequality(l: &LCoefficients) -> bool {
    step_inequality_slack(l) <= PROB_TOL
}

/// One evaluation of `|alpha +- beta gamma| -+ alpha beta gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignIdentityCase {
    pub alpha: i8,
    pub beta: i8,
    pub gamma: i8,
    /// `+1` for the upper signs, `-1` for the lower.
    pub branch: i8,
    pub value: i8,
}

/// All 16 evaluations of the sign identity (8 outcomes, two branches).
pub fn sign_identity_cases() -> Vec<SignIdentityCase> {
    let mut out = Vec::with_capacity(16);
    for &(al, be, ga) in &OUTCOMES {
        let (al, be, ga) = (al as i8, be as i8, ga as i8);
        for branch in [1i8, -1] {
            let value = (al + branch * be * ga).abs() - branch * al * be * ga;
            out.push(SignIdentityCase {
                alpha: al,
                beta: be,
                gamma: ga,
                branch,
                value,
            });
        }
    }
    out
}

/// `|alpha +- beta gamma| -+ alpha beta gamma = 1` for every sign assignment.
pub fn check_sign_identity() -> bool {
    sign_identity_cases().iter().all(|c| c.value == 1)
}

/// Largest value of
/// `|L_ABC(a) +- L_ABC(a')| + |u.a -+ u.a'| - 2` over both signs.
pub fn triangle_step_slack(
    l_abc: (f64, f64),
    u: &BlochVector,
    a: &BlochVector,
    a_prime: &BlochVector,
) -> f64 {
    let (ua, uap) = (u.dot(a), u.dot(a_prime));
    let plus = (l_abc.0 + l_abc.1).abs() + (ua - uap).abs() - 2.0;
    let minus = (l_abc.0 - l_abc.1).abs() + (ua + uap).abs() - 2.0;
    plus.max(minus)
}

/// `|L_ABC(a) +- L_ABC(a')| + |u.a -+ u.a'| <= 2` for both signs.
pub fn check_triangle_step(
    l_abc: (f64, f64),
    u: &BlochVector,
    a: &BlochVector,
    a_prime: &BlochVector,
) -> bool {
    triangle_step_slack(l_abc, u, a, a_prime) <= PROB_TOL
}

/// Point mass on outcome `index` of [`OUTCOMES`].
pub fn vertex(index: usize) -> [f64; 8] {
    let mut p = [0.0; 8];
    p[index] = 1.0;
    p
}
