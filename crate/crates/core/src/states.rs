//! State families: GHZ_n, the generalized three-qubit W family and the
//! five-parameter canonical form of an arbitrary three-qubit pure state.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{PureState, MAX_QUBITS, MIN_QUBITS};

const MU_SUM_TOL: f64 = 1e-12;

/// Serializable description of a state.
///
/// JSON form is internally tagged, e.g. `{"family": "ghz", "n": 3}` or
/// `{"family": "arbitrary3", "mu": [0.5, 0, 0, 0, 0.5], "phi": 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum StateFamilySpec {
    Ghz {
        n: usize,
    },
    W3 {
        xi: f64,
        eta: f64,
    },
    Arbitrary3 {
        mu: [f64; 5],
        phi: f64,
    },
    /// Explicit amplitudes as `[re, im]` pairs; normalized on build.
    Explicit {
        amplitudes: Vec<[f64; 2]>,
    },
}

impl StateFamilySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Ghz { n } => check_qubits(*n),
            Self::W3 { xi, eta } => {
                if xi.is_finite() && eta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::NonFinite("W-state angle"))
                }
            }
            Self::Arbitrary3 { mu, phi } => check_arbitrary3(mu, *phi),
            Self::Explicit { amplitudes } => self_explicit(amplitudes).map(|_| ()),
        }
    }

    pub fn build(&self) -> Result<PureState> {
        match self {
            Self::Ghz { n } => ghz(*n),
            Self::W3 { xi, eta } => {
                self.validate()?;
                Ok(w3(*xi, *eta))
            }
            Self::Arbitrary3 { mu, phi } => arbitrary3(*mu, *phi),
            Self::Explicit { amplitudes } => self_explicit(amplitudes),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Self::Ghz { n } => *n,
            Self::W3 { .. } | Self::Arbitrary3 { .. } => 3,
            Self::Explicit { amplitudes } => amplitudes.len().trailing_zeros() as usize,
        }
    }
}

fn self_explicit(amplitudes: &[[f64; 2]]) -> Result<PureState> {
    PureState::from_unnormalized(
        amplitudes
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect(),
    )
}

fn check_qubits(n: usize) -> Result<()> {
    if (MIN_QUBITS..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::QubitCount(n))
    }
}

fn check_arbitrary3(mu: &[f64; 5], phi: f64) -> Result<()> {
    if mu
        .iter()
        .chain(std::iter::once(&phi))
        .any(|v| !v.is_finite())
    {
        return Err(Error::NonFinite("arbitrary3 parameter"));
    }
    if let Some(m) = mu.iter().find(|&&m| m < 0.0) {
        return Err(Error::InvalidStateParams(format!(
            "mu entry {m} is negative"
        )));
    }
    let sum: f64 = mu.iter().sum();
    if (sum - 1.0).abs() > MU_SUM_TOL {
        return Err(Error::InvalidStateParams(format!(
            "mu sums to {sum}, expected 1"
        )));
    }
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(Error::InvalidStateParams(format!(
            "phi = {phi} outside [0, pi]"
        )));
    }
    Ok(())
}

/// `(|0...0> + |1...1>)/sqrt(2)`.
pub fn ghz(n: usize) -> Result<PureState> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[0] = Complex64::new(h, 0.0);
    amps[dim - 1] = Complex64::new(h, 0.0);
    PureState::new(amps)
}

/// `sin(xi) cos(eta)|100> + sin(xi) sin(eta)|010> + cos(xi)|001>`.
pub fn w3(xi: f64, eta: f64) -> PureState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[0b100] = Complex64::new(xi.sin() * eta.cos(), 0.0);
    amps[0b010] = Complex64::new(xi.sin() * eta.sin(), 0.0);
    amps[0b001] = Complex64::new(xi.cos(), 0.0);
    PureState::new(amps).expect("W family is normalized for all angles")
}

/// `sqrt(mu0)|000> + sqrt(mu1) e^{i phi}|100> + sqrt(mu2)|101> + sqrt(mu3)|110> + sqrt(mu4)|111>`.
pub fn arbitrary3(mu: [f64; 5], phi: f64) -> Result<PureState> {
    check_arbitrary3(&mu, phi)?;
    Ok(arbitrary3_unchecked(mu, phi))
}

/// Same as [`arbitrary3`] without domain checks; `mu` must still sum to 1.
pub(crate) fn arbitrary3_unchecked(mu: [f64; 5], phi: f64) -> PureState {
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[0b000] = Complex64::new(mu[0].sqrt(), 0.0);
    amps[0b100] = Complex64::from_polar(mu[1].sqrt(), phi);
    amps[0b101] = Complex64::new(mu[2].sqrt(), 0.0);
    amps[0b110] = Complex64::new(mu[3].sqrt(), 0.0);
    amps[0b111] = Complex64::new(mu[4].sqrt(), 0.0);
    PureState::from_unnormalized(amps).expect("mu on the simplex")
}
