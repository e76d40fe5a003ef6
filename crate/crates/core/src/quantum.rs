//! Dense statevectors and full n-party correlation functions.
//!
//! Basis index convention: qubit 0 (Alice) is the most significant bit, so
//! `|100>` of a three-qubit register is index 4.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};

/// Tolerance for unit-norm and normalization checks.
pub const UNIT_TOL: f64 = 1e-9;

/// Largest imaginary part of `<psi|O|psi>` accepted before it is treated as
/// an internal inconsistency.
pub const IMAG_TOL: f64 = 1e-9;

pub const MIN_QUBITS: usize = 2;
pub const MAX_QUBITS: usize = 12;

/// 2x2 complex matrix, row-major.
pub type Matrix2 = [[Complex64; 2]; 2];

/// A measurement direction on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BlochVector {
    x: f64,
    y: f64,
    z: f64,
}

impl BlochVector {
    pub const X: BlochVector = BlochVector {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: BlochVector = BlochVector {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const Z: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::NonFinite("Bloch vector component"));
        }
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitVector { x, y, z, norm });
        }
        Ok(Self { x, y, z })
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(v: Vec3) -> Result<Self> {
        let n = vec3::norm(&v);
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NonFinite(
                "cannot normalize zero or non-finite vector",
            ));
        }
        Ok(Self {
            x: v[0] / n,
            y: v[1] / n,
            z: v[2] / n,
        })
    }

    /// Direction from polar angle (from +z) and azimuth (from +x).
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let [x, y, z] = vec3::spherical(polar, azimuth);
        Self { x, y, z }
    }

    /// Unit vector in the xy-plane at angle `phase` from +x.
    pub fn equatorial(phase: f64) -> Self {
        let (s, c) = phase.sin_cos();
        Self { x: c, y: s, z: 0.0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(self) -> Vec3 {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn flipped(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

impl TryFrom<[f64; 3]> for BlochVector {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<BlochVector> for [f64; 3] {
    fn from(v: BlochVector) -> Self {
        v.to_array()
    }
}

impl fmt::Display for BlochVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Expectation value of a product of `+-1`-valued observables.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelationValue(f64);

impl CorrelationValue {
    pub fn new(value: f64) -> Self {
        Self(value)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<CorrelationValue> for f64 {
    fn from(v: CorrelationValue) -> f64 {
        v.0
    }
}

/// `x sigma_x + y sigma_y + z sigma_z`.
pub fn pauli_dot(direction: &BlochVector) -> Matrix2 {
    pauli_dot_components(direction.to_array())
}

/// Linear extension of [`pauli_dot`] to arbitrary real 3-vectors.
pub fn pauli_dot_components(v: Vec3) -> Matrix2 {
    let [x, y, z] = v;
    [
        [Complex64::new(z, 0.0), Complex64::new(x, -y)],
        [Complex64::new(x, y), Complex64::new(-z, 0.0)],
    ]
}

/// Normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        let n = qubits_for_len(len).ok_or(Error::BadDimension(len))?;
        if amplitudes
            .iter()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::NonFinite("state amplitude"));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { n, amplitudes })
    }

    /// Normalizes `amplitudes` before building the state.
    pub fn from_unnormalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NotNormalized(norm * norm));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::new(amplitudes)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if !(MIN_QUBITS..=MAX_QUBITS).contains(&n) {
            return Err(Error::QubitCount(n));
        }
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::InvalidStateParams(format!(
                "basis index {index} >= {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let f = Complex64::from_polar(1.0, phase);
        Self {
            n: self.n,
            amplitudes: self.amplitudes.iter().map(|a| a * f).collect(),
        }
    }
}

fn qubits_for_len(len: usize) -> Option<usize> {
    if !len.is_power_of_two() {
        return None;
    }
    let n = len.trailing_zeros() as usize;
    (MIN_QUBITS..=MAX_QUBITS).contains(&n).then_some(n)
}

/// Applies a single-qubit operator to `qubit` in place.
fn apply_single_qubit(amps: &mut [Complex64], n: usize, qubit: usize, m: &Matrix2) {
    let stride = 1usize << (n - 1 - qubit);
    let block = stride << 1;
    for base in (0..amps.len()).step_by(block) {
        for lo in base..base + stride {
            let hi = lo + stride;
            let (a0, a1) = (amps[lo], amps[hi]);
            amps[lo] = m[0][0] * a0 + m[0][1] * a1;
            amps[hi] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

/// `<psi| M_0 (x) M_1 (x) ... |psi>` for arbitrary 2x2 factors.
///
/// Cost is `n 2^n`; the tensor product is never materialized.
pub fn expectation_of_product(state: &PureState, factors: &[Matrix2]) -> Result<Complex64> {
    if factors.len() != state.n {
        return Err(Error::DirectionCount {
            expected: state.n,
            found: factors.len(),
        });
    }
    let mut phi = state.amplitudes.clone();
    for (qubit, m) in factors.iter().enumerate() {
        apply_single_qubit(&mut phi, state.n, qubit, m);
    }
    Ok(state
        .amplitudes
        .iter()
        .zip(&phi)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Full correlation `<psi| (d_0.sigma) (x) ... (x) (d_{n-1}.sigma) |psi>`.
pub fn correlation(state: &PureState, directions: &[BlochVector]) -> Result<CorrelationValue> {
    if directions.len() != state.n {
        return Err(Error::DirectionCount {
            expected: state.n,
            found: directions.len(),
        });
    }
    let factors: Vec<Matrix2> = directions.iter().map(pauli_dot).collect();
    let value = expectation_of_product(state, &factors)?;
    if value.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidual(value.im));
    }
    Ok(CorrelationValue(value.re))
}

/// Closed-form GHZ_n correlation for directions in the xy-plane:
/// `Re prod_k (x_k - i y_k)`.
pub fn ghz_correlation_oracle(directions: &[BlochVector]) -> Result<CorrelationValue> {
    let mut prod = Complex64::new(1.0, 0.0);
    for d in directions {
        if d.z.abs() > UNIT_TOL {
            return Err(Error::NotEquatorial {
                x: d.x,
                y: d.y,
                z: d.z,
            });
        }
        prod *= Complex64::new(d.x, -d.y);
    }
    Ok(CorrelationValue(prod.re))
}
