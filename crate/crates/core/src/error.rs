use thiserror::Error;

use crate::settings::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector ({x}, {y}, {z}) is not unit length (norm {norm})")]
    NonUnitVector { x: f64, y: f64, z: f64, norm: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("state is not normalized: sum |amp|^2 = {0}")]
    NotNormalized(f64),

    #[error("amplitude vector of length {0} is not 2^n for 2 <= n <= 12")]
    BadDimension(usize),

    #[error("qubit count {0} outside supported range 2..=12")]
    QubitCount(usize),

    #[error("expected {expected} directions, got {found}")]
    DirectionCount { expected: usize, found: usize },

    #[error("party count mismatch: state has {state} qubits, settings cover {config} parties")]
    PartyMismatch { state: usize, config: usize },

    #[error("expectation value has imaginary part {0:e} above tolerance")]
    ImaginaryResidual(f64),

    #[error("direction ({x}, {y}, {z}) is not in the xy-plane")]
    NotEquatorial { x: f64, y: f64, z: f64 },

    #[error("theta = {0} outside [0, pi]")]
    ThetaOutOfRange(f64),

    #[error("invalid measurement configuration: {}", format_violations(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("invalid state parameters: {0}")]
    InvalidStateParams(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("hidden variable model was built for a different configuration")]
    ModelConfigMismatch,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid scan specification: {0}")]
    InvalidScan(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
