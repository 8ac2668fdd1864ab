use thiserror::Error;

use crate::benchmarking::RbFit;
use crate::pulse::GateName;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("time {t} ns lies outside the pulse window [0, {duration}] ns")]
    Domain { t: f64, duration: f64 },

    #[error("reference field vanishes; the cross-product form is singular")]
    SingularField,

    #[error("anharmonicity must be nonzero for the DRAG correction")]
    InvalidAnharmonicity,

    #[error("waveform resolution too coarse: {steps} steps (need at least {min})")]
    Resolution { steps: usize, min: usize },

    #[error("sample spacing {dt} ns does not divide the duration {duration} ns")]
    Grid { dt: f64, duration: f64 },

    #[error("DRAG correction requires the counter-diabatic correction to be enabled")]
    CorrectionFlags,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("{what}: deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    IntegrationFailure {
        what: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("matrix dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(&'static str),

    #[error("process reconstruction is rank deficient (rank {rank} of {needed})")]
    RankDeficient { rank: usize, needed: usize },

    #[error("Clifford enumeration produced {found} distinct elements instead of 24")]
    CliffordConstruction { found: usize },

    #[error("gate {0} is not a member of the single-qubit Clifford group")]
    UnsupportedGate(GateName),

    #[error("decay fit failed: {kind}")]
    Fit { kind: FitFailure, best: Option<RbFit> },

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FitFailure {
    #[error("need at least 4 distinct sequence lengths, got {0}")]
    TooFewPoints(usize),
    #[error("data show no decay; the depolarizing parameter is indeterminate")]
    Degenerate,
    #[error("no convergence within the iteration budget")]
    NotConverged,
    #[error("fitted decay parameter outside (0, 1]")]
    OutOfRange,
}
