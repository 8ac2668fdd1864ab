//! Clifford randomized benchmarking, reference and interleaved.

mod clifford;
mod fit;
mod rb;

pub use clifford::{build_clifford_table, random_rb_sequence, CliffordElement, CliffordTable, CLIFFORD_ORDER, GENERATORS};
pub use fit::{
    average_error, fit_decay, interleaved_gate_fidelity, interleaved_gate_fidelity_with_errors, GateFidelity, RbFit,
};
pub use rb::{
    run_interleaved_rb, run_rb, sample_seed, CurveKind, RbConfig, RbCurve, RbExperiment, RbMode, RbPoint,
    DEFAULT_LENGTHS, DEFAULT_RANDOMIZATIONS,
};
