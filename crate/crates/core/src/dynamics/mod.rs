//! Rotating-frame qubit and transmon dynamics.
//!
//! Hamiltonians are built from midpoint field samples and propagated step by
//! step with exact exponentials (closed systems) or a fourth-order
//! Runge-Kutta step of the master equation (open systems). The adiabatic
//! frame quantities used as ground truth live in [`adiabatic`].

pub mod adiabatic;
mod channel;
mod gate;
mod integrate;

use core::f64::consts::SQRT_2;

use nalgebra::Matrix3;

pub use adiabatic::{
    accumulated_phases, adiabatic_gate, eigenbasis_propagator, frame_rotation, PhasePair,
};
pub use channel::Channel;
pub use gate::{
    leakage, qubit_gate_fidelity, sta_channel, sta_gate, unitary_gate_fidelity, SimulationParams,
};
pub use integrate::{
    evolve_lindblad, evolve_lindblad_with, evolve_unitary, evolve_unitary_with, lindblad_channel,
    trajectory, StepRule,
};

use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_defect, CMat, Mat2, ONE, ZERO};
use crate::pulse::FieldVector;
use crate::units;

/// Number of levels kept in the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    TwoLevel,
    ThreeLevel,
}

impl Model {
    pub fn dim(&self) -> usize {
        match self {
            Model::TwoLevel => 2,
            Model::ThreeLevel => 3,
        }
    }

    pub fn from_dim(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Model::TwoLevel),
            3 => Ok(Model::ThreeLevel),
            _ => Err(Error::Dimension { expected: 3, got: d }),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Model::TwoLevel => "two_level",
            Model::ThreeLevel => "three_level",
        }
    }
}

/// `B·σ/2` (ħ = 1, rad/ns).
pub fn qubit_hamiltonian(b: &FieldVector) -> Mat2 {
    let h = 0.5;
    Mat2::new(
        c(h * b.bz, 0.0),
        c(h * b.bx, -h * b.by),
        c(h * b.bx, h * b.by),
        c(-h * b.bz, 0.0),
    )
}

/// Spin-like operators `(S_x, S_y, S_z)` of the three-level anharmonic oscillator.
pub fn transmon_operators() -> [Matrix3<crate::linalg::C64>; 3] {
    let r = c(SQRT_2, 0.0);
    let ri = c(0.0, SQRT_2);
    let sx = Matrix3::new(ZERO, ONE, ZERO, ONE, ZERO, r, ZERO, r, ZERO);
    let sy = Matrix3::new(ZERO, -crate::linalg::I, ZERO, crate::linalg::I, ZERO, -ri, ZERO, ri, ZERO);
    let sz = Matrix3::from_diagonal(&nalgebra::Vector3::new(ONE, -ONE, c(-3.0, 0.0)));
    [sx, sy, sz]
}

/// `B·S/2 + Δ2|2⟩⟨2|`.
pub fn transmon_hamiltonian(b: &FieldVector, delta2: f64) -> Matrix3<crate::linalg::C64> {
    let [sx, sy, sz] = transmon_operators();
    let mut h = (sx * c(b.bx, 0.0) + sy * c(b.by, 0.0) + sz * c(b.bz, 0.0)) * c(0.5, 0.0);
    h[(2, 2)] += c(delta2, 0.0);
    h
}

pub(crate) fn hamiltonian(model: Model, b: &FieldVector, delta2: f64) -> CMat {
    match model {
        Model::TwoLevel => {
            let h = qubit_hamiltonian(b);
            CMat::from_fn(2, 2, |i, j| h[(i, j)])
        }
        Model::ThreeLevel => {
            let h = transmon_hamiltonian(b, delta2);
            CMat::from_fn(3, 3, |i, j| h[(i, j)])
        }
    }
}

/// Time-ordered evolution operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: CMat,
    pub model: Model,
}

impl Propagator {
    pub fn identity(model: Model) -> Self {
        let d = model.dim();
        Self {
            matrix: CMat::identity(d, d),
            model,
        }
    }

    pub fn from_matrix(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Dimension {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let model = Model::from_dim(matrix.nrows())?;
        Ok(Self { matrix, model })
    }

    /// Upper-left qubit block.
    pub fn qubit_block(&self) -> Mat2 {
        crate::linalg::qubit_block(&self.matrix)
    }
}

/// Density matrix of a two- or three-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-12;
    pub const POSITIVITY_TOL: f64 = 1e-10;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMat) -> Result<Self> {
        Self::with_tolerance(matrix, Self::TRACE_TOL)
    }

    pub(crate) fn with_tolerance(matrix: CMat, trace_tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidState("matrix is not square"));
        }
        Model::from_dim(matrix.nrows())?;
        if hermiticity_defect(&matrix) > Self::HERMITICITY_TOL {
            return Err(Error::InvalidState("matrix is not Hermitian"));
        }
        if (matrix.trace() - ONE).norm() > trace_tol {
            return Err(Error::InvalidState("trace differs from one"));
        }
        let herm = (&matrix + matrix.adjoint()) * c(0.5, 0.0);
        let min_eig = herm
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &e| a.min(e));
        if min_eig < -Self::POSITIVITY_TOL {
            return Err(Error::InvalidState("matrix has a negative eigenvalue"));
        }
        Ok(Self { matrix })
    }

    /// `|ψ⟩⟨ψ|` for a state vector (normalized here).
    pub fn pure(psi: &[crate::linalg::C64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let n = v.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidState("zero state vector"));
        }
        let v = v * c(1.0 / n, 0.0);
        Self::new(&v * v.adjoint())
    }

    /// Basis projector `|k⟩⟨k|` in dimension `model.dim()`.
    pub fn basis(model: Model, k: usize) -> Self {
        let d = model.dim();
        let mut m = CMat::zeros(d, d);
        m[(k, k)] = ONE;
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn model(&self) -> Model {
        Model::from_dim(self.matrix.nrows()).expect("validated on construction")
    }

    /// Embed a qubit state into the three-level space (no-op for matching dims).
    pub fn embed(&self, model: Model) -> Self {
        let d = model.dim();
        let n = self.matrix.nrows();
        let mut m = CMat::zeros(d, d);
        for i in 0..n.min(d) {
            for j in 0..n.min(d) {
                m[(i, j)] = self.matrix[(i, j)];
            }
        }
        Self { matrix: m }
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn population(&self, k: usize) -> f64 {
        self.matrix[(k, k)].re
    }
}

/// Energy relaxation and pure dephasing times in ns. `None` disables a channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecoherenceParams {
    pub t1: Option<f64>,
    pub tphi: Option<f64>,
}

/// How a quoted `T2*` maps onto the pure-dephasing time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DephasingConvention {
    /// `Tphi = T2*`.
    #[default]
    PureDephasing,
    /// `1/Tphi = 1/T2* − 1/(2·T1)`.
    Ramsey,
}

impl DecoherenceParams {
    pub fn new(t1: Option<f64>, tphi: Option<f64>) -> Result<Self> {
        for (name, v) in [("T1", t1), ("Tphi", tphi)] {
            if let Some(v) = v {
                if !(v > 0.0) || v.is_nan() {
                    return Err(Error::InvalidParameter {
                        name: if name == "T1" { "T1" } else { "Tphi" },
                        reason: "must be positive",
                    });
                }
            }
        }
        Ok(Self { t1, tphi })
    }

    pub fn closed() -> Self {
        Self::default()
    }

    /// T1 = 20 μs, Tphi = 38 μs.
    pub fn standard() -> Self {
        Self {
            t1: Some(units::DEFAULT_T1_NS),
            tphi: Some(units::DEFAULT_TPHI_NS),
        }
    }

    pub fn from_t2_star(t1: f64, t2_star: f64, convention: DephasingConvention) -> Result<Self> {
        let tphi = match convention {
            DephasingConvention::PureDephasing => t2_star,
            DephasingConvention::Ramsey => {
                let rate = 1.0 / t2_star - 0.5 / t1;
                if !(rate > 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "Tphi",
                        reason: "T2* exceeds 2·T1; no pure dephasing remains",
                    });
                }
                1.0 / rate
            }
        };
        Self::new(Some(t1), Some(tphi))
    }

    pub fn is_closed(&self) -> bool {
        self.t1.is_none() && self.tphi.is_none()
    }

    /// Collapse operators for the given model.
    ///
    /// Relaxation: `√(1/T1)|0⟩⟨1|`, plus `√(2/T1)|1⟩⟨2|` with three levels.
    /// Dephasing: `√(1/(2·Tphi))·S_z` with `S_z = diag(1, −1[, −3])`.
    pub fn collapse_operators(&self, model: Model) -> alloc::vec::Vec<CMat> {
        let d = model.dim();
        let mut ops = alloc::vec::Vec::new();
        if let Some(t1) = self.t1 {
            let mut l = CMat::zeros(d, d);
            l[(0, 1)] = c(libm::sqrt(1.0 / t1), 0.0);
            if d == 3 {
                l[(1, 2)] = c(libm::sqrt(2.0 / t1), 0.0);
            }
            ops.push(l);
        }
        if let Some(tphi) = self.tphi {
            let g = libm::sqrt(1.0 / (2.0 * tphi));
            let mut l = CMat::zeros(d, d);
            for k in 0..d {
                l[(k, k)] = c(g * (1.0 - 2.0 * k as f64), 0.0);
            }
            ops.push(l);
        }
        ops
    }
}
