//! State and process tomography over the Pauli basis `{I, σx, σy, σz}`.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DVector, Matrix4};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::dynamics::Channel;
use crate::error::{Error, Result};
use crate::linalg::{bloch_vector, c, pauli_basis, to_dynamic, CMat, Mat2, C64, I, ONE, ZERO};

/// Labels of the χ-matrix basis, in row/column order.
pub const BASIS_LABELS: [&str; 4] = ["I", "X", "Y", "Z"];

pub const DEFAULT_READOUT_F0: f64 = 0.998;
pub const DEFAULT_READOUT_F1: f64 = 0.951;
pub const DEFAULT_SHOTS: u64 = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// Exact expectation values.
    Exact,
    /// Binomially sampled outcomes per measurement axis.
    Finite(u64),
}

/// How output states are read out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    pub shots: Shots,
    /// Probability of reading 0 when the qubit is in `|0⟩`.
    pub readout_f0: f64,
    /// Probability of reading 1 when the qubit is in `|1⟩`.
    pub readout_f1: f64,
    /// Invert the readout confusion matrix before reconstruction.
    pub mitigate_readout: bool,
}

impl MeasurementModel {
    /// Exact expectations with perfect readout.
    pub fn ideal() -> Self {
        Self {
            shots: Shots::Exact,
            readout_f0: 1.0,
            readout_f1: 1.0,
            mitigate_readout: true,
        }
    }

    pub fn new(shots: Shots, readout_f0: f64, readout_f1: f64, mitigate_readout: bool) -> Result<Self> {
        let m = Self {
            shots,
            readout_f0,
            readout_f1,
            mitigate_readout,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("readout_f0", self.readout_f0), ("readout_f1", self.readout_f1)] {
            if !(f > 0.5 && f <= 1.0) {
                return Err(Error::InvalidParameter {
                    name: if name == "readout_f0" { "readout_f0" } else { "readout_f1" },
                    reason: "readout fidelity must lie in (0.5, 1]",
                });
            }
        }
        if self.shots == Shots::Finite(0) {
            return Err(Error::InvalidParameter {
                name: "shots",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    /// Probability of reading 0 given the true probability `p0` of `|0⟩`.
    fn confused(&self, p0: f64) -> f64 {
        self.readout_f0 * p0 + (1.0 - self.readout_f1) * (1.0 - p0)
    }

    fn unconfused(&self, q0: f64) -> f64 {
        (q0 - (1.0 - self.readout_f1)) / (self.readout_f0 + self.readout_f1 - 1.0)
    }
}

impl Default for MeasurementModel {
    /// 3000 shots per axis with the measured readout fidelities, mitigated.
    fn default() -> Self {
        Self {
            shots: Shots::Finite(DEFAULT_SHOTS),
            readout_f0: DEFAULT_READOUT_F0,
            readout_f1: DEFAULT_READOUT_F1,
            mitigate_readout: true,
        }
    }
}

/// `(I + r·σ)/2`.
pub fn state_from_bloch(r: [f64; 3]) -> Mat2 {
    let [x, y, z] = r;
    Mat2::new(
        c(0.5 * (1.0 + z), 0.0),
        c(0.5 * x, -0.5 * y),
        c(0.5 * x, 0.5 * y),
        c(0.5 * (1.0 - z), 0.0),
    )
}

/// `|0⟩, |1⟩, |+⟩, |−⟩, |+i⟩, |−i⟩` as density matrices, in that order.
pub fn qpt_input_states() -> [Mat2; 6] {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let kets = [
        [ONE, ZERO],
        [ZERO, ONE],
        [h, h],
        [h, -h],
        [h, I * h],
        [h, -I * h],
    ];
    kets.map(|[a, b]| Mat2::new(a * a.conj(), a * b.conj(), b * a.conj(), b * b.conj()))
}

/// Measure `⟨σx⟩, ⟨σy⟩, ⟨σz⟩` of a qubit state under `mm` and rebuild it.
///
/// Each axis is a separate run: its `0/1` outcome probabilities pass through
/// the readout confusion matrix and, with finite shots, are binomially
/// sampled. With mitigation the confusion matrix is inverted per axis.
/// Estimates outside the Bloch ball are rescaled onto its surface.
pub fn simulate_qst<R: Rng + ?Sized>(rho: &Mat2, mm: &MeasurementModel, rng: &mut R) -> Mat2 {
    let ideal = bloch_vector(&to_dynamic(rho));
    let mut r = [0.0; 3];
    for (axis, &ri) in ideal.iter().enumerate() {
        let p0 = (0.5 * (1.0 + ri)).clamp(0.0, 1.0);
        let q0 = mm.confused(p0).clamp(0.0, 1.0);
        let q0_hat = match mm.shots {
            Shots::Exact => q0,
            Shots::Finite(n) => {
                let k = Binomial::new(n, q0).expect("probability clamped to [0, 1]").sample(rng);
                k as f64 / n as f64
            }
        };
        let p0_hat = if mm.mitigate_readout { mm.unconfused(q0_hat) } else { q0_hat };
        r[axis] = 2.0 * p0_hat - 1.0;
    }
    let norm = libm::sqrt(r.iter().map(|x| x * x).sum::<f64>());
    if norm > 1.0 {
        r = r.map(|x| x / norm);
    }
    state_from_bloch(r)
}

/// Outputs measured for the six fixed input states.
#[derive(Debug, Clone, PartialEq)]
pub struct QptDataset {
    outputs: [Mat2; 6],
}

impl QptDataset {
    /// Outputs in the order of [`qpt_input_states`].
    pub fn new(outputs: [Mat2; 6]) -> Self {
        Self { outputs }
    }

    pub fn from_vec(outputs: Vec<Mat2>) -> Result<Self> {
        let n = outputs.len();
        let outputs: [Mat2; 6] = outputs
            .try_into()
            .map_err(|_| Error::Dimension { expected: 6, got: n })?;
        Ok(Self { outputs })
    }

    pub fn inputs(&self) -> [Mat2; 6] {
        qpt_input_states()
    }

    pub fn outputs(&self) -> &[Mat2; 6] {
        &self.outputs
    }

    /// `w·self + (1 − w)·other`, output by output.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        let mut outputs = self.outputs;
        for (o, b) in outputs.iter_mut().zip(&other.outputs) {
            *o = *o * c(w, 0.0) + b * c(1.0 - w, 0.0);
        }
        Self { outputs }
    }
}

/// Drive each input state through `channel` (projected onto the qubit
/// subspace and renormalized for three-level channels) and measure it.
pub fn run_qpt<R: Rng + ?Sized>(channel: &Channel, mm: &MeasurementModel, rng: &mut R) -> QptDataset {
    let outputs = qpt_input_states().map(|rho| {
        let out = channel.apply_qubit(&to_dynamic(&rho));
        let out = Mat2::from_fn(|i, j| out[(i, j)]);
        simulate_qst(&out, mm, rng)
    });
    QptDataset { outputs }
}

/// Process matrix over `{I, σx, σy, σz}`: `ε(ρ) = Σ χ_mn E_m ρ E_n†`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiMatrix(pub Matrix4<C64>);

impl ChiMatrix {
    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.0[(m, n)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::linalg::max_abs(&(self.0 - self.0.adjoint()))
    }

    pub fn max_abs_diff(&self, other: &ChiMatrix) -> f64 {
        crate::linalg::max_abs(&(self.0 - other.0))
    }

    /// `ε(ρ)` evaluated from the χ expansion.
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let e = pauli_basis();
        let mut out = Mat2::zeros();
        for m in 0..4 {
            for n in 0..4 {
                out += e[m] * rho * e[n].adjoint() * self.0[(m, n)];
            }
        }
        out
    }
}

const RANK_TOL: f64 = 1e-10;

/// Linear-inversion estimate of χ from the six input/output pairs.
///
/// The 24 complex equations `Σ χ_mn (E_m ρ_j E_n†)_ab = ε(ρ_j)_ab` are
/// solved in the least-squares sense; no positivity constraint is imposed.
pub fn reconstruct_chi(data: &QptDataset) -> Result<ChiMatrix> {
    let e = pauli_basis();
    let inputs = data.inputs();
    let mut a = CMat::zeros(24, 16);
    let mut b = DVector::<C64>::zeros(24);
    for (j, (rho, out)) in inputs.iter().zip(data.outputs.iter()).enumerate() {
        for m in 0..4 {
            for n in 0..4 {
                let term = e[m] * rho * e[n].adjoint();
                for k in 0..4 {
                    a[(4 * j + k, 4 * m + n)] = term[(k / 2, k % 2)];
                }
            }
        }
        for k in 0..4 {
            b[4 * j + k] = out[(k / 2, k % 2)];
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * smax)
        .count();
    if rank < 16 {
        return Err(Error::RankDeficient { rank, needed: 16 });
    }
    let x = svd
        .solve(&b, RANK_TOL * smax)
        .map_err(|_| Error::RankDeficient { rank, needed: 16 })?;
    Ok(ChiMatrix(Matrix4::from_fn(|m, n| x[4 * m + n])))
}

/// χ of the unitary channel `ρ ↦ UρU†`: `χ_mn = e_m e_n*` with
/// `e_m = Tr(E_m† U)/2`.
pub fn ideal_chi(u: &Mat2) -> ChiMatrix {
    let e = pauli_basis().map(|p| (p.adjoint() * u).trace() * 0.5);
    ChiMatrix(Matrix4::from_fn(|m, n| e[m] * e[n].conj()))
}

/// `Re Tr(χ·χ_ideal)`, clamped to `[0, 1]`.
pub fn process_fidelity(chi: &ChiMatrix, chi_ideal: &ChiMatrix) -> f64 {
    let f = (chi.0 * chi_ideal.0).trace().re;
    if !(-1e-6..=1.0 + 1e-6).contains(&f) {
        log::warn!("process fidelity {f} outside [0, 1]; clamping");
    }
    f.clamp(0.0, 1.0)
}
