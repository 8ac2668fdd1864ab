use crate::error::{Error, Result};
use crate::linalg::{c, CMat, ONE};

/// Linear map on `d×d` density matrices stored as a `d²×d²` superoperator
/// acting on the row-major vectorization, `vec(ρ)[i·d + j] = ρ_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    superop: CMat,
    dim: usize,
}

impl Channel {
    pub fn from_superoperator(superop: CMat) -> Result<Self> {
        let n = superop.nrows();
        let dim = libm::round(libm::sqrt(n as f64)) as usize;
        if superop.ncols() != n || dim * dim != n {
            return Err(Error::Dimension {
                expected: dim * dim,
                got: n,
            });
        }
        Ok(Self { superop, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            superop: CMat::identity(dim * dim, dim * dim),
            dim,
        }
    }

    /// `ρ ↦ UρU†`, i.e. `U ⊗ conj(U)` on row-major vectors.
    pub fn from_unitary(u: &CMat) -> Self {
        let d = u.nrows();
        let superop = CMat::from_fn(d * d, d * d, |r, s| {
            let (i, j) = (r / d, r % d);
            let (k, l) = (s / d, s % d);
            u[(i, k)] * u[(j, l)].conj()
        });
        Self { superop, dim: d }
    }

    /// `ρ ↦ p·ρ + (1 − p)·Tr(ρ)·I/d`.
    pub fn depolarizing(dim: usize, p: f64) -> Self {
        let n = dim * dim;
        let mut superop = CMat::identity(n, n) * c(p, 0.0);
        let w = c((1.0 - p) / dim as f64, 0.0);
        for a in 0..dim {
            for b in 0..dim {
                superop[(a * dim + a, b * dim + b)] += w;
            }
        }
        Self { superop, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superoperator(&self) -> &CMat {
        &self.superop
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let d = self.dim;
        let v = nalgebra::DVector::from_fn(d * d, |r, _| rho[(r / d, r % d)]);
        let out = &self.superop * v;
        CMat::from_fn(d, d, |i, j| out[i * d + j])
    }

    /// This channel followed by `next`.
    pub fn then(&self, next: &Channel) -> Channel {
        Channel {
            superop: &next.superop * &self.superop,
            dim: self.dim,
        }
    }

    /// Apply to a qubit state: embed into the channel's space, evolve, keep
    /// the qubit block and renormalize it to unit trace.
    pub fn apply_qubit(&self, rho: &CMat) -> CMat {
        let d = self.dim;
        let mut full = CMat::zeros(d, d);
        for i in 0..2 {
            for j in 0..2 {
                full[(i, j)] = rho[(i, j)];
            }
        }
        let out = self.apply(&full);
        let block = out.view((0, 0), (2, 2)).into_owned();
        let tr = block.trace();
        if d == 2 || tr.norm() == 0.0 {
            block
        } else {
            block * (ONE / tr)
        }
    }
}
