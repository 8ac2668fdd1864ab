//! Small dense complex linear algebra used across the crate.

use libm::{atan2, cos, sin, sqrt};
use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;

pub type C64 = Complex64;
/// Dense complex matrix of runtime dimension (2 or 3 for the qubit models).
pub type CMat = DMatrix<C64>;
/// 2×2 complex matrix (single-qubit gates).
pub type Mat2 = Matrix2<C64>;
/// 4×4 complex matrix (process matrices over the Pauli basis).
pub type Mat4 = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(angle: f64) -> C64 {
    C64::new(cos(angle), sin(angle))
}

pub fn sigma_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn sigma_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn sigma_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

/// Pauli basis in the fixed order {I, σx, σy, σz}.
pub fn pauli_basis() -> [Mat2; 4] {
    [Mat2::identity(), sigma_x(), sigma_y(), sigma_z()]
}

pub fn to_dynamic(m: &Mat2) -> CMat {
    CMat::from_fn(2, 2, |i, j| m[(i, j)])
}

/// Upper-left 2×2 block of a matrix with at least two rows and columns.
pub fn qubit_block(m: &CMat) -> Mat2 {
    Mat2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// Largest entry magnitude.
pub fn max_abs<R: nalgebra::Dim, Cc: nalgebra::Dim, S>(m: &nalgebra::Matrix<C64, R, Cc, S>) -> f64
where
    S: nalgebra::RawStorage<C64, R, Cc>,
{
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `max |M†M − I|` for a square matrix.
pub fn unitarity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - CMat::identity(n, n)))
}

pub fn hermiticity_defect(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |a, &s| a.max(s))
}

/// Entrywise distance between `u` and `v` after removing the best global
/// phase, `max |u − e^{iα} v|` with `e^{iα} = Tr(v†u)/|Tr(v†u)|`.
pub fn phase_distance(u: &CMat, v: &CMat) -> f64 {
    let overlap = (v.adjoint() * u).trace();
    let phase = if overlap.norm() > 0.0 {
        cis(atan2(overlap.im, overlap.re))
    } else {
        ONE
    };
    max_abs(&(u - v * phase))
}

pub fn phase_distance2(u: &Mat2, v: &Mat2) -> f64 {
    phase_distance(&to_dynamic(u), &to_dynamic(v))
}

/// `exp(−i·h·t)` for Hermitian `h`.
///
/// Two-level matrices use the Pauli closed form; larger ones go through a
/// Hermitian eigendecomposition, so the result is unitary to rounding.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let n = h.nrows();
    if n == 2 {
        // h = a0·I + a·σ
        let a0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
        let az = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
        let off = 0.5 * (h[(1, 0)] + h[(0, 1)].conj());
        let (ax, ay) = (off.re, off.im);
        let norm = sqrt(ax * ax + ay * ay + az * az);
        let phase = cis(-a0 * t);
        let (cs, sn) = (cos(norm * t), sin(norm * t));
        let (nx, ny, nz) = if norm > 0.0 {
            (ax / norm, ay / norm, az / norm)
        } else {
            (0.0, 0.0, 0.0)
        };
        // cos·I − i·sin·(n·σ)
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                c(cs, -sn * nz),
                c(-sn * ny, -sn * nx),
                c(sn * ny, -sn * nx),
                c(cs, sn * nz),
            ],
        );
        return m * phase;
    }
    let herm = (h + h.adjoint()) * c(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let ph = cis(-lambda * t);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    scaled * v.adjoint()
}

/// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of the qubit block of `rho`.
pub fn bloch_vector(rho: &CMat) -> [f64; 3] {
    let r01 = rho[(0, 1)];
    [2.0 * r01.re, -2.0 * r01.im, rho[(0, 0)].re - rho[(1, 1)].re]
}
