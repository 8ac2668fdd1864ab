//! Instantaneous-eigenframe quantities of the reference field.

use libm::{cos, sin};

use crate::error::{Error, Result};
use crate::linalg::{c, cis, C64, Mat2, I, ZERO};
use crate::pulse::GatePreset;

/// `S(θ, φ)`, the rotation taking the reference basis to the instantaneous
/// eigenbasis. Its adjoint's columns are the eigenstates `|ψ₊⟩, |ψ₋⟩`.
pub fn frame_rotation(theta: f64, phi: f64) -> Mat2 {
    let (ch, sh) = (cos(0.5 * theta), sin(0.5 * theta));
    Mat2::new(
        c(ch, 0.0),
        cis(-phi) * sh,
        -cis(phi) * sh,
        c(ch, 0.0),
    )
}

/// Phases accumulated over the pulse by the two instantaneous eigenstates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePair {
    pub dynamic: f64,
    pub geometric_plus: f64,
    pub geometric_minus: f64,
    /// Largest imaginary part met while integrating `i⟨ψ±|∂ψ±⟩`; zero up to
    /// rounding for normalized states.
    pub imaginary_residual: f64,
}

impl PhasePair {
    /// `γ₊ − γ₋`.
    pub fn delta_gamma(&self) -> f64 {
        self.geometric_plus - self.geometric_minus
    }
}

pub const MIN_QUADRATURE_STEPS: usize = 1000;

/// Eigenstates and their time derivatives at `t`.
fn eigenstates(preset: &GatePreset, t: f64) -> [([C64; 2], [C64; 2]); 2] {
    let a = preset.schedule.angles(t);
    let (ch, sh) = (cos(0.5 * a.theta), sin(0.5 * a.theta));
    let (e_p, e_m) = (cis(a.phi), cis(-a.phi));
    let half_td = 0.5 * a.theta_dot;
    let plus = [c(ch, 0.0), e_p * sh];
    let d_plus = [
        c(-half_td * sh, 0.0),
        e_p * (c(half_td * ch, 0.0) + I * (a.phi_dot * sh)),
    ];
    let minus = [-e_m * sh, c(ch, 0.0)];
    let d_minus = [
        e_m * (c(-half_td * ch, 0.0) + I * (a.phi_dot * sh)),
        c(-half_td * sh, 0.0),
    ];
    [(plus, d_plus), (minus, d_minus)]
}

fn connection(psi: &[C64; 2], dpsi: &[C64; 2]) -> C64 {
    I * (psi[0].conj() * dpsi[0] + psi[1].conj() * dpsi[1])
}

/// Dynamic phase `−½∫Ω` and geometric phases `γ± = i∫⟨ψ±|∂ψ±⟩` over the
/// whole pulse by composite Simpson quadrature. The eigenstate gauge is the
/// one fixed by [`frame_rotation`]; no rephasing is applied.
pub fn accumulated_phases(preset: &GatePreset, quadrature_steps: usize) -> Result<PhasePair> {
    if quadrature_steps < MIN_QUADRATURE_STEPS {
        return Err(Error::InvalidParameter {
            name: "quadrature_steps",
            reason: "need at least 1000 quadrature steps",
        });
    }
    let n = quadrature_steps + quadrature_steps % 2;
    let duration = preset.duration();
    let h = duration / n as f64;
    let (mut omega, mut plus, mut minus) = (0.0, ZERO, ZERO);
    let mut residual = 0.0_f64;
    for k in 0..=n {
        let t = if k == n { duration } else { k as f64 * h };
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        omega += w * preset.envelope.eval(t).0;
        let [(p, dp), (m, dm)] = eigenstates(preset, t);
        let (ap, am) = (connection(&p, &dp), connection(&m, &dm));
        residual = residual.max(ap.im.abs()).max(am.im.abs());
        plus += ap * w;
        minus += am * w;
    }
    let scale = h / 3.0;
    let field_on = preset.field_form != crate::pulse::FieldForm::Idle;
    Ok(PhasePair {
        dynamic: if field_on { -0.5 * omega * scale } else { 0.0 },
        geometric_plus: plus.re * scale,
        geometric_minus: minus.re * scale,
        imaginary_residual: residual,
    })
}

/// Gate produced by perfectly adiabatic following of the reference field,
/// `S†(T)·diag(e^{i(φd+γ₊)}, e^{i(−φd+γ₋)})·S(0)`, with the global phase fixed
/// so the first diagonal factor is 1.
pub fn adiabatic_gate(preset: &GatePreset) -> Mat2 {
    let phases = accumulated_phases(preset, 20_000).expect("quadrature step count is above the minimum");
    let rel = (-phases.dynamic + phases.geometric_minus) - (phases.dynamic + phases.geometric_plus);
    let u_ad = Mat2::new(c(1.0, 0.0), ZERO, ZERO, cis(rel));
    let a0 = preset.schedule.angles(0.0);
    let a1 = preset.schedule.angles(preset.duration());
    frame_rotation(a1.theta, a1.phi).adjoint() * u_ad * frame_rotation(a0.theta, a0.phi)
}

/// Reference-basis propagator `P` re-expressed in the instantaneous
/// eigenbasis, `S(T)·P·S†(0)`; diagonal when the evolution follows the
/// eigenstates exactly.
pub fn eigenbasis_propagator(preset: &GatePreset, p: &Mat2) -> Mat2 {
    let a0 = preset.schedule.angles(0.0);
    let a1 = preset.schedule.angles(preset.duration());
    frame_rotation(a1.theta, a1.phi) * p * frame_rotation(a0.theta, a0.phi).adjoint()
}
