//! Control-field synthesis: reference field, counter-diabatic correction,
//! first-order DRAG correction and midpoint-sampled waveforms.

mod field;
mod preset;
mod schedule;

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use libm::{cos, round, sin};

pub use field::FieldVector;
pub use preset::{FieldForm, GateName, GatePreset};
pub use schedule::{omega_envelope, AngleSchedule, Angles, EnvelopeParams, ScheduleShape};

use crate::error::{Error, Result};
use schedule::check_domain;

/// Minimum number of integration steps per waveform.
pub const MIN_STEPS: usize = 100;

/// Reference field `B0(t)` of a preset.
pub fn reference_field(preset: &GatePreset, t: f64) -> Result<FieldVector> {
    check_domain(t, preset.duration())?;
    Ok(reference_field_with_rate(preset, t).0)
}

/// `B0(t)` and its analytic time derivative (no domain check).
pub fn reference_field_with_rate(preset: &GatePreset, t: f64) -> (FieldVector, FieldVector) {
    let (om, om_dot, _) = preset.envelope.eval(t);
    match preset.field_form {
        FieldForm::Idle => (FieldVector::ZERO, FieldVector::ZERO),
        FieldForm::X | FieldForm::Y => {
            let a = preset.schedule.angles(t);
            let (s, c) = (sin(a.theta), cos(a.theta));
            let transverse = om * s;
            let transverse_dot = om_dot * s + om * c * a.theta_dot;
            let long = om * c;
            let long_dot = om_dot * c - om * s * a.theta_dot;
            if preset.field_form == FieldForm::X {
                (
                    FieldVector::new(0.0, -transverse, long),
                    FieldVector::new(0.0, -transverse_dot, long_dot),
                )
            } else {
                (
                    FieldVector::new(transverse, 0.0, long),
                    FieldVector::new(transverse_dot, 0.0, long_dot),
                )
            }
        }
        FieldForm::Z => {
            let a = preset.schedule.angles(t);
            let (s, c) = (sin(a.phi), cos(a.phi));
            (
                FieldVector::new(om * c, om * s, 0.0),
                FieldVector::new(om_dot * c - om * s * a.phi_dot, om_dot * s + om * c * a.phi_dot, 0.0),
            )
        }
        FieldForm::Hadamard => {
            let (p, p_dot, _) = preset
                .schedule
                .drive_phase(t)
                .expect("Hadamard form carries a tilted schedule");
            let (s, c) = (sin(p), cos(p));
            let h = FRAC_1_SQRT_2;
            let xz = h * om * c;
            let xz_dot = h * (om_dot * c - om * s * p_dot);
            (
                FieldVector::new(xz, om * s, -xz),
                FieldVector::new(xz_dot, om_dot * s + om * c * p_dot, -xz_dot),
            )
        }
    }
}

/// Counter-diabatic field in component form:
/// `(−θ̇ sin φ − φ̇ sin θ cos θ cos φ, θ̇ cos φ − φ̇ sin θ cos θ sin φ, φ̇ sin² θ)`.
pub fn counter_diabatic_components(schedule: &AngleSchedule, t: f64) -> Result<FieldVector> {
    check_domain(t, schedule.duration())?;
    Ok(cd_from_angles(&schedule.angles(t)))
}

fn cd_from_angles(a: &Angles) -> FieldVector {
    let (st, ct) = (sin(a.theta), cos(a.theta));
    let (sp, cp) = (sin(a.phi), cos(a.phi));
    let stct = st * ct;
    FieldVector::new(
        -a.theta_dot * sp - a.phi_dot * stct * cp,
        a.theta_dot * cp - a.phi_dot * stct * sp,
        a.phi_dot * st * st,
    )
}

/// Analytic time derivative of the component-form counter-diabatic field.
fn cd_rate_from_angles(a: &Angles) -> FieldVector {
    let (st, ct) = (sin(a.theta), cos(a.theta));
    let (sp, cp) = (sin(a.phi), cos(a.phi));
    let stct = st * ct;
    let stct_dot = (ct * ct - st * st) * a.theta_dot;
    FieldVector::new(
        -a.theta_ddot * sp - a.theta_dot * cp * a.phi_dot
            - a.phi_ddot * stct * cp
            - a.phi_dot * (stct_dot * cp - stct * sp * a.phi_dot),
        a.theta_ddot * cp - a.theta_dot * sp * a.phi_dot
            - a.phi_ddot * stct * sp
            - a.phi_dot * (stct_dot * sp + stct * cp * a.phi_dot),
        a.phi_ddot * st * st + a.phi_dot * 2.0 * stct * a.theta_dot,
    )
}

/// Counter-diabatic field in cross-product form, `B0 × Ḃ0 / |B0|²`.
///
/// Singular where the reference field vanishes; synthesis uses the
/// component form and keeps this one as an independent cross-check.
pub fn counter_diabatic_cross(b0: &FieldVector, b0_dot: &FieldVector) -> Result<FieldVector> {
    let n2 = b0.norm_squared();
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::SingularField);
    }
    Ok(b0.cross(b0_dot) * (1.0 / n2))
}

/// First-order DRAG field for combined field `b = B0 + B_cd` with rate `b_dot`.
pub fn drag_correction(b: &FieldVector, b_dot: &FieldVector, delta2: f64) -> Result<FieldVector> {
    if delta2 == 0.0 || !delta2.is_finite() {
        return Err(Error::InvalidAnharmonicity);
    }
    let k = 1.0 / (2.0 * delta2);
    Ok(FieldVector::new(
        k * (b_dot.by - b.bz * b.bx),
        -k * (b_dot.bx + b.bz * b.by),
        0.0,
    ))
}

/// Which corrections are added to the reference field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Corrections {
    pub counter_diabatic: bool,
    pub drag: bool,
}

impl Corrections {
    pub const REFERENCE: Self = Self {
        counter_diabatic: false,
        drag: false,
    };
    pub const CD: Self = Self {
        counter_diabatic: true,
        drag: false,
    };
    pub const CD_DRAG: Self = Self {
        counter_diabatic: true,
        drag: true,
    };

    pub fn validate(&self) -> Result<()> {
        if self.drag && !self.counter_diabatic {
            Err(Error::CorrectionFlags)
        } else {
            Ok(())
        }
    }

    /// Short label: `reference`, `cd` or `cd_drag`.
    pub fn label(&self) -> &'static str {
        match (self.counter_diabatic, self.drag) {
            (false, false) => "reference",
            (true, false) => "cd",
            (true, true) => "cd_drag",
            (false, true) => "drag",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "reference" => Some(Self::REFERENCE),
            "cd" => Some(Self::CD),
            "cd_drag" => Some(Self::CD_DRAG),
            _ => None,
        }
    }
}

/// Field with the requested corrections at `t` (no domain check).
pub fn total_field(
    preset: &GatePreset,
    corrections: Corrections,
    t: f64,
    delta2: f64,
) -> Result<FieldVector> {
    let (b0, b0_dot) = reference_field_with_rate(preset, t);
    if !corrections.counter_diabatic {
        return Ok(b0);
    }
    let angles = preset.schedule.angles(t);
    let b = b0 + cd_from_angles(&angles);
    if !corrections.drag {
        return Ok(b);
    }
    let b_dot = b0_dot + cd_rate_from_angles(&angles);
    Ok(b + drag_correction(&b, &b_dot, delta2)?)
}

/// Midpoint-sampled control field.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlWaveform {
    dt: f64,
    samples: Vec<FieldVector>,
    provenance: Corrections,
}

impl ControlWaveform {
    pub fn new(dt: f64, samples: Vec<FieldVector>, provenance: Corrections) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: "must be positive and finite",
            });
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "waveform must be nonempty",
            });
        }
        if samples.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "field components must be finite",
            });
        }
        Ok(Self {
            dt,
            samples,
            provenance,
        })
    }

    /// Constant field held for `duration` over `steps` samples.
    pub fn constant(b: FieldVector, duration: f64, steps: usize) -> Result<Self> {
        Self::new(duration / steps as f64, alloc::vec![b; steps.max(1)], Corrections::REFERENCE)
    }

    pub fn zero(duration: f64, steps: usize) -> Result<Self> {
        Self::constant(FieldVector::ZERO, duration, steps)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    pub fn samples(&self) -> &[FieldVector] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn provenance(&self) -> Corrections {
        self.provenance
    }

    /// Sample times `(k + ½)·dt`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |k| (k as f64 + 0.5) * self.dt)
    }
}

/// Number of steps for spacing `dt` over `duration`, validated.
pub fn step_count(duration: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "must be positive and finite",
        });
    }
    let steps = round(duration / dt);
    if (steps * dt - duration).abs() > 1e-9 * duration {
        return Err(Error::Grid { dt, duration });
    }
    let steps = steps as usize;
    if steps < MIN_STEPS {
        return Err(Error::Resolution {
            steps,
            min: MIN_STEPS,
        });
    }
    Ok(steps)
}

/// Sample the preset's field at step midpoints.
pub fn synthesize_waveform(
    preset: &GatePreset,
    corrections: Corrections,
    dt: f64,
    delta2: f64,
) -> Result<ControlWaveform> {
    corrections.validate()?;
    if corrections.drag && (delta2 == 0.0 || !delta2.is_finite()) {
        return Err(Error::InvalidAnharmonicity);
    }
    let duration = preset.duration();
    let steps = step_count(duration, dt)?;
    let dt = duration / steps as f64;
    let samples = (0..steps)
        .map(|k| total_field(preset, corrections, (k as f64 + 0.5) * dt, delta2))
        .collect::<Result<Vec<_>>>()?;
    ControlWaveform::new(dt, samples, corrections)
}
