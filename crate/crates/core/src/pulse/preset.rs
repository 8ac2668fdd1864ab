use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{c, cis, Mat2, ONE, ZERO};
use crate::units;

use super::schedule::{AngleSchedule, EnvelopeParams, ScheduleShape};

/// Gate presets. Names match the identifiers used in configs and file names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateName {
    Identity,
    XPi,
    XHalf,
    XNegHalf,
    YPi,
    YHalf,
    YNegHalf,
    ZPi,
    ZHalf,
    Hadamard,
}

impl GateName {
    pub const ALL: [GateName; 10] = [
        GateName::XPi,
        GateName::XHalf,
        GateName::XNegHalf,
        GateName::YPi,
        GateName::YHalf,
        GateName::YNegHalf,
        GateName::ZPi,
        GateName::ZHalf,
        GateName::Hadamard,
        GateName::Identity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GateName::Identity => "Identity",
            GateName::XPi => "X_pi",
            GateName::XHalf => "X_half",
            GateName::XNegHalf => "X_neg_half",
            GateName::YPi => "Y_pi",
            GateName::YHalf => "Y_half",
            GateName::YNegHalf => "Y_neg_half",
            GateName::ZPi => "Z_pi",
            GateName::ZHalf => "Z_half",
            GateName::Hadamard => "Hadamard",
        }
    }

    /// Ideal gate unitary.
    pub fn target_unitary(&self) -> Mat2 {
        let h = FRAC_1_SQRT_2;
        let r = |a: f64| c(a * h, 0.0);
        let im = |a: f64| c(0.0, a * h);
        match self {
            GateName::Identity => Mat2::identity(),
            GateName::XPi => Mat2::new(ZERO, c(0.0, -1.0), c(0.0, -1.0), ZERO),
            GateName::XHalf => Mat2::new(r(1.0), im(-1.0), im(-1.0), r(1.0)),
            GateName::XNegHalf => Mat2::new(r(1.0), im(1.0), im(1.0), r(1.0)),
            GateName::YPi => Mat2::new(ZERO, -ONE, ONE, ZERO),
            GateName::YHalf => Mat2::new(r(1.0), r(-1.0), r(1.0), r(1.0)),
            GateName::YNegHalf => Mat2::new(r(1.0), r(1.0), r(-1.0), r(1.0)),
            GateName::ZPi => Mat2::new(c(0.0, -1.0), ZERO, ZERO, c(0.0, 1.0)),
            GateName::ZHalf => Mat2::new(cis(-FRAC_PI_4), ZERO, ZERO, cis(FRAC_PI_4)),
            GateName::Hadamard => Mat2::new(r(1.0), r(1.0), r(1.0), r(-1.0)),
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateName::ALL
            .iter()
            .copied()
            .find(|g| g.as_str() == s)
            .or(match s {
                "H" => Some(GateName::Hadamard),
                "I" => Some(GateName::Identity),
                _ => None,
            })
            .ok_or(Error::InvalidParameter {
                name: "preset",
                reason: "unknown gate name",
            })
    }
}

/// Component layout of the reference field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldForm {
    /// `(0, −Ω sin θ, Ω cos θ)`
    X,
    /// `(Ω sin θ, 0, Ω cos θ)`
    Y,
    /// `(Ω cos φ, Ω sin φ, 0)`
    Z,
    /// `((√2/2)Ω cos ϕ, Ω sin ϕ, −(√2/2)Ω cos ϕ)`
    Hadamard,
    /// No field.
    Idle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatePreset {
    pub name: GateName,
    pub schedule: AngleSchedule,
    pub envelope: EnvelopeParams,
    pub field_form: FieldForm,
    pub target_unitary: Mat2,
}

impl GatePreset {
    pub fn new(name: GateName, envelope: EnvelopeParams) -> Self {
        let (form, shape) = match name {
            GateName::Identity => (FieldForm::Idle, ScheduleShape::Fixed { theta: 0.0, phi: 0.0 }),
            GateName::XPi => (FieldForm::X, polar(FRAC_PI_2, -FRAC_PI_2)),
            GateName::XHalf => (FieldForm::X, polar(FRAC_PI_4, -FRAC_PI_2)),
            GateName::XNegHalf => (FieldForm::X, polar(-FRAC_PI_4, -FRAC_PI_2)),
            GateName::YPi => (FieldForm::Y, polar(FRAC_PI_2, 0.0)),
            GateName::YHalf => (FieldForm::Y, polar(FRAC_PI_4, 0.0)),
            GateName::YNegHalf => (FieldForm::Y, polar(-FRAC_PI_4, 0.0)),
            GateName::ZPi => (FieldForm::Z, azimuthal(FRAC_PI_2)),
            GateName::ZHalf => (FieldForm::Z, azimuthal(FRAC_PI_4)),
            GateName::Hadamard => (FieldForm::Hadamard, ScheduleShape::TiltedSweep { span: FRAC_PI_2 }),
        };
        let schedule = AngleSchedule::new(shape, envelope.duration())
            .expect("envelope duration already validated");
        Self {
            name,
            schedule,
            envelope,
            field_form: form,
            target_unitary: name.target_unitary(),
        }
    }

    /// Preset at the default drive (A/2π = 20 MHz, T = 30 ns).
    pub fn standard(name: GateName) -> Self {
        let env = EnvelopeParams::new(
            units::mhz_to_rad_per_ns(units::DEFAULT_AMPLITUDE_MHZ),
            units::DEFAULT_DURATION_NS,
        )
        .expect("defaults are valid");
        Self::new(name, env)
    }

    pub fn duration(&self) -> f64 {
        self.envelope.duration()
    }

    /// Designed terminal `(θ(T), φ(T))`.
    pub fn terminal_angles(&self) -> (f64, f64) {
        match self.schedule.shape() {
            ScheduleShape::Fixed { theta, phi } => (theta, phi),
            ScheduleShape::PolarSweep { span, phi } => (2.0 * span, phi),
            ScheduleShape::AzimuthalSweep { theta, span } => (theta, 2.0 * span),
            // direction (−1/√2, 0, 1/√2) after ϕ sweeps 0 → π
            ScheduleShape::TiltedSweep { .. } => (FRAC_PI_4, PI),
        }
    }
}

fn polar(span: f64, phi: f64) -> ScheduleShape {
    ScheduleShape::PolarSweep { span, phi }
}

fn azimuthal(span: f64) -> ScheduleShape {
    ScheduleShape::AzimuthalSweep {
        theta: FRAC_PI_2,
        span,
    }
}
