//! Amplitude envelope and angle schedules.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{acos, atan2, cos, sin, sqrt};

use crate::error::{Error, Result};

/// Peak amplitude (rad/ns) and duration (ns) of the `A·sin(2πt/T)` envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    amplitude: f64,
    duration: f64,
}

impl EnvelopeParams {
    pub fn new(amplitude: f64, duration: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                reason: "must be positive and finite",
            });
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "duration",
                reason: "must be positive and finite",
            });
        }
        Ok(Self {
            amplitude,
            duration,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Envelope value and its first two time derivatives, without a domain check.
    pub(crate) fn eval(&self, t: f64) -> (f64, f64, f64) {
        let w = 2.0 * PI / self.duration;
        let arg = 2.0 * PI * (t / self.duration);
        let (s, c) = (sin(arg), cos(arg));
        (
            self.amplitude * s,
            self.amplitude * w * c,
            -self.amplitude * w * w * s,
        )
    }
}

pub(crate) fn check_domain(t: f64, duration: f64) -> Result<()> {
    if (0.0..=duration).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain { t, duration })
    }
}

/// `Ω(t) = A·sin(2πt/T)` for `t ∈ [0, T]`.
pub fn omega_envelope(t: f64, env: &EnvelopeParams) -> Result<f64> {
    check_domain(t, env.duration)?;
    Ok(env.eval(t).0)
}

/// Polar and azimuthal angles of the reference field direction with their
/// first and second time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angles {
    pub theta: f64,
    pub theta_dot: f64,
    pub theta_ddot: f64,
    pub phi: f64,
    pub phi_dot: f64,
    pub phi_ddot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleShape {
    /// Both angles held fixed.
    Fixed { theta: f64, phi: f64 },
    /// `θ(t) = span·[1 − cos(πt/T)]` at fixed azimuth.
    PolarSweep { span: f64, phi: f64 },
    /// `φ(t) = span·[1 − cos(πt/T)]` at fixed polar angle.
    AzimuthalSweep { theta: f64, span: f64 },
    /// Drive phase `ϕ(t) = span·[1 − cos(πt/T)]` steering the field through
    /// `(cos ϕ/√2, sin ϕ, −cos ϕ/√2)`, the plane normal to `(x̂ + ẑ)/√2`.
    /// The stored angles are the spherical angles of that direction.
    TiltedSweep { span: f64 },
}

/// Angle schedule of a preset over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSchedule {
    shape: ScheduleShape,
    duration: f64,
}

/// `span·[1 − cos(πt/T)]` and derivatives.
fn raised_cosine(span: f64, t: f64, duration: f64) -> (f64, f64, f64) {
    let w = PI / duration;
    let arg = PI * (t / duration);
    (
        span * (1.0 - cos(arg)),
        span * w * sin(arg),
        span * w * w * cos(arg),
    )
}

impl AngleSchedule {
    pub fn new(shape: ScheduleShape, duration: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "duration",
                reason: "must be positive and finite",
            });
        }
        Ok(Self { shape, duration })
    }

    pub fn shape(&self) -> ScheduleShape {
        self.shape
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Drive phase `ϕ(t)` and derivatives for a tilted sweep; `None` otherwise.
    pub fn drive_phase(&self, t: f64) -> Option<(f64, f64, f64)> {
        match self.shape {
            ScheduleShape::TiltedSweep { span } => Some(raised_cosine(span, t, self.duration)),
            _ => None,
        }
    }

    /// Angles and derivatives at `t` (no domain check).
    pub fn angles(&self, t: f64) -> Angles {
        match self.shape {
            ScheduleShape::Fixed { theta, phi } => Angles {
                theta,
                phi,
                ..Angles::default()
            },
            ScheduleShape::PolarSweep { span, phi } => {
                let (theta, theta_dot, theta_ddot) = raised_cosine(span, t, self.duration);
                Angles {
                    theta,
                    theta_dot,
                    theta_ddot,
                    phi,
                    ..Angles::default()
                }
            }
            ScheduleShape::AzimuthalSweep { theta, span } => {
                let (phi, phi_dot, phi_ddot) = raised_cosine(span, t, self.duration);
                Angles {
                    theta,
                    phi,
                    phi_dot,
                    phi_ddot,
                    ..Angles::default()
                }
            }
            ScheduleShape::TiltedSweep { span } => {
                tilted_angles(raised_cosine(span, t, self.duration))
            }
        }
    }

    pub fn theta(&self, t: f64) -> f64 {
        self.angles(t).theta
    }

    pub fn phi(&self, t: f64) -> f64 {
        self.angles(t).phi
    }

    pub fn theta_dot(&self, t: f64) -> f64 {
        self.angles(t).theta_dot
    }

    pub fn phi_dot(&self, t: f64) -> f64 {
        self.angles(t).phi_dot
    }
}

/// Spherical angles of `(cos ϕ/√2, sin ϕ, −cos ϕ/√2)` from `(ϕ, ϕ̇, ϕ̈)`.
///
/// With `q = sin²θ = 1 − cos²ϕ/2 ≥ 1/2` the direction never reaches a pole:
/// `θ̇ = −sin ϕ·ϕ̇/(√2·√q)` and `φ̇ = ϕ̇/(√2·q)`.
fn tilted_angles((p, pd, pdd): (f64, f64, f64)) -> Angles {
    let (s, c) = (sin(p), cos(p));
    let q = 1.0 - 0.5 * c * c;
    let qd = c * s * pd;
    let rq = sqrt(q);
    let theta = acos(-c * FRAC_1_SQRT_2);
    let phi = atan2(s, c * FRAC_1_SQRT_2);
    let theta_dot = -FRAC_1_SQRT_2 * s * pd / rq;
    let theta_ddot =
        -FRAC_1_SQRT_2 * ((c * pd * pd + s * pdd) / rq - 0.5 * s * pd * qd / (q * rq));
    let phi_dot = FRAC_1_SQRT_2 * pd / q;
    let phi_ddot = FRAC_1_SQRT_2 * (pdd / q - pd * qd / (q * q));
    Angles {
        theta,
        theta_dot,
        theta_ddot,
        phi,
        phi_dot,
        phi_ddot,
    }
}
