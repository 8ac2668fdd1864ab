//! Unit conversions.
//!
//! Fields and energies are angular frequencies in rad/ns throughout the
//! crate. Frequencies quoted as `f/2π` in MHz convert via `B = 2π·f·10⁻³`.

use core::f64::consts::TAU;

/// Default peak drive amplitude, `A/2π` in MHz.
pub const DEFAULT_AMPLITUDE_MHZ: f64 = 20.0;
/// Default gate duration in ns.
pub const DEFAULT_DURATION_NS: f64 = 30.0;
/// Default anharmonicity, `Δ2/2π` in MHz.
pub const DEFAULT_ANHARMONICITY_MHZ: f64 = -253.0;
/// Default energy relaxation time in ns.
pub const DEFAULT_T1_NS: f64 = 20_000.0;
/// Default pure-dephasing time in ns.
pub const DEFAULT_TPHI_NS: f64 = 38_000.0;
/// Default number of integration steps per pulse.
pub const DEFAULT_STEPS: usize = 3000;

#[inline]
pub fn mhz_to_rad_per_ns(f_mhz: f64) -> f64 {
    TAU * f_mhz * 1e-3
}

#[inline]
pub fn rad_per_ns_to_mhz(w: f64) -> f64 {
    w / (TAU * 1e-3)
}
