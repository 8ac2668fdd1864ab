use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{c, expm_hermitian, unitarity_defect, CMat, I, ONE};
use crate::pulse::ControlWaveform;

use super::{hamiltonian, Channel, DecoherenceParams, DensityMatrix, Model, Propagator};

/// Unitarity tolerance after a full propagation.
pub const UNITARITY_TOL: f64 = 1e-6;
/// Trace-drift tolerance after a master-equation propagation.
pub const TRACE_DRIFT_TOL: f64 = 1e-8;

/// Per-step generator built from the midpoint samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepRule {
    /// `H` held constant at the midpoint sample (second order).
    Midpoint,
    /// Fourth-order Magnus step: the midpoint sample plus
    /// `dt²/24·H″ + (i·dt²/12)·[H, H′]`, with `H′` and `H″` taken from
    /// neighbouring samples by finite differences. Still Hermitian, so each
    /// step remains an exact exponential.
    #[default]
    Magnus4,
}

fn step_hamiltonians(w: &ControlWaveform, model: Model, delta2: f64, rule: StepRule) -> Vec<CMat> {
    let raw: Vec<CMat> = w
        .samples()
        .iter()
        .map(|b| hamiltonian(model, b, delta2))
        .collect();
    let n = raw.len();
    if rule == StepRule::Midpoint || n < 3 {
        return raw;
    }
    let dt = w.dt();
    let half_inv_dt = c(0.5 / dt, 0.0);
    let inv_dt2 = c(1.0 / (dt * dt), 0.0);
    (0..n)
        .map(|k| {
            let (d1, d2) = if k == 0 {
                (
                    (&raw[1] * c(4.0, 0.0) - &raw[0] * c(3.0, 0.0) - &raw[2]) * half_inv_dt,
                    (&raw[0] - &raw[1] * c(2.0, 0.0) + &raw[2]) * inv_dt2,
                )
            } else if k == n - 1 {
                (
                    (&raw[k] * c(3.0, 0.0) - &raw[k - 1] * c(4.0, 0.0) + &raw[k - 2]) * half_inv_dt,
                    (&raw[k] - &raw[k - 1] * c(2.0, 0.0) + &raw[k - 2]) * inv_dt2,
                )
            } else {
                (
                    (&raw[k + 1] - &raw[k - 1]) * half_inv_dt,
                    (&raw[k + 1] - &raw[k] * c(2.0, 0.0) + &raw[k - 1]) * inv_dt2,
                )
            };
            let h = &raw[k];
            let comm = h * &d1 - &d1 * h;
            h + d2 * c(dt * dt / 24.0, 0.0) + comm * (I * (dt * dt / 12.0))
        })
        .collect()
}

pub fn evolve_unitary(w: &ControlWaveform, model: Model, delta2: f64) -> Result<Propagator> {
    evolve_unitary_with(w, model, delta2, StepRule::default())
}

/// Time-ordered product of per-step exponentials, latest step leftmost.
pub fn evolve_unitary_with(
    w: &ControlWaveform,
    model: Model,
    delta2: f64,
    rule: StepRule,
) -> Result<Propagator> {
    let d = model.dim();
    let dt = w.dt();
    let mut u = CMat::identity(d, d);
    for h in step_hamiltonians(w, model, delta2, rule) {
        u = expm_hermitian(&h, dt) * u;
    }
    let defect = unitarity_defect(&u);
    if !(defect <= UNITARITY_TOL) {
        return Err(Error::IntegrationFailure {
            what: "propagator lost unitarity",
            deviation: defect,
            tolerance: UNITARITY_TOL,
        });
    }
    Ok(Propagator { matrix: u, model })
}

/// Master-equation right-hand side for fixed collapse operators.
struct Lindbladian {
    ops: Vec<CMat>,
    ops_dag: Vec<CMat>,
    /// `½·Σ L†L`
    half_ldl: CMat,
}

impl Lindbladian {
    fn new(model: Model, dec: &DecoherenceParams) -> Self {
        let d = model.dim();
        let ops = dec.collapse_operators(model);
        let ops_dag: Vec<CMat> = ops.iter().map(|l| l.adjoint()).collect();
        let mut half_ldl = CMat::zeros(d, d);
        for (l, ld) in ops.iter().zip(&ops_dag) {
            half_ldl += ld * l;
        }
        half_ldl *= c(0.5, 0.0);
        Self {
            ops,
            ops_dag,
            half_ldl,
        }
    }

    fn rhs(&self, h: &CMat, rho: &CMat) -> CMat {
        let mut out = (h * rho - rho * h) * (-I);
        for (l, ld) in self.ops.iter().zip(&self.ops_dag) {
            out += l * rho * ld;
        }
        out -= &self.half_ldl * rho + rho * &self.half_ldl;
        out
    }

    fn rk4(&self, h: &CMat, rho: &CMat, dt: f64) -> CMat {
        let half = c(0.5 * dt, 0.0);
        let k1 = self.rhs(h, rho);
        let k2 = self.rhs(h, &(rho + &k1 * half));
        let k3 = self.rhs(h, &(rho + &k2 * half));
        let k4 = self.rhs(h, &(rho + &k3 * c(dt, 0.0)));
        rho + (k1 + (k2 + k3) * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0)
    }
}

fn embed_state(rho0: &DensityMatrix, model: Model) -> Result<CMat> {
    let n = rho0.matrix().nrows();
    if n > model.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: n,
        });
    }
    Ok(rho0.embed(model).into_matrix())
}

pub fn evolve_lindblad(
    w: &ControlWaveform,
    model: Model,
    delta2: f64,
    rho0: &DensityMatrix,
    dec: &DecoherenceParams,
) -> Result<DensityMatrix> {
    evolve_lindblad_with(w, model, delta2, rho0, dec, StepRule::default())
}

/// Fourth-order Runge-Kutta integration of the master equation on the
/// waveform's step grid. The trace is not renormalized; drift beyond
/// [`TRACE_DRIFT_TOL`] is reported as an integration failure.
pub fn evolve_lindblad_with(
    w: &ControlWaveform,
    model: Model,
    delta2: f64,
    rho0: &DensityMatrix,
    dec: &DecoherenceParams,
    rule: StepRule,
) -> Result<DensityMatrix> {
    let mut rho = embed_state(rho0, model)?;
    let lindblad = Lindbladian::new(model, dec);
    let dt = w.dt();
    for h in step_hamiltonians(w, model, delta2, rule) {
        rho = lindblad.rk4(&h, &rho, dt);
    }
    finish_state(rho)
}

fn finish_state(rho: CMat) -> Result<DensityMatrix> {
    let drift = (rho.trace() - ONE).norm();
    if !(drift <= TRACE_DRIFT_TOL) {
        return Err(Error::IntegrationFailure {
            what: "density matrix trace drifted",
            deviation: drift,
            tolerance: TRACE_DRIFT_TOL,
        });
    }
    DensityMatrix::with_tolerance(rho, TRACE_DRIFT_TOL)
}

/// Channel realized by the waveform. Closed systems are integrated as a
/// unitary; open systems propagate every matrix unit `|k⟩⟨l|` through the
/// master equation.
pub fn lindblad_channel(
    w: &ControlWaveform,
    model: Model,
    delta2: f64,
    dec: &DecoherenceParams,
    rule: StepRule,
) -> Result<Channel> {
    if dec.is_closed() {
        let u = evolve_unitary_with(w, model, delta2, rule)?;
        return Ok(Channel::from_unitary(&u.matrix));
    }
    let d = model.dim();
    let lindblad = Lindbladian::new(model, dec);
    let dt = w.dt();
    let mut units: Vec<CMat> = (0..d * d)
        .map(|s| {
            let mut m = CMat::zeros(d, d);
            m[(s / d, s % d)] = ONE;
            m
        })
        .collect();
    for h in step_hamiltonians(w, model, delta2, rule) {
        for m in units.iter_mut() {
            *m = lindblad.rk4(&h, m, dt);
        }
    }
    let superop = CMat::from_fn(d * d, d * d, |r, s| units[s][(r / d, r % d)]);
    Channel::from_superoperator(superop)
}

/// States at every step boundary `k·dt`, `k = 0..=N`.
pub fn trajectory(
    w: &ControlWaveform,
    model: Model,
    delta2: f64,
    rho0: &DensityMatrix,
    dec: &DecoherenceParams,
    rule: StepRule,
) -> Result<Vec<CMat>> {
    let mut rho = embed_state(rho0, model)?;
    let dt = w.dt();
    let mut out = Vec::with_capacity(w.len() + 1);
    out.push(rho.clone());
    if dec.is_closed() {
        for h in step_hamiltonians(w, model, delta2, rule) {
            let u = expm_hermitian(&h, dt);
            rho = &u * rho * u.adjoint();
            out.push(rho.clone());
        }
    } else {
        let lindblad = Lindbladian::new(model, dec);
        for h in step_hamiltonians(w, model, delta2, rule) {
            rho = lindblad.rk4(&h, &rho, dt);
            out.push(rho.clone());
        }
    }
    finish_state(rho)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, operator_norm, sigma_x, to_dynamic, ZERO};
    use crate::pulse::{synthesize_waveform, Corrections, FieldVector, GateName, GatePreset};
    use crate::units::mhz_to_rad_per_ns;
    use core::f64::consts::PI;
    use libm::exp;

    fn x_pi_waveform(steps: usize) -> ControlWaveform {
        let p = GatePreset::standard(GateName::XPi);
        synthesize_waveform(&p, Corrections::CD, 30.0 / steps as f64, mhz_to_rad_per_ns(-253.0)).unwrap()
    }

    #[test]
    fn zero_waveform_is_identity() {
        let w = ControlWaveform::zero(30.0, 300).unwrap();
        for model in [Model::TwoLevel, Model::ThreeLevel] {
            let u = evolve_unitary(&w, model, 0.0).unwrap();
            let d = model.dim();
            assert!(max_abs(&(u.matrix - CMat::identity(d, d))) < 1e-15);
        }
    }

    #[test]
    fn constant_rabi_pi_pulse() {
        let w_rad = 0.2;
        let tau = PI / w_rad;
        let w = ControlWaveform::constant(FieldVector::new(w_rad, 0.0, 0.0), tau, 500).unwrap();
        let expected = to_dynamic(&sigma_x()) * c(0.0, -1.0);
        for rule in [StepRule::Midpoint, StepRule::Magnus4] {
            let u = evolve_unitary_with(&w, Model::TwoLevel, 0.0, rule).unwrap();
            assert!(max_abs(&(u.matrix - &expected)) < 1e-10);
        }
    }

    #[test]
    fn default_grid_matches_fine_oracle() {
        let coarse = evolve_unitary(&x_pi_waveform(3000), Model::TwoLevel, 0.0).unwrap();
        let fine = evolve_unitary(&x_pi_waveform(30_000), Model::TwoLevel, 0.0).unwrap();
        assert!(operator_norm(&(coarse.matrix - fine.matrix)) < 1e-8);
    }

    fn observed_order(rule: StepRule) -> f64 {
        let reference = evolve_unitary_with(&x_pi_waveform(48_000), Model::TwoLevel, 0.0, rule).unwrap();
        let err = |n| {
            let u = evolve_unitary_with(&x_pi_waveform(n), Model::TwoLevel, 0.0, rule).unwrap();
            operator_norm(&(u.matrix - &reference.matrix))
        };
        let (e1, e2) = (err(750), err(1500));
        libm::log2(e1 / e2)
    }

    #[test]
    fn convergence_order() {
        let mid = observed_order(StepRule::Midpoint);
        let magnus = observed_order(StepRule::Magnus4);
        assert!(mid >= 1.9, "midpoint order {mid}");
        assert!(magnus >= 3.5, "magnus order {magnus}");
    }

    #[test]
    fn relaxation_closed_form() {
        let w = ControlWaveform::zero(30.0, 3000).unwrap();
        let rho0 = DensityMatrix::basis(Model::TwoLevel, 1);
        let dec = DecoherenceParams::new(Some(20_000.0), None).unwrap();
        let out = evolve_lindblad(&w, Model::TwoLevel, 0.0, &rho0, &dec).unwrap();
        assert!((out.population(1) - exp(-30.0 / 20_000.0)).abs() < 1e-6);
        // exact-arithmetic value; RK4 error is far below this
        assert!((out.population(1) - exp(-30.0 / 20_000.0)).abs() < 1e-12);
    }

    #[test]
    fn dephasing_closed_form() {
        let w = ControlWaveform::zero(30.0, 3000).unwrap();
        let rho0 = DensityMatrix::pure(&[ONE, ONE]).unwrap();
        let dec = DecoherenceParams::new(None, Some(38_000.0)).unwrap();
        let out = evolve_lindblad(&w, Model::TwoLevel, 0.0, &rho0, &dec).unwrap();
        let coherence = 2.0 * out.matrix()[(0, 1)].norm();
        assert!((coherence - exp(-30.0 / 38_000.0)).abs() < 1e-6);
    }

    #[test]
    fn closed_lindblad_matches_unitary() {
        let w = x_pi_waveform(3000);
        let u = evolve_unitary(&w, Model::TwoLevel, 0.0).unwrap().matrix;
        let rho0 = DensityMatrix::pure(&[ONE, c(0.3, 0.4)]).unwrap();
        let out = evolve_lindblad(&w, Model::TwoLevel, 0.0, &rho0, &DecoherenceParams::closed()).unwrap();
        let expected = &u * rho0.matrix() * u.adjoint();
        assert!(max_abs(&(out.matrix() - expected)) < 1e-8);
    }

    #[test]
    fn channel_reproduces_state_evolution() {
        let p = GatePreset::standard(GateName::Hadamard);
        let d2 = mhz_to_rad_per_ns(-253.0);
        let w = synthesize_waveform(&p, Corrections::CD_DRAG, 0.01, d2).unwrap();
        let dec = DecoherenceParams::standard();
        let ch = lindblad_channel(&w, Model::ThreeLevel, d2, &dec, StepRule::Magnus4).unwrap();
        let rho0 = DensityMatrix::pure(&[ONE, c(0.0, 1.0), ZERO]).unwrap();
        let direct = evolve_lindblad(&w, Model::ThreeLevel, d2, &rho0, &dec).unwrap();
        assert!(max_abs(&(ch.apply(rho0.matrix()) - direct.matrix())) < 1e-13);
    }

    #[test]
    fn zero_waveform_purity_never_increases() {
        let w = ControlWaveform::zero(300.0, 300).unwrap();
        let rho0 = DensityMatrix::pure(&[ONE, c(0.5, -0.5), c(0.2, 0.0)]).unwrap();
        let states = trajectory(&w, Model::ThreeLevel, -1.0, &rho0, &DecoherenceParams::standard(), StepRule::Midpoint).unwrap();
        let purity = |m: &CMat| (m * m).trace().re;
        for pair in states.windows(2) {
            assert!(purity(&pair[1]) <= purity(&pair[0]) + 1e-15);
        }
        DensityMatrix::new(states.last().unwrap().clone()).unwrap();
    }
}
