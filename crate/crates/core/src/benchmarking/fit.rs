use alloc::vec::Vec;

use libm::{exp, log, pow, sqrt};
use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, FitFailure, Result};

const MAX_ITERATIONS: usize = 200;
const STEP_TOL: f64 = 1e-10;
const MIN_RANGE: f64 = 1e-12;

/// Least-squares fit of `F(m) = A0·p^m + B0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbFit {
    pub a0: f64,
    pub p: f64,
    pub b0: f64,
    /// Parameter covariance in the order `(A0, p, B0)`, scaled by the
    /// residual variance.
    pub covariance: [[f64; 3]; 3],
    /// `‖F_fit − F‖₂`
    pub residual_norm: f64,
    pub iterations: usize,
}

impl RbFit {
    pub fn p_stderr(&self) -> f64 {
        sqrt(self.covariance[1][1].max(0.0))
    }

    /// Average error per step for one qubit.
    pub fn average_error(&self) -> f64 {
        average_error(self.p, 1)
    }

    pub fn model(&self, m: f64) -> f64 {
        self.a0 * pow(self.p, m) + self.b0
    }
}

fn model_and_jacobian(theta: &Vector3<f64>, m: f64) -> (f64, Vector3<f64>) {
    let (a0, p, b0) = (theta[0], theta[1], theta[2]);
    let pm = pow(p, m);
    let dp = if m == 0.0 { 0.0 } else { a0 * m * pow(p, m - 1.0) };
    (a0 * pm + b0, Vector3::new(pm, dp, 1.0))
}

fn cost(theta: &Vector3<f64>, points: &[(f64, f64)]) -> f64 {
    points
        .iter()
        .map(|&(m, f)| {
            let r = model_and_jacobian(theta, m).0 - f;
            r * r
        })
        .sum()
}

fn initial_guess(points: &[(f64, f64)]) -> Vector3<f64> {
    let (m_min, f_first) = points
        .iter()
        .copied()
        .fold((f64::INFINITY, 0.0), |acc, (m, f)| if m < acc.0 { (m, f) } else { acc });
    let (m_max, f_last) = points
        .iter()
        .copied()
        .fold((f64::NEG_INFINITY, 0.0), |acc, (m, f)| if m > acc.0 { (m, f) } else { acc });
    let a0 = f_first - f_last;
    let b0 = f_last;
    // log-linear regression of ln|F − B0| against m
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(m, f)| m < m_max && (f - b0) * a0.signum() > 0.0)
        .map(|&(m, f)| (m, log((f - b0).abs())))
        .collect();
    let mut p = 0.99;
    if logs.len() >= 2 {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
        let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
        let sxx: f64 = logs.iter().map(|l| (l.0 - mx) * (l.0 - mx)).sum();
        let sxy: f64 = logs.iter().map(|l| (l.0 - mx) * (l.1 - my)).sum();
        if sxx > 0.0 {
            p = exp(sxy / sxx);
        }
    } else if logs.len() == 1 && m_max > m_min {
        p = exp((log(a0.abs()).min(0.0)) / (m_max - m_min));
    }
    let p = if p.is_finite() { p.clamp(0.5, 1.0 - 1e-9) } else { 0.99 };
    Vector3::new(a0, p, b0)
}

/// Levenberg-Marquardt fit of `A0·p^m + B0` to `(m, F)` pairs.
///
/// Starts from `A0 = F(m_min) − F(m_max)`, `B0 = F(m_max)` and `p` from a
/// log-linear regression, and stops once a step moves every parameter by
/// less than 1e-10 (at most 200 iterations).
pub fn fit_decay(points: &[(f64, f64)]) -> Result<RbFit> {
    let mut ms: Vec<f64> = points.iter().map(|p| p.0).collect();
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    if ms.len() < 4 {
        return Err(Error::Fit {
            kind: FitFailure::TooFewPoints(ms.len()),
            best: None,
        });
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    if !(hi - lo >= MIN_RANGE) {
        return Err(Error::Fit {
            kind: FitFailure::Degenerate,
            best: None,
        });
    }

    let mut theta = initial_guess(points);
    let mut current = cost(&theta, points);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for &(m, f) in points {
            let (y, j) = model_and_jacobian(&theta, m);
            jtj += j * j.transpose();
            jtr += j * (y - f);
        }
        let mut step_small = false;
        let mut accepted = false;
        for _ in 0..40 {
            let mut a = jtj;
            for k in 0..3 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(delta) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = theta + delta;
            let c = cost(&trial, points);
            step_small = delta.amax() < STEP_TOL;
            if c <= current {
                theta = trial;
                current = c;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                break;
            }
            if step_small {
                break;
            }
            lambda *= 10.0;
        }
        if step_small || !accepted && lambda > 1e20 {
            converged = step_small;
            break;
        }
    }

    let n = points.len();
    let mut jtj = Matrix3::<f64>::zeros();
    for &(m, _) in points {
        let (_, j) = model_and_jacobian(&theta, m);
        jtj += j * j.transpose();
    }
    let dof = n.saturating_sub(3).max(1) as f64;
    let sigma2 = current / dof;
    let cov = jtj.try_inverse().map(|inv| inv * sigma2).unwrap_or_else(|| Matrix3::from_element(f64::NAN));
    let fit = RbFit {
        a0: theta[0],
        p: theta[1],
        b0: theta[2],
        covariance: core::array::from_fn(|i| core::array::from_fn(|j| cov[(i, j)])),
        residual_norm: sqrt(current),
        iterations,
    };
    classify(fit, converged)
}

fn classify(fit: RbFit, converged: bool) -> Result<RbFit> {
    if !converged {
        return Err(Error::Fit {
            kind: FitFailure::NotConverged,
            best: Some(fit),
        });
    }
    if !(fit.p > 0.0 && fit.p <= 1.0) {
        return Err(Error::Fit {
            kind: FitFailure::OutOfRange,
            best: Some(fit),
        });
    }
    Ok(fit)
}

/// `r = (d − 1)(1 − p)/d` with `d = 2ⁿ`.
pub fn average_error(p: f64, n_qubits: u32) -> f64 {
    let d = pow(2.0, n_qubits as f64);
    (d - 1.0) * (1.0 - p) / d
}

/// Interleaved-RB gate fidelity and its propagated standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateFidelity {
    pub value: f64,
    pub stderr: f64,
    /// `p′ > p`: the ratio exceeds one, which only statistical
    /// fluctuation can produce.
    pub ratio_above_one: bool,
}

/// `F_g = 1 − (d − 1)/d·(1 − p′/p)`.
pub fn interleaved_gate_fidelity(p_ref: f64, p_interleaved: f64, n_qubits: u32) -> Result<GateFidelity> {
    interleaved_gate_fidelity_with_errors(p_ref, 0.0, p_interleaved, 0.0, n_qubits)
}

pub fn interleaved_gate_fidelity_with_errors(
    p_ref: f64,
    p_ref_stderr: f64,
    p_interleaved: f64,
    p_interleaved_stderr: f64,
    n_qubits: u32,
) -> Result<GateFidelity> {
    if p_ref == 0.0 {
        return Err(Error::DivisionByZero("interleaved gate fidelity"));
    }
    let d = pow(2.0, n_qubits as f64);
    let k = (d - 1.0) / d;
    let ratio = p_interleaved / p_ref;
    let d_int = p_interleaved_stderr / p_ref;
    let d_ref = p_interleaved * p_ref_stderr / (p_ref * p_ref);
    let ratio_above_one = ratio > 1.0;
    if ratio_above_one {
        log::warn!("interleaved decay p' = {p_interleaved} exceeds reference p = {p_ref}");
    }
    Ok(GateFidelity {
        value: 1.0 - k * (1.0 - ratio),
        stderr: k * sqrt(d_int * d_int + d_ref * d_ref),
        ratio_above_one,
    })
}

impl GateFidelity {
    pub fn from_fits(reference: &RbFit, interleaved: &RbFit) -> Result<Self> {
        interleaved_gate_fidelity_with_errors(
            reference.p,
            reference.p_stderr(),
            interleaved.p,
            interleaved.p_stderr(),
            1,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    const GRID: [f64; 11] = [1.0, 3.0, 6.0, 10.0, 20.0, 40.0, 70.0, 100.0, 150.0, 200.0, 300.0];

    #[test]
    fn exact_data_is_recovered() {
        let pts: Vec<(f64, f64)> = GRID.iter().map(|&m| (m, 0.5 * pow(0.99, m) + 0.5)).collect();
        let fit = fit_decay(&pts).unwrap();
        assert!((fit.a0 - 0.5).abs() < 1e-9);
        assert!((fit.p - 0.99).abs() < 1e-9);
        assert!((fit.b0 - 0.5).abs() < 1e-9);
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn noisy_data_recovers_p() {
        let mut errs: Vec<f64> = (0..20)
            .map(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let noise = Normal::new(0.0, 0.005).unwrap();
                let pts: Vec<(f64, f64)> = GRID
                    .iter()
                    .map(|&m| (m, 0.5 * pow(0.99, m) + 0.5 + noise.sample(&mut rng)))
                    .collect();
                (fit_decay(&pts).unwrap().p - 0.99).abs()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        assert!(0.5 * (errs[9] + errs[10]) < 1e-3);
    }

    #[test]
    fn failure_modes() {
        let flat: Vec<(f64, f64)> = GRID.iter().map(|&m| (m, 1.0)).collect();
        assert!(matches!(
            fit_decay(&flat),
            Err(Error::Fit { kind: FitFailure::Degenerate, .. })
        ));
        let few = vec![(1.0, 0.9), (2.0, 0.8), (2.0, 0.81), (3.0, 0.7)];
        assert!(matches!(
            fit_decay(&few),
            Err(Error::Fit { kind: FitFailure::TooFewPoints(3), .. })
        ));
        // a nearly flat, slowly rising tail leaves a long shallow valley
        let rising: Vec<(f64, f64)> = GRID.iter().map(|&m| (m, 0.5 + 1e-4 * pow(1.001, m))).collect();
        match fit_decay(&rising) {
            Err(Error::Fit { kind: FitFailure::NotConverged, best: Some(b) }) => assert_eq!(b.iterations, 200),
            other => panic!("{other:?}"),
        }
        let fit = fit_decay(&GRID.map(|m| (m, 0.5 * pow(0.99, m) + 0.5))).unwrap();
        let grown = RbFit { p: 1.002, ..fit.clone() };
        match classify(grown, true) {
            Err(Error::Fit { kind: FitFailure::OutOfRange, best: Some(b) }) => assert_eq!(b.p, 1.002),
            other => panic!("{other:?}"),
        }
        assert_eq!(classify(fit.clone(), true), Ok(fit));
    }

    #[test]
    fn average_error_examples() {
        assert_eq!(average_error(1.0, 1), 0.0);
        assert!((average_error(0.9978, 1) - 0.0011).abs() < 1e-12);
        assert!((average_error(0.5, 1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gate_fidelity_examples() {
        assert_eq!(interleaved_gate_fidelity(0.998, 0.998, 1).unwrap().value, 1.0);
        let f = interleaved_gate_fidelity(0.998, 0.996, 1).unwrap();
        assert!((f.value - (1.0 - 0.5 * (1.0 - 0.996 / 0.998))).abs() < 1e-15);
        assert!((f.value - 0.998998).abs() < 1e-6);
        let f = interleaved_gate_fidelity(0.998, 0.998 * 0.9996, 1).unwrap();
        assert!((f.value - 0.9998).abs() < 1e-12);
        let f = interleaved_gate_fidelity(0.99, 0.995, 1).unwrap();
        assert!(f.ratio_above_one && f.value > 1.0);
        assert_eq!(
            interleaved_gate_fidelity(0.0, 0.5, 1),
            Err(Error::DivisionByZero("interleaved gate fidelity"))
        );
    }
}
