use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::dynamics::{sta_channel, Channel, DecoherenceParams, SimulationParams};
use crate::error::{Error, Result};
use crate::linalg::{to_dynamic, C64, ONE, ZERO};
use crate::pulse::{EnvelopeParams, GateName, GatePreset};
use crate::tomography::{MeasurementModel, Shots};

use super::clifford::{random_rb_sequence, CliffordTable, GENERATORS};

/// Default sequence lengths.
pub const DEFAULT_LENGTHS: [usize; 11] = [1, 3, 6, 10, 20, 40, 70, 100, 150, 200, 300];
pub const DEFAULT_RANDOMIZATIONS: usize = 50;

/// How gates are realized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RbMode {
    /// Ideal Clifford unitaries each followed by a depolarizing channel with
    /// parameter `clifford_p`; the interleaved gate uses `gate_p`. The final
    /// recovery gate is noiseless.
    Abstract { clifford_p: f64, gate_p: f64 },
    /// Every generator simulated as its full pulse, Cliffords realized as
    /// back-to-back generator pulses, the recovery included.
    Pulse {
        params: SimulationParams,
        decoherence: DecoherenceParams,
        envelope: EnvelopeParams,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbConfig {
    pub lengths: Vec<usize>,
    /// Randomizations per length.
    pub k: usize,
    pub seed: u64,
    pub interleave: Option<GateName>,
    pub mode: RbMode,
    pub measurement: MeasurementModel,
}

impl RbConfig {
    pub fn new(mode: RbMode, seed: u64) -> Self {
        Self {
            lengths: DEFAULT_LENGTHS.to_vec(),
            k: DEFAULT_RANDOMIZATIONS,
            seed,
            interleave: None,
            mode,
            measurement: MeasurementModel::ideal(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "need at least one randomization",
            });
        }
        if self.lengths.is_empty()
            || self.lengths[0] == 0
            || self.lengths.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidParameter {
                name: "lengths",
                reason: "must be strictly increasing and start at 1 or more",
            });
        }
        if let RbMode::Abstract { clifford_p, gate_p } = self.mode {
            for p in [clifford_p, gate_p] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter {
                        name: "depolarizing_p",
                        reason: "must lie in [0, 1]",
                    });
                }
            }
        }
        self.measurement.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Reference,
    Interleaved(GateName),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbPoint {
    pub m: usize,
    pub f_seq: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbCurve {
    pub kind: CurveKind,
    pub points: Vec<RbPoint>,
}

impl RbCurve {
    pub fn fit_points(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.m as f64, p.f_seq)).collect()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of randomization `rep` at length `m`: `seed ⊕ splitmix64(m·2³² + rep)`.
pub fn sample_seed(master: u64, m: usize, rep: usize) -> u64 {
    master ^ splitmix64(((m as u64) << 32) | rep as u64)
}

/// Precomputed gate channels for one RB configuration. Samples are pure
/// functions of `(m, rep)`, so they may be evaluated in any order or in
/// parallel and aggregated with [`RbExperiment::aggregate`].
#[derive(Debug, Clone)]
pub struct RbExperiment {
    table: CliffordTable,
    config: RbConfig,
    dim: usize,
    /// Noisy channel per Clifford.
    cliffords: Vec<CMatSuper>,
    /// Channel used for the final recovery gate per Clifford.
    recovery: Vec<CMatSuper>,
    interleaved: Option<(usize, CMatSuper)>,
}

type CMatSuper = crate::linalg::CMat;

impl RbExperiment {
    pub fn new(config: RbConfig) -> Result<Self> {
        config.validate()?;
        let table = CliffordTable::build()?;
        let interleave_index = config.interleave.map(|g| table.index_of_gate(g)).transpose()?;
        let (dim, cliffords, recovery, interleaved) = match config.mode {
            RbMode::Abstract { clifford_p, gate_p } => {
                let ideal: Vec<Channel> = table
                    .elements()
                    .iter()
                    .map(|e| Channel::from_unitary(&to_dynamic(&e.unitary)))
                    .collect();
                let noisy: Vec<CMatSuper> = ideal
                    .iter()
                    .map(|c| c.then(&Channel::depolarizing(2, clifford_p)).superoperator().clone())
                    .collect();
                let interleaved = config.interleave.map(|g| {
                    let c = Channel::from_unitary(&to_dynamic(&g.target_unitary()))
                        .then(&Channel::depolarizing(2, gate_p));
                    (interleave_index.unwrap_or(0), c.superoperator().clone())
                });
                let rec = ideal.iter().map(|c| c.superoperator().clone()).collect();
                (2, noisy, rec, interleaved)
            }
            RbMode::Pulse {
                params,
                decoherence,
                envelope,
            } => {
                let gate = |g: GateName| sta_channel(&GatePreset::new(g, envelope), &params, &decoherence);
                let generators: Vec<Channel> = GENERATORS.iter().map(|&g| gate(g)).collect::<Result<_>>()?;
                let cliffords: Vec<CMatSuper> = table
                    .elements()
                    .iter()
                    .map(|e| {
                        let d = generators[0].dim();
                        e.decomposition
                            .iter()
                            .fold(Channel::identity(d), |acc, g| {
                                let k = GENERATORS.iter().position(|x| x == g).expect("decompositions use generators");
                                acc.then(&generators[k])
                            })
                            .superoperator()
                            .clone()
                    })
                    .collect();
                let interleaved = match (config.interleave, interleave_index) {
                    (Some(g), Some(i)) => Some((i, gate(g)?.superoperator().clone())),
                    _ => None,
                };
                (params.model.dim(), cliffords.clone(), cliffords, interleaved)
            }
        };
        Ok(Self {
            table,
            config,
            dim,
            cliffords,
            recovery,
            interleaved,
        })
    }

    pub fn config(&self) -> &RbConfig {
        &self.config
    }

    pub fn table(&self) -> &CliffordTable {
        &self.table
    }

    pub fn is_interleaved(&self) -> bool {
        self.interleaved.is_some()
    }

    /// Survival probability of `|0⟩` for one random sequence. With
    /// `interleaved`, the configured gate follows every random Clifford.
    pub fn sample(&self, m: usize, rep: usize, interleaved: bool) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed(self.config.seed, m, rep));
        let (seq, _) = random_rb_sequence(m, &self.table, &mut rng);
        let d = self.dim;
        let mut state = DVector::<C64>::from_element(d * d, ZERO);
        state[0] = ONE;
        let mut net = self.table.identity();
        let inter = if interleaved { self.interleaved.as_ref() } else { None };
        for &c in &seq {
            state = &self.cliffords[c] * state;
            net = self.table.multiply(c, net);
            if let Some((gi, g)) = inter {
                state = g * state;
                net = self.table.multiply(*gi, net);
            }
        }
        let rec = self.table.inverse(net);
        state = &self.recovery[rec] * state;
        let p0 = state[0].re.clamp(0.0, 1.0);
        self.measure(p0, &mut rng)
    }

    fn measure(&self, p0: f64, rng: &mut ChaCha8Rng) -> f64 {
        let mm = &self.config.measurement;
        let q0 = (mm.readout_f0 * p0 + (1.0 - mm.readout_f1) * (1.0 - p0)).clamp(0.0, 1.0);
        let q0_hat = match mm.shots {
            Shots::Exact => q0,
            Shots::Finite(n) => {
                Binomial::new(n, q0).expect("probability clamped").sample(rng) as f64 / n as f64
            }
        };
        if mm.mitigate_readout {
            (q0_hat - (1.0 - mm.readout_f1)) / (mm.readout_f0 + mm.readout_f1 - 1.0)
        } else {
            q0_hat
        }
    }

    /// Mean and standard error per length from samples laid out as
    /// `samples[i·k + rep]` for length index `i`.
    pub fn aggregate(&self, kind: CurveKind, samples: &[f64]) -> RbCurve {
        let k = self.config.k;
        let points = self
            .config
            .lengths
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let s = &samples[i * k..(i + 1) * k];
                let mean = s.iter().sum::<f64>() / k as f64;
                let stderr = if k > 1 {
                    let var = s.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (k - 1) as f64;
                    sqrt(var / k as f64)
                } else {
                    0.0
                };
                RbPoint { m, f_seq: mean, stderr }
            })
            .collect();
        RbCurve { kind, points }
    }

    fn run(&self, interleaved: bool) -> Vec<f64> {
        let k = self.config.k;
        let mut samples = vec![0.0; self.config.lengths.len() * k];
        for (i, &m) in self.config.lengths.iter().enumerate() {
            for rep in 0..k {
                samples[i * k + rep] = self.sample(m, rep, interleaved);
            }
        }
        samples
    }

    pub fn run_reference(&self) -> RbCurve {
        self.aggregate(CurveKind::Reference, &self.run(false))
    }

    /// `None` when no interleaved gate is configured.
    pub fn run_interleaved(&self) -> Option<RbCurve> {
        let g = self.config.interleave?;
        Some(self.aggregate(CurveKind::Interleaved(g), &self.run(true)))
    }
}

/// Reference randomized benchmarking curve.
pub fn run_rb(config: &RbConfig) -> Result<RbCurve> {
    let reference = RbConfig {
        interleave: None,
        ..config.clone()
    };
    Ok(RbExperiment::new(reference)?.run_reference())
}

/// Interleaved curve for `config.interleave`.
pub fn run_interleaved_rb(config: &RbConfig) -> Result<RbCurve> {
    let g = config.interleave.ok_or(Error::InvalidParameter {
        name: "interleave",
        reason: "no interleaved gate configured",
    })?;
    RbExperiment::new(config.clone())?
        .run_interleaved()
        .ok_or(Error::UnsupportedGate(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarking::fit_decay;
    use libm::pow;

    fn abstract_config(p: f64, gate_p: f64, seed: u64) -> RbConfig {
        RbConfig::new(RbMode::Abstract { clifford_p: p, gate_p }, seed)
    }

    #[test]
    fn noiseless_abstract_is_perfect() {
        let mut cfg = abstract_config(1.0, 1.0, 1);
        cfg.interleave = Some(GateName::Hadamard);
        cfg.k = 5;
        for p in run_rb(&cfg).unwrap().points {
            assert!((p.f_seq - 1.0).abs() < 1e-12);
        }
        for p in run_interleaved_rb(&cfg).unwrap().points {
            assert!((p.f_seq - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zeroth_order_model_is_exact() {
        let mut cfg = abstract_config(0.998, 1.0, 2);
        cfg.k = 10;
        for pt in run_rb(&cfg).unwrap().points {
            assert!((pt.f_seq - (0.5 * pow(0.998, pt.m as f64) + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn interleaved_decay_multiplies() {
        let mut cfg = abstract_config(0.998, 0.9996, 3);
        cfg.k = 4;
        cfg.interleave = Some(GateName::XPi);
        let fit = fit_decay(&run_interleaved_rb(&cfg).unwrap().fit_points()).unwrap();
        assert!((fit.p - 0.998 * 0.9996).abs() < 1e-3);
        assert!((fit.p - 0.998 * 0.9996).abs() < 1e-9);
    }

    #[test]
    fn finite_shots_recover_p() {
        let mut cfg = abstract_config(0.998, 1.0, 4);
        cfg.k = 200;
        cfg.measurement = MeasurementModel::new(Shots::Finite(1000), 1.0, 1.0, true).unwrap();
        let fit = fit_decay(&run_rb(&cfg).unwrap().fit_points()).unwrap();
        assert!((fit.p - 0.998).abs() < 5e-4, "{}", fit.p);
    }

    #[test]
    fn deterministic_given_seed() {
        let mut cfg = abstract_config(0.99, 1.0, 5);
        cfg.k = 7;
        cfg.measurement = MeasurementModel::new(Shots::Finite(100), 0.998, 0.951, false).unwrap();
        let a = run_rb(&cfg).unwrap();
        let b = run_rb(&cfg).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.f_seq.to_bits(), y.f_seq.to_bits());
        }
        cfg.seed = 6;
        assert_ne!(run_rb(&cfg).unwrap(), a);
    }

    #[test]
    fn config_validation() {
        let mut cfg = abstract_config(0.99, 1.0, 0);
        cfg.lengths = vec![1, 5, 5];
        assert!(cfg.validate().is_err());
        cfg.lengths = vec![0, 5];
        assert!(cfg.validate().is_err());
        cfg.lengths = vec![1, 5];
        cfg.k = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn seed_splitting() {
        assert_ne!(sample_seed(1, 1, 0), sample_seed(1, 0, 1));
        assert_ne!(sample_seed(1, 3, 2), sample_seed(2, 3, 2));
    }
}
