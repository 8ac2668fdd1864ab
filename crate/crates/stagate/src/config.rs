//! Experiment configuration: a single JSON object, optionally patched by
//! `--set key=value` overrides.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use stagate_core::benchmarking::{RbConfig, RbMode, DEFAULT_LENGTHS, DEFAULT_RANDOMIZATIONS};
use stagate_core::dynamics::{DecoherenceParams, DephasingConvention, Model, SimulationParams, StepRule};
use stagate_core::pulse::{step_count, Corrections, EnvelopeParams, GateName, GatePreset};
use stagate_core::tomography::{MeasurementModel, Shots, DEFAULT_READOUT_F0, DEFAULT_READOUT_F1, DEFAULT_SHOTS};
use stagate_core::units::{self, mhz_to_rad_per_ns};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Synth,
    Evolve,
    Qpt,
    Rb,
}

impl CommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandKind::Synth => "synth",
            CommandKind::Evolve => "evolve",
            CommandKind::Qpt => "qpt",
            CommandKind::Rb => "rb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionLevel {
    Reference,
    Cd,
    CdDrag,
}

impl CorrectionLevel {
    pub const ALL: [CorrectionLevel; 3] = [CorrectionLevel::Reference, CorrectionLevel::Cd, CorrectionLevel::CdDrag];

    pub fn corrections(&self) -> Corrections {
        match self {
            CorrectionLevel::Reference => Corrections::REFERENCE,
            CorrectionLevel::Cd => Corrections::CD,
            CorrectionLevel::CdDrag => Corrections::CD_DRAG,
        }
    }

    pub fn label(&self) -> &'static str {
        self.corrections().label()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    TwoLevel,
    ThreeLevel,
}

impl ModelKind {
    pub fn model(&self) -> Model {
        match self {
            ModelKind::TwoLevel => Model::TwoLevel,
            ModelKind::ThreeLevel => Model::ThreeLevel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingKind {
    /// `Tphi_ns` is the pure-dephasing time itself.
    Pure,
    /// `Tphi_ns` is a Ramsey `T2*`; the pure part is derived with `T1_ns`.
    Ramsey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbModeKind {
    Pulse,
    Abstract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRuleKind {
    Midpoint,
    Magnus4,
}

/// Shots per tomography axis / RB sequence: a count or `"exact"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShotsSpec {
    Count(u64),
    Exact(ExactTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactTag {
    Exact,
}

impl ShotsSpec {
    pub fn shots(&self) -> Shots {
        match self {
            ShotsSpec::Count(n) => Shots::Finite(*n),
            ShotsSpec::Exact(_) => Shots::Exact,
        }
    }
}

/// One gate name or a list of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateList {
    One(String),
    Many(Vec<String>),
}

impl GateList {
    pub fn names(&self) -> Vec<String> {
        match self {
            GateList::One(s) => vec![s.clone()],
            GateList::Many(v) => v.clone(),
        }
    }
}

fn default_preset() -> String {
    "X_pi".into()
}
fn default_corrections() -> CorrectionLevel {
    CorrectionLevel::CdDrag
}
fn default_levels() -> Vec<CorrectionLevel> {
    CorrectionLevel::ALL.to_vec()
}
fn default_model() -> ModelKind {
    ModelKind::ThreeLevel
}
fn default_a() -> f64 {
    units::DEFAULT_AMPLITUDE_MHZ
}
fn default_t() -> f64 {
    units::DEFAULT_DURATION_NS
}
fn default_delta2() -> f64 {
    units::DEFAULT_ANHARMONICITY_MHZ
}
fn default_t1() -> f64 {
    units::DEFAULT_T1_NS
}
fn default_tphi() -> f64 {
    units::DEFAULT_TPHI_NS
}
fn default_dephasing() -> DephasingKind {
    DephasingKind::Pure
}
fn default_rule() -> StepRuleKind {
    StepRuleKind::Magnus4
}
fn default_f0() -> f64 {
    DEFAULT_READOUT_F0
}
fn default_f1() -> f64 {
    DEFAULT_READOUT_F1
}
fn default_true() -> bool {
    true
}
fn default_k() -> usize {
    DEFAULT_RANDOMIZATIONS
}
fn default_lengths() -> Vec<usize> {
    DEFAULT_LENGTHS.to_vec()
}
fn default_mode() -> RbModeKind {
    RbModeKind::Pulse
}
fn default_p() -> f64 {
    0.998
}
fn default_gate_p() -> f64 {
    1.0
}
fn default_out() -> String {
    "out".into()
}

/// Validated experiment configuration. Keys mirror the JSON document;
/// command-dependent defaults are filled in by [`parse_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default = "default_preset")]
    pub preset: String,
    #[serde(default = "default_corrections")]
    pub corrections: CorrectionLevel,
    /// Correction levels emitted by `synth`.
    #[serde(default = "default_levels")]
    pub levels: Vec<CorrectionLevel>,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    #[serde(rename = "A_mhz", default = "default_a")]
    pub a_mhz: f64,
    #[serde(rename = "T_ns", default = "default_t")]
    pub t_ns: f64,
    #[serde(default = "default_delta2")]
    pub delta2_mhz: f64,
    #[serde(rename = "T1_ns", default = "default_t1")]
    pub t1_ns: f64,
    #[serde(rename = "Tphi_ns", default = "default_tphi")]
    pub tphi_ns: f64,
    /// Sample spacing; `T_ns/3000` when absent.
    #[serde(default)]
    pub dt_ns: Option<f64>,
    #[serde(default = "default_rule")]
    pub step_rule: StepRuleKind,
    /// Open-system simulation. Defaults to off for `evolve`, on otherwise.
    #[serde(default)]
    pub decoherence: Option<bool>,
    #[serde(default = "default_dephasing")]
    pub dephasing: DephasingKind,
    /// Defaults to 3000 for `qpt` and `"exact"` for `rb`.
    #[serde(default)]
    pub shots: Option<ShotsSpec>,
    #[serde(default = "default_f0")]
    pub readout_f0: f64,
    #[serde(default = "default_f1")]
    pub readout_f1: f64,
    #[serde(default = "default_true")]
    pub mitigate_readout: bool,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_lengths")]
    pub lengths: Vec<usize>,
    #[serde(default = "default_mode")]
    pub mode: RbModeKind,
    /// Depolarizing parameter per Clifford in abstract mode.
    #[serde(default = "default_p")]
    pub depolarizing_p: f64,
    /// Depolarizing parameter of the interleaved gate in abstract mode.
    #[serde(default = "default_gate_p")]
    pub gate_p: f64,
    #[serde(default)]
    pub interleave: Option<GateList>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out_dir: String,
}

fn constraint(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Constraint {
        key: key.into(),
        reason: reason.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(constraint(key, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    fn fill_defaults(&mut self) {
        if self.decoherence.is_none() {
            self.decoherence = Some(self.command != CommandKind::Evolve);
        }
        if self.shots.is_none() {
            self.shots = Some(match self.command {
                CommandKind::Qpt => ShotsSpec::Count(DEFAULT_SHOTS),
                _ => ShotsSpec::Exact(ExactTag::Exact),
            });
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        self.gate()?;
        positive("A_mhz", self.a_mhz)?;
        positive("T_ns", self.t_ns)?;
        positive("T1_ns", self.t1_ns)?;
        positive("Tphi_ns", self.tphi_ns)?;
        if !(self.delta2_mhz.is_finite() && self.delta2_mhz != 0.0) {
            return Err(constraint("delta2_mhz", "must be finite and nonzero"));
        }
        if let Some(dt) = self.dt_ns {
            positive("dt_ns", dt)?;
            step_count(self.t_ns, dt).map_err(|e| constraint("dt_ns", e.to_string()))?;
        }
        if self.levels.is_empty() {
            return Err(constraint("levels", "need at least one correction level"));
        }
        if let Some(ShotsSpec::Count(0)) = self.shots {
            return Err(constraint("shots", "must be at least 1 or \"exact\""));
        }
        for (key, f) in [("readout_f0", self.readout_f0), ("readout_f1", self.readout_f1)] {
            if !(f > 0.5 && f <= 1.0) {
                return Err(constraint(key, format!("must lie in (0.5, 1], got {f}")));
            }
        }
        if self.k == 0 {
            return Err(constraint("k", "must be at least 1"));
        }
        if self.lengths.is_empty() || self.lengths[0] == 0 || self.lengths.windows(2).any(|w| w[0] >= w[1]) {
            return Err(constraint("lengths", "must be strictly increasing with every length ≥ 1"));
        }
        for (key, p) in [("depolarizing_p", self.depolarizing_p), ("gate_p", self.gate_p)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(constraint(key, format!("must lie in [0, 1], got {p}")));
            }
        }
        self.interleaved_gates()?;
        if self.dephasing == DephasingKind::Ramsey {
            self.decoherence_params()
                .map_err(|e| constraint("Tphi_ns", e.to_string()))?;
        }
        if self.out_dir.is_empty() {
            return Err(constraint("out_dir", "must not be empty"));
        }
        Ok(())
    }

    pub fn gate(&self) -> Result<GateName, CliError> {
        self.preset
            .parse()
            .map_err(|_| constraint("preset", format!("unknown gate `{}`", self.preset)))
    }

    pub fn interleaved_gates(&self) -> Result<Vec<GateName>, CliError> {
        self.interleave
            .as_ref()
            .map(|l| l.names())
            .unwrap_or_default()
            .iter()
            .map(|s| {
                s.parse::<GateName>()
                    .map_err(|_| constraint("interleave", format!("unknown gate `{s}`")))
            })
            .collect()
    }

    pub fn envelope(&self) -> EnvelopeParams {
        EnvelopeParams::new(mhz_to_rad_per_ns(self.a_mhz), self.t_ns).expect("validated")
    }

    pub fn preset_for(&self, g: GateName) -> GatePreset {
        GatePreset::new(g, self.envelope())
    }

    pub fn preset(&self) -> GatePreset {
        self.preset_for(self.gate().expect("validated"))
    }

    pub fn delta2(&self) -> f64 {
        mhz_to_rad_per_ns(self.delta2_mhz)
    }

    pub fn dt(&self) -> f64 {
        self.dt_ns.unwrap_or(self.t_ns / units::DEFAULT_STEPS as f64)
    }

    pub fn steps(&self) -> usize {
        step_count(self.t_ns, self.dt()).expect("validated")
    }

    pub fn step_rule(&self) -> StepRule {
        match self.step_rule {
            StepRuleKind::Midpoint => StepRule::Midpoint,
            StepRuleKind::Magnus4 => StepRule::Magnus4,
        }
    }

    pub fn simulation(&self) -> SimulationParams {
        SimulationParams {
            model: self.model.model(),
            corrections: self.corrections.corrections(),
            delta2: self.delta2(),
            steps: self.steps(),
            rule: self.step_rule(),
        }
    }

    pub fn decoherence_on(&self) -> bool {
        self.decoherence.unwrap_or(self.command != CommandKind::Evolve)
    }

    pub fn decoherence_params(&self) -> stagate_core::Result<DecoherenceParams> {
        if !self.decoherence_on() {
            return Ok(DecoherenceParams::closed());
        }
        let convention = match self.dephasing {
            DephasingKind::Pure => DephasingConvention::PureDephasing,
            DephasingKind::Ramsey => DephasingConvention::Ramsey,
        };
        DecoherenceParams::from_t2_star(self.t1_ns, self.tphi_ns, convention)
    }

    pub fn measurement(&self) -> MeasurementModel {
        MeasurementModel {
            shots: self.shots.unwrap_or(ShotsSpec::Exact(ExactTag::Exact)).shots(),
            readout_f0: self.readout_f0,
            readout_f1: self.readout_f1,
            mitigate_readout: self.mitigate_readout,
        }
    }

    /// RB configuration, interleaving `gate` when given.
    pub fn rb_config(&self, gate: Option<GateName>) -> Result<RbConfig, CliError> {
        let mode = match self.mode {
            RbModeKind::Abstract => RbMode::Abstract {
                clifford_p: self.depolarizing_p,
                gate_p: self.gate_p,
            },
            RbModeKind::Pulse => RbMode::Pulse {
                params: self.simulation(),
                decoherence: self.decoherence_params()?,
                envelope: self.envelope(),
            },
        };
        Ok(RbConfig {
            lengths: self.lengths.clone(),
            k: self.k,
            seed: self.seed,
            interleave: gate,
            mode,
            measurement: self.measurement(),
        })
    }
}

/// Parse a JSON config text into a raw object.
pub fn parse_document(text: &str) -> Result<Map<String, Value>, CliError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Syntax("config must be a JSON object".into())),
        Err(e) => Err(CliError::Syntax(e.to_string())),
    }
}

/// Interpret a `--set` value: JSON when it parses, a plain string otherwise.
pub fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Validate a config object and fill in defaults.
pub fn config_from_document(doc: Map<String, Value>) -> Result<ExperimentConfig, CliError> {
    let value = Value::Object(doc);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(&value).map_err(|e| {
        let key = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.to_string();
        if let Some(rest) = msg.strip_prefix("unknown field `") {
            CliError::UnknownKey(rest.split('`').next().unwrap_or_default().to_string())
        } else if msg.starts_with("missing field `command`") {
            CliError::Constraint {
                key: "command".into(),
                reason: "required (synth, evolve, qpt or rb)".into(),
            }
        } else {
            CliError::Constraint { key, reason: msg }
        }
    })?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// Parse and validate a JSON config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    config_from_document(parse_document(text)?)
}
