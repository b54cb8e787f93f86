//! JSON experiment configuration.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zakdd_core::channel::{DopplerProfile, QuadratureSpec};
use zakdd_core::dd::ZakParams;
use zakdd_core::spreading::ChirpSpec;
use zakdd_core::waveform::{PulseKind, PulseShape};

use crate::sim::{LinkSetup, PilotMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Experiment {
    Ambiguity,
    Lattice,
    Papr,
    Heff,
    NmseSweep,
    BerSweep,
    Throughput,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Ambiguity => "ambiguity",
            Experiment::Lattice => "lattice",
            Experiment::Papr => "papr",
            Experiment::Heff => "heff",
            Experiment::NmseSweep => "nmse_sweep",
            Experiment::BerSweep => "ber_sweep",
            Experiment::Throughput => "throughput",
        }
    }
}

/// A scalar or a list in the JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub m: usize,
    pub n: usize,
    pub nu_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub kind: PulseKind,
    #[serde(default)]
    pub beta_tau: f64,
    #[serde(default)]
    pub beta_nu: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        Self { kind: PulseKind::Rrc, beta_tau: 0.6, beta_nu: 0.6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChirpConfig {
    pub q: i64,
}

impl Default for ChirpConfig {
    fn default() -> Self {
        Self { q: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub nu_max: OneOrMany,
    #[serde(default = "default_profile")]
    pub profile: DopplerProfile,
    #[serde(default = "default_trials")]
    pub trials: u64,
}

fn default_profile() -> DopplerProfile {
    DopplerProfile::Table
}

fn default_trials() -> u64 {
    100
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { nu_max: OneOrMany::One(815.0), profile: default_profile(), trials: default_trials() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub rho_d_db: f64,
    pub pdr_db: OneOrMany,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { rho_d_db: 25.0, pdr_db: OneOrMany::One(10.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveformConfig {
    pub n_os: usize,
    pub n_lobes: usize,
    pub iapr_thresholds_db: Vec<f64>,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self { n_os: 4, n_lobes: 16, iapr_thresholds_db: (0..=12).map(f64::from).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimationConfig {
    pub support_fraction: f64,
    pub threshold_factor: f64,
    pub window_tail: i64,
    pub points_per_bin: usize,
    pub quadrature_lobes: usize,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self { support_fraction: 0.999, threshold_factor: 3.0, window_tail: 6, points_per_bin: 8, quadrature_lobes: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Spread,
    Guard7x7,
    PerfectCsi,
}

fn default_modes() -> Vec<ModeConfig> {
    vec![ModeConfig::Spread]
}

fn default_ber_values() -> Vec<f64> {
    vec![0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub params: ParamsConfig,
    #[serde(default)]
    pub pulse: PulseConfig,
    #[serde(default)]
    pub chirp: ChirpConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub powers: PowerConfig,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub waveform: WaveformConfig,
    #[serde(default)]
    pub estimation: EstimationConfig,
    #[serde(default = "default_modes")]
    pub modes: Vec<ModeConfig>,
    #[serde(default = "default_ber_values")]
    pub ber_values: Vec<f64>,
}

/// Rejected configuration: parse or validation failure.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(what: &str, e: impl fmt::Display) -> ConfigError {
    ConfigError(format!("invalid {what}: {e}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.zak_params()?;
        self.pulse_shape()?;
        ChirpSpec::new(self.chirp.q, self.params.m, self.params.n).map_err(|e| invalid("chirp.q", e))?;
        if self.channel.nu_max.values().iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(ConfigError("invalid channel.nu_max: must be non-negative".into()));
        }
        if self.channel.trials == 0 {
            return Err(ConfigError("invalid channel.trials: must be positive".into()));
        }
        if self.channel.nu_max.values().is_empty() || self.powers.pdr_db.values().is_empty() {
            return Err(ConfigError("invalid sweep: empty nu_max or pdr_db list".into()));
        }
        if self.waveform.n_os == 0 {
            return Err(ConfigError("invalid waveform.n_os: must be positive".into()));
        }
        let e = &self.estimation;
        if !(e.support_fraction > 0.0 && e.support_fraction <= 1.0) {
            return Err(ConfigError("invalid estimation.support_fraction: must lie in (0, 1]".into()));
        }
        if e.points_per_bin == 0 || e.quadrature_lobes == 0 || e.window_tail < 0 {
            return Err(ConfigError("invalid estimation quadrature settings".into()));
        }
        if self.ber_values.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(ConfigError("invalid ber_values: must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn zak_params(&self) -> Result<ZakParams, ConfigError> {
        ZakParams::new(self.params.m, self.params.n, self.params.nu_p).map_err(|e| invalid("params", e))
    }

    pub fn pulse_shape(&self) -> Result<PulseShape, ConfigError> {
        match self.pulse.kind {
            PulseKind::Sinc => Ok(PulseShape::sinc()),
            PulseKind::Rrc => PulseShape::rrc(self.pulse.beta_tau, self.pulse.beta_nu).map_err(|e| invalid("pulse", e)),
        }
    }

    pub fn pilot_mode(&self, mode: ModeConfig) -> PilotMode {
        match mode {
            ModeConfig::Spread => PilotMode::Spread { q: self.chirp.q },
            ModeConfig::Guard7x7 => PilotMode::Guard7x7,
            ModeConfig::PerfectCsi => PilotMode::PerfectCsi,
        }
    }

    /// Link setup for one sweep point.
    pub fn link_setup(&self, mode: ModeConfig, nu_max: f64, pdr_db: f64) -> Result<LinkSetup, ConfigError> {
        let mut s = LinkSetup::new(self.zak_params()?, self.pulse_shape()?, self.pilot_mode(mode));
        let e = &self.estimation;
        s.quad = QuadratureSpec { points_per_bin: e.points_per_bin, n_lobes: e.quadrature_lobes, ..Default::default() };
        s.tail = e.window_tail;
        s.support_fraction = e.support_fraction;
        s.threshold_factor = e.threshold_factor;
        s.nu_max = nu_max;
        s.profile = self.channel.profile;
        s.rho_d_db = self.powers.rho_d_db;
        s.pdr_db = pdr_db;
        Ok(s)
    }
}
