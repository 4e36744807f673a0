use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::canonical::TRAINING_CANDIDATES;
use super::{HarnessError, SweepOptions, TrainOptions};
use crate::anfis::{AnfisNetwork, MfFamily};
use crate::kinematics::{DrModel, ExtrapolationOrder, Segment, Trajectory, TrajectoryKind, Vec3};
use crate::netsim::{Coupling, Jitter, NetworkModel, QoSProfile, Scenario, SenderConfig};
use crate::reckoning::{Band, Convergence, ThresholdPolicy, DEFAULT_BLEND_WINDOW, DEFAULT_HEARTBEAT, ORIENTATION_DISABLED};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Syntax,
    UnknownKey,
    /// Wrong type, unknown variant, or missing required key.
    InvalidValue,
    Constraint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    /// 1-based.
    pub line: Option<usize>,
    /// Dotted key path, e.g. `run.duration_s`.
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ConfigErrorKind::Syntax => "syntax error",
            ConfigErrorKind::UnknownKey => "unknown key",
            ConfigErrorKind::InvalidValue => "invalid value",
            ConfigErrorKind::Constraint => "constraint violation",
        };
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        write!(f, "{kind}")?;
        if let Some(k) = &self.key {
            write!(f, " at `{k}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Every problem found in one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectoryConfig {
    Circular {
        radius_m: f64,
        angular_rate_rad_per_s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration_s: Option<f64>,
    },
    Sinusoidal {
        amplitude_m: f64,
        angular_rate_rad_per_s: f64,
        #[serde(default)]
        drift_velocity_m_per_s: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration_s: Option<f64>,
    },
    Linear {
        velocity_m_per_s: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration_s: Option<f64>,
    },
    ConstantAccel {
        velocity_m_per_s: [f64; 3],
        acceleration_m_per_s2: [f64; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration_s: Option<f64>,
    },
    Piecewise {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration_s: Option<f64>,
        segments: Vec<TrajectoryConfig>,
    },
}

impl TrajectoryConfig {
    fn duration_slot(&mut self) -> &mut Option<f64> {
        match self {
            Self::Circular { duration_s, .. }
            | Self::Sinusoidal { duration_s, .. }
            | Self::Linear { duration_s, .. }
            | Self::ConstantAccel { duration_s, .. }
            | Self::Piecewise { duration_s, .. } => duration_s,
        }
    }

    fn duration(&self) -> Option<f64> {
        match self {
            Self::Circular { duration_s, .. }
            | Self::Sinusoidal { duration_s, .. }
            | Self::Linear { duration_s, .. }
            | Self::ConstantAccel { duration_s, .. }
            | Self::Piecewise { duration_s, .. } => *duration_s,
        }
    }

    fn kind(&self) -> Result<TrajectoryKind, String> {
        Ok(match self {
            Self::Circular {
                radius_m,
                angular_rate_rad_per_s,
                ..
            } => TrajectoryKind::Circular {
                radius: *radius_m,
                angular_rate: *angular_rate_rad_per_s,
            },
            Self::Sinusoidal {
                amplitude_m,
                angular_rate_rad_per_s,
                drift_velocity_m_per_s,
                ..
            } => TrajectoryKind::Sinusoidal {
                amplitude: *amplitude_m,
                angular_rate: *angular_rate_rad_per_s,
                drift_velocity: *drift_velocity_m_per_s,
            },
            Self::Linear { velocity_m_per_s, .. } => TrajectoryKind::Linear {
                v0: Vec3::from(*velocity_m_per_s),
            },
            Self::ConstantAccel {
                velocity_m_per_s,
                acceleration_m_per_s2,
                ..
            } => TrajectoryKind::ConstantAccel {
                v0: Vec3::from(*velocity_m_per_s),
                a0: Vec3::from(*acceleration_m_per_s2),
            },
            Self::Piecewise { segments, .. } => TrajectoryKind::Piecewise(
                segments
                    .iter()
                    .map(|s| {
                        Ok(Segment {
                            kind: s.kind()?,
                            duration: s.duration().ok_or("every segment needs duration_s")?,
                        })
                    })
                    .collect::<Result<_, String>>()?,
            ),
        })
    }

    pub fn build(&self) -> Result<Trajectory, String> {
        let duration = self.duration().ok_or("trajectory duration is not set")?;
        Trajectory::new(self.kind()?, duration).map_err(|e| e.to_string())
    }
}

fn default_order() -> u8 {
    1
}
fn default_heartbeat() -> f64 {
    DEFAULT_HEARTBEAT
}
fn default_tick() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SenderSection {
    #[serde(default = "default_order")]
    pub order: u8,
    /// Drop the ½ on the acceleration term.
    #[serde(default)]
    pub unhalved_acceleration: bool,
    /// Refit the base from the last N updates; 0 disables.
    #[serde(default)]
    pub history_fit_samples: usize,
    #[serde(default = "default_heartbeat")]
    pub heartbeat_s: f64,
    #[serde(default = "default_tick")]
    pub tick_s: f64,
    #[serde(default)]
    pub viewer_m: [f64; 3],
}

impl Default for SenderSection {
    fn default() -> Self {
        Self {
            order: default_order(),
            unhalved_acceleration: false,
            history_fit_samples: 0,
            heartbeat_s: DEFAULT_HEARTBEAT,
            tick_s: default_tick(),
            viewer_m: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceName {
    #[default]
    Snap,
    Linear,
}

fn default_blend() -> f64 {
    DEFAULT_BLEND_WINDOW
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSection {
    #[serde(default)]
    pub convergence: ConvergenceName,
    #[serde(default = "default_blend")]
    pub blend_window_s: f64,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        Self {
            convergence: ConvergenceName::Snap,
            blend_window_s: DEFAULT_BLEND_WINDOW,
        }
    }
}

fn orientation_disabled() -> f64 {
    ORIENTATION_DISABLED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub max_distance_m: f64,
    pub th_pos_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    Fixed {
        th_pos_m: f64,
        #[serde(default = "orientation_disabled")]
        th_or_rad: f64,
    },
    MultiLevel {
        bands: Vec<BandConfig>,
    },
    /// Network file paths are relative to the config file.
    Anfis {
        network_file: String,
        th_min_m: f64,
        th_max_m: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum JitterName {
    #[default]
    None,
    Uniform,
    /// Truncated normal; `jitter_ms` is the standard deviation.
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    #[serde(default)]
    pub base_delay_ms: f64,
    #[serde(default)]
    pub jitter: JitterName,
    /// Half-width for uniform jitter, deviation for normal jitter.
    #[serde(default)]
    pub jitter_ms: f64,
    #[serde(default)]
    pub loss_fraction: f64,
    #[serde(default)]
    pub fifo: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingName {
    #[default]
    Tight,
    Loose,
}

impl From<CouplingName> for Coupling {
    fn from(c: CouplingName) -> Self {
        match c {
            CouplingName::Tight => Coupling::Tight,
            CouplingName::Loose => Coupling::Loose,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QosTable {
    #[serde(default)]
    coupling: CouplingName,
    dt_max_ms: Option<f64>,
    loss_max: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum QosInput {
    Name(CouplingName),
    Table(QosTable),
}

/// Either `qos = "tight"` or a `[qos]` table overriding the profile's limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "QosInput")]
pub struct QosSection {
    pub coupling: CouplingName,
    pub dt_max_ms: f64,
    pub loss_max: f64,
}

impl From<QosInput> for QosSection {
    fn from(q: QosInput) -> Self {
        let (coupling, dt, loss) = match q {
            QosInput::Name(c) => (c, None, None),
            QosInput::Table(t) => (t.coupling, t.dt_max_ms, t.loss_max),
        };
        let p = QoSProfile::for_coupling(coupling.into());
        Self {
            coupling,
            dt_max_ms: dt.unwrap_or(p.dt_max_ms),
            loss_max: loss.unwrap_or(p.loss_max),
        }
    }
}

impl Default for QosSection {
    fn default() -> Self {
        QosInput::Name(CouplingName::Tight).into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub duration_s: f64,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the sender tick.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement_tick_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    #[default]
    Gbell,
    Sigmoid,
}

fn default_epochs() -> usize {
    50
}
fn default_eta() -> f64 {
    0.01
}
fn default_candidates() -> Vec<f64> {
    TRAINING_CANDIDATES.to_vec()
}
fn default_window() -> f64 {
    SweepOptions::default().window_s
}
fn default_stride() -> usize {
    SweepOptions::default().stride
}
fn default_budget() -> f64 {
    SweepOptions::default().budget_factor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnfisSection {
    /// Where `train-anfis` writes the trained network unless `--out` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network_file: Option<String>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_eta")]
    pub learning_rate: f64,
    #[serde(default)]
    pub family: FamilyName,
    #[serde(default = "default_candidates")]
    pub candidates_m: Vec<f64>,
    #[serde(default = "default_window")]
    pub window_s: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_budget")]
    pub budget_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jitter_seed: Option<u64>,
}

impl Default for AnfisSection {
    fn default() -> Self {
        Self {
            network_file: None,
            epochs: default_epochs(),
            learning_rate: default_eta(),
            family: FamilyName::Gbell,
            candidates_m: default_candidates(),
            window_s: default_window(),
            stride: default_stride(),
            budget_factor: default_budget(),
            jitter_seed: None,
        }
    }
}

impl AnfisSection {
    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            window_s: self.window_s,
            stride: self.stride,
            budget_factor: self.budget_factor,
        }
    }

    pub fn train_options(&self) -> TrainOptions {
        TrainOptions {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            family: match self.family {
                FamilyName::Gbell => MfFamily::GBell,
                FamilyName::Sigmoid => MfFamily::Sigmoid,
            },
            jitter_seed: self.jitter_seed,
        }
    }
}

fn default_schema() -> u32 {
    CONFIG_SCHEMA_VERSION
}

/// A scenario document with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub trajectory: TrajectoryConfig,
    #[serde(default)]
    pub sender: SenderSection,
    #[serde(default)]
    pub receiver: ReceiverSection,
    pub policy: PolicyConfig,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub qos: QosSection,
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anfis: Option<AnfisSection>,
}

/// 1-based line of `key` inside `[section]` (or the top level for an empty section).
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.starts_with('[') {
            current = l.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if current == section && key.is_empty() {
                return Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some(rest) = l.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn backticked(msg: &str, after: &str) -> Option<String> {
    let rest = &msg[msg.find(after)? + after.len()..];
    let start = rest.find('`')? + 1;
    let end = rest[start..].find('`')? + start;
    Some(rest[start..end].to_string())
}

fn deserialize_error(text: &str, e: toml::de::Error) -> ConfigError {
    let line = e.span().map(|s| line_of(text, s.start));
    let msg = e.message().trim().to_string();
    if text.parse::<toml::Table>().is_err() {
        return ConfigError {
            kind: ConfigErrorKind::Syntax,
            line,
            key: None,
            message: msg,
        };
    }
    let (kind, key) = if msg.contains("unknown field") {
        (ConfigErrorKind::UnknownKey, backticked(&msg, "unknown field"))
    } else {
        (ConfigErrorKind::InvalidValue, backticked(&msg, "missing field"))
    };
    let message = if kind == ConfigErrorKind::UnknownKey {
        format!("{msg} (keys carry their unit as a suffix, e.g. duration_s)")
    } else {
        msg
    };
    ConfigError { kind, line, key, message }
}

struct Checker<'a> {
    text: &'a str,
    errors: Vec<ConfigError>,
}

impl Checker<'_> {
    fn fail(&mut self, section: &str, key: &str, message: impl Into<String>) {
        let line = locate(self.text, section, key).or_else(|| locate(self.text, section, ""));
        let dotted = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        self.errors.push(ConfigError {
            kind: ConfigErrorKind::Constraint,
            line,
            key: Some(dotted),
            message: message.into(),
        });
    }

    fn positive(&mut self, section: &str, key: &str, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.fail(section, key, format!("must be positive, got {v}"));
        }
    }

    fn nonnegative(&mut self, section: &str, key: &str, v: f64) {
        if !(v.is_finite() && v >= 0.0) {
            self.fail(section, key, format!("must be nonnegative, got {v}"));
        }
    }

    fn fraction(&mut self, section: &str, key: &str, v: f64) {
        if !(0.0..=1.0).contains(&v) {
            self.fail(section, key, format!("must lie in [0, 1], got {v}"));
        }
    }
}

impl ScenarioConfig {
    /// Fills keys whose defaults depend on other keys.
    fn normalize(&mut self) {
        let d = self.run.duration_s;
        let slot = self.trajectory.duration_slot();
        if slot.is_none() {
            *slot = Some(d);
        }
        if self.run.measurement_tick_s.is_none() {
            self.run.measurement_tick_s = Some(self.sender.tick_s);
        }
    }

    fn check(&self, text: &str) -> Vec<ConfigError> {
        let mut c = Checker {
            text,
            errors: Vec::new(),
        };
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            c.fail(
                "",
                "schema_version",
                format!("unsupported schema version {} (expected {CONFIG_SCHEMA_VERSION})", self.schema_version),
            );
        }
        c.positive("run", "duration_s", self.run.duration_s);
        match self.trajectory.build() {
            Ok(t) if self.run.duration_s > t.duration() + 1e-9 => c.fail(
                "trajectory",
                "duration_s",
                format!("trajectory span {} s is shorter than the run", t.duration()),
            ),
            Ok(_) => {}
            Err(e) => c.fail("trajectory", "kind", e),
        }

        let s = &self.sender;
        if s.order > 2 {
            c.fail("sender", "order", format!("extrapolation order must be 0, 1 or 2, got {}", s.order));
        }
        if s.history_fit_samples != 0 && s.history_fit_samples < 3 {
            c.fail("sender", "history_fit_samples", "history fit needs at least 3 samples");
        }
        c.positive("sender", "heartbeat_s", s.heartbeat_s);
        c.positive("sender", "tick_s", s.tick_s);
        if s.viewer_m.iter().any(|v| !v.is_finite()) {
            c.fail("sender", "viewer_m", "viewer position must be finite");
        }
        let m = self.run.measurement_tick_s.unwrap_or(s.tick_s);
        c.positive("run", "measurement_tick_s", m);
        if m > 0.0 && s.tick_s > 0.0 {
            let r = s.tick_s / m;
            if r < 1.0 - 1e-9 || (r - r.round()).abs() > 1e-9 * r {
                c.fail("run", "measurement_tick_s", "sender tick must be a whole multiple of the measurement tick");
            }
        }

        c.nonnegative("receiver", "blend_window_s", self.receiver.blend_window_s);

        match &self.policy {
            PolicyConfig::Fixed { th_pos_m, th_or_rad } => {
                c.positive("policy", "th_pos_m", *th_pos_m);
                c.positive("policy", "th_or_rad", *th_or_rad);
            }
            PolicyConfig::MultiLevel { bands } => {
                if let Err(e) = ThresholdPolicy::multi_level(bands.iter().map(band).collect()) {
                    c.fail("policy", "bands", e.to_string());
                }
            }
            PolicyConfig::Anfis {
                th_min_m,
                th_max_m,
                network_file,
            } => {
                c.positive("policy", "th_min_m", *th_min_m);
                if !(*th_max_m >= *th_min_m) {
                    c.fail("policy", "th_max_m", "must not be below th_min_m");
                }
                if network_file.is_empty() {
                    c.fail("policy", "network_file", "empty path");
                }
            }
        }

        let n = &self.network;
        c.nonnegative("network", "base_delay_ms", n.base_delay_ms);
        c.nonnegative("network", "jitter_ms", n.jitter_ms);
        c.fraction("network", "loss_fraction", n.loss_fraction);
        c.nonnegative("qos", "dt_max_ms", self.qos.dt_max_ms);
        c.fraction("qos", "loss_max", self.qos.loss_max);

        if let Some(a) = &self.anfis {
            if a.epochs == 0 {
                c.fail("anfis", "epochs", "need at least one epoch");
            }
            c.nonnegative("anfis", "learning_rate", a.learning_rate);
            if a.candidates_m.is_empty() || a.candidates_m.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                c.fail("anfis", "candidates_m", "need a nonempty list of positive thresholds");
            }
            c.positive("anfis", "window_s", a.window_s);
            if a.stride == 0 {
                c.fail("anfis", "stride", "must be at least 1");
            }
            c.positive("anfis", "budget_factor", a.budget_factor);
        }
        c.errors
    }

    pub fn measurement_tick(&self) -> f64 {
        self.run.measurement_tick_s.unwrap_or(self.sender.tick_s)
    }

    pub fn qos_profile(&self) -> QoSProfile {
        QoSProfile {
            coupling: self.qos.coupling.into(),
            dt_max_ms: self.qos.dt_max_ms,
            loss_max: self.qos.loss_max,
        }
    }

    pub fn network_model(&self) -> NetworkModel {
        let n = &self.network;
        let w = n.jitter_ms / 1000.0;
        NetworkModel {
            base_delay: n.base_delay_ms / 1000.0,
            jitter: match n.jitter {
                JitterName::None => Jitter::None,
                JitterName::Uniform => Jitter::Uniform { half_width: w },
                JitterName::Normal => Jitter::TruncatedNormal { sigma: w },
            },
            loss_prob: n.loss_fraction,
            seed: self.run.seed,
            enforce_fifo: n.fifo,
        }
    }

    pub fn anfis_section(&self) -> AnfisSection {
        self.anfis.clone().unwrap_or_default()
    }

    /// Builds the policy, loading network files relative to `base_dir`.
    pub fn policy(&self, base_dir: &Path) -> Result<ThresholdPolicy, HarnessError> {
        Ok(match &self.policy {
            PolicyConfig::Fixed { th_pos_m, th_or_rad } => ThresholdPolicy::fixed_with_orientation(*th_pos_m, *th_or_rad)?,
            PolicyConfig::MultiLevel { bands } => ThresholdPolicy::multi_level(bands.iter().map(band).collect())?,
            PolicyConfig::Anfis {
                network_file,
                th_min_m,
                th_max_m,
            } => {
                let net = AnfisNetwork::load(resolve(base_dir, network_file))?;
                ThresholdPolicy::anfis(net, *th_min_m, *th_max_m)?
            }
        })
    }

    pub fn to_scenario(&self, base_dir: &Path) -> Result<Scenario, HarnessError> {
        let trajectory = self
            .trajectory
            .build()
            .map_err(|m| HarnessError::Domain(format!("trajectory: {m}")))?;
        let order = ExtrapolationOrder::from_index(self.sender.order)
            .ok_or_else(|| HarnessError::Domain(format!("bad order {}", self.sender.order)))?;
        let model = DrModel {
            order,
            unhalved_acceleration: self.sender.unhalved_acceleration,
        };
        let sender = SenderConfig {
            model,
            history_fit: (self.sender.history_fit_samples > 0).then_some(self.sender.history_fit_samples),
            policy: self.policy(base_dir)?,
            heartbeat_period: self.sender.heartbeat_s,
            tick_dt: self.sender.tick_s,
            viewer: Vec3::from(self.sender.viewer_m),
        };
        let sc = Scenario {
            trajectory,
            sender,
            convergence: match self.receiver.convergence {
                ConvergenceName::Snap => Convergence::Snap,
                ConvergenceName::Linear => Convergence::Linear {
                    window: self.receiver.blend_window_s,
                },
            },
            network: self.network_model(),
            qos: self.qos_profile(),
            duration: self.run.duration_s,
            measurement_dt: self.measurement_tick(),
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Serializes with every default written out.
    pub fn emit(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Ok(parse_scenario(&text)?)
    }
}

fn band(b: &BandConfig) -> Band {
    Band {
        max_distance: b.max_distance_m,
        th_pos: b.th_pos_m,
    }
}

/// `rel` resolved against `base_dir` unless absolute.
pub fn resolve(base_dir: &Path, rel: &str) -> PathBuf {
    let p = Path::new(rel);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Parses and validates a scenario document, filling defaults.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigErrors> {
    let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigErrors(vec![deserialize_error(text, e)]))?;
    cfg.normalize();
    let errors = cfg.check(text);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errors))
    }
}

/// Serializes `cfg` back to a document that parses to the same config.
pub fn emit_scenario(cfg: &ScenarioConfig) -> String {
    cfg.emit()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const MINIMAL: &str = r#"
[trajectory]
kind = "sinusoidal"
amplitude_m = 5.0
angular_rate_rad_per_s = 1.0

[policy]
kind = "fixed"
th_pos_m = 0.5

[run]
duration_s = 12.0
"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_scenario(MINIMAL).unwrap();
        assert_eq!(c.sender.heartbeat_s, 5.0);
        assert_eq!(c.sender.order, 1);
        assert_eq!(c.receiver.convergence, ConvergenceName::Snap);
        assert!(!c.network.fifo);
        assert_eq!(c.measurement_tick(), 0.01);
        assert_eq!(c.trajectory.duration(), Some(12.0));
        assert_eq!(c.policy, PolicyConfig::Fixed { th_pos_m: 0.5, th_or_rad: PI });
        let sc = c.to_scenario(Path::new(".")).unwrap();
        assert_eq!(sc.duration, 12.0);
    }

    #[test]
    fn negative_duration_names_key_and_line() {
        let text = MINIMAL.replace("duration_s = 12.0", "duration_s = -1");
        let errs = parse_scenario(&text).unwrap_err().0;
        let e = errs.iter().find(|e| e.key.as_deref() == Some("run.duration_s")).unwrap();
        assert_eq!(e.kind, ConfigErrorKind::Constraint);
        assert_eq!(e.line, Some(text.lines().position(|l| l.contains("-1")).unwrap() + 1));
    }

    #[test]
    fn qos_shorthand_and_table() {
        let c = parse_scenario(&format!("qos = \"tight\"\n{MINIMAL}")).unwrap();
        assert_eq!((c.qos.dt_max_ms, c.qos.loss_max), (100.0, 0.02));
        let c = parse_scenario(&format!("{MINIMAL}\n[qos]\ncoupling = \"loose\"\nloss_max = 0.1\n")).unwrap();
        assert_eq!((c.qos.dt_max_ms, c.qos.loss_max), (300.0, 0.1));
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let text = MINIMAL.replace("duration_s = 12.0", "duration = 12.0");
        let e = &parse_scenario(&text).unwrap_err().0[0];
        assert_eq!(e.kind, ConfigErrorKind::UnknownKey);
        assert_eq!(e.key.as_deref(), Some("duration"));
        assert!(e.line.is_some());
    }

    #[test]
    fn syntax_and_type_errors() {
        let e = &parse_scenario("[run\nduration_s = 1").unwrap_err().0[0];
        assert_eq!(e.kind, ConfigErrorKind::Syntax);
        let text = MINIMAL.replace("duration_s = 12.0", "duration_s = \"12 s\"");
        let e = &parse_scenario(&text).unwrap_err().0[0];
        assert_eq!(e.kind, ConfigErrorKind::InvalidValue);
    }

    #[test]
    fn collects_every_constraint_violation() {
        let text = format!("{MINIMAL}\n[sender]\norder = 3\ntick_s = 0.0\n\n[network]\nloss_fraction = 2.0\n");
        let errs = parse_scenario(&text).unwrap_err().0;
        let keys: Vec<_> = errs.iter().filter_map(|e| e.key.clone()).collect();
        for k in ["sender.order", "sender.tick_s", "network.loss_fraction"] {
            assert!(keys.iter().any(|x| x == k), "{k} missing from {keys:?}");
        }
    }

    #[test]
    fn emit_parse_is_a_fixed_point() {
        let full = r#"
schema_version = 1

[trajectory]
kind = "piecewise"

[[trajectory.segments]]
kind = "linear"
velocity_m_per_s = [1.0, 0.0, 0.0]
duration_s = 4.0

[[trajectory.segments]]
kind = "circular"
radius_m = 3.0
angular_rate_rad_per_s = 0.7
duration_s = 10.0

[sender]
order = 2
history_fit_samples = 4
viewer_m = [1.5, -2.0, 0.0]

[receiver]
convergence = "linear"
blend_window_s = 0.3

[policy]
kind = "multi_level"
bands = [{ max_distance_m = 10.0, th_pos_m = 0.2 }, { max_distance_m = 100.0, th_pos_m = 0.9 }]

[network]
base_delay_ms = 40.0
jitter = "normal"
jitter_ms = 7.5
loss_fraction = 0.01
fifo = true

[qos]
coupling = "loose"

[run]
duration_s = 14.0
seed = 9
measurement_tick_s = 0.005

[anfis]
epochs = 5
candidates_m = [0.1, 0.7]
jitter_seed = 3
"#;
        let a = parse_scenario(full).unwrap();
        let text = a.emit();
        let b = parse_scenario(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(text, b.emit());
        let min = parse_scenario(MINIMAL).unwrap();
        assert_eq!(parse_scenario(&min.emit()).unwrap(), min);
    }
}
