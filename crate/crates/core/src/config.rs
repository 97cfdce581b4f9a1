//! Scenario configuration: every physical, protocol and algorithm parameter of
//! one simulation, loadable from TOML with command-line overrides.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bernstein::DistributionFamily;
use crate::error::ConfigError;
use crate::geometry_channel::doppler_coefficient;
use crate::selflearn::calibration_index;

/// Speed of light used by the Doppler model (m/s).
pub const SPEED_OF_LIGHT: f64 = 3e8;

pub fn dbm_to_w(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Allocation methods the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    /// Deterministic optimum at the nominal (conditional-mean) V2V gains.
    #[serde(rename = "OPT")]
    Opt,
    /// Bernstein approximation with bisection.
    #[serde(rename = "BRRA")]
    Brra,
    /// Large-scale gains only, no protection.
    #[serde(rename = "NRRA")]
    Nrra,
    /// Large-scale gains with the transformed V2V threshold.
    #[serde(rename = "APRA")]
    Apra,
    /// Self-learning, anchor from sample-mean gains.
    #[serde(rename = "SLAA")]
    Slaa,
    /// Self-learning, anchor from worst-case sample gains.
    #[serde(rename = "SLWA")]
    Slwa,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Opt,
        Method::Brra,
        Method::Nrra,
        Method::Apra,
        Method::Slaa,
        Method::Slwa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Opt => "OPT",
            Method::Brra => "BRRA",
            Method::Nrra => "NRRA",
            Method::Apra => "APRA",
            Method::Slaa => "SLAA",
            Method::Slwa => "SLWA",
        }
    }

    pub fn is_self_learning(self) -> bool {
        matches!(self, Method::Slaa | Method::Slwa)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.trim().to_ascii_uppercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == up)
            .ok_or_else(|| ConfigError::UnknownMethod(s.to_string()))
    }
}

/// Parse a comma-separated method list such as `OPT,BRRA,slaa`.
pub fn parse_methods(list: &str) -> Result<Vec<Method>, ConfigError> {
    let mut out = Vec::new();
    for part in list.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Method = part.parse()?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(ConfigError::Invalid("empty method list".into()));
    }
    Ok(out)
}

/// How true V2V gains are drawn around the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// g = ω(λ²|ĥ|² + (1−λ²)|e|²), the power-domain form.
    PowerSplit,
    /// g = ω|λĥ + √(1−λ²)e|².
    Complex,
}

/// How the self-learning anchor power pair is chosen from anchor gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorRule {
    /// Intersection of the CUE and VUE QoS boundaries (minimum-power feasible point).
    Vertex,
    /// Capacity-optimal corner of the deterministic problem.
    Corner,
}

/// Whether the learned radius is calibrated per candidate pair or jointly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationScope {
    Pair,
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Number of CUEs J.
    pub num_cues: usize,
    /// Number of VUE pairs S (S <= J).
    pub num_vues: usize,
    /// CUE to gNB distance range, meters.
    pub cue_distance_range_m: [f64; 2],
    /// Perpendicular distance from the gNB to the nearest lane, meters.
    pub road_offset_m: f64,
    pub lanes: usize,
    pub lane_width_m: f64,
    /// VUE transmitters are uniform on [-x, x] along the road, meters.
    pub vue_half_range_m: f64,
    /// VUE pair spacing in seconds of travel (spacing = s * v).
    pub vue_spacing_s: f64,
    /// Scale the VUE pair spacing by U[0.5, 1.5].
    pub vue_spacing_jitter: bool,
    /// Floor applied to every link distance, meters.
    pub min_distance_m: f64,
    /// Vehicle speed, km/h.
    pub speed_kmh: f64,
    pub carrier_frequency_hz: f64,
    /// CSI feedback delay T, seconds.
    pub feedback_delay_s: f64,
    pub bandwidth_hz: f64,
    /// Noise power spectral density, dBm/Hz.
    pub noise_psd_dbm_hz: f64,
    /// V2I SINR threshold, linear.
    pub sinr_min_cue: f64,
    /// V2V SINR threshold, linear.
    pub sinr_min_vue: f64,
    pub p_max_cue_dbm: f64,
    pub p_max_vue_dbm: f64,
    /// V2V outage probability β.
    pub outage_prob: f64,
    /// Calibration risk ς (confidence is 1 − ς).
    pub confidence_risk: f64,
    /// Pathloss in dB is `constant + exponent * log10(d_km)`.
    pub pathloss_constant_db: f64,
    pub pathloss_exponent_db: f64,
    /// Shadowing std on gNB links, dB.
    pub shadowing_cue_db: f64,
    /// Shadowing std on V2V links, dB.
    pub shadowing_vue_db: f64,
    /// Learning sample count N.
    pub sample_count: usize,
    /// Held-out test realizations per drop M.
    pub test_count: usize,
    pub seed: u64,
    pub error_model: ErrorModel,
    pub family: DistributionFamily,
    /// ĝ = (1 − λ²)ω·q.
    pub deviation_scale: f64,
    /// Bisection threshold as a fraction of p_max (Watts after scaling).
    pub bisection_tol: f64,
    pub anchor_rule: AnchorRule,
    pub calibration_scope: CalibrationScope,
    pub drops: usize,
    pub methods: Vec<Method>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_cues: 4,
            num_vues: 4,
            cue_distance_range_m: [100.0, 200.0],
            road_offset_m: 100.0,
            lanes: 4,
            lane_width_m: 3.5,
            vue_half_range_m: 300.0,
            vue_spacing_s: 2.5,
            vue_spacing_jitter: false,
            min_distance_m: 1.0,
            speed_kmh: 80.0,
            carrier_frequency_hz: 2e9,
            feedback_delay_s: 0.5e-3,
            bandwidth_hz: 10e6,
            noise_psd_dbm_hz: -174.0,
            sinr_min_cue: 2.0,
            sinr_min_vue: 1.0,
            p_max_cue_dbm: 30.0,
            p_max_vue_dbm: 30.0,
            outage_prob: 0.05,
            confidence_risk: 0.05,
            pathloss_constant_db: 128.1,
            pathloss_exponent_db: 37.6,
            shadowing_cue_db: 8.0,
            shadowing_vue_db: 4.0,
            sample_count: 3000,
            test_count: 6000,
            seed: 1,
            error_model: ErrorModel::PowerSplit,
            family: DistributionFamily::UnimodalSymmetric,
            deviation_scale: 1.0,
            bisection_tol: 1e-4,
            anchor_rule: AnchorRule::Vertex,
            calibration_scope: CalibrationScope::Pair,
            drops: 200,
            methods: Method::ALL.to_vec(),
        }
    }
}

/// Sweepable parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    PMaxCue,
    PMaxVue,
    Speed,
    GammaMinCue,
    GammaMinVue,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PMaxCue => "p_max_cue",
            SweepParam::PMaxVue => "p_max_vue",
            SweepParam::Speed => "speed",
            SweepParam::GammaMinCue => "gamma_min_cue",
            SweepParam::GammaMinVue => "gamma_min_vue",
        }
    }
}

impl FromStr for SweepParam {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "p_max_cue" => SweepParam::PMaxCue,
            "p_max_vue" => SweepParam::PMaxVue,
            "speed" => SweepParam::Speed,
            "gamma_min_cue" => SweepParam::GammaMinCue,
            "gamma_min_vue" => SweepParam::GammaMinVue,
            _ => return Err(ConfigError::UnknownParam(s.to_string())),
        })
    }
}

impl ScenarioConfig {
    /// Load from an optional TOML file, then apply `key=value` overrides.
    /// Overrides win over file values; file values win over defaults.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                    path: p.display().to_string(),
                    source,
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| ConfigError::Parse(e.to_string()))?
            }
            None => toml::Table::new(),
        };
        for ov in overrides {
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| ConfigError::Override(ov.clone()))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Override(ov.clone()));
            }
            table.insert(key.to_string(), parse_override_value(raw.trim()));
        }
        let cfg: ScenarioConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.num_cues == 0 {
            return bad("num_cues must be >= 1");
        }
        if self.num_vues > self.num_cues {
            return bad("num_vues must not exceed num_cues");
        }
        if !(self.outage_prob > 0.0 && self.outage_prob < 1.0) {
            return bad("outage_prob must lie in (0, 1)");
        }
        if !(self.confidence_risk > 0.0 && self.confidence_risk < 1.0) {
            return bad("confidence_risk must lie in (0, 1)");
        }
        if self.sample_count == 0 || self.test_count == 0 {
            return bad("sample_count and test_count must be >= 1");
        }
        if self.drops == 0 {
            return bad("drops must be >= 1");
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty");
        }
        let [dmin, dmax] = self.cue_distance_range_m;
        if !(dmin > 0.0 && dmin <= dmax && dmax.is_finite()) {
            return bad("cue_distance_range_m must satisfy 0 < min <= max");
        }
        if dmin < self.road_offset_m {
            return bad("cue_distance_range_m min must be >= road_offset_m");
        }
        if self.lanes == 0 || self.lane_width_m < 0.0 || self.road_offset_m < 0.0 {
            return bad("road layout needs lanes >= 1 and nonnegative widths/offsets");
        }
        if self.vue_half_range_m < 0.0 || self.vue_spacing_s <= 0.0 || self.min_distance_m <= 0.0 {
            return bad("vue_half_range_m >= 0, vue_spacing_s > 0, min_distance_m > 0 required");
        }
        if !(self.feedback_delay_s > 0.0
            && self.carrier_frequency_hz > 0.0
            && self.bandwidth_hz > 0.0
            && self.speed_kmh >= 0.0)
        {
            return bad("feedback delay, carrier, bandwidth must be > 0 and speed >= 0");
        }
        if !(self.sinr_min_cue > 0.0 && self.sinr_min_vue > 0.0) {
            return bad("SINR thresholds must be > 0");
        }
        if self.shadowing_cue_db < 0.0 || self.shadowing_vue_db < 0.0 {
            return bad("shadowing std must be >= 0");
        }
        if !(self.deviation_scale >= 0.0 && self.deviation_scale.is_finite()) {
            return bad("deviation_scale must be finite and >= 0");
        }
        if !(self.bisection_tol > 0.0 && self.bisection_tol < 1.0) {
            return bad("bisection_tol must lie in (0, 1)");
        }
        let finite = [
            self.noise_psd_dbm_hz,
            self.p_max_cue_dbm,
            self.p_max_vue_dbm,
            self.pathloss_constant_db,
            self.pathloss_exponent_db,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return bad("dB quantities must be finite");
        }
        if let Err(e) = self.lambda() {
            return Err(ConfigError::Invalid(e.to_string()));
        }
        if self.methods.iter().any(|m| m.is_self_learning()) {
            if let Err(e) = calibration_index(self.sample_count, self.outage_prob, self.confidence_risk) {
                return Err(ConfigError::Invalid(e.to_string()));
            }
        }
        Ok(())
    }

    /// Noise power σ² in W over the configured bandwidth.
    pub fn sigma2(&self) -> f64 {
        dbm_to_w(self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10())
    }

    pub fn p_max_cue(&self) -> f64 {
        dbm_to_w(self.p_max_cue_dbm)
    }

    pub fn p_max_vue(&self) -> f64 {
        dbm_to_w(self.p_max_vue_dbm)
    }

    pub fn lambda(&self) -> Result<f64, crate::error::ModelError> {
        doppler_coefficient(self.speed_kmh, self.carrier_frequency_hz, self.feedback_delay_s)
    }

    /// Nominal VUE transmitter-receiver distance, meters.
    pub fn vue_pair_distance(&self) -> f64 {
        self.vue_spacing_s * self.speed_kmh / 3.6
    }

    pub fn set_param(&mut self, p: SweepParam, value: f64) {
        match p {
            SweepParam::PMaxCue => self.p_max_cue_dbm = value,
            SweepParam::PMaxVue => self.p_max_vue_dbm = value,
            SweepParam::Speed => self.speed_kmh = value,
            SweepParam::GammaMinCue => self.sinr_min_cue = value,
            SweepParam::GammaMinVue => self.sinr_min_vue = value,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn parse_override_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}
