//! Run configuration: strict JSON loading, defaults and validation.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use rfsqueeze_core::instrument::{log_spaced, EstimatorOptions, FreeParameter, InstrumentModel, Thresholds};
use rfsqueeze_core::quadrature::variance_from_percent_below_vacuum;
use rfsqueeze_core::{LOConfig, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const DEFAULT_LIFETIME_NS: f64 = 0.58;
pub const DEFAULT_SATURATION: f64 = 0.1;

/// Measured in-phase squeezing at s = 0.1, in percent below the vacuum level.
pub const DEFAULT_TARGET_PERCENT: f64 = 3.1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemBlock,
    pub lo: LoBlock,
    pub instrument: InstrumentModel,
    pub sweep: SweepBlock,
    pub campaign: CampaignBlock,
    pub calibration: CalibrationBlock,
    pub output: OutputBlock,
}

/// Emitter. Rates are per ns when `lifetime_ns` sets Γ. Without `lifetime_ns`
/// and `gamma` the lifetime defaults to 0.58 ns; without `s` and `rabi` the
/// saturation defaults to 0.1.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemBlock {
    pub lifetime_ns: Option<f64>,
    /// Radiative rate; derived from `lifetime_ns` when absent.
    pub gamma: Option<f64>,
    /// Saturation parameter `2Ω²/Γ²`.
    #[serde(alias = "power")]
    pub s: Option<f64>,
    /// Rabi frequency; derived from `s` when absent.
    pub rabi: Option<f64>,
    pub detuning: f64,
    pub dephasing: f64,
}

/// Local oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoBlock {
    /// LO intensity `|β|²`; matched to the fluorescence intensity when absent.
    pub beta2: Option<f64>,
    pub phase: f64,
    /// Overall fringe visibility of the superimposed field.
    pub visibility: f64,
}

impl Default for LoBlock {
    fn default() -> Self {
        Self {
            beta2: None,
            phase: 0.0,
            visibility: 0.738,
        }
    }
}

/// Either explicit values or a generated range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range(GridRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

impl Grid {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self::Range(GridRange {
            min,
            max,
            points,
            spacing: Spacing::Linear,
        })
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Self::Range(GridRange {
            min,
            max,
            points,
            spacing: Spacing::Log,
        })
    }

    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            Self::Values(v) => {
                if v.is_empty() {
                    Err("grid is empty".into())
                } else if v.iter().any(|x| !x.is_finite()) {
                    Err("grid values must be finite".into())
                } else {
                    Ok(v.clone())
                }
            }
            Self::Range(r) => {
                if !(r.min.is_finite() && r.max.is_finite()) || r.max < r.min {
                    return Err(format!("range needs finite min <= max, got {} to {}", r.min, r.max));
                }
                if r.points == 0 {
                    return Err("range needs at least one point".into());
                }
                if r.points == 1 {
                    return Ok(vec![r.min]);
                }
                match r.spacing {
                    Spacing::Linear => {
                        let step = (r.max - r.min) / (r.points - 1) as f64;
                        Ok((0..r.points)
                            .map(|k| if k == r.points - 1 { r.max } else { r.min + step * k as f64 })
                            .collect())
                    }
                    Spacing::Log => log_spaced(r.min, r.max, r.points).map_err(|e| e.to_string()),
                }
            }
        }
    }
}

/// Grids used by the figure and sweep commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub s_grid: Grid,
    pub phi_grid: Grid,
    /// Largest delay (ns); 15 lifetimes when absent.
    pub tau_span: Option<f64>,
    pub tau_points: usize,
    /// Half-width of the detuning scan (rate units); 3Γ when absent.
    pub detuning_span: Option<f64>,
    pub detuning_points: usize,
    /// LO phases of the unblocked correlation traces.
    pub correlation_phases: Vec<f64>,
    /// Saturation parameters of the Wigner panels; 1e6 stands in for s → ∞.
    pub wigner_s: Vec<f64>,
    pub wigner_half_width: f64,
    pub wigner_points: usize,
    /// Add the coherent-light reference series to the phase scan.
    pub coherent_reference: bool,
}

impl Default for SweepBlock {
    fn default() -> Self {
        Self {
            s_grid: Grid::log(0.01, 30.0, 301),
            phi_grid: Grid::linear(0.0, TAU, 181),
            tau_span: None,
            tau_points: 601,
            detuning_span: None,
            detuning_points: 121,
            correlation_phases: vec![0.0, 0.5 * PI, PI],
            wigner_s: vec![0.0, 0.36, 10.0, 1e6],
            wigner_half_width: 4.0,
            wigner_points: 129,
            coherent_reference: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignBlock {
    pub duration_s: f64,
    pub bins: usize,
    pub thresholds: Thresholds,
    pub estimator: EstimatorOptions,
    /// Calibrate the free instrument parameter before simulating.
    pub calibrate: bool,
}

impl Default for CampaignBlock {
    fn default() -> Self {
        Self {
            duration_s: 8.0 * 3600.0,
            bins: 16,
            thresholds: Thresholds::default(),
            estimator: EstimatorOptions::default(),
            calibrate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationBlock {
    /// Target normally ordered variance; derived from `target_percent` when absent.
    pub target: Option<f64>,
    /// Target squeezing in percent below the vacuum level.
    pub target_percent: Option<f64>,
    /// `phase_jitter_sigma` or `irf_fwhm`.
    pub free: String,
    /// Saturation parameter of the target; the system value when absent.
    pub s: Option<f64>,
}

impl Default for CalibrationBlock {
    fn default() -> Self {
        Self {
            target: None,
            target_percent: None,
            free: "phase_jitter_sigma".into(),
            s: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub seed: u64,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            dir: None,
            formats: vec![Format::Csv],
            seed: 0,
        }
    }
}

/// Keys accepted in addition to the serialized field names.
const ALIASES: &[(&str, &str)] = &[("system", "power")];

/// Reads, strictly parses, resolves and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        CliError::Config(vec![format!("parse error at line {} column {}: {e}", e.line(), e.column())])
    })?;
    let template = serde_json::to_value(RunConfig::default()).expect("defaults serialize");
    let mut problems = Vec::new();
    unknown_keys(&value, &template, "", &mut problems);
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }
    let config: RunConfig = serde_json::from_str(text).map_err(|e| {
        CliError::Config(vec![format!("invalid value at line {} column {}: {e}", e.line(), e.column())])
    })?;
    config.resolve()
}

fn unknown_keys(value: &Value, template: &Value, path: &str, problems: &mut Vec<String>) {
    let Value::Object(map) = value else { return };
    let known: Vec<String> = match template {
        Value::Object(t) => {
            let mut keys: Vec<String> = t.keys().cloned().collect();
            let block = path.rsplit('.').next().unwrap_or("");
            keys.extend(ALIASES.iter().filter(|(b, _)| *b == block).map(|(_, k)| k.to_string()));
            keys
        }
        _ => return,
    };
    for (key, child) in map {
        let full = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
        if known.iter().any(|k| k == key) {
            let sub = template.get(key).cloned().unwrap_or(Value::Null);
            unknown_keys(child, &sub, &full, problems);
        } else {
            let suggestion = known
                .iter()
                .map(|k| (strsim::jaro_winkler(key, k), k))
                .filter(|(score, _)| *score > 0.7)
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, k)| format!("; did you mean `{k}`?"))
                .unwrap_or_default();
            problems.push(format!("unknown key `{full}`{suggestion}"));
        }
    }
}

impl RunConfig {
    /// Fills derived values and checks every constraint, reporting all violations.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let mut problems = Vec::new();
        let sys = &mut self.system;
        let positive = |name: &str, v: Option<f64>, problems: &mut Vec<String>| {
            if let Some(x) = v {
                if !(x > 0.0) || !x.is_finite() {
                    problems.push(format!("system.{name} must be finite and positive, got {x}"));
                }
            }
        };
        positive("lifetime_ns", sys.lifetime_ns, &mut problems);
        positive("gamma", sys.gamma, &mut problems);
        match (sys.gamma, sys.lifetime_ns) {
            (Some(g), Some(t)) if g > 0.0 && t > 0.0 && ((g * t) - 1.0).abs() > 1e-9 => {
                problems.push(format!("system.gamma {g} contradicts system.lifetime_ns {t}; give one of them"))
            }
            _ => {}
        }
        if let Some(s) = sys.s {
            if !(s >= 0.0) || !s.is_finite() {
                problems.push(format!("system.s must be finite and non-negative, got {s}"));
            }
        }
        if let Some(r) = sys.rabi {
            if !(r >= 0.0) || !r.is_finite() {
                problems.push(format!("system.rabi must be finite and non-negative, got {r}"));
            }
        }
        if !sys.detuning.is_finite() {
            problems.push(format!("system.detuning must be finite, got {}", sys.detuning));
        }
        if !(sys.dephasing >= 0.0) || !sys.dephasing.is_finite() {
            problems.push(format!("system.dephasing must be finite and non-negative, got {}", sys.dephasing));
        }

        if let Some(b) = self.lo.beta2 {
            if !(b >= 0.0) || !b.is_finite() {
                problems.push(format!("lo.beta2 must be finite and non-negative, got {b}"));
            }
        }
        if !self.lo.phase.is_finite() {
            problems.push(format!("lo.phase must be finite, got {}", self.lo.phase));
        }
        if !(0.0..=1.0).contains(&self.lo.visibility) {
            problems.push(format!("lo.visibility must lie in [0, 1], got {}", self.lo.visibility));
        }

        if let Err(e) = self.instrument.validate() {
            problems.push(format!("instrument: {e}"));
        }

        let sw = &self.sweep;
        match sw.s_grid.values() {
            Ok(v) if v.iter().any(|&s| !(s > 0.0)) => problems.push("sweep.s_grid values must be positive".into()),
            Ok(v) if v.windows(2).any(|w| w[1] <= w[0]) => {
                problems.push("sweep.s_grid must be strictly ascending".into())
            }
            Ok(_) => {}
            Err(e) => problems.push(format!("sweep.s_grid: {e}")),
        }
        if let Err(e) = sw.phi_grid.values() {
            problems.push(format!("sweep.phi_grid: {e}"));
        }
        if let Some(span) = sw.tau_span {
            if !(span > 0.0) || !span.is_finite() {
                problems.push(format!("sweep.tau_span must be finite and positive, got {span}"));
            }
        }
        if sw.tau_points < 2 {
            problems.push(format!("sweep.tau_points must be at least 2, got {}", sw.tau_points));
        }
        if let Some(span) = sw.detuning_span {
            if !(span > 0.0) || !span.is_finite() {
                problems.push(format!("sweep.detuning_span must be finite and positive, got {span}"));
            }
        }
        if sw.detuning_points < 2 {
            problems.push(format!("sweep.detuning_points must be at least 2, got {}", sw.detuning_points));
        }
        if sw.correlation_phases.iter().any(|p| !p.is_finite()) {
            problems.push("sweep.correlation_phases must be finite".into());
        }
        if sw.wigner_s.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            problems.push("sweep.wigner_s values must be finite and non-negative".into());
        }
        if !(sw.wigner_half_width > 0.0) || !sw.wigner_half_width.is_finite() {
            problems.push(format!("sweep.wigner_half_width must be positive, got {}", sw.wigner_half_width));
        }
        if sw.wigner_points < 3 {
            problems.push(format!("sweep.wigner_points must be at least 3, got {}", sw.wigner_points));
        }

        let c = &self.campaign;
        if !(c.duration_s > 0.0) || !c.duration_s.is_finite() {
            problems.push(format!("campaign.duration_s must be finite and positive, got {}", c.duration_s));
        }
        if c.bins == 0 {
            problems.push("campaign.bins must be at least 1".into());
        }
        if !(c.estimator.tail_start > 0.0) {
            problems.push(format!("campaign.estimator.tail_start must be positive, got {}", c.estimator.tail_start));
        }

        let cal = &mut self.calibration;
        match (cal.target, cal.target_percent) {
            (Some(_), Some(_)) => problems.push("give either calibration.target or calibration.target_percent".into()),
            (Some(t), None) if !t.is_finite() => problems.push(format!("calibration.target must be finite, got {t}")),
            (None, Some(p)) if !p.is_finite() => {
                problems.push(format!("calibration.target_percent must be finite, got {p}"))
            }
            (None, percent) => {
                cal.target = Some(variance_from_percent_below_vacuum(percent.unwrap_or(DEFAULT_TARGET_PERCENT)));
                cal.target_percent = None;
            }
            _ => {}
        }
        if let Err(e) = FreeParameter::parse(&cal.free) {
            problems.push(format!("calibration.free: {e}"));
        }
        if let Some(s) = cal.s {
            if !(s > 0.0) || !s.is_finite() {
                problems.push(format!("calibration.s must be finite and positive, got {s}"));
            }
        }
        if self.output.formats.is_empty() {
            problems.push("output.formats must list at least one of csv, json, svg".into());
        }

        if !problems.is_empty() {
            return Err(CliError::Config(problems));
        }

        let sys = &mut self.system;
        let lifetime = sys.lifetime_ns.unwrap_or(DEFAULT_LIFETIME_NS);
        let gamma = sys.gamma.unwrap_or(1.0 / lifetime);
        sys.gamma = Some(gamma);
        sys.lifetime_ns = Some(1.0 / gamma);
        let rabi = match (sys.s, sys.rabi) {
            (_, Some(r)) => r,
            (s, None) => rfsqueeze_core::rabi_from_saturation(s.unwrap_or(DEFAULT_SATURATION), gamma)?,
        };
        let s = 2.0 * rabi * rabi / (gamma * gamma);
        if let Some(given) = sys.s {
            if (given - s).abs() > 1e-9 * given.max(1.0) {
                return Err(CliError::Config(vec![format!(
                    "system.s {given} contradicts system.rabi {rabi}; give one of them"
                )]));
            }
        }
        sys.rabi = Some(rabi);
        sys.s = Some(sys.s.unwrap_or(s));
        if self.sweep.tau_span.is_none() {
            self.sweep.tau_span = Some(15.0 / gamma);
        }
        if self.sweep.detuning_span.is_none() {
            self.sweep.detuning_span = Some(3.0 * gamma);
        }
        if self.calibration.s.is_none() {
            self.calibration.s = self.system.s;
        }
        let params = self.params()?;
        if self.instrument.wandering_sigma >= gamma {
            return Err(CliError::Config(vec![format!(
                "instrument.wandering_sigma {} must be sub-linewidth (< gamma = {gamma})",
                self.instrument.wandering_sigma
            )]));
        }
        if self.lo.beta2.is_none() {
            self.lo.beta2 = Some(LOConfig::matched(&params, 0.0)?.beta2());
        }
        Ok(self)
    }

    pub fn params(&self) -> Result<SystemParams, CliError> {
        let s = &self.system;
        Ok(SystemParams::new(
            s.gamma.expect("resolved"),
            s.rabi.expect("resolved"),
            s.detuning,
            s.dephasing,
        )?)
    }

    pub fn lo_config(&self) -> Result<LOConfig, CliError> {
        Ok(LOConfig::new(self.lo.beta2.expect("resolved").sqrt(), self.lo.phase)?)
    }

    pub fn tau_grid(&self) -> Result<Vec<f64>, CliError> {
        Ok(rfsqueeze_core::correlators::uniform_tau_grid(
            self.sweep.tau_span.expect("resolved"),
            self.sweep.tau_points,
        )?)
    }

    pub fn s_grid(&self) -> Vec<f64> {
        self.sweep.s_grid.values().expect("validated")
    }

    pub fn phi_grid(&self) -> Vec<f64> {
        self.sweep.phi_grid.values().expect("validated")
    }

    pub fn free_parameter(&self) -> FreeParameter {
        FreeParameter::parse(&self.calibration.free).expect("validated")
    }

    /// Any timing, phase or spectral imperfection configured.
    pub fn instrument_active(&self) -> bool {
        let m = &self.instrument;
        m.irf_fwhm > 0.0 || m.phase_jitter_sigma > 0.0 || m.wandering_sigma > 0.0
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn messages(e: CliError) -> Vec<String> {
        match e {
            CliError::Config(m) => m,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config(r#"{"system":{"lifetime_ns":0.58,"s":0.1}}"#).unwrap();
        assert!((c.system.gamma.unwrap() - 1.0 / 0.58).abs() < 1e-12);
        assert!(c.system.rabi.unwrap() > 0.0);
        assert_eq!(c.campaign.bins, 16);
        assert!((c.calibration.target.unwrap() + 0.00775).abs() < 1e-12);
        assert!(c.lo.beta2.unwrap() > 0.0);
    }

    #[test]
    fn negative_saturation_names_the_field() {
        let m = messages(parse_config(r#"{"system":{"s":-1}}"#).unwrap_err());
        assert!(m.iter().any(|x| x.contains("system.s")), "{m:?}");
    }

    #[test]
    fn unknown_key_suggests_the_closest() {
        let m = messages(parse_config(r#"{"system":{"powr":0.1}}"#).unwrap_err());
        assert_eq!(m.len(), 1);
        assert!(m[0].contains("`system.powr`") && m[0].contains("`power`"), "{m:?}");
    }

    #[test]
    fn power_alias_is_accepted() {
        let c = parse_config(r#"{"system":{"power":0.36}}"#).unwrap();
        assert_eq!(c.system.s, Some(0.36));
    }

    #[test]
    fn every_violation_is_reported() {
        let m = messages(
            parse_config(r#"{"system":{"s":-1,"lifetime_ns":-2},"lo":{"visibility":2},"campaign":{"bins":0}}"#)
                .unwrap_err(),
        );
        assert!(m.len() >= 4, "{m:?}");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let m = messages(parse_config("{\n  \"system\": {\"s\": 0.1,}\n}").unwrap_err());
        assert!(m[0].contains("line 2"), "{m:?}");
    }

    #[test]
    fn nested_unknown_keys_are_found() {
        let m = messages(parse_config(r#"{"instrument":{"nuisance":{"psb_rat":1}},"sweep":{"s_grid":{"min":1,"max":2,"point":3}}}"#).unwrap_err());
        assert_eq!(m.len(), 2, "{m:?}");
        assert!(m[0].contains("psb_rate"));
        assert!(m[1].contains("points"));
    }

    #[test]
    fn resolved_config_round_trips() {
        let a = parse_config(r#"{"system":{"gamma":2.0,"rabi":0.5}}"#).unwrap();
        let b = parse_config(&a.canonical_json()).unwrap();
        assert_eq!(a, b);
        assert!(parse_config(r#"{"system":{"s":0.1,"rabi":5}}"#).is_err());
    }

    #[test]
    fn hash_is_stable() {
        let a = parse_config("{}").unwrap();
        let b = parse_config("{}").unwrap();
        assert_eq!(a.sha256(), b.sha256());
        let c = parse_config(r#"{"output":{"seed":1}}"#).unwrap();
        assert_ne!(a.sha256(), c.sha256());
    }
}
