//! TOML experiment configuration.
//!
//! All physical quantities are dimensionless or radians; keys are
//! kebab-case. Every config carries an explicit seed — there is no
//! implicit entropy anywhere in a run.

use sensebench_core::{LindbladSpec, NoiseSpec, ProtocolKind};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ResponseScan,
    ZneDemo,
    ZneTune,
    InferenceDemo,
    CompareProtocols,
    BoundsScan,
    PrecharacterizationSweep,
    InterrogationSweep,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::ResponseScan => "response-scan",
            ExperimentKind::ZneDemo => "zne-demo",
            ExperimentKind::ZneTune => "zne-tune",
            ExperimentKind::InferenceDemo => "inference-demo",
            ExperimentKind::CompareProtocols => "compare-protocols",
            ExperimentKind::BoundsScan => "bounds-scan",
            ExperimentKind::PrecharacterizationSweep => "precharacterization-sweep",
            ExperimentKind::InterrogationSweep => "interrogation-sweep",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    pub out: Option<PathBuf>,
    pub system: SystemConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub prior: PriorConfig,
    #[serde(default)]
    pub protocols: ProtocolsConfig,
    #[serde(default)]
    pub zne: ZneSection,
    #[serde(default)]
    pub scan: ScanConfig,
}

fn default_trials() -> u64 {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SystemConfig {
    pub n: Option<usize>,
    pub n_range: Option<Vec<usize>>,
    pub noise: NoiseConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub lambda: Option<f64>,
    /// Per-n noise coefficient for bounds scans: λ(n) = lambda-per-n · n.
    pub lambda_per_n: Option<f64>,
    pub p: Option<f64>,
    pub file: Option<PathBuf>,
    #[serde(default = "one")]
    pub lambda_scale: f64,
    pub lambda_scale_range: Option<Vec<f64>>,
    pub interrogation: Option<InterrogationConfig>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    GlobalDepol,
    LocalDepol,
    PauliLindblad,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct InterrogationConfig {
    pub k_lambda: f64,
    pub t: Option<f64>,
    pub t_range: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BudgetConfig {
    pub n_shots: Option<u64>,
    pub n_shots_range: Option<Vec<u64>>,
    /// "n2log3" sets N = round(n0 · n² · logfactor(n)³).
    pub preset: Option<String>,
    pub n0: Option<f64>,
    pub c_pre: Option<f64>,
    pub inference_fraction: Option<f64>,
    pub n_i_range: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PriorConfig {
    #[serde(default = "one")]
    pub alpha_prior: f64,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "default_bits")]
    pub bits: u32,
    /// Explicit bias phase; omitted means "center the prior on the point
    /// of maximum gradient".
    pub theta_bias: Option<f64>,
}

fn default_bits() -> u32 {
    10
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            alpha_prior: 1.0,
            t: 1.0,
            bits: 10,
            theta_bias: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ProtocolsConfig {
    pub kinds: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ZneSection {
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_x1")]
    pub x1: f64,
    pub order_range: Option<Vec<usize>>,
    pub x1_range: Option<Vec<f64>>,
}

fn default_order() -> usize {
    4
}

fn default_x1() -> f64 {
    1.75
}

impl Default for ZneSection {
    fn default() -> Self {
        Self {
            order: 4,
            x1: 1.75,
            order_range: None,
            x1_range: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_theta_points")]
    pub theta_points: usize,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    pub boosts: Option<Vec<f64>>,
    /// Fixed-θ* mode for compare-protocols: θ* = prior mean + offset, with
    /// the bias²/variance decomposition emitted.
    pub conditional_offset: Option<f64>,
}

fn default_theta_points() -> usize {
    128
}

fn default_realizations() -> usize {
    100
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            theta_points: default_theta_points(),
            realizations: default_realizations(),
            boosts: None,
            conditional_offset: None,
        }
    }
}

pub fn parse_protocol_kind(label: &str) -> Result<ProtocolKind, String> {
    match label {
        "noise-aware" => Ok(ProtocolKind::NoiseAware),
        "naive" => Ok(ProtocolKind::Naive),
        "zne" => Ok(ProtocolKind::Zne),
        "inference" => Ok(ProtocolKind::Inference),
        "precharacterized-inference" => Ok(ProtocolKind::PrecharacterizedInference),
        "zne-inference" => Ok(ProtocolKind::ZneInference),
        other => Err(format!("unknown protocol kind {other:?}")),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    /// Semantic checks beyond what serde enforces.
    pub fn validate(&self, config_dir: &Path) -> Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.scan.conditional_offset.is_some() && self.trials < 2 {
            return Err("conditional decomposition needs trials >= 2".into());
        }
        if self.zne.order < 1 || self.zne.x1 <= 1.0 {
            return Err("zne needs order >= 1 and x1 > 1".into());
        }
        for (name, value) in [
            ("zne.order-range", self.zne.order_range.as_deref().map(|r| r.iter().all(|&m| m >= 1))),
            ("zne.x1-range", self.zne.x1_range.as_deref().map(|r| r.iter().all(|&x| x > 1.0))),
        ] {
            if value == Some(false) {
                return Err(format!("{name} contains an invalid entry"));
            }
        }
        if let Some(fraction) = self.budget.inference_fraction {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err("budget.inference-fraction must lie strictly in (0, 1)".into());
            }
        }
        if let Some(c_pre) = self.budget.c_pre {
            if c_pre <= 0.0 {
                return Err("budget.c-pre must be positive".into());
            }
        }
        if self.scan.theta_points < 2 {
            return Err("scan.theta-points must be at least 2".into());
        }
        if self.scan.realizations < 1 {
            return Err("scan.realizations must be at least 1".into());
        }
        for (name, empty) in [
            ("system.n-range", self.system.n_range.as_ref().map(Vec::is_empty)),
            (
                "budget.n-shots-range",
                self.budget.n_shots_range.as_ref().map(Vec::is_empty),
            ),
            (
                "budget.n-i-range",
                self.budget.n_i_range.as_ref().map(Vec::is_empty),
            ),
        ] {
            if empty == Some(true) {
                return Err(format!("{name} must not be empty"));
            }
        }
        if self.system.n.is_none() && self.system.n_range.is_none() {
            return Err("system needs `n` or `n-range`".into());
        }
        self.base_noise(config_dir)?;
        if let Some(kinds) = &self.protocols.kinds {
            for kind in kinds {
                parse_protocol_kind(kind)?;
            }
        }
        match self.kind {
            ExperimentKind::PrecharacterizationSweep => {
                if self.budget.n_i_range.is_none() {
                    return Err("precharacterization-sweep needs budget.n-i-range".into());
                }
            }
            ExperimentKind::InterrogationSweep => {
                let interrogation = self
                    .system
                    .noise
                    .interrogation
                    .as_ref()
                    .ok_or("interrogation-sweep needs [system.noise.interrogation]")?;
                if interrogation.t_range.as_ref().is_none_or(Vec::is_empty) {
                    return Err("interrogation-sweep needs a nonempty t-range".into());
                }
            }
            ExperimentKind::BoundsScan => {
                if self.system.noise.kind != NoiseKind::GlobalDepol {
                    return Err("bounds-scan evaluates global-depolarizing bounds only".into());
                }
                if self.system.noise.lambda.is_none() && self.system.noise.lambda_per_n.is_none() {
                    return Err("bounds-scan needs noise `lambda` or `lambda-per-n`".into());
                }
            }
            _ => {}
        }
        if self.budget.n_shots.is_none()
            && self.budget.n_shots_range.is_none()
            && self.budget.preset.is_none()
            && !matches!(self.kind, ExperimentKind::ResponseScan)
        {
            return Err("budget needs `n-shots`, `n-shots-range`, or `preset`".into());
        }
        if let Some(preset) = &self.budget.preset {
            if preset != "n2log3" {
                return Err(format!("unknown budget preset {preset:?}"));
            }
        }
        Ok(())
    }

    /// The unscaled preparation-noise model; sweep scaling is applied by
    /// the experiment drivers.
    pub fn base_noise(&self, config_dir: &Path) -> Result<NoiseSpec, String> {
        let cfg = &self.system.noise;
        let mut spec = match cfg.kind {
            NoiseKind::GlobalDepol => {
                let lambda = cfg
                    .lambda
                    .or(cfg.lambda_per_n)
                    .ok_or("global-depol noise needs `lambda` (or `lambda-per-n`)")?;
                NoiseSpec::global_depol(lambda)
            }
            NoiseKind::LocalDepol => {
                let p = cfg.p.ok_or("local-depol noise needs `p`")?;
                NoiseSpec::local_depol(p)
            }
            NoiseKind::PauliLindblad => {
                let file = cfg
                    .file
                    .as_ref()
                    .ok_or("pauli-lindblad noise needs `file`")?;
                let path = if file.is_absolute() {
                    file.clone()
                } else {
                    config_dir.join(file)
                };
                let lindblad = LindbladSpec::from_toml_file(&path).map_err(|e| e.to_string())?;
                NoiseSpec::pauli_lindblad(lindblad)
            }
        };
        if let Some(interrogation) = &cfg.interrogation {
            let t = interrogation.t.unwrap_or(self.prior.t);
            spec = spec.with_interrogation(interrogation.k_lambda, t);
        }
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    /// Shot budget for system size n.
    pub fn shots_for(&self, n: usize) -> Result<u64, String> {
        if let Some(preset) = &self.budget.preset {
            if preset == "n2log3" {
                let n0 = self.budget.n0.unwrap_or(1000.0);
                return Ok(sensebench_core::bounds::n2log3_budget(n, n0));
            }
            return Err(format!("unknown budget preset {preset:?}"));
        }
        self.budget
            .n_shots
            .ok_or_else(|| "budget needs `n-shots` or `preset`".into())
    }

    pub fn protocol_kinds(&self, default: &[ProtocolKind]) -> Result<Vec<ProtocolKind>, String> {
        match &self.protocols.kinds {
            Some(kinds) => kinds.iter().map(|k| parse_protocol_kind(k)).collect(),
            None => Ok(default.to_vec()),
        }
    }
}
