use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::diagnostics::DEFAULT_WINDOW_FRACTION;
use crate::models::{BathLiomParams, ChainParams, DEFAULT_MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ChainSpectrum,
    BathLiomSweep,
    DistanceSweep,
    SwStep,
    #[serde(rename = "percolation-1d")]
    Percolation1d,
    Criteria,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ChainSpectrum => "chain-spectrum",
            Self::BathLiomSweep => "bath-liom-sweep",
            Self::DistanceSweep => "distance-sweep",
            Self::SwStep => "sw-step",
            Self::Percolation1d => "percolation-1d",
            Self::Criteria => "criteria",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    #[serde(rename = "n_loc")]
    NLoc,
    #[serde(rename = "n_bath")]
    NBath,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "J0", alias = "j0")]
    J0,
    #[serde(rename = "W_Gf", alias = "w_gf")]
    WGf,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "epsilon")]
    Epsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwSettings {
    /// Number of rotation steps.
    #[serde(default = "one")]
    pub steps: usize,
    /// Constant cutoff; defaults to `γ^{1/20}` of each sweep point.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

impl Default for SwSettings {
    fn default() -> Self {
        Self {
            steps: 1,
            epsilon: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriteriaSettings {
    pub gamma: f64,
    #[serde(default = "default_diameters")]
    pub bubble_diameters: Vec<f64>,
    #[serde(default = "default_dimensions")]
    pub dimensions: Vec<u32>,
    #[serde(default = "default_distances")]
    pub bootstrap_distances: Vec<f64>,
}

/// One file fully specifies an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "one")]
    pub n_realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_window")]
    pub window_fraction: f64,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Worker threads; `0` uses every available core.
    #[serde(default = "one")]
    pub jobs: usize,
    /// File stem for the outputs; defaults to the experiment kind.
    #[serde(default)]
    pub output: Option<String>,
    /// Resonance cutoff override for chain experiments.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub chain: Option<ChainParams>,
    #[serde(default)]
    pub bath: Option<BathLiomParams>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub sw: Option<SwSettings>,
    #[serde(default)]
    pub criteria: Option<CriteriaSettings>,
}

fn one() -> usize {
    1
}
fn default_window() -> f64 {
    DEFAULT_WINDOW_FRACTION
}
fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}
fn default_diameters() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0]
}
fn default_dimensions() -> Vec<u32> {
    vec![1, 2]
}
fn default_distances() -> Vec<f64> {
    vec![4.0, 16.0, 64.0]
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn output_stem(&self) -> String {
        self.output.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn chain_params(&self) -> Result<&ChainParams, HarnessError> {
        self.chain
            .as_ref()
            .ok_or_else(|| HarnessError::Config(format!("{} needs a [chain] table", self.kind.name())))
    }

    pub fn bath_params(&self) -> Result<&BathLiomParams, HarnessError> {
        self.bath
            .as_ref()
            .ok_or_else(|| HarnessError::Config(format!("{} needs a [bath] table", self.kind.name())))
    }

    /// Sweep values, or a single point at the configured parameters.
    pub fn sweep_points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.n_realizations == 0 {
            return bad("n_realizations must be at least 1".into());
        }
        if !(self.window_fraction > 0.0 && self.window_fraction <= 1.0) {
            return bad(format!("window_fraction {} outside (0, 1]", self.window_fraction));
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("epsilon {e} must be positive"));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep values must be nonempty".into());
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return bad("sweep values must be finite".into());
            }
            let integral = matches!(s.variable, SweepVariable::NLoc | SweepVariable::NBath);
            if integral && s.values.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
                return bad(format!("{:?} sweep values must be non-negative integers", s.variable));
            }
            let allowed: &[SweepVariable] = match self.kind {
                ExperimentKind::BathLiomSweep => &[
                    SweepVariable::NLoc,
                    SweepVariable::NBath,
                    SweepVariable::Alpha,
                    SweepVariable::J0,
                    SweepVariable::WGf,
                ],
                ExperimentKind::DistanceSweep | ExperimentKind::Criteria => &[],
                ExperimentKind::ChainSpectrum | ExperimentKind::SwStep => {
                    &[SweepVariable::Gamma, SweepVariable::Epsilon]
                }
                ExperimentKind::Percolation1d => &[SweepVariable::Epsilon, SweepVariable::Gamma],
            };
            if !allowed.contains(&s.variable) {
                return bad(format!(
                    "{} cannot sweep {:?}",
                    self.kind.name(),
                    s.variable
                ));
            }
        }
        match self.kind {
            ExperimentKind::ChainSpectrum | ExperimentKind::SwStep | ExperimentKind::Percolation1d => {
                self.chain_params()?;
            }
            ExperimentKind::BathLiomSweep | ExperimentKind::DistanceSweep => {
                self.bath_params()?;
            }
            ExperimentKind::Criteria => {
                if self.criteria.is_none() {
                    return bad("criteria needs a [criteria] table".into());
                }
            }
        }
        if let Some(sw) = &self.sw {
            if sw.steps == 0 {
                return bad("sw.steps must be at least 1".into());
            }
        }
        Ok(())
    }
}
