//! Experiment configuration: a single JSON document, with every CLI flag
//! overriding the matching field.

use crate::{HarnessError, Result};
use gpsm_core::channel::SystemDims;
use gpsm_core::gpsm::Mode;
use gpsm_core::secrecy::{McBudget, Scenario};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Payload mode as spelled in config files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Gpsm,
    Cas,
    Gas,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Gpsm => Mode::Gpsm,
            ModeArg::Cas => Mode::Cas,
            ModeArg::Gas => Mode::Gas,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimsConfig {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_active: usize,
    pub n_eve: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub n_channels: usize,
    pub n_noise: usize,
}

/// Full experiment description. Serializes to the JSON document that gets
/// echoed into every result record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: ModeArg,
    pub dims: DimsConfig,
    #[serde(default = "default_m_ary")]
    pub m_ary: usize,
    #[serde(default = "default_snr_grid")]
    pub snr_grid_db: Vec<f64>,
    #[serde(default)]
    pub csit_sigma_i: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default = "default_budget")]
    pub budget: BudgetConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 picks the machine default.
    #[serde(default)]
    pub workers: usize,
}

fn default_m_ary() -> usize {
    4
}

fn default_seed() -> u64 {
    1
}

fn default_budget() -> BudgetConfig {
    BudgetConfig {
        n_channels: 100,
        n_noise: 200,
    }
}

/// Default SNR grid: -10..40 dB in 2 dB steps.
pub fn default_snr_grid() -> Vec<f64> {
    (0..=25).map(|i| -10.0 + 2.0 * i as f64).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: ModeArg::Gas,
            dims: DimsConfig {
                n_tx: 16,
                n_rx: 8,
                n_active: 2,
                n_eve: 16,
            },
            m_ary: default_m_ary(),
            snr_grid_db: default_snr_grid(),
            csit_sigma_i: 0.0,
            rho: 0.0,
            budget: default_budget(),
            seed: default_seed(),
            workers: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("cannot parse {}: {e}", path.display())))
    }

    pub fn system_dims(&self) -> Result<SystemDims> {
        Ok(SystemDims::new(
            self.dims.n_tx,
            self.dims.n_rx,
            self.dims.n_active,
            self.dims.n_eve,
        )?)
    }

    pub fn mc_budget(&self) -> Result<McBudget> {
        Ok(McBudget::new(self.budget.n_channels, self.budget.n_noise)?)
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let scenario = Scenario {
            mode: self.mode.into(),
            dims: self.system_dims()?,
            m_ary: self.m_ary,
            csit_sigma_i: self.csit_sigma_i,
            rho: self.rho,
            seed: self.seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Validate everything module preconditions will check, before any
    /// compute starts.
    pub fn validate(&self) -> Result<()> {
        self.scenario()?;
        self.mc_budget()?;
        if self.snr_grid_db.is_empty() {
            return Err(HarnessError::Config("empty SNR grid".into()));
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(HarnessError::Config("non-finite SNR grid entry".into()));
        }
        Ok(())
    }
}

/// Parse an SNR grid specification `start:stop:step` (dB, inclusive ends).
pub fn parse_snr_spec(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(HarnessError::Config(format!(
            "SNR spec must be start:stop:step, got {spec:?}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| HarnessError::Config(format!("bad SNR value {p:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || stop < start {
        return Err(HarnessError::Config(format!(
            "need stop >= start and step > 0 in {spec:?}"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// Parse a comma-separated list of numbers, e.g. `0.3,0.4,0.5`.
pub fn parse_list<T: std::str::FromStr>(spec: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    spec.split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|e| HarnessError::Config(format!("bad list entry {p:?}: {e}")))
        })
        .collect()
}
