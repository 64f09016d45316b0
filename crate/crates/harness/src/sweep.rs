//! Sweep drivers: one secrecy estimate per SNR grid point, with variants
//! that scan transmitter CSI error, antenna correlation, and eavesdropper
//! array size. All variants reuse the same channel seeds across swept
//! values, so comparisons are paired.

use crate::config::ExperimentConfig;
use crate::{HarnessError, Result, build_pool};
use gpsm_core::secrecy::{NoiseSpec, estimate_secrecy, outage_cdf};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Number of threshold points on an outage CDF grid.
pub const OUTAGE_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub c_bob: f64,
    pub c_eve: f64,
    pub c_sec: f64,
    pub se_bob: f64,
    pub se_eve: f64,
    /// Set when the eavesdropper geometry cannot intercept and her capacity
    /// was forced to zero.
    pub eve_incapable: bool,
}

/// One sweep outcome: the configuration echo, one row per SNR grid point,
/// wall-clock time and the library version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
    pub wall_clock_secs: f64,
    pub version: String,
}

fn sweep_rows(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    let scenario = cfg.scenario()?;
    let budget = cfg.mc_budget()?;
    cfg.snr_grid_db
        .iter()
        .map(|&snr_db| {
            let res = estimate_secrecy(&scenario, &NoiseSpec::from_snr_db(snr_db), &budget)?;
            Ok(SweepRow {
                snr_db,
                c_bob: res.c_bob.bits,
                c_eve: res.c_eve.bits,
                c_sec: res.c_sec,
                se_bob: res.c_bob.std_err,
                se_eve: res.c_eve.std_err,
                eve_incapable: res.eve_incapable,
            })
        })
        .collect()
}

fn record(cfg: &ExperimentConfig, rows: Vec<SweepRow>, started: Instant) -> ResultRecord {
    ResultRecord {
        config: cfg.clone(),
        rows,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// One secrecy sweep over the configured SNR grid.
pub fn run_capacity(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let pool = build_pool(cfg.workers)?;
    let rows = pool.install(|| sweep_rows(cfg))?;
    Ok(record(cfg, rows, started))
}

/// Capacity sweeps for a list of transmitter CSI error levels. Requires
/// Gaussian scrambling (the chi-square kernels assume the inverted-channel
/// structure that CSI error destroys).
pub fn run_sweep_csit(
    cfg: &ExperimentConfig,
    sigma_list: &[f64],
) -> Result<Vec<(f64, ResultRecord)>> {
    if cfg.mode != crate::config::ModeArg::Gas {
        return Err(HarnessError::Config(
            "CSI-error sweeps run in gas mode only".into(),
        ));
    }
    let pool = build_pool(cfg.workers)?;
    sigma_list
        .iter()
        .map(|&sigma_i| {
            let mut c = cfg.clone();
            c.csit_sigma_i = sigma_i;
            c.validate()?;
            let started = Instant::now();
            let rows = pool.install(|| sweep_rows(&c))?;
            Ok((sigma_i, record(&c, rows, started)))
        })
        .collect()
}

/// Capacity sweeps for a list of antenna correlation levels (gas mode).
pub fn run_sweep_corr(cfg: &ExperimentConfig, rho_list: &[f64]) -> Result<Vec<(f64, ResultRecord)>> {
    if cfg.mode != crate::config::ModeArg::Gas {
        return Err(HarnessError::Config(
            "correlation sweeps run in gas mode only".into(),
        ));
    }
    let pool = build_pool(cfg.workers)?;
    rho_list
        .iter()
        .map(|&rho| {
            let mut c = cfg.clone();
            c.rho = rho;
            c.validate()?;
            let started = Instant::now();
            let rows = pool.install(|| sweep_rows(&c))?;
            Ok((rho, record(&c, rows, started)))
        })
        .collect()
}

/// Per-eavesdropper-size sweep entry: the SNR sweep plus the outage
/// statistics of the per-channel security capacity at the pinned SNR.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EveSweepEntry {
    pub n_eve: usize,
    pub record: ResultRecord,
    pub outage_snr_db: f64,
    pub per_channel_secrecy: Vec<f64>,
    pub outage_cdf: Vec<(f64, f64)>,
}

/// Capacity sweep per eavesdropper array size, plus outage CDFs at a pinned
/// SNR. Sizes below the transmit array are allowed: those entries come back
/// flagged with zero eavesdropper capacity.
pub fn run_sweep_eve(
    cfg: &ExperimentConfig,
    n_eve_list: &[usize],
    outage_snr_db: f64,
) -> Result<Vec<EveSweepEntry>> {
    if cfg.mode != crate::config::ModeArg::Gas {
        return Err(HarnessError::Config(
            "eavesdropper-size sweeps run in gas mode only".into(),
        ));
    }
    let pool = build_pool(cfg.workers)?;
    n_eve_list
        .iter()
        .map(|&n_eve| {
            let mut c = cfg.clone();
            c.dims.n_eve = n_eve;
            c.validate()?;
            let started = Instant::now();
            let rows = pool.install(|| sweep_rows(&c))?;
            let record = record(&c, rows, started);
            let scenario = c.scenario()?;
            let res = pool.install(|| {
                estimate_secrecy(&scenario, &NoiseSpec::from_snr_db(outage_snr_db), &c.mc_budget()?)
                    .map_err(HarnessError::from)
            })?;
            let cdf = outage_cdf(&res.per_channel_secrecy, OUTAGE_GRID_POINTS)?;
            Ok(EveSweepEntry {
                n_eve,
                record,
                outage_snr_db,
                per_channel_secrecy: res.per_channel_secrecy,
                outage_cdf: cdf,
            })
        })
        .collect()
}

/// Outage statistics of the per-channel security capacity at one SNR.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutageRecord {
    pub config: ExperimentConfig,
    pub snr_db: f64,
    pub per_channel_secrecy: Vec<f64>,
    pub outage_cdf: Vec<(f64, f64)>,
    pub wall_clock_secs: f64,
    pub version: String,
}

pub fn run_outage(cfg: &ExperimentConfig, snr_db: f64) -> Result<OutageRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let pool = build_pool(cfg.workers)?;
    let scenario = cfg.scenario()?;
    let res = pool.install(|| {
        estimate_secrecy(&scenario, &NoiseSpec::from_snr_db(snr_db), &cfg.mc_budget()?)
            .map_err(HarnessError::from)
    })?;
    let cdf = outage_cdf(&res.per_channel_secrecy, OUTAGE_GRID_POINTS)?;
    Ok(OutageRecord {
        config: cfg.clone(),
        snr_db,
        per_channel_secrecy: res.per_channel_secrecy,
        outage_cdf: cdf,
        wall_clock_secs: started.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}
