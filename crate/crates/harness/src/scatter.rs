//! Received-signal scatter sampling: per-antenna complex samples at both
//! receivers for one fixed channel realization, across the three scrambling
//! cases (single-antenna circular, multi-antenna circular, Gaussian). The
//! companion statistics quantify what the clouds show: a constant-modulus
//! ring at the legitimate receiver under single-antenna circular
//! scrambling, overlapping clouds at the eavesdropper under multi-antenna
//! scrambling, and a large activated/idle variance contrast under Gaussian
//! scrambling.

use crate::config::ExperimentConfig;
use crate::output::SCATTER_CSV_SCHEMA;
use crate::{HarnessError, Result};
use gpsm_core::CVector;
use gpsm_core::channel::ChannelRealization;
use gpsm_core::gpsm::{Mode, PatternSet, ci_precoder, equivalent_channel, make_payload};
use gpsm_core::numerics::{StreamRng, sample_complex_gaussian};
use serde::{Deserialize, Serialize};
use std::io::Write;

const STREAM_CHANNEL_BOB: u64 = 0;
const STREAM_CHANNEL_EVE: u64 = 1;
const STREAM_PAYLOAD: u64 = 2;
const STREAM_NOISE_BOB: u64 = 3;
const STREAM_NOISE_EVE: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScatterCase {
    /// Circular scrambling, one activated antenna (the first).
    CasSingle,
    /// Circular scrambling, two activated antennas (the first two).
    CasMulti,
    /// Gaussian scrambling, two activated antennas.
    Gas,
}

impl ScatterCase {
    pub const ALL: [ScatterCase; 3] = [ScatterCase::CasSingle, ScatterCase::CasMulti, ScatterCase::Gas];

    pub fn name(self) -> &'static str {
        match self {
            ScatterCase::CasSingle => "cas_na1",
            ScatterCase::CasMulti => "cas_multi",
            ScatterCase::Gas => "gas",
        }
    }

    fn n_active(self) -> usize {
        match self {
            ScatterCase::CasSingle => 1,
            _ => 2,
        }
    }

    fn mode(self) -> Mode {
        match self {
            ScatterCase::Gas => Mode::Gas,
            _ => Mode::Cas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub case: String,
    pub node: String,
    pub antenna: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterData {
    pub config: ExperimentConfig,
    pub snr_db: f64,
    pub n_samples: usize,
    pub rows: Vec<ScatterRow>,
}

/// Sample the raw received signals for all three cases on one fixed channel
/// realization (fixed seed), `n_samples` transmissions per case.
pub fn run_scatter(cfg: &ExperimentConfig, n_samples: usize, snr_db: f64) -> Result<ScatterData> {
    let dims = cfg.system_dims()?;
    if dims.n_rx < 3 {
        return Err(HarnessError::Config(
            "scatter sampling needs at least three receive antennas".into(),
        ));
    }
    let sigma2 = 10.0f64.powf(-snr_db / 10.0);
    let mut rng_b = StreamRng::new(cfg.seed, STREAM_CHANNEL_BOB).rng();
    let mut rng_e = StreamRng::new(cfg.seed, STREAM_CHANNEL_EVE).rng();
    let ch = ChannelRealization::draw(&dims, 0.0, None, &mut rng_b, &mut rng_e)?;
    let precoder = ci_precoder(&ch.h_bob_alice_view)?;

    let mut rows = Vec::with_capacity(ScatterCase::ALL.len() * 2 * n_samples * dims.n_rx);
    for case in ScatterCase::ALL {
        let n_active = case.n_active();
        let patterns = PatternSet::build(dims.n_rx, n_active)?;
        let pattern = patterns.pattern(0);
        let g_bob = equivalent_channel(&ch.h_bob, &precoder, n_active);
        let g_eve = equivalent_channel(&ch.h_eve, &precoder, n_active);
        let mut rng_pay = StreamRng::new(cfg.seed, STREAM_PAYLOAD).rng();
        let mut rng_wb = StreamRng::new(cfg.seed, STREAM_NOISE_BOB).rng();
        let mut rng_we = StreamRng::new(cfg.seed, STREAM_NOISE_EVE).rng();
        for _ in 0..n_samples {
            let payload = make_payload(&mut rng_pay, case.mode(), n_active, cfg.m_ary, None)?;
            let mut s = CVector::zeros(dims.n_rx);
            for (v, &a) in payload.values.iter().zip(pattern) {
                s[a] = *v;
            }
            let w_b = sample_complex_gaussian(&mut rng_wb, dims.n_rx, sigma2)?;
            let w_e = sample_complex_gaussian(&mut rng_we, dims.n_eve, sigma2)?;
            let y_b = &g_bob * &s + CVector::from_vec(w_b);
            let y_e = &g_eve * &s + CVector::from_vec(w_e);
            for (node, y) in [("bob", &y_b), ("eve", &y_e)] {
                for (antenna, z) in y.iter().enumerate() {
                    rows.push(ScatterRow {
                        case: case.name().to_string(),
                        node: node.to_string(),
                        antenna,
                        re: z.re,
                        im: z.im,
                    });
                }
            }
        }
    }
    Ok(ScatterData {
        config: cfg.clone(),
        snr_db,
        n_samples,
        rows,
    })
}

pub fn write_scatter_csv<W: Write>(w: &mut W, data: &ScatterData) -> Result<()> {
    writeln!(w, "{SCATTER_CSV_SCHEMA}")?;
    writeln!(w, "case,node,antenna,re,im")?;
    for r in &data.rows {
        writeln!(w, "{},{},{},{},{}", r.case, r.node, r.antenna, r.re, r.im)?;
    }
    Ok(())
}

/// Cloud statistics backing the scatter checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScatterStats {
    /// Coefficient of variation of |y| on the activated antenna at the
    /// legitimate receiver, single-antenna circular scrambling.
    pub cas_single_bob_active_cv: f64,
    /// Largest pairwise cloud-center separation at the eavesdropper in
    /// pooled-standard-deviation units, multi-antenna circular scrambling.
    pub cas_multi_eve_max_separation: f64,
    /// Smallest activated-antenna variance over largest idle-antenna
    /// variance at the legitimate receiver, Gaussian scrambling.
    pub gas_bob_variance_ratio: f64,
}

fn samples<'d>(
    data: &'d ScatterData,
    case: ScatterCase,
    node: &str,
    antenna: usize,
) -> impl Iterator<Item = (f64, f64)> + 'd {
    let case = case.name();
    let node = node.to_string();
    data.rows
        .iter()
        .filter(move |r| r.case == case && r.node == node && r.antenna == antenna)
        .map(|r| (r.re, r.im))
}

fn moments(points: &[(f64, f64)]) -> ((f64, f64), f64) {
    let n = points.len() as f64;
    let mean = (
        points.iter().map(|p| p.0).sum::<f64>() / n,
        points.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let var = points
        .iter()
        .map(|p| (p.0 - mean.0).powi(2) + (p.1 - mean.1).powi(2))
        .sum::<f64>()
        / n;
    (mean, var)
}

pub fn scatter_stats(data: &ScatterData) -> ScatterStats {
    // Single-antenna circular scrambling: modulus spread on the activated
    // antenna (index 0 under the first lexicographic pattern).
    let moduli: Vec<f64> = samples(data, ScatterCase::CasSingle, "bob", 0)
        .map(|(re, im)| (re * re + im * im).sqrt())
        .collect();
    let mean = moduli.iter().sum::<f64>() / moduli.len() as f64;
    let var = moduli.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / moduli.len() as f64;
    let cas_single_bob_active_cv = var.sqrt() / mean;

    // Multi-antenna circular scrambling at the eavesdropper: pairwise cloud
    // separation in pooled-deviation units.
    let n_eve = data.config.dims.n_eve;
    let eve_moments: Vec<((f64, f64), f64)> = (0..n_eve)
        .map(|a| {
            let pts: Vec<(f64, f64)> = samples(data, ScatterCase::CasMulti, "eve", a).collect();
            moments(&pts)
        })
        .collect();
    let mut cas_multi_eve_max_separation: f64 = 0.0;
    for a in 0..n_eve {
        for b in (a + 1)..n_eve {
            let (ma, va) = eve_moments[a];
            let (mb, vb) = eve_moments[b];
            let sep = ((ma.0 - mb.0).powi(2) + (ma.1 - mb.1).powi(2)).sqrt();
            let pooled = ((va + vb) / 2.0).sqrt();
            cas_multi_eve_max_separation = cas_multi_eve_max_separation.max(sep / pooled);
        }
    }

    // Gaussian scrambling at the legitimate receiver: activated antennas are
    // {0, 1} under the first lexicographic two-antenna pattern.
    let n_rx = data.config.dims.n_rx;
    let bob_vars: Vec<f64> = (0..n_rx)
        .map(|a| {
            let pts: Vec<(f64, f64)> = samples(data, ScatterCase::Gas, "bob", a).collect();
            moments(&pts).1
        })
        .collect();
    let active_min = bob_vars[..2].iter().copied().fold(f64::INFINITY, f64::min);
    let idle_max = bob_vars[2..].iter().copied().fold(0.0f64, f64::max);
    ScatterStats {
        cas_single_bob_active_cv,
        cas_multi_eve_max_separation,
        gas_bob_variance_ratio: active_min / idle_max,
    }
}
