//! Likelihood-ratio kernels and Monte Carlo DCMC capacity estimators for the
//! legitimate receiver (Bob) and the eavesdropper (Eve) in every payload
//! mode, plus eavesdropper post-processing, security capacity, outage
//! statistics, and a small-instance quadrature oracle.
//!
//! The discrete-input continuous-output capacity of an alphabet `B` is
//! estimated as `log2|B| - (1/|B|) Σ_τ E[log2 Σ_ε Θ_{ε,τ}]`, where
//! `Θ_{ε,τ} = p(z|ε)/p(z|τ)` is a likelihood ratio evaluated on samples
//! drawn under hypothesis τ. All Θ arithmetic is done in natural logs; each
//! mode supplies its own kernel:
//!
//! - modulated payloads: coherent Gaussian ratios over the full
//!   pattern x constellation super-alphabet;
//! - circular scrambling: the receiver sees per-antenna energies whose
//!   normalized law is a noncentral chi-square with two degrees of freedom;
//! - Gaussian scrambling: the received entries are zero-mean complex
//!   Gaussians whose variance profile depends on the activation pattern.
//!
//! Monte Carlo trials are keyed by `(seed, trial index)` through dedicated
//! substreams and merged by index, so estimates are identical for any
//! worker count.

use crate::channel::{
    ChannelRealization, CorrSqrts, CorrelationSpec, SystemDims, left_pseudo_inverse,
};
use crate::gpsm::{Mode, PatternSet, Payload, ci_precoder, equivalent_channel, psk_constellation};
use crate::numerics::{
    LogProb, StreamRng, log_sum_exp, noncentral_chi2_df2_logpdf, sample_complex_gaussian,
    sample_unit_circle,
};
use crate::{C64, CMatrix, CVector, Error, Result};
use rayon::prelude::*;
use std::f64::consts::LN_2;

// Substream purposes hung off each trial index. Everything a trial consumes
// derives from (seed, trial), which is what makes worker counts irrelevant.
const STREAMS_PER_TRIAL: u64 = 8;
const STREAM_CHANNEL_BOB: u64 = 0;
const STREAM_CHANNEL_EVE: u64 = 1;
const STREAM_PAYLOAD: u64 = 2;
const STREAM_NOISE_BOB: u64 = 3;
const STREAM_NOISE_EVE: u64 = 4;

fn stream_id(trial: u64, purpose: u64) -> u64 {
    trial * STREAMS_PER_TRIAL + purpose
}

/// Per-entry noise variances, derived from an SNR under the convention
/// `E[||x||^2] = 1`, `sigma2 = 10^(-snr_db/10)`, identical at both
/// receivers. The chi-square kernels normalize by the halved variances
/// `sigma2 / 2` (per real component).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma2_bob: f64,
    pub sigma2_eve: f64,
    pub snr_db: f64,
}

impl NoiseSpec {
    pub fn from_snr_db(snr_db: f64) -> Self {
        let sigma2 = 10.0f64.powf(-snr_db / 10.0);
        Self {
            sigma2_bob: sigma2,
            sigma2_eve: sigma2,
            snr_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma2_bob <= 0.0 || self.sigma2_eve <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "noise variances must be > 0, got ({}, {})",
                self.sigma2_bob, self.sigma2_eve
            )));
        }
        Ok(())
    }
}

/// Monte Carlo budget: outer channel realizations and inner noise/scrambling
/// draws per hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McBudget {
    pub n_channels: usize,
    pub n_noise: usize,
}

impl McBudget {
    pub fn new(n_channels: usize, n_noise: usize) -> Result<Self> {
        if n_channels == 0 || n_noise == 0 {
            return Err(Error::InvalidArgument(
                "Monte Carlo budget counts must be >= 1".into(),
            ));
        }
        Ok(Self { n_channels, n_noise })
    }
}

impl Default for McBudget {
    /// Desk-scale default: standard error stays below ~0.05 bits for
    /// alphabets up to 64 hypotheses.
    fn default() -> Self {
        Self {
            n_channels: 100,
            n_noise: 200,
        }
    }
}

/// Monte Carlo mean and standard error of a DCMC capacity in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub bits: f64,
    pub std_err: f64,
    pub n_channels: usize,
    pub n_noise: usize,
}

/// Security capacity `c_sec = c_bob.bits - c_eve.bits` (reported unclamped;
/// negative values are meaningful). `per_channel_secrecy` keeps the paired
/// per-realization differences for outage statistics, and `eve_incapable`
/// flags geometries where the eavesdropper cannot post-process and her
/// capacity is forced to zero.
#[derive(Debug, Clone)]
pub struct SecrecyResult {
    pub c_bob: CapacityEstimate,
    pub c_eve: CapacityEstimate,
    pub c_sec: f64,
    pub eve_incapable: bool,
    pub per_channel_secrecy: Vec<f64>,
}

/// Full scenario description for one secrecy estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub mode: Mode,
    pub dims: SystemDims,
    /// Constellation order; only meaningful for modulated payloads.
    pub m_ary: usize,
    pub csit_sigma_i: f64,
    pub rho: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.csit_sigma_i) {
            return Err(Error::InvalidArgument(format!(
                "csit_sigma_i must lie in [0, 1], got {}",
                self.csit_sigma_i
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidArgument(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if self.mode == Mode::Gpsm && !self.m_ary.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "m_ary must be a power of two, got {}",
                self.m_ary
            )));
        }
        if self.mode == Mode::Cas && self.csit_sigma_i > 0.0 {
            // The circular-scrambling kernels rely on the channel-inversion
            // identity structure, which transmitter-side CSI error destroys.
            return Err(Error::UnsupportedMode(
                "circular scrambling requires perfect transmitter CSI".into(),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Likelihood-ratio kernels
// ---------------------------------------------------------------------------

/// Coherent log ratio `ln Θ_{ε,τ} = (-||g(s_τ - s_ε) + w||² + ||w||²)/σ²`
/// for the modulated super-alphabet; `g` is the already-scaled equivalent
/// channel and `w` the receiver noise realization.
pub fn log_theta_coherent(
    g: &CMatrix,
    s_tau: &CVector,
    s_eps: &CVector,
    w: &CVector,
    sigma2: f64,
) -> LogProb {
    let d = g * (s_tau - s_eps) + w;
    LogProb::new((w.norm_squared() - d.norm_squared()) / sigma2)
}

/// Non-coherent per-antenna energies `r_i = |Σ_v g[i, pattern[v]] e_v + w_i|²`
/// observed after circular scrambling with payload values `e_v`.
pub fn noncoherent_receive(g: &CMatrix, pattern: &[usize], payload: &Payload, w: &CVector) -> Vec<f64> {
    debug_assert_eq!(pattern.len(), payload.values.len());
    (0..g.nrows())
        .map(|i| {
            let mut sum = w[i];
            for (value, &antenna) in payload.values.iter().zip(pattern) {
                sum += g[(i, antenna)] * value;
            }
            sum.norm_sqr()
        })
        .collect()
}

/// Circular-scrambling log ratio for a general equivalent channel, only
/// tractable with a single activated antenna: each normalized entry
/// `r_i/σ₀²` follows a noncentral chi-square with two degrees of freedom
/// and noncentrality `λ_i(k) = |g[i, C(k,1)]|²/σ₀²`.
pub fn log_theta_cas_general(
    g: &CMatrix,
    r: &[f64],
    tau: usize,
    eps: usize,
    sigma2_0: f64,
    patterns: &PatternSet,
) -> Result<LogProb> {
    if patterns.n_active() != 1 {
        return Err(Error::UnsupportedMode(
            "general-channel circular-scrambling ratio only exists for a single activated \
             antenna; use the identity-structure kernel"
                .into(),
        ));
    }
    let col_tau = patterns.pattern(tau)[0];
    let col_eps = patterns.pattern(eps)[0];
    let mut total = 0.0;
    for (i, &ri) in r.iter().enumerate() {
        let x = ri / sigma2_0;
        let lam_eps = g[(i, col_eps)].norm_sqr() / sigma2_0;
        let lam_tau = g[(i, col_tau)].norm_sqr() / sigma2_0;
        total += noncentral_chi2_df2_logpdf(x, lam_eps)?.value()
            - noncentral_chi2_df2_logpdf(x, lam_tau)?.value();
    }
    Ok(LogProb::new(total))
}

/// Circular-scrambling log ratio under the channel-inversion identity
/// structure: noncentralities are `beta/(n_active · σ₀²_i)` on activated
/// antennas and zero elsewhere, so only entries where the two patterns
/// differ contribute. `sigma2_0` holds the per-entry halved noise variances
/// (constant for Bob, the post-processing diagonal for Eve).
pub fn log_theta_cas_identity(
    r: &[f64],
    tau: usize,
    eps: usize,
    beta: f64,
    n_active: usize,
    sigma2_0: &[f64],
    patterns: &PatternSet,
) -> Result<LogProb> {
    if r.len() != sigma2_0.len() {
        return Err(Error::InvalidArgument(format!(
            "need one halved variance per entry: {} entries, {} variances",
            r.len(),
            sigma2_0.len()
        )));
    }
    // Signed walk over the symmetric difference of the two sorted patterns.
    let pat_tau = patterns.pattern(tau);
    let pat_eps = patterns.pattern(eps);
    let mut total = 0.0;
    let mut contribution = |i: usize, sign: f64| -> Result<()> {
        let x = r[i] / sigma2_0[i];
        let lam = beta / (n_active as f64 * sigma2_0[i]);
        let d = noncentral_chi2_df2_logpdf(x, lam)?.value()
            - noncentral_chi2_df2_logpdf(x, 0.0)?.value();
        total += sign * d;
        Ok(())
    };
    let (mut a, mut b) = (0usize, 0usize);
    while a < pat_tau.len() || b < pat_eps.len() {
        match (pat_tau.get(a), pat_eps.get(b)) {
            (Some(&i), Some(&j)) if i == j => {
                a += 1;
                b += 1;
            }
            (Some(&i), Some(&j)) if i < j => {
                contribution(i, -1.0)?;
                a += 1;
            }
            (Some(_), Some(&j)) => {
                contribution(j, 1.0)?;
                b += 1;
            }
            (Some(&i), None) => {
                contribution(i, -1.0)?;
                a += 1;
            }
            (None, Some(&j)) => {
                contribution(j, 1.0)?;
                b += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(LogProb::new(total))
}

/// Eavesdropper post-processing `ỹ = H_B (H_Eᴴ H_E)⁻¹ H_Eᴴ y_E`, which
/// reproduces the legitimate receiver's signal space at the cost of noise
/// amplification. Returns the transformed vector and the per-entry noise
/// variances `σ²_E · diag(T Tᴴ)`.
///
/// Requires at least as many eavesdropper antennas as transmit antennas;
/// otherwise the inversion is rank deficient and no information about the
/// activation patterns can be recovered.
pub fn eve_postprocess(
    h_bob: &CMatrix,
    h_eve: &CMatrix,
    y_eve: &CVector,
    sigma2_eve: f64,
) -> Result<(CVector, Vec<f64>)> {
    if sigma2_eve < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be >= 0, got {sigma2_eve}"
        )));
    }
    let t = postprocess_matrix(h_bob, h_eve)?;
    let y_tilde = &t * y_eve;
    let variances = postprocess_noise_variances(&t, sigma2_eve);
    Ok((y_tilde, variances))
}

/// The post-processing matrix `T = H_B (H_Eᴴ H_E)⁻¹ H_Eᴴ`.
fn postprocess_matrix(h_bob: &CMatrix, h_eve: &CMatrix) -> Result<CMatrix> {
    Ok(h_bob * left_pseudo_inverse(h_eve)?)
}

/// Per-entry variances of the post-processed noise `T w_E`.
fn postprocess_noise_variances(t: &CMatrix, sigma2_eve: f64) -> Vec<f64> {
    (0..t.nrows())
        .map(|i| sigma2_eve * t.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect()
}

/// Gaussian-scrambling log ratio: each received entry is a zero-mean complex
/// Gaussian with hypothesis-dependent variance
/// `V_i(k) = Σ_v |g[i, C(k,v)]|² + σ²_i`, so
/// `ln Θ_{ε,τ} = Σ_i [ |y_i|²/V_i(τ) - |y_i|²/V_i(ε) + ln V_i(τ) - ln V_i(ε) ]`.
/// The `ln V` terms make Θ an exact ratio of the per-entry Gaussian
/// densities (the variances differ across hypotheses, so the normalizers do
/// not cancel). `sigma2` holds per-entry noise variances.
pub fn log_theta_gas(
    g: &CMatrix,
    y: &CVector,
    tau: usize,
    eps: usize,
    sigma2: &[f64],
    patterns: &PatternSet,
) -> LogProb {
    debug_assert_eq!(g.nrows(), y.len());
    debug_assert_eq!(g.nrows(), sigma2.len());
    let pat_tau = patterns.pattern(tau);
    let pat_eps = patterns.pattern(eps);
    let mut total = 0.0;
    for i in 0..y.len() {
        let v_tau: f64 =
            pat_tau.iter().map(|&a| g[(i, a)].norm_sqr()).sum::<f64>() + sigma2[i];
        let v_eps: f64 =
            pat_eps.iter().map(|&a| g[(i, a)].norm_sqr()).sum::<f64>() + sigma2[i];
        if v_tau == v_eps {
            continue;
        }
        let ysq = y[i].norm_sqr();
        total += ysq / v_tau - ysq / v_eps + v_tau.ln() - v_eps.ln();
    }
    LogProb::new(total)
}

// ---------------------------------------------------------------------------
// Monte Carlo estimator
// ---------------------------------------------------------------------------

/// Inner per-channel estimator: for each true hypothesis τ the filler is
/// called `n_noise` times with a fresh (noise, scrambling) draw and must
/// write `ln Θ_{ε,τ}` for every ε into the row. Returns the per-channel
/// capacity, clamped into `[0, log2 B]` when `clamp` is set (Monte Carlo
/// jitter can exit the valid range at extreme SNR).
fn per_channel_capacity<F>(alphabet: usize, n_noise: usize, mut fill_row: F, clamp: bool) -> f64
where
    F: FnMut(usize, &mut [f64]),
{
    let cap_max = (alphabet as f64).log2();
    let mut row = vec![0.0; alphabet];
    let mut acc = 0.0;
    for tau in 0..alphabet {
        let mut inner = 0.0;
        for _ in 0..n_noise {
            fill_row(tau, &mut row);
            inner += log_sum_exp(&row).expect("non-empty row") / LN_2;
        }
        acc += inner / n_noise as f64;
    }
    let c = cap_max - acc / alphabet as f64;
    if clamp { c.clamp(0.0, cap_max) } else { c }
}

fn aggregate(per_channel: &[f64], n_noise: usize) -> CapacityEstimate {
    let n = per_channel.len();
    let mean = per_channel.iter().sum::<f64>() / n as f64;
    let std_err = if n > 1 {
        let var =
            per_channel.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    CapacityEstimate {
        bits: mean,
        std_err,
        n_channels: n,
        n_noise,
    }
}

/// Monte Carlo DCMC capacity over equiprobable hypotheses.
///
/// `make_trial` draws the per-channel state for a trial index (a channel
/// realization plus whatever precomputation the kernel wants) and
/// `fill_row` produces one `ln Θ_{ε,τ}` row per (noise, scrambling) draw,
/// advancing the trial's own substreams. Trials run in parallel and are
/// merged by index, so the estimate does not depend on the worker count.
pub fn dcmc_capacity<T, M, F>(
    alphabet_size: usize,
    budget: &McBudget,
    make_trial: M,
    fill_row: F,
) -> Result<CapacityEstimate>
where
    T: Send,
    M: Fn(u64) -> Result<T> + Sync,
    F: Fn(&mut T, usize, &mut [f64]) + Sync,
{
    if alphabet_size == 0 {
        return Err(Error::InvalidArgument("empty hypothesis alphabet".into()));
    }
    let per_channel: Vec<f64> = (0..budget.n_channels as u64)
        .into_par_iter()
        .map(|t| {
            let mut trial = make_trial(t)?;
            Ok(per_channel_capacity(
                alphabet_size,
                budget.n_noise,
                |tau, row| fill_row(&mut trial, tau, row),
                true,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(&per_channel, budget.n_noise))
}

// ---------------------------------------------------------------------------
// Secrecy estimation
// ---------------------------------------------------------------------------

struct TrialChannel {
    realization: ChannelRealization,
    beta: f64,
    g_bob: CMatrix,
    g_eve: CMatrix,
}

fn draw_trial_channel(
    scenario: &Scenario,
    corr: Option<&CorrSqrts>,
    trial: u64,
) -> Result<TrialChannel> {
    let mut rng_bob = StreamRng::new(scenario.seed, stream_id(trial, STREAM_CHANNEL_BOB)).rng();
    let mut rng_eve = StreamRng::new(scenario.seed, stream_id(trial, STREAM_CHANNEL_EVE)).rng();
    let realization = ChannelRealization::draw(
        &scenario.dims,
        scenario.csit_sigma_i,
        corr,
        &mut rng_bob,
        &mut rng_eve,
    )?;
    // The precoder—and its power normalization—come from the transmitter's
    // channel view; the equivalent channels use the true matrices.
    let precoder = ci_precoder(&realization.h_bob_alice_view)?;
    let g_bob = equivalent_channel(&realization.h_bob, &precoder, scenario.dims.n_active);
    let g_eve = equivalent_channel(&realization.h_eve, &precoder, scenario.dims.n_active);
    Ok(TrialChannel {
        realization,
        beta: precoder.beta,
        g_bob,
        g_eve,
    })
}

/// Hypothesis-dependent variance profile for the Gaussian-scrambling
/// kernels: `V[k][i] = Σ_v |g[i, C(k,v)]|² + noise_var[i]`, with the inverse
/// and log-sum forms the hot loop needs.
struct GasProfile {
    inv_v: Vec<Vec<f64>>,
    ln_v_sum: Vec<f64>,
}

impl GasProfile {
    fn new(g: &CMatrix, patterns: &PatternSet, noise_var: &[f64]) -> Self {
        let n = g.nrows();
        let mut inv_v = Vec::with_capacity(patterns.len());
        let mut ln_v_sum = Vec::with_capacity(patterns.len());
        for pattern in patterns.iter() {
            let mut inv = Vec::with_capacity(n);
            let mut ln_sum = 0.0;
            for i in 0..n {
                let v: f64 =
                    pattern.iter().map(|&a| g[(i, a)].norm_sqr()).sum::<f64>() + noise_var[i];
                inv.push(1.0 / v);
                ln_sum += v.ln();
            }
            inv_v.push(inv);
            ln_v_sum.push(ln_sum);
        }
        Self { inv_v, ln_v_sum }
    }

    /// Per-hypothesis score `S(k) = Σ_i |y_i|²/V_i(k) + ln V_i(k)`;
    /// `ln Θ_{ε,τ} = S(τ) - S(ε)`.
    fn scores(&self, ysq: &[f64], out: &mut [f64], with_normalizers: bool) {
        for (k, inv) in self.inv_v.iter().enumerate() {
            let mut s = 0.0;
            for (y2, iv) in ysq.iter().zip(inv) {
                s += y2 * iv;
            }
            if with_normalizers {
                s += self.ln_v_sum[k];
            }
            out[k] = s;
        }
    }
}

fn scores_to_row(scores: &[f64], tau: usize, row: &mut [f64]) {
    let s_tau = scores[tau];
    for (r, s) in row.iter_mut().zip(scores) {
        *r = s_tau - *s;
    }
}

/// Noncentrality split for the identity-structure chi-square kernels:
/// per-entry score difference `d_i = ln f(x_i; λ_i) - ln f(x_i; 0)`. The
/// pattern score is `D(k) = Σ_{i ∈ C(k)} d_i` and `ln Θ_{ε,τ} = D(ε) - D(τ)`
/// because contributions from commonly-activated antennas cancel.
fn cas_identity_scores(
    r: &[f64],
    beta: f64,
    n_active: usize,
    sigma2_0: &[f64],
    patterns: &PatternSet,
    out: &mut [f64],
) {
    let d: Vec<f64> = r
        .iter()
        .zip(sigma2_0)
        .map(|(&ri, &s0)| {
            let x = ri / s0;
            let lam = beta / (n_active as f64 * s0);
            noncentral_chi2_df2_logpdf(x, lam).expect("valid chi2 args").value()
                - noncentral_chi2_df2_logpdf(x, 0.0).expect("valid chi2 args").value()
        })
        .collect();
    for (k, pattern) in patterns.iter().enumerate() {
        out[k] = pattern.iter().map(|&i| d[i]).sum();
    }
}

/// Per-(receiver, trial) capacities for one scenario; `(c_bob, c_eve)`.
fn secrecy_trial(
    scenario: &Scenario,
    noise: &NoiseSpec,
    budget: &McBudget,
    patterns: &PatternSet,
    super_symbols: Option<&[CVector]>,
    corr: Option<&CorrSqrts>,
    eve_capable: bool,
    trial: u64,
) -> Result<(f64, f64)> {
    let ch = draw_trial_channel(scenario, corr, trial)?;
    let dims = &scenario.dims;
    let seed = scenario.seed;
    let payload_key = StreamRng::new(seed, stream_id(trial, STREAM_PAYLOAD));
    let noise_bob_key = StreamRng::new(seed, stream_id(trial, STREAM_NOISE_BOB));
    let noise_eve_key = StreamRng::new(seed, stream_id(trial, STREAM_NOISE_EVE));

    match scenario.mode {
        Mode::Gpsm => {
            let symbols = super_symbols.expect("modulated mode precomputes the super-alphabet");
            let means_bob: Vec<CVector> = symbols.iter().map(|s| &ch.g_bob * s).collect();
            let means_eve: Vec<CVector> = symbols.iter().map(|s| &ch.g_eve * s).collect();
            let run = |means: &[CVector], n_out: usize, sigma2: f64, key: StreamRng| -> f64 {
                let mut rng = key.rng();
                per_channel_capacity(
                    means.len(),
                    budget.n_noise,
                    |tau, row| {
                        let w = sample_complex_gaussian(&mut rng, n_out, sigma2)
                            .expect("positive variance");
                        let w_norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
                        let m_tau = &means[tau];
                        for (eps, m_eps) in means.iter().enumerate() {
                            let mut d = 0.0;
                            for i in 0..n_out {
                                d += (m_tau[i] - m_eps[i] + w[i]).norm_sqr();
                            }
                            row[eps] = (w_norm - d) / sigma2;
                        }
                    },
                    true,
                )
            };
            let c_bob = run(&means_bob, dims.n_rx, noise.sigma2_bob, noise_bob_key);
            let c_eve = run(&means_eve, dims.n_eve, noise.sigma2_eve, noise_eve_key);
            Ok((c_bob, c_eve))
        }
        Mode::Cas if dims.n_active == 1 => {
            // Single activated antenna: both receivers evaluate the
            // general-channel chi-square ratio on their own observations of
            // the same scrambled transmission.
            let run = |g: &CMatrix, sigma2: f64, noise_key: StreamRng| -> f64 {
                let n_out = g.nrows();
                let sigma2_0 = sigma2 / 2.0;
                let ncand = patterns.len();
                let lambdas: Vec<Vec<f64>> = (0..ncand)
                    .map(|k| {
                        let col = patterns.pattern(k)[0];
                        (0..n_out)
                            .map(|i| g[(i, col)].norm_sqr() / sigma2_0)
                            .collect()
                    })
                    .collect();
                let mut rng_pay = payload_key.rng();
                let mut rng_w = noise_key.rng();
                let mut scores = vec![0.0; ncand];
                per_channel_capacity(
                    ncand,
                    budget.n_noise,
                    |tau, row| {
                        let e = sample_unit_circle(&mut rng_pay, 1)[0];
                        let w = sample_complex_gaussian(&mut rng_w, n_out, sigma2)
                            .expect("positive variance");
                        let col = patterns.pattern(tau)[0];
                        for (k, lam_k) in lambdas.iter().enumerate() {
                            let mut l = 0.0;
                            for i in 0..n_out {
                                let x = (g[(i, col)] * e + w[i]).norm_sqr() / sigma2_0;
                                l += noncentral_chi2_df2_logpdf(x, lam_k[i])
                                    .expect("valid chi2 args")
                                    .value();
                            }
                            scores[k] = l;
                        }
                        let s_tau = scores[tau];
                        for (r, s) in row.iter_mut().zip(&scores) {
                            *r = *s - s_tau;
                        }
                    },
                    true,
                )
            };
            let c_bob = run(&ch.g_bob, noise.sigma2_bob, noise_bob_key);
            let c_eve = run(&ch.g_eve, noise.sigma2_eve, noise_eve_key);
            Ok((c_bob, c_eve))
        }
        Mode::Cas => {
            // Identity-structure kernels. Bob observes through the inverted
            // channel directly; Eve must post-process (when she can).
            let ncand = patterns.len();
            let sigma2_0_bob = vec![noise.sigma2_bob / 2.0; dims.n_rx];
            let mut scores = vec![0.0; ncand];
            let mut rng_pay = payload_key.rng();
            let mut rng_w = noise_bob_key.rng();
            let c_bob = per_channel_capacity(
                ncand,
                budget.n_noise,
                |tau, row| {
                    let e = sample_unit_circle(&mut rng_pay, dims.n_active);
                    let w = sample_complex_gaussian(&mut rng_w, dims.n_rx, noise.sigma2_bob)
                        .expect("positive variance");
                    let pat = patterns.pattern(tau);
                    let r: Vec<f64> = (0..dims.n_rx)
                        .map(|i| {
                            let mut sum = w[i];
                            for (v, &a) in e.iter().zip(pat) {
                                sum += ch.g_bob[(i, a)] * v;
                            }
                            sum.norm_sqr()
                        })
                        .collect();
                    cas_identity_scores(
                        &r,
                        ch.beta,
                        dims.n_active,
                        &sigma2_0_bob,
                        patterns,
                        &mut scores,
                    );
                    let s_tau = scores[tau];
                    for (out, s) in row.iter_mut().zip(&scores) {
                        *out = *s - s_tau;
                    }
                },
                true,
            );
            let c_eve = if eve_capable {
                let t = postprocess_matrix(&ch.realization.h_bob, &ch.realization.h_eve)?;
                let vars = postprocess_noise_variances(&t, noise.sigma2_eve);
                let sigma2_0_eve: Vec<f64> = vars.iter().map(|v| v / 2.0).collect();
                let mut scores = vec![0.0; ncand];
                let mut rng_pay = payload_key.rng();
                let mut rng_w = noise_eve_key.rng();
                per_channel_capacity(
                    ncand,
                    budget.n_noise,
                    |tau, row| {
                        let e = sample_unit_circle(&mut rng_pay, dims.n_active);
                        let w_eve =
                            sample_complex_gaussian(&mut rng_w, dims.n_eve, noise.sigma2_eve)
                                .expect("positive variance");
                        let w_tilde = &t * CVector::from_vec(w_eve);
                        let pat = patterns.pattern(tau);
                        let r: Vec<f64> = (0..dims.n_rx)
                            .map(|i| {
                                let mut sum = w_tilde[i];
                                for (v, &a) in e.iter().zip(pat) {
                                    sum += ch.g_bob[(i, a)] * v;
                                }
                                sum.norm_sqr()
                            })
                            .collect();
                        cas_identity_scores(
                            &r,
                            ch.beta,
                            dims.n_active,
                            &sigma2_0_eve,
                            patterns,
                            &mut scores,
                        );
                        let s_tau = scores[tau];
                        for (out, s) in row.iter_mut().zip(&scores) {
                            *out = *s - s_tau;
                        }
                    },
                    true,
                )
            } else {
                0.0
            };
            Ok((c_bob, c_eve))
        }
        Mode::Gas => {
            let ncand = patterns.len();
            let sigma2_bob = vec![noise.sigma2_bob; dims.n_rx];
            let profile_bob = GasProfile::new(&ch.g_bob, patterns, &sigma2_bob);
            let mut scores = vec![0.0; ncand];
            let mut rng_pay = payload_key.rng();
            let mut rng_w = noise_bob_key.rng();
            let c_bob = per_channel_capacity(
                ncand,
                budget.n_noise,
                |tau, row| {
                    let n = sample_complex_gaussian(&mut rng_pay, dims.n_active, 1.0)
                        .expect("unit variance");
                    let w = sample_complex_gaussian(&mut rng_w, dims.n_rx, noise.sigma2_bob)
                        .expect("positive variance");
                    let pat = patterns.pattern(tau);
                    let ysq: Vec<f64> = (0..dims.n_rx)
                        .map(|i| {
                            let mut sum = w[i];
                            for (v, &a) in n.iter().zip(pat) {
                                sum += ch.g_bob[(i, a)] * v;
                            }
                            sum.norm_sqr()
                        })
                        .collect();
                    profile_bob.scores(&ysq, &mut scores, true);
                    scores_to_row(&scores, tau, row);
                },
                true,
            );
            let c_eve = if eve_capable {
                let t = postprocess_matrix(&ch.realization.h_bob, &ch.realization.h_eve)?;
                let vars = postprocess_noise_variances(&t, noise.sigma2_eve);
                let profile_eve = GasProfile::new(&ch.g_bob, patterns, &vars);
                let mut scores = vec![0.0; ncand];
                let mut rng_pay = payload_key.rng();
                let mut rng_w = noise_eve_key.rng();
                per_channel_capacity(
                    ncand,
                    budget.n_noise,
                    |tau, row| {
                        let n = sample_complex_gaussian(&mut rng_pay, dims.n_active, 1.0)
                            .expect("unit variance");
                        let w_eve =
                            sample_complex_gaussian(&mut rng_w, dims.n_eve, noise.sigma2_eve)
                                .expect("positive variance");
                        let w_tilde = &t * CVector::from_vec(w_eve);
                        let pat = patterns.pattern(tau);
                        let ysq: Vec<f64> = (0..dims.n_rx)
                            .map(|i| {
                                let mut sum = w_tilde[i];
                                for (v, &a) in n.iter().zip(pat) {
                                    sum += ch.g_bob[(i, a)] * v;
                                }
                                sum.norm_sqr()
                            })
                            .collect();
                        profile_eve.scores(&ysq, &mut scores, true);
                        scores_to_row(&scores, tau, row);
                    },
                    true,
                )
            } else {
                0.0
            };
            Ok((c_bob, c_eve))
        }
    }
}

/// Enumerate the modulated super-alphabet `C x A^{n_active}` as sparse
/// vectors, patterns outer and symbol tuples inner, both lexicographic.
fn modulated_super_alphabet(patterns: &PatternSet, m_ary: usize) -> Result<Vec<CVector>> {
    let constellation = psk_constellation(m_ary)?;
    let n_active = patterns.n_active();
    let count = patterns
        .len()
        .checked_mul(m_ary.pow(n_active as u32))
        .ok_or_else(|| Error::InvalidArgument("super-alphabet too large".into()))?;
    let mut symbols = Vec::with_capacity(count);
    for pattern in patterns.iter() {
        let mut indices = vec![0usize; n_active];
        loop {
            let mut s = CVector::zeros(patterns.n_rx());
            for (v, &antenna) in indices.iter().zip(pattern) {
                s[antenna] = constellation[*v];
            }
            symbols.push(s);
            let mut pos = n_active;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                indices[pos] += 1;
                if indices[pos] < m_ary {
                    break;
                }
                indices[pos] = 0;
            }
            if indices.iter().all(|&m| m == 0) {
                break;
            }
        }
    }
    Ok(symbols)
}

/// Estimate Bob's and Eve's DCMC capacities with the mode-correct kernel
/// pair on the same channel realizations, and their difference `c_sec`.
///
/// Geometries where Eve cannot intercept (scrambled modes with fewer
/// eavesdropper than transmit antennas) are not an error: her capacity is
/// forced to zero and the result is flagged.
pub fn estimate_secrecy(
    scenario: &Scenario,
    noise: &NoiseSpec,
    budget: &McBudget,
) -> Result<SecrecyResult> {
    scenario.validate()?;
    noise.validate()?;
    let patterns = PatternSet::build(scenario.dims.n_rx, scenario.dims.n_active)?;
    let corr = CorrSqrts::new(&scenario.dims, CorrelationSpec::new(scenario.rho)?)?;
    let super_symbols = match scenario.mode {
        Mode::Gpsm => Some(modulated_super_alphabet(&patterns, scenario.m_ary)?),
        _ => None,
    };
    // Coherent interception needs no post-processing, and neither does
    // circular scrambling with a single activated antenna (the general
    // chi-square ratio applies to Eve's own channel). Everything else
    // requires Eve to invert her channel.
    let eve_capable = match scenario.mode {
        Mode::Gpsm => true,
        Mode::Cas => scenario.dims.n_active == 1 || scenario.dims.eve_can_postprocess(),
        Mode::Gas => scenario.dims.eve_can_postprocess(),
    };
    let pairs: Vec<(f64, f64)> = (0..budget.n_channels as u64)
        .into_par_iter()
        .map(|trial| {
            secrecy_trial(
                scenario,
                noise,
                budget,
                &patterns,
                super_symbols.as_deref(),
                corr.as_ref(),
                eve_capable,
                trial,
            )
        })
        .collect::<Result<_>>()?;
    let bob: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let eve: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let c_bob = aggregate(&bob, budget.n_noise);
    let c_eve = aggregate(&eve, budget.n_noise);
    Ok(SecrecyResult {
        c_sec: c_bob.bits - c_eve.bits,
        per_channel_secrecy: pairs.iter().map(|(b, e)| b - e).collect(),
        eve_incapable: !eve_capable,
        c_bob,
        c_eve,
    })
}

/// Outcome of the direct-interception estimator under Gaussian scrambling.
#[derive(Debug, Clone, Copy)]
pub struct GasDirectEve {
    /// The capacity estimate, clamped to the valid range (a capacity cannot
    /// be negative).
    pub estimate: CapacityEstimate,
    /// The raw Monte Carlo mean of the per-channel surrogate before the
    /// final clamp; converges to a non-positive value.
    pub raw_mean_bits: f64,
}

/// Eve's capacity under Gaussian scrambling when she skips post-processing
/// and evaluates the variance-profile ratio directly on her own channel.
///
/// This uses the proportional form of the ratio (no Gaussian-normalizer
/// terms), whose expected log-sum saturates the alphabet bound; the
/// per-channel surrogate is averaged unclamped and only the final mean is
/// clamped at zero. The result is zero capacity: direct interception of the
/// scrambled patterns gains nothing.
pub fn gas_eve_direct_capacity(
    scenario: &Scenario,
    noise: &NoiseSpec,
    budget: &McBudget,
) -> Result<GasDirectEve> {
    if scenario.mode != Mode::Gas {
        return Err(Error::UnsupportedMode(
            "direct-interception estimator applies to Gaussian scrambling".into(),
        ));
    }
    scenario.validate()?;
    noise.validate()?;
    let patterns = PatternSet::build(scenario.dims.n_rx, scenario.dims.n_active)?;
    let corr = CorrSqrts::new(&scenario.dims, CorrelationSpec::new(scenario.rho)?)?;
    let ncand = patterns.len();
    let per_channel: Vec<f64> = (0..budget.n_channels as u64)
        .into_par_iter()
        .map(|trial| {
            let ch = draw_trial_channel(scenario, corr.as_ref(), trial)?;
            let dims = &scenario.dims;
            let sigma2 = vec![noise.sigma2_eve; dims.n_eve];
            let profile = GasProfile::new(&ch.g_eve, &patterns, &sigma2);
            let mut scores = vec![0.0; ncand];
            let mut rng_pay =
                StreamRng::new(scenario.seed, stream_id(trial, STREAM_PAYLOAD)).rng();
            let mut rng_w =
                StreamRng::new(scenario.seed, stream_id(trial, STREAM_NOISE_EVE)).rng();
            Ok(per_channel_capacity(
                ncand,
                budget.n_noise,
                |tau, row| {
                    let n = sample_complex_gaussian(&mut rng_pay, dims.n_active, 1.0)
                        .expect("unit variance");
                    let w = sample_complex_gaussian(&mut rng_w, dims.n_eve, noise.sigma2_eve)
                        .expect("positive variance");
                    let pat = patterns.pattern(tau);
                    let ysq: Vec<f64> = (0..dims.n_eve)
                        .map(|i| {
                            let mut sum = w[i];
                            for (v, &a) in n.iter().zip(pat) {
                                sum += ch.g_eve[(i, a)] * v;
                            }
                            sum.norm_sqr()
                        })
                        .collect();
                    profile.scores(&ysq, &mut scores, false);
                    scores_to_row(&scores, tau, row);
                },
                false,
            ))
        })
        .collect::<Result<_>>()?;
    let mut estimate = aggregate(&per_channel, budget.n_noise);
    let raw_mean_bits = estimate.bits;
    estimate.bits = estimate.bits.clamp(0.0, (ncand as f64).log2());
    Ok(GasDirectEve {
        estimate,
        raw_mean_bits,
    })
}

// ---------------------------------------------------------------------------
// Outage statistics and the quadrature oracle
// ---------------------------------------------------------------------------

/// Empirical CDF of per-channel-realization security capacity, evaluated on
/// a uniform threshold grid covering `[min, max]`.
pub fn outage_cdf(per_channel_secrecy: &[f64], n_points: usize) -> Result<Vec<(f64, f64)>> {
    if per_channel_secrecy.is_empty() {
        return Err(Error::InvalidArgument(
            "outage CDF of an empty sample list".into(),
        ));
    }
    if n_points < 2 {
        return Err(Error::InvalidArgument("need at least two grid points".into()));
    }
    let mut sorted = per_channel_secrecy.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if lo == hi {
        return Ok(vec![(lo, 1.0)]);
    }
    let n = sorted.len() as f64;
    Ok((0..n_points)
        .map(|j| {
            let t = lo + (hi - lo) * j as f64 / (n_points - 1) as f64;
            let count = sorted.partition_point(|&x| x <= t);
            (t, count as f64 / n)
        })
        .collect())
}

/// DCMC capacity of a tiny coherent instance by dense quadrature: hypothesis
/// ε is received as a complex Gaussian centered on `means[ε]` with per-entry
/// variance `sigma2`, inputs equiprobable. Supports up to two output
/// dimensions and four hypotheses (the integral is over up to four real
/// axes); serves as the independent oracle for the Monte Carlo estimator.
pub fn brute_force_dcmc(
    means: &[CVector],
    sigma2: f64,
    points_per_axis: usize,
) -> Result<f64> {
    if means.is_empty() || means.len() > 4 {
        return Err(Error::UnsupportedMode(format!(
            "quadrature oracle supports 1..=4 hypotheses, got {}",
            means.len()
        )));
    }
    let dim = means[0].len();
    if dim == 0 || dim > 2 {
        return Err(Error::UnsupportedMode(format!(
            "quadrature oracle supports 1 or 2 output dimensions, got {dim}"
        )));
    }
    if means.iter().any(|m| m.len() != dim) {
        return Err(Error::InvalidArgument("mean dimensions differ".into()));
    }
    if sigma2 <= 0.0 {
        return Err(Error::InvalidArgument("noise variance must be > 0".into()));
    }
    if points_per_axis < 5 || points_per_axis % 2 == 0 {
        return Err(Error::InvalidArgument(
            "points per axis must be odd and at least 5".into(),
        ));
    }
    let b = means.len();
    let axes = 2 * dim;
    let margin = 6.5 * (sigma2 / 2.0).sqrt();
    // Real-coordinate ranges per axis (re0, im0, re1, im1).
    let mut ranges = Vec::with_capacity(axes);
    for d in 0..dim {
        for part in 0..2 {
            let coords: Vec<f64> = means
                .iter()
                .map(|m| if part == 0 { m[d].re } else { m[d].im })
                .collect();
            let lo = coords.iter().copied().fold(f64::INFINITY, f64::min) - margin;
            let hi = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max) + margin;
            ranges.push((lo, hi));
        }
    }
    let n = points_per_axis;
    let steps: Vec<f64> = ranges.iter().map(|(lo, hi)| (hi - lo) / (n - 1) as f64).collect();
    let simpson = |i: usize| -> f64 {
        if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let ln_norm = -(dim as f64) * (std::f64::consts::PI * sigma2).ln();
    let ln_b = (b as f64).ln();
    let mut total = 0.0;
    let mut idx = vec![0usize; axes];
    let mut lp = vec![0.0; b];
    loop {
        let weight: f64 = idx.iter().map(|&i| simpson(i)).product();
        // Current point z in complex coordinates.
        let mut z = [C64::new(0.0, 0.0); 2];
        for d in 0..dim {
            let re = ranges[2 * d].0 + steps[2 * d] * idx[2 * d] as f64;
            let im = ranges[2 * d + 1].0 + steps[2 * d + 1] * idx[2 * d + 1] as f64;
            z[d] = C64::new(re, im);
        }
        for (eps, mean) in means.iter().enumerate() {
            let mut dist = 0.0;
            for d in 0..dim {
                dist += (z[d] - mean[d]).norm_sqr();
            }
            lp[eps] = ln_norm - dist / sigma2;
        }
        let ln_q = log_sum_exp(&lp)? - ln_b;
        for &lp_tau in lp.iter() {
            total += weight * lp_tau.exp() * (lp_tau - ln_q);
        }
        // Advance the grid odometer.
        let mut pos = axes;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }
    let cell: f64 = steps.iter().map(|h| h / 3.0).product();
    Ok(total * cell / (b as f64) / LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::rayleigh;
    use crate::gpsm::make_payload;

    fn test_patterns(n_rx: usize, n_active: usize) -> PatternSet {
        PatternSet::build(n_rx, n_active).unwrap()
    }

    #[test]
    fn noise_spec_convention() {
        let n = NoiseSpec::from_snr_db(10.0);
        assert!((n.sigma2_bob - 0.1).abs() < 1e-15);
        assert_eq!(n.sigma2_bob, n.sigma2_eve);
        assert!(NoiseSpec::from_snr_db(0.0).validate().is_ok());
        assert!(
            NoiseSpec {
                sigma2_bob: 0.0,
                sigma2_eve: 1.0,
                snr_db: 0.0
            }
            .validate()
            .is_err()
        );
    }

    #[test]
    fn coherent_theta_identity_and_noiseless() {
        let mut rng = StreamRng::new(40, 0).rng();
        let g = rayleigh(&mut rng, 3, 3);
        let s = CVector::from_vec(sample_complex_gaussian(&mut rng, 3, 1.0).unwrap());
        let w = CVector::from_vec(sample_complex_gaussian(&mut rng, 3, 0.3).unwrap());
        assert_eq!(log_theta_coherent(&g, &s, &s, &w, 0.5).value(), 0.0);

        let s2 = CVector::from_vec(sample_complex_gaussian(&mut rng, 3, 1.0).unwrap());
        let zero = CVector::zeros(3);
        let lt = log_theta_coherent(&g, &s, &s2, &zero, 0.5).value();
        let want = -(&g * (&s - &s2)).norm_squared() / 0.5;
        assert!((lt - want).abs() < 1e-12);
        assert!(lt < 0.0);
    }

    #[test]
    fn coherent_theta_matches_two_density_oracle() {
        // ln Θ must equal ln p(y|s_eps) - ln p(y|s_tau) with y = g s_tau + w.
        let mut rng = StreamRng::new(41, 0).rng();
        for _ in 0..20 {
            let g = rayleigh(&mut rng, 4, 4);
            let s_tau = CVector::from_vec(sample_complex_gaussian(&mut rng, 4, 1.0).unwrap());
            let s_eps = CVector::from_vec(sample_complex_gaussian(&mut rng, 4, 1.0).unwrap());
            let w = CVector::from_vec(sample_complex_gaussian(&mut rng, 4, 0.2).unwrap());
            let sigma2 = 0.37;
            let y = &g * &s_tau + &w;
            let ln_p = |s: &CVector| -> f64 { -(&y - &g * s).norm_squared() / sigma2 };
            let want = ln_p(&s_eps) - ln_p(&s_tau);
            let got = log_theta_coherent(&g, &s_tau, &s_eps, &w, sigma2).value();
            assert!((got - want).abs() < 1e-10, "got {got}, want {want}");
        }
    }

    #[test]
    fn noncoherent_receive_identity_cases() {
        let ps = test_patterns(4, 1);
        let g = CMatrix::identity(4, 4);
        let payload = Payload {
            mode: Mode::Cas,
            values: vec![C64::new(1.0, 0.0)],
        };
        let w = CVector::zeros(4);
        let r = noncoherent_receive(&g, ps.pattern(2), &payload, &w);
        assert_eq!(r[2], 1.0);
        assert_eq!(r[0] + r[1] + r[3], 0.0);
    }

    #[test]
    fn noncoherent_receive_phase_invariant_under_identity_structure() {
        // With the exact identity structure and no noise, the energies at
        // activated antennas equal beta/n_active regardless of the phases
        // (up to floating-point rounding of |e^{jθ}|²).
        let beta = 3.7;
        let n_active = 2;
        let scale = (beta / n_active as f64).sqrt();
        let g = CMatrix::identity(4, 4) * C64::new(scale, 0.0);
        let ps = test_patterns(4, 2);
        let w = CVector::zeros(4);
        let mut rng = StreamRng::new(42, 0).rng();
        let mut reference: Option<Vec<f64>> = None;
        for _ in 0..100 {
            let payload = make_payload(&mut rng, Mode::Cas, n_active, 4, None).unwrap();
            let r = noncoherent_receive(&g, ps.pattern(0), &payload, &w);
            for (i, &ri) in r.iter().enumerate() {
                if ps.pattern(0).contains(&i) {
                    assert!(
                        (ri - beta / n_active as f64).abs() < 1e-12 * beta,
                        "r[{i}] = {ri}"
                    );
                } else {
                    assert_eq!(ri, 0.0);
                }
            }
            if let Some(reference) = &reference {
                for (a, b) in reference.iter().zip(&r) {
                    assert!((a - b).abs() < 1e-12 * beta);
                }
            } else {
                reference = Some(r);
            }
        }
    }

    #[test]
    fn noncoherent_receive_mean_matches_chi2_identity() {
        // E[r_i / σ₀²] = 2 + λ_i for the normalized noncentral chi-square.
        let mut rng = StreamRng::new(43, 0).rng();
        let g = rayleigh(&mut rng, 2, 2);
        let ps = test_patterns(2, 1);
        let sigma2 = 0.8;
        let sigma2_0 = sigma2 / 2.0;
        let draws = 100_000;
        let mut mean = [0.0f64; 2];
        for _ in 0..draws {
            let payload = make_payload(&mut rng, Mode::Cas, 1, 4, None).unwrap();
            let w =
                CVector::from_vec(sample_complex_gaussian(&mut rng, 2, sigma2).unwrap());
            let r = noncoherent_receive(&g, ps.pattern(0), &payload, &w);
            mean[0] += r[0] / sigma2_0;
            mean[1] += r[1] / sigma2_0;
        }
        for i in 0..2 {
            mean[i] /= draws as f64;
            let lam = g[(i, ps.pattern(0)[0])].norm_sqr() / sigma2_0;
            let want = 2.0 + lam;
            assert!(
                (mean[i] - want).abs() < 0.02 * want,
                "entry {i}: mean {} vs {want}",
                mean[i]
            );
        }
    }

    #[test]
    fn cas_general_kernel_identity_and_composition() {
        let mut rng = StreamRng::new(44, 0).rng();
        let ps = test_patterns(4, 1);
        let g = rayleigh(&mut rng, 4, 4);
        let r = vec![0.3, 1.2, 0.7, 2.5];
        let s0 = 0.4;
        assert_eq!(
            log_theta_cas_general(&g, &r, 2, 2, s0, &ps).unwrap().value(),
            0.0
        );
        // Hand-composed sum of per-entry log-pdf differences.
        let got = log_theta_cas_general(&g, &r, 1, 3, s0, &ps).unwrap().value();
        let mut want = 0.0;
        for i in 0..4 {
            let x = r[i] / s0;
            let le = g[(i, ps.pattern(3)[0])].norm_sqr() / s0;
            let lt = g[(i, ps.pattern(1)[0])].norm_sqr() / s0;
            want += noncentral_chi2_df2_logpdf(x, le).unwrap().value()
                - noncentral_chi2_df2_logpdf(x, lt).unwrap().value();
        }
        assert!((got - want).abs() < 1e-12);

        let ps2 = test_patterns(4, 2);
        assert!(matches!(
            log_theta_cas_general(&g, &r, 0, 1, s0, &ps2),
            Err(Error::UnsupportedMode(_))
        ));
    }

    #[test]
    fn cas_identity_kernel_cancellation() {
        let ps = test_patterns(4, 2); // patterns (0,1),(0,2),(0,3),(1,2)
        let r = vec![1.0, 2.0, 0.5, 1.5];
        let s0 = vec![0.3; 4];
        let beta = 2.0;
        assert_eq!(
            log_theta_cas_identity(&r, 1, 1, beta, 2, &s0, &ps)
                .unwrap()
                .value(),
            0.0
        );
        // Patterns 0 = {0,1} and 1 = {0,2} share antenna 0: only entries 1
        // and 2 may contribute.
        let got = log_theta_cas_identity(&r, 0, 1, beta, 2, &s0, &ps)
            .unwrap()
            .value();
        let d = |i: usize| {
            let x = r[i] / s0[i];
            let lam = beta / (2.0 * s0[i]);
            noncentral_chi2_df2_logpdf(x, lam).unwrap().value()
                - noncentral_chi2_df2_logpdf(x, 0.0).unwrap().value()
        };
        let want = d(2) - d(1);
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
    }

    #[test]
    fn gas_kernel_identity_and_direct_form() {
        let mut rng = StreamRng::new(45, 0).rng();
        let ps = test_patterns(4, 2);
        let g = rayleigh(&mut rng, 4, 4);
        let y = CVector::from_vec(sample_complex_gaussian(&mut rng, 4, 1.0).unwrap());
        let sigma2 = vec![0.25; 4];
        assert_eq!(log_theta_gas(&g, &y, 3, 3, &sigma2, &ps).value(), 0.0);

        let got = log_theta_gas(&g, &y, 0, 2, &sigma2, &ps).value();
        let v = |k: usize, i: usize| -> f64 {
            ps.pattern(k)
                .iter()
                .map(|&a| g[(i, a)].norm_sqr())
                .sum::<f64>()
                + sigma2[i]
        };
        let mut want = 0.0;
        for i in 0..4 {
            let (vt, ve) = (v(0, i), v(2, i));
            want += y[i].norm_sqr() / vt - y[i].norm_sqr() / ve + vt.ln() - ve.ln();
        }
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn eve_postprocess_transparent_when_unitary_and_equal() {
        // Unitary H_E with H_B = H_E makes T the identity.
        let mut h = CMatrix::zeros(3, 3);
        h[(0, 1)] = C64::new(0.0, 1.0);
        h[(1, 2)] = C64::new(1.0, 0.0);
        h[(2, 0)] = C64::new(-1.0, 0.0);
        let mut rng = StreamRng::new(46, 0).rng();
        let y = CVector::from_vec(sample_complex_gaussian(&mut rng, 3, 1.0).unwrap());
        let (y_tilde, vars) = eve_postprocess(&h, &h, &y, 0.5).unwrap();
        assert!((&y_tilde - &y).norm() < 1e-10);
        for v in vars {
            assert!((v - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn eve_postprocess_cancels_noiseless_signal() {
        let mut rng = StreamRng::new(47, 0).rng();
        let h_bob = rayleigh(&mut rng, 4, 8);
        let h_eve = rayleigh(&mut rng, 10, 8);
        let x = CVector::from_vec(sample_complex_gaussian(&mut rng, 8, 1.0).unwrap());
        let y_eve = &h_eve * &x;
        let (y_tilde, _) = eve_postprocess(&h_bob, &h_eve, &y_eve, 0.1).unwrap();
        let want = &h_bob * &x;
        assert!((&y_tilde - &want).norm() < 1e-8);
    }

    #[test]
    fn eve_postprocess_rejects_small_arrays() {
        let h_bob = CMatrix::zeros(4, 8);
        let h_eve = CMatrix::zeros(6, 8); // n_eve < n_tx
        let y = CVector::zeros(6);
        assert!(matches!(
            eve_postprocess(&h_bob, &h_eve, &y, 0.1),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn eve_postprocess_amplifies_noise_on_square_channels() {
        // diag(TTᴴ) has mean amplification above one for square random H_E
        // in nearly every draw.
        let mut rng = StreamRng::new(48, 0).rng();
        let mut amplified = 0usize;
        let draws = 200;
        for _ in 0..draws {
            let h_bob = rayleigh(&mut rng, 4, 8);
            let h_eve = rayleigh(&mut rng, 8, 8);
            let t = postprocess_matrix(&h_bob, &h_eve).unwrap();
            let vars = postprocess_noise_variances(&t, 1.0);
            let mean = vars.iter().sum::<f64>() / vars.len() as f64;
            if mean > 1.0 {
                amplified += 1;
            }
        }
        assert!(
            amplified as f64 >= 0.95 * draws as f64,
            "amplified in {amplified}/{draws} draws"
        );
    }

    #[test]
    fn outage_cdf_cases() {
        let cdf = outage_cdf(&[2.0, 2.0, 2.0], 11).unwrap();
        assert_eq!(cdf, vec![(2.0, 1.0)]);

        let cdf = outage_cdf(&[0.0, 1.0], 3).unwrap();
        assert_eq!(cdf[0], (0.0, 0.5));
        assert_eq!(cdf[1], (0.5, 0.5));
        assert_eq!(cdf[2], (1.0, 1.0));

        assert!(outage_cdf(&[], 5).is_err());
    }

    #[test]
    fn brute_force_validates_inputs() {
        let m1 = vec![CVector::zeros(3)];
        assert!(matches!(
            brute_force_dcmc(&m1, 1.0, 41),
            Err(Error::UnsupportedMode(_))
        ));
        let m2 = vec![CVector::zeros(1); 5];
        assert!(matches!(
            brute_force_dcmc(&m2, 1.0, 41),
            Err(Error::UnsupportedMode(_))
        ));
        let ok = vec![CVector::zeros(1); 2];
        assert!(brute_force_dcmc(&ok, 1.0, 40).is_err()); // even grid
        assert!(brute_force_dcmc(&ok, 0.0, 41).is_err());
    }

    #[test]
    fn brute_force_binary_awgn_reference() {
        // Antipodal unit-energy inputs over a complex channel with per-entry
        // variance 2 carry the same information as the real channel with
        // unit variance; at 0 dB the capacity is 0.485944 bits.
        let means = vec![
            CVector::from_vec(vec![C64::new(1.0, 0.0)]),
            CVector::from_vec(vec![C64::new(-1.0, 0.0)]),
        ];
        let c = brute_force_dcmc(&means, 2.0, 201).unwrap();
        assert!((c - 0.485_944).abs() < 1e-3, "C = {c}");
    }

    #[test]
    fn brute_force_vanishes_at_huge_noise() {
        let means = vec![
            CVector::from_vec(vec![C64::new(1.0, 0.0)]),
            CVector::from_vec(vec![C64::new(-1.0, 0.0)]),
        ];
        let c = brute_force_dcmc(&means, 1e4, 201).unwrap();
        assert!(c.abs() < 1e-3, "C = {c}");
    }

    #[test]
    fn gas_fast_path_matches_kernel() {
        // The estimator's score-difference form must agree with the public
        // kernel entry for entry.
        let mut rng = StreamRng::new(50, 0).rng();
        let ps = test_patterns(4, 2);
        let g = rayleigh(&mut rng, 4, 4);
        let sigma2 = vec![0.4, 0.2, 0.9, 0.5];
        let profile = GasProfile::new(&g, &ps, &sigma2);
        let y = CVector::from_vec(sample_complex_gaussian(&mut rng, 4, 1.5).unwrap());
        let ysq: Vec<f64> = y.iter().map(|z| z.norm_sqr()).collect();
        let mut scores = vec![0.0; ps.len()];
        profile.scores(&ysq, &mut scores, true);
        let mut row = vec![0.0; ps.len()];
        for tau in 0..ps.len() {
            scores_to_row(&scores, tau, &mut row);
            for eps in 0..ps.len() {
                let want = log_theta_gas(&g, &y, tau, eps, &sigma2, &ps).value();
                assert!(
                    (row[eps] - want).abs() < 1e-10,
                    "tau={tau} eps={eps}: fast {} kernel {want}",
                    row[eps]
                );
            }
        }
    }

    #[test]
    fn cas_identity_fast_path_matches_kernel() {
        let ps = test_patterns(8, 2);
        let mut rng = StreamRng::new(51, 0).rng();
        let r: Vec<f64> = sample_complex_gaussian(&mut rng, 8, 2.0)
            .unwrap()
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        let sigma2_0: Vec<f64> = (0..8).map(|i| 0.1 + 0.05 * i as f64).collect();
        let beta = 5.0;
        let mut scores = vec![0.0; ps.len()];
        cas_identity_scores(&r, beta, 2, &sigma2_0, &ps, &mut scores);
        for tau in 0..ps.len() {
            for eps in 0..ps.len() {
                let fast = scores[eps] - scores[tau];
                let want = log_theta_cas_identity(&r, tau, eps, beta, 2, &sigma2_0, &ps)
                    .unwrap()
                    .value();
                assert!(
                    (fast - want).abs() < 1e-10,
                    "tau={tau} eps={eps}: fast {fast} kernel {want}"
                );
            }
        }
    }

    #[test]
    fn post_processing_consistency_at_zero_eve_noise() {
        // With zero receiver noise the post-processing reproduces the
        // legitimate signal exactly, so Eve's per-channel capacity matches
        // Bob's noiseless limit (the alphabet ceiling) on every channel.
        let dims = SystemDims::new(8, 4, 2, 8).unwrap();
        let scenario = Scenario {
            mode: Mode::Gas,
            dims,
            m_ary: 4,
            csit_sigma_i: 0.0,
            rho: 0.0,
            seed: 77,
        };
        let patterns = test_patterns(4, 2);
        let ncand = patterns.len();
        let ceiling = (ncand as f64).log2();
        for trial in 0..4u64 {
            let ch = draw_trial_channel(&scenario, None, trial).unwrap();
            let t = postprocess_matrix(&ch.realization.h_bob, &ch.realization.h_eve).unwrap();
            let vars = postprocess_noise_variances(&t, 0.0);
            assert!(vars.iter().all(|&v| v == 0.0));
            let profile = GasProfile::new(&ch.g_bob, &patterns, &vars);
            let mut scores = vec![0.0; ncand];
            let mut rng_pay =
                StreamRng::new(scenario.seed, stream_id(trial, STREAM_PAYLOAD)).rng();
            let c_eve = per_channel_capacity(
                ncand,
                24,
                |tau, row| {
                    let n = sample_complex_gaussian(&mut rng_pay, dims.n_active, 1.0).unwrap();
                    let pat = patterns.pattern(tau);
                    let ysq: Vec<f64> = (0..dims.n_rx)
                        .map(|i| {
                            let mut sum = C64::new(0.0, 0.0);
                            for (v, &a) in n.iter().zip(pat) {
                                sum += ch.g_bob[(i, a)] * v;
                            }
                            sum.norm_sqr()
                        })
                        .collect();
                    profile.scores(&ysq, &mut scores, true);
                    scores_to_row(&scores, tau, row);
                },
                true,
            );
            assert!(
                (c_eve - ceiling).abs() < 0.05,
                "trial {trial}: zero-noise Eve capacity {c_eve} vs ceiling {ceiling}"
            );
        }
    }

    #[test]
    fn scenario_validation() {
        let dims = SystemDims::new(8, 4, 2, 4).unwrap();
        let mut sc = Scenario {
            mode: Mode::Cas,
            dims,
            m_ary: 4,
            csit_sigma_i: 0.0,
            rho: 0.0,
            seed: 1,
        };
        assert!(sc.validate().is_ok());
        sc.csit_sigma_i = 0.3;
        assert!(matches!(sc.validate(), Err(Error::UnsupportedMode(_))));
        sc.mode = Mode::Gas;
        assert!(sc.validate().is_ok());
        sc.rho = 1.0;
        assert!(sc.validate().is_err());
    }
}
