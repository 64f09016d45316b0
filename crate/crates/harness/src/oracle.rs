//! Self-checking oracle suite: Monte Carlo estimates against dense
//! quadrature, the zero-capacity property of direct interception under
//! Gaussian scrambling, exact ratio normalization, and a sensitivity
//! self-test that injects a deliberate bias and must see it flagged.

use crate::Result;
use gpsm_core::channel::{SystemDims, rayleigh};
use gpsm_core::gpsm::{Mode, PatternSet};
use gpsm_core::numerics::{StreamRng, sample_complex_gaussian};
use gpsm_core::secrecy::{
    McBudget, NoiseSpec, Scenario, brute_force_dcmc, dcmc_capacity, gas_eve_direct_capacity,
    log_theta_cas_general, log_theta_cas_identity, log_theta_coherent, log_theta_gas,
};
use gpsm_core::{C64, CVector};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub measured: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub checks: Vec<CheckResult>,
}

impl OracleReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

fn cvec(values: &[(f64, f64)]) -> CVector {
    CVector::from_vec(values.iter().map(|&(re, im)| C64::new(re, im)).collect())
}

/// Monte Carlo estimate of a fixed tiny coherent instance, with an optional
/// log-domain bias added to every ratio (the sensitivity hook).
fn mc_fixed_instance(
    means: &[CVector],
    sigma2: f64,
    budget: &McBudget,
    seed: u64,
    bias_nats: f64,
) -> Result<gpsm_core::secrecy::CapacityEstimate> {
    let dim = means[0].len();
    let means = means.to_vec();
    Ok(dcmc_capacity(
        means.len(),
        budget,
        |trial| Ok(StreamRng::new(seed, trial).rng()),
        |rng, tau, row: &mut [f64]| {
            let w = sample_complex_gaussian(rng, dim, sigma2).expect("positive variance");
            let w_norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            for (eps, m_eps) in means.iter().enumerate() {
                let mut d = 0.0;
                for i in 0..dim {
                    d += (means[tau][i] - m_eps[i] + w[i]).norm_sqr();
                }
                row[eps] = (w_norm - d) / sigma2 + bias_nats;
            }
        },
    )?)
}

struct TinyInstance {
    name: &'static str,
    means: Vec<CVector>,
    sigma2: f64,
    grid: usize,
}

fn tiny_instances() -> Vec<TinyInstance> {
    vec![
        TinyInstance {
            name: "mc_vs_quadrature_binary_awgn_0db",
            means: vec![cvec(&[(1.0, 0.0)]), cvec(&[(-1.0, 0.0)])],
            sigma2: 2.0,
            grid: 201,
        },
        TinyInstance {
            name: "mc_vs_quadrature_quaternary_scalar",
            means: vec![
                cvec(&[(1.0, 1.0)]),
                cvec(&[(-1.0, 1.0)]),
                cvec(&[(-1.0, -1.0)]),
                cvec(&[(1.0, -1.0)]),
            ],
            sigma2: 1.5,
            grid: 201,
        },
        TinyInstance {
            name: "mc_vs_quadrature_binary_two_antennas",
            means: vec![
                cvec(&[(0.9, 0.0), (0.2, -0.4)]),
                cvec(&[(-0.6, 0.3), (0.1, 0.8)]),
            ],
            sigma2: 1.0,
            grid: 41,
        },
    ]
}

fn check_mc_vs_quadrature(checks: &mut Vec<CheckResult>) -> Result<()> {
    let budget = McBudget::new(24, 260)?;
    for (idx, inst) in tiny_instances().iter().enumerate() {
        let oracle = brute_force_dcmc(&inst.means, inst.sigma2, inst.grid)?;
        let mc = mc_fixed_instance(&inst.means, inst.sigma2, &budget, 900 + idx as u64, 0.0)?;
        let tolerance = 3.0 * mc.std_err + 2e-3;
        let measured = (mc.bits - oracle).abs();
        checks.push(CheckResult {
            name: inst.name.into(),
            tolerance,
            measured,
            pass: measured < tolerance,
            detail: format!(
                "monte carlo {:.5} ± {:.5} vs quadrature {:.5}",
                mc.bits, mc.std_err, oracle
            ),
        });
    }
    Ok(())
}

fn check_direct_eve_zero(checks: &mut Vec<CheckResult>) -> Result<()> {
    let scenario = Scenario {
        mode: Mode::Gas,
        dims: SystemDims::new(16, 8, 2, 16)?,
        m_ary: 4,
        csit_sigma_i: 0.0,
        rho: 0.0,
        seed: 4242,
    };
    let out = gas_eve_direct_capacity(
        &scenario,
        &NoiseSpec::from_snr_db(10.0),
        &McBudget::new(40, 60)?,
    )?;
    checks.push(CheckResult {
        name: "gas_direct_eve_zero_capacity".into(),
        tolerance: 0.05,
        measured: out.estimate.bits.abs(),
        pass: out.estimate.bits.abs() <= 0.05 && out.raw_mean_bits < 3.0 * out.estimate.std_err,
        detail: format!(
            "clamped {:.5}, raw surrogate {:.5} ± {:.5}",
            out.estimate.bits, out.raw_mean_bits, out.estimate.std_err
        ),
    });
    Ok(())
}

/// Every ratio kernel must return exactly zero when both hypotheses agree.
fn check_theta_normalization(checks: &mut Vec<CheckResult>, bias_nats: f64) -> Result<()> {
    let mut rng = StreamRng::new(7000, 0).rng();
    let mut worst: f64 = 0.0;

    let g = rayleigh(&mut rng, 4, 4);
    let s = CVector::from_vec(sample_complex_gaussian(&mut rng, 4, 1.0)?);
    let w = CVector::from_vec(sample_complex_gaussian(&mut rng, 4, 0.5)?);
    worst = worst.max((log_theta_coherent(&g, &s, &s, &w, 0.5).value() + bias_nats).abs());

    let ps1 = PatternSet::build(4, 1)?;
    let r: Vec<f64> = sample_complex_gaussian(&mut rng, 4, 1.0)?
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    worst = worst.max(
        (log_theta_cas_general(&g, &r, 1, 1, 0.3, &ps1)?.value() + bias_nats).abs(),
    );

    let ps2 = PatternSet::build(4, 2)?;
    let s0 = vec![0.25; 4];
    worst = worst.max(
        (log_theta_cas_identity(&r, 2, 2, 3.0, 2, &s0, &ps2)?.value() + bias_nats).abs(),
    );

    let y = CVector::from_vec(sample_complex_gaussian(&mut rng, 4, 1.0)?);
    worst = worst.max((log_theta_gas(&g, &y, 0, 0, &s0, &ps2).value() + bias_nats).abs());

    checks.push(CheckResult {
        name: if bias_nats == 0.0 {
            "theta_self_ratio_is_exactly_zero".into()
        } else {
            "bias_sensitivity_theta_normalization".into()
        },
        tolerance: 0.0,
        measured: worst,
        pass: if bias_nats == 0.0 {
            worst == 0.0
        } else {
            worst > 0.0
        },
        detail: if bias_nats == 0.0 {
            "max |ln Θ(τ,τ)| over all four kernels".into()
        } else {
            format!("injected {bias_nats:.6} nats must surface in ln Θ(τ,τ)")
        },
    });
    Ok(())
}

/// Scaling every ratio by 1.01 shifts the estimate by log2(1.01). At a
/// budget tight enough to resolve that shift, the quadrature comparison
/// must accept the unbiased run and flag the biased one.
fn check_bias_sensitivity(checks: &mut Vec<CheckResult>) -> Result<()> {
    let inst = &tiny_instances()[0];
    let budget = McBudget::new(64, 4000)?;
    let oracle = brute_force_dcmc(&inst.means, inst.sigma2, inst.grid)?;
    let bias = 1.01f64.ln();
    let clean = mc_fixed_instance(&inst.means, inst.sigma2, &budget, 900, 0.0)?;
    let biased = mc_fixed_instance(&inst.means, inst.sigma2, &budget, 900, bias)?;
    let tolerance = 3.0 * clean.std_err + 2e-3;
    let clean_diff = (clean.bits - oracle).abs();
    let measured = (biased.bits - oracle).abs();
    checks.push(CheckResult {
        name: "bias_sensitivity_mc_vs_quadrature".into(),
        tolerance,
        measured,
        pass: clean_diff < tolerance && measured >= tolerance,
        detail: format!(
            "ratios scaled by 1.01: clean {:.5} (diff {:.5}) passes, biased {:.5} must not",
            clean.bits, clean_diff, biased.bits
        ),
    });
    Ok(())
}

/// Run the full self-check suite.
pub fn run_oracle_check() -> Result<OracleReport> {
    let mut checks = Vec::new();
    check_mc_vs_quadrature(&mut checks)?;
    check_direct_eve_zero(&mut checks)?;
    check_theta_normalization(&mut checks, 0.0)?;
    check_theta_normalization(&mut checks, 1.01f64.ln())?;
    check_bias_sensitivity(&mut checks)?;
    Ok(OracleReport { checks })
}

/// Render the report as aligned text lines, one per check.
pub fn render_report(report: &OracleReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&format!(
            "[{}] {:45} measured {:10.6} tolerance {:10.6}  ({})\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        ));
    }
    out
}
