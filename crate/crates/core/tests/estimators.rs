//! Estimator-level checks: Monte Carlo against the quadrature oracle,
//! capacity limits and ceilings, scrambling security behavior, and
//! reproducibility across worker counts.

use gpsm_core::channel::SystemDims;
use gpsm_core::gpsm::Mode;
use gpsm_core::numerics::{StreamRng, sample_complex_gaussian};
use gpsm_core::secrecy::{
    CapacityEstimate, McBudget, NoiseSpec, Scenario, brute_force_dcmc, dcmc_capacity,
    estimate_secrecy, gas_eve_direct_capacity,
};
use gpsm_core::{C64, CMatrix, CVector};

fn scenario(mode: Mode, dims: SystemDims, seed: u64) -> Scenario {
    Scenario {
        mode,
        dims,
        m_ary: 4,
        csit_sigma_i: 0.0,
        rho: 0.0,
        seed,
    }
}

/// Monte Carlo estimate of a fixed tiny coherent instance: hypothesis means
/// are constant across trials, only the noise is redrawn.
fn mc_fixed_instance(means: &[CVector], sigma2: f64, budget: &McBudget, seed: u64) -> CapacityEstimate {
    let dim = means[0].len();
    let means: Vec<CVector> = means.to_vec();
    dcmc_capacity(
        means.len(),
        budget,
        |trial| Ok(StreamRng::new(seed, trial).rng()),
        |rng, tau, row: &mut [f64]| {
            let w = sample_complex_gaussian(rng, dim, sigma2).unwrap();
            let w_norm: f64 = w.iter().map(|z| z.norm_sqr()).sum();
            for (eps, m_eps) in means.iter().enumerate() {
                let mut d = 0.0;
                for i in 0..dim {
                    d += (means[tau][i] - m_eps[i] + w[i]).norm_sqr();
                }
                row[eps] = (w_norm - d) / sigma2;
            }
        },
    )
    .unwrap()
}

fn cvec(values: &[(f64, f64)]) -> CVector {
    CVector::from_vec(values.iter().map(|&(re, im)| C64::new(re, im)).collect())
}

#[test]
fn mc_matches_quadrature_oracle_on_tiny_instances() {
    // Five fixed instances spanning 1-D/2-D outputs and 2..4 hypotheses.
    let instances: Vec<(Vec<CVector>, f64, usize)> = vec![
        // Binary antipodal at 0 dB (complex variance 2 = real variance 1).
        (vec![cvec(&[(1.0, 0.0)]), cvec(&[(-1.0, 0.0)])], 2.0, 201),
        // Binary, asymmetric means, moderate noise.
        (vec![cvec(&[(0.8, 0.3)]), cvec(&[(-0.5, -0.9)])], 0.7, 201),
        // Quaternary scalar.
        (
            vec![
                cvec(&[(1.0, 1.0)]),
                cvec(&[(-1.0, 1.0)]),
                cvec(&[(-1.0, -1.0)]),
                cvec(&[(1.0, -1.0)]),
            ],
            1.5,
            201,
        ),
        // Binary on a two-antenna output.
        (
            vec![cvec(&[(0.9, 0.0), (0.2, -0.4)]), cvec(&[(-0.6, 0.3), (0.1, 0.8)])],
            1.0,
            41,
        ),
        // Quaternary on two antennas, noisier.
        (
            vec![
                cvec(&[(1.0, 0.0), (0.0, 1.0)]),
                cvec(&[(-1.0, 0.0), (0.0, -1.0)]),
                cvec(&[(0.0, 1.0), (1.0, 0.0)]),
                cvec(&[(0.0, -1.0), (-1.0, 0.0)]),
            ],
            2.5,
            41,
        ),
    ];
    let budget = McBudget::new(24, 260).unwrap();
    for (idx, (means, sigma2, grid)) in instances.iter().enumerate() {
        let oracle = brute_force_dcmc(means, *sigma2, *grid).unwrap();
        let mc = mc_fixed_instance(means, *sigma2, &budget, 900 + idx as u64);
        let tol = 3.0 * mc.std_err + 2e-3; // quadrature truncation allowance
        assert!(
            (mc.bits - oracle).abs() < tol,
            "instance {idx}: MC {} ± {} vs quadrature {oracle}",
            mc.bits,
            mc.std_err
        );
    }
    // The first instance is the binary-input AWGN reference point.
    let biawgn = brute_force_dcmc(&instances[0].0, 2.0, 201).unwrap();
    assert!((biawgn - 0.4857).abs() < 1e-2);
}

#[test]
fn dcmc_capacity_no_information_limit() {
    // At -40 dB the estimate must sit within 0.05 bits of zero.
    let means = vec![cvec(&[(1.0, 0.0)]), cvec(&[(-1.0, 0.0)])];
    let sigma2 = 1e4;
    let est = mc_fixed_instance(&means, sigma2, &McBudget::new(20, 100).unwrap(), 31);
    assert!(est.bits.abs() < 0.05, "C = {}", est.bits);
}

#[test]
fn gpsm_bob_saturates_at_k_eff() {
    // [8,4] with two activated antennas and QPSK carries 2 + 4 = 6 bits;
    // at 30 dB the estimate saturates there.
    let dims = SystemDims::new(8, 4, 2, 4).unwrap();
    let sc = scenario(Mode::Gpsm, dims, 5);
    let res = estimate_secrecy(&sc, &NoiseSpec::from_snr_db(30.0), &McBudget::new(8, 12).unwrap())
        .unwrap();
    assert!(
        (res.c_bob.bits - 6.0).abs() < 0.1,
        "C_B = {} ± {}",
        res.c_bob.bits,
        res.c_bob.std_err
    );
}

#[test]
fn gpsm_secrecy_signs_follow_eavesdropper_size() {
    // Matched eavesdropper arrays leave a positive security margin at
    // moderate SNR; doubling them to the transmit size erases it.
    let budget = McBudget::new(16, 24).unwrap();
    let dims4 = SystemDims::new(8, 4, 2, 4).unwrap();
    let res4 =
        estimate_secrecy(&scenario(Mode::Gpsm, dims4, 6), &NoiseSpec::from_snr_db(0.0), &budget)
            .unwrap();
    assert!(res4.c_sec > 0.2, "C_S(N_e=4) = {}", res4.c_sec);

    let dims8 = SystemDims::new(8, 4, 2, 8).unwrap();
    for snr in [-5.0, 5.0, 15.0] {
        let res8 =
            estimate_secrecy(&scenario(Mode::Gpsm, dims8, 6), &NoiseSpec::from_snr_db(snr), &budget)
                .unwrap();
        assert!(
            res8.c_sec <= 0.05,
            "C_S(N_e=8) = {} at {snr} dB",
            res8.c_sec
        );
    }
}

#[test]
fn cas_identity_bob_reaches_ceilings() {
    // At 30 dB Bob's chi-square estimator saturates the spatial-bit ceiling:
    // 6 bits for half activation, 4 bits for the mirrored 2-of-8 and 6-of-8.
    let budget = McBudget::new(10, 40).unwrap();
    for (n_active, want) in [(4usize, 6.0f64), (2, 4.0), (6, 4.0)] {
        let dims = SystemDims::new(16, 8, n_active, 16).unwrap();
        let res = estimate_secrecy(
            &scenario(Mode::Cas, dims, 7),
            &NoiseSpec::from_snr_db(30.0),
            &budget,
        )
        .unwrap();
        assert!(
            (res.c_bob.bits - want).abs() < 0.1,
            "n_active = {n_active}: C_B = {}",
            res.c_bob.bits
        );
    }
}

#[test]
fn cas_general_eve_rarely_beats_bob() {
    // Single-antenna activation: both sides use the general chi-square
    // ratio, but the inverted channel's energy contrast favors Bob on
    // nearly every channel realization.
    let dims = SystemDims::new(8, 4, 1, 8).unwrap();
    let budget = McBudget::new(4, 40).unwrap();
    let mut bob_wins = 0usize;
    let seeds = 20u64;
    for seed in 0..seeds {
        let res = estimate_secrecy(
            &scenario(Mode::Cas, dims, 1000 + seed),
            &NoiseSpec::from_snr_db(10.0),
            &budget,
        )
        .unwrap();
        if res.c_eve.bits <= res.c_bob.bits {
            bob_wins += 1;
        }
    }
    assert!(
        bob_wins as f64 >= 0.95 * seeds as f64,
        "Bob won only {bob_wins}/{seeds} seeds"
    );
}

#[test]
fn gas_bob_capacity_limits() {
    // Noise-free limit reaches the pattern ceiling, the -40 dB limit
    // vanishes, and 30 dB sits within 0.1 of the ceiling for 2-of-8.
    let dims = SystemDims::new(16, 8, 2, 16).unwrap();
    let budget = McBudget::new(12, 50).unwrap();
    let hi = estimate_secrecy(&scenario(Mode::Gas, dims, 8), &NoiseSpec::from_snr_db(40.0), &budget)
        .unwrap();
    assert!((hi.c_bob.bits - 4.0).abs() < 0.05, "C_B(40 dB) = {}", hi.c_bob.bits);
    let lo = estimate_secrecy(&scenario(Mode::Gas, dims, 8), &NoiseSpec::from_snr_db(-40.0), &budget)
        .unwrap();
    assert!(lo.c_bob.bits.abs() < 0.05, "C_B(-40 dB) = {}", lo.c_bob.bits);
    let mid = estimate_secrecy(&scenario(Mode::Gas, dims, 8), &NoiseSpec::from_snr_db(30.0), &budget)
        .unwrap();
    assert!((mid.c_bob.bits - 4.0).abs() < 0.1, "C_B(30 dB) = {}", mid.c_bob.bits);
}

#[test]
fn gas_direct_eve_interception_is_worthless() {
    // Direct evaluation of the variance-profile ratio on Eve's own channel
    // returns zero capacity: the raw surrogate converges below zero and the
    // reported capacity clamps at exactly zero.
    let dims = SystemDims::new(16, 8, 2, 16).unwrap();
    let budget = McBudget::new(40, 60).unwrap();
    for snr in [0.0, 10.0, 30.0] {
        let out = gas_eve_direct_capacity(
            &scenario(Mode::Gas, dims, 9),
            &NoiseSpec::from_snr_db(snr),
            &budget,
        )
        .unwrap();
        assert!(
            out.raw_mean_bits < 3.0 * out.estimate.std_err,
            "raw surrogate {} at {snr} dB",
            out.raw_mean_bits
        );
        assert!(
            out.estimate.bits.abs() <= 0.05,
            "C_E = {} at {snr} dB",
            out.estimate.bits
        );
    }
}

#[test]
fn gas_secrecy_rises_then_decays() {
    // Post-processed interception: the security margin grows out of the
    // noise floor, peaks, then collapses as the amplified noise vanishes.
    let dims = SystemDims::new(16, 8, 2, 16).unwrap();
    let budget = McBudget::new(14, 40).unwrap();
    let snrs = [-10.0, 5.0, 40.0];
    let cs: Vec<f64> = snrs
        .iter()
        .map(|&snr| {
            estimate_secrecy(&scenario(Mode::Gas, dims, 10), &NoiseSpec::from_snr_db(snr), &budget)
                .unwrap()
                .c_sec
        })
        .collect();
    assert!(cs[1] > cs[0] + 0.5, "no rise: {cs:?}");
    assert!(cs[1] > cs[2] + 0.5, "no decay: {cs:?}");
    assert!(cs[2] < 0.3, "high-SNR margin should collapse: {cs:?}");
}

#[test]
fn bob_capacity_monotone_in_noise() {
    // Non-increasing in sigma^2 within two combined standard errors on a
    // ten-point SNR grid.
    let dims = SystemDims::new(8, 4, 2, 8).unwrap();
    let budget = McBudget::new(12, 40).unwrap();
    let mut prev: Option<CapacityEstimate> = None;
    for i in 0..10 {
        let snr = -12.0 + 4.0 * i as f64; // decreasing sigma^2
        let res = estimate_secrecy(&scenario(Mode::Gas, dims, 11), &NoiseSpec::from_snr_db(snr), &budget)
            .unwrap();
        if let Some(p) = prev {
            let slack = 2.0 * (p.std_err.powi(2) + res.c_bob.std_err.powi(2)).sqrt();
            assert!(
                res.c_bob.bits >= p.bits - slack,
                "capacity dropped from {} to {} at {snr} dB",
                p.bits,
                res.c_bob.bits
            );
        }
        prev = Some(res.c_bob);
    }
}

#[test]
fn eve_incapable_geometries_are_flagged() {
    // Fewer eavesdropper than transmit antennas under scrambling: her
    // capacity is forced to zero and flagged, not an error.
    let dims = SystemDims::new(16, 8, 2, 8).unwrap();
    let budget = McBudget::new(4, 10).unwrap();
    let res = estimate_secrecy(&scenario(Mode::Gas, dims, 12), &NoiseSpec::from_snr_db(10.0), &budget)
        .unwrap();
    assert!(res.eve_incapable);
    assert_eq!(res.c_eve.bits, 0.0);
    assert_eq!(res.c_sec, res.c_bob.bits);

    let dims_cas = SystemDims::new(16, 8, 3, 8).unwrap();
    let res = estimate_secrecy(
        &scenario(Mode::Cas, dims_cas, 12),
        &NoiseSpec::from_snr_db(10.0),
        &budget,
    )
    .unwrap();
    assert!(res.eve_incapable);
    assert_eq!(res.c_eve.bits, 0.0);
}

#[test]
fn secrecy_invariants_hold() {
    let dims = SystemDims::new(8, 4, 2, 8).unwrap();
    let budget = McBudget::new(6, 10).unwrap();
    for mode in [Mode::Gpsm, Mode::Cas, Mode::Gas] {
        let sc = scenario(mode, dims, 13);
        let res = estimate_secrecy(&sc, &NoiseSpec::from_snr_db(5.0), &budget).unwrap();
        // c_sec is exactly the difference of the reported means.
        assert_eq!(res.c_sec, res.c_bob.bits - res.c_eve.bits);
        assert_eq!(res.per_channel_secrecy.len(), budget.n_channels);
        // Capacity bounds: clamped into [0, log2 |B|].
        let cap = match mode {
            Mode::Gpsm => 6.0,
            _ => 2.0,
        };
        assert!(res.c_bob.bits >= 0.0 && res.c_bob.bits <= cap);
        assert!(res.c_eve.bits >= 0.0 && res.c_eve.bits <= cap);
    }
}

#[test]
fn estimates_are_identical_for_any_worker_count() {
    let dims = SystemDims::new(8, 4, 2, 8).unwrap();
    let sc = scenario(Mode::Gas, dims, 14);
    let noise = NoiseSpec::from_snr_db(10.0);
    let budget = McBudget::new(8, 16).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| estimate_secrecy(&sc, &noise, &budget).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.c_bob.bits, b.c_bob.bits);
    assert_eq!(a.c_eve.bits, b.c_eve.bits);
    assert_eq!(a.per_channel_secrecy, b.per_channel_secrecy);
}
