//! The GPSM transceiver: receive-antenna activation patterns, channel
//! inversion precoding, super-symbol construction under all three payload
//! modes, and the two reference detectors.
//!
//! The power scaling `sqrt(beta / n_active)` is folded into the equivalent
//! channel exactly once, at [`equivalent_channel`]; detectors and the
//! likelihood kernels in [`crate::secrecy`] receive the already-scaled
//! matrix.

use crate::numerics::{sample_complex_gaussian, sample_unit_circle};
use crate::{C64, CMatrix, CVector, Error, Result};
use itertools::Itertools;
use rand::Rng;
use std::f64::consts::PI;

/// Payload carried on the activated antennas.
///
/// `Gpsm` is the conventional scheme (M-ary modulated symbols); `Cas` and
/// `Gas` replace the symbols with unit-circle and complex-Gaussian
/// scrambling values respectively, so only the activation pattern carries
/// information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Gpsm,
    Cas,
    Gas,
}

/// The selected receive-antenna activation patterns.
///
/// Holds the lexicographically first `2^k_ant` of all `C(n_rx, n_active)`
/// sorted index tuples, where `k_ant = floor(log2(C(n_rx, n_active)))` is
/// the number of bits per spatial symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    patterns: Vec<Vec<usize>>,
    n_rx: usize,
    n_active: usize,
    k_ant: u32,
}

impl PatternSet {
    /// Enumerate all combinations of `n_active` out of `n_rx` antennas in
    /// lexicographic order and keep the first power-of-two block.
    pub fn build(n_rx: usize, n_active: usize) -> Result<Self> {
        if n_active == 0 || n_active >= n_rx {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= n_active < n_rx, got n_active = {n_active}, n_rx = {n_rx}"
            )));
        }
        let all: Vec<Vec<usize>> = (0..n_rx).combinations(n_active).collect();
        let k_ant = (all.len() as f64).log2().floor() as u32;
        let keep = 1usize << k_ant;
        Ok(Self {
            patterns: all.into_iter().take(keep).collect(),
            n_rx,
            n_active,
            k_ant,
        })
    }

    /// Build from an explicit pattern list (power-of-two count of distinct
    /// sorted tuples). Mostly useful for constructing degenerate sets in
    /// tests.
    pub fn from_patterns(n_rx: usize, patterns: Vec<Vec<usize>>) -> Result<Self> {
        if patterns.is_empty() || !patterns.len().is_power_of_two() {
            return Err(Error::InvalidArgument(
                "pattern count must be a nonzero power of two".into(),
            ));
        }
        let n_active = patterns[0].len();
        for p in &patterns {
            if p.len() != n_active
                || p.windows(2).any(|w| w[0] >= w[1])
                || p.iter().any(|&i| i >= n_rx)
            {
                return Err(Error::InvalidArgument(format!(
                    "invalid pattern {p:?} for n_rx = {n_rx}"
                )));
            }
        }
        if patterns.iter().duplicates().next().is_some() {
            return Err(Error::InvalidArgument("duplicate patterns".into()));
        }
        let k_ant = patterns.len().trailing_zeros();
        Ok(Self {
            patterns,
            n_rx,
            n_active,
            k_ant,
        })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn k_ant(&self) -> u32 {
        self.k_ant
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_active(&self) -> usize {
        self.n_active
    }

    pub fn pattern(&self, k: usize) -> &[usize] {
        &self.patterns[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.patterns.iter().map(|p| p.as_slice())
    }
}

/// Payload values for one super-symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Payload {
    pub mode: Mode,
    pub values: Vec<C64>,
}

/// Channel-inversion precoder `P = Hᴴ(HHᴴ)⁻¹` with its power normalization
/// factor `beta = n_rx / Tr[(HHᴴ)⁻¹]`.
#[derive(Debug, Clone)]
pub struct Precoder {
    pub p: CMatrix,
    pub beta: f64,
}

/// A super-symbol: activation pattern index, the payload mapped onto it, and
/// the resulting sparse `n_rx` vector.
#[derive(Debug, Clone)]
pub struct SuperSymbol {
    pub pattern_index: usize,
    pub payload: Payload,
    pub s: CVector,
}

/// Bits carried per super-symbol: `k_ant + n_active log2(M)` for the
/// modulated scheme, `k_ant` alone under scrambling (the scrambled symbols
/// carry no information).
pub fn k_eff(patterns: &PatternSet, mode: Mode, m_ary: usize) -> u32 {
    match mode {
        Mode::Gpsm => {
            debug_assert!(m_ary.is_power_of_two());
            patterns.k_ant() + (patterns.n_active() as u32) * m_ary.trailing_zeros()
        }
        Mode::Cas | Mode::Gas => patterns.k_ant(),
    }
}

/// Channel-inversion precoder from the transmitter's channel view.
///
/// Computed through the SVD (`P = V Σ⁻¹ Uᴴ`, `Tr[(HHᴴ)⁻¹] = Σ σᵢ⁻²`) so that
/// `(HHᴴ)⁻¹` is never formed explicitly.
pub fn ci_precoder(h: &CMatrix) -> Result<Precoder> {
    let (n_rx, n_tx) = h.shape();
    if n_tx < n_rx {
        return Err(Error::InvalidArgument(format!(
            "channel inversion needs n_tx >= n_rx, got {n_rx}x{n_tx}"
        )));
    }
    let svd = h.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || smin / smax < 1e-10 {
        return Err(Error::IllConditioned(
            "channel matrix is rank deficient".into(),
        ));
    }
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    let mut uh = u.adjoint();
    for (i, mut row) in uh.row_iter_mut().enumerate() {
        row *= C64::new(1.0 / sv[i], 0.0);
    }
    let p = v_t.adjoint() * uh;
    let trace_inv: f64 = sv.iter().map(|s| 1.0 / (s * s)).sum();
    Ok(Precoder {
        p,
        beta: n_rx as f64 / trace_inv,
    })
}

/// Gray-labelled unit-energy M-PSK constellation; entry `m` is the point
/// whose Gray label is `m`. Points sit at angles `(2p + 1)π/M`, so QPSK
/// label 0 maps to `(1 + j)/√2`.
pub fn psk_constellation(m_ary: usize) -> Result<Vec<C64>> {
    if m_ary < 2 || !m_ary.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "constellation order must be a power of two >= 2, got {m_ary}"
        )));
    }
    let mut points = vec![C64::new(0.0, 0.0); m_ary];
    for position in 0..m_ary {
        let label = position ^ (position >> 1);
        let angle = (2 * position + 1) as f64 * PI / m_ary as f64;
        points[label] = C64::new(angle.cos(), angle.sin());
    }
    Ok(points)
}

/// Build the payload for one super-symbol.
///
/// `symbol_indices` selects the modulated symbols (Gray labels) and is only
/// meaningful in `Gpsm` mode; scrambling modes draw fresh values from `rng`.
pub fn make_payload<R: Rng>(
    rng: &mut R,
    mode: Mode,
    n_active: usize,
    m_ary: usize,
    symbol_indices: Option<&[usize]>,
) -> Result<Payload> {
    let values = match mode {
        Mode::Gpsm => {
            let indices = symbol_indices.ok_or_else(|| {
                Error::InvalidArgument("modulated payload needs symbol indices".into())
            })?;
            if indices.len() != n_active {
                return Err(Error::InvalidArgument(format!(
                    "need {n_active} symbol indices, got {}",
                    indices.len()
                )));
            }
            let constellation = psk_constellation(m_ary)?;
            indices
                .iter()
                .map(|&m| {
                    constellation.get(m).copied().ok_or_else(|| {
                        Error::InvalidArgument(format!("symbol index {m} out of range"))
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        Mode::Cas => sample_unit_circle(rng, n_active),
        Mode::Gas => sample_complex_gaussian(rng, n_active, 1.0)?,
    };
    Ok(Payload { mode, values })
}

/// Scatter the payload into an `n_rx` vector at the pattern's indices.
pub fn super_symbol(
    patterns: &PatternSet,
    pattern_index: usize,
    payload: Payload,
) -> Result<SuperSymbol> {
    if pattern_index >= patterns.len() {
        return Err(Error::InvalidArgument(format!(
            "pattern index {pattern_index} out of range (|C| = {})",
            patterns.len()
        )));
    }
    if payload.values.len() != patterns.n_active() {
        return Err(Error::InvalidArgument(format!(
            "payload length {} does not match n_active = {}",
            payload.values.len(),
            patterns.n_active()
        )));
    }
    let mut s = CVector::zeros(patterns.n_rx());
    for (value, &antenna) in payload.values.iter().zip(patterns.pattern(pattern_index)) {
        s[antenna] = *value;
    }
    Ok(SuperSymbol {
        pattern_index,
        payload,
        s,
    })
}

/// Transmit signal `x = sqrt(beta / n_active) P s`.
pub fn transmit(precoder: &Precoder, s: &CVector, n_active: usize) -> CVector {
    let scale = (precoder.beta / n_active as f64).sqrt();
    (&precoder.p * s) * C64::new(scale, 0.0)
}

/// Equivalent channel `G = sqrt(beta / n_active) H P` seen through the
/// precoder. This is the single place the power scaling is applied.
pub fn equivalent_channel(h_rx: &CMatrix, precoder: &Precoder, n_active: usize) -> CMatrix {
    let scale = (precoder.beta / n_active as f64).sqrt();
    (h_rx * &precoder.p) * C64::new(scale, 0.0)
}

/// Joint maximum-likelihood detection over the full super-alphabet
/// `C x A^{n_active}`: minimizes `||y - G s||²` with `g` the already-scaled
/// equivalent channel. Ties break toward the lexicographically smallest
/// `(pattern_index, symbol_indices)`.
pub fn ml_detect(
    y: &CVector,
    g: &CMatrix,
    patterns: &PatternSet,
    m_ary: usize,
) -> Result<(usize, Vec<usize>)> {
    let constellation = psk_constellation(m_ary)?;
    let n_active = patterns.n_active();
    let mut best = (0usize, vec![0usize; n_active]);
    let mut best_dist = f64::INFINITY;
    let mut indices = vec![0usize; n_active];
    for k in 0..patterns.len() {
        let pattern = patterns.pattern(k);
        indices.iter_mut().for_each(|m| *m = 0);
        loop {
            // Candidate received mean: sum over active antennas of
            // constellation value times the matching column of g.
            let mut dist = 0.0;
            for row in 0..y.len() {
                let mut mean = C64::new(0.0, 0.0);
                for (v, &antenna) in indices.iter().zip(pattern) {
                    mean += g[(row, antenna)] * constellation[*v];
                }
                dist += (y[row] - mean).norm_sqr();
            }
            if dist < best_dist {
                best_dist = dist;
                best = (k, indices.clone());
            }
            // Advance the symbol-index odometer in lexicographic order.
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
    Ok(best)
}

/// Reduced-complexity decoupled detection: the pattern is chosen by maximum
/// received energy over its antennas, then each activated antenna's symbol
/// is detected independently against the diagonal of the equivalent channel.
/// Ties break toward the lowest index.
pub fn decoupled_detect(
    y: &CVector,
    g: &CMatrix,
    patterns: &PatternSet,
    m_ary: usize,
) -> Result<(usize, Vec<usize>)> {
    let constellation = psk_constellation(m_ary)?;
    let mut best_k = 0usize;
    let mut best_energy = f64::NEG_INFINITY;
    for k in 0..patterns.len() {
        let energy: f64 = patterns.pattern(k).iter().map(|&i| y[i].norm_sqr()).sum();
        if energy > best_energy {
            best_energy = energy;
            best_k = k;
        }
    }
    let symbols = patterns
        .pattern(best_k)
        .iter()
        .map(|&antenna| {
            let mut best_m = 0usize;
            let mut best_dist = f64::INFINITY;
            for (m, point) in constellation.iter().enumerate() {
                let dist = (y[antenna] - g[(antenna, antenna)] * point).norm_sqr();
                if dist < best_dist {
                    best_dist = dist;
                    best_m = m;
                }
            }
            best_m
        })
        .collect();
    Ok((best_k, symbols))
}
