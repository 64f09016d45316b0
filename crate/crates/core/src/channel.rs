//! MIMOME channel generation and the matrix kernels the estimators need.
//!
//! Channels are frequency-flat Rayleigh fading with iid unit-variance
//! entries, optionally shaped by exponential Kronecker antenna correlation
//! and split into an average part (the transmitter's view) plus an
//! instantaneous error part to model imperfect transmitter-side CSI.

use crate::numerics::sample_complex_gaussian;
use crate::{C64, CMatrix, Error, RMatrix, Result};
use rand::Rng;

/// Condition-number limit for the left pseudo-inverse, measured on `hᴴh`.
const PINV_MAX_CONDITION: f64 = 1e12;

/// Antenna counts defining the MIMOME geometry.
///
/// `n_tx` transmit antennas at the sender, `n_rx` receive antennas at the
/// legitimate receiver of which `n_active` are activated per symbol, and
/// `n_eve` receive antennas at the eavesdropper (unconstrained relative to
/// `n_tx`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    pub n_tx: usize,
    pub n_rx: usize,
    pub n_active: usize,
    pub n_eve: usize,
}

impl SystemDims {
    pub fn new(n_tx: usize, n_rx: usize, n_active: usize, n_eve: usize) -> Result<Self> {
        if n_tx < n_rx {
            return Err(Error::InvalidArgument(format!(
                "need n_tx >= n_rx, got n_tx = {n_tx}, n_rx = {n_rx}"
            )));
        }
        if n_active == 0 || n_active >= n_rx {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= n_active < n_rx, got n_active = {n_active}, n_rx = {n_rx}"
            )));
        }
        if n_eve == 0 {
            return Err(Error::InvalidArgument("need n_eve >= 1".into()));
        }
        Ok(Self {
            n_tx,
            n_rx,
            n_active,
            n_eve,
        })
    }

    /// Whether the eavesdropper has enough antennas to post-process the
    /// received signal into the legitimate receiver's equivalent channel.
    pub fn eve_can_postprocess(&self) -> bool {
        self.n_eve >= self.n_tx
    }
}

/// Exponential antenna correlation, applied identically at the transmitter
/// and at both receivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSpec {
    rho: f64,
}

impl CorrelationSpec {
    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidArgument(format!(
                "correlation must lie in [0, 1), got {rho}"
            )));
        }
        Ok(Self { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn is_identity(&self) -> bool {
        self.rho == 0.0
    }
}

/// Precomputed correlation square roots for one geometry.
#[derive(Debug, Clone)]
pub struct CorrSqrts {
    pub tx: RMatrix,
    pub rx_bob: RMatrix,
    pub rx_eve: RMatrix,
}

impl CorrSqrts {
    /// Returns `None` for zero correlation (the model is then a no-op).
    pub fn new(dims: &SystemDims, corr: CorrelationSpec) -> Result<Option<Self>> {
        if corr.is_identity() {
            return Ok(None);
        }
        let rho = corr.rho();
        Ok(Some(Self {
            tx: matrix_sqrt_psd(&exp_correlation(dims.n_tx, rho)?)?,
            rx_bob: matrix_sqrt_psd(&exp_correlation(dims.n_rx, rho)?)?,
            rx_eve: matrix_sqrt_psd(&exp_correlation(dims.n_eve, rho)?)?,
        }))
    }
}

/// One draw of the main and eavesdropper channels, plus the transmitter's
/// (possibly imperfect) view of the main channel.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// True main channel, `n_rx x n_tx`.
    pub h_bob: CMatrix,
    /// Eavesdropper channel, `n_eve x n_tx`.
    pub h_eve: CMatrix,
    /// The transmitter's view of `h_bob`; equals `h_bob` exactly when the
    /// CSI error is zero.
    pub h_bob_alice_view: CMatrix,
}

impl ChannelRealization {
    /// Draw one realization. `rng_bob` drives the main-channel draw
    /// (including its CSI split) and `rng_eve` the eavesdropper draw, so the
    /// two can come from independent substreams.
    pub fn draw<R: Rng>(
        dims: &SystemDims,
        csit_sigma_i: f64,
        corr: Option<&CorrSqrts>,
        rng_bob: &mut R,
        rng_eve: &mut R,
    ) -> Result<Self> {
        let (mut h_bob, mut h_view) = split_csit(rng_bob, dims.n_rx, dims.n_tx, csit_sigma_i)?;
        let mut h_eve = rayleigh(rng_eve, dims.n_eve, dims.n_tx);
        if let Some(c) = corr {
            h_bob = correlate(&h_bob, &c.rx_bob, &c.tx);
            h_view = correlate(&h_view, &c.rx_bob, &c.tx);
            h_eve = correlate(&h_eve, &c.rx_eve, &c.tx);
        }
        Ok(Self {
            h_bob,
            h_eve,
            h_bob_alice_view: h_view,
        })
    }
}

/// `rows x cols` matrix of iid circularly symmetric complex Gaussian entries
/// with unit variance, filled row-major.
pub fn rayleigh<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let entries = sample_complex_gaussian(rng, rows * cols, 1.0).expect("unit variance is valid");
    CMatrix::from_row_iterator(rows, cols, entries)
}

/// Exponential correlation matrix `R(i, j) = rho^|i-j|`.
pub fn exp_correlation(n: usize, rho: f64) -> Result<RMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!(
            "correlation must lie in [0, 1), got {rho}"
        )));
    }
    Ok(RMatrix::from_fn(n, n, |i, j| {
        rho.powi((i as i32 - j as i32).abs())
    }))
}

/// Symmetric square root of a real symmetric PSD matrix: returns `S` with
/// `S Sᵀ = R`.
///
/// Uses an eigendecomposition rather than Cholesky so that eigenvalues
/// numerically at zero are tolerated; eigenvalues below -1e-12 are rejected,
/// anything in `[-1e-12, 0)` is clamped to zero.
pub fn matrix_sqrt_psd(r: &RMatrix) -> Result<RMatrix> {
    if r.nrows() != r.ncols() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let scale = r.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
    for i in 0..r.nrows() {
        for j in (i + 1)..r.ncols() {
            if (r[(i, j)] - r[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::InvalidArgument("matrix must be symmetric".into()));
            }
        }
    }
    let eig = nalgebra::SymmetricEigen::new(r.clone());
    let mut sqrt_vals = eig.eigenvalues.clone();
    for v in sqrt_vals.iter_mut() {
        if *v < -1e-12 {
            return Err(Error::InvalidArgument(format!(
                "matrix is indefinite (eigenvalue {v})"
            )));
        }
        *v = v.max(0.0).sqrt();
    }
    let u = eig.eigenvectors;
    Ok(&u * RMatrix::from_diagonal(&sqrt_vals) * u.transpose())
}

/// Shape an uncorrelated draw with precomputed correlation square roots:
/// receive correlation multiplies from the left, transmit from the right.
pub fn correlate(h0: &CMatrix, rx_sqrt: &RMatrix, tx_sqrt: &RMatrix) -> CMatrix {
    let rx = rx_sqrt.map(|v| C64::new(v, 0.0));
    let tx = tx_sqrt.map(|v| C64::new(v, 0.0));
    rx * h0 * tx.transpose()
}

/// Kronecker correlation model: `R_rx^{1/2} · h0 · (R_tx^{1/2})ᵀ`.
/// With both correlation matrices identity this returns `h0` unchanged.
pub fn apply_kronecker(h0: &CMatrix, r_rx: &RMatrix, r_tx: &RMatrix) -> Result<CMatrix> {
    if r_rx.nrows() != h0.nrows() || r_tx.nrows() != h0.ncols() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: h0 is {}x{}, r_rx is {}x{}, r_tx is {}x{}",
            h0.nrows(),
            h0.ncols(),
            r_rx.nrows(),
            r_rx.ncols(),
            r_tx.nrows(),
            r_tx.ncols()
        )));
    }
    let rx_sqrt = matrix_sqrt_psd(r_rx)?;
    let tx_sqrt = matrix_sqrt_psd(r_tx)?;
    Ok(correlate(h0, &rx_sqrt, &tx_sqrt))
}

/// Split the main channel into an average part (the transmitter's view) and
/// an instantaneous error part: entries of the view have variance
/// `1 - sigma_i^2`, the error has variance `sigma_i^2`, and their sum is the
/// unit-variance true channel. Returns `(h_true, h_alice_view)`.
pub fn split_csit<R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    sigma_i: f64,
) -> Result<(CMatrix, CMatrix)> {
    if !(0.0..=1.0).contains(&sigma_i) {
        return Err(Error::InvalidArgument(format!(
            "CSI error sigma_i must lie in [0, 1], got {sigma_i}"
        )));
    }
    let n = rows * cols;
    let avg = sample_complex_gaussian(rng, n, 1.0 - sigma_i * sigma_i)?;
    let err = sample_complex_gaussian(rng, n, sigma_i * sigma_i)?;
    let h_view = CMatrix::from_row_iterator(rows, cols, avg);
    let h_err = CMatrix::from_row_iterator(rows, cols, err);
    let h_true = &h_view + h_err;
    Ok((h_true, h_view))
}

/// Left pseudo-inverse `(hᴴh)⁻¹ hᴴ` of a tall full-column-rank matrix,
/// computed through the SVD rather than by forming `(hᴴh)⁻¹` explicitly.
///
/// Fails with a rank-deficiency error when `h` has fewer rows than columns
/// (the inversion is then impossible) and with a condition error when the
/// condition number of `hᴴh` exceeds 1e12.
pub fn left_pseudo_inverse(h: &CMatrix) -> Result<CMatrix> {
    let (m, n) = h.shape();
    if m < n {
        return Err(Error::RankDeficient(format!(
            "left pseudo-inverse needs at least as many rows as columns, got {m}x{n}"
        )));
    }
    let svd = h.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smax == 0.0 || (smax / smin).powi(2) >= PINV_MAX_CONDITION {
        return Err(Error::IllConditioned(format!(
            "condition number of hᴴh is {:.3e}",
            (smax / smin).powi(2)
        )));
    }
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    // pinv = V Σ⁻¹ Uᴴ; scale the rows of Uᴴ by 1/σ.
    let mut uh = u.adjoint();
    for (i, mut row) in uh.row_iter_mut().enumerate() {
        row *= C64::new(1.0 / sv[i], 0.0);
    }
    Ok(v_t.adjoint() * uh)
}
