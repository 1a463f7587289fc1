//! Analytic bias comparators for the sample autocorrelation function.
//!
//! Two classical results are implemented exactly:
//!
//! * Hosking's asymptotic bias of the Pearson sample autocorrelation under
//!   long memory, `Bias[rho_hat(k)] ~ -lambda/(d(1+2d)) *
//!   (1-rho(k))/gamma(0) * T^{2d-1}` with
//!   `lambda = (sigma kappa(1))^2 Gamma(1-2d) / (Gamma(d) Gamma(1-d))`;
//! * the Marriott–Pope O(1/T) expectation of the segment-mean sample
//!   autocorrelation `r(k) = C(k)/C(0)`,
//!   `E(r(k)) = E[C(k)]/E[C(0)] * [1 - cov(C(k),C(0))/(E[C(k)]E[C(0)])
//!   + var(C(0))/E[C(0)]^2]`,
//!   evaluated through exact Gaussian quadratic-form moments
//!   `E[y'Ay] = tr(A G)` and `cov(y'Ay, y'By) = 2 tr(A G B G)`.
//!
//! All products needed for the traces are O(T^2): the demeaning/selection
//! structure of the forms is applied to the Toeplitz matrix directly instead
//! of materializing dense matrix products.

use crate::arfit::{self, FitMethod};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Inputs of the Hosking bias expression. All quantities refer to the true
/// data-generating process.
#[derive(Debug, Clone, Copy)]
pub struct HoskingBiasInputs {
    /// Fractional index with `0 < |d| < 0.5` (singular at d = 0).
    pub d: f64,
    /// `kappa(1) = Phi(1)^{-1}`, the long-run AR gain.
    pub kappa_at_1: f64,
    /// Innovation variance.
    pub sigma2: f64,
    /// True autocorrelation at the lag of interest.
    pub rho_k: f64,
    /// True process variance `gamma(0)`.
    pub gamma0: f64,
    /// Sample size.
    pub t: usize,
}

/// Evaluates the large-sample bias of `rho_hat(k)`. Strictly negative for
/// `0 < d < 0.5` whenever `rho(k) < 1`.
pub fn hosking_bias(inputs: &HoskingBiasInputs) -> Result<f64> {
    let d = inputs.d;
    if d == 0.0 || d.abs() >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "hosking_bias requires 0 < |d| < 0.5, got {d}"
        )));
    }
    if inputs.gamma0 <= 0.0 {
        return Err(Error::InvalidParameter("gamma0 must be positive".into()));
    }
    // lambda via log-gamma with sign tracking: Gamma(d) < 0 for d < 0.
    let (lg_num, s_num) = libm::lgamma_r(1.0 - 2.0 * d);
    let (lg_d, s_d) = libm::lgamma_r(d);
    let (lg_1md, s_1md) = libm::lgamma_r(1.0 - d);
    let sign = (s_num * s_d * s_1md) as f64;
    let lambda = (inputs.sigma2.sqrt() * inputs.kappa_at_1).powi(2)
        * sign
        * (lg_num - lg_d - lg_1md).exp();
    Ok(-lambda / (d * (1.0 + 2.0 * d))
        * ((1.0 - inputs.rho_k) / inputs.gamma0)
        * (inputs.t as f64).powf(2.0 * d - 1.0))
}

/// Exact Gaussian moments of the pair `(C(k), C(0))` under the zero-mean
/// process with autocovariances `gamma`.
struct QuadFormMoments {
    e_ck: f64,
    e_c0: f64,
    cov: f64,
    var_c0: f64,
}

fn toeplitz(gamma: &[f64], t: usize) -> DMatrix<f64> {
    DMatrix::from_fn(t, t, |i, j| gamma[i.abs_diff(j)])
}

/// Subtracts from every entry the mean of its column over rows `rows`
/// (the action of the demeaning projector on that block), in place.
fn demean_rows(x: &mut DMatrix<f64>, rows: std::ops::Range<usize>) {
    let n = rows.len() as f64;
    for j in 0..x.ncols() {
        let mut s = 0.0;
        for i in rows.clone() {
            s += x[(i, j)];
        }
        let m = s / n;
        for i in rows.clone() {
            x[(i, j)] -= m;
        }
    }
}

/// `A_k G` where `C(k) = y' A_k y` is the symmetrized segment-demeaned
/// cross-product form of the lag-k numerator, and `G` is Toeplitz.
fn ak_times_gamma(g: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let t = g.nrows();
    let n = t - k;
    // E_k = S1' M S2 with S1 selecting rows 1..T-k, S2 rows k+1..T and M the
    // demeaning projector of size n. Compute E_k G and E_k' G by composing
    // the selector shifts and demeaning against G.
    let mut out = DMatrix::zeros(t, t);

    // E_k G: take rows k..T of G, demean, place at rows 0..n.
    let mut block = DMatrix::zeros(n, t);
    for i in 0..n {
        for j in 0..t {
            block[(i, j)] = g[(i + k, j)];
        }
    }
    demean_rows(&mut block, 0..n);
    for i in 0..n {
        for j in 0..t {
            out[(i, j)] += block[(i, j)];
        }
    }

    // E_k' G: take rows 0..n of G, demean, place at rows k..T.
    let mut block = DMatrix::zeros(n, t);
    for i in 0..n {
        for j in 0..t {
            block[(i, j)] = g[(i, j)];
        }
    }
    demean_rows(&mut block, 0..n);
    for i in 0..n {
        for j in 0..t {
            out[(i + k, j)] += block[(i, j)];
        }
    }

    out / (2.0 * n as f64)
}

/// `A_0 G` with `C(0) = y' A_0 y` the biased-variance form `M_T / T`.
fn a0_times_gamma(g: &DMatrix<f64>) -> DMatrix<f64> {
    let t = g.nrows();
    let mut out = g.clone();
    demean_rows(&mut out, 0..t);
    out / t as f64
}

/// `tr(X Y)` for square matrices.
fn trace_product(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let t = x.nrows();
    let mut acc = 0.0;
    for i in 0..t {
        for j in 0..t {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

fn quadform_moments(gamma: &[f64], t: usize, k: usize) -> Result<QuadFormMoments> {
    if k == 0 || k > t - 1 {
        return Err(Error::InvalidParameter(format!(
            "lag {k} outside 1..={}",
            t - 1
        )));
    }
    if gamma.len() < t {
        return Err(Error::InvalidParameter(
            "need autocovariances up to lag T-1".into(),
        ));
    }
    let g = toeplitz(gamma, t);
    let akg = ak_times_gamma(&g, k);
    let a0g = a0_times_gamma(&g);
    Ok(QuadFormMoments {
        e_ck: akg.trace(),
        e_c0: a0g.trace(),
        cov: 2.0 * trace_product(&akg, &a0g),
        var_c0: 2.0 * trace_product(&a0g, &a0g),
    })
}

/// The Marriott–Pope O(1/T) expectation of `r(k)` under the zero-mean
/// Gaussian process with autocovariance sequence `gamma(0..T-1)`.
pub fn marriott_pope_expectation(gamma: &[f64], t: usize, k: usize) -> Result<f64> {
    let m = quadform_moments(gamma, t, k)?;
    if m.e_c0 <= 0.0 {
        return Err(Error::Degenerate("E[C(0)] must be positive".into()));
    }
    if m.e_ck.abs() <= 1e-14 * m.e_c0 {
        return Err(Error::Degenerate(
            "E[C(k)] vanishes; the expansion divides by it".into(),
        ));
    }
    Ok(m.e_ck / m.e_c0 * (1.0 - m.cov / (m.e_ck * m.e_c0) + m.var_c0 / (m.e_c0 * m.e_c0)))
}

/// Plug-in estimate of the Lee–Ko O(1/T) bias of `rho_hat(k)`: the unknown
/// population autocorrelations are replaced by those implied by an
/// AR(floor((ln T)^2)) fitted to the raw data, and the expectation is
/// evaluated through [`marriott_pope_expectation`]. Returns
/// `E(r(k)) - rho_ref(k)` under the reference model.
pub fn lee_ko_bias_plugin(y: &[f64], k: usize) -> Result<f64> {
    let t = y.len();
    let h = arfit::max_order(t).min(t.saturating_sub(1));
    let model = arfit::fit_ar(y, h, FitMethod::Burg)?;
    let gamma_ref = arfit::ar_to_acvf(&model.phi, model.sigma2, t - 1)?;
    let expect = marriott_pope_expectation(&gamma_ref, t, k)?;
    Ok(expect - gamma_ref[k] / gamma_ref[0])
}
