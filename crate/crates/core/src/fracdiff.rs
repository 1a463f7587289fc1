//! Fractional difference filters and the Fisher-z transform pair.
//!
//! The operator `(1-z)^d` has the binomial expansion with coefficients
//! `alpha_0 = 1`, `alpha_j = alpha_{j-1} * (j-1-d) / j`. The multiplicative
//! recursion is used throughout instead of gamma-function ratios, which
//! overflow near `j ~ 170`.

use crate::error::{Error, Result};

/// Coefficients of the binomial expansion of `(1-z)^d`.
#[derive(Debug, Clone)]
pub struct FracCoeffs {
    pub d: f64,
    pub coeffs: Vec<f64>,
}

fn check_d(d: f64) -> Result<()> {
    if !d.is_finite() || d <= -1.0 {
        return Err(Error::InvalidParameter(format!(
            "fractional index d must be a finite number > -1, got {d}"
        )));
    }
    Ok(())
}

/// First `n` coefficients of `(1-z)^d`.
pub fn frac_coeffs(d: f64, n: usize) -> Result<FracCoeffs> {
    check_d(d)?;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "frac_coeffs requires n >= 1".into(),
        ));
    }
    Ok(FracCoeffs {
        d,
        coeffs: binomial_coeffs(d, n),
    })
}

// The multiplicative recursion is total in d; the public domain gate
// d > -1 sits on the operations, so the inverse filter can still reach
// exponent -d down to -1 (e.g. undoing a first difference).
fn binomial_coeffs(d: f64, n: usize) -> Vec<f64> {
    let mut coeffs = Vec::with_capacity(n);
    coeffs.push(1.0);
    for j in 1..n {
        let prev = coeffs[j - 1];
        coeffs.push(prev * ((j as f64 - 1.0 - d) / j as f64));
    }
    coeffs
}

/// Applies the truncated filter `(1-z)^d` to `y`:
/// `w(t) = sum_{j=0}^{t-1} alpha_j^{(d)} y(t-j)`.
///
/// Only in-sample values enter each output element; there is no presample
/// padding beyond the natural truncation at `j = t-1`.
pub fn frac_filter(y: &[f64], d: f64) -> Result<Vec<f64>> {
    check_d(d)?;
    if y.is_empty() {
        return Err(Error::Degenerate("frac_filter requires T >= 1".into()));
    }
    Ok(truncated_convolution(&binomial_coeffs(d, y.len()), y))
}

/// `frac_filter` applied to deviations from the sample mean. Intended for
/// observed data that are not known to be mean zero.
pub fn frac_filter_demeaned(y: &[f64], d: f64) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::Degenerate("frac_filter requires T >= 1".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let centered: Vec<f64> = y.iter().map(|v| v - mean).collect();
    frac_filter(&centered, d)
}

/// Applies the truncated inverse filter `(1-z)^{-d}`, reconstructing `y`
/// from `w = frac_filter(y, d)` exactly (up to rounding).
pub fn frac_unfilter(w: &[f64], d: f64) -> Result<Vec<f64>> {
    check_d(d)?;
    if w.is_empty() {
        return Err(Error::Degenerate("frac_unfilter requires T >= 1".into()));
    }
    Ok(truncated_convolution(&binomial_coeffs(-d, w.len()), w))
}

fn truncated_convolution(alpha: &[f64], y: &[f64]) -> Vec<f64> {
    let t_len = y.len();
    let mut out = vec![0.0; t_len];
    for (t, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..=t {
            acc += alpha[j] * y[t - j];
        }
        *slot = acc;
    }
    out
}

/// Fisher-z transform `zeta = artanh(r)` for `|r| < 1`.
pub fn fisher_z(r: f64) -> Result<f64> {
    if !(r.is_finite() && r.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fisher_z requires |r| < 1, got {r}"
        )));
    }
    Ok(r.atanh())
}

/// Inverse Fisher-z transform `r = tanh(zeta)`.
///
/// The result is strictly inside (-1, 1) for every finite input: `tanh`
/// rounds to exactly +-1.0 for |zeta| > ~19, so the output saturates at the
/// nearest representable value inside the interval instead.
pub fn fisher_z_inv(zeta: f64) -> f64 {
    let r = zeta.tanh();
    if r >= 1.0 {
        1.0_f64.next_down()
    } else if r <= -1.0 {
        (-1.0_f64).next_up()
    } else {
        r
    }
}
