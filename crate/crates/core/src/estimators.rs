//! Sample persistence statistics: the Pearson sample ACF, the
//! segment-mean (Lee–Ko) variant, the semi-parametric sample IRF, and the
//! semi-parametric local Whittle (SPLW) estimator of the memory parameter.

use crate::arfit::{self, ArModel, FitMethod};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Which statistic a request targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatKind {
    Acf,
    Irf,
}

impl StatKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StatKind::Acf => "acf",
            StatKind::Irf => "irf",
        }
    }
}

/// How the autoregressive order for IRF estimation (and the sieve) is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderRule {
    /// AIC selection over `0..=floor((ln T)^2)`.
    Aic,
    /// The fixed order `floor((ln T)^2)`.
    FixedLogSq,
}

impl OrderRule {
    pub fn as_str(self) -> &'static str {
        match self {
            OrderRule::Aic => "aic",
            OrderRule::FixedLogSq => "logsq",
        }
    }

    /// Resolves the order on a data set.
    pub fn order_for(self, y: &[f64], method: FitMethod) -> Result<usize> {
        let cap = arfit::max_order(y.len()).min(y.len().saturating_sub(1));
        match self {
            OrderRule::Aic => arfit::select_order_aic(y, cap, method),
            OrderRule::FixedLogSq => Ok(cap),
        }
    }
}

/// A bundle of lags for one statistic under one order rule.
#[derive(Debug, Clone)]
pub struct StatRequest {
    pub kind: StatKind,
    pub lags: Vec<usize>,
    pub order_rule: OrderRule,
}

impl StatRequest {
    pub fn validate(&self, t: usize) -> Result<()> {
        if self.lags.is_empty() {
            return Err(Error::InvalidParameter("lag list must be nonempty".into()));
        }
        for &k in &self.lags {
            if k == 0 || k > t - 1 {
                return Err(Error::InvalidParameter(format!(
                    "lag {k} outside 1..={}",
                    t - 1
                )));
            }
        }
        Ok(())
    }
}

/// Local Whittle estimate of the memory parameter.
#[derive(Debug, Clone, Copy)]
pub struct SplwEstimate {
    /// Constrained minimizer in [-0.499, 0.499].
    pub d_hat: f64,
    pub bandwidth: usize,
    pub objective_value: f64,
}

/// The stationary-region box the SPLW minimizer is constrained to.
pub const SPLW_RANGE: (f64, f64) = (-0.499, 0.499);

fn mean_and_deviations(y: &[f64]) -> Result<(f64, Vec<f64>)> {
    if y.is_empty() {
        return Err(Error::Degenerate("empty series".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let dev: Vec<f64> = y.iter().map(|v| v - mean).collect();
    if dev.iter().all(|v| *v == 0.0) {
        return Err(Error::Degenerate("constant series has zero variance".into()));
    }
    Ok((mean, dev))
}

/// Pearson sample autocorrelations at the requested lags:
/// `rho_hat(k) = sum_{t=1}^{T-k} (y_t - ybar)(y_{t+k} - ybar)
///              / sum_{t=1}^{T} (y_t - ybar)^2`
/// with the full-sample mean in both factors.
pub fn sample_acf(y: &[f64], lags: &[usize]) -> Result<Vec<f64>> {
    let (_, dev) = mean_and_deviations(y)?;
    let denom: f64 = dev.iter().map(|v| v * v).sum();
    lags.iter()
        .map(|&k| {
            if k > y.len() - 1 {
                return Err(Error::InvalidParameter(format!(
                    "lag {k} exceeds T-1 = {}",
                    y.len() - 1
                )));
            }
            let mut num = 0.0;
            for t in 0..y.len() - k {
                num += dev[t] * dev[t + k];
            }
            Ok(num / denom)
        })
        .collect()
}

/// Segment-mean sample autocorrelations `r(k) = C(k)/C(0)` with
/// `C(k) = (T-k)^{-1} sum (y_t - ybar_{[1:T-k]})(y_{t+k} - ybar_{[k+1:T]})`
/// and `C(0)` the biased sample variance.
pub fn sample_acf_lk(y: &[f64], lags: &[usize]) -> Result<Vec<f64>> {
    let (_, dev) = mean_and_deviations(y)?;
    let t_len = y.len();
    let c0: f64 = dev.iter().map(|v| v * v).sum::<f64>() / t_len as f64;
    lags.iter()
        .map(|&k| {
            if k == 0 || k > t_len - 1 {
                return Err(Error::InvalidParameter(format!(
                    "lag {k} outside 1..={}",
                    t_len - 1
                )));
            }
            let n = t_len - k;
            let head_mean = y[..n].iter().sum::<f64>() / n as f64;
            let tail_mean = y[k..].iter().sum::<f64>() / n as f64;
            let mut acc = 0.0;
            for t in 0..n {
                acc += (y[t] - head_mean) * (y[t + k] - tail_mean);
            }
            Ok(acc / n as f64 / c0)
        })
        .collect()
}

/// Semi-parametric sample impulse responses: fit an AR(h) with `h` chosen by
/// the order rule (Burg), then invert the fitted polynomial.
pub fn sample_irf(y: &[f64], order_rule: OrderRule, lags: &[usize]) -> Result<Vec<f64>> {
    sample_irf_with(y, order_rule, lags, FitMethod::Burg)
}

/// [`sample_irf`] with an explicit fitting method.
pub fn sample_irf_with(
    y: &[f64],
    order_rule: OrderRule,
    lags: &[usize],
    method: FitMethod,
) -> Result<Vec<f64>> {
    let model = fit_for_irf(y, order_rule, method)?;
    Ok(irf_at_lags(&model, lags))
}

/// The autoregression behind [`sample_irf`], exposed because the sieve needs
/// the same fit.
pub fn fit_for_irf(y: &[f64], order_rule: OrderRule, method: FitMethod) -> Result<ArModel> {
    let h = order_rule.order_for(y, method)?;
    arfit::fit_ar(y, h, method)
}

pub fn irf_at_lags(model: &ArModel, lags: &[usize]) -> Vec<f64> {
    let max = lags.iter().copied().max().unwrap_or(0);
    let psi = arfit::ar_to_irf(model, max);
    lags.iter().map(|&k| psi[k]).collect()
}

/// Default SPLW bandwidth `floor(T^0.65)`, inside the admissible window
/// `T^eps < N < T^{1-eps}`.
pub fn default_splw_bandwidth(t: usize) -> usize {
    (t as f64).powf(0.65).floor() as usize
}

/// Mean-corrected periodogram ordinates `I(lambda_j)`, `j = 1..=n`, at the
/// Fourier frequencies `lambda_j = 2 pi j / T`. No taper.
pub fn periodogram_ordinates(y: &[f64], n: usize) -> Result<Vec<f64>> {
    let (_, dev) = mean_and_deviations(y)?;
    let t_len = y.len();
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        let lambda = 2.0 * PI * j as f64 / t_len as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, v) in dev.iter().enumerate() {
            let arg = lambda * (t + 1) as f64;
            re += v * arg.cos();
            im += v * arg.sin();
        }
        out.push((re * re + im * im) / (2.0 * PI * t_len as f64));
    }
    Ok(out)
}

/// Semi-parametric local Whittle estimator of `d`, minimizing
/// `R(d) = ln( (1/N) sum_j lambda_j^{2d} I(lambda_j) )
///         - (2d/N) sum_j ln lambda_j`
/// over the stationary region, by golden-section refinement of a 201-point
/// grid scan.
pub fn splw(y: &[f64], bandwidth: usize) -> Result<SplwEstimate> {
    let t_len = y.len();
    if bandwidth == 0 || 2 * bandwidth >= t_len {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must satisfy 1 <= N < T/2, got N={bandwidth}, T={t_len}"
        )));
    }
    let periodogram = periodogram_ordinates(y, bandwidth)?;
    if periodogram.iter().any(|&p| p <= f64::MIN_POSITIVE) {
        return Err(Error::Degenerate(
            "periodogram ordinate vanished to machine precision".into(),
        ));
    }
    let log_lambda: Vec<f64> = (1..=bandwidth)
        .map(|j| (2.0 * PI * j as f64 / t_len as f64).ln())
        .collect();
    let log_i: Vec<f64> = periodogram.iter().map(|p| p.ln()).collect();
    let mean_log_lambda = log_lambda.iter().sum::<f64>() / bandwidth as f64;

    let objective = |d: f64| -> f64 {
        // log-sum-exp of 2d ln(lambda_j) + ln I_j keeps the average stable.
        let mut max_term = f64::NEG_INFINITY;
        for j in 0..bandwidth {
            max_term = max_term.max(2.0 * d * log_lambda[j] + log_i[j]);
        }
        let mut acc = 0.0;
        for j in 0..bandwidth {
            acc += (2.0 * d * log_lambda[j] + log_i[j] - max_term).exp();
        }
        max_term + (acc / bandwidth as f64).ln() - 2.0 * d * mean_log_lambda
    };

    let (lo, hi) = SPLW_RANGE;
    let grid_points = 201;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut best_idx = 0usize;
    let mut best_val = f64::INFINITY;
    for i in 0..grid_points {
        let v = objective(lo + step * i as f64);
        if v < best_val {
            best_val = v;
            best_idx = i;
        }
    }
    // Golden-section refinement on the bracketing interval.
    let mut a = lo + step * best_idx.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_idx + 1) as f64).min(hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d_pt = a + INV_PHI * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d_pt);
    while b - a > 1e-10 {
        if fc < fd {
            b = d_pt;
            d_pt = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d_pt;
            fc = fd;
            d_pt = a + INV_PHI * (b - a);
            fd = objective(d_pt);
        }
    }
    let d_hat = 0.5 * (a + b);
    Ok(SplwEstimate {
        d_hat,
        bandwidth,
        objective_value: objective(d_hat),
    })
}
