//! Raw and pre-filtered sieve bootstrap.
//!
//! The resampler follows the three-step scheme: (1) filter the data with
//! `(1-z)^{d_hat}`, (2) fit an AR(h) to the filtered series, resample its
//! standardized residuals and regenerate through the fitted recursion
//! (startup values taken from a uniformly drawn in-sample block), (3) pass
//! the regenerated series through the inverse filter `(1-z)^{-d_hat}`. The
//! raw bootstrap is the same algorithm with steps (1) and (3) skipped.
//!
//! Bias adjustment subtracts the bootstrap bias estimate
//! `mean(bootstrap draws) - s_ref` from the observed statistic, where the
//! reference value `s_ref` is the parameter implied by the bootstrap
//! data-generating mechanism itself.

use crate::arfima::ArfimaSpec;
use crate::arfit::{self, ArModel, FitMethod};
use crate::error::{Error, Result};
use crate::estimators::{self, OrderRule, StatKind, StatRequest};
use crate::fracdiff::{fisher_z, fisher_z_inv, frac_filter, frac_unfilter};
use crate::rng::{derive_seed, rng_from_seed, uniform_index};
use rand_chacha::ChaCha8Rng;

/// Resampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SieveMethod {
    /// Sieve applied to the raw data.
    Raw,
    /// Sieve applied to data pre-filtered by a local Whittle estimate of d.
    PrefilteredSplw,
    /// Proof-of-concept: pre-filtered with the true value of d.
    PrefilteredTrueD,
}

impl SieveMethod {
    pub fn is_prefiltered(self) -> bool {
        !matches!(self, SieveMethod::Raw)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SieveMethod::Raw => "raw",
            SieveMethod::PrefilteredSplw => "prefiltered_splw",
            SieveMethod::PrefilteredTrueD => "prefiltered_true_d",
        }
    }
}

/// Bootstrap configuration.
#[derive(Debug, Clone)]
pub struct SieveConfig {
    pub method: SieveMethod,
    /// Number of bootstrap resamples.
    pub b: usize,
    pub order_rule: OrderRule,
    pub fit_method: FitMethod,
    /// Required exactly when `method == PrefilteredTrueD`.
    pub true_d: Option<f64>,
    pub seed: u64,
}

impl SieveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b < 2 {
            return Err(Error::Config(format!(
                "bootstrap resample count B must be >= 2, got {}",
                self.b
            )));
        }
        match (self.method, self.true_d) {
            (SieveMethod::PrefilteredTrueD, None) => Err(Error::Config(
                "prefiltered_true_d requires true_d".into(),
            )),
            (SieveMethod::PrefilteredTrueD, Some(d)) if !(d.is_finite() && d.abs() < 0.5) => {
                Err(Error::Config(format!("true_d must satisfy |d| < 0.5, got {d}")))
            }
            (m, Some(_)) if m != SieveMethod::PrefilteredTrueD => Err(Error::Config(
                "true_d is only meaningful for prefiltered_true_d".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Bootstrap draws of one statistic at one lag, with the observed value and
/// the reference value implied by the bootstrap generator.
#[derive(Debug, Clone)]
pub struct BootstrapDistribution {
    pub kind: StatKind,
    pub lag: usize,
    /// B draws, sorted ascending.
    pub draws: Vec<f64>,
    pub s_ref: f64,
    pub s_obs: f64,
}

/// Transform under which the additive bias adjustment is performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    /// Adjust artanh-transformed values and map back with tanh, keeping the
    /// result strictly inside (-1, 1).
    FisherZ,
}

/// Everything the resampling loop needs, computed once from the data.
#[derive(Debug, Clone)]
pub struct SievePrep {
    pub method: SieveMethod,
    /// Pre-filter value actually used (None for the raw sieve).
    pub d_hat: Option<f64>,
    /// Centered series the sieve autoregression is fitted to.
    w: Vec<f64>,
    /// Fitted sieve autoregression.
    pub model: ArModel,
    /// Standardized residuals (probability mass 1/T each).
    resid_std: Vec<f64>,
}

/// Filters, fits, and standardizes residuals. `d_hat` must carry the SPLW
/// estimate when `method == PrefilteredSplw`; for `PrefilteredTrueD` the
/// value comes from the config.
pub fn prepare(y: &[f64], config: &SieveConfig, d_hat: Option<f64>) -> Result<SievePrep> {
    config.validate()?;
    let d_used = match config.method {
        SieveMethod::Raw => None,
        SieveMethod::PrefilteredSplw => Some(d_hat.ok_or_else(|| {
            Error::Config("prefiltered_splw requires the SPLW estimate as d_hat".into())
        })?),
        SieveMethod::PrefilteredTrueD => Some(config.true_d.expect("validated")),
    };
    let w_raw = match d_used {
        Some(d) => frac_filter(y, d)?,
        None => y.to_vec(),
    };
    let mean = w_raw.iter().sum::<f64>() / w_raw.len() as f64;
    let w: Vec<f64> = w_raw.into_iter().map(|v| v - mean).collect();

    let h = config.order_rule.order_for(&w, config.fit_method)?;
    let model = arfit::fit_ar(&w, h, config.fit_method)?;
    if config.fit_method == FitMethod::YuleWalker && !arfit::schur_cohn_stable(&model.phi) {
        return Err(Error::Unstable(
            "Yule-Walker sieve fit is not Schur-Cohn stable".into(),
        ));
    }

    // Residuals with circular initial values w(1-j) = w(T-j+1).
    let t_len = w.len();
    let mut resid = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut acc = w[t];
        for (j, phi_j) in model.phi.iter().enumerate() {
            let lag = j + 1;
            let idx = if t >= lag { t - lag } else { t_len + t - lag };
            acc += phi_j * w[idx];
        }
        resid.push(acc);
    }
    let rbar = resid.iter().sum::<f64>() / t_len as f64;
    let s2 = resid.iter().map(|e| (e - rbar) * (e - rbar)).sum::<f64>() / t_len as f64;
    if !(s2 > 0.0) {
        return Err(Error::Degenerate("residuals have zero variance".into()));
    }
    let s = s2.sqrt();
    let resid_std = resid.into_iter().map(|e| (e - rbar) / s).collect();

    Ok(SievePrep {
        method: config.method,
        d_hat: d_used,
        w,
        model,
        resid_std,
    })
}

impl SievePrep {
    /// Generates one bootstrap series from a dedicated RNG stream.
    ///
    /// Draw order is fixed: T residual indices, then the startup block
    /// index. Changing it would silently re-key every recorded experiment.
    pub fn resample_one(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let t_len = self.w.len();
        let h = self.model.h;
        let sd = self.model.sigma2.sqrt();
        let mut innov = Vec::with_capacity(t_len);
        for _ in 0..t_len {
            innov.push(sd * self.resid_std[uniform_index(rng, t_len)]);
        }
        // Startup: w*(1-j) = w(tau - j + 1), tau uniform on {h, ..., T}
        // (1-based); h = 0 needs no startup values.
        let mut prev = vec![0.0; h];
        if h > 0 {
            let tau = h + uniform_index(rng, t_len - h + 1); // 1-based
            for (j, slot) in prev.iter_mut().enumerate() {
                *slot = self.w[tau - (j + 1)];
            }
        }
        let mut w_star = Vec::with_capacity(t_len);
        for t in 0..t_len {
            let mut acc = innov[t];
            for (j, phi_j) in self.model.phi.iter().enumerate() {
                let lag = j + 1;
                let value = if t >= lag { w_star[t - lag] } else { prev[lag - t - 1] };
                acc -= phi_j * value;
            }
            w_star.push(acc);
        }
        match self.d_hat {
            Some(d) => frac_unfilter(&w_star, d),
            None => Ok(w_star),
        }
    }
}

/// Generates the full set of B bootstrap series. Deterministic given
/// `(y, config, d_hat)`; resample `b` uses the stream `derive_seed(seed, b)`
/// so subsets can be regenerated independently.
pub fn sieve_resample(
    y: &[f64],
    config: &SieveConfig,
    d_hat: Option<f64>,
) -> Result<Vec<Vec<f64>>> {
    let prep = prepare(y, config, d_hat)?;
    (0..config.b)
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(config.seed, b as u64));
            prep.resample_one(&mut rng)
        })
        .collect()
}

/// The reference value implied by the bootstrap generator: inversion /
/// Yule–Walker of the fitted AR for the raw sieve, and the implied
/// ARFIMA(h, d_hat, 0) closed forms for the pre-filtered sieve.
pub fn reference_value(
    kind: StatKind,
    lag: usize,
    method: SieveMethod,
    fitted: &ArModel,
    d_hat: Option<f64>,
) -> Result<f64> {
    Ok(reference_curve(kind, lag, method, fitted, d_hat)?[lag])
}

/// Reference values at all lags `0..=max_lag` (same dispatch as
/// [`reference_value`]).
pub fn reference_curve(
    kind: StatKind,
    max_lag: usize,
    method: SieveMethod,
    fitted: &ArModel,
    d_hat: Option<f64>,
) -> Result<Vec<f64>> {
    match method {
        SieveMethod::Raw => match kind {
            StatKind::Irf => Ok(arfit::ar_to_irf(fitted, max_lag)),
            StatKind::Acf => arfit::ar_to_acf(fitted, max_lag),
        },
        _ => {
            let d = d_hat.ok_or_else(|| {
                Error::Config("prefiltered reference requires d_hat".into())
            })?;
            let spec = ArfimaSpec::new(
                d,
                fitted.phi.iter().map(|p| -p).collect(),
                fitted.sigma2.max(f64::MIN_POSITIVE),
            )?;
            match kind {
                StatKind::Irf => crate::arfima::irf(&spec, max_lag),
                StatKind::Acf => crate::arfima::acf(&spec, max_lag),
            }
        }
    }
}

/// Bias-adjusted statistic `s_obs - (mean(draws) - s_ref)`, optionally on
/// the Fisher-z scale (used for autocorrelations so the result stays inside
/// (-1, 1)).
pub fn bias_adjust(dist: &BootstrapDistribution, transform: Transform) -> Result<f64> {
    match transform {
        Transform::Identity => {
            let mean = dist.draws.iter().sum::<f64>() / dist.draws.len() as f64;
            Ok(dist.s_obs - (mean - dist.s_ref))
        }
        Transform::FisherZ => {
            let z_obs = fisher_z(dist.s_obs)?;
            let z_ref = fisher_z(dist.s_ref)?;
            let mut acc = 0.0;
            for &v in &dist.draws {
                acc += fisher_z(v)?;
            }
            let z_mean = acc / dist.draws.len() as f64;
            Ok(fisher_z_inv(z_obs - (z_mean - z_ref)))
        }
    }
}

/// Coefficient-space bias correction `2*phi_fit - mean(phi_boot)`.
pub fn kilian_correct_coeffs(phi_fit: &[f64], phi_boot_mean: &[f64]) -> Vec<f64> {
    phi_fit
        .iter()
        .zip(phi_boot_mean)
        .map(|(f, b)| 2.0 * f - b)
        .collect()
}

/// Kilian-style bias-adjusted impulse responses: Burg-fit the
/// autoregression, bias correct its coefficient vector with raw-sieve
/// resamples (refitting at the same order), repair stationarity by root
/// reflection if needed, then invert.
pub fn kilian_adjust(y: &[f64], config: &SieveConfig, lags: &[usize]) -> Result<Vec<f64>> {
    if config.method != SieveMethod::Raw {
        return Err(Error::Config(
            "kilian_adjust bias-corrects via the raw sieve; config.method must be raw".into(),
        ));
    }
    let cfg = SieveConfig {
        fit_method: FitMethod::Burg,
        ..config.clone()
    };
    let prep = prepare(y, &cfg, None)?;
    let h = prep.model.h;
    let mut coeff_sum = vec![0.0; h];
    for b in 0..cfg.b {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, b as u64));
        let series = prep.resample_one(&mut rng)?;
        let refit = arfit::fit_ar(&series, h, FitMethod::Burg)?;
        for (acc, c) in coeff_sum.iter_mut().zip(&refit.phi) {
            *acc += c;
        }
    }
    let boot_mean: Vec<f64> = coeff_sum.iter().map(|s| s / cfg.b as f64).collect();
    let mut corrected = kilian_correct_coeffs(&prep.model.phi, &boot_mean);
    if !arfit::schur_cohn_stable(&corrected) {
        corrected = arfit::reflect_to_stationary(&corrected)?;
    }
    let max = lags.iter().copied().max().unwrap_or(0);
    let psi = arfit::invert_ar(&corrected, max);
    Ok(lags.iter().map(|&k| psi[k]).collect())
}

/// One full bootstrap pass: observed statistics, reference values, and the
/// per-lag bootstrap distributions for every requested statistic, all from a
/// single set of resamples.
#[derive(Debug, Clone)]
pub struct BootstrapRun {
    pub d_hat: Option<f64>,
    /// Order of the sieve autoregression.
    pub h: usize,
    pub distributions: Vec<BootstrapDistribution>,
}

/// Runs the sieve bootstrap and assembles [`BootstrapDistribution`]s for all
/// requests. For the IRF the statistic on each resample re-applies the order
/// rule (AIC re-selects per resample; the fixed rule keeps `floor((ln T)^2)`),
/// matching how the observed statistic is produced.
pub fn run_sieve_bootstrap(
    y: &[f64],
    config: &SieveConfig,
    requests: &[StatRequest],
    d_hat: Option<f64>,
) -> Result<BootstrapRun> {
    for req in requests {
        req.validate(y.len())?;
    }
    let prep = prepare(y, config, d_hat)?;

    // Observed statistics and reference curves per request.
    let mut obs: Vec<Vec<f64>> = Vec::with_capacity(requests.len());
    let mut refs: Vec<Vec<f64>> = Vec::with_capacity(requests.len());
    for req in requests {
        let max_lag = *req.lags.iter().max().expect("validated nonempty");
        obs.push(match req.kind {
            StatKind::Acf => estimators::sample_acf(y, &req.lags)?,
            StatKind::Irf => {
                estimators::sample_irf_with(y, req.order_rule, &req.lags, config.fit_method)?
            }
        });
        refs.push(reference_curve(
            req.kind,
            max_lag,
            config.method,
            &prep.model,
            prep.d_hat,
        )?);
    }

    let mut draws: Vec<Vec<Vec<f64>>> = requests
        .iter()
        .map(|req| vec![Vec::with_capacity(config.b); req.lags.len()])
        .collect();
    for b in 0..config.b {
        let mut rng = rng_from_seed(derive_seed(config.seed, b as u64));
        let series = prep.resample_one(&mut rng)?;
        for (ri, req) in requests.iter().enumerate() {
            let values = match req.kind {
                StatKind::Acf => estimators::sample_acf(&series, &req.lags)?,
                StatKind::Irf => estimators::sample_irf_with(
                    &series,
                    req.order_rule,
                    &req.lags,
                    config.fit_method,
                )?,
            };
            for (li, v) in values.into_iter().enumerate() {
                draws[ri][li].push(v);
            }
        }
    }

    let mut distributions = Vec::new();
    for (ri, req) in requests.iter().enumerate() {
        for (li, &lag) in req.lags.iter().enumerate() {
            let mut d = std::mem::take(&mut draws[ri][li]);
            d.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
            distributions.push(BootstrapDistribution {
                kind: req.kind,
                lag,
                draws: d,
                s_ref: refs[ri][lag],
                s_obs: obs[ri][li],
            });
        }
    }
    Ok(BootstrapRun {
        d_hat: prep.d_hat,
        h: prep.model.h,
        distributions,
    })
}
