//! Autoregressive approximation.
//!
//! Coefficients follow the convention `Phi_h(z) = 1 + phi_h(1) z + ... +
//! phi_h(h) z^h`, so the prediction error is `eps_h(t) = sum_{j=0}^{h}
//! phi_h(j) y(t-j)` with `phi_h(0) = 1`. A textbook AR(1) `y(t) = 0.6
//! y(t-1) + eps(t)` therefore has `phi_h(1) = -0.6` here.

use crate::error::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector};

/// How the autoregression is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMethod {
    /// Burg's lattice recursion (forward+backward prediction error).
    /// Always Schur–Cohn stable.
    Burg,
    /// Yule–Walker on biased (divisor `T`, mean-corrected) sample
    /// autocovariances, solved by Levinson recursion.
    YuleWalker,
}

impl FitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMethod::Burg => "burg",
            FitMethod::YuleWalker => "yule_walker",
        }
    }
}

/// A fitted autoregressive approximation of order `h`.
#[derive(Debug, Clone)]
pub struct ArModel {
    /// Order of the fitted autoregression.
    pub h: usize,
    /// Coefficients `phi_h(1..h)` with `Phi_h(z) = 1 + sum phi_h(j) z^j`.
    pub phi: Vec<f64>,
    /// Prediction error variance `sigma_h^2`.
    pub sigma2: f64,
    pub method: FitMethod,
}

/// Threshold for treating a polynomial zero as on the unit circle.
const UNIT_ROOT_EPS: f64 = 1e-10;

/// Biased sample autocovariances: divisor `T`, mean-corrected.
pub fn sample_acvf_biased(y: &[f64], max_lag: usize) -> Vec<f64> {
    let t_len = y.len() as f64;
    let mean = y.iter().sum::<f64>() / t_len;
    let dev: Vec<f64> = y.iter().map(|v| v - mean).collect();
    (0..=max_lag)
        .map(|k| {
            let mut acc = 0.0;
            for t in 0..y.len().saturating_sub(k) {
                acc += dev[t] * dev[t + k];
            }
            acc / t_len
        })
        .collect()
}

/// Levinson recursion on an autocovariance sequence. Returns, for every
/// order `0..=hmax`, the coefficient vector (our sign convention) and the
/// prediction error variance.
fn levinson_all_orders(gamma: &[f64], hmax: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    if gamma.len() <= hmax {
        return Err(Error::InvalidParameter(
            "levinson needs autocovariances up to the requested order".into(),
        ));
    }
    if gamma[0] <= 0.0 {
        return Err(Error::Degenerate(
            "zero or negative variance in autocovariance input".into(),
        ));
    }
    let mut out = Vec::with_capacity(hmax + 1);
    out.push((Vec::new(), gamma[0]));
    // `a` holds the standard-convention predictor: y_hat(t) = sum a_j y(t-j).
    let mut a: Vec<f64> = Vec::new();
    let mut e = gamma[0];
    for m in 1..=hmax {
        let mut acc = gamma[m];
        for j in 1..m {
            acc -= a[j - 1] * gamma[m - j];
        }
        let k = acc / e;
        let mut a_new = vec![0.0; m];
        for j in 1..m {
            a_new[j - 1] = a[j - 1] - k * a[m - 1 - j];
        }
        a_new[m - 1] = k;
        e *= 1.0 - k * k;
        if !(e > 0.0) {
            return Err(Error::Numerical(format!(
                "non-positive prediction error variance at order {m}; \
                 autocovariance input is not positive definite"
            )));
        }
        a = a_new;
        out.push((a.iter().map(|v| -v).collect(), e));
    }
    Ok(out)
}

/// Burg lattice recursion. Returns coefficients and prediction error
/// variance for every order `0..=hmax`.
fn burg_all_orders(y: &[f64], hmax: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    let t_len = y.len();
    let mean = y.iter().sum::<f64>() / t_len as f64;
    let x: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let mut e = x.iter().map(|v| v * v).sum::<f64>() / t_len as f64;
    if e <= 0.0 {
        return Err(Error::Degenerate("constant series has zero variance".into()));
    }
    let mut out = Vec::with_capacity(hmax + 1);
    out.push((Vec::new(), e));
    let mut f = x.clone();
    let mut b = x;
    let mut phi: Vec<f64> = Vec::new();
    for m in 1..=hmax {
        let mut num = 0.0;
        let mut den = 0.0;
        for t in m..t_len {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        let k = if den > 0.0 { -2.0 * num / den } else { 0.0 };
        let mut phi_new = vec![0.0; m];
        for j in 1..m {
            phi_new[j - 1] = phi[j - 1] + k * phi[m - 1 - j];
        }
        phi_new[m - 1] = k;
        for t in (m..t_len).rev() {
            let ft = f[t];
            f[t] = ft + k * b[t - 1];
            b[t] = b[t - 1] + k * ft;
        }
        e *= 1.0 - k * k;
        phi = phi_new;
        out.push((phi.clone(), e));
    }
    Ok(out)
}

fn check_order(y: &[f64], h: usize) -> Result<()> {
    if y.is_empty() || h >= y.len() {
        return Err(Error::InvalidParameter(format!(
            "AR order h = {h} must satisfy h < T = {}",
            y.len()
        )));
    }
    Ok(())
}

/// Fits an AR(h) to `y` (deviations from the sample mean).
pub fn fit_ar(y: &[f64], h: usize, method: FitMethod) -> Result<ArModel> {
    Ok(fit_ar_all_orders(y, h, method)?.pop().expect("order h present"))
}

/// Fits every order `0..=hmax` in one pass (both estimators yield all
/// intermediate orders for free).
pub fn fit_ar_all_orders(y: &[f64], hmax: usize, method: FitMethod) -> Result<Vec<ArModel>> {
    check_order(y, hmax)?;
    let per_order = match method {
        FitMethod::Burg => burg_all_orders(y, hmax)?,
        FitMethod::YuleWalker => {
            let gamma = sample_acvf_biased(y, hmax);
            levinson_all_orders(&gamma, hmax)?
        }
    };
    Ok(per_order
        .into_iter()
        .enumerate()
        .map(|(h, (phi, sigma2))| ArModel {
            h,
            phi,
            sigma2,
            method,
        })
        .collect())
}

/// Fits an AR(h) directly to exact (theoretical) autocovariances.
pub fn yule_walker_from_acvf(gamma: &[f64], h: usize) -> Result<ArModel> {
    let (phi, sigma2) = levinson_all_orders(gamma, h)?.pop().expect("order h present");
    Ok(ArModel {
        h,
        phi,
        sigma2,
        method: FitMethod::YuleWalker,
    })
}

/// AIC order selection: `argmin_{h=0..max_order} ln(sigma_h^2) + 2h/T`,
/// ties broken towards the smaller order.
pub fn select_order_aic(y: &[f64], max_order: usize, method: FitMethod) -> Result<usize> {
    check_order(y, max_order)?;
    let models = fit_ar_all_orders(y, max_order, method)?;
    let sigmas: Vec<f64> = models.iter().map(|m| m.sigma2).collect();
    Ok(aic_order_from_sigmas(&sigmas, y.len()))
}

/// The AIC argmin given the per-order prediction error variances.
pub fn aic_order_from_sigmas(sigma2: &[f64], t: usize) -> usize {
    let mut best = 0usize;
    let mut best_val = f64::INFINITY;
    for (h, &s2) in sigma2.iter().enumerate() {
        let val = s2.ln() + 2.0 * h as f64 / t as f64;
        if val < best_val {
            best_val = val;
            best = h;
        }
    }
    best
}

/// The slowly growing maximal order `floor((ln T)^2)`.
pub fn max_order(t: usize) -> usize {
    let l = (t as f64).ln();
    (l * l).floor() as usize
}

/// Power-series inversion of `Phi(z)`: `psi(0) = 1`,
/// `psi(k) = -sum_{j=1}^{min(k,h)} phi(j) psi(k-j)`.
pub fn invert_ar(phi: &[f64], max_lag: usize) -> Vec<f64> {
    let h = phi.len();
    let mut psi = Vec::with_capacity(max_lag + 1);
    psi.push(1.0);
    for k in 1..=max_lag {
        let mut acc = 0.0;
        for j in 1..=k.min(h) {
            acc -= phi[j - 1] * psi[k - j];
        }
        psi.push(acc);
    }
    psi
}

/// Impulse responses implied by a fitted autoregression.
pub fn ar_to_irf(model: &ArModel, max_lag: usize) -> Vec<f64> {
    invert_ar(&model.phi, max_lag)
}

/// Theoretical autocovariances of a stable AR model: solves the Yule–Walker
/// system for `gamma(0..h)`, then extends by the AR recursion.
pub fn ar_to_acvf(phi: &[f64], sigma2: f64, max_lag: usize) -> Result<Vec<f64>> {
    let h = phi.len();
    if sigma2 <= 0.0 {
        return Err(Error::InvalidParameter("sigma2 must be positive".into()));
    }
    let mut gamma = vec![0.0; (max_lag + 1).max(h + 1)];
    if h == 0 {
        gamma[0] = sigma2;
    } else {
        // sum_{j=0}^{h} phi(j) gamma(|j-k|) = delta_0(k) sigma2, k = 0..h
        let n = h + 1;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                let c = if j == 0 { 1.0 } else { phi[j - 1] };
                m[(k, j.abs_diff(k))] += c;
            }
        }
        let mut rhs = DVector::<f64>::zeros(n);
        rhs[0] = sigma2;
        let solved = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Unstable("Yule-Walker system is singular".into()))?;
        gamma[..n].copy_from_slice(solved.as_slice());
        for k in n..gamma.len() {
            let mut acc = 0.0;
            for j in 1..=h {
                acc -= phi[j - 1] * gamma[k - j];
            }
            gamma[k] = acc;
        }
    }
    gamma.truncate(max_lag + 1);
    if gamma[0] <= 0.0 {
        return Err(Error::Unstable(
            "implied variance is not positive; model is not stationary".into(),
        ));
    }
    Ok(gamma)
}

/// Autocorrelations implied by a fitted autoregression (Yule–Walker route).
pub fn ar_to_acf(model: &ArModel, max_lag: usize) -> Result<Vec<f64>> {
    let gamma = ar_to_acvf(&model.phi, model.sigma2, max_lag)?;
    let g0 = gamma[0];
    Ok(gamma.into_iter().map(|g| g / g0).collect())
}

/// Schur–Cohn stability: all zeros of `Phi(z)` strictly outside the unit
/// circle, tested through the step-down (reverse Levinson) recursion on the
/// reflection coefficients.
pub fn schur_cohn_stable(phi: &[f64]) -> bool {
    let mut a = phi.to_vec();
    while let Some(&k) = a.last() {
        if k.abs() >= 1.0 {
            return false;
        }
        let m = a.len();
        let denom = 1.0 - k * k;
        let prev: Vec<f64> = (1..m)
            .map(|j| (a[j - 1] - k * a[m - 1 - j]) / denom)
            .collect();
        a = prev;
    }
    true
}

/// Repairs an unstable coefficient vector by reflecting offending zeros of
/// `Phi(z)` across the unit circle (conjugate pairs move together, so the
/// result stays real). Stable inputs are returned unchanged.
pub fn reflect_to_stationary(phi: &[f64]) -> Result<Vec<f64>> {
    if schur_cohn_stable(phi) {
        return Ok(phi.to_vec());
    }
    // Work with the reversed polynomial q(x) = x^h Phi(1/x), which is monic
    // with roots x_i = 1/z_i; stability means every |x_i| < 1.
    let mut degree = phi.len();
    while degree > 0 && phi[degree - 1] == 0.0 {
        degree -= 1;
    }
    let companion = DMatrix::<f64>::from_fn(degree, degree, |i, j| {
        if j == degree - 1 {
            -phi[degree - 1 - i]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let schur = nalgebra::linalg::Schur::try_new(companion, 1e-14, 100_000)
        .ok_or_else(|| Error::Numerical("root finding did not converge".into()))?;
    let roots = schur
        .complex_eigenvalues();

    let mut reflected: Vec<Complex<f64>> = Vec::with_capacity(degree);
    for &x in roots.iter() {
        let r = x.norm();
        if r >= 1.0 - UNIT_ROOT_EPS {
            // Reflect |z| <= 1 + eps back outside; zeros too close to the
            // circle for reflection alone are nudged strictly inside in
            // x-space so the output passes the stability test.
            let new_r = (1.0 / r).min(1.0 - 1e-8);
            reflected.push(x * Complex::new(new_r / r, 0.0));
        } else {
            reflected.push(x);
        }
    }
    // Rebuild q(x) = prod (x - x_i); the coefficient of x^{h-i} is phi(i).
    let mut coeffs = vec![Complex::new(0.0, 0.0); degree + 1];
    coeffs[0] = Complex::new(1.0, 0.0);
    for (i, root) in reflected.iter().enumerate() {
        let mut next = vec![Complex::new(0.0, 0.0); degree + 1];
        for j in 0..=i {
            next[j] += coeffs[j];
            next[j + 1] -= coeffs[j] * root;
        }
        coeffs[..=(i + 1)].copy_from_slice(&next[..=(i + 1)]);
    }
    let mut out: Vec<f64> = coeffs[1..].iter().map(|c| c.re).collect();
    out.resize(phi.len(), 0.0);
    if !schur_cohn_stable(&out) {
        return Err(Error::Numerical(
            "reflection failed to produce a stable polynomial".into(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_from_seed, standard_normal};
    use approx::assert_abs_diff_eq;

    fn ar1_series(phi_std: f64, t: usize, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        let mut y = Vec::with_capacity(t);
        let mut prev = standard_normal(&mut rng) / (1.0 - phi_std * phi_std).sqrt();
        for _ in 0..t {
            y.push(prev);
            prev = phi_std * prev + standard_normal(&mut rng);
        }
        y
    }

    #[test]
    fn yule_walker_matches_hand_computation() {
        // y = [1,2,3,4]: biased sample rho(1) = 0.25, so phi_h(1) = -0.25.
        let model = fit_ar(&[1.0, 2.0, 3.0, 4.0], 1, FitMethod::YuleWalker).unwrap();
        assert_abs_diff_eq!(model.phi[0], -0.25, epsilon = 1e-12);
    }

    #[test]
    fn order_zero_gives_sample_variance() {
        let y = [1.0, 2.0, 3.0, 4.0];
        for method in [FitMethod::Burg, FitMethod::YuleWalker] {
            let model = fit_ar(&y, 0, method).unwrap();
            assert!(model.phi.is_empty());
            assert_abs_diff_eq!(model.sigma2, 1.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn burg_recovers_ar1_coefficient() {
        let y = ar1_series(0.6, 5000, 31);
        let model = fit_ar(&y, 1, FitMethod::Burg).unwrap();
        assert!(
            (model.phi[0] + 0.6).abs() < 0.05,
            "phi = {}",
            model.phi[0]
        );
    }

    #[test]
    fn constant_series_is_rejected() {
        let y = [3.0; 16];
        assert!(fit_ar(&y, 1, FitMethod::Burg).is_err());
        assert!(fit_ar(&y, 1, FitMethod::YuleWalker).is_err());
        assert!(fit_ar(&y, 16, FitMethod::Burg).is_err()); // h >= T
    }

    #[test]
    fn aic_from_sigmas_example() {
        // Criterion values: [0.0, -0.673147, -0.673350] -> argmin h = 2.
        assert_eq!(aic_order_from_sigmas(&[1.0, 0.5, 0.49], 100), 2);
        // Ties break to the smaller order.
        assert_eq!(aic_order_from_sigmas(&[1.0, 1.0], 100), 0);
    }

    #[test]
    fn aic_on_white_noise_rarely_overfits() {
        let mut small = 0;
        for rep in 0..200 {
            let mut rng = rng_from_seed(1000 + rep);
            let y: Vec<f64> = (0..400).map(|_| standard_normal(&mut rng)).collect();
            let h = select_order_aic(&y, max_order(400), FitMethod::Burg).unwrap();
            if h <= 3 {
                small += 1;
            }
        }
        assert!(small >= 160, "h <= 3 in only {small}/200 draws");
    }

    #[test]
    fn aic_detects_strong_ar1() {
        for rep in 0..200 {
            let y = ar1_series(0.9, 500, 5000 + rep);
            let h = select_order_aic(&y, max_order(500), FitMethod::Burg).unwrap();
            assert!(h >= 1, "rep {rep} selected h = 0");
        }
    }

    #[test]
    fn max_order_examples() {
        assert_eq!(max_order(500), 38);
        assert_eq!(max_order(100), 21);
        assert_eq!(max_order(3), 1);
    }

    #[test]
    fn invert_ar_examples() {
        let psi = invert_ar(&[-0.5], 3);
        assert_abs_diff_eq!(psi[3], 0.125, epsilon = 1e-15);
        assert_eq!(invert_ar(&[], 3), vec![1.0, 0.0, 0.0, 0.0]);
        let psi = invert_ar(&[-0.9, 0.2], 2);
        assert_abs_diff_eq!(psi[2], 0.61, epsilon = 1e-15);
    }

    #[test]
    fn ar_to_acf_examples() {
        let m = ArModel {
            h: 1,
            phi: vec![-0.6],
            sigma2: 1.0,
            method: FitMethod::Burg,
        };
        let rho = ar_to_acf(&m, 2).unwrap();
        assert_abs_diff_eq!(rho[2], 0.36, epsilon = 1e-12);

        let m0 = ArModel {
            h: 0,
            phi: vec![],
            sigma2: 2.0,
            method: FitMethod::Burg,
        };
        assert_eq!(ar_to_acf(&m0, 2).unwrap(), vec![1.0, 0.0, 0.0]);

        // Phi(z) = 1 - 0.9z + 0.2z^2: rho(1) = phi1/(1-phi2) = 0.9/1.2.
        let m2 = ArModel {
            h: 2,
            phi: vec![-0.9, 0.2],
            sigma2: 1.0,
            method: FitMethod::Burg,
        };
        let rho = ar_to_acf(&m2, 1).unwrap();
        assert_abs_diff_eq!(rho[1], 0.75, epsilon = 1e-12);
    }

    #[test]
    fn exact_moment_fit_recovers_coefficients() {
        // AR(2) gamma fed back through Levinson recovers phi to 1e-10.
        let phi = [-0.9, 0.2];
        let gamma = ar_to_acvf(&phi, 1.7, 10).unwrap();
        let model = yule_walker_from_acvf(&gamma, 2).unwrap();
        assert_abs_diff_eq!(model.phi[0], -0.9, epsilon = 1e-10);
        assert_abs_diff_eq!(model.phi[1], 0.2, epsilon = 1e-10);
        assert_abs_diff_eq!(model.sigma2, 1.7, epsilon = 1e-10);
    }

    #[test]
    fn acvf_and_irf_routes_agree() {
        // rho(k) from the Yule-Walker solve matches the normalized
        // convolution of impulse responses.
        let phi = vec![-0.9, 0.2, 0.1];
        let sigma2 = 1.3;
        let model = ArModel {
            h: 3,
            phi: phi.clone(),
            sigma2,
            method: FitMethod::Burg,
        };
        let rho = ar_to_acf(&model, 12).unwrap();
        let big = 100_000;
        let psi = invert_ar(&phi, big + 12);
        let denom: f64 = psi.iter().take(big).map(|p| p * p).sum();
        for k in 0..=12 {
            let num: f64 = (0..big).map(|j| psi[j] * psi[j + k]).sum();
            assert!(
                (rho[k] - num / denom).abs() < 1e-8,
                "k={k}: {} vs {}",
                rho[k],
                num / denom
            );
        }
    }

    #[test]
    fn schur_cohn_examples() {
        assert!(schur_cohn_stable(&[-0.5]));
        assert!(!schur_cohn_stable(&[-1.25]));
        // Phi(z) = 1 - 1.9z + 0.9z^2 has a zero at z = 1.
        assert!(!schur_cohn_stable(&[-1.9, 0.9]));
        assert!(schur_cohn_stable(&[]));
    }

    #[test]
    fn reflection_examples() {
        assert_eq!(reflect_to_stationary(&[-0.5]).unwrap(), vec![-0.5]);
        let fixed = reflect_to_stationary(&[-1.25]).unwrap();
        assert_abs_diff_eq!(fixed[0], -0.8, epsilon = 1e-10);
        // Zero on the unit circle still comes back stable.
        let fixed = reflect_to_stationary(&[-1.9, 0.9]).unwrap();
        assert!(schur_cohn_stable(&fixed));
    }

    #[test]
    fn reflection_is_idempotent_on_stable_inputs() {
        let stable = vec![-0.9, 0.2, 0.05];
        assert!(schur_cohn_stable(&stable));
        assert_eq!(reflect_to_stationary(&stable).unwrap(), stable);
    }

    #[test]
    fn reflection_handles_complex_pairs() {
        // Phi(z) = 1 - 1.2z + 0.8z^2 has a complex pair inside the circle?
        // Verify repair keeps coefficients real and stabilizes.
        let phi = [-2.0, 1.6];
        assert!(!schur_cohn_stable(&phi));
        let fixed = reflect_to_stationary(&phi).unwrap();
        assert!(schur_cohn_stable(&fixed));
    }

    #[test]
    fn burg_is_always_stable() {
        // Property suite: 1000 random series, every Burg fit stable.
        for rep in 0..1000 {
            let mut rng = rng_from_seed(77_000 + rep);
            let t = 30 + (rep as usize % 170);
            let y: Vec<f64> = (0..t).map(|_| standard_normal(&mut rng)).collect();
            let h = (t / 4).min(25);
            let model = fit_ar(&y, h, FitMethod::Burg).unwrap();
            assert!(
                schur_cohn_stable(&model.phi),
                "rep {rep}: unstable Burg fit"
            );
        }
    }
}
