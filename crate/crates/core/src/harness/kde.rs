//! Gaussian kernel density estimation with Silverman's bandwidth.

use crate::error::{Error, Result};

/// Type-7 (linear interpolation) sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Silverman's rule of thumb `0.9 * min(sd, IQR/1.34) * n^{-1/5}`.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Degenerate(
            "bandwidth needs at least two samples".into(),
        ));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let bw = 0.9 * sd.min(iqr / 1.34) * n.powf(-0.2);
    if !(bw > 0.0) {
        return Err(Error::Degenerate(
            "zero bandwidth: samples are (nearly) all equal".into(),
        ));
    }
    Ok(bw)
}

/// Gaussian KDE of `samples` at `eval_points`.
pub fn kde(samples: &[f64], eval_points: &[f64]) -> Result<Vec<f64>> {
    let bw = silverman_bandwidth(samples)?;
    let norm = 1.0 / (samples.len() as f64 * bw * (2.0 * std::f64::consts::PI).sqrt());
    Ok(eval_points
        .iter()
        .map(|&x| {
            let mut acc = 0.0;
            for &xi in samples {
                let u = (x - xi) / bw;
                acc += (-0.5 * u * u).exp();
            }
            acc * norm
        })
        .collect())
}

/// An evaluation grid covering every sample set, padded by five of the
/// largest bandwidth on each side.
pub fn padded_grid(sample_sets: &[&[f64]], points: usize) -> Result<Vec<f64>> {
    if sample_sets.is_empty() || points < 2 {
        return Err(Error::InvalidParameter("empty grid request".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut bw_max: f64 = 0.0;
    for set in sample_sets {
        for &v in *set {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        bw_max = bw_max.max(silverman_bandwidth(set)?);
    }
    let (a, b) = (lo - 5.0 * bw_max, hi + 5.0 * bw_max);
    let step = (b - a) / (points - 1) as f64;
    Ok((0..points).map(|i| a + step * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{rng_from_seed, standard_normal};

    #[test]
    fn constant_samples_are_rejected() {
        assert!(kde(&[2.0; 50], &[0.0]).is_err());
    }

    #[test]
    fn standard_normal_density_at_zero() {
        let mut rng = rng_from_seed(4242);
        let samples: Vec<f64> = (0..20_000).map(|_| standard_normal(&mut rng)).collect();
        let d = kde(&samples, &[0.0]).unwrap()[0];
        assert!(
            (d - 0.398_942_280_401_432_7).abs() < 0.02,
            "density at 0 = {d}"
        );
    }

    #[test]
    fn density_integrates_to_one_on_padded_grid() {
        let mut rng = rng_from_seed(33);
        let samples: Vec<f64> = (0..5000).map(|_| 2.0 * standard_normal(&mut rng) - 1.0).collect();
        let grid = padded_grid(&[&samples], 401).unwrap();
        let dens = kde(&samples, &grid).unwrap();
        let mut integral = 0.0;
        for i in 1..grid.len() {
            integral += 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
        }
        assert!((integral - 1.0).abs() < 0.01, "integral = {integral}");
        assert!(dens.iter().all(|&d| d >= 0.0));
    }
}
