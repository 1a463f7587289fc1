//! Monte Carlo experiment runner.
//!
//! Replications are mutually independent given their derived seeds, so they
//! may run on any number of threads; results are reduced strictly in
//! replication order, which makes the emitted numbers (and bytes)
//! independent of the parallelism degree.

use super::config::{ExperimentConfig, Method};
use super::kde;
use crate::analytic_bias::{self, HoskingBiasInputs};
use crate::arfima::{self, ArfimaSpec};
use crate::error::{Error, Result};
use crate::estimators::{self, OrderRule, StatKind, StatRequest};
use crate::rng::derive_seed;
use crate::sieve::{self, SieveConfig, SieveMethod, Transform};
use crate::simulate::{draw_innovations, LevinsonSampler};
use rayon::prelude::*;
use std::collections::HashMap;

/// One line of the bias/RMSE tables.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub method: Method,
    pub stat: StatKind,
    /// `None` marks the row averaging over the table lags.
    pub lag: Option<usize>,
    pub bias: f64,
    pub rmse: f64,
    pub mc_se: f64,
    pub n_ok: usize,
}

/// Density curves for one figure panel, plus the underlying samples (kept so
/// downstream checks can use the raw distributions, not just the smoothed
/// curves).
#[derive(Debug, Clone)]
pub struct Panel {
    pub stat: StatKind,
    pub lag: usize,
    pub xs: Vec<f64>,
    /// `(column label, density values)`, in emission order.
    pub curves: Vec<(String, Vec<f64>)>,
    /// Monte Carlo draws of the unadjusted statistic.
    pub mc_samples: Vec<f64>,
    /// Monte Carlo draws of the panel method's bias-adjusted statistic.
    pub mc_ba_samples: Vec<f64>,
    /// The averaged bootstrap distribution (order statistics averaged
    /// across replications).
    pub bs_av: Vec<f64>,
}

/// Mean curves over the profile lags `1..=profile_max_lag`.
#[derive(Debug, Clone)]
pub struct Profile {
    pub stat: StatKind,
    pub lags: Vec<usize>,
    pub truth: Vec<f64>,
    pub mc_mean: Vec<f64>,
    /// Bias-adjusted means per adjustment method.
    pub ba_means: Vec<(Method, Vec<f64>)>,
}

/// Everything recorded for one (d, phi, T) cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub d: f64,
    pub phi: f64,
    pub t: usize,
    pub rows: Vec<TableRow>,
    pub panels: Vec<Panel>,
    pub profiles: Vec<Profile>,
    pub n_failed: usize,
    pub failures: Vec<String>,
    /// Per-replication estimates for (method, stat) pairs at the cell's lag
    /// grid, kept for downstream distribution-level diagnostics.
    pub estimates: HashMap<(Method, StatKind), Vec<Vec<f64>>>,
    /// The lag grid each estimate vector is aligned to.
    pub lag_grid: HashMap<StatKind, Vec<usize>>,
}

impl CellResult {
    /// Estimates across replications for one method/stat at one lag.
    pub fn estimates_at(&self, method: Method, stat: StatKind, lag: usize) -> Option<Vec<f64>> {
        let grid = self.lag_grid.get(&stat)?;
        let idx = grid.iter().position(|&k| k == lag)?;
        let reps = self.estimates.get(&(method, stat))?;
        Some(reps.iter().map(|v| v[idx]).collect())
    }

    pub fn row(&self, method: Method, stat: StatKind, lag: usize) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.stat == stat && r.lag == Some(lag))
    }

    pub fn panel(&self, stat: StatKind, lag: usize) -> Option<&Panel> {
        self.panels.iter().find(|p| p.stat == stat && p.lag == lag)
    }
}

/// Result of a full experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

/// Sorts each replication's draws and averages the order statistics across
/// replications.
pub fn averaged_bootstrap_distribution(per_replication_draws: &[Vec<f64>]) -> Vec<f64> {
    if per_replication_draws.is_empty() {
        return Vec::new();
    }
    let b = per_replication_draws[0].len();
    let mut acc = vec![0.0; b];
    for draws in per_replication_draws {
        assert_eq!(draws.len(), b, "ragged bootstrap draw matrix");
        let mut sorted = draws.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite draws"));
        for (slot, v) in acc.iter_mut().zip(&sorted) {
            *slot += v;
        }
    }
    let n = per_replication_draws.len() as f64;
    acc.iter_mut().for_each(|v| *v /= n);
    acc
}

/// Runs the experiment on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut cells = Vec::new();
    let mut cell_counter = 0u64;
    for &(d, phi) in &config.cells {
        for &t in &config.t_values {
            let cell_seed = derive_seed(config.seed, cell_counter);
            cell_counter += 1;
            let cell = run_cell(config, d, phi, t, cell_seed)?;
            let max_failed = (config.r as f64 * 0.01).floor() as usize;
            if cell.n_failed > max_failed {
                return Err(Error::CellFailed(format!(
                    "cell d={d} phi={phi} T={t}: {}/{} replications failed (first: {})",
                    cell.n_failed,
                    config.r,
                    cell.failures.first().cloned().unwrap_or_default()
                )));
            }
            cells.push(cell);
        }
    }
    Ok(ExperimentResult {
        config: config.clone(),
        cells,
    })
}

/// Runs the experiment on a dedicated pool with `threads` workers
/// (`None` = rayon default).
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentResult> {
    match threads {
        None => run_experiment(config),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| run_experiment(config))
        }
    }
}

/// Per-cell immutable context shared by the replication workers.
struct CellCtx {
    d: f64,
    phi: f64,
    t: usize,
    cell_seed: u64,
    b: usize,
    order_rule: OrderRule,
    fit_method: crate::arfit::FitMethod,
    methods: Vec<Method>,
    stats: Vec<StatKind>,
    panel_method: Option<Method>,
    panel_lags: Vec<usize>,
    lags: HashMap<StatKind, Vec<usize>>,
    sampler: LevinsonSampler,
    splw_bandwidth: usize,
    true_d: f64,
    /// Hosking bias per acf lag position (aligned with lags[Acf]).
    hosking: Option<Vec<f64>>,
}

/// What one replication contributes.
struct RepData {
    est: Vec<((Method, StatKind), Vec<f64>)>,
    /// Sorted bootstrap draws of the panel method per (stat, table lag).
    panel_draws: Vec<((StatKind, usize), Vec<f64>)>,
}

fn seed_tag(method: Method) -> u64 {
    match method {
        Method::Unadjusted => 0,
        Method::Raw => 1,
        Method::PrefilteredSplw => 2,
        Method::PrefilteredTrueD => 3,
        Method::Kilian => 4,
        Method::HoskingAsy => 5,
        Method::LeeKo => 6,
    }
}

fn run_cell(
    config: &ExperimentConfig,
    d: f64,
    phi: f64,
    t: usize,
    cell_seed: u64,
) -> Result<CellResult> {
    let ar = if phi == 0.0 { vec![] } else { vec![phi] };
    let spec = ArfimaSpec::new(d, ar, config.sigma2)?;
    let profile_cap = config.profile_max_lag.min(t - 1);
    let mut lags: HashMap<StatKind, Vec<usize>> = HashMap::new();
    for &stat in &config.stats {
        let mut set: Vec<usize> = config
            .table_lags
            .iter()
            .copied()
            .chain(1..=profile_cap)
            .collect();
        set.sort_unstable();
        set.dedup();
        lags.insert(stat, set);
    }
    let max_lag_needed = lags
        .values()
        .flat_map(|v| v.iter().copied())
        .max()
        .unwrap_or(1);

    let gamma = arfima::acvf(&spec, t - 1)?;
    let sampler = LevinsonSampler::new(&gamma)?;
    let truth_acf = arfima::acf(&spec, max_lag_needed)?;
    let truth_irf = arfima::irf(&spec, max_lag_needed)?;

    let methods = config.methods_with_baseline();
    let panel_method = methods
        .iter()
        .copied()
        .find(|m| m.is_sieve_bootstrap());
    let panel_lags: Vec<usize> = {
        let mut v = config.table_lags.clone();
        v.sort_unstable();
        v.dedup();
        v
    };

    let hosking = if methods.contains(&Method::HoskingAsy) {
        let lag_list = &lags[&StatKind::Acf];
        let mut biases = Vec::with_capacity(lag_list.len());
        for &k in lag_list {
            biases.push(analytic_bias::hosking_bias(&HoskingBiasInputs {
                d,
                kappa_at_1: spec.kappa_at_one(),
                sigma2: config.sigma2,
                rho_k: truth_acf[k],
                gamma0: gamma[0],
                t,
            })?);
        }
        Some(biases)
    } else {
        None
    };

    let splw_bandwidth = ((t as f64).powf(config.splw_exponent).floor() as usize)
        .clamp(1, t / 2 - 1);

    let ctx = CellCtx {
        d,
        phi,
        t,
        cell_seed,
        b: config.b,
        order_rule: config.order_rule,
        fit_method: config.fit_method,
        methods: methods.clone(),
        stats: config.stats.clone(),
        panel_method,
        panel_lags,
        lags,
        sampler,
        splw_bandwidth,
        true_d: d,
        hosking,
    };

    let outcomes: Vec<std::result::Result<RepData, String>> = (0..config.r)
        .into_par_iter()
        .map(|r| run_rep(&ctx, r))
        .collect();

    reduce_cell(config, &ctx, &truth_acf, &truth_irf, outcomes)
}

fn run_rep(ctx: &CellCtx, r: usize) -> std::result::Result<RepData, String> {
    let fail = |e: crate::error::Error| format!("replication {r}: {e}");
    let rep_seed = derive_seed(ctx.cell_seed, r as u64);
    let z = draw_innovations(ctx.t, derive_seed(rep_seed, seed_tag(Method::Unadjusted)));
    let y = ctx.sampler.generate(&z);

    let mut est: Vec<((Method, StatKind), Vec<f64>)> = Vec::new();
    let mut panel_draws = Vec::new();

    // Baseline statistics.
    let mut unadjusted: HashMap<StatKind, Vec<f64>> = HashMap::new();
    for &stat in &ctx.stats {
        let values = match stat {
            StatKind::Acf => estimators::sample_acf(&y, &ctx.lags[&stat]).map_err(fail)?,
            StatKind::Irf => {
                estimators::sample_irf_with(&y, ctx.order_rule, &ctx.lags[&stat], ctx.fit_method)
                    .map_err(fail)?
            }
        };
        unadjusted.insert(stat, values.clone());
        est.push(((Method::Unadjusted, stat), values));
    }

    for &method in &ctx.methods {
        match method {
            Method::Unadjusted => {}
            Method::Raw | Method::PrefilteredSplw | Method::PrefilteredTrueD => {
                let (sieve_method, d_hat) = match method {
                    Method::Raw => (SieveMethod::Raw, None),
                    Method::PrefilteredSplw => {
                        let e = estimators::splw(&y, ctx.splw_bandwidth).map_err(fail)?;
                        (SieveMethod::PrefilteredSplw, Some(e.d_hat))
                    }
                    _ => (SieveMethod::PrefilteredTrueD, None),
                };
                let cfg = SieveConfig {
                    method: sieve_method,
                    b: ctx.b,
                    order_rule: ctx.order_rule,
                    fit_method: ctx.fit_method,
                    true_d: (sieve_method == SieveMethod::PrefilteredTrueD)
                        .then_some(ctx.true_d),
                    seed: derive_seed(rep_seed, seed_tag(method)),
                };
                let requests: Vec<StatRequest> = ctx
                    .stats
                    .iter()
                    .map(|&kind| StatRequest {
                        kind,
                        lags: ctx.lags[&kind].clone(),
                        order_rule: ctx.order_rule,
                    })
                    .collect();
                let run = sieve::run_sieve_bootstrap(&y, &cfg, &requests, d_hat).map_err(fail)?;
                let mut adjusted: HashMap<StatKind, Vec<f64>> = ctx
                    .stats
                    .iter()
                    .map(|&s| (s, Vec::with_capacity(ctx.lags[&s].len())))
                    .collect();
                for dist in &run.distributions {
                    let transform = match dist.kind {
                        StatKind::Acf => Transform::FisherZ,
                        StatKind::Irf => Transform::Identity,
                    };
                    let adj = sieve::bias_adjust(dist, transform).map_err(fail)?;
                    adjusted.get_mut(&dist.kind).expect("requested stat").push(adj);
                    if Some(method) == ctx.panel_method && ctx.panel_lags.contains(&dist.lag) {
                        panel_draws.push(((dist.kind, dist.lag), dist.draws.clone()));
                    }
                }
                for &stat in &ctx.stats {
                    est.push(((method, stat), adjusted.remove(&stat).expect("filled")));
                }
            }
            Method::Kilian => {
                let cfg = SieveConfig {
                    method: SieveMethod::Raw,
                    b: ctx.b,
                    order_rule: ctx.order_rule,
                    fit_method: crate::arfit::FitMethod::Burg,
                    true_d: None,
                    seed: derive_seed(rep_seed, seed_tag(method)),
                };
                let psi = sieve::kilian_adjust(&y, &cfg, &ctx.lags[&StatKind::Irf]).map_err(fail)?;
                est.push(((Method::Kilian, StatKind::Irf), psi));
            }
            Method::HoskingAsy => {
                let biases = ctx.hosking.as_ref().expect("validated");
                let rho = &unadjusted[&StatKind::Acf];
                let adj: Vec<f64> = rho.iter().zip(biases).map(|(r, b)| r - b).collect();
                est.push(((Method::HoskingAsy, StatKind::Acf), adj));
            }
            Method::LeeKo => {
                let bias = analytic_bias::lee_ko_bias_plugin(&y, 1).map_err(fail)?;
                let pos = ctx.lags[&StatKind::Acf]
                    .iter()
                    .position(|&k| k == 1)
                    .ok_or_else(|| "lee_ko needs lag 1 in the lag grid".to_string())?;
                est.push((
                    (Method::LeeKo, StatKind::Acf),
                    vec![unadjusted[&StatKind::Acf][pos] - bias],
                ));
            }
        }
    }

    Ok(RepData { est, panel_draws })
}

/// Lags a method reports for a statistic, given the cell's full lag grid.
fn method_lags(method: Method, stat: StatKind, full: &[usize]) -> Vec<usize> {
    match method {
        Method::LeeKo => {
            if stat == StatKind::Acf && full.contains(&1) {
                vec![1]
            } else {
                vec![]
            }
        }
        _ => full.to_vec(),
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn reduce_cell(
    config: &ExperimentConfig,
    ctx: &CellCtx,
    truth_acf: &[f64],
    truth_irf: &[f64],
    outcomes: Vec<std::result::Result<RepData, String>>,
) -> Result<CellResult> {
    let mut failures = Vec::new();
    let mut estimates: HashMap<(Method, StatKind), Vec<Vec<f64>>> = HashMap::new();
    let mut panel_acc: HashMap<(StatKind, usize), Vec<f64>> = HashMap::new();
    let mut panel_n: HashMap<(StatKind, usize), usize> = HashMap::new();
    let mut n_ok = 0usize;

    for outcome in outcomes {
        match outcome {
            Err(msg) => failures.push(msg),
            Ok(rep) => {
                n_ok += 1;
                for (key, values) in rep.est {
                    estimates.entry(key).or_default().push(values);
                }
                for ((stat, lag), draws) in rep.panel_draws {
                    let acc = panel_acc
                        .entry((stat, lag))
                        .or_insert_with(|| vec![0.0; draws.len()]);
                    for (slot, v) in acc.iter_mut().zip(&draws) {
                        *slot += v;
                    }
                    *panel_n.entry((stat, lag)).or_insert(0) += 1;
                }
            }
        }
    }
    if n_ok == 0 {
        return Err(Error::CellFailed(format!(
            "cell d={} phi={} T={}: every replication failed (first: {})",
            ctx.d,
            ctx.phi,
            ctx.t,
            failures.first().cloned().unwrap_or_default()
        )));
    }

    let truth = |stat: StatKind, lag: usize| -> f64 {
        match stat {
            StatKind::Acf => truth_acf[lag],
            StatKind::Irf => truth_irf[lag],
        }
    };

    // Table rows (per lag, then the `av` row over the table lags).
    let mut rows = Vec::new();
    for &method in &ctx.methods {
        for &stat in &ctx.stats {
            if !method.applies_to(stat) {
                continue;
            }
            let full = &ctx.lags[&stat];
            let reported = method_lags(method, stat, full);
            let reps = estimates
                .get(&(method, stat))
                .ok_or_else(|| Error::CellFailed("missing estimates".into()))?;
            let mut table_entries: Vec<TableRow> = Vec::new();
            for &lag in &config.table_lags {
                let Some(pos) = reported.iter().position(|&k| k == lag) else {
                    continue;
                };
                // Index into the full estimate vector: LeeKo stores only its
                // own lags, others the full grid.
                let idx = if reported.len() == full.len() {
                    full.iter().position(|&k| k == lag).expect("grid lag")
                } else {
                    pos
                };
                let values: Vec<f64> = reps.iter().map(|v| v[idx]).collect();
                let truth_v = truth(stat, lag);
                let errs: Vec<f64> = values.iter().map(|v| v - truth_v).collect();
                let bias = mean(&errs);
                let rmse = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
                let sd = (errs.iter().map(|e| (e - bias) * (e - bias)).sum::<f64>()
                    / (errs.len() as f64 - 1.0))
                    .sqrt();
                table_entries.push(TableRow {
                    method,
                    stat,
                    lag: Some(lag),
                    bias,
                    rmse,
                    mc_se: sd / (errs.len() as f64).sqrt(),
                    n_ok: errs.len(),
                });
            }
            // `av` row over k in {1,3,6,9,12}, present only when the table
            // carries that full lag set.
            const AV_LAGS: [usize; 5] = [1, 3, 6, 9, 12];
            let av_set: Vec<usize> = if AV_LAGS.iter().all(|k| config.table_lags.contains(k)) {
                AV_LAGS.to_vec()
            } else {
                Vec::new()
            };
            let av_entries: Vec<&TableRow> = table_entries
                .iter()
                .filter(|r| av_set.contains(&r.lag.expect("per-lag row")))
                .collect();
            let av_row = if av_entries.len() == av_set.len() && !av_set.is_empty() {
                let m = av_entries.len() as f64;
                Some(TableRow {
                    method,
                    stat,
                    lag: None,
                    bias: av_entries.iter().map(|r| r.bias).sum::<f64>() / m,
                    rmse: av_entries.iter().map(|r| r.rmse).sum::<f64>() / m,
                    mc_se: av_entries.iter().map(|r| r.mc_se).sum::<f64>() / m,
                    n_ok: av_entries.iter().map(|r| r.n_ok).min().expect("nonempty"),
                })
            } else {
                None
            };
            rows.extend(table_entries);
            rows.extend(av_row);
        }
    }

    // Figure panels at the table lags.
    let mut panels = Vec::new();
    for &stat in &ctx.stats {
        for &lag in &ctx.panel_lags {
            let full = &ctx.lags[&stat];
            let Some(idx) = full.iter().position(|&k| k == lag) else {
                continue;
            };
            let mc_samples: Vec<f64> = estimates[&(Method::Unadjusted, stat)]
                .iter()
                .map(|v| v[idx])
                .collect();
            let mc_ba_samples: Vec<f64> = match ctx.panel_method {
                Some(pm) => estimates[&(pm, stat)].iter().map(|v| v[idx]).collect(),
                None => Vec::new(),
            };
            let bs_av: Vec<f64> = match (panel_acc.get(&(stat, lag)), panel_n.get(&(stat, lag))) {
                (Some(acc), Some(&n)) if n > 0 => {
                    acc.iter().map(|v| v / n as f64).collect()
                }
                _ => Vec::new(),
            };

            let mut sets: Vec<(&str, &[f64])> = vec![("mc_density", &mc_samples)];
            if !mc_ba_samples.is_empty() {
                sets.push(("mc_ba_density", &mc_ba_samples));
            }
            if !bs_av.is_empty() {
                sets.push(("bs_av_density", &bs_av));
            }
            let asy: Vec<f64>;
            if ctx.methods.contains(&Method::HoskingAsy) && stat == StatKind::Acf {
                asy = estimates[&(Method::HoskingAsy, stat)]
                    .iter()
                    .map(|v| v[idx])
                    .collect();
                sets.push(("ba_asy_density", &asy));
            }
            let lk: Vec<f64>;
            if ctx.methods.contains(&Method::LeeKo) && stat == StatKind::Acf && lag == 1 {
                lk = estimates[&(Method::LeeKo, stat)].iter().map(|v| v[0]).collect();
                sets.push(("ba_lk_density", &lk));
            }
            let kilian: Vec<f64>;
            if ctx.methods.contains(&Method::Kilian) && stat == StatKind::Irf {
                kilian = estimates[&(Method::Kilian, stat)].iter().map(|v| v[idx]).collect();
                sets.push(("ba_kilian_density", &kilian));
            }

            let slices: Vec<&[f64]> = sets.iter().map(|(_, s)| *s).collect();
            let xs = kde::padded_grid(&slices, 201)?;
            let mut curves = Vec::new();
            for (label, samples) in &sets {
                curves.push((label.to_string(), kde::kde(samples, &xs)?));
            }
            panels.push(Panel {
                stat,
                lag,
                xs,
                curves,
                mc_samples,
                mc_ba_samples,
                bs_av,
            });
        }
    }

    // Lag profiles.
    let mut profiles = Vec::new();
    let profile_cap = config.profile_max_lag.min(ctx.t - 1);
    if profile_cap >= 1 {
        for &stat in &ctx.stats {
            let full = &ctx.lags[&stat];
            let lag_list: Vec<usize> = (1..=profile_cap).collect();
            let positions: Vec<usize> = lag_list
                .iter()
                .map(|k| full.iter().position(|x| x == k).expect("profile lag in grid"))
                .collect();
            let mc_mean: Vec<f64> = positions
                .iter()
                .map(|&idx| {
                    mean(
                        &estimates[&(Method::Unadjusted, stat)]
                            .iter()
                            .map(|v| v[idx])
                            .collect::<Vec<f64>>(),
                    )
                })
                .collect();
            let mut ba_means = Vec::new();
            for &method in &ctx.methods {
                if method == Method::Unadjusted
                    || method == Method::LeeKo
                    || !method.applies_to(stat)
                {
                    continue;
                }
                let reps = &estimates[&(method, stat)];
                let means: Vec<f64> = positions
                    .iter()
                    .map(|&idx| mean(&reps.iter().map(|v| v[idx]).collect::<Vec<f64>>()))
                    .collect();
                ba_means.push((method, means));
            }
            profiles.push(Profile {
                stat,
                truth: lag_list.iter().map(|&k| truth(stat, k)).collect(),
                lags: lag_list,
                mc_mean,
                ba_means,
            });
        }
    }

    Ok(CellResult {
        d: ctx.d,
        phi: ctx.phi,
        t: ctx.t,
        rows,
        panels,
        profiles,
        n_failed: failures.len(),
        failures,
        estimates,
        lag_grid: ctx.lags.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig::parse_str(
            "d_phi = 0.0:0.0\nT = 32\nR = 3\nB = 4\nmethods = raw\nstats = irf, acf\n\
             order_rule = logsq\nseed = 11\ntable_lags = 1, 2\nprofile_max_lag = 5\n",
        )
        .unwrap()
    }

    #[test]
    fn averaged_distribution_examples() {
        let avg = averaged_bootstrap_distribution(&[vec![3.0, 1.0, 2.0], vec![0.0, 4.0, 2.0]]);
        assert_eq!(avg, vec![0.5, 2.0, 3.5]);
        let avg = averaged_bootstrap_distribution(&[vec![3.0, 1.0, 2.0]]);
        assert_eq!(avg, vec![1.0, 2.0, 3.0]);
        let same = vec![vec![5.0, -1.0], vec![5.0, -1.0], vec![5.0, -1.0]];
        assert_eq!(averaged_bootstrap_distribution(&same), vec![-1.0, 5.0]);
    }

    #[test]
    fn smoke_run_completes_with_consistent_aggregates() {
        let config = tiny_config();
        let result = run_experiment(&config).unwrap();
        assert_eq!(result.cells.len(), 1);
        let cell = &result.cells[0];
        assert_eq!(cell.n_failed, 0);
        // rmse >= |bias| for every emitted row.
        for row in &cell.rows {
            assert!(row.rmse >= row.bias.abs() - 1e-12, "row {row:?}");
            if row.lag.is_some() {
                assert_eq!(row.n_ok, 3);
            }
        }
        // av row equals the mean of the per-lag rows it covers (here {1}).
        let per_lag: Vec<&TableRow> = cell
            .rows
            .iter()
            .filter(|r| r.method == Method::Raw && r.stat == StatKind::Acf && r.lag == Some(1))
            .collect();
        assert_eq!(per_lag.len(), 1);
        // Panels and profiles exist for both stats.
        assert!(cell.panel(StatKind::Acf, 1).is_some());
        assert!(cell.panel(StatKind::Irf, 2).is_some());
        assert_eq!(cell.profiles.len(), 2);
        for p in &cell.profiles {
            assert_eq!(p.lags, vec![1, 2, 3, 4, 5]);
            assert_eq!(p.truth.len(), 5);
            assert_eq!(p.mc_mean.len(), 5);
        }
    }

    #[test]
    fn rmse_identity_holds() {
        let config = tiny_config();
        let result = run_experiment(&config).unwrap();
        let cell = &result.cells[0];
        for row in &cell.rows {
            if row.lag.is_none() {
                continue;
            }
            let se_sq = row.mc_se * row.mc_se * row.n_ok as f64; // sample variance (n-1)
            let var_pop = se_sq * (row.n_ok as f64 - 1.0) / row.n_ok as f64;
            let identity = row.bias * row.bias + var_pop;
            assert!(
                (identity - row.rmse * row.rmse).abs() < 1e-10,
                "bias^2+var = {identity} vs rmse^2 = {}",
                row.rmse * row.rmse
            );
        }
    }

    #[test]
    fn serial_and_parallel_runs_agree_exactly() {
        let config = tiny_config();
        let serial = run_experiment_with_threads(&config, Some(1)).unwrap();
        let parallel = run_experiment_with_threads(&config, Some(2)).unwrap();
        for (a, b) in serial.cells.iter().zip(&parallel.cells) {
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                assert_eq!(ra.bias.to_bits(), rb.bias.to_bits());
                assert_eq!(ra.rmse.to_bits(), rb.rmse.to_bits());
            }
            for (pa, pb) in a.panels.iter().zip(&b.panels) {
                assert_eq!(pa.bs_av, pb.bs_av);
            }
        }
    }

    #[test]
    fn fisher_adjusted_acf_estimates_stay_inside_unit_interval() {
        let config = ExperimentConfig::parse_str(
            "d_phi = 0.3:0.6\nT = 48\nR = 4\nB = 8\nmethods = raw\nstats = acf\n\
             order_rule = aic\nseed = 3\ntable_lags = 1, 3\nprofile_max_lag = 6\n",
        )
        .unwrap();
        let result = run_experiment(&config).unwrap();
        let cell = &result.cells[0];
        for reps in cell.estimates.get(&(Method::Raw, StatKind::Acf)).unwrap() {
            for v in reps {
                assert!(v.abs() < 1.0, "adjusted acf {v} escaped (-1,1)");
            }
        }
    }
}
