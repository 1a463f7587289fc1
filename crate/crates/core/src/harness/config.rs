//! Experiment configuration: the flat key/value config file and its
//! validation.

use crate::arfit::FitMethod;
use crate::error::{Error, Result};
use crate::estimators::{OrderRule, StatKind};

/// Estimator / adjustment methods a run can request. `unadjusted` is always
/// computed (it is the baseline every comparison needs) whether listed or
/// not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Unadjusted,
    Raw,
    PrefilteredSplw,
    PrefilteredTrueD,
    Kilian,
    HoskingAsy,
    LeeKo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Unadjusted => "unadjusted",
            Method::Raw => "raw",
            Method::PrefilteredSplw => "prefiltered_splw",
            Method::PrefilteredTrueD => "prefiltered_true_d",
            Method::Kilian => "kilian",
            Method::HoskingAsy => "hosking_asy",
            Method::LeeKo => "lee_ko",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "unadjusted" => Method::Unadjusted,
            "raw" => Method::Raw,
            "prefiltered_splw" => Method::PrefilteredSplw,
            "prefiltered_true_d" => Method::PrefilteredTrueD,
            "kilian" => Method::Kilian,
            "hosking_asy" => Method::HoskingAsy,
            "lee_ko" => Method::LeeKo,
            other => {
                return Err(Error::Config(format!("unknown method '{other}'")));
            }
        })
    }

    /// Does the method produce estimates for this statistic?
    pub fn applies_to(self, stat: StatKind) -> bool {
        match self {
            Method::Kilian => stat == StatKind::Irf,
            Method::HoskingAsy | Method::LeeKo => stat == StatKind::Acf,
            _ => true,
        }
    }

    /// Bootstrap resampling methods (those that consume B resamples of the
    /// statistic's distribution).
    pub fn is_sieve_bootstrap(self) -> bool {
        matches!(
            self,
            Method::Raw | Method::PrefilteredSplw | Method::PrefilteredTrueD
        )
    }
}

/// Full Monte Carlo experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// (d, phi) grid cells.
    pub cells: Vec<(f64, f64)>,
    pub t_values: Vec<usize>,
    /// Monte Carlo replications per cell.
    pub r: usize,
    /// Bootstrap resamples per replication.
    pub b: usize,
    pub methods: Vec<Method>,
    pub stats: Vec<StatKind>,
    /// Lags reported in the tables (and drawn as figure panels).
    pub table_lags: Vec<usize>,
    /// Profiles cover `1..=profile_max_lag` (0 disables them).
    pub profile_max_lag: usize,
    pub order_rule: OrderRule,
    pub fit_method: FitMethod,
    pub sigma2: f64,
    pub seed: u64,
    /// SPLW bandwidth `floor(T^exponent)`.
    pub splw_exponent: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::Config("no (d, phi) cells requested".into()));
        }
        for &(d, phi) in &self.cells {
            if !(d.is_finite() && d.abs() < 0.5) {
                return Err(Error::Config(format!("|d| < 0.5 required, got {d}")));
            }
            if !(phi.is_finite() && phi.abs() < 1.0) {
                return Err(Error::Config(format!("|phi| < 1 required, got {phi}")));
            }
            if d == 0.0 && self.methods.contains(&Method::HoskingAsy) {
                return Err(Error::Config(
                    "hosking_asy is singular at d = 0; drop the method or the cell".into(),
                ));
            }
        }
        if self.t_values.is_empty() {
            return Err(Error::Config("no sample sizes requested".into()));
        }
        let t_min = *self.t_values.iter().min().expect("nonempty");
        if t_min < 8 {
            return Err(Error::Config("sample sizes below 8 are not useful".into()));
        }
        if self.r < 2 || self.b < 2 {
            return Err(Error::Config("R >= 2 and B >= 2 are required".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if self.stats.is_empty() {
            return Err(Error::Config("no statistics requested".into()));
        }
        if self.table_lags.is_empty() {
            return Err(Error::Config("table_lags must be nonempty".into()));
        }
        for &k in &self.table_lags {
            if k == 0 || k > t_min - 1 {
                return Err(Error::Config(format!(
                    "table lag {k} outside 1..={}",
                    t_min - 1
                )));
            }
        }
        if self.profile_max_lag > t_min - 1 {
            return Err(Error::Config(format!(
                "profile_max_lag {} exceeds T-1 = {}",
                self.profile_max_lag,
                t_min - 1
            )));
        }
        if !(self.sigma2 > 0.0) {
            return Err(Error::Config("sigma2 must be positive".into()));
        }
        if !(0.0 < self.splw_exponent && self.splw_exponent < 1.0) {
            return Err(Error::Config("splw_exponent must be in (0, 1)".into()));
        }
        if self.methods.contains(&Method::Kilian) && !self.stats.contains(&StatKind::Irf) {
            return Err(Error::Config("kilian applies to the irf only".into()));
        }
        if (self.methods.contains(&Method::HoskingAsy) || self.methods.contains(&Method::LeeKo))
            && !self.stats.contains(&StatKind::Acf)
        {
            return Err(Error::Config(
                "hosking_asy and lee_ko apply to the acf only".into(),
            ));
        }
        Ok(())
    }

    /// `unadjusted` first, then the requested methods in file order.
    pub fn methods_with_baseline(&self) -> Vec<Method> {
        let mut out = vec![Method::Unadjusted];
        for &m in &self.methods {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }

    /// Parses the flat `key = value` format (one pair per line, `#` starts a
    /// comment). Unknown keys are rejected.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut d_list: Option<Vec<f64>> = None;
        let mut phi_list: Option<Vec<f64>> = None;
        let mut cells: Option<Vec<(f64, f64)>> = None;
        let mut t_values = None;
        let mut r = None;
        let mut b = None;
        let mut methods = None;
        let mut stats: Option<Vec<StatKind>> = None;
        let mut table_lags = None;
        let mut profile_max_lag = None;
        let mut order_rule = None;
        let mut fit_method = None;
        let mut sigma2 = None;
        let mut seed = None;
        let mut splw_exponent = None;

        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| Error::Config(format!("line {}: bad {what}: '{value}'", lineno + 1));
            match key {
                "d" => d_list = Some(parse_f64_list(value).map_err(|_| bad("d list"))?),
                "phi" => phi_list = Some(parse_f64_list(value).map_err(|_| bad("phi list"))?),
                "d_phi" => {
                    let mut pairs = Vec::new();
                    for item in value.split(',') {
                        let (a, b) = item
                            .trim()
                            .split_once(':')
                            .ok_or_else(|| bad("d_phi pair (want d:phi)"))?;
                        pairs.push((
                            a.trim().parse().map_err(|_| bad("d_phi pair"))?,
                            b.trim().parse().map_err(|_| bad("d_phi pair"))?,
                        ));
                    }
                    cells = Some(pairs);
                }
                "T" => t_values = Some(parse_usize_list(value).map_err(|_| bad("T list"))?),
                "R" => r = Some(value.parse().map_err(|_| bad("R"))?),
                "B" => b = Some(value.parse().map_err(|_| bad("B"))?),
                "methods" => {
                    let mut list = Vec::new();
                    for item in value.split(',') {
                        list.push(Method::parse(item.trim())?);
                    }
                    methods = Some(list);
                }
                "stats" => {
                    let mut list = Vec::new();
                    for item in value.split(',') {
                        list.push(match item.trim() {
                            "acf" => StatKind::Acf,
                            "irf" => StatKind::Irf,
                            other => {
                                return Err(Error::Config(format!("unknown stat '{other}'")));
                            }
                        });
                    }
                    stats = Some(list);
                }
                "table_lags" => {
                    table_lags = Some(parse_usize_list(value).map_err(|_| bad("lag list"))?)
                }
                "profile_max_lag" => {
                    profile_max_lag = Some(value.parse().map_err(|_| bad("profile_max_lag"))?)
                }
                "order_rule" => {
                    order_rule = Some(match value {
                        "aic" => OrderRule::Aic,
                        "logsq" => OrderRule::FixedLogSq,
                        other => {
                            return Err(Error::Config(format!("unknown order rule '{other}'")));
                        }
                    })
                }
                "fit_method" => {
                    fit_method = Some(match value {
                        "burg" => FitMethod::Burg,
                        "yule_walker" => FitMethod::YuleWalker,
                        other => {
                            return Err(Error::Config(format!("unknown fit method '{other}'")));
                        }
                    })
                }
                "sigma2" => sigma2 = Some(value.parse().map_err(|_| bad("sigma2"))?),
                "seed" => seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "splw_exponent" => {
                    splw_exponent = Some(value.parse().map_err(|_| bad("splw_exponent"))?)
                }
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )));
                }
            }
        }

        let cells = match (cells, d_list, phi_list) {
            (Some(c), None, None) => c,
            (None, Some(ds), Some(ps)) => {
                let mut out = Vec::new();
                for &d in &ds {
                    for &p in &ps {
                        out.push((d, p));
                    }
                }
                out
            }
            (None, None, None) => {
                return Err(Error::Config(
                    "specify the grid via 'd_phi = d:phi, ...' or via 'd = ...' and 'phi = ...'"
                        .into(),
                ));
            }
            _ => {
                return Err(Error::Config(
                    "use either d_phi pairs or separate d/phi lists, not both".into(),
                ));
            }
        };

        let config = ExperimentConfig {
            cells,
            t_values: t_values.ok_or_else(|| Error::Config("missing key 'T'".into()))?,
            r: r.ok_or_else(|| Error::Config("missing key 'R'".into()))?,
            b: b.ok_or_else(|| Error::Config("missing key 'B'".into()))?,
            methods: methods.ok_or_else(|| Error::Config("missing key 'methods'".into()))?,
            stats: stats.unwrap_or_else(|| vec![StatKind::Irf, StatKind::Acf]),
            table_lags: table_lags.unwrap_or_else(|| vec![1, 3, 6, 9, 12]),
            profile_max_lag: profile_max_lag.unwrap_or(99),
            order_rule: order_rule.ok_or_else(|| Error::Config("missing key 'order_rule'".into()))?,
            fit_method: fit_method.unwrap_or(FitMethod::Burg),
            sigma2: sigma2.unwrap_or(1.0),
            seed: seed.ok_or_else(|| Error::Config("missing key 'seed'".into()))?,
            splw_exponent: splw_exponent.unwrap_or(0.65),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text)
    }

    /// Canonical text form, echoed into `run_meta` so a run is
    /// self-describing.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        let pairs: Vec<String> = self
            .cells
            .iter()
            .map(|(d, p)| format!("{d}:{p}"))
            .collect();
        out.push_str(&format!("d_phi = {}\n", pairs.join(", ")));
        out.push_str(&format!(
            "T = {}\n",
            self.t_values
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!("R = {}\n", self.r));
        out.push_str(&format!("B = {}\n", self.b));
        out.push_str(&format!(
            "methods = {}\n",
            self.methods
                .iter()
                .map(|m| m.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!(
            "stats = {}\n",
            self.stats
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!(
            "table_lags = {}\n",
            self.table_lags
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!("profile_max_lag = {}\n", self.profile_max_lag));
        out.push_str(&format!("order_rule = {}\n", self.order_rule.as_str()));
        out.push_str(&format!("fit_method = {}\n", self.fit_method.as_str()));
        out.push_str(&format!("sigma2 = {}\n", self.sigma2));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("splw_exponent = {}\n", self.splw_exponent));
        out
    }
}

fn parse_f64_list(value: &str) -> std::result::Result<Vec<f64>, std::num::ParseFloatError> {
    value.split(',').map(|v| v.trim().parse()).collect()
}

fn parse_usize_list(value: &str) -> std::result::Result<Vec<usize>, std::num::ParseIntError> {
    value.split(',').map(|v| v.trim().parse()).collect()
}
