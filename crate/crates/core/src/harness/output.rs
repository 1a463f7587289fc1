//! CSV and metadata emission.
//!
//! Layout under the output directory:
//!
//! * `table_irf.csv`, `table_acf.csv` — bias/RMSE tables over all cells,
//!   columns `d,phi,T,order_rule,method,k,bias,rmse,mc_se,n_ok`, one `av`
//!   row per method averaging the k in {1,3,6,9,12}.
//! * `panel_<stat>_k<k>.csv` — figure panel densities, columns `x` plus one
//!   density column per curve (`mc_density`, `mc_ba_density`,
//!   `bs_av_density`, and `ba_asy_density`/`ba_lk_density`/
//!   `ba_kilian_density` when those methods were requested).
//! * `profile_<stat>.csv` — lag profiles `k,truth,mc_mean,mc_ba_mean`
//!   (the adjusted column is suffixed with the method name when several
//!   adjustment methods are in the run).
//! * `run_meta.txt` — config echo, RNG identifier, software version.
//!
//! Panels and profiles land next to the tables for single-cell runs and in
//! `d<d>_phi<phi>_T<T>/` subdirectories otherwise. All files use `.` as the
//! decimal separator and every row is newline-terminated.

use super::runner::{CellResult, ExperimentResult};
use crate::error::Result;
use crate::estimators::StatKind;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

fn write_file(path: &PathBuf, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn table_csv(result: &ExperimentResult, stat: StatKind) -> String {
    let mut out = String::from("d,phi,T,order_rule,method,k,bias,rmse,mc_se,n_ok\n");
    for cell in &result.cells {
        for row in &cell.rows {
            if row.stat != stat {
                continue;
            }
            let k = row
                .lag
                .map(|l| l.to_string())
                .unwrap_or_else(|| "av".into());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                cell.d,
                cell.phi,
                cell.t,
                result.config.order_rule.as_str(),
                row.method.as_str(),
                k,
                row.bias,
                row.rmse,
                row.mc_se,
                row.n_ok
            );
        }
    }
    out
}

fn cell_dir(result: &ExperimentResult, cell: &CellResult, base: &Path) -> PathBuf {
    if result.cells.len() == 1 {
        base.to_path_buf()
    } else {
        base.join(format!("d{}_phi{}_T{}", cell.d, cell.phi, cell.t))
    }
}

/// Writes all output files; returns the paths written.
pub fn emit_outputs(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    for stat in [StatKind::Irf, StatKind::Acf] {
        let path = dir.join(format!("table_{}.csv", stat.as_str()));
        write_file(&path, &table_csv(result, stat))?;
        written.push(path);
    }

    for cell in &result.cells {
        let cdir = cell_dir(result, cell, dir);
        std::fs::create_dir_all(&cdir)?;

        for panel in &cell.panels {
            let mut out = String::from("x");
            for (label, _) in &panel.curves {
                let _ = write!(out, ",{label}");
            }
            out.push('\n');
            for (i, x) in panel.xs.iter().enumerate() {
                let _ = write!(out, "{x}");
                for (_, dens) in &panel.curves {
                    let _ = write!(out, ",{}", dens[i]);
                }
                out.push('\n');
            }
            let path = cdir.join(format!("panel_{}_k{}.csv", panel.stat.as_str(), panel.lag));
            write_file(&path, &out)?;
            written.push(path);
        }

        for profile in &cell.profiles {
            let single = profile.ba_means.len() == 1;
            let mut out = String::from("k,truth,mc_mean");
            for (method, _) in &profile.ba_means {
                if single {
                    out.push_str(",mc_ba_mean");
                } else {
                    let _ = write!(out, ",mc_ba_mean_{}", method.as_str());
                }
            }
            out.push('\n');
            for (i, k) in profile.lags.iter().enumerate() {
                let _ = write!(out, "{k},{},{}", profile.truth[i], profile.mc_mean[i]);
                for (_, means) in &profile.ba_means {
                    let _ = write!(out, ",{}", means[i]);
                }
                out.push('\n');
            }
            let path = cdir.join(format!("profile_{}.csv", profile.stat.as_str()));
            write_file(&path, &out)?;
            written.push(path);
        }
    }

    let mut meta = String::new();
    let _ = writeln!(meta, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(meta, "rng = {}", crate::rng::RNG_ID);
    meta.push_str(&result.config.to_canonical_string());
    let path = dir.join("run_meta.txt");
    write_file(&path, &meta)?;
    written.push(path);

    Ok(written)
}
