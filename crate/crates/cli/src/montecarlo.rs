//! Monte Carlo campaigns over lens widths and SNRs.

use std::path::{Path, PathBuf};

use lens_crlb::simulate::monte_carlo_variance;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::format::sig12;
use crate::sweep::{csv_writer, finish, parse_csv, write_file};

pub const MC_HEADER: [&str; 7] = [
    "sigma_c",
    "snr_db",
    "trials",
    "doa_bias",
    "doa_variance",
    "crlb",
    "efficiency",
];
pub const MC_FILE: &str = "montecarlo.csv";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McRow {
    pub sigma_c: f64,
    pub snr_db: f64,
    pub trials: usize,
    pub doa_bias: f64,
    pub doa_variance: f64,
    pub crlb: f64,
    pub efficiency: f64,
}

impl McRow {
    /// `crlb * (1 - 3 sqrt(2 / trials))`: the bound minus a three-sigma
    /// allowance for the sampling error of a variance estimate.
    pub fn dominance_floor(&self) -> f64 {
        self.crlb * (1.0 - 3.0 * (2.0 / self.trials as f64).sqrt())
    }
}

pub fn rows_to_csv(rows: &[McRow]) -> String {
    let mut w = csv_writer();
    w.write_record(MC_HEADER).expect("in-memory write");
    for r in rows {
        w.write_record([
            sig12(r.sigma_c),
            sig12(r.snr_db),
            r.trials.to_string(),
            sig12(r.doa_bias),
            sig12(r.doa_variance),
            sig12(r.crlb),
            sig12(r.efficiency),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn rows_from_csv(text: &str, path: &Path) -> Result<Vec<McRow>> {
    parse_csv(text, path, &MC_HEADER)?
        .into_iter()
        .map(|f| {
            if f[2].fract() != 0.0 || f[2] < 0.0 {
                return Err(CliError::Csv {
                    path: path.to_path_buf(),
                    reason: format!("trial count {} is not a whole number", f[2]),
                });
            }
            Ok(McRow {
                sigma_c: f[0],
                snr_db: f[1],
                trials: f[2] as usize,
                doa_bias: f[3],
                doa_variance: f[4],
                crlb: f[5],
                efficiency: f[6],
            })
        })
        .collect()
}

/// One campaign per `(sigma_c, snr_db)`, lens widths outer. Every campaign
/// reuses the configured master seed, so the rows share their noise draws
/// up to scaling.
pub fn compute_montecarlo(config: &ExperimentConfig) -> Result<Vec<McRow>> {
    config.validate()?;
    let mc = config
        .mc
        .as_ref()
        .ok_or_else(|| CliError::Config("the configuration has no \"mc\" section".into()))?;
    let cfg = config.array_config()?;
    let mut rows = Vec::with_capacity(config.sigma_c_list.len() * mc.snr_list_db.len());
    for &sigma_c in &config.sigma_c_list {
        let lens = config.lens_config(sigma_c)?;
        for &snr_db in &mc.snr_list_db {
            let params = config.mc_params(mc, snr_db)?;
            let report = monte_carlo_variance(&cfg, &lens, &params, mc.trials, mc.master_seed, mc.search())?;
            rows.push(McRow {
                sigma_c,
                snr_db,
                trials: report.trials,
                doa_bias: report.doa_bias,
                doa_variance: report.doa_variance,
                crlb: report.crlb,
                efficiency: report.efficiency,
            });
        }
    }
    Ok(rows)
}

/// Runs the campaigns and writes `montecarlo.csv` into `out_dir`.
pub fn run_montecarlo(config: &ExperimentConfig, out_dir: &Path) -> Result<(Vec<McRow>, PathBuf)> {
    let rows = compute_montecarlo(config)?;
    let path = out_dir.join(MC_FILE);
    write_file(&path, &rows_to_csv(&rows))?;
    Ok((rows, path))
}
