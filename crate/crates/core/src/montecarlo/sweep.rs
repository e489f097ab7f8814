use std::fmt::Write as _;

use rayon::prelude::*;

use super::{draw_offset, trial_with_offset, Fixture, TrialResult, TrialStatus};
use crate::config::ExperimentConfig;
use crate::protocol::Scheme;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RmsePoint {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trials: usize,
    pub rmse: f64,
    /// Mean of `√CRB` over the realized genie channels.
    pub crb_sqrt_avg: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseCurve {
    pub points: Vec<RmsePoint>,
    pub fingerprint: String,
}

impl RmseCurve {
    pub const CSV_HEADER: &'static str = "scheme,snr_db,trials,rmse,crb_sqrt_avg";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{},{},{:e},{:e}",
                p.scheme, p.snr_db, p.trials, p.rmse, p.crb_sqrt_avg
            );
        }
        s
    }

    pub fn point(&self, scheme: Scheme, snr_db: f64) -> Option<&RmsePoint> {
        self.points
            .iter()
            .find(|p| p.scheme == scheme && p.snr_db == snr_db)
    }

    /// Points of one scheme in SNR-grid order.
    pub fn series(&self, scheme: Scheme) -> Vec<&RmsePoint> {
        self.points.iter().filter(|p| p.scheme == scheme).collect()
    }
}

/// Curve plus every trial, grouped by `(scheme, snr)` in config order.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub curve: RmseCurve,
    pub trials: Vec<Vec<TrialResult>>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))
}

/// Runs every `(scheme, snr, trial)` cell. `workers = 0` uses one worker
/// per core. Trials are collected by index and reduced sequentially, so
/// the output does not depend on `workers`.
pub fn run_sweep_detailed(cfg: &ExperimentConfig, workers: usize) -> Result<SweepOutput> {
    let fx = Fixture::new(cfg)?;
    let offsets: Vec<f64> = (0..cfg.trials as u64)
        .map(|t| draw_offset(cfg, t))
        .collect();
    let cells: Vec<(Scheme, f64)> = cfg
        .schemes
        .iter()
        .flat_map(|&s| cfg.snr_grid_db.iter().map(move |&snr| (s, snr)))
        .collect();
    let total = cells.len() * cfg.trials;
    let results: Vec<TrialResult> = pool(workers)?.install(|| {
        (0..total)
            .into_par_iter()
            .map(|i| {
                let (scheme, snr_db) = cells[i / cfg.trials];
                let t = i % cfg.trials;
                trial_with_offset(cfg, &fx, scheme, snr_db, t as u64, offsets[t])
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut points = Vec::with_capacity(cells.len());
    let mut grouped = Vec::with_capacity(cells.len());
    for (chunk, &(scheme, snr_db)) in results.chunks(cfg.trials).zip(&cells) {
        let count = chunk.len() as f64;
        let mse = chunk.iter().map(|r| r.squared_error).sum::<f64>() / count;
        let crb_sqrt_avg = chunk.iter().map(|r| r.crb.sqrt()).sum::<f64>() / count;
        points.push(RmsePoint {
            scheme,
            snr_db,
            trials: chunk.len(),
            rmse: mse.sqrt(),
            crb_sqrt_avg,
            failures: chunk.iter().filter(|r| r.status != TrialStatus::Ok).count(),
        });
        grouped.push(chunk.to_vec());
    }
    Ok(SweepOutput {
        curve: RmseCurve {
            points,
            fingerprint: cfg.fingerprint(),
        },
        trials: grouped,
    })
}

pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<RmseCurve> {
    Ok(run_sweep_detailed(cfg, workers)?.curve)
}
