use super::{draw_offset, trial_with_offset, Fixture, TrialStatus};
use crate::config::ExperimentConfig;
use crate::estimator::wrap_offset;
use crate::protocol::Scheme;
use crate::Result;

/// Outcome of one secondary panel's synchronization round.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelOutcome {
    pub panel: usize,
    pub delta_true: f64,
    pub delta_hat: f64,
    /// Offset left after the panel applies `-delta_hat`.
    pub residual: f64,
    pub status: TrialStatus,
}

/// Synchronizes `panels` secondary panels to the primary one after another.
/// Panel `i` has its own channel and offset, drawn as for trial `i`, so
/// panel 0 reproduces `run_trial(cfg, BeamSync, snr, 0)`.
pub fn run_multi_panel_schedule(
    cfg: &ExperimentConfig,
    panels: usize,
    snr_db: f64,
) -> Result<Vec<PanelOutcome>> {
    let fx = Fixture::new(cfg)?;
    (0..panels)
        .map(|i| {
            let t = i as u64;
            let r = trial_with_offset(cfg, &fx, Scheme::BeamSync, snr_db, t, draw_offset(cfg, t))?;
            Ok(PanelOutcome {
                panel: i,
                delta_true: r.delta_true,
                delta_hat: r.delta_hat,
                residual: wrap_offset(r.delta_true - r.delta_hat),
                status: r.status,
            })
        })
        .collect()
}
