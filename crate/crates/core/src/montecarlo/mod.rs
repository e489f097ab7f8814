//! Trial orchestration: single protocol rounds, SNR sweeps, the multi-panel
//! schedule and the oscillator drift timeline.
//!
//! Randomness is counter-based. Every trial owns a ChaCha stream selected by
//! its index, and each kind of draw (channel, offset, stage noises) reads
//! from its own block of that stream. A trial therefore sees the same
//! channel, offset and noise realizations for every scheme and SNR point,
//! and the results do not depend on which worker ran it.

mod drift;
mod schedule;
mod sweep;

pub use drift::{simulate_drift_timeline, DriftEvent, DriftSlot, DriftTimeline, OscillatorState};
pub use schedule::{run_multi_panel_schedule, PanelOutcome};
pub use sweep::{run_sweep, run_sweep_detailed, RmseCurve, RmsePoint, SweepOutput};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{rayleigh_channel, ChannelMatrix};
use crate::config::{db_to_linear, ChannelModel, ExperimentConfig, OffsetModel};
use crate::crb::crb_closed_form;
use crate::estimator::{estimate_offset, wrap_offset, OffsetEstimate};
use crate::protocol::{
    analog_genie_select, analog_select_rx, analog_select_tx, collapse_rx_beam, dft_codebook,
    estimate_beam_direction, genie_beam_direction, stage1_receive, stage2_receive, BeamVector,
    Scheme, SyncLinkState,
};
use crate::signal::{make_orthonormal_pilots, make_sync_signal_with, SyncWaveform};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Purpose {
    Channel = 0,
    Offset = 1,
    Stage1Noise = 2,
    Stage2Noise = 3,
    Drift = 4,
}

/// Random stream for one draw kind of one trial.
pub(crate) fn trial_rng(master_seed: u64, trial_index: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng.set_word_pos((purpose as u128) << 48);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialStatus {
    Ok,
    /// The round produced nothing to estimate from. The trial still counts,
    /// with no correction applied (`delta_hat = 0`).
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub trial_index: u64,
    pub delta_true: f64,
    pub delta_hat: f64,
    /// Squared wrap-around distance between estimate and truth.
    pub squared_error: f64,
    /// `|⟨a, a_genie⟩|` for the transmit beam actually used.
    pub beam_alignment: f64,
    pub objective_value: f64,
    /// CRB evaluated at the genie effective channel of this trial.
    pub crb: f64,
    pub status: TrialStatus,
}

/// Per-experiment quantities that do not change between trials.
pub(crate) struct Fixture {
    pub x: SyncWaveform,
    los: Option<ChannelMatrix>,
    tx_codebook: Vec<BeamVector>,
    rx_codebook: Vec<BeamVector>,
}

impl Fixture {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let los = match &cfg.channel {
            ChannelModel::Rayleigh => None,
            ChannelModel::Los(scene) => Some(scene.channel()?),
        };
        Ok(Fixture {
            x: make_sync_signal_with(cfg.n, cfg.cycles, cfg.shape)?,
            los,
            tx_codebook: dft_codebook(cfg.mp),
            rx_codebook: dft_codebook(cfg.ms),
        })
    }

    fn channel(&self, cfg: &ExperimentConfig, trial_index: u64) -> Result<ChannelMatrix> {
        match &self.los {
            Some(g) => Ok(g.clone()),
            None => rayleigh_channel(
                cfg.mp,
                cfg.ms,
                &mut trial_rng(cfg.master_seed, trial_index, Purpose::Channel),
            ),
        }
    }
}

pub(crate) fn draw_offset(cfg: &ExperimentConfig, trial_index: u64) -> f64 {
    match cfg.offset {
        OffsetModel::Fixed(v) => v,
        OffsetModel::Uniform { low, high } => {
            trial_rng(cfg.master_seed, trial_index, Purpose::Offset).random_range(low..high)
        }
    }
}

/// Failures that leave a trial without an estimate rather than aborting the
/// experiment.
fn is_trial_failure(e: &Error) -> bool {
    matches!(e, Error::Degenerate(_) | Error::NotIdentifiable(_))
}

struct Round {
    beam: BeamVector,
    estimate: OffsetEstimate,
}

fn run_round(
    cfg: &ExperimentConfig,
    fx: &Fixture,
    link: &SyncLinkState,
    trial_index: u64,
) -> Result<Round> {
    let seed = cfg.master_seed;
    let stage1 = |link: &SyncLinkState| {
        let pilots = make_orthonormal_pilots(cfg.tau_p, cfg.ms)?;
        stage1_receive(
            link,
            &pilots,
            &mut trial_rng(seed, trial_index, Purpose::Stage1Noise),
        )
    };
    let mut noise2 = trial_rng(seed, trial_index, Purpose::Stage2Noise);
    let (beam, rx) = match link.scheme {
        Scheme::BeamSync => (estimate_beam_direction(&stage1(link)?)?, None),
        Scheme::BeamSyncGenie => (genie_beam_direction(&link.channel)?, None),
        Scheme::Analog => (
            analog_select_tx(&stage1(link)?, &fx.tx_codebook)?.beam,
            None,
        ),
        Scheme::AnalogGenie => {
            let (tx, rx) = analog_genie_select(&link.channel, &fx.tx_codebook, &fx.rx_codebook)?;
            (tx.beam, Some(rx.beam))
        }
    };
    let ys = stage2_receive(link, &beam, &fx.x, &mut noise2)?;
    let ys = match link.scheme {
        Scheme::BeamSync | Scheme::BeamSyncGenie => ys,
        Scheme::Analog => {
            let rx = analog_select_rx(&ys, &fx.rx_codebook)?;
            collapse_rx_beam(&ys, &rx.beam)?
        }
        Scheme::AnalogGenie => collapse_rx_beam(&ys, rx.as_ref().expect("genie receive beam"))?,
    };
    let estimate = estimate_offset(&ys, &fx.x, &cfg.estimator)?;
    Ok(Round { beam, estimate })
}

/// Channel realization of trial `trial_index`; the fixed scene for LoS.
pub fn trial_channel(cfg: &ExperimentConfig, trial_index: u64) -> Result<ChannelMatrix> {
    Fixture::new(cfg)?.channel(cfg, trial_index)
}

/// One protocol round with a given true offset.
pub(crate) fn trial_with_offset(
    cfg: &ExperimentConfig,
    fx: &Fixture,
    scheme: Scheme,
    snr_db: f64,
    trial_index: u64,
    delta_true: f64,
) -> Result<TrialResult> {
    let rho = db_to_linear(snr_db);
    let g = fx.channel(cfg, trial_index)?;
    let genie = genie_beam_direction(&g).ok();
    let crb = match &genie {
        Some(a) => {
            let b = g.entries().transpose() * a.weights();
            crb_closed_form(&fx.x, &b, rho)? * cfg.noise_scale * cfg.noise_scale
        }
        None => f64::INFINITY,
    };
    let link = SyncLinkState::new(g, delta_true, rho, scheme)?.with_noise_scale(cfg.noise_scale);
    let mut result = TrialResult {
        scheme,
        snr_db,
        trial_index,
        delta_true,
        delta_hat: 0.0,
        squared_error: wrap_offset(delta_true).powi(2),
        beam_alignment: 0.0,
        objective_value: 0.0,
        crb,
        status: TrialStatus::Ok,
    };
    match run_round(cfg, fx, &link, trial_index) {
        Ok(round) => {
            result.delta_hat = round.estimate.delta_hat;
            result.squared_error = wrap_offset(round.estimate.delta_hat - delta_true).powi(2);
            result.objective_value = round.estimate.objective_value;
            result.beam_alignment = genie.map_or(0.0, |a| round.beam.alignment(&a));
        }
        Err(e) if is_trial_failure(&e) => result.status = TrialStatus::Failed(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(result)
}

/// One full protocol round for trial `trial_index` at `snr_db`. The result
/// depends only on the config, the scheme, the SNR and the index.
pub fn run_trial(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    snr_db: f64,
    trial_index: u64,
) -> Result<TrialResult> {
    let fx = Fixture::new(cfg)?;
    trial_with_offset(
        cfg,
        &fx,
        scheme,
        snr_db,
        trial_index,
        draw_offset(cfg, trial_index),
    )
}
