use std::fmt::{self, Write as _};

use rand::Rng;
use rand_distr::StandardNormal;

use super::{draw_offset, trial_rng, trial_with_offset, Fixture, Purpose};
use crate::config::ExperimentConfig;
use crate::estimator::wrap_offset;
use crate::Result;

/// Local oscillator of one panel, as a deviation from the common nominal
/// frequency in cycles per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorState {
    pub panel: usize,
    pub nominal_hz: f64,
    pub deviation: f64,
}

impl OscillatorState {
    /// `Δ = f_p − f_s` between `self` as primary and `secondary`.
    pub fn offset_to(&self, secondary: &OscillatorState) -> f64 {
        self.deviation - secondary.deviation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftEvent {
    None,
    ColdStart,
    Resync,
}

impl fmt::Display for DriftEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DriftEvent::None => "none",
            DriftEvent::ColdStart => "cold_start",
            DriftEvent::Resync => "resync",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSlot {
    pub slot: usize,
    /// Offset left after compensation at the end of the slot.
    pub residual: f64,
    pub event: DriftEvent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftTimeline {
    pub slots: Vec<DriftSlot>,
}

impl DriftTimeline {
    pub const CSV_HEADER: &'static str = "slot,residual,event";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for row in &self.slots {
            let _ = writeln!(s, "{},{:e},{}", row.slot, row.residual, row.event);
        }
        s
    }

    /// Slots in which a synchronization round ran.
    pub fn sync_slots(&self) -> Vec<usize> {
        self.slots
            .iter()
            .filter(|r| r.event != DriftEvent::None)
            .map(|r| r.slot)
            .collect()
    }
}

/// The secondary oscillator drifts by `rate + jitter·N(0,1)` per slot. Slot
/// 0 is a cold-start round; afterwards a round runs whenever the residual
/// exceeds the threshold, and the estimate is added to the correction.
/// The round in slot `s` uses the channel and noise of trial `s`.
pub fn simulate_drift_timeline(cfg: &ExperimentConfig) -> Result<DriftTimeline> {
    let fx = Fixture::new(cfg)?;
    let d = cfg.drift;
    let primary = OscillatorState {
        panel: 0,
        nominal_hz: 0.0,
        deviation: 0.0,
    };
    let mut secondary = OscillatorState {
        panel: 1,
        nominal_hz: 0.0,
        deviation: -draw_offset(cfg, 0),
    };
    let mut walk = trial_rng(cfg.master_seed, 0, Purpose::Drift);
    let mut correction = 0.0;
    let mut slots = Vec::with_capacity(d.slots);
    for slot in 0..d.slots {
        if slot > 0 {
            let step: f64 = walk.sample(StandardNormal);
            secondary.deviation -= d.rate + d.jitter * step;
        }
        let delta = primary.offset_to(&secondary);
        let mut residual = wrap_offset(delta - correction);
        let event = if slot == 0 {
            DriftEvent::ColdStart
        } else if residual.abs() > d.resync_threshold {
            DriftEvent::Resync
        } else {
            DriftEvent::None
        };
        if event != DriftEvent::None {
            let r = trial_with_offset(cfg, &fx, d.scheme, d.snr_db, slot as u64, residual)?;
            correction += r.delta_hat;
            residual = wrap_offset(delta - correction);
        }
        slots.push(DriftSlot {
            slot,
            residual,
            event,
        });
    }
    Ok(DriftTimeline { slots })
}
