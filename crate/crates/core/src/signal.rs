//! Deterministic signal objects: the stage-I pilot block, the stage-II sync
//! burst and the per-sample frequency rotation.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

/// Orthonormal pilot block, `τp × Ms`: row `n` is what the secondary antennas
/// send at time instant `n`, column `k` is the pilot sequence of antenna `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    entries: DMatrix<C64>,
}

impl PilotMatrix {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Pilot length `τp`.
    pub fn length(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of secondary antennas `Ms`.
    pub fn antennas(&self) -> usize {
        self.entries.ncols()
    }
}

/// Builds an orthonormal pilot block from the first `ms` columns of the
/// unitary `tau_p`-point DFT matrix. Every entry has modulus `1/√τp`.
pub fn make_orthonormal_pilots(tau_p: usize, ms: usize) -> Result<PilotMatrix> {
    if ms == 0 {
        return Err(Error::invalid("pilot block needs at least one antenna"));
    }
    if tau_p < ms {
        return Err(Error::invalid(format!(
            "pilot length {tau_p} is shorter than the antenna count {ms}"
        )));
    }
    let scale = 1.0 / (tau_p as f64).sqrt();
    let entries = DMatrix::from_fn(tau_p, ms, |n, k| {
        // (n·k) mod τp keeps the phase argument small for long blocks
        let phase = -2.0 * PI * ((n * k) % tau_p) as f64 / tau_p as f64;
        C64::from_polar(scale, phase)
    });
    Ok(PilotMatrix { entries })
}

/// Shape of the sync burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveformShape {
    /// `[1, sin(2πf), sin(4πf), …]`: a sinusoid whose first sample is 1.
    #[default]
    LeadingOne,
    /// `[0, sin(2πf), sin(4πf), …]`: a plain sampled sinusoid.
    PureSine,
}

impl WaveformShape {
    pub fn name(self) -> &'static str {
        match self {
            WaveformShape::LeadingOne => "leading_one",
            WaveformShape::PureSine => "pure_sine",
        }
    }
}

impl std::str::FromStr for WaveformShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading_one" => Ok(WaveformShape::LeadingOne),
            "pure_sine" => Ok(WaveformShape::PureSine),
            other => Err(Error::invalid(format!("unknown waveform shape `{other}`"))),
        }
    }
}

/// Real-valued stage-II sync burst of `N` samples.
///
/// Samples are stored 0-based; the rotation that rides on them is 1-based, so
/// sample `n - 1` is transmitted at time instant `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncWaveform {
    samples: Vec<f64>,
    cycles: Option<u32>,
}

impl SyncWaveform {
    /// Arbitrary real burst, for studies beyond the sinusoid.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::NotIdentifiable(format!(
                "sync signal length {} is below the minimum of 2",
                samples.len()
            )));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("sync signal has non-finite samples"));
        }
        Ok(SyncWaveform {
            samples,
            cycles: None,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Full sinusoid cycles, for bursts built by [`make_sync_signal`].
    pub fn cycles(&self) -> Option<u32> {
        self.cycles
    }

    /// Normalized tone frequency, `cycles / N`.
    pub fn frequency(&self) -> Option<f64> {
        self.cycles.map(|c| c as f64 / self.samples.len() as f64)
    }

    /// `‖x‖²`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    /// Sample transmitted at 1-based time instant `n`.
    pub fn at_instant(&self, n: usize) -> f64 {
        self.samples[n - 1]
    }
}

/// Sync burst with `cycles` full sinusoid periods over `n` samples, starting
/// with a literal 1.
pub fn make_sync_signal(n: usize, cycles: u32) -> Result<SyncWaveform> {
    make_sync_signal_with(n, cycles, WaveformShape::LeadingOne)
}

pub fn make_sync_signal_with(n: usize, cycles: u32, shape: WaveformShape) -> Result<SyncWaveform> {
    if n < 2 {
        return Err(Error::NotIdentifiable(format!(
            "sync signal length {n} is below the minimum of 2"
        )));
    }
    if cycles == 0 {
        return Err(Error::invalid("sync signal needs at least one cycle"));
    }
    if 2 * cycles as usize >= n {
        return Err(Error::invalid(format!(
            "{cycles} cycles in {n} samples is at or above half the sample rate"
        )));
    }
    let f = cycles as f64 / n as f64;
    let samples = (0..n)
        .map(|i| match (i, shape) {
            (0, WaveformShape::LeadingOne) => 1.0,
            _ => (2.0 * PI * f * i as f64).sin(),
        })
        .collect();
    Ok(SyncWaveform {
        samples,
        cycles: Some(cycles),
    })
}

/// Diagonal of per-sample phase rotations `exp(j2πnΔ)`, `n = 1..τ`.
///
/// Kept implicit: entries are evaluated on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationDiag {
    offset: f64,
    length: usize,
}

impl RotationDiag {
    /// Normalized offset Δ in cycles per sample.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Diagonal entry at 1-based index `n`.
    pub fn entry(&self, n: usize) -> C64 {
        phasor(n, self.offset)
    }

    pub fn entries(&self) -> Vec<C64> {
        (1..=self.length).map(|n| self.entry(n)).collect()
    }

    /// Dense `τ × τ` matrix form, mostly useful for checking.
    pub fn to_dense(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.entries()))
    }
}

/// `exp(j2πnΔ)` with the cycle count reduced modulo 1 before scaling by 2π.
pub(crate) fn phasor(n: usize, offset: f64) -> C64 {
    let cycles = n as f64 * offset;
    let frac = cycles - cycles.round();
    C64::from_polar(1.0, 2.0 * PI * frac)
}

pub fn rotation_diag(offset: f64, length: usize) -> Result<RotationDiag> {
    if length == 0 {
        return Err(Error::invalid("rotation length must be at least 1"));
    }
    if !offset.is_finite() {
        return Err(Error::invalid(format!("offset {offset} is not finite")));
    }
    Ok(RotationDiag { offset, length })
}

/// Right-multiplies `block` by `D` (or `D*` when `conjugate` is set): column
/// `n` (1-based) is scaled by `exp(±j2πnΔ)`.
pub fn apply_rotation(
    block: &DMatrix<C64>,
    rot: &RotationDiag,
    conjugate: bool,
) -> Result<DMatrix<C64>> {
    if block.ncols() != rot.length {
        return Err(Error::mismatch(
            "apply_rotation",
            format!("{} columns", rot.length),
            format!("{} columns", block.ncols()),
        ));
    }
    let mut out = block.clone();
    for (col, mut column) in out.column_iter_mut().enumerate() {
        let mut w = rot.entry(col + 1);
        if conjugate {
            w = w.conj();
        }
        column *= w;
    }
    Ok(out)
}
