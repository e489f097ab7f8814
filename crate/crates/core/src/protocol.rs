//! The two protocol stages and the transmit / receive beam selection rules.
//!
//! Stage I: the secondary sends the pilot block `Φ`, the primary receives
//! `Y_p = √ρ G Φ^H D_{Δ,τp} + W_p`.
//! Stage II: the primary beamforms the real burst `x` along `a`, the secondary
//! receives `Y_s = √ρ G^T a x^T D*_{Δ,N} + W_s`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::channel::ChannelMatrix;
use crate::linalg::{complex_gaussian_matrix, dominant_left_singular};
use crate::signal::{apply_rotation, rotation_diag, PilotMatrix, SyncWaveform};
use crate::{Error, Result, C64};

/// Unit-norm complex beamforming (or combining) vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector {
    weights: DVector<C64>,
}

impl BeamVector {
    /// Scales `weights` to unit norm.
    pub fn normalized(weights: DVector<C64>) -> Result<Self> {
        let norm = weights.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Degenerate(
                "beam weights have zero or non-finite norm".into(),
            ));
        }
        Ok(BeamVector {
            weights: weights.unscale(norm),
        })
    }

    pub fn weights(&self) -> &DVector<C64> {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn conjugate(&self) -> BeamVector {
        BeamVector {
            weights: self.weights.conjugate(),
        }
    }

    /// `|⟨self, other⟩|`, the alignment of two beams up to a common phase.
    pub fn alignment(&self, other: &BeamVector) -> f64 {
        self.weights.dotc(&other.weights).norm()
    }
}

/// Which panel received a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiveSide {
    Primary,
    Secondary,
}

/// Antennas × time block of received samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    pub entries: DMatrix<C64>,
    /// Linear SNR `ρ` the block was generated at.
    pub snr: f64,
    pub side: ReceiveSide,
}

impl ReceivedBlock {
    pub fn antennas(&self) -> usize {
        self.entries.nrows()
    }

    pub fn time_len(&self) -> usize {
        self.entries.ncols()
    }
}

/// Beam selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Transmit beam from the SVD of the stage-I block.
    BeamSync,
    /// Transmit beam from the SVD of the true channel.
    BeamSyncGenie,
    /// Transmit and receive beams picked from DFT codebooks by received power.
    Analog,
    /// Codebook beams picked from the true channel.
    AnalogGenie,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::BeamSync,
        Scheme::BeamSyncGenie,
        Scheme::Analog,
        Scheme::AnalogGenie,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::BeamSync => "beamsync",
            Scheme::BeamSyncGenie => "beamsync_genie",
            Scheme::Analog => "analog",
            Scheme::AnalogGenie => "analog_genie",
        }
    }

    /// Whether the scheme needs the stage-I block.
    pub fn uses_stage1(self) -> bool {
        matches!(self, Scheme::BeamSync | Scheme::Analog)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scheme `{s}`")))
    }
}

/// Everything the two stages need about one primary–secondary link.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncLinkState {
    /// Normalized carrier offset Δ in cycles per sample.
    pub true_offset: f64,
    /// Linear SNR `ρ`.
    pub snr: f64,
    pub channel: ChannelMatrix,
    pub scheme: Scheme,
    /// Multiplier on the noise standard deviation; 1 for the physical model,
    /// 0 for noiseless runs.
    pub noise_scale: f64,
}

impl SyncLinkState {
    pub fn new(channel: ChannelMatrix, true_offset: f64, snr: f64, scheme: Scheme) -> Result<Self> {
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::invalid(format!(
                "SNR must be positive and finite, got {snr}"
            )));
        }
        if !true_offset.is_finite() {
            return Err(Error::invalid("offset must be finite"));
        }
        Ok(SyncLinkState {
            true_offset,
            snr,
            channel,
            scheme,
            noise_scale: 1.0,
        })
    }

    pub fn with_noise_scale(mut self, scale: f64) -> Self {
        self.noise_scale = scale;
        self
    }
}

/// Stage I at the primary: `√ρ G Φ^H D_{Δ,τp} + W_p`, `Mp × τp`.
pub fn stage1_receive<R: Rng + ?Sized>(
    link: &SyncLinkState,
    pilots: &PilotMatrix,
    rng: &mut R,
) -> Result<ReceivedBlock> {
    let g = link.channel.entries();
    if g.ncols() != pilots.antennas() {
        return Err(Error::mismatch(
            "stage1_receive",
            format!("pilots for {} antennas", g.ncols()),
            format!("pilots for {} antennas", pilots.antennas()),
        ));
    }
    let clean = g * pilots.entries().adjoint() * C64::new(link.snr.sqrt(), 0.0);
    let rot = rotation_diag(link.true_offset, pilots.length())?;
    let mut y = apply_rotation(&clean, &rot, false)?;
    y += complex_gaussian_matrix(g.nrows(), pilots.length(), link.noise_scale, rng);
    Ok(ReceivedBlock {
        entries: y,
        snr: link.snr,
        side: ReceiveSide::Primary,
    })
}

/// BeamSync transmit beam: conjugate of the dominant left singular vector of
/// the stage-I block.
pub fn estimate_beam_direction(yp: &ReceivedBlock) -> Result<BeamVector> {
    let (u, _) = dominant_left_singular(&yp.entries, "stage-I block")?;
    BeamVector::normalized(u.conjugate())
}

/// Genie transmit beam `u₁*` from `G = UΣV^H`; it maximizes `‖G^T a‖²` over
/// unit vectors since that is the Rayleigh quotient of `G* G^T`.
pub fn genie_beam_direction(g: &ChannelMatrix) -> Result<BeamVector> {
    let (u, _) = dominant_left_singular(g.entries(), "channel")?;
    BeamVector::normalized(u.conjugate())
}

/// Stage II at the secondary: `√ρ (G^T a) x^T D*_{Δ,N} + W_s`, `Ms × N`.
pub fn stage2_receive<R: Rng + ?Sized>(
    link: &SyncLinkState,
    beam: &BeamVector,
    x: &SyncWaveform,
    rng: &mut R,
) -> Result<ReceivedBlock> {
    let g = link.channel.entries();
    if beam.len() != g.nrows() {
        return Err(Error::mismatch(
            "stage2_receive",
            format!("beam of length {}", g.nrows()),
            format!("beam of length {}", beam.len()),
        ));
    }
    let b = g.transpose() * beam.weights() * C64::new(link.snr.sqrt(), 0.0);
    let n = x.len();
    let mut y = DMatrix::from_fn(g.ncols(), n, |m, t| b[m] * x.samples()[t]);
    y = apply_rotation(&y, &rotation_diag(link.true_offset, n)?, true)?;
    y += complex_gaussian_matrix(g.ncols(), n, link.noise_scale, rng);
    Ok(ReceivedBlock {
        entries: y,
        snr: link.snr,
        side: ReceiveSide::Secondary,
    })
}

/// `M` orthonormal DFT beams; beam `k` has entries `exp(−j2πkm/M)/√M`.
pub fn dft_codebook(m: usize) -> Vec<BeamVector> {
    let scale = 1.0 / (m as f64).sqrt();
    (0..m)
        .map(|k| {
            let w = DVector::from_fn(m, |i, _| {
                let phase = -2.0 * std::f64::consts::PI * ((k * i) % m) as f64 / m as f64;
                C64::from_polar(scale, phase)
            });
            BeamVector { weights: w }
        })
        .collect()
}

/// A codebook entry together with the beam actually applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookChoice {
    pub index: usize,
    pub beam: BeamVector,
}

/// `argmax_k ‖f_k^H Y‖²`; the first index wins ties.
fn strongest_codeword(
    y: &DMatrix<C64>,
    codebook: &[BeamVector],
    context: &'static str,
) -> Result<usize> {
    if codebook.is_empty() {
        return Err(Error::invalid(format!("{context}: empty codebook")));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (k, f) in codebook.iter().enumerate() {
        if f.len() != y.nrows() {
            return Err(Error::mismatch(
                context,
                format!("beams of length {}", y.nrows()),
                f.len(),
            ));
        }
        let power = (f.weights().adjoint() * y).norm_squared();
        if power > best.1 {
            best = (k, power);
        }
    }
    Ok(best.0)
}

/// Analog transmit beam at the primary: `f_k*` for the codeword capturing the
/// most stage-I power.
pub fn analog_select_tx(yp: &ReceivedBlock, codebook: &[BeamVector]) -> Result<CodebookChoice> {
    let index = strongest_codeword(&yp.entries, codebook, "analog_select_tx")?;
    Ok(CodebookChoice {
        index,
        beam: codebook[index].conjugate(),
    })
}

/// Analog receive beam at the secondary: `f_l` for the codeword capturing the
/// most stage-II power.
pub fn analog_select_rx(ys: &ReceivedBlock, codebook: &[BeamVector]) -> Result<CodebookChoice> {
    let index = strongest_codeword(&ys.entries, codebook, "analog_select_rx")?;
    Ok(CodebookChoice {
        index,
        beam: codebook[index].clone(),
    })
}

/// Joint codebook search on the true channel: `argmax |f_{p,k}^H G f_{s,l}|²`,
/// lexicographically lowest `(k, l)` on ties.
///
/// The transmit beam is `f_{p,k}*`. The returned receive combiner is
/// `f_{s,l}*`: combining as `a_s^H Y_s` then yields exactly the gain
/// `|f_{p,k}^H G f_{s,l}|` that the search maximized.
pub fn analog_genie_select(
    g: &ChannelMatrix,
    tx_codebook: &[BeamVector],
    rx_codebook: &[BeamVector],
) -> Result<(CodebookChoice, CodebookChoice)> {
    if tx_codebook.is_empty() || rx_codebook.is_empty() {
        return Err(Error::invalid("analog_genie_select: empty codebook"));
    }
    let gm = g.entries();
    let mut best = (0, 0, f64::NEG_INFINITY);
    for (k, fp) in tx_codebook.iter().enumerate() {
        if fp.len() != gm.nrows() {
            return Err(Error::mismatch("analog_genie_select", gm.nrows(), fp.len()));
        }
        let row = fp.weights().adjoint() * gm;
        for (l, fs) in rx_codebook.iter().enumerate() {
            if fs.len() != gm.ncols() {
                return Err(Error::mismatch("analog_genie_select", gm.ncols(), fs.len()));
            }
            let gain = (&row * fs.weights())[(0, 0)].norm_sqr();
            if gain > best.2 {
                best = (k, l, gain);
            }
        }
    }
    let (k, l, _) = best;
    Ok((
        CodebookChoice {
            index: k,
            beam: tx_codebook[k].conjugate(),
        },
        CodebookChoice {
            index: l,
            beam: rx_codebook[l].conjugate(),
        },
    ))
}

/// Applies a receive combiner: `a_s^H Y_s`, a `1 × N` block. The noise stays
/// unit-variance because `‖a_s‖ = 1`.
pub fn collapse_rx_beam(ys: &ReceivedBlock, a_s: &BeamVector) -> Result<ReceivedBlock> {
    if a_s.len() != ys.antennas() {
        return Err(Error::mismatch(
            "collapse_rx_beam",
            ys.antennas(),
            a_s.len(),
        ));
    }
    Ok(ReceivedBlock {
        entries: DMatrix::from_row_slice(
            1,
            ys.time_len(),
            (a_s.weights().adjoint() * &ys.entries).as_slice(),
        ),
        snr: ys.snr,
        side: ys.side,
    })
}
