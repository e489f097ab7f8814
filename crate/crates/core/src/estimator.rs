//! Joint maximum-likelihood estimation of the carrier offset and the
//! effective channel from a stage-II block.
//!
//! With `b` treated as a nuisance parameter the likelihood reduces to
//! `Δ̂ = argmax_Δ ‖Y_s D_{Δ,N} x‖²` and `b̂ = Y_s D_{Δ̂,N} x / (√ρ‖x‖²)`.
//! The maximization is a coarse scan over the search interval followed by a
//! golden-section refinement around the best grid points.

use std::f64::consts::PI;

use nalgebra::DVector;
use rustfft::{FftDirection, FftPlanner};

use crate::protocol::ReceivedBlock;
use crate::signal::{phasor, SyncWaveform};
use crate::{Error, Result, C64};

/// Grid maxima within this fraction of the best coarse value are refined too;
/// it exceeds the worst-case loss of sampling a main lobe at `1/(8N)` spacing.
const CANDIDATE_MARGIN: f64 = 0.05;
const MAX_CANDIDATES: usize = 8;

/// Search parameters for [`estimate_offset`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Δ is searched in `[-h, h)`; 0.5 covers the full unambiguous range.
    pub search_halfwidth: f64,
    /// Coarse grid size; `None` means `8N`.
    pub coarse_grid_points: Option<usize>,
    /// Golden-section stops once the bracket is narrower than this.
    pub refine_tolerance: f64,
    pub refine_max_iters: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            search_halfwidth: 0.5,
            coarse_grid_points: None,
            refine_tolerance: 1e-9,
            refine_max_iters: 100,
        }
    }
}

impl EstimatorConfig {
    pub fn grid_points(&self, n: usize) -> usize {
        self.coarse_grid_points.unwrap_or(8 * n)
    }

    /// Checks the parameters against a burst of length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let h = self.search_halfwidth;
        if !(h > 0.0 && h <= 0.5) {
            return Err(Error::invalid(format!(
                "search half-width {h} must lie in (0, 0.5]"
            )));
        }
        let k = self.grid_points(n);
        if k == 0 || 2.0 * h / k as f64 > 1.0 / (4.0 * n as f64) {
            return Err(Error::invalid(format!(
                "{k} coarse grid points over width {} are coarser than 1/(4N) for N = {n}",
                2.0 * h
            )));
        }
        if !(self.refine_tolerance > 0.0) {
            return Err(Error::invalid("refine tolerance must be positive"));
        }
        if self.refine_max_iters == 0 {
            return Err(Error::invalid("refine_max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// Result of [`estimate_offset`].
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetEstimate {
    /// Estimated offset, cycles per sample.
    pub delta_hat: f64,
    /// Estimated effective channel `b̂`.
    pub b_hat: DVector<C64>,
    /// `‖Y_s D_{Δ̂,N} x‖²`.
    pub objective_value: f64,
}

/// Wraps an offset onto `[-0.5, 0.5)`.
pub fn wrap_offset(delta: f64) -> f64 {
    delta - (delta + 0.5).floor()
}

/// Per-antenna products `y_m(n)·x(n)`, the part of the matched filter that
/// does not depend on Δ.
struct MatchedFilter {
    antennas: usize,
    len: usize,
    /// Row-major, antenna by antenna.
    z: Vec<C64>,
}

impl MatchedFilter {
    fn new(ys: &ReceivedBlock, x: &SyncWaveform) -> Result<Self> {
        let len = x.len();
        if ys.time_len() != len {
            return Err(Error::mismatch(
                "matched filter",
                format!("{len} samples"),
                ys.time_len(),
            ));
        }
        let antennas = ys.antennas();
        let mut z = Vec::with_capacity(antennas * len);
        for m in 0..antennas {
            for (t, &xt) in x.samples().iter().enumerate() {
                z.push(ys.entries[(m, t)] * xt);
            }
        }
        Ok(MatchedFilter { antennas, len, z })
    }

    fn rows(&self) -> impl Iterator<Item = &[C64]> {
        self.z.chunks_exact(self.len)
    }

    /// `s_m(Δ) = Σ_n z_m(n) e^{j2πnΔ}` for every antenna.
    fn outputs(&self, delta: f64) -> Vec<C64> {
        let rot: Vec<C64> = (1..=self.len).map(|n| phasor(n, delta)).collect();
        self.rows()
            .map(|row| row.iter().zip(&rot).map(|(z, w)| z * w).sum())
            .collect()
    }

    fn objective(&self, delta: f64) -> f64 {
        self.outputs(delta).iter().map(|s| s.norm_sqr()).sum()
    }

    /// First and second derivative of the objective with respect to Δ.
    fn slope_curvature(&self, delta: f64) -> (f64, f64) {
        let rot: Vec<C64> = (1..=self.len).map(|n| phasor(n, delta)).collect();
        let (mut d1, mut d2) = (0.0, 0.0);
        for row in self.rows() {
            let (mut s, mut ds, mut dds) =
                (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            for (t, (z, w)) in row.iter().zip(&rot).enumerate() {
                let k = 2.0 * PI * (t + 1) as f64;
                let zw = z * w;
                s += zw;
                ds += zw * C64::new(0.0, k);
                dds -= zw * (k * k);
            }
            d1 += 2.0 * (s.conj() * ds).re;
            d2 += 2.0 * (ds.norm_sqr() + (s.conj() * dds).re);
        }
        (d1, d2)
    }

    /// Objective on `k` points spanning the full circle, `Δ_i = -1/2 + i/k`.
    fn full_circle_scan(&self, k: usize) -> Vec<f64> {
        let fft = FftPlanner::new().plan_fft(k, FftDirection::Inverse);
        let mut total = vec![0.0; k];
        let mut buf = vec![C64::new(0.0, 0.0); k];
        for row in self.rows() {
            buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
            // e^{j2πn(-1/2 + i/k)} = (-1)^n e^{j2πni/k}
            for (t, z) in row.iter().enumerate() {
                let n = t + 1;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                buf[n % k] += z * sign;
            }
            fft.process(&mut buf);
            for (acc, s) in total.iter_mut().zip(&buf) {
                *acc += s.norm_sqr();
            }
        }
        total
    }
}

/// `‖Y_s D_{Δ,N} x‖²`. `x` is real, so `x* = x`.
pub fn ml_objective(ys: &ReceivedBlock, x: &SyncWaveform, delta: f64) -> Result<f64> {
    Ok(MatchedFilter::new(ys, x)?.objective(delta))
}

/// Closed-form effective channel estimate `Y_s D_{Δ,N} x / (√ρ‖x‖²)`.
pub fn estimate_effective_channel(
    ys: &ReceivedBlock,
    x: &SyncWaveform,
    delta: f64,
    rho: f64,
) -> Result<DVector<C64>> {
    if !(rho > 0.0) {
        return Err(Error::invalid(format!("SNR must be positive, got {rho}")));
    }
    let energy = x.energy();
    if energy == 0.0 {
        return Err(Error::Degenerate("sync signal has zero energy".into()));
    }
    let mf = MatchedFilter::new(ys, x)?;
    let scale = 1.0 / (rho.sqrt() * energy);
    Ok(DVector::from_iterator(
        mf.antennas,
        mf.outputs(delta).into_iter().map(|s| s * scale),
    ))
}

/// Maximizes `f` on `[lo, hi]`, assuming a single peak inside.
fn golden_section_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iters: usize,
) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while hi - lo > tol && iters < max_iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        iters += 1;
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Newton steps on the slope, which resolve a flat peak far below the
/// `sqrt(eps)` floor of comparison-based search. Steps that leave `[lo, hi]`
/// or meet non-negative curvature stop the polish.
fn newton_polish(mf: &MatchedFilter, mut d: f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..4 {
        let (d1, d2) = mf.slope_curvature(d);
        if !(d2 < 0.0) {
            break;
        }
        let next = d - d1 / d2;
        if !(lo..=hi).contains(&next) {
            break;
        }
        let moved = (next - d).abs();
        d = next;
        if moved < 1e-15 {
            break;
        }
    }
    d
}

/// Indices of coarse-grid local maxima close to the global one, best first.
fn candidate_peaks(values: &[f64], circular: bool) -> Vec<usize> {
    let k = values.len();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut peaks: Vec<usize> = (0..k)
        .filter(|&i| {
            let left = if i > 0 {
                Some(values[i - 1])
            } else if circular {
                Some(values[k - 1])
            } else {
                None
            };
            let right = if i + 1 < k {
                Some(values[i + 1])
            } else if circular {
                Some(values[0])
            } else {
                None
            };
            // ≥ on the left, > on the right: a flat top yields one index
            left.is_none_or(|l| values[i] >= l) && right.is_none_or(|r| values[i] > r)
        })
        .filter(|&i| values[i] >= (1.0 - CANDIDATE_MARGIN) * best)
        .collect();
    if peaks.is_empty() {
        // constant objective: every point ties, take the first
        peaks.push(
            values
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |b, (i, &v)| if v > b.1 { (i, v) } else { b },
                )
                .0,
        );
    }
    // stable sort keeps index order among equal values
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    peaks.truncate(MAX_CANDIDATES);
    peaks
}

/// Maximum-likelihood offset estimate from a stage-II block.
///
/// Fails with [`Error::Degenerate`] when the block is identically zero (the
/// objective is then flat and no offset is preferred).
pub fn estimate_offset(
    ys: &ReceivedBlock,
    x: &SyncWaveform,
    cfg: &EstimatorConfig,
) -> Result<OffsetEstimate> {
    let n = x.len();
    if n < 2 {
        return Err(Error::NotIdentifiable(
            "sync signal shorter than 2 samples".into(),
        ));
    }
    cfg.validate(n)?;
    let mf = MatchedFilter::new(ys, x)?;
    if mf.z.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::Degenerate("stage-II block carries no signal".into()));
    }

    let h = cfg.search_halfwidth;
    let k = cfg.grid_points(n);
    let full_circle = h == 0.5;
    let step = 2.0 * h / k as f64;
    let grid = |i: usize| -h + i as f64 * step;
    let values = if full_circle {
        mf.full_circle_scan(k)
    } else {
        (0..k).map(|i| mf.objective(grid(i))).collect()
    };

    let mut best: Option<(f64, f64)> = None;
    for i in candidate_peaks(&values, full_circle) {
        let center = grid(i);
        let (mut lo, mut hi) = (center - step, center + step);
        if !full_circle {
            lo = lo.max(-h);
            hi = hi.min(h);
        }
        let refined = golden_section_max(
            |d| mf.objective(d),
            lo,
            hi,
            cfg.refine_tolerance,
            cfg.refine_max_iters,
        );
        let at_grid = (center, mf.objective(center));
        let mut local = if refined.1 >= at_grid.1 {
            refined
        } else {
            at_grid
        };
        let polished = newton_polish(&mf, local.0, lo, hi);
        let polished_value = mf.objective(polished);
        if polished_value >= local.1 * (1.0 - 1e-12) {
            local = (polished, polished_value);
        }
        if best.is_none_or(|b| local.1 > b.1) {
            best = Some(local);
        }
    }
    let (raw, objective_value) = best.expect("at least one candidate peak");
    let delta_hat = if full_circle {
        wrap_offset(raw)
    } else {
        raw.clamp(-h, h)
    };
    let b_hat = estimate_effective_channel(ys, x, delta_hat, ys.snr)?;
    Ok(OffsetEstimate {
        delta_hat,
        b_hat,
        objective_value,
    })
}

/// Derivative of the objective with respect to Δ; used by tests to confirm
/// that refined estimates sit on a stationary point.
#[cfg(test)]
fn objective_slope(ys: &ReceivedBlock, x: &SyncWaveform, delta: f64) -> f64 {
    let mf = MatchedFilter::new(ys, x).unwrap();
    let rot: Vec<C64> = (1..=mf.len).map(|n| phasor(n, delta)).collect();
    mf.rows()
        .map(|row| {
            let s: C64 = row.iter().zip(&rot).map(|(z, w)| z * w).sum();
            let ds: C64 = row
                .iter()
                .zip(&rot)
                .enumerate()
                .map(|(t, (z, w))| z * w * C64::new(0.0, 2.0 * PI * (t + 1) as f64))
                .sum();
            2.0 * (s.conj() * ds).re
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::rayleigh_channel;
    use crate::linalg::complex_gaussian_matrix;
    use crate::protocol::{
        genie_beam_direction, stage2_receive, ReceiveSide, Scheme, SyncLinkState,
    };
    use crate::signal::make_sync_signal;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy_block(
        seed: u64,
        m: usize,
        n: usize,
        delta: f64,
        rho: f64,
        noise: f64,
    ) -> (ReceivedBlock, SyncWaveform, DVector<C64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = rayleigh_channel(m, m, &mut rng).unwrap();
        let x = make_sync_signal(n, 4).unwrap();
        let a = genie_beam_direction(&g).unwrap();
        let b = g.entries().transpose() * a.weights();
        let link = SyncLinkState::new(g, delta, rho, Scheme::BeamSyncGenie)
            .unwrap()
            .with_noise_scale(noise);
        (stage2_receive(&link, &a, &x, &mut rng).unwrap(), x, b)
    }

    /// Objective evaluated straight from the definition with a dense
    /// rotation matrix, independent of the matched-filter path.
    fn dense_objective(ys: &ReceivedBlock, x: &SyncWaveform, delta: f64) -> f64 {
        let n = x.len();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                let ph = 2.0 * PI * (i + 1) as f64 * delta;
                C64::new(ph.cos(), ph.sin())
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let xv = DVector::from_iterator(n, x.samples().iter().map(|&s| C64::new(s, 0.0)));
        (&ys.entries * d * xv).norm_squared()
    }

    #[test]
    fn objective_noiseless_peak_value() {
        let rho = 3.0;
        let (ys, x, b) = noisy_block(1, 4, 100, 0.0731, rho, 0.0);
        let got = ml_objective(&ys, &x, 0.0731).unwrap();
        let want = rho * b.norm_squared() * x.energy().powi(2);
        assert!((got - want).abs() < 1e-10 * want);
    }

    #[test]
    fn objective_zero_block_and_periodicity() {
        let x = make_sync_signal(50, 3).unwrap();
        let zero = ReceivedBlock {
            entries: DMatrix::zeros(3, 50),
            snr: 1.0,
            side: ReceiveSide::Secondary,
        };
        for d in [-0.4, 0.0, 0.123] {
            assert_eq!(ml_objective(&zero, &x, d).unwrap(), 0.0);
        }
        let (ys, x, _) = noisy_block(2, 3, 50, -0.2, 1.0, 1.0);
        for d in [-0.37, 0.01, 0.2999] {
            let a = ml_objective(&ys, &x, d).unwrap();
            let b = ml_objective(&ys, &x, d + 1.0).unwrap();
            assert!((a - b).abs() < 1e-9 * a);
            assert!((a - dense_objective(&ys, &x, d)).abs() < 1e-9 * a);
        }
        let short = make_sync_signal(40, 3).unwrap();
        assert!(ml_objective(&ys, &short, 0.0).is_err());
    }

    #[test]
    fn fft_scan_matches_direct_evaluation() {
        let (ys, x, _) = noisy_block(3, 4, 100, 0.31, 2.0, 1.0);
        let mf = MatchedFilter::new(&ys, &x).unwrap();
        for k in [800, 64, 101] {
            let scan = mf.full_circle_scan(k);
            for (i, v) in scan.iter().enumerate().step_by(7) {
                let d = -0.5 + i as f64 / k as f64;
                let direct = dense_objective(&ys, &x, d);
                assert!((v - direct).abs() < 1e-9 * direct.max(1.0), "k={k} i={i}");
            }
        }
    }

    #[test]
    fn noiseless_recovery() {
        let (ys, x, b) = noisy_block(4, 4, 100, 0.1234, 10.0, 0.0);
        let est = estimate_offset(&ys, &x, &EstimatorConfig::default()).unwrap();
        assert!((est.delta_hat - 0.1234).abs() < 1e-9, "{}", est.delta_hat);
        assert!((&est.b_hat - &b).camax() < 1e-8);
    }

    #[test]
    fn high_snr_zero_offset() {
        let (ys, x, _) = noisy_block(5, 4, 100, 0.0, 1e6, 1.0);
        let est = estimate_offset(&ys, &x, &EstimatorConfig::default()).unwrap();
        assert!(est.delta_hat.abs() < 1e-5, "{}", est.delta_hat);
    }

    #[test]
    fn matches_brute_force_grid() {
        for seed in 0..5 {
            let (ys, x, _) = noisy_block(100 + seed, 2, 60, 0.05 * seed as f64 - 0.1, 0.5, 1.0);
            let est = estimate_offset(&ys, &x, &EstimatorConfig::default()).unwrap();
            let points = 1_000_000;
            let mf = MatchedFilter::new(&ys, &x).unwrap();
            let (best_i, _) = (0..points)
                .map(|i| mf.objective(-0.5 + i as f64 / points as f64))
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |b, (i, v)| if v > b.1 { (i, v) } else { b },
                );
            let brute = -0.5 + best_i as f64 / points as f64;
            let diff = wrap_offset(est.delta_hat - brute).abs();
            assert!(
                diff <= 1.0 / points as f64,
                "seed {seed}: {} vs {brute}",
                est.delta_hat
            );
        }
    }

    #[test]
    fn refined_point_is_stationary() {
        let (ys, x, _) = noisy_block(6, 4, 100, -0.27, 5.0, 1.0);
        let est = estimate_offset(&ys, &x, &EstimatorConfig::default()).unwrap();
        let h = 1e-6;
        let slope = objective_slope(&ys, &x, est.delta_hat);
        let curvature = (objective_slope(&ys, &x, est.delta_hat + h)
            - objective_slope(&ys, &x, est.delta_hat - h))
            / (2.0 * h);
        // distance to the stationary point by one Newton step
        assert!((slope / curvature).abs() < 1e-9);
    }

    #[test]
    fn degenerate_block_rejected() {
        let x = make_sync_signal(100, 4).unwrap();
        let zero = ReceivedBlock {
            entries: DMatrix::zeros(2, 100),
            snr: 1.0,
            side: ReceiveSide::Secondary,
        };
        assert!(matches!(
            estimate_offset(&zero, &x, &EstimatorConfig::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn effective_channel_cases() {
        let (ys, x, b) = noisy_block(7, 3, 80, 0.2, 4.0, 0.0);
        let bh = estimate_effective_channel(&ys, &x, 0.2, 4.0).unwrap();
        assert!((bh - &b).camax() < 1e-10);

        let zero = ReceivedBlock {
            entries: DMatrix::zeros(3, 80),
            snr: 1.0,
            side: ReceiveSide::Secondary,
        };
        assert_eq!(
            estimate_effective_channel(&zero, &x, 0.1, 1.0)
                .unwrap()
                .norm(),
            0.0
        );
        assert!(estimate_effective_channel(&zero, &x, 0.1, 0.0).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let small = ReceivedBlock {
            entries: complex_gaussian_matrix(2, 4, 1.0, &mut rng),
            snr: 2.0,
            side: ReceiveSide::Secondary,
        };
        let x4 = make_sync_signal(4, 1).unwrap();
        let delta = 0.07;
        let bh = estimate_effective_channel(&small, &x4, delta, 2.0).unwrap();
        for m in 0..2 {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..4 {
                let ph = 2.0 * PI * (t + 1) as f64 * delta;
                acc += small.entries[(m, t)] * C64::new(ph.cos(), ph.sin()) * x4.samples()[t];
            }
            let want = acc / (2f64.sqrt() * x4.energy());
            assert!((bh[m] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn restricted_search_range() {
        let (ys, x, _) = noisy_block(9, 4, 100, 0.03, 10.0, 0.0);
        let cfg = EstimatorConfig {
            search_halfwidth: 0.1,
            ..EstimatorConfig::default()
        };
        let est = estimate_offset(&ys, &x, &cfg).unwrap();
        assert!((est.delta_hat - 0.03).abs() < 1e-9);
        let coarse = EstimatorConfig {
            coarse_grid_points: Some(100),
            ..EstimatorConfig::default()
        };
        assert!(estimate_offset(&ys, &x, &coarse).is_err());
    }

    #[test]
    fn scale_equivariance_exact_for_powers_of_two() {
        let (ys, x, _) = noisy_block(10, 4, 100, -0.15, 1.0, 1.0);
        let cfg = EstimatorConfig::default();
        let base = estimate_offset(&ys, &x, &cfg).unwrap();
        for c in [4.0, 0.5, 3.7] {
            let scaled = ReceivedBlock {
                entries: &ys.entries * C64::new(c, 0.0),
                ..ys.clone()
            };
            let est = estimate_offset(&scaled, &x, &cfg).unwrap();
            if c == 3.7 {
                assert!((est.delta_hat - base.delta_hat).abs() < 1e-8);
            } else {
                assert_eq!(est.delta_hat, base.delta_hat);
            }
            assert!(
                (&est.b_hat - &base.b_hat * C64::new(c, 0.0)).camax()
                    < 1e-6 * base.b_hat.camax() * c
            );
        }
    }

    #[test]
    fn longer_burst_lowers_rmse() {
        let trials = 500;
        let rmse = |n: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            let x = make_sync_signal(n, 4).unwrap();
            let mut sum = 0.0;
            for _ in 0..trials {
                let g = rayleigh_channel(4, 4, &mut rng).unwrap();
                let a = genie_beam_direction(&g).unwrap();
                let delta = rng.random_range(-0.1..0.1);
                let link = SyncLinkState::new(g, delta, 1.0, Scheme::BeamSyncGenie).unwrap();
                let ys = stage2_receive(&link, &a, &x, &mut rng).unwrap();
                let est = estimate_offset(&ys, &x, &EstimatorConfig::default()).unwrap();
                sum += wrap_offset(est.delta_hat - delta).powi(2);
            }
            (sum / trials as f64).sqrt()
        };
        let (r100, r200) = (rmse(100), rmse(200));
        assert!(r200 < r100, "N=200: {r200}, N=100: {r100}");
    }

    #[test]
    fn wrap_cases() {
        assert_eq!(wrap_offset(0.6), 0.6 - 1.0);
        assert_eq!(wrap_offset(-0.5), -0.5);
        assert_eq!(wrap_offset(0.5), -0.5);
        assert_eq!(wrap_offset(0.25), 0.25);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn noiseless_exactness(seed in 0u64..10_000, delta in -0.45f64..0.45, m in 1usize..6, rho in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = rayleigh_channel(m, m, &mut rng).unwrap();
            let x = make_sync_signal(100, 4).unwrap();
            let a = genie_beam_direction(&g).unwrap();
            let b = g.entries().transpose() * a.weights();
            let link = SyncLinkState::new(g, delta, rho, Scheme::BeamSyncGenie).unwrap().with_noise_scale(0.0);
            let ys = stage2_receive(&link, &a, &x, &mut rng).unwrap();
            let est = estimate_offset(&ys, &x, &EstimatorConfig::default()).unwrap();
            prop_assert!((est.delta_hat - delta).abs() <= 1e-9, "{} vs {}", est.delta_hat, delta);
            prop_assert!((&est.b_hat - &b).camax() < 1e-8);
        }

        #[test]
        fn beats_dense_grid(seed in 0u64..10_000, snr_db in -10.0f64..20.0) {
            let (ys, x, _) = noisy_block(seed, 2, 100, 0.0, 10f64.powf(snr_db / 10.0), 1.0);
            let est = estimate_offset(&ys, &x, &EstimatorConfig::default()).unwrap();
            let mf = MatchedFilter::new(&ys, &x).unwrap();
            let dense = (0..100_000).map(|i| mf.objective(-0.5 + i as f64 * 1e-5)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(est.objective_value >= dense - 1e-9, "{} < {}", est.objective_value, dense);
        }
    }
}
