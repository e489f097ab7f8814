//! Fisher information and Cramér–Rao bound for the offset estimate.
//!
//! The unknowns are `θ = [b_R; b_I; Δ]` (`2Ms + 1` reals). Each stage-II
//! sample `y_s(n)` is `CN(√ρ b x(n) e^{-j2πnΔ}, I)`, i.e. real Gaussian with
//! covariance `I/2`. The covariance does not depend on `θ`, so the trace term
//! of the Gaussian FIM vanishes and only the mean-derivative term remains.
//!
//! Two routes to the bound are provided and must agree: assembling and
//! solving the full FIM ([`crb_numerical`]), and the block-inverse closed form
//! ([`crb_closed_form`]).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::signal::SyncWaveform;
use crate::{Error, Result, C64};

/// Real symmetric `(2Ms+1) × (2Ms+1)` Fisher information, parameter order
/// `[b_R; b_I; Δ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherInfo {
    pub matrix: DMatrix<f64>,
}

impl FisherInfo {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

fn check_snr(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!(
            "SNR must be positive and finite, got {rho}"
        )));
    }
    Ok(())
}

/// Adds `w · [[I, 0, c b_I], [0, I, −c b_R], [c b_I^T, −c b_R^T, c²‖b‖²]]`
/// with `c = 2πn` into `j`.
fn accumulate(j: &mut DMatrix<f64>, n: usize, weight: f64, b: &DVector<C64>) {
    let ms = b.len();
    let c = 2.0 * PI * n as f64;
    let last = 2 * ms;
    for i in 0..ms {
        j[(i, i)] += weight;
        j[(ms + i, ms + i)] += weight;
        let upper = weight * c * b[i].im;
        let lower = -weight * c * b[i].re;
        j[(i, last)] += upper;
        j[(last, i)] += upper;
        j[(ms + i, last)] += lower;
        j[(last, ms + i)] += lower;
    }
    j[(last, last)] += weight * c * c * b.norm_squared();
}

/// FIM contribution of the sample at 1-based time instant `n`:
/// `2ρx(n)² · [[I, 0, 2πn b_I], [0, I, −2πn b_R], [·, ·, 4π²n²‖b‖²]]`.
pub fn fim_single(n: usize, x_n: f64, b: &DVector<C64>, rho: f64) -> Result<FisherInfo> {
    if n == 0 {
        return Err(Error::invalid("time instants are 1-based"));
    }
    check_snr(rho)?;
    let dim = 2 * b.len() + 1;
    let mut matrix = DMatrix::zeros(dim, dim);
    accumulate(&mut matrix, n, 2.0 * rho * x_n * x_n, b);
    Ok(FisherInfo { matrix })
}

/// Total FIM over the burst: samples are independent, so the per-instant
/// matrices add. Sample `t` (0-based) is sent at instant `t + 1`.
pub fn fim_total(x: &SyncWaveform, b: &DVector<C64>, rho: f64) -> Result<FisherInfo> {
    if x.len() < 2 {
        return Err(Error::NotIdentifiable(
            "sync signal shorter than 2 samples".into(),
        ));
    }
    check_snr(rho)?;
    let dim = 2 * b.len() + 1;
    let mut matrix = DMatrix::zeros(dim, dim);
    for (t, &xt) in x.samples().iter().enumerate() {
        accumulate(&mut matrix, t + 1, 2.0 * rho * xt * xt, b);
    }
    Ok(FisherInfo { matrix })
}

/// `1 / (8π²ρ‖b‖² (Σn²x² − (Σnx²)²/Σx²))`.
pub fn crb_closed_form(x: &SyncWaveform, b: &DVector<C64>, rho: f64) -> Result<f64> {
    check_snr(rho)?;
    if x.len() < 2 {
        return Err(Error::NotIdentifiable(
            "sync signal shorter than 2 samples".into(),
        ));
    }
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (t, &xt) in x.samples().iter().enumerate() {
        let n = (t + 1) as f64;
        let e = xt * xt;
        s0 += e;
        s1 += n * e;
        s2 += n * n * e;
    }
    let spread = if s0 > 0.0 { s2 - s1 * s1 / s0 } else { 0.0 };
    let denom = 8.0 * PI * PI * rho * b.norm_squared() * spread;
    // the spread is a weighted variance of n; rounding can leave a tiny
    // positive remainder for single-impulse bursts
    if !(denom > 0.0) || spread <= 1e-9 * s2 {
        return Err(Error::NotIdentifiable(
            "zero Fisher information on the offset (needs b ≠ 0 and energy at two or more instants)".into(),
        ));
    }
    Ok(1.0 / denom)
}

/// Lower-right element of `J⁻¹`, by Cholesky solve against the last unit
/// vector.
pub fn crb_numerical(x: &SyncWaveform, b: &DVector<C64>, rho: f64) -> Result<f64> {
    let fim = fim_total(x, b, rho)?;
    let dim = fim.dim();
    let scale = fim.matrix.diagonal().amax();
    let chol =
        fim.matrix.clone().cholesky().ok_or_else(|| {
            Error::NotIdentifiable("Fisher information matrix is singular".into())
        })?;
    // Cholesky succeeds on matrices that are singular up to rounding; reject
    // those through the smallest pivot
    let min_pivot = chol
        .l_dirty()
        .diagonal()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(min_pivot * min_pivot > 1e-13 * scale) {
        return Err(Error::NotIdentifiable(
            "Fisher information matrix is singular".into(),
        ));
    }
    let mut e = DVector::zeros(dim);
    e[dim - 1] = 1.0;
    let col = chol.solve(&e);
    Ok(col[dim - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::make_sync_signal;
    use proptest::prelude::*;

    fn waveform(samples: Vec<f64>) -> SyncWaveform {
        SyncWaveform::from_samples(samples).unwrap()
    }

    fn cvec(v: &[(f64, f64)]) -> DVector<C64> {
        DVector::from_iterator(v.len(), v.iter().map(|&(r, i)| C64::new(r, i)))
    }

    /// Mean of the real-stacked sample at instant `n`.
    fn mean(theta: &[f64], ms: usize, n: usize, xn: f64, rho: f64) -> Vec<f64> {
        let d = theta[2 * ms];
        let (s, c) = (2.0 * PI * n as f64 * d).sin_cos();
        let mut mu = vec![0.0; 2 * ms];
        for i in 0..ms {
            let (br, bi) = (theta[i], theta[ms + i]);
            mu[i] = rho.sqrt() * xn * (br * c + bi * s);
            mu[ms + i] = rho.sqrt() * xn * (-br * s + bi * c);
        }
        mu
    }

    /// `Σ_n (∂μ_n/∂θ)^T C⁻¹ (∂μ_n/∂θ)` with central-difference Jacobians and
    /// `C = I/2`.
    fn fim_by_finite_differences(x: &SyncWaveform, b: &DVector<C64>, rho: f64) -> DMatrix<f64> {
        let ms = b.len();
        let dim = 2 * ms + 1;
        let mut theta: Vec<f64> = b
            .iter()
            .map(|z| z.re)
            .chain(b.iter().map(|z| z.im))
            .collect();
        theta.push(0.01);
        let mut j = DMatrix::zeros(dim, dim);
        for (t, &xt) in x.samples().iter().enumerate() {
            let n = t + 1;
            let mut jac = DMatrix::zeros(2 * ms, dim);
            for k in 0..dim {
                let h = 1e-6;
                let mut up = theta.clone();
                let mut dn = theta.clone();
                up[k] += h;
                dn[k] -= h;
                let (mu, md) = (mean(&up, ms, n, xt, rho), mean(&dn, ms, n, xt, rho));
                for r in 0..2 * ms {
                    jac[(r, k)] = (mu[r] - md[r]) / (2.0 * h);
                }
            }
            j += jac.transpose() * &jac * 2.0;
        }
        j
    }

    #[test]
    fn single_zero_sample_and_zero_channel() {
        let b = cvec(&[(0.3, -0.2), (1.0, 0.5)]);
        assert_eq!(
            fim_single(3, 0.0, &b, 2.0).unwrap().matrix,
            DMatrix::zeros(5, 5)
        );

        let z = cvec(&[(0.0, 0.0), (0.0, 0.0)]);
        let f = fim_single(3, 0.7, &z, 2.0).unwrap().matrix;
        assert_eq!(f[(4, 4)], 0.0);
        for i in 0..4 {
            assert_eq!(f[(i, 4)], 0.0);
            assert!((f[(i, i)] - 2.0 * 2.0 * 0.49).abs() < 1e-15);
        }
    }

    #[test]
    fn single_corner_hand_value() {
        let f = fim_single(1, 1.0, &cvec(&[(1.0, 0.0)]), 1.0)
            .unwrap()
            .matrix;
        assert!((f[(2, 2)] - 8.0 * PI * PI).abs() < 1e-12);
        assert!((f[(1, 2)] + 4.0 * PI).abs() < 1e-12);
        assert_eq!(f[(0, 2)], 0.0);
    }

    #[test]
    fn total_is_sum_of_singles() {
        let x = make_sync_signal(12, 2).unwrap();
        let b = cvec(&[(0.4, 0.1), (-0.2, 0.9), (0.0, -0.3)]);
        let total = fim_total(&x, &b, 1.7).unwrap().matrix;
        let mut sum = DMatrix::zeros(7, 7);
        for (t, &xt) in x.samples().iter().enumerate() {
            sum += fim_single(t + 1, xt, &b, 1.7).unwrap().matrix;
        }
        assert!((&total - sum).amax() < 1e-9 * total.amax());
        assert!((&total - total.transpose()).amax() < 1e-10);
        assert!(total.symmetric_eigenvalues().min() > -1e-9 * total.amax());
    }

    #[test]
    fn total_matches_finite_difference_fim() {
        let x = make_sync_signal(9, 2).unwrap();
        let b = cvec(&[(0.8, -0.4), (0.1, 0.6)]);
        let total = fim_total(&x, &b, 2.5).unwrap().matrix;
        let fd = fim_by_finite_differences(&x, &b, 2.5);
        assert!(
            (&total - &fd).amax() < 1e-5 * total.amax(),
            "{total} vs {fd}"
        );
    }

    #[test]
    fn zero_burst_gives_zero_fim() {
        let x = waveform(vec![0.0; 5]);
        let b = cvec(&[(1.0, 1.0)]);
        assert_eq!(fim_total(&x, &b, 1.0).unwrap().matrix, DMatrix::zeros(3, 3));
        assert!(SyncWaveform::from_samples(vec![1.0]).is_err());
    }

    #[test]
    fn closed_form_hand_value() {
        let x = waveform(vec![1.0, 1.0]);
        let b = cvec(&[(1.0, 0.0)]);
        let crb = crb_closed_form(&x, &b, 1.0).unwrap();
        // Σn²x² = 5, (Σnx²)²/Σx² = 4.5
        assert!((crb - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        assert!((crb - 0.025330).abs() < 1e-6);
    }

    #[test]
    fn closed_form_scalings() {
        let x = make_sync_signal(100, 4).unwrap();
        let b = cvec(&[(0.3, 0.4), (1.2, -0.7)]);
        let base = crb_closed_form(&x, &b, 2.0).unwrap();
        assert!((crb_closed_form(&x, &b, 4.0).unwrap() - base / 2.0).abs() < 1e-15 * base);
        let b2 = &b * C64::new(2f64.sqrt(), 0.0);
        assert!((crb_closed_form(&x, &b2, 2.0).unwrap() - base / 2.0).abs() < 1e-12 * base);
        let rotated = &b * C64::from_polar(1.0, 1.234);
        assert!((crb_closed_form(&x, &rotated, 2.0).unwrap() - base).abs() < 1e-12 * base);
    }

    #[test]
    fn unidentifiable_cases() {
        let x = make_sync_signal(100, 4).unwrap();
        let zero = cvec(&[(0.0, 0.0), (0.0, 0.0)]);
        assert!(matches!(
            crb_closed_form(&x, &zero, 1.0),
            Err(Error::NotIdentifiable(_))
        ));
        assert!(matches!(
            crb_numerical(&x, &zero, 1.0),
            Err(Error::NotIdentifiable(_))
        ));
        let impulse = waveform(vec![0.0, 0.0, 1.0, 0.0]);
        let b = cvec(&[(1.0, 0.0)]);
        assert!(crb_closed_form(&impulse, &b, 1.0).is_err());
        assert!(crb_numerical(&impulse, &b, 1.0).is_err());
    }

    #[test]
    fn numerical_matches_closed_form_minimal() {
        let x = waveform(vec![1.0, 1.0]);
        let b = cvec(&[(1.0, 0.0)]);
        let (n, c) = (
            crb_numerical(&x, &b, 1.0).unwrap(),
            crb_closed_form(&x, &b, 1.0).unwrap(),
        );
        assert!((n - c).abs() <= 1e-9 * c);
    }

    #[test]
    fn crb_shrinks_when_burst_grows() {
        let b = cvec(&[(0.5, 0.5)]);
        let mut samples = vec![1.0, 0.3];
        let mut prev = crb_closed_form(&waveform(samples.clone()), &b, 1.0).unwrap();
        for extra in [0.2, -0.9, 0.05, 1.0, -0.4] {
            samples.push(extra);
            let next = crb_closed_form(&waveform(samples.clone()), &b, 1.0).unwrap();
            assert!(next < prev);
            prev = next;
        }
    }

    proptest! {
        #[test]
        fn numerical_equals_closed_form(
            ms in prop::sample::select(vec![1usize, 2, 4, 16]),
            n in prop::sample::select(vec![10usize, 100]),
            log_rho in -2.0f64..2.0,
            parts in prop::collection::vec(-2.0f64..2.0, 32),
        ) {
            let b = DVector::from_fn(ms, |i, _| C64::new(parts[2 * i], parts[2 * i + 1]));
            prop_assume!(b.norm() > 1e-3);
            let x = make_sync_signal(n, 2).unwrap();
            let rho = 10f64.powf(log_rho);
            let (num, closed) = (crb_numerical(&x, &b, rho).unwrap(), crb_closed_form(&x, &b, rho).unwrap());
            prop_assert!((num - closed).abs() <= 1e-9 * closed, "{num} vs {closed}");
        }
    }
}
