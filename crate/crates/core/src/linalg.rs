use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

/// Left singular vector of `m` for its largest singular value, phase-fixed so
/// that its largest-magnitude entry is real and positive (first such entry on
/// ties). Returns the vector and the singular value.
pub(crate) fn dominant_left_singular(m: &DMatrix<C64>, what: &str) -> Result<(DVector<C64>, f64)> {
    if m.nrows() == 0 || m.ncols() == 0 || m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(Error::Degenerate(format!("{what} is all zero")));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid(format!("{what} has non-finite entries")));
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");
    let (k, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold(None::<(usize, &f64)>, |best, (i, s)| match best {
            Some((_, b)) if *b >= *s => best,
            _ => Some((i, s)),
        })
        .expect("non-empty matrix has singular values");
    let mut v = u.column(k).into_owned();
    fix_phase(&mut v);
    Ok((v, sigma))
}

/// Rotates `v` by a unit-modulus scalar so that its largest-magnitude entry is
/// real and positive.
pub(crate) fn fix_phase(v: &mut DVector<C64>) {
    let mut best = 0;
    let mut best_mag = -1.0;
    for (i, z) in v.iter().enumerate() {
        let mag = z.norm();
        if mag > best_mag * (1.0 + 1e-12) {
            best = i;
            best_mag = mag;
        }
    }
    if best_mag > 0.0 {
        let rot = v[best].conj() / best_mag;
        *v *= rot;
        v[best] = C64::new(v[best].norm(), 0.0);
    }
}

/// Independent standard-normal pair scaled to a `CN(0, 1)` sample.
pub(crate) fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    use rand_distr::{Distribution, StandardNormal};
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows × cols` matrix of i.i.d. `CN(0, scale²)` entries, drawn column by column.
pub(crate) fn complex_gaussian_matrix<R: rand::Rng + ?Sized>(
    rows: usize,
    cols: usize,
    scale: f64,
    rng: &mut R,
) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(rows, cols);
    for z in m.iter_mut() {
        *z = complex_normal(rng) * scale;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_fix_makes_peak_real() {
        let mut v = DVector::from_vec(vec![
            C64::new(0.1, 0.2),
            C64::new(0.0, -3.0),
            C64::new(1.0, 1.0),
        ]);
        fix_phase(&mut v);
        assert_eq!(v[1], C64::new(3.0, 0.0));
        assert!((v.norm() - (0.05f64 + 9.0 + 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dominant_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 3.0),
        ]));
        let (u, s) = dominant_left_singular(&m, "m").unwrap();
        assert!((s - 3.0).abs() < 1e-12);
        assert!((u[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(u[0].norm() < 1e-12);
    }

    #[test]
    fn zero_matrix_rejected() {
        let m = DMatrix::<C64>::zeros(2, 2);
        assert!(matches!(
            dominant_left_singular(&m, "m"),
            Err(Error::Degenerate(_))
        ));
    }
}
