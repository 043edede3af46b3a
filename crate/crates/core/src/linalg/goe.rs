use rand::Rng;
use rand_distr::StandardNormal;

use super::{symmetric_eigenvalues, LinalgError, SquareMatrix};

/// GOE sample with off-diagonal variance 1 and diagonal variance 2.
///
/// The upper triangle is drawn row by row (diagonal first in each row) and
/// mirrored, so the matrix is exactly symmetric.
pub fn sample_goe_raw<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SquareMatrix, LinalgError> {
    if n == 0 {
        return Err(LinalgError::InvalidDimension(0));
    }
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.sample(StandardNormal);
            if i == j {
                m[(i, i)] = std::f64::consts::SQRT_2 * x;
            } else {
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
    }
    Ok(m)
}

/// GOE sample rescaled so that `E_max − E_min` equals `target_width`.
pub fn sample_goe<R: Rng + ?Sized>(
    n: usize,
    target_width: f64,
    rng: &mut R,
) -> Result<SquareMatrix, LinalgError> {
    if !(target_width > 0.0 && target_width.is_finite()) {
        return Err(LinalgError::InvalidWidth(format!(
            "target width must be positive, got {target_width}"
        )));
    }
    let raw = sample_goe_raw(n, rng)?;
    if n == 1 {
        return Err(LinalgError::InvalidWidth(
            "a 1x1 spectrum has zero width".into(),
        ));
    }
    let ev = symmetric_eigenvalues(&raw)?;
    let width = ev[n - 1] - ev[0];
    if width <= 0.0 {
        return Err(LinalgError::InvalidWidth("sampled spectrum is degenerate".into()));
    }
    Ok(raw.scale(target_width / width))
}

/// GOE sample rescaled so that `Tr X² = n`.
pub fn sample_goe_frobenius<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<SquareMatrix, LinalgError> {
    let raw = sample_goe_raw(n, rng)?;
    let f = raw.frobenius_sq();
    if f == 0.0 {
        return Err(LinalgError::InvalidWidth("sampled matrix is zero".into()));
    }
    Ok(raw.scale((n as f64 / f).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn width_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = sample_goe(64, 4.0, &mut rng).unwrap();
        let ev = symmetric_eigenvalues(&h).unwrap();
        assert!((ev[63] - ev[0] - 4.0).abs() < 1e-12);
        assert_eq!(h.max_asymmetry(), 0.0);
    }

    #[test]
    fn two_by_two_gap_is_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = sample_goe(2, 1.5, &mut rng).unwrap();
        let ev = symmetric_eigenvalues(&h).unwrap();
        assert!((ev[1] - ev[0] - 1.5).abs() < 1e-13);
    }

    #[test]
    fn degenerate_requests_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_goe(1, 1.0, &mut rng), Err(LinalgError::InvalidWidth(_))));
        assert!(matches!(sample_goe(4, 0.0, &mut rng), Err(LinalgError::InvalidWidth(_))));
        assert_eq!(sample_goe_raw(0, &mut rng), Err(LinalgError::InvalidDimension(0)));
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = sample_goe(16, 2.0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_goe(16, 2.0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let c = sample_goe(16, 2.0, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn frobenius_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = sample_goe_frobenius(32, &mut rng).unwrap();
        assert!((v.frobenius_sq() - 32.0).abs() < 1e-10);
    }

    #[test]
    fn entry_variances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200;
        let h = sample_goe_raw(n, &mut rng).unwrap();
        let diag: f64 = (0..n).map(|i| h[(i, i)].powi(2)).sum::<f64>() / n as f64;
        let off: f64 = (h.frobenius_sq() - diag * n as f64) / (n * (n - 1)) as f64;
        assert!((diag - 2.0).abs() < 0.5, "diag variance {diag}");
        assert!((off - 1.0).abs() < 0.03, "off-diagonal variance {off}");
    }
}
