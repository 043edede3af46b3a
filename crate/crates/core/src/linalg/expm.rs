use super::{LinalgError, SquareMatrix, SYMMETRY_TOL};

const TERM_TOL: f64 = 1e-15;
const MAX_TERMS: usize = 60;

/// `e^a` for antisymmetric `a`: Taylor series on `a / 2^s`, then `s`
/// squarings. The result is orthogonal.
pub fn expm_skew(a: &SquareMatrix) -> Result<SquareMatrix, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let viol = a.max_antisymmetry_violation();
    if viol > SYMMETRY_TOL * a.max_abs().max(1.0) {
        return Err(LinalgError::NotAntisymmetric(viol));
    }
    let n = a.dim();
    // Row-sum norm bounds the spectral radius.
    let norm = (0..n)
        .map(|i| a.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let b = a.scale(0.5f64.powi(squarings as i32));

    let mut result = SquareMatrix::identity(n);
    let mut term = SquareMatrix::identity(n);
    for k in 1..=MAX_TERMS {
        term = term.matmul(&b).scale(1.0 / k as f64);
        result.add_scaled(&term, 1.0);
        if term.max_abs() < TERM_TOL {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gives_identity() {
        let r = expm_skew(&SquareMatrix::zeros(5)).unwrap();
        assert_eq!(r, SquareMatrix::identity(5));
    }

    #[test]
    fn planar_rotation() {
        for theta in [0.3, 1.0, 2.5, 7.0] {
            let a = SquareMatrix::from_rows(2, vec![0.0, theta, -theta, 0.0]).unwrap();
            let r = expm_skew(&a).unwrap();
            let (c, s) = (f64::cos(theta), f64::sin(theta));
            let expected = [c, s, -s, c];
            for (x, y) in r.as_slice().iter().zip(expected) {
                assert!((x - y).abs() < 1e-13, "theta={theta}");
            }
        }
    }

    #[test]
    fn rejects_symmetric_input() {
        let a = SquareMatrix::identity(3);
        assert!(matches!(expm_skew(&a), Err(LinalgError::NotAntisymmetric(_))));
    }
}
