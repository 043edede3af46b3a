use glab::diagnostics::{gap_ratio_stats, mid_spectrum_window};
use glab::linalg::{
    expm_skew, sample_goe_raw, symmetric_eigen, symmetric_eigen_with, symmetric_eigenvalues,
    SquareMatrix, TridiagonalSolver,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.random_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

fn random_skew(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> SquareMatrix {
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let x: f64 = scale * rng.random_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
    }
    m
}

fn identity_error(m: &SquareMatrix) -> f64 {
    m.sub(&SquareMatrix::identity(m.dim())).max_abs()
}

#[test]
fn eigensolver_residuals_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dims: Vec<usize> = (0..100).map(|k| 1 + (k * 37) % 256).collect();
    for &n in &dims {
        let h = random_symmetric(n, &mut rng);
        for solver in [TridiagonalSolver::DivideAndConquer, TridiagonalSolver::Ql] {
            let s = symmetric_eigen_with(&h, solver).unwrap();
            assert!(s.reconstruction_residual(&h) <= 1e-10, "n = {n} {solver:?}");
            assert!(s.orthogonality_residual() <= 1e-10, "n = {n} {solver:?}");
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn eigensolver_handles_degenerate_spectra() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    // Q·diag(repeated)·Qᵀ with a random orthogonal Q.
    let n = 120;
    let q = symmetric_eigen(&random_symmetric(n, &mut rng)).unwrap().eigenvectors;
    let values: Vec<f64> = (0..n).map(|i| (i % 4) as f64).collect();
    let h = q.matmul(&SquareMatrix::diagonal(&values)).matmul(&q.transpose());
    let h = SquareMatrix::from_fn(n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
    let s = symmetric_eigen(&h).unwrap();
    assert!(s.reconstruction_residual(&h) <= 1e-10);
    assert!(s.orthogonality_residual() <= 1e-10);
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    for (a, b) in s.eigenvalues.iter().zip(&sorted) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn eigenvalues_only_matches_full_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let h = random_symmetric(200, &mut rng);
    let full = symmetric_eigen(&h).unwrap().eigenvalues;
    let only = symmetric_eigenvalues(&h).unwrap();
    for (a, b) in full.iter().zip(&only) {
        assert!((a - b).abs() < 1e-11);
    }
}

#[test]
fn trace_and_frobenius_are_preserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let h = random_symmetric(150, &mut rng);
    let e = symmetric_eigenvalues(&h).unwrap();
    assert!((e.iter().sum::<f64>() - h.trace()).abs() < 1e-10);
    assert!((e.iter().map(|x| x * x).sum::<f64>() - h.frobenius_sq()).abs() < 1e-9);
}

#[test]
fn asymmetric_and_nonfinite_inputs_are_rejected() {
    let mut h = SquareMatrix::identity(3);
    h[(0, 1)] = 1.0;
    assert!(symmetric_eigen(&h).is_err());
    let mut h = SquareMatrix::identity(3);
    h[(1, 1)] = f64::NAN;
    assert!(symmetric_eigenvalues(&h).is_err());
}

#[test]
fn expm_matches_block_rotation_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 16;
    for _ in 0..10 {
        let q = symmetric_eigen(&random_symmetric(n, &mut rng)).unwrap().eigenvectors;
        let thetas: Vec<f64> = (0..n / 2).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut block = SquareMatrix::zeros(n);
        let mut rot = SquareMatrix::zeros(n);
        for (k, &t) in thetas.iter().enumerate() {
            let (i, j) = (2 * k, 2 * k + 1);
            block[(i, j)] = t;
            block[(j, i)] = -t;
            rot[(i, i)] = t.cos();
            rot[(j, j)] = t.cos();
            rot[(i, j)] = t.sin();
            rot[(j, i)] = -t.sin();
        }
        let a = q.matmul(&block).matmul(&q.transpose());
        let a = SquareMatrix::from_fn(n, |i, j| 0.5 * (a[(i, j)] - a[(j, i)]));
        let expected = q.matmul(&rot).matmul(&q.transpose());
        let got = expm_skew(&a).unwrap();
        assert!(got.sub(&expected).max_abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn expm_is_orthogonal_with_inverse_at_minus_a(seed in any::<u64>(), n in 1usize..40, scale in 0.0f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_skew(n, scale, &mut rng);
        let r = expm_skew(&a).unwrap();
        let r_inv = expm_skew(&a.scale(-1.0)).unwrap();
        prop_assert!(identity_error(&r.matmul(&r_inv)) < 1e-12);
        prop_assert!(identity_error(&r.matmul(&r.transpose())) < 1e-12);
    }

    #[test]
    fn eigen_residuals_property(seed in any::<u64>(), n in 1usize..64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_symmetric(n, &mut rng);
        let s = symmetric_eigen(&h).unwrap();
        prop_assert!(s.reconstruction_residual(&h) <= 1e-10);
        prop_assert!(s.orthogonality_residual() <= 1e-10);
    }
}

#[test]
fn goe_gap_ratio_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 512;
    let window = mid_spectrum_window(n, 0.5).unwrap();
    let mut total = 0.0;
    let samples = 50;
    for _ in 0..samples {
        let e = symmetric_eigenvalues(&sample_goe_raw(n, &mut rng).unwrap()).unwrap();
        total += gap_ratio_stats(&e, window.clone()).unwrap().mean;
    }
    let r = total / samples as f64;
    assert!((0.52..=0.545).contains(&r), "GOE <r> = {r}");
}
