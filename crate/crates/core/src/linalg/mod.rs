//! Dense real linear algebra for exact diagonalization.
//!
//! Matrices are stored row-major in [`SquareMatrix`]. The symmetric
//! eigensolver reduces to tridiagonal form with blocked Householder
//! reflections, solves the tridiagonal problem by divide and conquer (with
//! implicit QL on small leaves), and back-transforms the eigenvectors.

mod dc;
mod expm;
mod goe;
mod matrix;
mod ql;
mod tridiag;

pub use expm::expm_skew;
pub use goe::{sample_goe, sample_goe_frobenius, sample_goe_raw};
pub use matrix::{gemm, SquareMatrix};

use thiserror::Error;

/// Absolute symmetry tolerance (scaled by `max(1, ‖H‖_max)`).
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("invalid dimension {0}")]
    InvalidDimension(usize),
    #[error("data length {len} does not match dimension {dim}x{dim}")]
    ShapeMismatch { dim: usize, len: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not symmetric: max |a_ij - a_ji| = {0:e}")]
    SymmetryViolation(f64),
    #[error("matrix is not antisymmetric: max |a_ij + a_ji| = {0:e}")]
    NotAntisymmetric(f64),
    #[error("cannot rescale spectrum: {0}")]
    InvalidWidth(String),
    #[error("eigensolver failed to converge: {0}")]
    NoConvergence(String),
}

/// A linear map that can act on the columns of a dense matrix.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `O·Q`.
    fn apply(&self, q: &SquareMatrix) -> SquareMatrix;
    /// `Tr(O Oᵀ)`.
    fn frobenius_sq(&self) -> f64;
}

impl LinearOperator for SquareMatrix {
    fn dim(&self) -> usize {
        SquareMatrix::dim(self)
    }

    fn apply(&self, q: &SquareMatrix) -> SquareMatrix {
        self.matmul(q)
    }

    fn frobenius_sq(&self) -> f64 {
        SquareMatrix::frobenius_sq(self)
    }
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors.
///
/// Column `k` of `eigenvectors` is the eigenvector of `eigenvalues[k]`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: SquareMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Copy of eigenvector `k`.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }

    /// `‖QᵀQ − I‖_max`.
    pub fn orthogonality_residual(&self) -> f64 {
        let q = &self.eigenvectors;
        let qtq = q.transpose().matmul(q);
        let mut worst = 0.0f64;
        for i in 0..qtq.dim() {
            for j in 0..qtq.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((qtq[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `‖QΛQᵀ − H‖_max`.
    pub fn reconstruction_residual(&self, h: &SquareMatrix) -> f64 {
        let n = self.dim();
        let q = &self.eigenvectors;
        let mut scaled = q.clone();
        for i in 0..n {
            for k in 0..n {
                scaled[(i, k)] *= self.eigenvalues[k];
            }
        }
        let rebuilt = scaled.matmul(&q.transpose());
        rebuilt.sub(h).max_abs()
    }
}

/// Which tridiagonal solver produces the eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TridiagonalSolver {
    /// Divide and conquer with QL leaves.
    #[default]
    DivideAndConquer,
    /// Implicitly shifted QL on the whole tridiagonal matrix.
    Ql,
}

fn check_symmetric(h: &SquareMatrix) -> Result<(), LinalgError> {
    if !h.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let asym = h.max_asymmetry();
    if asym > SYMMETRY_TOL * h.max_abs().max(1.0) {
        return Err(LinalgError::SymmetryViolation(asym));
    }
    Ok(())
}

/// Full eigendecomposition of a real symmetric matrix.
pub fn symmetric_eigen(h: &SquareMatrix) -> Result<Spectrum, LinalgError> {
    symmetric_eigen_with(h, TridiagonalSolver::default())
}

/// Full eigendecomposition using the chosen tridiagonal solver.
pub fn symmetric_eigen_with(
    h: &SquareMatrix,
    solver: TridiagonalSolver,
) -> Result<Spectrum, LinalgError> {
    check_symmetric(h)?;
    let n = h.dim();
    // Column-major and row-major coincide for a symmetric matrix.
    let mut a = h.as_slice().to_vec();
    let tri = tridiag::reduce(&mut a, n);
    let mut d = tri.diag.clone();
    let mut z = match solver {
        TridiagonalSolver::DivideAndConquer => dc::solve(&mut d, &tri.offdiag)?,
        TridiagonalSolver::Ql => {
            let mut z = identity_colmajor(n);
            let mut e = tri.offdiag.clone();
            ql::ql_implicit(&mut d, &mut e, Some((&mut z, n)))?;
            ql::sort_pairs(&mut d, Some((&mut z, n)));
            z
        }
    };
    tridiag::apply_q(&a, n, &tri.tau, &mut z);
    // z is column-major with column k = eigenvector k; transpose to row-major.
    let eigenvectors = SquareMatrix::from_colmajor(n, z);
    Ok(Spectrum {
        eigenvalues: d,
        eigenvectors,
    })
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(h: &SquareMatrix) -> Result<Vec<f64>, LinalgError> {
    check_symmetric(h)?;
    let n = h.dim();
    let mut a = h.as_slice().to_vec();
    let tri = tridiag::reduce(&mut a, n);
    let mut d = tri.diag;
    let mut e = tri.offdiag;
    ql::ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn identity_colmajor(n: usize) -> Vec<f64> {
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    z
}
