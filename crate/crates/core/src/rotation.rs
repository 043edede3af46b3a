//! First-order quasilocal rotations on the full matrix.
//!
//! An off-diagonal element `H_{σσ′}` is resonant when the unperturbed gap
//! `|H_{σσ} − H_{σ′σ′}|` is below the cutoff `ε`; the remaining
//! (perturbative) elements are removed at first order by conjugating with
//! `e^A`, `A_{σσ′} = H_{σσ′}/(H_{σσ} − H_{σ′σ′})`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{expm_skew, LinalgError, SquareMatrix};

#[derive(Debug, Error, Clone)]
pub enum RotationError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("perturbative element ({row}, {col}) has zero energy denominator")]
    ZeroDenominator { row: usize, col: usize },
    #[error("invalid cutoff schedule: {0}")]
    InvalidSchedule(String),
    #[error("rotation sequence stopped converging after step {}", .0.steps.len())]
    NotConverging(Box<SwReport>),
}

/// `H = h0 + j_res + j_per`, with disjoint off-diagonal supports.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitHamiltonian {
    pub h0: SquareMatrix,
    pub j_res: SquareMatrix,
    pub j_per: SquareMatrix,
    pub epsilon: f64,
}

impl SplitHamiltonian {
    pub fn energies(&self) -> Vec<f64> {
        self.h0.diag()
    }
}

pub fn split_hamiltonian(h: &SquareMatrix, epsilon: f64) -> SplitHamiltonian {
    let n = h.dim();
    let e = h.diag();
    let mut h0 = SquareMatrix::zeros(n);
    let mut j_res = SquareMatrix::zeros(n);
    let mut j_per = SquareMatrix::zeros(n);
    for i in 0..n {
        h0[(i, i)] = e[i];
        for j in 0..n {
            let x = h[(i, j)];
            if i == j || x == 0.0 {
                continue;
            }
            if (e[i] - e[j]).abs() < epsilon {
                j_res[(i, j)] = x;
            } else {
                j_per[(i, j)] = x;
            }
        }
    }
    SplitHamiltonian {
        h0,
        j_res,
        j_per,
        epsilon,
    }
}

/// `A_{σσ′} = (j_per)_{σσ′}/(E_σ − E_σ′)` on the support of `j_per`.
pub fn build_generator(split: &SplitHamiltonian) -> Result<SquareMatrix, RotationError> {
    let n = split.h0.dim();
    let e = split.energies();
    let mut a = SquareMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let x = split.j_per[(i, j)];
            if x == 0.0 {
                continue;
            }
            let gap = e[i] - e[j];
            if gap == 0.0 {
                return Err(RotationError::ZeroDenominator { row: i, col: j });
            }
            let v = x / gap;
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
    Ok(a)
}

/// `e^A·H·e^{−A}`, symmetrized to remove rounding asymmetry.
pub fn rotate(h: &SquareMatrix, a: &SquareMatrix) -> Result<SquareMatrix, RotationError> {
    let r = expm_skew(a)?;
    Ok(conjugate(h, &r))
}

fn conjugate(h: &SquareMatrix, r: &SquareMatrix) -> SquareMatrix {
    let mut out = r.matmul(h).matmul(&r.transpose());
    let n = out.dim();
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (out[(i, j)] + out[(j, i)]);
            out[(i, j)] = m;
            out[(j, i)] = m;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwStep {
    pub epsilon: f64,
    /// Largest off-diagonal element after the step.
    pub offdiag_norm: f64,
    /// Largest off-diagonal element with gap `≥ ε` after the step.
    pub perturbative_norm: f64,
    /// Largest off-diagonal element with gap `< ε` after the step.
    pub resonant_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwReport {
    pub initial_offdiag_norm: f64,
    pub initial_perturbative_norm: f64,
    pub initial_resonant_norm: f64,
    pub steps: Vec<SwStep>,
}

#[derive(Debug, Clone)]
pub struct SwResult {
    pub hamiltonian: SquareMatrix,
    /// Accumulated `U` with `hamiltonian = U·H·Uᵀ`.
    pub rotation: SquareMatrix,
    pub report: SwReport,
}

/// Applies one split/generate/rotate step per schedule entry.
///
/// Stops early once no off-diagonal element remains. Fails when the
/// perturbative norm grows on two consecutive steps.
pub fn sw_iterate(h: &SquareMatrix, schedule: &[f64]) -> Result<SwResult, RotationError> {
    if schedule.is_empty() {
        return Err(RotationError::InvalidSchedule("empty".into()));
    }
    if schedule.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(RotationError::InvalidSchedule("cutoffs must be positive".into()));
    }
    if schedule.windows(2).any(|w| w[1] > w[0]) {
        return Err(RotationError::InvalidSchedule("cutoffs must be non-increasing".into()));
    }
    let n = h.dim();
    let first = split_hamiltonian(h, schedule[0]);
    let mut report = SwReport {
        initial_offdiag_norm: h.max_abs_offdiag(),
        initial_perturbative_norm: first.j_per.max_abs(),
        initial_resonant_norm: first.j_res.max_abs(),
        steps: Vec::new(),
    };
    let mut current = h.clone();
    let mut u = SquareMatrix::identity(n);
    let mut previous = report.initial_perturbative_norm;
    let mut rises = 0;
    if report.initial_offdiag_norm > 0.0 {
        for &eps in schedule {
            let split = split_hamiltonian(&current, eps);
            let a = build_generator(&split)?;
            let r = expm_skew(&a)?;
            current = conjugate(&current, &r);
            u = r.matmul(&u);
            let after = split_hamiltonian(&current, eps);
            let step = SwStep {
                epsilon: eps,
                offdiag_norm: current.max_abs_offdiag(),
                perturbative_norm: after.j_per.max_abs(),
                resonant_norm: after.j_res.max_abs(),
            };
            rises = if step.perturbative_norm > previous { rises + 1 } else { 0 };
            previous = step.perturbative_norm;
            let done = step.offdiag_norm == 0.0;
            report.steps.push(step);
            if rises >= 2 {
                return Err(RotationError::NotConverging(Box::new(report)));
            }
            if done {
                break;
            }
        }
    }
    Ok(SwResult {
        hamiltonian: current,
        rotation: u,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: usize, entries: &[(usize, usize, f64)]) -> SquareMatrix {
        let mut m = SquareMatrix::zeros(n);
        for &(i, j, v) in entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    #[test]
    fn split_reconstructs() {
        let h = sym(3, &[(0, 0, 1.0), (1, 1, 1.05), (2, 2, 3.0), (0, 1, 0.2), (1, 2, 0.3)]);
        let s = split_hamiltonian(&h, 0.1);
        assert_eq!(s.j_res[(0, 1)], 0.2);
        assert_eq!(s.j_per[(1, 2)], 0.3);
        assert_eq!(s.j_per[(0, 1)], 0.0);
        assert_eq!(s.h0.add(&s.j_res).add(&s.j_per), h);
        let all_res = split_hamiltonian(&h, f64::INFINITY);
        assert_eq!(all_res.j_per.max_abs(), 0.0);
    }

    #[test]
    fn two_level_generator() {
        let h = sym(2, &[(0, 0, 2.0), (1, 1, -1.0), (0, 1, 0.01)]);
        let a = build_generator(&split_hamiltonian(&h, 0.5)).unwrap();
        assert!((a[(0, 1)] - 0.01 / 3.0).abs() < 1e-18);
        assert_eq!(a[(1, 0)], -a[(0, 1)]);
    }

    #[test]
    fn zero_generator_leaves_h() {
        let h = sym(2, &[(0, 0, 2.0), (1, 1, -1.0), (0, 1, 0.01)]);
        let out = rotate(&h, &SquareMatrix::zeros(2)).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn first_order_cancels() {
        let g = 1e-3;
        let h = sym(2, &[(0, 0, 1.0), (1, 1, -1.0), (0, 1, g)]);
        let out = rotate(&h, &build_generator(&split_hamiltonian(&h, 0.1)).unwrap()).unwrap();
        assert!(out[(0, 1)].abs() < 10.0 * g * g);
    }

    #[test]
    fn diagonal_input_converges_immediately() {
        let h = SquareMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let res = sw_iterate(&h, &[0.1, 0.1]).unwrap();
        assert!(res.report.steps.is_empty());
        assert_eq!(res.rotation, SquareMatrix::identity(3));
    }

    #[test]
    fn schedule_validation() {
        let h = SquareMatrix::identity(2);
        assert!(sw_iterate(&h, &[]).is_err());
        assert!(sw_iterate(&h, &[0.1, 0.2]).is_err());
        assert!(sw_iterate(&h, &[0.0]).is_err());
    }
}
