//! Level statistics and eigenstate diagnostics of local operators.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{gemm, LinearOperator, SquareMatrix, Spectrum};

pub const DEFAULT_WINDOW_FRACTION: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("window fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("window {start}..{end} does not fit a spectrum of {dim} levels")]
    WindowOutOfRange { start: usize, end: usize, dim: usize },
    #[error("need at least 3 levels in the window, got {0}")]
    TooFewLevels(usize),
    #[error("every gap ratio in the window is degenerate")]
    AllDegenerate,
    #[error("operator annihilates eigenstate {0}")]
    AnnihilatedState(usize),
    #[error("operator dimension {op} does not match spectrum dimension {dim}")]
    DimensionMismatch { op: usize, dim: usize },
}

/// Central `round(fraction·dim)` indices, centered on `dim/2`.
pub fn mid_spectrum_window(dim: usize, fraction: f64) -> Result<Range<usize>, DiagnosticsError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(DiagnosticsError::InvalidFraction(fraction));
    }
    let count = ((fraction * dim as f64).round() as usize).clamp(1.min(dim), dim);
    let start = dim / 2 - count / 2;
    Ok(start..start + count)
}

fn check_window(window: &Range<usize>, dim: usize) -> Result<(), DiagnosticsError> {
    if window.start >= window.end || window.end > dim {
        return Err(DiagnosticsError::WindowOutOfRange {
            start: window.start,
            end: window.end,
            dim,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRatioStats {
    pub mean: f64,
    pub n_used: usize,
    /// Ratios dropped because one of their gaps was exactly zero.
    pub n_skipped: usize,
}

/// Mean of `min(δ_n, δ_{n+1})/max(δ_n, δ_{n+1})` over consecutive gaps of
/// the ascending levels inside `window`.
pub fn gap_ratio_stats(
    eigenvalues: &[f64],
    window: Range<usize>,
) -> Result<GapRatioStats, DiagnosticsError> {
    check_window(&window, eigenvalues.len())?;
    let levels = &eigenvalues[window];
    if levels.len() < 3 {
        return Err(DiagnosticsError::TooFewLevels(levels.len()));
    }
    let mut sum = 0.0;
    let mut n_used = 0;
    let mut n_skipped = 0;
    for w in levels.windows(3) {
        let (a, b) = (w[1] - w[0], w[2] - w[1]);
        if a == 0.0 || b == 0.0 {
            n_skipped += 1;
            continue;
        }
        sum += a.min(b) / a.max(b);
        n_used += 1;
    }
    if n_used == 0 {
        return Err(DiagnosticsError::AllDegenerate);
    }
    Ok(GapRatioStats {
        mean: sum / n_used as f64,
        n_used,
        n_skipped,
    })
}

/// `M = Qᵀ·O·Q`: matrix elements between all eigenstates.
pub fn operator_matrix<O: LinearOperator + ?Sized>(
    o: &O,
    spectrum: &Spectrum,
) -> Result<SquareMatrix, DiagnosticsError> {
    let n = spectrum.dim();
    let rows = operator_rows(o, spectrum, 0..n)?;
    Ok(SquareMatrix::from_rows(n, rows.elements).expect("full window is square"))
}

/// Rows `ψ ∈ window` of `M = Qᵀ·O·Q`, plus `‖Oψ‖²` for each of them.
#[derive(Debug, Clone)]
pub struct OperatorRows {
    pub window: Range<usize>,
    pub dim: usize,
    /// Row-major `window.len() × dim`.
    pub elements: Vec<f64>,
    pub image_norms_sq: Vec<f64>,
}

impl OperatorRows {
    pub fn row(&self, k: usize) -> &[f64] {
        &self.elements[k * self.dim..(k + 1) * self.dim]
    }

    /// Largest `|Σ_ψ′ M_{ψψ′}² − ‖Oψ‖²| / ‖Oψ‖²` over the window.
    pub fn sum_rule_residual(&self) -> f64 {
        (0..self.window.len())
            .map(|k| {
                let s: f64 = self.row(k).iter().map(|x| x * x).sum();
                let t = self.image_norms_sq[k];
                if t == 0.0 {
                    s
                } else {
                    (s - t).abs() / t
                }
            })
            .fold(0.0, f64::max)
    }
}

pub fn operator_rows<O: LinearOperator + ?Sized>(
    o: &O,
    spectrum: &Spectrum,
    window: Range<usize>,
) -> Result<OperatorRows, DiagnosticsError> {
    let n = spectrum.dim();
    if o.dim() != n {
        return Err(DiagnosticsError::DimensionMismatch { op: o.dim(), dim: n });
    }
    check_window(&window, n)?;
    let q = &spectrum.eigenvectors;
    let oq = o.apply(q);
    let k = window.len();
    let mut elements = vec![0.0; k * n];
    // Row i of the left factor is eigenvector start+i, i.e. column start+i of Q.
    gemm(
        k,
        n,
        n,
        1.0,
        &q.as_slice()[window.start..],
        (1, n),
        oq.as_slice(),
        (n, 1),
        0.0,
        &mut elements,
        (n, 1),
    );
    let oqs = oq.as_slice();
    let image_norms_sq = window
        .clone()
        .map(|c| (0..n).map(|r| oqs[r * n + c].powi(2)).sum())
        .collect();
    Ok(OperatorRows {
        window,
        dim: n,
        elements,
        image_norms_sq,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IprResult {
    pub per_state: Vec<f64>,
    /// `D = ⟨ln IPR⟩` over the window.
    pub mean_log: f64,
    pub window: Range<usize>,
}

/// IPR of each row after normalizing it to unit length.
pub fn ipr_from_rows(rows: &OperatorRows) -> Result<IprResult, DiagnosticsError> {
    let mut per_state = Vec::with_capacity(rows.window.len());
    for k in 0..rows.window.len() {
        let row = rows.row(k);
        let norm_sq: f64 = row.iter().map(|x| x * x).sum();
        if norm_sq == 0.0 {
            return Err(DiagnosticsError::AnnihilatedState(rows.window.start + k));
        }
        let fourth: f64 = row.iter().map(|x| (x * x / norm_sq).powi(2)).sum();
        per_state.push(1.0 / fourth);
    }
    let mean_log = per_state.iter().map(|x| x.ln()).sum::<f64>() / per_state.len() as f64;
    Ok(IprResult {
        per_state,
        mean_log,
        window: rows.window.clone(),
    })
}

pub fn ipr<O: LinearOperator + ?Sized>(
    o: &O,
    spectrum: &Spectrum,
    window: Range<usize>,
) -> Result<IprResult, DiagnosticsError> {
    ipr_from_rows(&operator_rows(o, spectrum, window)?)
}

/// Median `|M_{ψψ′}|` over pairs `ψ ≠ ψ′` inside `window`.
pub fn eth_offdiag_scale<O: LinearOperator + ?Sized>(
    o: &O,
    spectrum: &Spectrum,
    window: Range<usize>,
) -> Result<f64, DiagnosticsError> {
    let rows = operator_rows(o, spectrum, window.clone())?;
    Ok(eth_offdiag_scale_from_rows(&rows))
}

pub fn eth_offdiag_scale_from_rows(rows: &OperatorRows) -> f64 {
    let w = &rows.window;
    let mut values = Vec::with_capacity(w.len() * w.len().saturating_sub(1));
    for k in 0..w.len() {
        let row = rows.row(k);
        for c in w.clone() {
            if c != w.start + k {
                values.push(row[c].abs());
            }
        }
    }
    median(&mut values)
}

/// Median of a slice (mean of the two central values for even length);
/// `NaN` for an empty slice.
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial_spectrum(n: usize) -> Spectrum {
        Spectrum {
            eigenvalues: (0..n).map(|i| i as f64).collect(),
            eigenvectors: SquareMatrix::identity(n),
        }
    }

    #[test]
    fn window_examples() {
        assert_eq!(mid_spectrum_window(10, 0.2).unwrap(), 4..6);
        assert_eq!(mid_spectrum_window(10, 1.0).unwrap(), 0..10);
        assert_eq!(mid_spectrum_window(7, 1.0).unwrap(), 0..7);
        let w = mid_spectrum_window(16384, 0.2).unwrap();
        assert_eq!(w.len(), 3277);
        assert_eq!(w.start, 8192 - 1638);
        assert!(mid_spectrum_window(10, 0.0).is_err());
    }

    #[test]
    fn equal_spacing_gives_unit_ratio() {
        let e: Vec<f64> = (0..20).map(|i| 0.5 * i as f64).collect();
        let s = gap_ratio_stats(&e, 0..20).unwrap();
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.n_used, 18);
    }

    #[test]
    fn degenerate_gaps_are_skipped() {
        let e = [0.0, 1.0, 1.0, 2.0, 4.0];
        let s = gap_ratio_stats(&e, 0..5).unwrap();
        assert_eq!(s.n_skipped, 2);
        assert_eq!(s.n_used, 1);
        assert_eq!(s.mean, 0.5);
        assert_eq!(gap_ratio_stats(&[1.0, 1.0, 1.0], 0..3), Err(DiagnosticsError::AllDegenerate));
        assert_eq!(gap_ratio_stats(&[1.0, 2.0], 0..2), Err(DiagnosticsError::TooFewLevels(2)));
    }

    #[test]
    fn identity_operator() {
        let s = trivial_spectrum(4);
        let m = operator_matrix(&SquareMatrix::identity(4), &s).unwrap();
        assert_eq!(m, SquareMatrix::identity(4));
        let r = ipr(&SquareMatrix::identity(4), &s, 0..4).unwrap();
        assert_eq!(r.per_state, vec![1.0; 4]);
        assert_eq!(r.mean_log, 0.0);
        let eth = eth_offdiag_scale(&SquareMatrix::identity(4), &s, 0..4).unwrap();
        assert_eq!(eth, 0.0);
    }

    #[test]
    fn annihilated_state_is_reported() {
        let s = trivial_spectrum(3);
        let o = SquareMatrix::diagonal(&[1.0, 0.0, 2.0]);
        assert_eq!(ipr(&o, &s, 0..3), Err(DiagnosticsError::AnnihilatedState(1)));
    }

    #[test]
    fn dimension_mismatch() {
        let s = trivial_spectrum(3);
        assert!(matches!(
            ipr(&SquareMatrix::identity(2), &s, 0..3),
            Err(DiagnosticsError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }
}
