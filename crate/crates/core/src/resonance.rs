//! Single-flip resonances on the chain and closed-form resonance / buffer
//! criteria.
//!
//! Level-counting formulas use base-2 logarithms (a region of `V` spins has
//! `2^V` states); the buffer length `ℓ` is a ratio of logarithms and uses
//! natural logs. All ratios that can overflow are evaluated as logarithms.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ChainRealization;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResonanceError {
    #[error("resonance cutoff must be positive and finite, got {0}")]
    InvalidCutoff(f64),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("alpha = {alpha} >= 1/sqrt(2): delocalized regime, no finite buffer")]
    Delocalized { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub resonant: Vec<bool>,
    /// Maximal runs of adjacent resonant sites, in order.
    pub blocks: Vec<Range<usize>>,
    pub epsilon: f64,
    pub empirical_density: f64,
}

impl ResonanceReport {
    pub fn n_resonant(&self) -> usize {
        self.resonant.iter().filter(|&&r| r).count()
    }
}

/// `γ^{1/20}`.
pub fn default_epsilon(gamma: f64) -> f64 {
    gamma.powf(1.0 / 20.0)
}

/// `min` over the four neighbour configurations of `|ΔE_i|`.
pub fn min_flip_energy(r: &ChainRealization, i: usize) -> f64 {
    let right = r.bond(i as isize);
    let left = r.bond(i as isize - 1);
    let h = r.h[i];
    let mut best = f64::INFINITY;
    for a in [-1.0, 1.0] {
        for b in [-1.0, 1.0] {
            best = best.min((2.0 * (h + a * right + b * left)).abs());
        }
    }
    best
}

/// Flags site `i` when some neighbour configuration gives `|ΔE_i| < ε`.
/// `epsilon = None` uses [`default_epsilon`] of the chain's `γ`.
pub fn detect_resonant_sites(
    r: &ChainRealization,
    epsilon: Option<f64>,
) -> Result<ResonanceReport, ResonanceError> {
    let eps = epsilon.unwrap_or_else(|| default_epsilon(r.params.gamma));
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ResonanceError::InvalidCutoff(eps));
    }
    let n = r.n_sites();
    let resonant: Vec<bool> = (0..n).map(|i| min_flip_energy(r, i) < eps).collect();
    let blocks = runs(&resonant);
    let count = resonant.iter().filter(|&&x| x).count();
    Ok(ResonanceReport {
        empirical_density: count as f64 / n as f64,
        resonant,
        blocks,
        epsilon: eps,
    })
}

/// Maximal runs of `true`.
pub fn runs(flags: &[bool]) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(s..flags.len());
    }
    out
}

/// Matrix element over level spacing; resonant when `≥ 1`.
pub fn resonance_ratio(matrix_element: f64, level_spacing: f64) -> Result<f64, ResonanceError> {
    if !(level_spacing > 0.0) {
        return Err(ResonanceError::Domain(format!(
            "level spacing must be positive, got {level_spacing}"
        )));
    }
    Ok(matrix_element.abs() / level_spacing)
}

fn check_gamma(gamma: f64) -> Result<(), ResonanceError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(ResonanceError::Domain(format!("gamma = {gamma} outside (0, 1)")));
    }
    Ok(())
}

fn check_geometry(l: f64, d: u32) -> Result<(), ResonanceError> {
    if !(l >= 1.0 && l.is_finite()) || d == 0 {
        return Err(ResonanceError::Domain(format!(
            "need L >= 1 and d >= 1, got L = {l}, d = {d}"
        )));
    }
    Ok(())
}

/// `log₂(γ^r·2^{L^d/2})`.
pub fn log2_bubble_resonance_ratio(gamma: f64, r: f64, l: f64, d: u32) -> Result<f64, ResonanceError> {
    check_gamma(gamma)?;
    check_geometry(l, d)?;
    if !(r >= 0.0) {
        return Err(ResonanceError::Domain(format!("distance r = {r} must be >= 0")));
    }
    Ok(r * gamma.log2() + 0.5 * l.powi(d as i32))
}

/// `γ^r·2^{L^d/2}`; may be `+∞` when the logarithm exceeds the `f64` range.
pub fn bubble_resonance_ratio(gamma: f64, r: f64, l: f64, d: u32) -> Result<f64, ResonanceError> {
    Ok(log2_bubble_resonance_ratio(gamma, r, l, d)?.exp2())
}

/// `r(L) = L^d / (2·|log₂ γ|)`: the distance at which the bubble ratio hits 1.
pub fn buffer_radius(gamma: f64, l: f64, d: u32) -> Result<f64, ResonanceError> {
    check_gamma(gamma)?;
    check_geometry(l, d)?;
    Ok(l.powi(d as i32) / (2.0 * gamma.log2().abs()))
}

/// `log₂(γ^{r/2}·2^{(r/2)^d/2})`.
pub fn log2_bootstrap_ratio(gamma: f64, r: f64, d: u32) -> Result<f64, ResonanceError> {
    check_gamma(gamma)?;
    if !(r >= 0.0) || d == 0 {
        return Err(ResonanceError::Domain(format!("need r >= 0 and d >= 1, got r = {r}, d = {d}")));
    }
    let half = 0.5 * r;
    Ok(half * gamma.log2() + 0.5 * half.powi(d as i32))
}

pub fn bootstrap_ratio(gamma: f64, r: f64, d: u32) -> Result<f64, ResonanceError> {
    Ok(log2_bootstrap_ratio(gamma, r, d)?.exp2())
}

/// `(J₁/W_Gf)·√d_Gf`; the first added spin thermalizes when this exceeds 1.
pub fn first_spin_criterion(j1: f64, w_gf: f64, d_gf: f64) -> Result<f64, ResonanceError> {
    if !(w_gf > 0.0) || !(d_gf >= 1.0) {
        return Err(ResonanceError::Domain(format!(
            "need W_Gf > 0 and d_Gf >= 1, got {w_gf}, {d_gf}"
        )));
    }
    Ok(j1 / w_gf * d_gf.sqrt())
}

/// `ℓ = −ln(J0·√d_Gf / W_Gf) / ln(√2·α)`, clamped below at 0.
pub fn predicted_buffer_length(j0: f64, alpha: f64, w_gf: f64, d_gf: f64) -> Result<f64, ResonanceError> {
    if !(alpha > 0.0) {
        return Err(ResonanceError::Domain(format!("alpha = {alpha} must be positive")));
    }
    if alpha >= FRAC_1_SQRT_2 {
        return Err(ResonanceError::Delocalized { alpha });
    }
    if !(j0 > 0.0) {
        return Err(ResonanceError::Domain(format!("J0 = {j0} must be positive")));
    }
    let strength = first_spin_criterion(j0, w_gf, d_gf)?;
    let ell = -strength.ln() / (std::f64::consts::SQRT_2 * alpha).ln();
    Ok(ell.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LocalizedBuffer,
    Critical,
    Delocalized,
}

/// Compares `α` with `α_c = 1/√2`.
pub fn classify_regime(alpha: f64) -> Regime {
    if alpha < FRAC_1_SQRT_2 {
        Regime::LocalizedBuffer
    } else if alpha > FRAC_1_SQRT_2 {
        Regime::Delocalized
    } else {
        Regime::Critical
    }
}
