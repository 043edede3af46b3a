//! Hamiltonians over the spin-½ product basis.
//!
//! Two families are built here:
//!
//! * the random-field, random-transverse-field, random-exchange Ising chain,
//!   indexed by bitmask configurations (`bit i = 1` ⇔ `σ_i = +1`, basis
//!   index = bitmask);
//! * a random-matrix bath of `n_bath` spins coupled to `n_loc` localized
//!   spins through exponentially decaying couplings, laid out as the
//!   Kronecker product `bath ⊗ S_1 ⊗ … ⊗ S_{n_loc}` with the local index
//!   `0` of each spin factor carrying `S^z = +1`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    gemm, sample_goe, sample_goe_frobenius, LinalgError, LinearOperator, SquareMatrix,
};

/// Largest Hilbert-space dimension built unless configured otherwise.
pub const DEFAULT_MAX_DIM: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension {dim} exceeds the configured cap of {cap}")]
    Capacity { dim: usize, cap: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("site {site} out of range for {n} spins")]
    SiteOutOfRange { site: usize, n: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Closed interval `[lo, hi]` for a uniform density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn validate(&self, name: &str) -> Result<(), ModelError> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(ModelError::InvalidParams(format!(
                "{name} bounds [{}, {}] must be finite with lo < hi",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(self.lo..=self.hi)
    }
}

/// Spin configuration of `n` sites packed in a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    bits: u64,
    n: usize,
}

impl SpinConfiguration {
    pub fn new(bits: u64, n: usize) -> Result<Self, ModelError> {
        if n == 0 || n > 63 || bits >> n != 0 {
            return Err(ModelError::InvalidParams(format!(
                "bits {bits:#b} do not fit {n} sites"
            )));
        }
        Ok(Self { bits, n })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    /// `σ_i ∈ {−1, +1}`.
    pub fn sigma(&self, i: usize) -> f64 {
        if self.bits >> i & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// `σ^{(i)}`: the configuration with spin `i` reversed.
    pub fn flipped(&self, i: usize) -> Self {
        Self {
            bits: self.bits ^ (1 << i),
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_sites: usize,
    pub gamma: f64,
    pub h_bounds: Interval,
    #[serde(rename = "Gamma_bounds", alias = "gamma_bounds")]
    pub gamma_bounds: Interval,
    #[serde(rename = "J_bounds", alias = "j_bounds")]
    pub j_bounds: Interval,
}

impl ChainParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_sites < 2 {
            return Err(ModelError::InvalidParams(format!(
                "n_sites = {} must be at least 2",
                self.n_sites
            )));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(ModelError::InvalidParams(format!(
                "gamma = {} must be finite and non-negative",
                self.gamma
            )));
        }
        self.h_bounds.validate("h")?;
        self.gamma_bounds.validate("Gamma")?;
        self.j_bounds.validate("J")
    }
}

/// One disorder draw of the chain. `j[i]` couples sites `i` and `i + 1`;
/// couplings past either end are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRealization {
    pub params: ChainParams,
    pub h: Vec<f64>,
    #[serde(rename = "Gamma")]
    pub gamma_i: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
}

impl ChainRealization {
    /// Draws `h`, then `Γ`, then `J`, each site in order.
    pub fn sample<R: Rng + ?Sized>(params: &ChainParams, rng: &mut R) -> Result<Self, ModelError> {
        params.validate()?;
        let n = params.n_sites;
        let h = (0..n).map(|_| params.h_bounds.sample(rng)).collect();
        let gamma_i = (0..n).map(|_| params.gamma_bounds.sample(rng)).collect();
        let j = (0..n - 1).map(|_| params.j_bounds.sample(rng)).collect();
        Ok(Self {
            params: params.clone(),
            h,
            gamma_i,
            j,
        })
    }

    /// Realization with explicit arrays; each value must lie inside its bounds.
    pub fn from_arrays(
        params: ChainParams,
        h: Vec<f64>,
        gamma_i: Vec<f64>,
        j: Vec<f64>,
    ) -> Result<Self, ModelError> {
        params.validate()?;
        let n = params.n_sites;
        if h.len() != n || gamma_i.len() != n || j.len() != n - 1 {
            return Err(ModelError::InvalidParams(format!(
                "array lengths h={}, Gamma={}, J={} do not match {n} sites",
                h.len(),
                gamma_i.len(),
                j.len()
            )));
        }
        let inside = |xs: &[f64], b: &Interval| xs.iter().all(|&x| b.contains(x));
        if !inside(&h, &params.h_bounds)
            || !inside(&gamma_i, &params.gamma_bounds)
            || !inside(&j, &params.j_bounds)
        {
            return Err(ModelError::InvalidParams("sample outside its bounds".into()));
        }
        Ok(Self {
            params,
            h,
            gamma_i,
            j,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites
    }

    /// Exchange coupling on bond `(i, i+1)`, zero outside the chain.
    pub fn bond(&self, i: isize) -> f64 {
        if i < 0 {
            0.0
        } else {
            self.j.get(i as usize).copied().unwrap_or(0.0)
        }
    }

    /// Classical energy `Σ h_i σ_i + Σ J_i σ_i σ_{i+1}`.
    pub fn classical_energy(&self, sigma: SpinConfiguration) -> f64 {
        let n = self.n_sites();
        let mut e = 0.0;
        for i in 0..n {
            e += self.h[i] * sigma.sigma(i);
        }
        for i in 0..n - 1 {
            e += self.j[i] * sigma.sigma(i) * sigma.sigma(i + 1);
        }
        e
    }
}

/// `E(σ) − E(σ^{(i)}) = 2σ_i(h_i + J_i σ_{i+1} + J_{i−1} σ_{i−1})`.
pub fn delta_e(r: &ChainRealization, sigma: SpinConfiguration, i: usize) -> f64 {
    let n = r.n_sites();
    let right = if i + 1 < n { sigma.sigma(i + 1) } else { 0.0 };
    let left = if i > 0 { sigma.sigma(i - 1) } else { 0.0 };
    let ii = i as isize;
    2.0 * sigma.sigma(i) * (r.h[i] + r.bond(ii) * right + r.bond(ii - 1) * left)
}

fn check_cap(dim: usize, cap: usize) -> Result<(), ModelError> {
    if dim > cap {
        return Err(ModelError::Capacity { dim, cap });
    }
    Ok(())
}

/// Dense chain Hamiltonian: classical energies on the diagonal and
/// `γ·Γ_i` between every `σ` and `σ^{(i)}`.
pub fn build_chain_hamiltonian(
    r: &ChainRealization,
    max_dim: usize,
) -> Result<SquareMatrix, ModelError> {
    let n = r.n_sites();
    if n >= usize::BITS as usize - 1 {
        return Err(ModelError::Capacity { dim: usize::MAX, cap: max_dim });
    }
    let dim = 1usize << n;
    check_cap(dim, max_dim)?;
    let mut h = SquareMatrix::zeros(dim);
    for b in 0..dim {
        let sigma = SpinConfiguration { bits: b as u64, n };
        h[(b, b)] = r.classical_energy(sigma);
        for i in 0..n {
            h[(b, b ^ (1 << i))] = r.params.gamma * r.gamma_i[i];
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathLiomParams {
    pub n_bath: usize,
    #[serde(default)]
    pub n_loc: usize,
    #[serde(rename = "J0", alias = "j0")]
    pub j0: f64,
    pub alpha: f64,
    #[serde(rename = "W_Gf", alias = "w_gf")]
    pub w_gf: f64,
    pub h_bounds: Interval,
}

impl BathLiomParams {
    pub fn validate(&self, max_dim: usize) -> Result<(), ModelError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ModelError::InvalidParams(format!(
                "alpha = {} outside (0, 1)",
                self.alpha
            )));
        }
        if !(self.j0 >= 0.0 && self.j0.is_finite()) {
            return Err(ModelError::InvalidParams(format!("J0 = {} must be >= 0", self.j0)));
        }
        if !(self.w_gf > 0.0 && self.w_gf.is_finite()) {
            return Err(ModelError::InvalidParams(format!("W_Gf = {} must be > 0", self.w_gf)));
        }
        self.h_bounds.validate("h")?;
        let spins = self.n_bath + self.n_loc;
        if spins >= usize::BITS as usize - 1 {
            return Err(ModelError::Capacity { dim: usize::MAX, cap: max_dim });
        }
        check_cap(1 << spins, max_dim)
    }

    pub fn bath_dim(&self) -> usize {
        1 << self.n_bath
    }

    pub fn dim(&self) -> usize {
        1 << (self.n_bath + self.n_loc)
    }

    /// `J_i = J0·α^i`; the nearest added spin sits at distance 1.
    pub fn coupling(&self, distance: usize) -> f64 {
        self.j0 * self.alpha.powi(distance as i32)
    }
}

/// Built bath-LIOM system with every random ingredient kept for diagnostics.
#[derive(Debug, Clone)]
pub struct BathLiomSystem {
    pub hamiltonian: SquareMatrix,
    pub h_gf: SquareMatrix,
    pub v_gf: SquareMatrix,
    pub fields: Vec<f64>,
    pub couplings: Vec<f64>,
    /// `J_i·V_Gf ⊗ S^x_i` for `i = 1..=n_loc`.
    pub coupling_operators: Vec<TensorOperator>,
}

/// Samples `H_Gf` (width `W_Gf`), then `V_Gf` (`Tr V² = d_Gf`), then the
/// fields, and assembles `H_Gf⊗I + Σ h_i S^z_i + Σ J_i V_Gf⊗S^x_i`.
///
/// A one-state bath (`n_bath = 0`) has `H_Gf = 0` since its width is zero.
pub fn build_bath_liom_hamiltonian<R: Rng + ?Sized>(
    p: &BathLiomParams,
    max_dim: usize,
    rng: &mut R,
) -> Result<BathLiomSystem, ModelError> {
    p.validate(max_dim)?;
    let d = p.bath_dim();
    let h_gf = if d == 1 {
        SquareMatrix::zeros(1)
    } else {
        sample_goe(d, p.w_gf, rng)?
    };
    let v_gf = sample_goe_frobenius(d, rng)?;
    let fields: Vec<f64> = (0..p.n_loc).map(|_| p.h_bounds.sample(rng)).collect();
    let couplings: Vec<f64> = (1..=p.n_loc).map(|i| p.coupling(i)).collect();
    let hamiltonian = assemble_bath_liom(&h_gf, &v_gf, &fields, &couplings);
    let coupling_operators = couplings
        .iter()
        .enumerate()
        .map(|(k, &jk)| TensorOperator {
            bath: Some(v_gf.scale(jk)),
            spin: Some((Pauli::X, k)),
            bath_dim: d,
            n_loc: p.n_loc,
        })
        .collect();
    Ok(BathLiomSystem {
        hamiltonian,
        h_gf,
        v_gf,
        fields,
        couplings,
        coupling_operators,
    })
}

fn assemble_bath_liom(
    h_gf: &SquareMatrix,
    v_gf: &SquareMatrix,
    fields: &[f64],
    couplings: &[f64],
) -> SquareMatrix {
    let d = h_gf.dim();
    let n = fields.len();
    let m = 1usize << n;
    let dim = d * m;
    let mut h = SquareMatrix::zeros(dim);
    let bit = |k: usize| 1usize << (n - 1 - k);
    let sz = |s: usize, k: usize| if s & bit(k) == 0 { 1.0 } else { -1.0 };
    for a in 0..d {
        for ap in 0..d {
            let hb = h_gf[(a, ap)];
            let vb = v_gf[(a, ap)];
            for s in 0..m {
                let row = a * m + s;
                h[(row, ap * m + s)] += hb;
                for (k, &jk) in couplings.iter().enumerate() {
                    h[(row, ap * m + (s ^ bit(k)))] += jk * vb;
                }
            }
        }
        for s in 0..m {
            let row = a * m + s;
            let zeeman: f64 = (0..n).map(|k| fields[k] * sz(s, k)).sum();
            h[(row, row)] += zeeman;
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

/// `B ⊗ P_site` on `bath ⊗ spin_0 ⊗ … ⊗ spin_{n_loc−1}`, with identity on
/// every factor not named. Kept factored so that large systems never need
/// the dense form.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorOperator {
    pub bath: Option<SquareMatrix>,
    pub spin: Option<(Pauli, usize)>,
    pub bath_dim: usize,
    pub n_loc: usize,
}

impl TensorOperator {
    /// `B ⊗ I`.
    pub fn bath(op: SquareMatrix, n_loc: usize) -> Self {
        Self {
            bath_dim: op.dim(),
            bath: Some(op),
            spin: None,
            n_loc,
        }
    }

    /// Pauli operator on one spin factor, identity on the bath.
    pub fn spin(kind: Pauli, site: usize, n_loc: usize, bath_dim: usize) -> Result<Self, ModelError> {
        if site >= n_loc {
            return Err(ModelError::SiteOutOfRange { site, n: n_loc });
        }
        if bath_dim == 0 {
            return Err(ModelError::InvalidParams("bath dimension must be >= 1".into()));
        }
        Ok(Self {
            bath: None,
            spin: Some((kind, site)),
            bath_dim,
            n_loc,
        })
    }

    fn spin_mask(&self, site: usize) -> usize {
        1 << (self.n_loc - 1 - site)
    }

    pub fn to_dense(&self) -> SquareMatrix {
        let n = self.dim();
        let id = SquareMatrix::identity(n);
        self.apply(&id)
    }
}

impl LinearOperator for TensorOperator {
    fn dim(&self) -> usize {
        self.bath_dim << self.n_loc
    }

    fn apply(&self, q: &SquareMatrix) -> SquareMatrix {
        let n = self.dim();
        assert_eq!(q.dim(), n, "operator and matrix dimensions differ");
        let m = 1usize << self.n_loc;
        let mut x = match self.spin {
            None => q.clone(),
            Some((kind, site)) => {
                let mask = self.spin_mask(site);
                let mut out = SquareMatrix::zeros(n);
                let src = q.as_slice();
                let dst = out.as_mut_slice();
                for r in 0..n {
                    let s = r % m;
                    let (from, sign) = match kind {
                        Pauli::X => (r ^ mask, 1.0),
                        Pauli::Z => (r, if s & mask == 0 { 1.0 } else { -1.0 }),
                    };
                    for (o, &v) in dst[r * n..(r + 1) * n]
                        .iter_mut()
                        .zip(&src[from * n..(from + 1) * n])
                    {
                        *o = sign * v;
                    }
                }
                out
            }
        };
        if let Some(b) = &self.bath {
            // Rows of x grouped by bath index form a d × (m·n) matrix.
            let d = self.bath_dim;
            let width = m * n;
            let mut y = SquareMatrix::zeros(n);
            gemm(
                d,
                d,
                width,
                1.0,
                b.as_slice(),
                (d, 1),
                x.as_slice(),
                (width, 1),
                0.0,
                y.as_mut_slice(),
                (width, 1),
            );
            x = y;
        }
        x
    }

    fn frobenius_sq(&self) -> f64 {
        let m = (1usize << self.n_loc) as f64;
        match &self.bath {
            Some(b) => b.frobenius_sq() * m,
            None => self.dim() as f64,
        }
    }
}

/// Dense `I_bath ⊗ … ⊗ P ⊗ … ⊗ I` on `n_total` spin factors, `P` at `site`.
pub fn embed_local_operator(
    kind: Pauli,
    site: usize,
    n_total: usize,
    bath_dim: usize,
) -> Result<SquareMatrix, ModelError> {
    Ok(TensorOperator::spin(kind, site, n_total, bath_dim)?.to_dense())
}
