//! Householder reduction of a symmetric matrix to tridiagonal form.
//!
//! Storage is column-major with leading dimension `n`, only the lower
//! triangle is referenced. Panels of `PANEL` columns are reduced with the
//! trailing matrix left untouched, then the trailing matrix receives one
//! rank-`2·PANEL` update through `gemm`.

use super::matrix::gemm;

const PANEL: usize = 32;
/// Remaining size at which the last panel simply covers everything.
const CROSSOVER: usize = 96;
/// Column width of the trailing-update tiles.
const UPDATE_TILE: usize = 256;
/// Reflectors per block when forming `Q·Z`.
const APPLY_BLOCK: usize = 64;

pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `offdiag[i]` couples rows `i` and `i + 1`.
    pub offdiag: Vec<f64>,
    /// Reflector scalars; reflector `j` acts on rows `j+1..n`.
    pub tau: Vec<f64>,
}

/// Reduces `a` in place. On return the reflector vectors are stored below
/// the subdiagonal (the unit leading entry is implicit).
pub(crate) fn reduce(a: &mut [f64], n: usize) -> Tridiagonal {
    let mut diag = vec![0.0; n];
    let mut offdiag = vec![0.0; n.saturating_sub(1)];
    let mut tau = vec![0.0; n.saturating_sub(1)];
    if n == 0 {
        return Tridiagonal { diag, offdiag, tau };
    }
    let mut w = vec![0.0; n * PANEL.max(CROSSOVER)];
    let mut k = 0;
    loop {
        let remaining = n - k;
        let last = remaining <= CROSSOVER;
        let width = if last { remaining } else { PANEL };
        reduce_panel(a, n, k, width, &mut w, &mut diag, &mut offdiag, &mut tau);
        if last {
            break;
        }
        trailing_update(a, n, k, width, &w);
        for j in k..k + width {
            a[j * n + j + 1] = offdiag[j];
        }
        k += width;
    }
    for j in 0..n - 1 {
        a[j * n + j + 1] = offdiag[j];
    }
    Tridiagonal { diag, offdiag, tau }
}

#[allow(clippy::too_many_arguments)]
fn reduce_panel(
    a: &mut [f64],
    n: usize,
    k: usize,
    width: usize,
    w: &mut [f64],
    diag: &mut [f64],
    offdiag: &mut [f64],
    tau: &mut [f64],
) {
    let mut coeffs = vec![0.0; width];
    for i in 0..width {
        let c = k + i;
        if i > 0 {
            // Bring column c up to date with this panel's earlier reflectors.
            for j in 0..i {
                let vcol = (k + j) * n;
                let wc = w[j * n + c];
                let vc = a[vcol + c];
                for r in c..n {
                    let upd = a[vcol + r] * wc + w[j * n + r] * vc;
                    a[c * n + r] -= upd;
                }
            }
        }
        diag[c] = a[c * n + c];
        if c + 1 == n {
            break;
        }
        let (beta, t) = householder(&mut a[c * n + c + 1..(c + 1) * n]);
        offdiag[c] = beta;
        tau[c] = t;
        a[c * n + c + 1] = 1.0;

        let m = n - c - 1;
        let (head, tail) = a.split_at_mut((c + 1) * n);
        let v = &head[c * n + c + 1..c * n + n];
        let (w_prev, w_rest) = w.split_at_mut(i * n);
        let wi = &mut w_rest[c + 1..n];
        symv_lower(tail, n, c + 1, v, wi);

        if i > 0 {
            // wi -= V·(Wᵀv) + W·(Vᵀv) over the panel columns already done.
            for j in 0..i {
                let wj = &w_prev[j * n + c + 1..j * n + n];
                coeffs[j] = dot(wj, v);
            }
            for j in 0..i {
                let vj = &head[(k + j) * n + c + 1..(k + j) * n + n];
                axpy(-coeffs[j], vj, wi);
            }
            for j in 0..i {
                let vj = &head[(k + j) * n + c + 1..(k + j) * n + n];
                coeffs[j] = dot(vj, v);
            }
            for j in 0..i {
                let wj = &w_prev[j * n + c + 1..j * n + n];
                axpy(-coeffs[j], wj, wi);
            }
        }
        for x in wi.iter_mut() {
            *x *= t;
        }
        let alpha = -0.5 * t * dot(wi, v);
        axpy(alpha, v, wi);
        debug_assert_eq!(wi.len(), m);
    }
}

/// `A[s.., s..] -= V·Wᵀ + W·Vᵀ` on the lower triangle, tile by tile.
fn trailing_update(a: &mut [f64], n: usize, k: usize, width: usize, w: &[f64]) {
    let s = k + width;
    let (panel, trailing) = a.split_at_mut(s * n);
    let mut col = s;
    while col < n {
        let cols = UPDATE_TILE.min(n - col);
        let rows = n - col;
        let c_off = (col - s) * n + col;
        // V[col.., :] · W[col..col+cols, :]ᵀ
        gemm(
            rows,
            width,
            cols,
            -1.0,
            &panel[k * n + col..],
            (1, n),
            &w[col..],
            (n, 1),
            1.0,
            &mut trailing[c_off..],
            (1, n),
        );
        // W[col.., :] · V[col..col+cols, :]ᵀ
        gemm(
            rows,
            width,
            cols,
            -1.0,
            &w[col..],
            (1, n),
            &panel[k * n + col..],
            (n, 1),
            1.0,
            &mut trailing[c_off..],
            (1, n),
        );
        col += cols;
    }
}

/// `y = A[s.., s..]·v` reading only the lower triangle. `a` starts at
/// column `s` of the full matrix.
fn symv_lower(a: &[f64], n: usize, s: usize, v: &[f64], y: &mut [f64]) {
    let m = n - s;
    y.fill(0.0);
    for j in 0..m {
        let col = &a[j * n + s + j..j * n + n];
        let vj = v[j];
        let (yj, y_below) = y[j..].split_first_mut().expect("nonempty");
        *yj += col[0] * vj;
        let d = axpy_dot(vj, &col[1..], y_below, &v[j + 1..]);
        y[j] += d;
    }
}

/// Generates `H = I − τ·u·uᵀ` with `H·x = (β, 0, …)`. On return
/// `x[1..]` holds `u[1..]` (`u[0] = 1`) and `x[0] = β`.
pub(crate) fn householder(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let xnorm = dot(&x[1..], &x[1..]).sqrt();
    if xnorm == 0.0 {
        return (alpha, 0.0);
    }
    let beta = -alpha.hypot(xnorm).copysign(alpha);
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for v in &mut x[1..] {
        *v *= scale;
    }
    x[0] = beta;
    (beta, tau)
}

/// `z ← Q·z` where `Q = H_0·H_1⋯H_{n−2}` from [`reduce`]; `z` is
/// column-major `n × n`.
pub(crate) fn apply_q(a: &[f64], n: usize, tau: &[f64], z: &mut [f64]) {
    let nref = tau.len();
    if nref == 0 {
        return;
    }
    let cols = z.len() / n;
    let nblocks = nref.div_ceil(APPLY_BLOCK);
    for blk in (0..nblocks).rev() {
        let b = blk * APPLY_BLOCK;
        let nb = APPLY_BLOCK.min(nref - b);
        let m = n - b - 1;
        // Explicit reflector block, column-major m × nb (row ρ ↔ global b+1+ρ).
        let mut v = vec![0.0; m * nb];
        for j in 0..nb {
            let col = &mut v[j * m..(j + 1) * m];
            col[j] = 1.0;
            let src = &a[(b + j) * n + b + j + 2..(b + j) * n + n];
            col[j + 1..].copy_from_slice(src);
        }
        let t = block_reflector_factor(&v, m, nb, &tau[b..b + nb]);
        // Y = Vᵀ·Z[b+1.., :]
        let mut y = vec![0.0; nb * cols];
        gemm(nb, m, cols, 1.0, &v, (m, 1), &z[b + 1..], (1, n), 0.0, &mut y, (1, nb));
        // Y ← T·Y
        let mut ty = vec![0.0; nb * cols];
        gemm(nb, nb, cols, 1.0, &t, (1, nb), &y, (1, nb), 0.0, &mut ty, (1, nb));
        // Z[b+1.., :] -= V·Y
        gemm(m, nb, cols, -1.0, &v, (1, m), &ty, (1, nb), 1.0, &mut z[b + 1..], (1, n));
    }
}

/// Upper-triangular `T` with `H_0⋯H_{nb−1} = I − V·T·Vᵀ`, column-major.
fn block_reflector_factor(v: &[f64], m: usize, nb: usize, tau: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; nb * nb];
    let mut tmp = vec![0.0; nb];
    for i in 0..nb {
        if tau[i] == 0.0 {
            continue;
        }
        let vi = &v[i * m..(i + 1) * m];
        for (j, tj) in tmp.iter_mut().enumerate().take(i) {
            *tj = -tau[i] * dot(&v[j * m + i..(j + 1) * m], &vi[i..]);
        }
        for r in 0..i {
            let mut s = 0.0;
            for c in r..i {
                s += t[c * nb + r] * tmp[c];
            }
            t[i * nb + r] = s;
        }
        t[i * nb + i] = tau[i];
    }
    t
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let cx = x.chunks_exact(4);
    let cy = y.chunks_exact(4);
    let (rx, ry) = (cx.remainder(), cy.remainder());
    for (a, b) in cx.zip(cy) {
        for l in 0..4 {
            acc[l] += a[l] * b[l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (a, b) in rx.iter().zip(ry) {
        s += a * b;
    }
    s
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y += alpha·x` and returns `x·v`, in one pass over `x`.
fn axpy_dot(alpha: f64, x: &[f64], y: &mut [f64], v: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let len = x.len();
    let split = len - len % 4;
    let (xh, xt) = x.split_at(split);
    let (yh, yt) = y[..len].split_at_mut(split);
    let (vh, vt) = v[..len].split_at(split);
    for ((xs, ys), vs) in xh
        .chunks_exact(4)
        .zip(yh.chunks_exact_mut(4))
        .zip(vh.chunks_exact(4))
    {
        for l in 0..4 {
            ys[l] += alpha * xs[l];
            acc[l] += xs[l] * vs[l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for ((xi, yi), vi) in xt.iter().zip(yt.iter_mut()).zip(vt) {
        *yi += alpha * xi;
        s += xi * vi;
    }
    s
}
