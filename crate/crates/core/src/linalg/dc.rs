//! Divide-and-conquer eigensolver for symmetric tridiagonal matrices.
//!
//! The matrix is torn into two halves plus a rank-one correction, the
//! halves are solved recursively, and the rank-one update `D + ρ·z·zᵀ` is
//! diagonalized through its secular equation. Eigenvector components are
//! recomputed from the roots (Löwner formula) so that orthogonality does
//! not depend on how accurately the roots were found. Nearly converged
//! components are deflated before the secular solve.

use super::matrix::gemm;
use super::ql;
use super::LinalgError;

/// Subproblems at or below this size go to QL.
const LEAF: usize = 32;
const MAX_SECULAR_ITERS: usize = 1200;

/// Returns the column-major eigenvector matrix of the tridiagonal `(d, e)`;
/// `d` is overwritten with the eigenvalues in ascending order.
pub(crate) fn solve(d: &mut [f64], e: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = d.len();
    let mut z = vec![0.0; n * n];
    if n == 0 {
        return Ok(z);
    }
    let scale = d
        .iter()
        .chain(e.iter())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        return Ok(z);
    }
    for x in d.iter_mut() {
        *x /= scale;
    }
    let mut e: Vec<f64> = e.iter().map(|x| x / scale).collect();

    // Split where the coupling is negligible.
    let mut start = 0;
    for i in 0..n {
        let split_here = i + 1 == n || {
            let tiny = f64::EPSILON * d[i].abs().sqrt() * d[i + 1].abs().sqrt();
            e[i].abs() <= tiny
        };
        if split_here {
            if i + 1 < n {
                e[i] = 0.0;
            }
            let block = &mut d[start..=i];
            let m = block.len();
            let q = solve_block(block, &e[start..i])?;
            for c in 0..m {
                let dst = (start + c) * n + start;
                z[dst..dst + m].copy_from_slice(&q[c * m..(c + 1) * m]);
            }
            start = i + 1;
        }
    }
    ql::sort_pairs(d, Some((&mut z, n)));
    for x in d.iter_mut() {
        *x *= scale;
    }
    Ok(z)
}

fn solve_block(d: &mut [f64], e: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let m = d.len();
    if m <= LEAF {
        let mut q = vec![0.0; m * m];
        for i in 0..m {
            q[i * m + i] = 1.0;
        }
        let mut e = e.to_vec();
        ql::ql_implicit(d, &mut e, Some((&mut q, m)))?;
        ql::sort_pairs(d, Some((&mut q, m)));
        return Ok(q);
    }
    let m1 = m / 2;
    let beta = e[m1 - 1];
    let rho = beta.abs();
    let sign = if beta < 0.0 { -1.0 } else { 1.0 };
    d[m1 - 1] -= rho;
    d[m1] -= rho;
    let (d1, d2) = d.split_at_mut(m1);
    let q1 = solve_block(d1, &e[..m1 - 1])?;
    let q2 = solve_block(d2, &e[m1..])?;
    merge(d, m1, &q1, &q2, rho, sign)
}

/// Column support inside the merged block: top half, bottom half, or both.
const TOP: u8 = 1;
const BOTTOM: u8 = 2;

fn merge(
    d: &mut [f64],
    m1: usize,
    q1: &[f64],
    q2: &[f64],
    rho: f64,
    sign: f64,
) -> Result<Vec<f64>, LinalgError> {
    let m = d.len();
    let m2 = m - m1;

    // Block-diagonal eigenvector matrix of the two halves.
    let mut q = vec![0.0; m * m];
    for c in 0..m1 {
        q[c * m..c * m + m1].copy_from_slice(&q1[c * m1..(c + 1) * m1]);
    }
    for c in 0..m2 {
        let dst = (m1 + c) * m + m1;
        q[dst..dst + m2].copy_from_slice(&q2[c * m2..(c + 1) * m2]);
    }
    let mut support: Vec<u8> = (0..m).map(|c| if c < m1 { TOP } else { BOTTOM }).collect();

    // z = Qᵀ·u with u = (e_{m1−1}; sign·e_{m1}), normalized to unit length.
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut z = vec![0.0; m];
    for c in 0..m1 {
        z[c] = q1[c * m1 + m1 - 1] * inv_sqrt2;
    }
    for c in 0..m2 {
        z[m1 + c] = sign * q2[c * m2] * inv_sqrt2;
    }
    let rho = 2.0 * rho;

    // Sorted view of the merged diagonal.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut ds: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut zs: Vec<f64> = order.iter().map(|&k| z[k]).collect();

    let dmax = ds.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let zmax = zs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = 8.0 * f64::EPSILON * dmax.max(zmax);

    let mut kept: Vec<usize> = Vec::new();
    let mut deflated: Vec<usize> = Vec::new();
    if rho * zmax <= tol {
        deflated.extend(0..m);
    } else {
        let mut prev: Option<usize> = None;
        for j in 0..m {
            if rho * zs[j].abs() <= tol {
                deflated.push(j);
                continue;
            }
            let Some(p) = prev else {
                prev = Some(j);
                continue;
            };
            let tau = zs[j].hypot(zs[p]);
            let c = zs[j] / tau;
            let s = -zs[p] / tau;
            let t = ds[j] - ds[p];
            if (t * c * s).abs() <= tol {
                // Rotate p and j so that z[p] vanishes; p then deflates.
                zs[j] = tau;
                zs[p] = 0.0;
                let (cp, cj) = (order[p], order[j]);
                rotate_pair(&mut q, m, cp, cj, c, s);
                let merged = support[cp] | support[cj];
                support[cp] = merged;
                support[cj] = merged;
                let dp = ds[p] * c * c + ds[j] * s * s;
                ds[j] = ds[p] * s * s + ds[j] * c * c;
                ds[p] = dp;
                deflated.push(p);
            } else {
                kept.push(p);
            }
            prev = Some(j);
        }
        if let Some(p) = prev {
            kept.push(p);
        }
    }

    let k = kept.len();
    let dl: Vec<f64> = kept.iter().map(|&j| ds[j]).collect();
    let zl: Vec<f64> = kept.iter().map(|&j| zs[j]).collect();
    let mut lambda = vec![0.0; k];
    // Column i holds the eigenvector of root i in the kept coordinates.
    let mut u = vec![0.0; k * k];
    if k == 1 {
        lambda[0] = dl[0] + rho * zl[0] * zl[0];
        u[0] = 1.0;
    } else if k > 1 {
        for i in 0..k {
            lambda[i] = secular_root(&dl, &zl, rho, i, &mut u[i * k..(i + 1) * k])?;
        }
        loewner_vectors(&dl, &zl, &mut u, k);
    }

    // Order the kept columns by support so the products skip zero blocks.
    let mut groups: Vec<usize> = (0..k).collect();
    groups.sort_by_key(|&g| match support[order[kept[g]]] {
        TOP => 0,
        BOTTOM => 2,
        _ => 1,
    });
    let n_top = groups
        .iter()
        .take_while(|&&g| support[order[kept[g]]] != BOTTOM)
        .count();
    let n_bottom_start = groups
        .iter()
        .position(|&g| support[order[kept[g]]] == BOTTOM)
        .unwrap_or(k);
    let mut qc = vec![0.0; m * k];
    let mut uc = vec![0.0; k * k];
    for (slot, &g) in groups.iter().enumerate() {
        let col = order[kept[g]];
        qc[slot * m..(slot + 1) * m].copy_from_slice(&q[col * m..(col + 1) * m]);
        for i in 0..k {
            uc[i * k + slot] = u[i * k + g];
        }
    }
    let mut kept_vecs = vec![0.0; m * k];
    if k > 0 {
        // Top rows use columns with TOP support (kinds 0 and 1).
        gemm(m1, n_top, k, 1.0, &qc, (1, m), &uc, (1, k), 0.0, &mut kept_vecs, (1, m));
        // Bottom rows use columns with BOTTOM support (kinds 1 and 2).
        let first_bottom = groups
            .iter()
            .position(|&g| support[order[kept[g]]] != TOP)
            .unwrap_or(k);
        let nb = k - first_bottom;
        gemm(
            m2,
            nb,
            k,
            1.0,
            &qc[first_bottom * m + m1..],
            (1, m),
            &uc[first_bottom..],
            (1, k),
            0.0,
            &mut kept_vecs[m1..],
            (1, m),
        );
        debug_assert!(n_bottom_start >= first_bottom);
    }

    // Merge kept roots and deflated values into ascending order.
    let mut entries: Vec<(f64, Source)> = Vec::with_capacity(m);
    for (i, &lam) in lambda.iter().enumerate() {
        entries.push((lam, Source::Kept(i)));
    }
    for &j in &deflated {
        entries.push((ds[j], Source::Deflated(order[j])));
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![0.0; m * m];
    for (slot, (val, src)) in entries.iter().enumerate() {
        d[slot] = *val;
        let col = match *src {
            Source::Kept(i) => &kept_vecs[i * m..(i + 1) * m],
            Source::Deflated(c) => &q[c * m..(c + 1) * m],
        };
        out[slot * m..(slot + 1) * m].copy_from_slice(col);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Source {
    Kept(usize),
    Deflated(usize),
}

/// `(x, y) ← (c·x + s·y, c·y − s·x)` on columns `a`, `b`.
fn rotate_pair(q: &mut [f64], m: usize, a: usize, b: usize, c: f64, s: f64) {
    let (lo, hi, swap) = if a < b { (a, b, false) } else { (b, a, true) };
    let (left, right) = q.split_at_mut(hi * m);
    let first = &mut left[lo * m..(lo + 1) * m];
    let second = &mut right[..m];
    let (x, y) = if swap {
        (second, first)
    } else {
        (first, second)
    };
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (xv, yv) = (*xi, *yi);
        *xi = c * xv + s * yv;
        *yi = c * yv - s * xv;
    }
}

/// Root `i` of `1 + ρ·Σ z_j²/(d_j − λ) = 0` for strictly increasing `d`
/// and `ρ > 0`. Fills `delta[j] = d_j − λ` and returns `λ`.
///
/// The unknown is measured from whichever pole is closer so that the
/// differences `d_j − λ` keep full relative accuracy.
fn secular_root(
    d: &[f64],
    z: &[f64],
    rho: f64,
    i: usize,
    delta: &mut [f64],
) -> Result<f64, LinalgError> {
    let k = d.len();
    let last = i + 1 == k;
    let (origin, mut lo, mut hi) = if last {
        let zz: f64 = z.iter().map(|x| x * x).sum();
        (i, 0.0, rho * zz)
    } else {
        let gap = d[i + 1] - d[i];
        let mid = 0.5 * gap;
        let mut f = 1.0;
        for j in 0..k {
            f += rho * z[j] * z[j] / ((d[j] - d[i]) - mid);
        }
        if f >= 0.0 {
            (i, 0.0, mid)
        } else {
            (i + 1, mid - gap, 0.0)
        }
    };
    let shift = d[origin];
    let base: Vec<f64> = d.iter().map(|&dj| dj - shift).collect();
    let split = i; // terms j <= split belong to the lower pole
    let mut tau = 0.5 * (lo + hi);

    let eps = f64::EPSILON;
    for _ in 0..MAX_SECULAR_ITERS {
        let (mut psi, mut dpsi, mut phi, mut dphi, mut abs_sum) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for j in 0..k {
            let t = base[j] - tau;
            let term = z[j] * z[j] / t;
            abs_sum += term.abs();
            if j <= split {
                psi += term;
                dpsi += term / t;
            } else {
                phi += term;
                dphi += term / t;
            }
        }
        let f = 1.0 + rho * (psi + phi);
        let bound = eps * (8.0 + k as f64) * (1.0 + rho * abs_sum);
        if f.abs() <= bound {
            break;
        }
        if f < 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        if hi - lo <= 2.0 * eps * lo.abs().max(hi.abs()) {
            break;
        }

        // Two-pole rational model matching value and slope of each half.
        let p = base[split];
        let tp = p - tau;
        let b1 = rho * dpsi * tp * tp;
        let a1 = rho * psi - b1 / tp;
        let candidate = if last {
            let cc = 1.0 + a1 + rho * phi;
            if cc > 0.0 {
                Some(p + b1 / cc)
            } else {
                None
            }
        } else {
            let q = base[split + 1];
            let tq = q - tau;
            let b2 = rho * dphi * tq * tq;
            let a2 = rho * phi - b2 / tq;
            let cc = 1.0 + a1 + a2;
            // cc·x² − (cc·(p+q) + b1 + b2)·x + (cc·p·q + b1·q + b2·p) = 0
            let qa = cc;
            let qb = -(cc * (p + q) + b1 + b2);
            let qc = cc * p * q + b1 * q + b2 * p;
            quadratic_root_in(qa, qb, qc, lo, hi)
        };
        tau = match candidate {
            Some(x) if x > lo && x < hi => x,
            _ => 0.5 * (lo + hi),
        };
    }
    for j in 0..k {
        delta[j] = base[j] - tau;
    }
    if delta.iter().any(|x| *x == 0.0 || !x.is_finite()) {
        return Err(LinalgError::NoConvergence(format!(
            "secular equation root {i} collided with a pole"
        )));
    }
    Ok(shift + tau)
}

fn quadratic_root_in(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Option<f64> {
    let inside = |x: f64| x.is_finite() && x > lo && x < hi;
    if a.abs() <= f64::EPSILON * (b.abs() + c.abs()) {
        let x = -c / b;
        return inside(x).then_some(x);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let qq = -0.5 * (b + disc.sqrt().copysign(b));
    let x1 = qq / a;
    let x2 = c / qq;
    if inside(x1) {
        Some(x1)
    } else if inside(x2) {
        Some(x2)
    } else {
        None
    }
}

/// Replaces each column of `delta` (`d_j − λ_i`) with the normalized
/// eigenvector of root `i`, using components rebuilt from all roots.
fn loewner_vectors(d: &[f64], z: &[f64], delta: &mut [f64], k: usize) {
    let mut w: Vec<f64> = (0..k).map(|j| delta[j * k + j]).collect();
    for i in 0..k {
        let col = &delta[i * k..(i + 1) * k];
        for j in 0..k {
            if j != i {
                w[j] *= col[j] / (d[j] - d[i]);
            }
        }
    }
    let zhat: Vec<f64> = w
        .iter()
        .zip(z)
        .map(|(&wj, &zj)| (-wj).max(0.0).sqrt().copysign(zj))
        .collect();
    for i in 0..k {
        let col = &mut delta[i * k..(i + 1) * k];
        let mut norm = 0.0;
        for j in 0..k {
            col[j] = zhat[j] / col[j];
            norm += col[j] * col[j];
        }
        let inv = 1.0 / norm.sqrt();
        for x in col.iter_mut() {
            *x *= inv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(d0: &[f64], e0: &[f64]) {
        let n = d0.len();
        let mut d = d0.to_vec();
        let z = solve(&mut d, e0).unwrap();
        let mut worst_orth = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let s: f64 = (0..n).map(|r| z[a * n + r] * z[b * n + r]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst_orth = worst_orth.max((s - target).abs());
            }
        }
        let norm = d0.iter().chain(e0).fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let mut worst_res = 0.0f64;
        for c in 0..n {
            let v = &z[c * n..(c + 1) * n];
            for r in 0..n {
                let mut tv = d0[r] * v[r];
                if r > 0 {
                    tv += e0[r - 1] * v[r - 1];
                }
                if r + 1 < n {
                    tv += e0[r] * v[r + 1];
                }
                worst_res = worst_res.max((tv - d[c] * v[r]).abs());
            }
        }
        assert!(worst_orth < 1e-12, "orthogonality {worst_orth}");
        assert!(worst_res < 1e-12 * norm * (n as f64).sqrt(), "residual {worst_res}");
        assert!(d.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn laplacian_chain() {
        let n = 150;
        check(&vec![2.0; n], &vec![-1.0; n - 1]);
    }

    #[test]
    fn wilkinson_matrix_near_degenerate_pairs() {
        // W21+ has eigenvalue pairs agreeing to many digits.
        let m = 50;
        let n = 2 * m + 1;
        let d: Vec<f64> = (0..n).map(|i| (i as f64 - m as f64).abs()).collect();
        check(&d, &vec![1.0; n - 1]);
    }

    #[test]
    fn glued_identical_blocks() {
        // Copies of one matrix joined by tiny couplings: heavy deflation.
        let block = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let mut d = Vec::new();
        let mut e = Vec::new();
        for b in 0..20 {
            if b > 0 {
                e.push(1e-9);
            }
            d.extend_from_slice(&block);
            e.extend(std::iter::repeat(0.5).take(block.len() - 1));
        }
        check(&d, &e);
    }

    #[test]
    fn constant_diagonal_zero_coupling() {
        check(&vec![3.0; 80], &vec![0.0; 79]);
        check(&vec![0.0; 40], &vec![0.0; 39]);
    }

    #[test]
    fn random_tridiagonal() {
        let mut s = 7u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let n = 300;
        let d: Vec<f64> = (0..n).map(|_| next()).collect();
        let e: Vec<f64> = (0..n - 1).map(|_| next()).collect();
        check(&d, &e);
    }

    #[test]
    fn graded_and_signed_couplings() {
        let n = 97;
        let d: Vec<f64> = (0..n).map(|i| 10f64.powi(-(i as i32 % 12))).collect();
        let e: Vec<f64> = (0..n - 1)
            .map(|i| if i % 3 == 0 { -1e-3 } else { 2e-4 })
            .collect();
        check(&d, &e);
    }
}
