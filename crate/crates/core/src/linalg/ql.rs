//! Implicitly shifted QL iteration for symmetric tridiagonal matrices
//! (the EISPACK `tql2` scheme).

use super::LinalgError;

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Diagonalizes the tridiagonal matrix `(d, e)` in place.
///
/// `e[i]` couples rows `i` and `i + 1` and is destroyed. When `z` is given
/// as `(data, ld)` (column-major, `ld` rows, `d.len()` columns) the plane
/// rotations are accumulated into its columns. Eigenvalues come out
/// unsorted.
pub(crate) fn ql_implicit(
    d: &mut [f64],
    e: &mut [f64],
    mut z: Option<(&mut [f64], usize)>,
) -> Result<(), LinalgError> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e_full = Vec::with_capacity(n);
    e_full.extend_from_slice(&e[..n - 1]);
    e_full.push(0.0);
    let e = &mut e_full;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(LinalgError::NoConvergence(format!(
                        "QL iteration stalled at index {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some((zd, ld)) = z.as_mut() {
                        rotate_columns(zd, *ld, i, c, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Columns `(i, i+1)` ← `(c·x − s·y, s·x + c·y)`.
#[inline]
fn rotate_columns(z: &mut [f64], ld: usize, i: usize, c: f64, s: f64) {
    let (left, right) = z.split_at_mut((i + 1) * ld);
    let x = &mut left[i * ld..];
    let y = &mut right[..ld];
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let h = *yi;
        *yi = s * *xi + c * h;
        *xi = c * *xi - s * h;
    }
}

/// Sorts eigenvalues ascending and permutes the matching columns.
pub(crate) fn sort_pairs(d: &mut [f64], z: Option<(&mut [f64], usize)>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let sorted: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    d.copy_from_slice(&sorted);
    if let Some((zd, ld)) = z {
        let old = zd.to_vec();
        for (dst, &src) in order.iter().enumerate() {
            zd[dst * ld..(dst + 1) * ld].copy_from_slice(&old[src * ld..(src + 1) * ld]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let mut d = vec![1.0, 3.0];
        let mut e = vec![1.0];
        ql_implicit(&mut d, &mut e, None).unwrap();
        sort_pairs(&mut d, None);
        let s = 2f64.sqrt();
        assert!((d[0] - (2.0 - s)).abs() < 1e-14);
        assert!((d[1] - (2.0 + s)).abs() < 1e-14);
    }

    #[test]
    fn laplacian_eigenvalues() {
        // Path-graph Laplacian interior: 2 on the diagonal, −1 off it.
        let n = 20;
        let mut d = vec![2.0; n];
        let mut e = vec![-1.0; n - 1];
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        ql_implicit(&mut d, &mut e, Some((&mut z, n))).unwrap();
        sort_pairs(&mut d, Some((&mut z, n)));
        for (k, &lam) in d.iter().enumerate() {
            let exact =
                2.0 - 2.0 * ((k as f64 + 1.0) * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((lam - exact).abs() < 1e-13);
        }
    }
}
