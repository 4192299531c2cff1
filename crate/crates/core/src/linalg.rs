//! Dense symmetric eigensolver and Cholesky factorization.
//!
//! The eigensolver reduces to tridiagonal form with Householder reflections
//! and then runs implicit-shift QL with per-eigenvalue deflation. Only the
//! upper triangle of the working copy is touched, which keeps every inner
//! loop on contiguous row-major memory. Eigenvectors, when requested, are
//! accumulated as rows of `Q^T` so that each Givens rotation updates two
//! contiguous rows.

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// QL sweeps allowed per eigenvalue before giving up.
pub const QL_MAX_SWEEPS: usize = 50;

/// Eigenvalues in descending order, with eigenvectors stored as rows
/// (row `k` pairs with `values[k]`).
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

/// Full eigendecomposition of a symmetric matrix, sorted descending.
/// No sign or PSD policy is applied here.
pub fn symmetric_eigen(m: &SymMatrix, want_vectors: bool) -> Result<EigenPairs> {
    let n = m.n();
    if n == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    let mut a = m.clone().into_vec();
    let (mut d, mut e, mut w) = tridiagonalize(&mut a, n, want_vectors);
    drop(a);
    implicit_ql(&mut d, &mut e, w.as_deref_mut(), n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = w.map(|w| {
        let mut out = Vec::with_capacity(n * n);
        for &i in &order {
            out.extend_from_slice(&w[i * n..(i + 1) * n]);
        }
        out
    });
    Ok(EigenPairs { values, vectors })
}

/// Householder reduction of the full row-major symmetric `a` (only the
/// upper triangle is read). Returns the diagonal, the superdiagonal
/// (`e[k]` couples `k` and `k + 1`, `e[n-1] = 0`) and optionally `Q^T`.
fn tridiagonalize(a: &mut [f64], n: usize, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut betas = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        d[k] = a[k * n + k];
        let start = k + 1;
        let m = n - start;
        let (head, tail) = a.split_at_mut(start * n);
        // x = A[k, k+1..n]; overwritten by the Householder vector v.
        let v = &mut head[k * n + start..k * n + n];

        let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let x0 = v[0];
        let tail_sq: f64 = if scale > 0.0 {
            v[1..].iter().map(|x| (x / scale) * (x / scale)).sum::<f64>() * scale * scale
        } else {
            0.0
        };
        if tail_sq == 0.0 {
            e[k] = x0;
            betas[k] = 0.0;
            continue;
        }
        let norm = (x0 * x0 + tail_sq).sqrt();
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let v0 = x0 - alpha;
        v[0] = v0;
        let beta = 2.0 / (v0 * v0 + tail_sq);
        betas[k] = beta;
        e[k] = alpha;

        // p = beta * A22 v using the upper triangle only.
        let p = &mut p[..m];
        p.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..m {
            let row = &tail[(i) * n + start + i..(i) * n + n];
            let vi = v[i];
            let mut acc = row[0] * vi;
            for (off, &aij) in row.iter().enumerate().skip(1) {
                let j = i + off;
                acc += aij * v[j];
                p[j] += aij * vi;
            }
            p[i] += acc;
        }
        let mut pv = 0.0;
        for i in 0..m {
            p[i] *= beta;
            pv += p[i] * v[i];
        }
        let kcoef = 0.5 * beta * pv;
        // w = p - K v, stored back in p.
        for i in 0..m {
            p[i] -= kcoef * v[i];
        }
        // A22 -= v w^T + w v^T on the upper triangle.
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut tail[i * n + start + i..i * n + n];
            for (off, aij) in row.iter_mut().enumerate() {
                let j = i + off;
                *aij -= vi * p[j] + wi * v[j];
            }
        }
    }
    d[n - 1] = a[(n - 1) * n + (n - 1)];
    e[n - 1] = 0.0;

    let q = want_q.then(|| {
        // Q^T = H_{n-2} ... H_0, applied to the identity from the left.
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        let mut u = vec![0.0; n];
        for k in 0..n.saturating_sub(1) {
            let beta = betas[k];
            if beta == 0.0 {
                continue;
            }
            let start = k + 1;
            let v = &a[k * n + start..k * n + n];
            u.iter_mut().for_each(|x| *x = 0.0);
            for (i, &vi) in v.iter().enumerate() {
                let row = &w[(start + i) * n..(start + i + 1) * n];
                for (uc, &wc) in u.iter_mut().zip(row) {
                    *uc += vi * wc;
                }
            }
            for (i, &vi) in v.iter().enumerate() {
                let f = beta * vi;
                let row = &mut w[(start + i) * n..(start + i + 1) * n];
                for (wc, &uc) in row.iter_mut().zip(&u) {
                    *wc -= f * uc;
                }
            }
        }
        w
    });
    (d, e, q)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. Rotations are
/// applied to the rows of `w` when present.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut w: Option<&mut [f64]>, n: usize) -> Result<()> {
    // Deflate against the norm of T, not the neighbouring diagonal: a
    // cluster of round-off sized eigenvalues never passes a relative test.
    let tnorm = d.iter().zip(e.iter()).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max);
    let small = f64::EPSILON * tnorm;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() + dd == dd || e[m].abs() <= small {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    what: "implicit QL",
                    iterations: QL_MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(w) = w.as_deref_mut() {
                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let row_i = &mut lo[i * n..];
                    let row_j = &mut hi[..n];
                    for (zi, zj) in row_i.iter_mut().zip(row_j.iter_mut()) {
                        let t = *zj;
                        *zj = s * *zi + c * t;
                        *zi = c * *zi - s * t;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Lower Cholesky factor `L` (row-major, `A = L L^T`). Returns the failing
/// pivot index and value on breakdown.
pub fn cholesky(m: &SymMatrix) -> std::result::Result<Vec<f64>, (usize, f64)> {
    let n = m.n();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let (done, rest) = l.split_at_mut(j * n);
        let row_j = &mut rest[..n];
        for i in 0..j {
            let row_i = &done[i * n..i * n + i];
            let s: f64 = row_i.iter().zip(&row_j[..i]).map(|(a, b)| a * b).sum();
            row_j[i] = (m.get(j, i) - s) / done[i * n + i];
        }
        let diag = m.get(j, j) - row_j[..j].iter().map(|x| x * x).sum::<f64>();
        if !(diag > 0.0) {
            return Err((j, diag));
        }
        row_j[j] = diag.sqrt();
    }
    Ok(l)
}
