//! Haar-distributed orthogonal matrices via Householder QR.

use crate::rng::DrawStream;

/// Draws a `rows x cols` matrix (flat, row-major) whose rows are
/// orthonormal when `rows <= cols` and whose columns are orthonormal
/// otherwise.
///
/// The construction is QR of a standard-normal matrix with the Q columns
/// sign-corrected by the diagonal of R, which makes the draw uniform over
/// the orthogonal group.
pub fn orthogonal_matrix(rows: usize, cols: usize, seed: u64) -> Vec<f64> {
    assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
    let mut stream = DrawStream::new(seed);
    let (n, m) = (rows.max(cols), rows.min(cols));
    // Tall n x m standard-normal sample, column-major for the factorization.
    let mut a = vec![0.0f64; n * m];
    for v in a.iter_mut() {
        *v = stream.normal();
    }
    let q = thin_qr_q(&mut a, n, m);
    // q is n x m column-major with orthonormal columns. Lay out the result.
    let mut out = vec![0.0f64; rows * cols];
    if rows >= cols {
        // M = Q, n = rows, m = cols.
        for r in 0..rows {
            for c in 0..cols {
                out[r * cols + c] = q[c * n + r];
            }
        }
    } else {
        // M = Q^T, n = cols, m = rows.
        for r in 0..rows {
            for c in 0..cols {
                out[r * cols + c] = q[r * n + c];
            }
        }
    }
    out
}

/// Householder QR of a tall column-major `n x m` matrix (`n >= m`); returns
/// the thin Q (n x m, column-major) with columns sign-corrected so that the
/// implicit R has a positive diagonal.
fn thin_qr_q(a: &mut [f64], n: usize, m: usize) -> Vec<f64> {
    debug_assert!(n >= m);
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut diag_sign = vec![1.0f64; m];

    for k in 0..m {
        // Householder vector for column k below row k.
        let col = &a[k * n..(k + 1) * n];
        let norm_x: f64 = col[k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut v = vec![0.0f64; n];
        if norm_x == 0.0 {
            // Degenerate column (probability zero); leave an identity step.
            vs.push(v);
            continue;
        }
        let alpha = if col[k] >= 0.0 { -norm_x } else { norm_x };
        diag_sign[k] = if alpha > 0.0 { 1.0 } else { -1.0 };
        v[k] = col[k] - alpha;
        v[(k + 1)..n].copy_from_slice(&col[(k + 1)..n]);
        let vnorm2: f64 = v[k..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            vs.push(v);
            continue;
        }
        // Apply H = I - 2 v v^T / (v^T v) to the remaining columns.
        for j in k..m {
            let cj = &mut a[j * n..(j + 1) * n];
            let dot: f64 = v[k..].iter().zip(cj[k..].iter()).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vnorm2;
            for (vi, cji) in v[k..].iter().zip(cj[k..].iter_mut()) {
                *cji -= f * vi;
            }
        }
        vs.push(v);
    }

    // Accumulate Q = H_0 ... H_{m-1} applied to the first m identity columns.
    let mut q = vec![0.0f64; n * m];
    for j in 0..m {
        q[j * n + j] = 1.0;
    }
    for k in (0..m).rev() {
        let v = &vs[k];
        let vnorm2: f64 = v[k..].iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in 0..m {
            let cj = &mut q[j * n..(j + 1) * n];
            let dot: f64 = v[k..].iter().zip(cj[k..].iter()).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vnorm2;
            for (vi, cji) in v[k..].iter().zip(cj[k..].iter_mut()) {
                *cji -= f * vi;
            }
        }
    }
    // Sign correction: Q' = Q * diag(sign(R_kk)).
    for j in 0..m {
        if diag_sign[j] < 0.0 {
            for v in q[j * n..(j + 1) * n].iter_mut() {
                *v = -*v;
            }
        }
    }
    q
}
