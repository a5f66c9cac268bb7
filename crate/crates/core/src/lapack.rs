//! Thin bindings to the system LAPACK/BLAS (OpenBLAS) for the dense paths:
//! symmetric eigendecomposition, SPD solve, and matrix multiply.

use crate::error::{Error, Result};

extern "C" {
    fn dsyevd_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut f64,
        lda: *const i32,
        w: *mut f64,
        work: *mut f64,
        lwork: *const i32,
        iwork: *mut i32,
        liwork: *const i32,
        info: *mut i32,
    );
    fn dposv_(
        uplo: *const u8,
        n: *const i32,
        nrhs: *const i32,
        a: *mut f64,
        lda: *const i32,
        b: *mut f64,
        ldb: *const i32,
        info: *mut i32,
    );
    fn dgemm_(
        transa: *const u8,
        transb: *const u8,
        m: *const i32,
        n: *const i32,
        k: *const i32,
        alpha: *const f64,
        a: *const f64,
        lda: *const i32,
        b: *const f64,
        ldb: *const i32,
        beta: *const f64,
        c: *mut f64,
        ldc: *const i32,
    );
}

/// Eigendecomposition of a symmetric matrix given as a flat row-major n×n
/// slice. Returns ascending eigenvalues; `a` is overwritten so that row j
/// (`a[j*n..(j+1)*n]`) holds the j-th eigenvector.
///
/// Row-major input of a symmetric matrix is its own transpose, so it can be
/// handed to column-major LAPACK unchanged; the returned column-major
/// eigenvector columns then read as rows.
pub fn eigh_inplace(a: &mut [f64], n: usize) -> Result<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let ni = n as i32;
    let jobz = b'V';
    let uplo = b'L';
    let mut w = vec![0.0; n];
    let mut info = 0i32;
    // workspace query
    let mut wkopt = 0.0f64;
    let mut iwkopt = 0i32;
    let qm1 = -1i32;
    unsafe {
        dsyevd_(
            &jobz, &uplo, &ni, a.as_mut_ptr(), &ni, w.as_mut_ptr(), &mut wkopt, &qm1, &mut iwkopt,
            &qm1, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd(query)", info });
    }
    let lwork = wkopt as i32;
    let liwork = iwkopt;
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dsyevd", info });
    }
    Ok(w)
}

/// Solve A X = B for symmetric positive definite A (row-major n×n, destroyed)
/// and `nrhs` right-hand sides stored as rows of `b` (nrhs×n row-major, i.e.
/// column-major n×nrhs). Solutions overwrite `b` row by row.
pub fn spd_solve_inplace(a: &mut [f64], b: &mut [f64], n: usize, nrhs: usize) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n * nrhs);
    let ni = n as i32;
    let nrhsi = nrhs as i32;
    let uplo = b'L';
    let mut info = 0i32;
    unsafe {
        dposv_(
            &uplo,
            &ni,
            &nrhsi,
            a.as_mut_ptr(),
            &ni,
            b.as_mut_ptr(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "dposv", info });
    }
    Ok(())
}

/// Row-major C(m×n) = A(m×k) · B(k×n), via the column-major transpose trick.
pub fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    let mut c = vec![0.0f64; m * n];
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    let one = 1.0f64;
    let zero = 0.0f64;
    let no = b'N';
    unsafe {
        // column-major view: C^T = B^T A^T
        dgemm_(
            &no,
            &no,
            &ni,
            &mi,
            &ki,
            &one,
            b.as_ptr(),
            &ni,
            a.as_ptr(),
            &ki,
            &zero,
            c.as_mut_ptr(),
            &ni,
        );
    }
    c
}

/// Row-major C(m×n) = A^T(m×k) · B(k×n) where A is stored k-major as k×m.
pub fn matmul_tn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), k * m);
    assert_eq!(b.len(), k * n);
    let mut c = vec![0.0f64; m * n];
    let (mi, ni, ki) = (m as i32, n as i32, k as i32);
    let one = 1.0f64;
    let zero = 0.0f64;
    unsafe {
        // column-major: C^T(n×m) = B^T(n×k) · A(k×m): opA on B^T is 'N', opB is 'T'...
        // Simplest reliable form: C^T = (B^T)(A) with B^T built by 'T' on B.
        dgemm_(
            &b'N',
            &b'T',
            &ni,
            &mi,
            &ki,
            &one,
            b.as_ptr(),
            &ni,
            a.as_ptr(),
            &mi,
            &zero,
            c.as_mut_ptr(),
            &ni,
        );
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_small_known() {
        // [[2,1],[1,2]] -> eigenvalues 1, 3
        let mut a = vec![2.0, 1.0, 1.0, 2.0];
        let w = eigh_inplace(&mut a, 2).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] - 3.0).abs() < 1e-12);
        // eigenvector rows are unit, orthogonal
        let dot = a[0] * a[2] + a[1] * a[3];
        assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn eigh_reconstructs_matrix() {
        let n = 17;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + (i as f64 - j as f64).powi(2));
            }
            a[i * n + i] += 2.0;
        }
        let orig = a.clone();
        let w = eigh_inplace(&mut a, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += w[m] * a[m * n + i] * a[m * n + j];
                }
                assert!((s - orig[i * n + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matmul_matches_naive() {
        let (m, k, n) = (3, 4, 2);
        let a: Vec<f64> = (0..m * k).map(|i| i as f64 * 0.3 - 1.0).collect();
        let b: Vec<f64> = (0..k * n).map(|i| (i as f64).sin()).collect();
        let c = matmul(&a, &b, m, k, n);
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for t in 0..k {
                    s += a[i * k + t] * b[t * n + j];
                }
                assert!((c[i * n + j] - s).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn matmul_tn_matches_naive() {
        let (m, k, n) = (3, 5, 4);
        let a: Vec<f64> = (0..k * m).map(|i| (i as f64 * 0.7).cos()).collect(); // k×m
        let b: Vec<f64> = (0..k * n).map(|i| i as f64 * 0.1).collect();
        let c = matmul_tn(&a, &b, m, k, n);
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for t in 0..k {
                    s += a[t * m + i] * b[t * n + j];
                }
                assert!((c[i * n + j] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spd_solve_roundtrip() {
        let n = 6;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 0.3f64.powi((i as i32 - j as i32).abs());
            }
            a[i * n + i] += 1.0;
        }
        let orig = a.clone();
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += orig[i * n + j] * x_true[j];
            }
        }
        spd_solve_inplace(&mut a, &mut b, n, 1).unwrap();
        for i in 0..n {
            assert!((b[i] - x_true[i]).abs() < 1e-12);
        }
    }
}
