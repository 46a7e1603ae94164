//! Thin LAPACK wrappers for dense complex linear algebra.
//!
//! ndarray stores matrices row-major while LAPACK expects column-major, so
//! every wrapper here marshals through an explicit transposed buffer. The
//! copies are O(n^2) against O(n^3) factorizations and keep the conventions
//! auditable in one place.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

// openblas-src provides the actual symbols for lapack-sys at link time.
extern crate openblas_src;

pub type C64 = Complex64;
pub type CMat = Array2<C64>;
pub type CVec = Array1<C64>;

/// Copy a row-major ndarray matrix into a column-major buffer.
fn to_col_major(a: &CMat) -> Vec<C64> {
    let (rows, cols) = a.dim();
    let mut buf = vec![C64::new(0.0, 0.0); rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            buf[j * rows + i] = a[[i, j]];
        }
    }
    buf
}

/// Rebuild a row-major ndarray matrix from a column-major buffer.
fn from_col_major(buf: &[C64], rows: usize, cols: usize) -> CMat {
    let mut a = CMat::zeros((rows, cols));
    for j in 0..cols {
        for i in 0..rows {
            a[[i, j]] = buf[j * rows + i];
        }
    }
    a
}

fn check_square(a: &CMat, routine: &'static str) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::Dimension(format!("{routine}: matrix is {r}x{c}, expected square")));
    }
    Ok(r)
}

fn lapack_result(routine: &'static str, info: i32) -> Result<()> {
    if info == 0 {
        Ok(())
    } else {
        Err(Error::Lapack { routine, info })
    }
}

/// Eigendecomposition of a Hermitian matrix via `zheevd` (divide and conquer).
///
/// Returns ascending real eigenvalues and a matrix whose column `j` is the
/// eigenvector for eigenvalue `j`.
pub fn eigh(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = check_square(a, "zheevd")?;
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros((0, 0))));
    }
    let mut buf = to_col_major(a);
    let mut w = vec![0.0f64; n];
    let ni = n as i32;
    let mut info = 0i32;

    // workspace query
    let mut work_q = [C64::new(0.0, 0.0)];
    let mut rwork_q = [0.0f64];
    let mut iwork_q = [0i32];
    unsafe {
        lapack_sys::zheevd_(
            &(b'V' as i8),
            &(b'L' as i8),
            &ni,
            buf.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr(),
            work_q.as_mut_ptr() as *mut _,
            &(-1),
            rwork_q.as_mut_ptr(),
            &(-1),
            iwork_q.as_mut_ptr(),
            &(-1),
            &mut info,
        );
    }
    lapack_result("zheevd(query)", info)?;
    let lwork = work_q[0].re as i32;
    let lrwork = rwork_q[0] as i32;
    let liwork = iwork_q[0];
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0f64; lrwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        lapack_sys::zheevd_(
            &(b'V' as i8),
            &(b'L' as i8),
            &ni,
            buf.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &lrwork,
            iwork.as_mut_ptr(),
            &liwork,
            &mut info,
        );
    }
    lapack_result("zheevd", info)?;
    Ok((w, from_col_major(&buf, n, n)))
}

/// Eigendecomposition of a general complex matrix via `zgeev`.
///
/// Returns eigenvalues and right eigenvectors (column `j` belongs to
/// eigenvalue `j`).
pub fn eig(a: &CMat) -> Result<(CVec, CMat)> {
    let n = check_square(a, "zgeev")?;
    if n == 0 {
        return Ok((CVec::zeros(0), CMat::zeros((0, 0))));
    }
    let mut buf = to_col_major(a);
    let ni = n as i32;
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut vr = vec![C64::new(0.0, 0.0); n * n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let mut work_q = [C64::new(0.0, 0.0)];
    unsafe {
        lapack_sys::zgeev_(
            &(b'N' as i8),
            &(b'V' as i8),
            &ni,
            buf.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr() as *mut _,
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr() as *mut _,
            &ni,
            work_q.as_mut_ptr() as *mut _,
            &(-1),
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    lapack_result("zgeev(query)", info)?;
    let lwork = work_q[0].re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    unsafe {
        lapack_sys::zgeev_(
            &(b'N' as i8),
            &(b'V' as i8),
            &ni,
            buf.as_mut_ptr() as *mut _,
            &ni,
            w.as_mut_ptr() as *mut _,
            std::ptr::null_mut(),
            &1,
            vr.as_mut_ptr() as *mut _,
            &ni,
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    lapack_result("zgeev", info)?;
    Ok((CVec::from_vec(w), from_col_major(&vr, n, n)))
}

/// Solve `A X = B` for dense square `A` via `zgesv` (LU with partial pivoting).
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = check_square(a, "zgesv")?;
    let (br, bc) = b.dim();
    if br != n {
        return Err(Error::Dimension(format!("zgesv: rhs has {br} rows, matrix has {n}")));
    }
    let mut abuf = to_col_major(a);
    let mut bbuf = to_col_major(b);
    let ni = n as i32;
    let nrhs = bc as i32;
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        lapack_sys::zgesv_(
            &ni,
            &nrhs,
            abuf.as_mut_ptr() as *mut _,
            &ni,
            ipiv.as_mut_ptr(),
            bbuf.as_mut_ptr() as *mut _,
            &ni,
            &mut info,
        );
    }
    lapack_result("zgesv", info)?;
    Ok(from_col_major(&bbuf, n, bc))
}

/// Singular value decomposition `A = U diag(s) V^H` via `zgesvd`.
///
/// Returns `(u, s, vh)` with singular values in descending order.
pub fn svd(a: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let (m, n) = a.dim();
    let k = m.min(n);
    if k == 0 {
        return Err(Error::Dimension("zgesvd: empty matrix".into()));
    }
    let mut buf = to_col_major(a);
    let (mi, ni) = (m as i32, n as i32);
    let mut s = vec![0.0f64; k];
    let mut u = vec![C64::new(0.0, 0.0); m * m];
    let mut vt = vec![C64::new(0.0, 0.0); n * n];
    let mut rwork = vec![0.0f64; 5 * k];
    let mut info = 0i32;
    let mut work_q = [C64::new(0.0, 0.0)];
    unsafe {
        lapack_sys::zgesvd_(
            &(b'A' as i8),
            &(b'A' as i8),
            &mi,
            &ni,
            buf.as_mut_ptr() as *mut _,
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _,
            &mi,
            vt.as_mut_ptr() as *mut _,
            &ni,
            work_q.as_mut_ptr() as *mut _,
            &(-1),
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    lapack_result("zgesvd(query)", info)?;
    let lwork = work_q[0].re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    unsafe {
        lapack_sys::zgesvd_(
            &(b'A' as i8),
            &(b'A' as i8),
            &mi,
            &ni,
            buf.as_mut_ptr() as *mut _,
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr() as *mut _,
            &mi,
            vt.as_mut_ptr() as *mut _,
            &ni,
            work.as_mut_ptr() as *mut _,
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    lapack_result("zgesvd", info)?;
    Ok((from_col_major(&u, m, m), s, from_col_major(&vt, n, n)))
}

/// Matrix inverse via LU solve against the identity.
pub fn inv(a: &CMat) -> Result<CMat> {
    let n = check_square(a, "inv")?;
    solve(a, &CMat::eye(n))
}

/// Frobenius norm.
pub fn fro_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &CMat) -> Result<f64> {
    let (_, s, _) = svd(a)?;
    Ok(s[0])
}

/// Maximum absolute entry.
pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
