//! Minimal FFI to the system LAPACK dense symmetric eigensolver.
//!
//! Only eigenvalues are ever needed, so `jobz = 'N'` throughout; the
//! divide-and-conquer driver then reduces to tridiagonalization plus a fast
//! tridiagonal eigenvalue pass. The library linked is chosen by `build.rs`
//! (`openblas` by default, override with `ZSL_LAPACK_LIB`).

use std::os::raw::c_char;

extern "C" {
    fn dsyevd_(
        jobz: *const c_char,
        uplo: *const c_char,
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
}

/// Eigenvalues, ascending, of the symmetric n×n matrix stored densely in
/// `a` (column-major; the lower triangle is the one referenced). The buffer
/// is clobbered as workspace. Panics if LAPACK reports failure — inputs are
/// validated finite upstream, so a nonzero `info` is a bug, not bad data.
pub(crate) fn symmetric_eigenvalues(n: usize, a: &mut [f64]) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    let jobz = b'N' as c_char;
    let uplo = b'L' as c_char;
    let ni = n as i32;
    let neg_one = -1i32;
    let mut w = vec![0.0f64; n];
    let mut info = 0i32;

    // workspace query
    let mut work_probe = [0.0f64];
    let mut iwork_probe = [0i32];
    unsafe {
        dsyevd_(
            &jobz,
            &uplo,
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work_probe.as_mut_ptr(),
            &neg_one,
            iwork_probe.as_mut_ptr(),
            &neg_one,
            &mut info,
        );
    }
    assert_eq!(info, 0, "eigensolver workspace query failed: info={info}");

    let lwork = work_probe[0] as i32;
    let liwork = iwork_probe[0].max(1);
    let mut work = vec![0.0f64; lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork as usize];
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
    assert_eq!(info, 0, "symmetric eigensolve failed: info={info}");
    w
}
