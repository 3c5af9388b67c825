# cython: boundscheck=False, wraparound=False, cdivision=True
"""LAPACK-backed propagator kernels for small Hermitian Hamiltonians.

Same contracts as kernels._fallback; the win is avoiding per-step numpy
dispatch overhead in the piecewise soft-pulse loop, where matrices are
4x4 .. 64x64 and step counts run into the thousands.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin
from libc.stdlib cimport free, malloc
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zheevd

cnp.import_array()

ctypedef double complex zcomplex


cdef int _eigh_inplace(zcomplex* a, double* w, int n,
                       zcomplex* work, int lwork, double* rwork, int lrwork,
                       int* iwork, int liwork) noexcept nogil:
    """zheevd on a column-major n x n Hermitian matrix; eigenvectors land in a."""
    cdef int info = 0
    zheevd(b'V', b'L', &n, a, &n, w, work, &lwork, rwork, &lrwork,
           iwork, &liwork, &info)
    return info


cdef struct _Workspace:
    zcomplex* work
    double* rwork
    int* iwork
    int lwork
    int lrwork
    int liwork


cdef int _alloc_ws(_Workspace* ws, int n) except -1:
    ws.lwork = 2 * n * n + 2 * n + 16
    ws.lrwork = 2 * n * n + 5 * n + 16
    ws.liwork = 5 * n + 16
    ws.work = <zcomplex*> malloc(ws.lwork * sizeof(zcomplex))
    ws.rwork = <double*> malloc(ws.lrwork * sizeof(double))
    ws.iwork = <int*> malloc(ws.liwork * sizeof(int))
    if ws.work == NULL or ws.rwork == NULL or ws.iwork == NULL:
        raise MemoryError()
    return 0


cdef void _free_ws(_Workspace* ws) noexcept:
    free(ws.work); free(ws.rwork); free(ws.iwork)


def expm_hermitian(h, double t):
    """exp(-i * h * t) for Hermitian h."""
    cdef cnp.ndarray[zcomplex, ndim=2] a = np.asfortranarray(h, dtype=np.complex128)
    cdef int n = a.shape[0]
    cdef cnp.ndarray[double, ndim=1] w = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[zcomplex, ndim=2] out = np.empty((n, n), dtype=np.complex128, order="F")
    cdef _Workspace ws
    cdef zcomplex* phased = NULL
    cdef int info, i, j
    cdef double ang
    cdef zcomplex ph
    cdef zcomplex one = 1.0, zero = 0.0
    _alloc_ws(&ws, n)
    phased = <zcomplex*> malloc(n * n * sizeof(zcomplex))
    if phased == NULL:
        _free_ws(&ws)
        raise MemoryError()
    try:
        with nogil:
            info = _eigh_inplace(&a[0, 0], &w[0], n, ws.work, ws.lwork,
                                 ws.rwork, ws.lrwork, ws.iwork, ws.liwork)
            if info == 0:
                # phased = V * diag(exp(-i w t)); out = phased @ V^H
                for j in range(n):
                    ang = -w[j] * t
                    ph = cos(ang) + 1j * sin(ang)
                    for i in range(n):
                        phased[j * n + i] = a[i, j] * ph
                zgemm(b'N', b'C', &n, &n, &n, &one, phased, &n, &a[0, 0], &n,
                      &zero, &out[0, 0], &n)
        if info != 0:
            raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
    finally:
        free(phased)
        _free_ws(&ws)
    return np.ascontiguousarray(out)


def piecewise_propagator(h0, hx, hy, cx, cy, double dt):
    """Accumulated product of exp(-i (h0 + cx[k] hx + cy[k] hy) dt), k=0 first."""
    cdef cnp.ndarray[zcomplex, ndim=2] a0 = np.asfortranarray(h0, dtype=np.complex128)
    cdef cnp.ndarray[zcomplex, ndim=2] ax = np.asfortranarray(hx, dtype=np.complex128)
    cdef cnp.ndarray[zcomplex, ndim=2] ay = np.asfortranarray(hy, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] vx = np.ascontiguousarray(cx, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] vy = np.ascontiguousarray(cy, dtype=np.float64)
    cdef int n = a0.shape[0]
    cdef int nsteps = vx.shape[0]
    cdef cnp.ndarray[zcomplex, ndim=2] u = np.eye(n, dtype=np.complex128, order="F")
    if nsteps == 0:
        return np.ascontiguousarray(u)
    cdef cnp.ndarray[double, ndim=1] w = np.empty(n, dtype=np.float64)
    cdef _Workspace ws
    cdef zcomplex* h = NULL
    cdef zcomplex* phased = NULL
    cdef zcomplex* step = NULL
    cdef zcomplex* acc = NULL
    cdef int info = 0, k, i, j
    cdef double ang, ck, sk
    cdef zcomplex ph
    cdef zcomplex one = 1.0, zero = 0.0
    _alloc_ws(&ws, n)
    h = <zcomplex*> malloc(n * n * sizeof(zcomplex))
    phased = <zcomplex*> malloc(n * n * sizeof(zcomplex))
    step = <zcomplex*> malloc(n * n * sizeof(zcomplex))
    acc = <zcomplex*> malloc(n * n * sizeof(zcomplex))
    if h == NULL or phased == NULL or step == NULL or acc == NULL:
        free(h); free(phased); free(step); free(acc)
        _free_ws(&ws)
        raise MemoryError()
    try:
        with nogil:
            for k in range(nsteps):
                ck = vx[k]; sk = vy[k]
                for j in range(n):
                    for i in range(n):
                        h[j * n + i] = a0[i, j] + ck * ax[i, j] + sk * ay[i, j]
                info = _eigh_inplace(h, &w[0], n, ws.work, ws.lwork,
                                     ws.rwork, ws.lrwork, ws.iwork, ws.liwork)
                if info != 0:
                    break
                for j in range(n):
                    ang = -w[j] * dt
                    ph = cos(ang) + 1j * sin(ang)
                    for i in range(n):
                        phased[j * n + i] = h[j * n + i] * ph
                # step = phased @ V^H ; u = step @ u
                zgemm(b'N', b'C', &n, &n, &n, &one, phased, &n, h, &n, &zero, step, &n)
                memcpy(acc, &u[0, 0], n * n * sizeof(zcomplex))
                zgemm(b'N', b'N', &n, &n, &n, &one, step, &n, acc, &n, &zero, &u[0, 0], &n)
        if info != 0:
            raise np.linalg.LinAlgError(f"zheevd failed with info={info}")
    finally:
        free(h); free(phased); free(step); free(acc)
        _free_ws(&ws)
    return np.ascontiguousarray(u)
