# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels (hot path of every descent iteration).

Mirrors _pystencil exactly: same neighbor order (E, W, N, S), same
expression trees, so results match the numpy fallback bit-for-bit when
compiled with -ffp-contract=off.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow

cnp.import_array()


def laplacian(cnp.ndarray[cnp.float64_t, ndim=2] u,
              cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] mask):
    """Unscaled masked 5-point sum: out_c = sum over in-mask 4-neighbors of (u_n - u_c)."""
    cdef Py_ssize_t ny = u.shape[0]
    cdef Py_ssize_t nx = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((ny, nx), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double uc, acc
    for i in range(ny):
        for j in range(nx):
            if not mask[i, j]:
                continue
            uc = u[i, j]
            acc = 0.0
            if j + 1 < nx and mask[i, j + 1]:
                acc = acc + (u[i, j + 1] - uc)
            if j - 1 >= 0 and mask[i, j - 1]:
                acc = acc + (u[i, j - 1] - uc)
            if i + 1 < ny and mask[i + 1, j]:
                acc = acc + (u[i + 1, j] - uc)
            if i - 1 >= 0 and mask[i - 1, j]:
                acc = acc + (u[i - 1, j] - uc)
            out[i, j] = acc
    return out


def logistic_energy_arrays(cnp.ndarray[cnp.float64_t, ndim=2] u,
                           double lam, double p, double A, double FA):
    """(Ftil, G) for the logistic family, cellwise, in one pass."""
    cdef Py_ssize_t ny = u.shape[0]
    cdef Py_ssize_t nx = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Ftil = np.empty((ny, nx), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G = np.empty((ny, nx), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double t, at
    for i in range(ny):
        for j in range(nx):
            t = u[i, j]
            if t <= 0.0:
                Ftil[i, j] = 0.0
            elif t <= A:
                Ftil[i, j] = lam * t * t / 2.0 - pow(fabs(t), p + 1.0) / (p + 1.0)
            else:
                Ftil[i, j] = A * t + FA - A * A
            at = fabs(t)
            if at <= A:
                G[i, j] = t * t
            else:
                G[i, j] = 2.0 * A * at - A * A
    return Ftil, G


def logistic_grad_arrays(cnp.ndarray[cnp.float64_t, ndim=2] u,
                         double lam, double p, double A, double FA):
    """(ftil, g, G) for the logistic family, cellwise, in one pass."""
    cdef Py_ssize_t ny = u.shape[0]
    cdef Py_ssize_t nx = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ftil = np.empty((ny, nx), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g = np.empty((ny, nx), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] G = np.empty((ny, nx), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double t, at
    for i in range(ny):
        for j in range(nx):
            t = u[i, j]
            if t <= 0.0:
                ftil[i, j] = 0.0
            elif t <= A:
                ftil[i, j] = lam * t - pow(fabs(t), p - 1.0) * t
            else:
                ftil[i, j] = A
            at = fabs(t)
            if at <= A:
                G[i, j] = t * t
                g[i, j] = 2.0 * t
            else:
                G[i, j] = 2.0 * A * at - A * A
                g[i, j] = 2.0 * A if t > 0 else -2.0 * A
    return ftil, g, G


def face_energy_density(cnp.ndarray[cnp.float64_t, ndim=2] u,
                        cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] mask):
    """Per-cell 0.5*(diff)^2 over owned east and north faces (both ends in mask)."""
    cdef Py_ssize_t ny = u.shape[0]
    cdef Py_ssize_t nx = u.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((ny, nx), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double de, dn, et, nt
    for i in range(ny):
        for j in range(nx):
            et = 0.0
            nt = 0.0
            if j + 1 < nx and mask[i, j] and mask[i, j + 1]:
                de = u[i, j + 1] - u[i, j]
                et = 0.5 * de * de
            if i + 1 < ny and mask[i, j] and mask[i + 1, j]:
                dn = u[i + 1, j] - u[i, j]
                nt = 0.5 * dn * dn
            out[i, j] = et + nt
    return out
